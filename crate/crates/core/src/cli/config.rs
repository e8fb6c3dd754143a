use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::limit_cycle::Branch;
use crate::system::SystemSpec;

/// Sweep grid written `lo:hi:n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    /// Node values; logarithmic spacing needs `lo > 0`.
    pub fn values(&self, log: bool) -> Result<Vec<f64>> {
        if log && !(self.lo > 0.0) {
            return Err(Error::Usage(format!(
                "a logarithmic grid needs lo > 0, got {}",
                self.lo
            )));
        }
        if self.n == 1 {
            return Ok(vec![self.lo]);
        }
        let last = (self.n - 1) as f64;
        Ok((0..self.n)
            .map(|i| {
                let u = i as f64 / last;
                if i + 1 == self.n {
                    self.hi
                } else if log {
                    self.lo * (self.hi / self.lo).powf(u)
                } else {
                    self.lo + (self.hi - self.lo) * u
                }
            })
            .collect())
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Usage(format!("grid must look like lo:hi:n, got {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(bad());
        };
        let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if !(lo.is_finite() && hi.is_finite()) || n == 0 || hi < lo || (n > 1 && hi == lo) {
            return Err(bad());
        }
        Ok(Grid { lo, hi, n })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}:{:?}:{}", self.lo, self.hi, self.n)
    }
}

impl TryFrom<String> for Grid {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Grid> for String {
    fn from(g: Grid) -> String {
        g.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Non-conservative work only.
    Nc,
    /// Energy change plus non-conservative work.
    #[default]
    Total,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    #[default]
    Free,
    Nc,
    Total,
}

/// Everything a run depends on. Written next to the artifacts as
/// `config.json` and accepted back through `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x10: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x20: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x1f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<Branch>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sf_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x10_grid: Option<Grid>,
    #[serde(default)]
    pub log_grid: bool,
    #[serde(default)]
    pub find_critical: bool,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub drive: Drive,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_horizon: Option<f64>,
    #[serde(default)]
    pub replay: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator: Option<IntegratorConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn new(system: SystemSpec) -> Self {
        Self {
            system,
            x10: None,
            x20: None,
            sf: None,
            tf: None,
            x1f: None,
            branch: None,
            sf_grid: None,
            x10_grid: None,
            log_grid: false,
            find_critical: false,
            objective: Objective::default(),
            drive: Drive::default(),
            free_horizon: None,
            replay: false,
            out_dir: None,
            integrator: None,
            jobs: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn integrator(&self) -> IntegratorConfig {
        self.integrator.unwrap_or_else(IntegratorConfig::verification)
    }

    pub fn start(&self) -> Result<crate::system::PhasePoint> {
        let x10 = self.x10.ok_or_else(|| Error::Usage("--x10 is required".into()))?;
        Ok(crate::system::PhasePoint::new(x10, self.x20.unwrap_or(0.0)))
    }

    /// Scaled time from exactly one of `sf` and `tf`.
    pub fn scaled_time(&self) -> Result<f64> {
        match (self.sf, self.tf) {
            (Some(sf), None) => Ok(sf),
            (None, Some(tf)) => Ok(tf / self.system.mu()),
            (Some(_), Some(_)) => Err(Error::Usage("give either --sf or --tf, not both".into())),
            (None, None) => Err(Error::Usage("one of --sf or --tf is required".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parses_and_prints_back() {
        let g: Grid = "10:400:50".parse().unwrap();
        assert_eq!(
            g,
            Grid {
                lo: 10.0,
                hi: 400.0,
                n: 50
            }
        );
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
        for bad in ["1:2", "1:2:0", "3:1:4", "a:b:c", "1:1:3"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn grid_values_hit_both_ends() {
        let g: Grid = "1:1000:4".parse().unwrap();
        let v = g.values(true).unwrap();
        assert_eq!(v.first(), Some(&1.0));
        assert_eq!(v.last(), Some(&1000.0));
        assert!((v[1] - 10.0).abs() < 1e-12);
        assert_eq!(g.values(false).unwrap()[1], 334.0);
        assert!("0:1:3".parse::<Grid>().unwrap().values(true).is_err());
    }

    #[test]
    fn exactly_one_time() {
        let mut c = RunConfig::new(SystemSpec::van_der_pol(0.1));
        assert!(c.scaled_time().is_err());
        c.tf = Some(1.0);
        assert!((c.scaled_time().unwrap() - 10.0).abs() < 1e-12);
        c.sf = Some(3.0);
        assert!(c.scaled_time().is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let mut c = RunConfig::new(SystemSpec::Explicit {
            mu: 0.1,
            h: vec![-1.0, 0.0, 0.0, 0.0, 1.0],
            dv: vec![0.0, 1.0],
        });
        c.x10 = Some(5.0);
        c.sf_grid = Some("0.1:1e3:7".parse().unwrap());
        c.log_grid = true;
        c.branch = Some(Branch::Lower);
        c.integrator = Some(IntegratorConfig::rk4(1e-3));
        c.out_dir = Some("out/run".into());
        let back: RunConfig = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(
            serde_json::from_str::<RunConfig>(r#"{"system":{"preset":"van_der_pol","mu":1},"bogus":1}"#)
                .is_err()
        );
    }
}
