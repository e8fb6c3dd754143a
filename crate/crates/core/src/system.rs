//! Oscillator definitions: the driven Lienard equation
//! `x'' + mu h(x) x' + V'(x) = F(t)` with even `h` and even `V`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::brent;
use crate::polynomial::Polynomial;

const ROOT_TOL: f64 = 1e-12;
pub const DEFAULT_GRID_MAX: f64 = 10.0;
pub const DEFAULT_GRID_POINTS: usize = 4000;

/// A point `(x, x')` of the phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x1: f64,
    pub x2: f64,
}

impl PhasePoint {
    pub const fn new(x1: f64, x2: f64) -> Self {
        Self { x1, x2 }
    }

    pub fn is_finite(&self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    /// Point reflection through the origin.
    pub fn reflect(self) -> Self {
        Self::new(-self.x1, -self.x2)
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        (self.x1 - other.x1).hypot(self.x2 - other.x2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    VanDerPol,
}

/// JSON form of a system: either explicit polynomials or a named preset.
///
/// ```json
/// {"mu": 0.1, "h": [-1, 0, 1], "dV": [0, 1]}
/// {"preset": "van_der_pol", "mu": 0.1}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    Preset {
        preset: Preset,
        mu: f64,
    },
    Explicit {
        mu: f64,
        h: Vec<f64>,
        #[serde(rename = "dV")]
        dv: Vec<f64>,
    },
}

impl SystemSpec {
    pub fn van_der_pol(mu: f64) -> Self {
        SystemSpec::Preset {
            preset: Preset::VanDerPol,
            mu,
        }
    }

    pub fn mu(&self) -> f64 {
        match self {
            SystemSpec::Preset { mu, .. } | SystemSpec::Explicit { mu, .. } => *mu,
        }
    }

    pub fn definition(&self) -> SystemDefinition {
        match self {
            SystemSpec::Preset {
                preset: Preset::VanDerPol,
                mu,
            } => SystemDefinition::van_der_pol(*mu),
            SystemSpec::Explicit { mu, h, dv } => SystemDefinition {
                mu: *mu,
                h: Polynomial::new(h.clone()),
                dv: Polynomial::new(dv.clone()),
            },
        }
    }

    pub fn build(&self) -> Result<LienardSystem> {
        LienardSystem::from_definition(self.definition())
    }
}

/// Unvalidated system data.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDefinition {
    pub mu: f64,
    pub h: Polynomial,
    pub dv: Polynomial,
}

impl SystemDefinition {
    pub fn new(mu: f64, h: impl Into<Polynomial>, dv: impl Into<Polynomial>) -> Self {
        Self {
            mu,
            h: h.into(),
            dv: dv.into(),
        }
    }

    pub fn van_der_pol(mu: f64) -> Self {
        Self::new(mu, vec![-1.0, 0.0, 1.0], vec![0.0, 1.0])
    }
}

/// One named condition of the limit-cycle existence check.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<ConditionCheck>,
    pub b: Option<f64>,
    pub a: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, condition: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(ConditionCheck {
            condition: condition.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Checks the conditions under which the undriven equation has a unique
/// stable limit cycle, on the grid `x_i = x_grid_max * i / n_grid`.
pub fn validate_system(def: &SystemDefinition, x_grid_max: f64, n_grid: usize) -> Result<ValidationReport> {
    if n_grid < 100 {
        return Err(Error::domain(format!(
            "n_grid must be at least 100, got {n_grid}"
        )));
    }
    if !(x_grid_max > 0.0 && x_grid_max.is_finite()) {
        return Err(Error::domain(format!(
            "x_grid_max must be positive, got {x_grid_max}"
        )));
    }
    let grid: Vec<f64> = (1..=n_grid)
        .map(|i| x_grid_max * i as f64 / n_grid as f64)
        .collect();

    let mut report = ValidationReport {
        checks: Vec::new(),
        b: None,
        a: None,
    };

    report.push(
        "mu positive",
        def.mu > 0.0 && def.mu.is_finite(),
        format!("mu = {}", def.mu),
    );
    report.push(
        "h even",
        def.h.is_even(),
        if def.h.is_even() {
            "ok"
        } else {
            "h has odd-power terms"
        },
    );
    report.push(
        "dV odd",
        def.dv.is_odd(),
        if def.dv.is_odd() {
            "ok"
        } else {
            "dV has even-power terms"
        },
    );

    let confining = grid.iter().find(|&&x| def.dv.eval(x) * x <= 0.0);
    match confining {
        None if def.dv.leading_coefficient() > 0.0 => report.push("potential confining", true, "ok"),
        None => report.push(
            "potential confining",
            false,
            "potential not confining: V'(x) does not grow without bound",
        ),
        Some(x) => report.push(
            "potential confining",
            false,
            format!("potential not confining: V'(x) x <= 0 at x = {x}"),
        ),
    }

    match single_positive_zero(&def.h, &grid) {
        Ok(b) => {
            report.b = Some(b);
            report.push("h single positive zero", true, format!("b = {b}"));
        }
        Err(msg) => report.push("h single positive zero", false, msg.replace("{f}", "h")),
    }

    let xi = def.h.antiderivative();
    match single_positive_zero(&xi, &grid) {
        Ok(a) => {
            report.a = Some(a);
            report.push("xi single positive zero", true, format!("a = {a}"));
            let beyond: Vec<f64> = grid.iter().copied().filter(|&x| x > a).collect();
            let worst = beyond
                .windows(2)
                .map(|w| xi.eval(w[1]) - xi.eval(w[0]))
                .fold(f64::INFINITY, f64::min);
            let ok = worst >= -1e-12 && xi.leading_coefficient() > 0.0;
            report.push(
                "xi non-decreasing beyond a",
                ok,
                if ok {
                    "ok".to_string()
                } else {
                    format!("xi decreases beyond a (worst step {worst})")
                },
            );
        }
        Err(msg) => report.push("xi single positive zero", false, msg.replace("{f}", "xi")),
    }

    Ok(report)
}

/// Locates the unique sign change from negative to positive on the grid.
fn single_positive_zero(p: &Polynomial, grid: &[f64]) -> std::result::Result<f64, String> {
    let values: Vec<f64> = grid.iter().map(|&x| p.eval(x)).collect();
    let changes: Vec<usize> = (0..values.len() - 1)
        .filter(|&i| (values[i] < 0.0 && values[i + 1] >= 0.0) || (values[i] >= 0.0 && values[i + 1] < 0.0))
        .collect();
    match changes.as_slice() {
        [] => Err("{f} has no positive zero".to_string()),
        [i] => {
            let i = *i;
            if values[i] >= 0.0 {
                return Err("{f} is not negative between 0 and its zero".to_string());
            }
            let root = brent(|x| p.eval(x), grid[i], grid[i + 1], ROOT_TOL)
                .map_err(|e| format!("{{f}} root refinement failed: {e}"))?;
            Ok(root)
        }
        _ => Err("{f} has more than one positive zero".to_string()),
    }
}

/// A validated Lienard oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct LienardSystem {
    mu: f64,
    h: Polynomial,
    dh: Polynomial,
    dv: Polynomial,
    v: Polynomial,
    b: f64,
    a: f64,
}

impl LienardSystem {
    /// Validates on the default grid `[0, 10]`.
    pub fn new(mu: f64, h: impl Into<Polynomial>, dv: impl Into<Polynomial>) -> Result<Self> {
        Self::from_definition(SystemDefinition::new(mu, h, dv))
    }

    pub fn from_definition(def: SystemDefinition) -> Result<Self> {
        Self::with_grid(def, DEFAULT_GRID_MAX, DEFAULT_GRID_POINTS)
    }

    pub fn with_grid(def: SystemDefinition, x_grid_max: f64, n_grid: usize) -> Result<Self> {
        if !(def.mu > 0.0 && def.mu.is_finite()) {
            return Err(Error::domain(format!("mu must be positive, got {}", def.mu)));
        }
        let report = validate_system(&def, x_grid_max, n_grid)?;
        if let Some(fail) = report.failures().next() {
            return Err(Error::Validation(format!("{}: {}", fail.condition, fail.detail)));
        }
        let (b, a) = (report.b.unwrap(), report.a.unwrap());
        Ok(Self {
            mu: def.mu,
            dh: def.h.derivative(),
            v: def.dv.antiderivative(),
            h: def.h,
            dv: def.dv,
            b,
            a,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Smallest positive zero of `h`.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Positive zero of `xi(x) = int_0^x h`.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> &Polynomial {
        &self.h
    }

    pub fn dh(&self) -> &Polynomial {
        &self.dh
    }

    pub fn dv(&self) -> &Polynomial {
        &self.dv
    }

    /// Potential with `V(0) = 0`.
    pub fn potential(&self) -> &Polynomial {
        &self.v
    }

    pub fn definition(&self) -> SystemDefinition {
        SystemDefinition::new(self.mu, self.h.clone(), self.dv.clone())
    }

    pub fn spec(&self) -> SystemSpec {
        if self.is_van_der_pol() {
            SystemSpec::van_der_pol(self.mu)
        } else {
            SystemSpec::Explicit {
                mu: self.mu,
                h: self.h.coefficients().to_vec(),
                dv: self.dv.coefficients().to_vec(),
            }
        }
    }

    pub fn is_van_der_pol(&self) -> bool {
        trimmed(&self.h) == [-1.0, 0.0, 1.0] && trimmed(&self.dv) == [0.0, 1.0]
    }

    /// Re-runs the existence checks on a custom grid.
    pub fn validate(&self, x_grid_max: f64, n_grid: usize) -> Result<ValidationReport> {
        validate_system(&self.definition(), x_grid_max, n_grid)
    }

    /// Right-hand side `(x2, -mu h(x1) x2 - V'(x1) + F)`.
    pub fn vector_field(&self, p: PhasePoint, force: f64) -> (f64, f64) {
        (
            p.x2,
            -self.mu * self.h.eval(p.x1) * p.x2 - self.dv.eval(p.x1) + force,
        )
    }

    /// `E = x2^2 / 2 + V(x1)`.
    pub fn energy(&self, p: PhasePoint) -> f64 {
        0.5 * p.x2 * p.x2 + self.v.eval(p.x1)
    }

    /// Integrand of the non-conservative work, `mu h(x1) x2^2`.
    pub fn dissipation_rate(&self, p: PhasePoint) -> f64 {
        self.mu * self.h.eval(p.x1) * p.x2 * p.x2
    }
}

fn trimmed(p: &Polynomial) -> &[f64] {
    let d = p.degree();
    &p.coefficients()[..(d + 1) as usize]
}

/// Van der Pol: `h = x^2 - 1`, `V' = x`.
pub fn make_van_der_pol(mu: f64) -> Result<LienardSystem> {
    LienardSystem::from_definition(SystemDefinition::van_der_pol(mu))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn van_der_pol_constants() {
        let s = make_van_der_pol(0.1).unwrap();
        assert!((s.b() - 1.0).abs() < 1e-12);
        assert!((s.a() - 1.732_050_8).abs() < 1e-7);
        assert_eq!(s.h().coefficients(), &[-1.0, 0.0, 1.0]);
        assert_eq!(s.dv().coefficients(), &[0.0, 1.0]);
        assert!(s.is_van_der_pol());
    }

    #[test]
    fn van_der_pol_damping_polynomial() {
        let s = make_van_der_pol(1.0).unwrap();
        assert_eq!(s.h().eval(0.0), -1.0);
        assert_eq!(s.h().eval(2.0), 3.0);
    }

    #[test]
    fn non_positive_mu_rejected() {
        assert!(matches!(make_van_der_pol(0.0), Err(Error::Domain(_))));
        assert!(matches!(make_van_der_pol(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_mu_passes_validation_on_wide_grid() {
        let r = validate_system(&SystemDefinition::van_der_pol(0.01), 10.0, 1000).unwrap();
        assert!(r.passed(), "{r:?}");
        assert!((r.b.unwrap() - 1.0).abs() < 1e-12);
        assert!((r.a.unwrap() - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn damping_without_positive_zero_fails() {
        let def = SystemDefinition::new(0.1, vec![1.0, 0.0, 1.0], vec![0.0, 1.0]);
        let r = validate_system(&def, 10.0, 1000).unwrap();
        assert!(!r.passed());
        let fail = r.failures().next().unwrap();
        assert_eq!(fail.detail, "h has no positive zero");
        assert!(LienardSystem::from_definition(def).is_err());
    }

    #[test]
    fn repulsive_potential_fails() {
        let def = SystemDefinition::new(0.1, vec![-1.0, 0.0, 1.0], vec![0.0, -1.0]);
        let r = validate_system(&def, 10.0, 1000).unwrap();
        let fail = r.failures().next().unwrap();
        assert_eq!(fail.condition, "potential confining");
        assert!(fail.detail.starts_with("potential not confining"));
    }

    #[test]
    fn odd_damping_is_rejected() {
        let def = SystemDefinition::new(0.1, vec![-1.0, 0.5, 1.0], vec![0.0, 1.0]);
        let r = validate_system(&def, 10.0, 1000).unwrap();
        assert!(r.failures().any(|c| c.condition == "h even"));
    }

    #[test]
    fn coarse_grid_rejected() {
        assert!(validate_system(&SystemDefinition::van_der_pol(0.1), 10.0, 50).is_err());
    }

    #[test]
    fn quartic_damping_is_valid() {
        let s = LienardSystem::new(0.1, vec![-1.0, 0.0, 0.0, 0.0, 1.0], vec![0.0, 1.0]).unwrap();
        assert!((s.b() - 1.0).abs() < 1e-12);
        assert!((s.a() - 5f64.powf(0.25)).abs() < 1e-12);
        assert!(!s.is_van_der_pol());
    }

    #[test]
    fn vector_field_examples() {
        let s = make_van_der_pol(0.1).unwrap();
        assert_eq!(s.vector_field(PhasePoint::new(2.0, 0.0), 0.0), (0.0, -2.0));
        let (a, b) = s.vector_field(PhasePoint::new(0.0, 1.0), 0.0);
        assert_eq!(a, 1.0);
        assert!((b - 0.1).abs() < 1e-15);
        let s1 = make_van_der_pol(1.0).unwrap();
        assert_eq!(s1.vector_field(PhasePoint::new(1.0, 1.0), 3.0), (1.0, 2.0));
    }

    #[test]
    fn no_damping_on_the_zero_of_h() {
        let s = make_van_der_pol(0.3).unwrap();
        for x2 in [-3.0, -0.5, 0.0, 1.0, 7.0] {
            let (_, d2) = s.vector_field(PhasePoint::new(s.b(), x2), 0.0);
            assert!((d2 + s.dv().eval(s.b())).abs() < 1e-12);
        }
    }

    #[test]
    fn spec_json_forms() {
        let p: SystemSpec = serde_json::from_str(r#"{"preset": "van_der_pol", "mu": 0.1}"#).unwrap();
        assert_eq!(p, SystemSpec::van_der_pol(0.1));
        let e: SystemSpec =
            serde_json::from_str(r#"{"mu": 0.5, "h": [-1, 0, 0, 0, 1], "dV": [0, 1]}"#).unwrap();
        let s = e.build().unwrap();
        assert_eq!(s.mu(), 0.5);
        let back: SystemSpec = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(back, e);
        assert_eq!(
            make_van_der_pol(0.2).unwrap().spec(),
            SystemSpec::van_der_pol(0.2)
        );
    }

    #[test]
    fn energy_uses_integrated_potential() {
        let s = LienardSystem::new(0.1, vec![-1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 2.0]).unwrap();
        // V = x^2/2 + x^4/2
        let e = s.energy(PhasePoint::new(1.0, 2.0));
        assert!((e - (2.0 + 0.5 + 0.5)).abs() < 1e-15);
    }
}
