use serde::{Deserialize, Serialize};

/// Real polynomial stored by ascending powers: `coefficients[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coefficients: Vec<f64>,
}

impl Polynomial {
    pub fn new(coefficients: Vec<f64>) -> Self {
        Self { coefficients }
    }

    pub fn zero() -> Self {
        Self::new(Vec::new())
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Index of the last non-zero coefficient, -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .map_or(-1, |i| i as isize)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at the origin.
    pub fn antiderivative(&self) -> Polynomial {
        let mut c = Vec::with_capacity(self.coefficients.len() + 1);
        c.push(0.0);
        c.extend(
            self.coefficients
                .iter()
                .enumerate()
                .map(|(i, &a)| a / (i + 1) as f64),
        );
        Polynomial::new(c)
    }

    /// All odd-power coefficients are exactly zero.
    pub fn is_even(&self) -> bool {
        self.coefficients.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    /// All even-power coefficients are exactly zero.
    pub fn is_odd(&self) -> bool {
        self.coefficients.iter().step_by(2).all(|&c| c == 0.0)
    }

    /// Coefficient of the highest non-vanishing power (0 for the zero polynomial).
    pub fn leading_coefficient(&self) -> f64 {
        match self.degree() {
            -1 => 0.0,
            d => self.coefficients[d as usize],
        }
    }
}

impl From<Vec<f64>> for Polynomial {
    fn from(c: Vec<f64>) -> Self {
        Polynomial::new(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn degree_conventions() {
        assert_eq!(Polynomial::zero().degree(), -1);
        assert_eq!(Polynomial::new(vec![0.0, 0.0]).degree(), -1);
        assert_eq!(Polynomial::new(vec![-1.0, 0.0, 1.0, 0.0]).degree(), 2);
    }

    #[test]
    fn van_der_pol_damping_values() {
        let h = Polynomial::new(vec![-1.0, 0.0, 1.0]);
        assert_eq!(h.eval(0.0), -1.0);
        assert_eq!(h.eval(2.0), 3.0);
        assert!(h.is_even());
        assert!(!h.is_odd());
        assert_eq!(h.derivative().coefficients(), &[0.0, 2.0]);
    }

    #[test]
    fn antiderivative_of_vdp_damping_is_xi() {
        let xi = Polynomial::new(vec![-1.0, 0.0, 1.0]).antiderivative();
        // xi(x) = x^3/3 - x
        assert!((xi.eval(3f64.sqrt())).abs() < 1e-15);
        assert_eq!(xi.eval(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn horner_matches_power_sum(c in proptest::collection::vec(-3.0f64..3.0, 0..6), x in -2.0f64..2.0) {
            let p = Polynomial::new(c.clone());
            let direct: f64 = c.iter().enumerate().map(|(i, a)| a * x.powi(i as i32)).sum();
            prop_assert!((p.eval(x) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        }

        #[test]
        fn derivative_inverts_antiderivative(c in proptest::collection::vec(-3.0f64..3.0, 1..6), x in -2.0f64..2.0) {
            let p = Polynomial::new(c);
            let q = p.antiderivative().derivative();
            prop_assert!((p.eval(x) - q.eval(x)).abs() < 1e-12);
        }
    }
}
