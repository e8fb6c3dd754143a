/// Adaptive Simpson quadrature with Richardson correction.
///
/// The tolerance is absolute and is halved on each bisection; recursion stops
/// at `max_depth` regardless of the error estimate.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, abs_tol: f64, max_depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, abs_tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let both = left + right;
    let delta = both - whole;
    // below a few ulps of the value the estimate is pure rounding noise
    let floor = 16.0 * f64::EPSILON * both.abs();
    if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
        return both + delta / 15.0;
    }
    recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite Simpson rule on `n` equal intervals (`n` is rounded up to even).
pub fn composite_simpson<F>(f: F, a: f64, b: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let x = a + h * i as f64;
        if i % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b))
}

/// Composite Simpson on already sampled, equally spaced values.
pub fn simpson_samples(values: &[f64], h: f64) -> f64 {
    let n = values.len() - 1;
    assert!(
        n >= 2 && n.is_multiple_of(2),
        "simpson_samples needs an even number of intervals"
    );
    let mut acc = values[0] + values[n];
    for (i, v) in values.iter().enumerate().take(n).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_simpson_polynomials_exact() {
        let v = adaptive_simpson(|x| x * x * x - x, 0.0, 2.0, 1e-12, 30);
        assert!((v - 2.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_simpson_sqrt_singularity() {
        // integrable derivative singularity at the left endpoint
        let v = adaptive_simpson(|x: f64| x.sqrt(), 0.0, 1.0, 1e-12, 40);
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn composite_simpson_sine() {
        let v = composite_simpson(f64::sin, 0.0, std::f64::consts::PI, 1000);
        assert!((v - 2.0).abs() < 1e-11);
    }

    #[test]
    fn sampled_matches_functional() {
        let n = 100;
        let h = 1.0 / n as f64;
        let vals: Vec<f64> = (0..=n).map(|i| (i as f64 * h).exp()).collect();
        let a = simpson_samples(&vals, h);
        let b = composite_simpson(f64::exp, 0.0, 1.0, n);
        assert!((a - b).abs() < 1e-15);
    }
}
