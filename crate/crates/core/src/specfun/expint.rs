use crate::error::{domain, Error, Result};

use super::EULER_GAMMA;

/// Γ(0, x) = E₁(x) = ∫_x^∞ e^{-u}/u du for x > 0.
pub fn upper_incomplete_gamma_zero(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("upper_incomplete_gamma_zero", format!("x must be > 0, got {x}")));
    }
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        for k in 1..200 {
            let kf = k as f64;
            fact *= -x / kf;
            let term = -fact / kf;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        return Ok(-EULER_GAMMA - x.ln() + sum);
    }
    // Modified Lentz evaluation of the continued fraction.
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h * (-x).exp());
        }
    }
    Err(Error::Convergence {
        func: "upper_incomplete_gamma_zero",
        msg: format!("continued fraction at x = {x}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_to_inf, QuadConfig};

    #[test]
    fn value_at_one_matches_quadrature() {
        let oracle = integrate_to_inf(|u: f64| (-u).exp() / u, 1.0, 1.0, QuadConfig::new(1e-15, 1e-13))
            .unwrap()
            .value;
        let got = upper_incomplete_gamma_zero(1.0).unwrap();
        assert!(((got - oracle) / oracle).abs() < 1e-10);
        assert!((got - 0.219_383_9).abs() < 1e-7);
    }

    #[test]
    fn small_x_expansion() {
        let x: f64 = 1e-6;
        let want = -EULER_GAMMA - x.ln() + x - x * x / 4.0;
        let got = upper_incomplete_gamma_zero(x).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 13.238_296).abs() < 1e-4);
    }

    #[test]
    fn large_x_asymptote_and_monotone() {
        let x = 40.0;
        let got = upper_incomplete_gamma_zero(x).unwrap();
        let lead = (-x).exp() / x;
        assert!((got / lead - 1.0).abs() < 1.0 / x);
        let mut prev = f64::INFINITY;
        for i in 0..400 {
            let x = 1e-8 * 1.06f64.powi(i);
            let v = upper_incomplete_gamma_zero(x).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn quadrature_agreement_across_range() {
        for &x in &[1e-8, 0.01, 0.5, 0.999, 1.001, 3.0, 10.0, 50.0] {
            let oracle = integrate_to_inf(|u: f64| (-u).exp() / u, x, x.max(1.0), QuadConfig::new(0.0, 1e-13))
                .unwrap()
                .value;
            let got = upper_incomplete_gamma_zero(x).unwrap();
            assert!(((got - oracle) / oracle).abs() < 1e-9, "x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(upper_incomplete_gamma_zero(0.0).is_err());
    }
}
