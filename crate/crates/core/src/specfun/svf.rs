//! Slowly varying functions: evaluation helpers and a ratio probe.

/// (ln y)^p for y > 1.
pub fn log_power(y: f64, p: f64) -> f64 {
    y.ln().powf(p)
}

/// L(c y) / L(y); tends to 1 as y → ∞ when L varies slowly.
pub fn svf_ratio<F: Fn(f64) -> f64>(l: F, y: f64, c: f64) -> f64 {
    l(c * y) / l(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_powers_vary_slowly() {
        let l = |y: f64| log_power(y, -1.5);
        let r1 = (svf_ratio(l, 1e4, 2.0) - 1.0).abs();
        let r2 = (svf_ratio(l, 1e12, 2.0) - 1.0).abs();
        assert!(r2 < r1 && r2 < 0.06);
        // A genuine power is not slowly varying.
        assert!((svf_ratio(|y: f64| y.powf(0.1), 1e12, 2.0) - 1.0).abs() > 0.05);
    }
}
