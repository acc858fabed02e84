//! Subordinator families and kernel classes, described through the
//! Laplace exponent Φ, the kernel transform 𝒦(λ) = Φ(λ)/λ and, where a
//! closed form exists, the time-domain kernel k(t) = σ((t, ∞)).
//!
//! The log classes C2 and C3 are defined by their λ → 0 behaviour only.
//! [`SubordinatorSpec::kernel_laplace`] returns that class form verbatim
//! (valid for λ < 1). Anything that needs a genuine Laplace symbol on the
//! whole cut plane (inversion contours, densities, kernels) uses
//! [`SubordinatorSpec::symbol`], a distributed-order realization
//!
//!   𝒦(λ) = ∫_0^1 λ^{α-1} μ(α) dα,  μ(α) = c α^s / Γ(1+s),
//!
//! which is a Bernstein-function mixture of stable exponents and equals the
//! class form up to a factor 1 + O(λ ln^s(1/λ)) as λ → 0. C2 is the s = 0,
//! c = μ(0) member: 𝒦(λ) = μ(0)(λ - 1)/(λ ln λ).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::specfun::{gamma_fn, upper_incomplete_gamma_zero};

/// Kernel class of the small-λ behaviour of 𝒦.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelClass {
    C1,
    C2,
    C3,
}

impl fmt::Display for KernelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelClass::C1 => "c1",
            KernelClass::C2 => "c2",
            KernelClass::C3 => "c3",
        })
    }
}

impl FromStr for KernelClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Self::C1),
            "c2" => Ok(Self::C2),
            "c3" => Ok(Self::C3),
            _ => Err(Error::Parse(format!(
                "unknown kernel class `{s}` (expected c1, c2 or c3)"
            ))),
        }
    }
}

/// A subordinator family or kernel class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SubordinatorSpec {
    /// θ-stable subordinator, Φ(λ) = λ^θ.
    Stable { theta: f64 },
    /// Gamma process, Φ(λ) = a ln(1 + λ/b).
    Gamma { a: f64, b: f64 },
    /// 𝒦(λ) = λ^{θ-1}.
    ClassC1 { theta: f64 },
    /// 𝒦(λ) ~ λ^{-1} μ(0) / ln(1/λ).
    ClassC2 { mu0: f64 },
    /// 𝒦(λ) ~ λ^{-1} c ln(1/λ)^{-1-s}.
    ClassC3 { s: f64, c: f64 },
}

impl SubordinatorSpec {
    pub fn stable(theta: f64) -> Result<Self> {
        Self::Stable { theta }.validated()
    }
    pub fn gamma(a: f64, b: f64) -> Result<Self> {
        Self::Gamma { a, b }.validated()
    }
    pub fn class_c1(theta: f64) -> Result<Self> {
        Self::ClassC1 { theta }.validated()
    }
    pub fn class_c2(mu0: f64) -> Result<Self> {
        Self::ClassC2 { mu0 }.validated()
    }
    pub fn class_c3(s: f64, c: f64) -> Result<Self> {
        Self::ClassC3 { s, c }.validated()
    }

    fn validated(self) -> Result<Self> {
        let ok = match self {
            Self::Stable { theta } | Self::ClassC1 { theta } => theta > 0.0 && theta < 1.0,
            Self::Gamma { a, b } => a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite(),
            Self::ClassC2 { mu0 } => mu0 > 0.0 && mu0.is_finite(),
            Self::ClassC3 { s, c } => s > 0.0 && c > 0.0 && s.is_finite() && c.is_finite(),
        };
        if ok {
            Ok(self)
        } else {
            Err(domain("SubordinatorSpec", format!("parameters out of range: {self}")))
        }
    }

    /// The kernel class of the λ → 0 behaviour (none for Gamma, whose 𝒦 tends to a/b).
    pub fn class(&self) -> Option<KernelClass> {
        match self {
            Self::Stable { .. } | Self::ClassC1 { .. } => Some(KernelClass::C1),
            Self::ClassC2 { .. } => Some(KernelClass::C2),
            Self::ClassC3 { .. } => Some(KernelClass::C3),
            Self::Gamma { .. } => None,
        }
    }

    /// θ for the stable-type families.
    pub fn stable_index(&self) -> Option<f64> {
        match *self {
            Self::Stable { theta } | Self::ClassC1 { theta } => Some(theta),
            _ => None,
        }
    }

    fn check_lambda(&self, lambda: f64, func: &'static str) -> Result<()> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(func, format!("lambda must be > 0, got {lambda}")));
        }
        if matches!(self, Self::ClassC2 { .. } | Self::ClassC3 { .. }) && lambda >= 1.0 {
            return Err(domain(
                func,
                format!("class forms C2/C3 are defined for lambda < 1 only, got {lambda}"),
            ));
        }
        Ok(())
    }

    /// Φ(λ) = λ 𝒦(λ).
    pub fn laplace_exponent(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda, "laplace_exponent")?;
        Ok(match *self {
            Self::Stable { theta } | Self::ClassC1 { theta } => lambda.powf(theta),
            Self::Gamma { a, b } => a * (lambda / b).ln_1p(),
            _ => lambda * self.kernel_laplace(lambda)?,
        })
    }

    /// 𝒦(λ) = ∫_0^∞ e^{-λt} k(t) dt; class forms for C2/C3.
    pub fn kernel_laplace(&self, lambda: f64) -> Result<f64> {
        self.check_lambda(lambda, "kernel_laplace")?;
        Ok(match *self {
            Self::Stable { theta } | Self::ClassC1 { theta } => lambda.powf(theta - 1.0),
            Self::Gamma { a, b } => a * (lambda / b).ln_1p() / lambda,
            Self::ClassC2 { mu0 } => mu0 / (lambda * (1.0 / lambda).ln()),
            Self::ClassC3 { s, c } => c * (1.0 / lambda).ln().powf(-1.0 - s) / lambda,
        })
    }

    pub fn has_time_kernel(&self) -> bool {
        matches!(self, Self::Stable { .. } | Self::Gamma { .. })
    }

    /// k(t) for the families with an explicit Lévy tail.
    pub fn kernel_time_domain(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(domain("kernel_time_domain", format!("t must be > 0, got {t}")));
        }
        match *self {
            Self::Stable { theta } => Ok(t.powf(-theta) / gamma_fn(1.0 - theta)),
            Self::Gamma { a, b } => Ok(a * upper_incomplete_gamma_zero(b * t)?),
            _ => Err(Error::Unsupported("kernel_time_domain")),
        }
    }

    /// 𝒦(λ) of the realized subordinator, analytic on ℂ \ (-∞, 0].
    pub fn symbol(&self, lambda: Complex64) -> Complex64 {
        match *self {
            Self::Stable { theta } | Self::ClassC1 { theta } => lambda.powf(theta - 1.0),
            Self::Gamma { a, b } => a * (1.0 + lambda / b).ln() / lambda,
            Self::ClassC2 { mu0 } => mu0 * log_mixture(0.0, lambda.ln()) / lambda,
            Self::ClassC3 { s, c } => c / gamma_fn(1.0 + s) * log_mixture(s, lambda.ln()) / lambda,
        }
    }

    /// Φ(λ) = λ 𝒦(λ) of the realized subordinator.
    pub fn exponent(&self, lambda: Complex64) -> Complex64 {
        match *self {
            Self::Stable { theta } | Self::ClassC1 { theta } => lambda.powf(theta),
            Self::Gamma { a, b } => a * (1.0 + lambda / b).ln(),
            _ => lambda * self.symbol(lambda),
        }
    }

    /// Real-axis 𝒦 of the realized subordinator.
    pub fn symbol_real(&self, lambda: f64) -> f64 {
        self.symbol(Complex64::new(lambda, 0.0)).re
    }

    /// Real-axis Φ of the realized subordinator.
    pub fn exponent_real(&self, lambda: f64) -> f64 {
        self.exponent(Complex64::new(lambda, 0.0)).re
    }

    /// Natural scale of E(t): 1/Φ(1/t).
    pub fn tau_scale(&self, t: f64) -> f64 {
        1.0 / self.exponent_real(1.0 / t)
    }
}

/// J_s(z) = ∫_0^1 α^s e^{zα} dα, entire in z.
///
/// Re z ≥ 0 sums the Taylor series directly; Re z < 0 uses Kummer's
/// transformation J_s(z) = e^z Σ (-z)^n / ((s+1)(s+2)···(s+n+1)), so that
/// neither branch cancels on the real axis.
pub fn log_mixture(s: f64, z: Complex64) -> Complex64 {
    if s == 0.0 && z.norm() > 0.1 {
        return (z.exp() - 1.0) / z;
    }
    let zn = z.norm();
    let mut sum = Complex64::new(0.0, 0.0);
    if z.re >= 0.0 {
        let mut pow = Complex64::new(1.0, 0.0);
        for n in 0..10_000usize {
            let nf = n as f64;
            let term = pow / (nf + s + 1.0);
            sum += term;
            if nf > zn && term.norm() < 1e-17 * sum.norm() {
                break;
            }
            pow *= z / (nf + 1.0);
        }
        sum
    } else {
        let w = -z;
        let mut term = Complex64::new(1.0 / (s + 1.0), 0.0);
        for n in 0..10_000usize {
            let nf = n as f64;
            sum += term;
            if nf > zn && term.norm() < 1e-17 * sum.norm() {
                break;
            }
            term *= w / (s + nf + 2.0);
        }
        z.exp() * sum
    }
}

impl fmt::Display for SubordinatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Stable { theta } => write!(f, "stable:{theta}"),
            Self::Gamma { a, b } => write!(f, "gamma:{a},{b}"),
            Self::ClassC1 { theta } => write!(f, "c1:{theta}"),
            Self::ClassC2 { mu0 } => write!(f, "c2:{mu0}"),
            Self::ClassC3 { s, c } => write!(f, "c3:{s},{c}"),
        }
    }
}

/// Grammar: `stable:θ | gamma:a,b | c1:θ | c2:μ0 | c3:s,c`.
impl FromStr for SubordinatorSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, args) = text
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `family:params`, got `{text}`")))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number `{p}` in `{text}`: {e}")))
            })
            .collect::<Result<_>>()?;
        let want = |n: usize| -> Result<()> {
            if nums.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "`{name}` takes {n} parameter(s), got {}",
                    nums.len()
                )))
            }
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "stable" => {
                want(1)?;
                Self::stable(nums[0])
            }
            "gamma" => {
                want(2)?;
                Self::gamma(nums[0], nums[1])
            }
            "c1" => {
                want(1)?;
                Self::class_c1(nums[0])
            }
            "c2" => {
                want(1)?;
                Self::class_c2(nums[0])
            }
            "c3" => {
                want(2)?;
                Self::class_c3(nums[0], nums[1])
            }
            other => Err(Error::Parse(format!("unknown subordinator family `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, integrate_to_inf, QuadConfig};
    use std::f64::consts::{E, PI};

    fn all_specs() -> Vec<SubordinatorSpec> {
        vec![
            SubordinatorSpec::stable(0.5).unwrap(),
            SubordinatorSpec::gamma(1.0, 2.0).unwrap(),
            SubordinatorSpec::class_c1(0.3).unwrap(),
            SubordinatorSpec::class_c2(1.0).unwrap(),
            SubordinatorSpec::class_c3(0.5, 2.0).unwrap(),
        ]
    }

    #[test]
    fn exponent_examples() {
        let st = SubordinatorSpec::stable(0.5).unwrap();
        assert_eq!(st.laplace_exponent(4.0).unwrap(), 2.0);
        let g = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
        assert!((g.laplace_exponent(E - 1.0).unwrap() - 1.0).abs() < 1e-15);
        let c2 = SubordinatorSpec::class_c2(1.0).unwrap();
        assert!((c2.laplace_exponent(1.0 / E).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kernel_laplace_examples() {
        assert_eq!(SubordinatorSpec::stable(0.5).unwrap().kernel_laplace(4.0).unwrap(), 0.5);
        let g = SubordinatorSpec::gamma(2.0, 1.0).unwrap();
        assert!((g.kernel_laplace(1.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        let c3 = SubordinatorSpec::class_c3(1.0, 1.0).unwrap();
        let v = c3.kernel_laplace((-2.0f64).exp()).unwrap();
        assert!((v - E * E / 4.0).abs() < 1e-12);
        assert!((v - 1.847_264).abs() < 1e-6);
        assert!(c3.kernel_laplace(1.0).is_err());
        assert!(SubordinatorSpec::class_c2(1.0).unwrap().kernel_laplace(2.0).is_err());
    }

    #[test]
    fn time_kernel_examples() {
        let st = SubordinatorSpec::stable(0.5).unwrap();
        assert!((st.kernel_time_domain(1.0).unwrap() - 1.0 / PI.sqrt()).abs() < 1e-15);
        assert!((st.kernel_time_domain(4.0).unwrap() - 0.282_094_8).abs() < 1e-7);
        let g = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
        assert!((g.kernel_time_domain(1.0).unwrap() - 0.219_383_9).abs() < 1e-7);
        assert!(matches!(
            SubordinatorSpec::class_c2(1.0).unwrap().kernel_time_domain(1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn exponent_is_lambda_times_kernel() {
        for spec in all_specs() {
            for i in 1..40 {
                let lambda = 0.024 * i as f64;
                let lhs = spec.laplace_exponent(lambda).unwrap();
                let rhs = lambda * spec.kernel_laplace(lambda).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs(), "{spec} at {lambda}");
                let z = Complex64::new(lambda, 0.3 * lambda);
                assert!((spec.exponent(z) - z * spec.symbol(z)).norm() <= 1e-12 * spec.exponent(z).norm());
            }
        }
    }

    #[test]
    fn stable_and_c1_agree_exactly() {
        let a = SubordinatorSpec::stable(0.37).unwrap();
        let b = SubordinatorSpec::class_c1(0.37).unwrap();
        for i in 1..50 {
            let l = 0.13 * i as f64;
            assert_eq!(a.kernel_laplace(l).unwrap(), b.kernel_laplace(l).unwrap());
        }
    }

    #[test]
    fn time_kernel_transforms_to_symbol() {
        for spec in [
            SubordinatorSpec::stable(0.5).unwrap(),
            SubordinatorSpec::gamma(1.0, 1.0).unwrap(),
        ] {
            for &lambda in &[0.5, 1.0, 2.0, 5.0] {
                let cfg = QuadConfig::new(1e-12, 1e-11);
                let head = integrate(
                    |t: f64| (-lambda * t).exp() * spec.kernel_time_domain(t).unwrap(),
                    0.0,
                    1.0,
                    cfg,
                )
                .unwrap();
                let tail = integrate_to_inf(
                    |t: f64| (-lambda * t).exp() * spec.kernel_time_domain(t).unwrap(),
                    1.0,
                    1.0,
                    cfg,
                )
                .unwrap();
                let want = spec.kernel_laplace(lambda).unwrap();
                assert!((head.value + tail.value - want).abs() < 1e-6, "{spec} at {lambda}");
            }
        }
    }

    #[test]
    fn bernstein_necessary_conditions() {
        for spec in all_specs() {
            // Class forms of C2/C3 are concave only for ln(1/λ) > 2 + s.
            let grid: Vec<f64> = (1..200).map(|i| 0.0002 * i as f64).collect();
            let phi: Vec<f64> = grid.iter().map(|&l| spec.laplace_exponent(l).unwrap()).collect();
            for w in phi.windows(3) {
                assert!(w[0] >= 0.0 && w[1] > w[0], "{spec} not increasing");
                assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-12, "{spec} not concave");
            }
            let real: Vec<f64> = (1..200).map(|i| spec.exponent_real(0.05 * i as f64)).collect();
            for w in real.windows(3) {
                assert!(w[1] > w[0] && w[0] - 2.0 * w[1] + w[2] <= 1e-12, "{spec} realization");
            }
        }
    }

    #[test]
    fn realization_matches_class_form_as_lambda_vanishes() {
        for spec in [
            SubordinatorSpec::class_c2(1.3).unwrap(),
            SubordinatorSpec::class_c3(0.5, 2.0).unwrap(),
        ] {
            let mut prev = f64::INFINITY;
            for k in 2..12 {
                let l = 10f64.powi(-k);
                let dev = (spec.symbol_real(l) / spec.kernel_laplace(l).unwrap() - 1.0).abs();
                assert!(dev < prev);
                prev = dev;
            }
            assert!(prev < 1e-9);
        }
    }

    #[test]
    fn log_mixture_against_quadrature() {
        for &s in &[0.0, 0.5, 1.0] {
            for &z in &[
                Complex64::new(-30.0, 2.0),
                Complex64::new(-3.0, -3.0),
                Complex64::new(0.01, 0.0),
                Complex64::new(4.0, 3.1),
            ] {
                let re = integrate(
                    |a: f64| (a.powf(s) * (z * a).exp()).re,
                    0.0,
                    1.0,
                    QuadConfig::new(1e-15, 1e-13),
                )
                .unwrap()
                .value;
                let im = integrate(
                    |a: f64| (a.powf(s) * (z * a).exp()).im,
                    0.0,
                    1.0,
                    QuadConfig::new(1e-15, 1e-13),
                )
                .unwrap()
                .value;
                let got = log_mixture(s, z);
                assert!(
                    (got - Complex64::new(re, im)).norm() < 1e-12 * got.norm().max(1e-3),
                    "s={s} z={z}"
                );
            }
        }
    }

    #[test]
    fn parse_round_trip() {
        for spec in all_specs() {
            let back: SubordinatorSpec = spec.to_string().parse().unwrap();
            assert_eq!(back, spec);
        }
        assert!("stable:1.5".parse::<SubordinatorSpec>().is_err());
        assert!("gamma:1".parse::<SubordinatorSpec>().is_err());
        assert!("levy:1".parse::<SubordinatorSpec>().is_err());
        assert_eq!(
            "c3:1.0,1.0".parse::<SubordinatorSpec>().unwrap(),
            SubordinatorSpec::ClassC3 { s: 1.0, c: 1.0 }
        );
    }
}
