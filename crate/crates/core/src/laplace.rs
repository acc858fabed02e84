//! Numerical Laplace inversion (fixed Talbot, Gaver–Stehfest) and the
//! inverse-subordinator density G_t(τ) built on it.
//!
//! G_t is recovered from its t-Laplace transform
//!
//!   ∫_0^∞ e^{-λt} G_t(τ) dt = 𝒦(λ) e^{-τ Φ(λ)},
//!
//! inverting in t for each fixed τ. Stable-type specs also have the
//! closed form G_t(τ) = t^{-θ} M_θ(τ t^{-θ}).

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate, integrate_breaks, QuadConfig};
use crate::specfun::{m_wright, m_wright_tail_weight, rgamma};
use crate::subordinator::SubordinatorSpec;

/// Largest Gaver–Stehfest order that still gives useful digits in f64.
pub const MAX_STEHFEST_NODES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMethod {
    Talbot,
    GaverStehfest,
}

impl fmt::Display for InversionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InversionMethod::Talbot => "talbot",
            InversionMethod::GaverStehfest => "gaver_stehfest",
        })
    }
}

impl FromStr for InversionMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "talbot" => Ok(Self::Talbot),
            "gaver_stehfest" | "stehfest" | "gs" => Ok(Self::GaverStehfest),
            _ => Err(Error::Parse(format!(
                "unknown inversion method `{s}` (expected talbot or gaver_stehfest)"
            ))),
        }
    }
}

/// Inversion method and acceptance tolerance.
///
/// Every inversion is repeated at a lower node count; the two results must
/// agree to `rel_tol * |f| + abs_tol`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub method: InversionMethod,
    pub node_count: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self::talbot(32)
    }
}

impl InversionConfig {
    pub fn talbot(node_count: usize) -> Self {
        Self {
            method: InversionMethod::Talbot,
            node_count,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
        }
    }

    /// Gaver–Stehfest with tolerances matched to what f64 can deliver.
    pub fn gaver_stehfest(node_count: usize) -> Self {
        Self {
            method: InversionMethod::GaverStehfest,
            node_count,
            rel_tol: 1e-3,
            abs_tol: 1e-6,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 8 {
            return Err(domain(
                "InversionConfig",
                format!("node_count must be >= 8, got {}", self.node_count),
            ));
        }
        if self.method == InversionMethod::GaverStehfest {
            if !self.node_count.is_multiple_of(2) {
                return Err(domain("InversionConfig", "Gaver-Stehfest needs an even node_count"));
            }
            if self.node_count > MAX_STEHFEST_NODES {
                return Err(domain(
                    "InversionConfig",
                    format!("Gaver-Stehfest node_count above {MAX_STEHFEST_NODES} is swamped by round-off"),
                ));
            }
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol >= 0.0) {
            return Err(domain("InversionConfig", "tolerances must be positive"));
        }
        Ok(())
    }

    fn coarse_nodes(&self) -> usize {
        match self.method {
            InversionMethod::Talbot => (3 * self.node_count / 4).max(6),
            InversionMethod::GaverStehfest => self.node_count - 2,
        }
    }
}

/// Fixed-Talbot sum with `m` nodes (Abate–Valkó parametrization).
pub fn talbot<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, m: usize) -> Result<f64> {
    let mf = m as f64;
    let r = 2.0 * mf / (5.0 * t);
    let mut sum = 0.5 * f(Complex64::new(r, 0.0)).re * (r * t).exp();
    for k in 1..m {
        let theta = k as f64 * PI / mf;
        let cot = 1.0 / theta.tan();
        let s = Complex64::new(r * theta * cot, r * theta);
        let sigma = theta + (theta * cot - 1.0) * cot;
        let term = (s * t).exp() * f(s) * Complex64::new(1.0, sigma);
        // e^{ts} underflowing against an overflowing transform gives NaN; both
        // factors are then far below the other terms.
        if term.re.is_finite() {
            sum += term.re;
        } else if !term.re.is_nan() {
            return Err(Error::Overflow { func: "talbot" });
        }
    }
    Ok(r / mf * sum)
}

/// Stehfest weights V_1..V_n for even n.
pub fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0f64, |acc, i| acc * i as f64);
    (1..=n)
        .map(|k| {
            let mut v = 0.0;
            for j in k.div_ceil(2)..=k.min(half) {
                v += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + half) % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Gaver–Stehfest sum with `n` real abscissae.
pub fn gaver_stehfest<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, n: usize) -> f64 {
    let a = LN_2 / t;
    stehfest_weights(n)
        .iter()
        .enumerate()
        .map(|(i, v)| v * f(Complex64::new(a * (i + 1) as f64, 0.0)).re)
        .sum::<f64>()
        * a
}

fn invert_with<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, method: InversionMethod, n: usize) -> Result<f64> {
    match method {
        InversionMethod::Talbot => talbot(f, t, n),
        InversionMethod::GaverStehfest => Ok(gaver_stehfest(f, t, n)),
    }
}

/// f(t) from its Laplace transform F, with a node-refinement check.
///
/// Talbot evaluates F on complex nodes left of the real axis, so F must be
/// analytic off the negative real axis. Gaver–Stehfest only uses F(k ln2/t).
pub fn invert<F: Fn(Complex64) -> Complex64>(transform: F, t: f64, cfg: &InversionConfig) -> Result<f64> {
    cfg.validate()?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("invert", format!("t must be > 0, got {t}")));
    }
    let fine = invert_with(&transform, t, cfg.method, cfg.node_count)?;
    let coarse = invert_with(&transform, t, cfg.method, cfg.coarse_nodes())?;
    if !fine.is_finite() {
        return Err(Error::Convergence {
            func: "invert",
            msg: format!("non-finite result at t = {t}"),
        });
    }
    let gap = (fine - coarse).abs();
    if gap > cfg.rel_tol * fine.abs() + cfg.abs_tol {
        return Err(Error::Convergence {
            func: "invert",
            msg: format!(
                "{} with {} and {} nodes disagree at t = {t}: {fine:e} vs {coarse:e}",
                cfg.method,
                cfg.node_count,
                cfg.coarse_nodes()
            ),
        });
    }
    Ok(fine)
}

/// [`invert`], falling back to [`fourier_cosine`] when the refinement check
/// fails or the contour sum overflows. The fallback needs F analytic and of
/// moderate size on the right half-plane only.
pub fn invert_with_fallback<F: Fn(Complex64) -> Complex64>(transform: F, t: f64, cfg: &InversionConfig) -> Result<f64> {
    match invert(&transform, t, cfg) {
        Err(Error::Convergence { .. }) | Err(Error::Overflow { .. }) => fourier_cosine(&transform, t, cfg.abs_tol),
        other => other,
    }
}

/// Bromwich integral on the line Re s = c = 1/t written as a cosine
/// transform,
///
///   f(t) = (2 e^{ct} / π) ∫_0^∞ Re F(c + iω) cos(ωt) dω,
///
/// valid for causal originals. Used where Talbot's contour would run through
/// a region where F is huge; for F = 𝒦 e^{-τΦ} the integrand is bounded by
/// |𝒦| because Re Φ ≥ 0 on the right half-plane. The integral is summed over
/// half-periods of the cosine and the partial sums are extrapolated with
/// Wynn's epsilon algorithm, as in QUADPACK's QAWF.
pub fn fourier_cosine<F: Fn(Complex64) -> Complex64>(f: &F, t: f64, abs_tol: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("fourier_cosine", format!("t must be > 0, got {t}")));
    }
    let c = 1.0 / t;
    let pref = 2.0 * (c * t).exp() / PI;
    let tol = abs_tol / pref;
    let g = |w: f64| f(Complex64::new(c, w)).re * (w * t).cos();
    let width = PI / t;
    let quad = QuadConfig {
        abs_tol: 0.1 * tol,
        rel_tol: 1e-11,
        max_intervals: 500,
    };
    // The first panel holds the peak near ω = 0; later panels alternate in sign.
    let mut sum = 0.0;
    let mut eps = Wynn::default();
    let mut last = f64::NAN;
    let mut steady = 0;
    for i in 0..MAX_FOURIER_PANELS {
        let (a, b) = (i as f64 * width, (i + 1) as f64 * width);
        let part = integrate(g, a, b, quad)?;
        sum += part.value;
        let envelope = f(Complex64::new(c, b)).norm() * width;
        if !sum.is_finite() {
            break;
        }
        if envelope < 1e-3 * tol && part.value.abs() < 1e-3 * tol {
            return Ok(pref * sum);
        }
        if i >= 8 {
            let est = eps.push(sum);
            if (est - last).abs() < 0.1 * tol {
                steady += 1;
                if steady >= 3 {
                    return Ok(pref * est);
                }
            } else {
                steady = 0;
            }
            last = est;
        }
    }
    Err(Error::Convergence {
        func: "fourier_cosine",
        msg: format!("Bromwich integral along Re s = 1/t did not settle at t = {t}"),
    })
}

const MAX_FOURIER_PANELS: usize = 4000;

/// Wynn's epsilon table for accelerating a sequence of partial sums.
#[derive(Debug, Default)]
struct Wynn {
    // Last diagonal e_0^{(n)}, e_1^{(n-1)}, ...
    diag: Vec<f64>,
}

impl Wynn {
    /// Adds the next partial sum and returns the best even-column estimate.
    fn push(&mut self, s: f64) -> f64 {
        let mut new = Vec::with_capacity(self.diag.len() + 1);
        new.push(s);
        let mut prev_col_minus = 0.0;
        for k in 0..self.diag.len() {
            let diff = new[k] - self.diag[k];
            let v = if diff == 0.0 {
                f64::INFINITY
            } else {
                prev_col_minus + 1.0 / diff
            };
            prev_col_minus = self.diag[k];
            if !v.is_finite() {
                break;
            }
            new.push(v);
        }
        // Cap the table depth so round-off in deep columns stays harmless.
        new.truncate(24);
        self.diag = new;
        let last_even = (self.diag.len() - 1) & !1;
        self.diag[last_even]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityBackend {
    /// t^{-θ} M_θ(τ t^{-θ}); stable-type specs only.
    AnalyticStable,
    NumericInversion,
}

/// A G_t(τ) value before and after clamping at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityPoint {
    pub value: f64,
    pub raw: f64,
}

impl DensityPoint {
    pub fn clamped(&self) -> bool {
        self.raw < 0.0
    }
}

/// Total mass of G_t together with the negative mass removed by clamping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mass: f64,
    pub clamped_mass: f64,
}

/// Clamped negative mass above this fails a normalization run.
pub const CLAMP_TOLERANCE: f64 = 1e-6;

/// Evaluator for the density G_t(τ) of the inverse subordinator E(t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseDensity {
    pub spec: SubordinatorSpec,
    pub backend: DensityBackend,
    pub config: InversionConfig,
}

impl InverseDensity {
    /// Analytic backend for stable-type specs, inversion otherwise.
    pub fn new(spec: SubordinatorSpec, config: InversionConfig) -> Self {
        let backend = if spec.stable_index().is_some() {
            DensityBackend::AnalyticStable
        } else {
            DensityBackend::NumericInversion
        };
        Self { spec, backend, config }
    }

    pub fn numeric(spec: SubordinatorSpec, config: InversionConfig) -> Self {
        Self {
            spec,
            backend: DensityBackend::NumericInversion,
            config,
        }
    }

    pub fn with_backend(spec: SubordinatorSpec, backend: DensityBackend, config: InversionConfig) -> Result<Self> {
        if backend == DensityBackend::AnalyticStable && spec.stable_index().is_none() {
            return Err(domain("InverseDensity", format!("no closed form for {spec}")));
        }
        Ok(Self { spec, backend, config })
    }

    /// G_t(τ), clamped at zero.
    pub fn density(&self, t: f64, tau: f64) -> Result<f64> {
        Ok(self.evaluate(t, tau)?.value)
    }

    pub fn evaluate(&self, t: f64, tau: f64) -> Result<DensityPoint> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain("inverse_density", format!("t must be > 0, got {t}")));
        }
        if !(tau >= 0.0) {
            return Err(domain("inverse_density", format!("tau must be >= 0, got {tau}")));
        }
        let raw = match self.backend {
            DensityBackend::AnalyticStable => {
                let theta = self.spec.stable_index().expect("checked at construction");
                let scale = t.powf(-theta);
                scale * m_wright(theta, tau * scale)?
            }
            DensityBackend::NumericInversion => {
                // Tolerances are taken relative to the natural density scale 1/τ*(t).
                let scale = 1.0 / self.spec.tau_scale(t);
                let cfg = InversionConfig {
                    abs_tol: self.config.abs_tol * scale,
                    ..self.config
                };
                let spec = self.spec;
                // Contour methods fail where e^{-τΦ} is large off the real axis
                // (far τ-tail, or Gamma near its branch point at -b).
                invert_with_fallback(|l| spec.symbol(l) * (-tau * spec.exponent(l)).exp(), t, &cfg)?
            }
        };
        Ok(DensityPoint {
            value: raw.max(0.0),
            raw,
        })
    }

    /// H_t(τ) = (1/t) ∫_0^t G_s(τ) ds, the density that turns a τ-source
    /// into the Cesaro mean of its subordination. Inverts 𝒦 e^{-τΦ}/λ.
    pub fn averaged_density(&self, t: f64, tau: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain("averaged_density", format!("t must be > 0, got {t}")));
        }
        if !(tau >= 0.0) {
            return Err(domain("averaged_density", format!("tau must be >= 0, got {tau}")));
        }
        if let DensityBackend::AnalyticStable = self.backend {
            let theta = self.spec.stable_index().expect("checked at construction");
            if tau == 0.0 {
                // W_θ(y) ~ y^{1-1/θ} / ((1/θ - 1) Γ(1-θ)) as y → 0.
                return Ok(t.powf(-theta) * rgamma(1.0 - theta) / (1.0 - theta));
            }
            let w = m_wright_tail_weight(theta, tau * t.powf(-theta))?;
            return Ok(tau.powf(1.0 / theta - 1.0) * w / (t * theta));
        }
        let scale = 1.0 / self.spec.tau_scale(t);
        let cfg = InversionConfig {
            abs_tol: self.config.abs_tol * scale * t,
            ..self.config
        };
        let spec = self.spec;
        let raw = invert_with_fallback(|l| spec.symbol(l) * (-tau * spec.exponent(l)).exp() / l, t, &cfg)?;
        Ok((raw / t).max(0.0))
    }

    /// ∫_0^∞ G_t(τ) dτ, with the clamped negative mass reported separately.
    pub fn normalization(&self, t: f64) -> Result<Normalization> {
        let scale = self.spec.tau_scale(t);
        let cfg = QuadConfig::new(1e-10, 1e-10);
        let mut mass = 0.0;
        let mut clamped = 0.0;
        let mut lo = 0.0;
        let mut hi = scale / 16.0;
        // Doubling panels until the tail is negligible; G_t decays faster than
        // any exponential in τ for every family here.
        for _ in 0..80 {
            let pos = integrate(
                |x| self.evaluate(t, x).map(|p| p.value).unwrap_or(f64::NAN),
                lo,
                hi,
                cfg,
            )?;
            let neg = integrate(
                |x| self.evaluate(t, x).map(|p| (-p.raw).max(0.0)).unwrap_or(f64::NAN),
                lo,
                hi,
                cfg,
            )?;
            mass += pos.value;
            clamped += neg.value;
            if lo > 0.0 && pos.value < 1e-14 * mass {
                return self.checked(mass, clamped);
            }
            lo = hi;
            hi *= 2.0;
        }
        Err(Error::Convergence {
            func: "normalization",
            msg: format!("tail of G_t did not decay at t = {t}"),
        })
    }

    fn checked(&self, mass: f64, clamped_mass: f64) -> Result<Normalization> {
        if clamped_mass > CLAMP_TOLERANCE {
            return Err(Error::ClampedMass(clamped_mass));
        }
        Ok(Normalization { mass, clamped_mass })
    }
}

/// G_t(τ) for one point; see [`InverseDensity`].
pub fn inverse_density(spec: SubordinatorSpec, t: f64, tau: f64, cfg: &InversionConfig) -> Result<f64> {
    InverseDensity::new(spec, *cfg).density(t, tau)
}

/// Both sides of ∫_0^∞ e^{-pτ} 𝒦(λ) e^{-τλ𝒦(λ)} dτ = 𝒦(λ) / (λ𝒦(λ) + p):
/// returns (quadrature, closed form).
pub fn double_laplace_check(spec: SubordinatorSpec, p: f64, lambda: f64) -> Result<(f64, f64)> {
    if !(p > 0.0) {
        return Err(domain("double_laplace_check", format!("p must be > 0, got {p}")));
    }
    let k = spec.kernel_laplace(lambda)?;
    let b = lambda * k;
    let analytic = k / (b + p);
    // Integrate up to where e^{-τb} < 1e-12 and add the exact remainder.
    let t_star = 12.0 * std::f64::consts::LN_10 / b;
    let rate = p + b;
    let body = integrate_breaks(
        |tau| k * (-rate * tau).exp(),
        &[0.0, 0.25 * t_star, 0.5 * t_star, t_star],
        QuadConfig::new(1e-15, 1e-13),
    )?;
    let tail = k * (-rate * t_star).exp() / rate;
    Ok((body.value + tail, analytic))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn talbot_transform_pairs() {
        let cfg = InversionConfig::default();
        let one = c(1.0);
        assert!((invert(|l| one / (l * l), 3.0, &cfg).unwrap() - 3.0).abs() < 1e-10);
        let got = invert(|l| one / (l + 1.0), 2.0, &cfg).unwrap();
        assert!((got - (-2.0f64).exp()).abs() < 1e-10, "{got:e}");
        let want = 1.0 / (4.0 * PI).sqrt();
        assert!((invert(|l| l.powf(-0.5), 4.0, &cfg).unwrap() - want).abs() < 1e-10);
    }

    #[test]
    fn stehfest_transform_pairs() {
        let cfg = InversionConfig::gaver_stehfest(16);
        let one = c(1.0);
        assert!((invert(|l| one / (l * l), 3.0, &cfg).unwrap() - 3.0).abs() < 1e-6);
        assert!((invert(|l| one / (l + 1.0), 2.0, &cfg).unwrap() - (-2.0f64).exp()).abs() < 1e-5);
    }

    #[test]
    fn stehfest_weights_sum_to_zero() {
        for n in [8, 12, 16] {
            let w = stehfest_weights(n);
            assert!(w.iter().sum::<f64>().abs() < 1e-6 * w.iter().map(|v| v.abs()).fold(0.0, f64::max));
        }
    }

    #[test]
    fn config_validation() {
        assert!(InversionConfig::talbot(4).validate().is_err());
        assert!(InversionConfig::gaver_stehfest(15).validate().is_err());
        assert!(InversionConfig::gaver_stehfest(30).validate().is_err());
        assert!(InversionConfig::gaver_stehfest(14).validate().is_ok());
    }

    #[test]
    fn refinement_failure_is_reported() {
        // Oscillatory original: sin(40 t).
        let cfg = InversionConfig::talbot(16);
        let err = invert(|l| c(40.0) / (l * l + 1600.0), 5.0, &cfg);
        assert!(matches!(err, Err(Error::Convergence { .. })));
    }

    #[test]
    fn stable_density_examples() {
        let spec = SubordinatorSpec::stable(0.5).unwrap();
        let cfg = InversionConfig::default();
        let g = |tau| inverse_density(spec, 1.0, tau, &cfg).unwrap();
        assert!((g(0.0) - 1.0 / PI.sqrt()).abs() < 1e-14);
        assert!((g(1.0) - (-0.25f64).exp() / PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn double_laplace_examples() {
        let s = SubordinatorSpec::stable(0.5).unwrap();
        let (n, a) = double_laplace_check(s, 1.0, 1.0).unwrap();
        assert_eq!(a, 0.5);
        assert!((n - a).abs() < 1e-12);
        let (n, a) = double_laplace_check(s, 2.0, 4.0).unwrap();
        assert!((a - 0.125).abs() < 1e-15);
        assert!((n - a).abs() < 1e-12);
        let g = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
        let (n, a) = double_laplace_check(g, 1.0, 1.0).unwrap();
        assert!((a - LN_2 / (LN_2 + 1.0)).abs() < 1e-15);
        assert!((n - a).abs() < 1e-12);
    }

    #[test]
    fn fourier_cosine_pairs() {
        let one = c(1.0);
        let got = fourier_cosine(&|l: Complex64| one / (l + 1.0), 2.0, 1e-10).unwrap();
        assert!((got - (-2.0f64).exp()).abs() < 1e-9, "{got}");
        // Slowly decaying transform: needs the epsilon extrapolation.
        let got = fourier_cosine(&|l: Complex64| l.powf(-0.5), 4.0, 1e-10).unwrap();
        assert!((got - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-8, "{got}");
    }

    #[test]
    fn wynn_accelerates_alternating_series() {
        // ln 2 = 1 - 1/2 + 1/3 - ...
        let mut w = Wynn::default();
        let mut s = 0.0;
        let mut est = 0.0;
        for k in 1..=20 {
            s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            est = w.push(s);
        }
        assert!((est - LN_2).abs() < 1e-12, "{est}");
    }

    #[test]
    fn gamma_density_far_from_origin_uses_fallback() {
        // Talbot's contour passes near the branch point at -1 here.
        let g = InverseDensity::new(SubordinatorSpec::gamma(1.0, 1.0).unwrap(), InversionConfig::default());
        let v = g.density(100.0, 100.0).unwrap();
        // E(100) is close to N(100.5, 10²) for this process.
        assert!((v - 0.0399).abs() < 1e-3, "{v}");
    }
}
