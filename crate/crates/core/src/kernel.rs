//! Gaussian heat kernel, the subordinated kernel
//!
//!   v^E(x, t) = ∫_0^∞ v(x, τ) G_t(τ) dτ,   v(x, τ) = (2πτ)^{-d/2} e^{-|x|²/2τ},
//!
//! its t-Laplace transform in closed form, and Cesaro means
//! M_t(f) = (1/t) ∫_0^t f(s) ds.
//!
//! With a = |x|²/2 and b = Φ(λ),
//!
//!   (ℒv^E)(λ) = (2π)^{-d/2} 𝒦(λ) ∫_0^∞ τ^{-d/2} e^{-a/τ - bτ} dτ
//!             = (2π)^{-d/2} 𝒦(λ) × { √π e^{-2√(ab)} / √b              d = 1
//!                                  { 2 K_0(2√(ab))                    d = 2
//!                                  { 2 (a/b)^{(2-d)/4} K_{d/2-1}(2√(ab))  d ≥ 3

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::laplace::{invert_with_fallback, InverseDensity, InversionConfig};
use crate::quad::{log_panels, try_integrate_breaks, QuadConfig};
use crate::specfun::{bessel_k_complex, BesselOrder};
use crate::subordinator::SubordinatorSpec;

/// A space-time point for the d-dimensional heat kernel; `r` is |x|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelPoint {
    pub d: u32,
    pub r: f64,
    pub t: f64,
}

impl HeatKernelPoint {
    pub fn new(d: u32, r: f64, t: f64) -> Result<Self> {
        if d == 0 {
            return Err(domain("HeatKernelPoint", "dimension must be >= 1"));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(domain("HeatKernelPoint", format!("r must be >= 0, got {r}")));
        }
        if !(t > 0.0) || !t.is_finite() {
            return Err(domain("HeatKernelPoint", format!("t must be > 0, got {t}")));
        }
        Ok(Self { d, r, t })
    }

    pub fn value(&self) -> f64 {
        let t = self.t;
        (2.0 * PI * t).powf(-0.5 * self.d as f64) * (-self.r * self.r / (2.0 * t)).exp()
    }
}

/// (2πt)^{-d/2} exp(-r²/2t).
pub fn heat_kernel(d: u32, r: f64, t: f64) -> Result<f64> {
    Ok(HeatKernelPoint::new(d, r, t)?.value())
}

/// Settings shared by the kernel evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub inversion: InversionConfig,
    pub quad: QuadConfig,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            inversion: InversionConfig::default(),
            quad: QuadConfig::new(1e-14, 1e-10),
        }
    }
}

fn check_geometry(func: &'static str, d: u32, r: f64) -> Result<()> {
    if d == 0 {
        return Err(domain(func, "dimension must be >= 1"));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(func, format!("r must be >= 0, got {r}")));
    }
    if d >= 2 && r == 0.0 {
        return Err(Error::Divergence(format!(
            "v^E at x = 0 is infinite for d = {d}: τ^{{-d/2}} G_t(τ) is not integrable at τ = 0"
        )));
    }
    Ok(())
}

/// v^E(x, t) by quadrature of v(x, τ) G_t(τ) over τ = e^u.
///
/// Requires r > 0 for d ≥ 2 (the τ-integral diverges at the origin).
pub fn subordinated_kernel(spec: SubordinatorSpec, d: u32, r: f64, t: f64, cfg: &KernelConfig) -> Result<f64> {
    check_geometry("subordinated_kernel", d, r)?;
    HeatKernelPoint::new(d, r, t)?;
    let density = InverseDensity::new(spec, cfg.inversion);
    subordinated_kernel_with(&density, d, r, t, cfg.quad)
}

/// [`subordinated_kernel`] for a prepared density evaluator.
pub fn subordinated_kernel_with(density: &InverseDensity, d: u32, r: f64, t: f64, quad: QuadConfig) -> Result<f64> {
    check_geometry("subordinated_kernel", d, r)?;
    let scale = density.spec.tau_scale(t);
    let dh = 0.5 * d as f64;
    let a = 0.5 * r * r;
    // τ-integrand after τ = e^u; everything is evaluated in logs first so the
    // e^{-a/τ} cut-off never forms 0 × inf.
    let f = |u: f64| -> Result<f64> {
        let tau = u.exp();
        let log_v = -dh * (2.0 * PI * tau).ln() - a / tau + u;
        if log_v < -745.0 {
            return Ok(0.0);
        }
        Ok(log_v.exp() * density.density(t, tau)?)
    };
    // Below u_lo the integrand is negligible: either e^{-a/τ} has cut it off,
    // or (d = 1, r = 0) its integral is 2√τ G_t(0) ≲ 1e-7 √(τ/scale).
    let u_lo = if a > 0.0 {
        (a / 700.0).ln().max((1e-14 * scale).ln())
    } else {
        (1e-14 * scale).ln()
    };
    let mut u_hi = (4.0 * scale).ln().max(u_lo + 1.0);
    let mut total = 0.0;
    let mut edges = panel_edges(u_lo, u_hi);
    loop {
        let part = try_integrate_breaks(f, &edges, quad)?;
        total += part.value;
        // Extend the upper end until a whole doubling adds nothing.
        let next = u_hi + std::f64::consts::LN_2 * 2.0;
        let tail = try_integrate_breaks(f, &[u_hi, next], quad)?;
        total += tail.value;
        if tail.value.abs() <= 1e-13 * total.abs() || u_hi > u_lo + 200.0 {
            break;
        }
        u_hi = next;
        edges = vec![u_hi, u_hi];
    }
    if a == 0.0 {
        // ∫_0^{τ_lo} (2πτ)^{-1/2} G dτ ≈ 2 √τ_lo (2π)^{-1/2} G_t(0)
        let tau_lo = u_lo.exp();
        total += 2.0 * tau_lo.sqrt() / (2.0 * PI).sqrt() * density.density(t, 0.0)?;
    }
    Ok(total)
}

fn panel_edges(lo: f64, hi: f64) -> Vec<f64> {
    let n = ((hi - lo) / 0.5).ceil().max(1.0) as usize;
    (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect()
}

/// ∫_0^∞ τ^{-d/2} e^{-a/τ - bτ} dτ in the closed forms above, for complex b
/// off the negative real axis.
fn tau_integral(d: u32, a: f64, b: Complex64) -> Result<Complex64> {
    let sb = b.sqrt();
    if d == 1 {
        return Ok(PI.sqrt() * (-2.0 * a.sqrt() * sb).exp() / sb);
    }
    let z = 2.0 * a.sqrt() * sb;
    if z.re > 740.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let nu = BesselOrder::for_dimension(d)?.value();
    let k = bessel_k_complex(nu, z)?;
    if d == 2 {
        Ok(2.0 * k)
    } else {
        let p = (2.0 - d as f64) / 4.0;
        Ok(2.0 * a.powf(p) * b.powf(-p) * k)
    }
}

/// (ℒv^E)(λ) from the closed forms, with the class forms of 𝒦 for C2/C3
/// (λ < 1 there). Requires r > 0 for d ≥ 2.
pub fn subordinated_kernel_laplace(spec: SubordinatorSpec, d: u32, r: f64, lambda: f64) -> Result<f64> {
    check_geometry("subordinated_kernel_laplace", d, r)?;
    let k = spec.kernel_laplace(lambda)?;
    let b = lambda * k;
    let v = tau_integral(d, 0.5 * r * r, Complex64::new(b, 0.0))?;
    Ok((2.0 * PI).powf(-0.5 * d as f64) * k * v.re)
}

/// (ℒv^E)(λ) of the realized subordinator at complex λ off the negative
/// real axis; this is the transform of [`subordinated_kernel`].
pub fn subordinated_kernel_laplace_complex(
    spec: SubordinatorSpec,
    d: u32,
    r: f64,
    lambda: Complex64,
) -> Result<Complex64> {
    check_geometry("subordinated_kernel_laplace", d, r)?;
    let k = spec.symbol(lambda);
    let b = lambda * k;
    Ok((2.0 * PI).powf(-0.5 * d as f64) * k * tau_integral(d, 0.5 * r * r, b)?)
}

fn invert_kernel_transform<G>(
    spec: SubordinatorSpec,
    d: u32,
    r: f64,
    t: f64,
    cfg: &InversionConfig,
    weight: G,
) -> Result<f64>
where
    G: Fn(Complex64) -> Complex64,
{
    check_geometry("subordinated_kernel", d, r)?;
    let failure = std::cell::RefCell::new(None);
    let f = |l: Complex64| match subordinated_kernel_laplace_complex(spec, d, r, l) {
        Ok(v) => v * weight(l),
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(f64::NAN, f64::NAN)
        }
    };
    let v = invert_with_fallback(f, t, cfg);
    match failure.into_inner() {
        Some(e) => Err(e),
        None => v,
    }
}

/// v^E(x, t) by numerical inversion of the closed-form transform.
pub fn subordinated_kernel_inverted(
    spec: SubordinatorSpec,
    d: u32,
    r: f64,
    t: f64,
    cfg: &InversionConfig,
) -> Result<f64> {
    invert_kernel_transform(spec, d, r, t, cfg, |_| Complex64::new(1.0, 0.0))
}

/// M_t(v^E) as (1/t) ℒ^{-1}[(ℒv^E)(λ)/λ](t), a single inversion.
pub fn cesaro_via_transform(spec: SubordinatorSpec, d: u32, r: f64, t: f64, cfg: &InversionConfig) -> Result<f64> {
    Ok(invert_kernel_transform(spec, d, r, t, cfg, |l| 1.0 / l)? / t)
}

/// M_t(f) = (1/t) ∫_0^t f(s) ds on log-spaced panels.
///
/// `source` may blow up integrably at s = 0.
pub fn cesaro_mean<F: Fn(f64) -> Result<f64>>(source: F, t: f64, quad: QuadConfig) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("cesaro_mean", format!("t must be > 0, got {t}")));
    }
    let mut edges = vec![0.0];
    edges.extend(log_panels(1e-12 * t, t, 2));
    let r = try_integrate_breaks(source, &edges, quad)?;
    Ok(r.value / t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    /// v^E(x, t)
    VE,
    /// M_t(v^E(x, ·))
    CesaroMean,
}

/// v^E or its Cesaro mean sampled on a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCurve {
    pub spec: SubordinatorSpec,
    pub d: u32,
    pub r: f64,
    pub kind: CurveKind,
    pub t_grid: Vec<f64>,
    pub values: Vec<f64>,
}

/// `per_decade` log-spaced points from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min) || per_decade == 0 {
        return Err(domain(
            "log_grid",
            format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]"),
        ));
    }
    Ok(log_panels(t_min, t_max, per_decade))
}

impl KernelCurve {
    /// Evaluates the curve on `t_grid`, in parallel over grid points.
    ///
    /// v^E comes from inverting its closed-form transform; the Cesaro mean
    /// integrates that v^E over [0, t]. Every grid point is computed
    /// independently, so the result does not depend on the thread schedule.
    pub fn compute(
        spec: SubordinatorSpec,
        d: u32,
        r: f64,
        kind: CurveKind,
        t_grid: Vec<f64>,
        cfg: &KernelConfig,
    ) -> Result<Self> {
        check_geometry("KernelCurve", d, r)?;
        if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
            return Err(domain("KernelCurve", "t_grid must be positive and strictly increasing"));
        }
        let values = t_grid
            .par_iter()
            .map(|&t| match kind {
                CurveKind::VE => subordinated_kernel_inverted(spec, d, r, t, &cfg.inversion),
                CurveKind::CesaroMean => cesaro_mean(
                    |s| subordinated_kernel_inverted(spec, d, r, s, &cfg.inversion),
                    t,
                    cfg.quad,
                ),
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            spec,
            d,
            r,
            kind,
            t_grid,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_kernel_examples() {
        assert!((heat_kernel(1, 0.0, 1.0).unwrap() - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
        let want = (4.0 * PI * PI).powf(-1.5);
        assert!((heat_kernel(3, 0.0, 2.0 * PI).unwrap() - want).abs() < 1e-15);
        assert!((heat_kernel(2, 2f64.sqrt(), 1.0).unwrap() - (-1.0f64).exp() / (2.0 * PI)).abs() < 1e-15);
        assert!(heat_kernel(1, 0.0, 0.0).is_err());
    }

    #[test]
    fn laplace_table_examples() {
        let s = SubordinatorSpec::stable(0.5).unwrap();
        let r = 2f64.sqrt();
        let got = subordinated_kernel_laplace(s, 1, r, 1.0).unwrap();
        let want = (2.0 * PI).powf(-0.5) * PI.sqrt() * (-2.0f64).exp();
        assert!((got - want).abs() < 1e-15);
        let got = subordinated_kernel_laplace(s, 2, r, 1.0).unwrap();
        let want = 2.0 * 0.113_893_872_749_533_4 / (2.0 * PI);
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }

    #[test]
    fn origin_diverges_for_d_at_least_two() {
        let s = SubordinatorSpec::stable(0.5).unwrap();
        for d in [2, 3] {
            assert!(matches!(
                subordinated_kernel(s, d, 0.0, 1.0, &KernelConfig::default()),
                Err(Error::Divergence(_))
            ));
        }
        assert!(subordinated_kernel_laplace(s, 3, 0.0, 1.0).is_err());
    }

    #[test]
    fn cesaro_trivial_sources() {
        let q = QuadConfig::new(1e-14, 1e-12);
        assert!((cesaro_mean(|_| Ok(2.5), 7.0, q).unwrap() - 2.5).abs() < 1e-12);
        assert!((cesaro_mean(Ok, 2.0, q).unwrap() - 1.0).abs() < 1e-12);
        assert!((cesaro_mean(|s: f64| Ok(s.powf(-0.5)), 4.0, q).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e3, 1e6, 24).unwrap();
        assert_eq!(g.len(), 73);
        assert_eq!(g[0], 1e3);
        assert_eq!(*g.last().unwrap(), 1e6);
        assert!(log_grid(1.0, 1.0, 4).is_err());
    }
}
