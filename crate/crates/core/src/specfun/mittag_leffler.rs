//! One-parameter Mittag-Leffler function on the negative real axis.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::quad::{integrate_breaks, QuadConfig};

/// Parameter θ ∈ (0, 1] of E_θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlParams {
    theta: f64,
}

impl MlParams {
    pub fn new(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(domain(
                "mittag_leffler",
                format!("theta must lie in (0, 1], got {theta}"),
            ));
        }
        Ok(Self { theta })
    }

    pub fn theta(self) -> f64 {
        self.theta
    }
}

// Largest series term is about e^{x^{1/θ}}; keep the cancellation below ~1e-12.
const SERIES_LIMIT: f64 = 3.0;

/// E_θ(-x) for θ ∈ (0, 1], x ≥ 0.
pub fn mittag_leffler(theta: f64, x: f64) -> Result<f64> {
    let p = MlParams::new(theta)?;
    if !(x >= 0.0) {
        return Err(domain("mittag_leffler", format!("x must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if p.theta == 1.0 {
        return Ok((-x).exp());
    }
    if x.powf(1.0 / theta) <= SERIES_LIMIT {
        series(theta, -x)
    } else {
        integral(theta, x)
    }
}

/// E_θ(z) for real z: z ≤ 0 is the main use; small positive z uses the
/// (cancellation-free) power series.
pub fn mittag_leffler_at(theta: f64, z: f64) -> Result<f64> {
    MlParams::new(theta)?;
    if z <= 0.0 {
        return mittag_leffler(theta, -z);
    }
    if z.powf(1.0 / theta) > 700.0 {
        return Err(Error::Overflow { func: "mittag_leffler" });
    }
    series(theta, z)
}

fn series(theta: f64, z: f64) -> Result<f64> {
    let lx = z.abs().ln();
    let sign = if z < 0.0 { -1.0 } else { 1.0 };
    let mut sum = 1.0;
    let mut s = 1.0;
    for n in 1..2000 {
        s *= sign;
        let nf = n as f64;
        let term = s * (nf * lx - ln_gamma(nf * theta + 1.0)).exp();
        sum += term;
        // Terms decay monotonically once nθ exceeds |z|^{1/θ}.
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && nf * theta > z.abs().powf(1.0 / theta) {
            return Ok(sum);
        }
    }
    Err(Error::Convergence {
        func: "mittag_leffler",
        msg: format!("series at z = {z}"),
    })
}

// E_θ(-x) = sin(θπ)/(θπx) ∫_0^∞ exp(-σ^{1/θ}) / ((σ/x)² + 2(σ/x)cos θπ + 1) dσ,
// from the completely monotone spectral representation with ρ = r^θ.
fn integral(theta: f64, x: f64) -> Result<f64> {
    let c = (theta * PI).cos();
    let sn = (theta * PI).sin();
    let f = |sigma: f64| {
        let u = sigma / x;
        (-sigma.powf(1.0 / theta)).exp() / (u * u + 2.0 * u * c + 1.0)
    };
    let upper = 745f64.powf(theta);
    let mut pts = vec![0.0];
    if c < 0.0 {
        // Near-resonance of the denominator at σ = -x cos θπ, width ~ x sin θπ.
        let peak = -x * c;
        let w = x * sn;
        for q in [peak - 4.0 * w, peak, peak + 4.0 * w] {
            if q > 0.0 && q < upper {
                pts.push(q);
            }
        }
    }
    pts.push(1.0f64.min(upper));
    pts.push(upper);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let prefactor = sn / (theta * PI * x);
    let cfg = QuadConfig::new(1e-14 / prefactor, 1e-13);
    let r = integrate_breaks(f, &pts, cfg)?;
    Ok(prefactor * r.value)
}
