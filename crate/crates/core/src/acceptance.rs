//! The acceptance criteria as runnable checks.
//!
//! Each check recomputes its quantities from scratch and reports the worst
//! deviation it saw against the stated tolerance and runtime budget.

use std::fmt;
use std::time::{Duration, Instant};

use statrs::function::erf::erfc;

use crate::asymptotics::{spatial_ratio, verify, ClassParams};
use crate::error::{domain, Result};
use crate::kernel::{heat_kernel, subordinated_kernel_laplace, KernelConfig};
use crate::laplace::{double_laplace_check, DensityBackend, InverseDensity, InversionConfig};
use crate::montecarlo::{stable_inverse_cdf, stable_inverse_laplace, PathConfig, SamplePool};
use crate::nonlocal::{gaussian_comparison, ConvolutionKernelSpec, Lattice};
use crate::quad::{integrate_breaks, integrate_to_inf, log_panels, QuadConfig};
use crate::specfun::{bessel_k, gamma_fn, m_wright, mittag_leffler, EULER_GAMMA};
use crate::subordinator::SubordinatorSpec;

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Radius used for the exponent fits (criteria 5 and 7). At |x| = 1 the
/// leading correction is still tens of percent across the fixed windows.
pub const FIT_RADIUS: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    /// Worst measured deviation and its tolerance.
    pub summary: String,
    /// Extra measurements that do not enter `pass`.
    pub diagnostics: Vec<String>,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {}  {:<36} {}  [{:.1} s",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.elapsed.as_secs_f64()
        )?;
        match self.budget {
            Some(b) => write!(f, " / {} s]", b.as_secs()),
            None => write!(f, "]"),
        }
    }
}

struct Measured {
    pass: bool,
    summary: String,
    diagnostics: Vec<String>,
}

type Check = fn() -> Result<Measured>;

fn within(worst: f64, tol: f64, what: &str) -> Measured {
    Measured {
        pass: worst <= tol,
        summary: format!("{what} {worst:.3e} (tol {tol:.0e})"),
        diagnostics: Vec::new(),
    }
}

/// Runs one criterion. Numerical errors inside a check count as a failure
/// and are reported in the summary.
pub fn run(id: u8) -> Result<Outcome> {
    let (title, budget, check): (&'static str, Option<u64>, Check) = match id {
        1 => ("double Laplace identity", Some(10), double_laplace),
        2 => ("G_t normalization", Some(30), normalization),
        3 => ("stable analytic vs inversion", Some(10), stable_backends),
        4 => ("closed-form L v^E vs tau-quadrature", Some(30), transform_closed_forms),
        5 => ("C1 exponents", Some(300), c1_exponents),
        6 => ("C1 spatial prefactor", None, c1_spatial),
        7 => ("C2/C3 log laws", Some(600), log_laws),
        8 => ("Monte Carlo law of E(t)", Some(120), monte_carlo),
        9 => ("nonlocal Gaussian asymptotic", Some(120), nonlocal_gaussian),
        10 => ("special-function oracles", Some(10), special_functions),
        _ => return Err(domain("acceptance::run", format!("no criterion {id}"))),
    };
    let start = Instant::now();
    let measured = check().unwrap_or_else(|e| Measured {
        pass: false,
        summary: format!("error: {e}"),
        diagnostics: Vec::new(),
    });
    let elapsed = start.elapsed();
    let budget = budget.map(Duration::from_secs);
    Ok(Outcome {
        id,
        title,
        pass: measured.pass && budget.is_none_or(|b| elapsed <= b),
        summary: measured.summary,
        diagnostics: measured.diagnostics,
        elapsed,
        budget,
    })
}

fn double_laplace() -> Result<Measured> {
    let mut worst: f64 = 0.0;
    for spec in [
        SubordinatorSpec::stable(0.5)?,
        SubordinatorSpec::stable(0.3)?,
        SubordinatorSpec::gamma(1.0, 1.0)?,
    ] {
        for p in [0.5, 1.0, 2.0] {
            for lambda in [0.25, 1.0, 4.0] {
                let (numeric, analytic) = double_laplace_check(spec, p, lambda)?;
                worst = worst.max((numeric - analytic).abs());
            }
        }
    }
    Ok(within(worst, 1e-6, "max |numeric - analytic|"))
}

fn normalization() -> Result<Measured> {
    let mut worst: f64 = 0.0;
    for spec in [
        SubordinatorSpec::stable(0.5)?,
        SubordinatorSpec::gamma(1.0, 1.0)?,
        SubordinatorSpec::class_c1(0.7)?,
        SubordinatorSpec::class_c2(1.0)?,
        SubordinatorSpec::class_c3(0.5, 1.0)?,
    ] {
        let g = InverseDensity::numeric(spec, InversionConfig::default());
        for t in [1.0, 10.0, 100.0] {
            worst = worst.max((g.normalization(t)?.mass - 1.0).abs());
        }
    }
    Ok(within(worst, 1e-5, "max |mass - 1|"))
}

fn stable_backends() -> Result<Measured> {
    let cfg = InversionConfig::default();
    let mut worst: f64 = 0.0;
    for theta in [0.3, 0.5, 0.7] {
        let spec = SubordinatorSpec::stable(theta)?;
        let analytic = InverseDensity::with_backend(spec, DensityBackend::AnalyticStable, cfg)?;
        let numeric = InverseDensity::numeric(spec, cfg);
        for t in [0.5, 1.0, 2.0] {
            for tau in [0.1, 0.5, 1.0, 2.0] {
                worst = worst.max((analytic.density(t, tau)? - numeric.density(t, tau)?).abs());
            }
        }
    }
    Ok(within(worst, 1e-5, "max abs difference"))
}

/// 𝒦(λ) ∫ p_τ(r) e^{-τλ𝒦(λ)} dτ by direct quadrature.
fn transform_by_tau_quadrature(spec: SubordinatorSpec, d: u32, r: f64, lambda: f64) -> Result<f64> {
    let k = spec.kernel_laplace(lambda)?;
    let phi = lambda * k;
    let mut edges = vec![0.0];
    edges.extend(log_panels(1e-6, 200.0 / phi, 6));
    let q = integrate_breaks(
        |tau| heat_kernel(d, r, tau).unwrap_or(0.0) * (-tau * phi).exp(),
        &edges,
        QuadConfig::new(1e-300, 1e-13),
    )?;
    Ok(k * q.value)
}

fn transform_closed_forms() -> Result<Measured> {
    let mut worst: f64 = 0.0;
    for spec in [
        SubordinatorSpec::stable(0.5)?,
        SubordinatorSpec::gamma(1.0, 1.0)?,
        SubordinatorSpec::class_c1(0.7)?,
    ] {
        for d in [1, 2, 3, 5] {
            for r in [0.5, 1.0, 2.0] {
                for lambda in [0.25, 1.0] {
                    let closed = subordinated_kernel_laplace(spec, d, r, lambda)?;
                    let quad = transform_by_tau_quadrature(spec, d, r, lambda)?;
                    worst = worst.max((closed / quad - 1.0).abs());
                }
            }
        }
    }
    Ok(within(worst, 1e-8, "max relative difference"))
}

fn c1_exponents() -> Result<Measured> {
    let cfg = KernelConfig::default();
    let mut worst: f64 = 0.0;
    let mut diagnostics = Vec::new();
    for theta in [0.4, 0.7] {
        let spec = SubordinatorSpec::class_c1(theta)?;
        for d in [1, 3, 5] {
            let v = verify(d, ClassParams::C1 { theta }, spec, FIT_RADIUS, (1e3, 1e6), &cfg)?;
            worst = worst.max((v.fitted.power_t - v.predicted.power_t).abs());
            let far = verify(d, ClassParams::C1 { theta }, spec, 1.0, (1e3, 1e6), &cfg)?;
            diagnostics.push(format!(
                "theta={theta} d={d}: power_t {:.4} at r={FIT_RADIUS}, {:.4} at r=1 (law {:.4})",
                v.fitted.power_t, far.fitted.power_t, v.predicted.power_t
            ));
        }
    }
    let mut m = within(worst, 0.02, "max |power_t - law|");
    m.diagnostics = diagnostics;
    Ok(m)
}

fn c1_spatial() -> Result<Measured> {
    let spec = SubordinatorSpec::class_c1(0.5)?;
    let t = 1e6;
    let s = spatial_ratio(spec, 3, 1.0, 2.0, t, &KernelConfig::default())?;
    let miss = (s.measured / s.predicted - 1.0).abs();
    let phi = spec.laplace_exponent(1.0 / t)?;
    let resolvent = 2.0 * (2.0 * phi).sqrt().exp();
    Ok(Measured {
        pass: miss <= 0.05,
        summary: format!(
            "M(1)/M(2) {:.4} vs 2^0.75 = {:.4}, miss {miss:.3} (tol 0.05)",
            s.measured, s.predicted
        ),
        diagnostics: vec![
            format!("against 2^(d-2) = 2: miss {:.3}", (s.measured / 2.0 - 1.0).abs()),
            format!(
                "against the d=3 resolvent ratio 2 e^(sqrt(2 Phi(1/t))) = {resolvent:.4}: miss {:.4}",
                (s.measured / resolvent - 1.0).abs()
            ),
        ],
    })
}

fn log_laws() -> Result<Measured> {
    let cfg = KernelConfig::default();
    let mut worst_log: f64 = 0.0;
    let mut worst_t: f64 = 0.0;
    let mut diagnostics = Vec::new();
    let cases = [
        (SubordinatorSpec::class_c2(1.0)?, ClassParams::C2 { mu0: 1.0 }),
        (
            SubordinatorSpec::class_c3(0.5, 1.0)?,
            ClassParams::C3 { s: 0.5, c: 1.0 },
        ),
    ];
    for (spec, params) in cases {
        let v = verify(3, params, spec, FIT_RADIUS, (1e4, 1e8), &cfg)?;
        worst_log = worst_log.max((v.fitted.power_log - v.predicted.power_log).abs());
        worst_t = worst_t.max(v.fitted.power_t.abs());
        let far = verify(3, params, spec, 1.0, (1e4, 1e8), &cfg)?;
        diagnostics.push(format!(
            "{spec}: power_log {:.4}, power_t {:.5} at r={FIT_RADIUS}; power_log {:.4} at r=1 (law {})",
            v.fitted.power_log, v.fitted.power_t, far.fitted.power_log, v.predicted.power_log
        ));
    }
    Ok(Measured {
        pass: worst_log <= 0.15 && worst_t <= 0.005,
        summary: format!("max |power_log - law| {worst_log:.3e} (tol 0.15), max |power_t| {worst_t:.2e} (tol 0.005)"),
        diagnostics,
    })
}

fn monte_carlo() -> Result<Measured> {
    let (theta, t) = (0.5, 1.0);
    let pool = SamplePool::draw(
        SubordinatorSpec::stable(theta)?,
        t,
        100_000,
        2024,
        &PathConfig::default(),
    )?;
    let mut worst_z: f64 = 0.0;
    for lambda in [0.5, 1.0, 2.0] {
        let (mean, se) = pool.laplace_functional(lambda);
        worst_z = worst_z.max((mean - stable_inverse_laplace(theta, t, lambda)?).abs() / se);
    }
    let ks = pool.ks_distance(|tau| stable_inverse_cdf(theta, t, tau))?;
    Ok(Measured {
        pass: worst_z <= 4.0 && ks < 0.01,
        summary: format!("max |z| {worst_z:.2} (tol 4 SE), KS {ks:.4} (tol 0.01)"),
        diagnostics: Vec::new(),
    })
}

fn nonlocal_gaussian() -> Result<Measured> {
    let kernel = ConvolutionKernelSpec::gaussian(1.0)?;
    let lattice = Lattice::new(1, 1 << 14, 0.025)?;
    let errs = [25.0, 50.0, 100.0, 200.0]
        .iter()
        .map(|&t| gaussian_comparison(&kernel, lattice, t, 2.0).map(|c| c.sup_rel_error))
        .collect::<Result<Vec<f64>>>()?;
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let bound = errs[0] * 8f64.powf(-0.25) * 1.5;
    Ok(Measured {
        pass: decreasing && errs[3] < bound,
        summary: format!(
            "errors {:.3e} {:.3e} {:.3e} {:.3e}, decreasing {decreasing}, err(200) vs bound {:.3e}",
            errs[0], errs[1], errs[2], errs[3], bound
        ),
        diagnostics: Vec::new(),
    })
}

fn special_functions() -> Result<Measured> {
    let mut ml: f64 = 0.0;
    for i in 0..=200 {
        let x = i as f64 * 0.05;
        ml = ml.max((mittag_leffler(0.5, x)? - (x * x).exp() * erfc(x)).abs());
    }
    let mut pair: f64 = 0.0;
    for theta in [0.3, 0.5, 0.7] {
        for s in [0.5, 1.0, 2.0] {
            let lt = integrate_to_inf(
                |z: f64| (-s * z).exp() * m_wright(theta, z).unwrap_or(f64::NAN),
                0.0,
                1.0,
                QuadConfig::new(1e-13, 1e-11),
            )?
            .value;
            pair = pair.max((lt - mittag_leffler(theta, s)?).abs());
        }
    }
    // K_0 against its leading law −ln z (2%) and every order > 0 against
    // ½Γ(ν)(z/2)^{-ν} (1%).
    let mut k0: f64 = 0.0;
    let mut knu: f64 = 0.0;
    for z in [1e-4, 1e-5, 1e-6] {
        k0 = k0.max((bessel_k(0.0, z)? / -z.ln() - 1.0).abs());
        for nu in [0.3, 0.5, 1.0, 1.5, 2.7, 4.0] {
            knu = knu.max((bessel_k(nu, z)? / (0.5 * gamma_fn(nu) * (z / 2.0).powf(-nu)) - 1.0).abs());
        }
    }
    let k0_full = (bessel_k(0.0, 1e-4)? + (0.5e-4f64).ln() + EULER_GAMMA).abs();
    Ok(Measured {
        pass: ml <= 1e-10 && pair <= 1e-6 && k0 <= 0.02 && knu <= 0.01,
        summary: format!("ML-erfc {ml:.1e}, M-Wright pair {pair:.1e}, K_0 {k0:.2e}, K_nu {knu:.2e}"),
        diagnostics: vec![format!("K_0(1e-4) against -ln(z/2) - gamma: {k0_full:.1e}")],
    })
}
