//! Long-time laws of the Cesaro mean M_t(v^E(x, ·)) for the kernel classes
//! C1–C3 and dimension regimes d = 1, d = 2, d ≥ 3, plus least-squares
//! fitting of computed curves against them.
//!
//! | class | d = 1                           | d = 2                                   | d ≥ 3                       |
//! |-------|---------------------------------|-----------------------------------------|-----------------------------|
//! | C1    | t^{-θ/2}                        | t^{-θ} ln(√2 r t^{-θ/2})                | r^{(θ+1)(2-d)/2} t^{-θ}     |
//! | C2    | log(t)^{-1/2} e^{-√(2μ0) r log(t)^{-1/2}} | log(t)^{-1} ln(√(2μ0) r log(t)^{-1/2}) | r^{2-d} log(t)^{-1}         |
//! | C3    | log(t)^{-(1+s)/2}               | log(t)^{-1-s} ln(√(2c) r log(t)^{-(1+s)/2}) | r^{2-d} log(t)^{-1-s}   |
//!
//! The inner logarithms in the d = 2 row tend to -∞, so the laws are read
//! as statements about |ln(...)|.

use crate::error::{domain, Error, Result};
use crate::kernel::{log_grid, subordinated_kernel_laplace_complex, CurveKind, KernelConfig, KernelCurve};
use crate::subordinator::{KernelClass, SubordinatorSpec};
use num_complex::Complex64;

/// Fit grid density used by [`verify`].
pub const POINTS_PER_DECADE: usize = 24;

/// Class parameters entering the predicted laws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassParams {
    C1 { theta: f64 },
    C2 { mu0: f64 },
    C3 { s: f64, c: f64 },
}

impl ClassParams {
    pub fn class(&self) -> KernelClass {
        match self {
            ClassParams::C1 { .. } => KernelClass::C1,
            ClassParams::C2 { .. } => KernelClass::C2,
            ClassParams::C3 { .. } => KernelClass::C3,
        }
    }

    /// Parameters of a spec's class; Gamma has none.
    pub fn from_spec(spec: &SubordinatorSpec) -> Result<Self> {
        match *spec {
            SubordinatorSpec::Stable { theta } | SubordinatorSpec::ClassC1 { theta } => Ok(Self::C1 { theta }),
            SubordinatorSpec::ClassC2 { mu0 } => Ok(Self::C2 { mu0 }),
            SubordinatorSpec::ClassC3 { s, c } => Ok(Self::C3 { s, c }),
            SubordinatorSpec::Gamma { .. } => Err(domain(
                "ClassParams",
                "the Gamma subordinator has 𝒦(0+) = a/b and belongs to none of C1-C3",
            )),
        }
    }
}

/// Dimension regimes distinguished by the laws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionRegime {
    One,
    Two,
    ThreeOrMore,
}

impl DimensionRegime {
    pub fn of(d: u32) -> Self {
        match d {
            0 | 1 => Self::One,
            2 => Self::Two,
            _ => Self::ThreeOrMore,
        }
    }
}

/// The inner logarithm of a d = 2 law: ln(coef · r · g(t)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerLog {
    /// g(t) = t^{-exponent}
    TimePower { coef: f64, exponent: f64 },
    /// g(t) = log(t)^{-exponent}
    LogPower { coef: f64, exponent: f64 },
}

impl InnerLog {
    /// The argument coef · r · g(t).
    pub fn argument(&self, r: f64, t: f64) -> f64 {
        match *self {
            InnerLog::TimePower { coef, exponent } => coef * r * t.powf(-exponent),
            InnerLog::LogPower { coef, exponent } => coef * r * t.ln().powf(-exponent),
        }
    }

    pub fn value(&self, r: f64, t: f64) -> f64 {
        self.argument(r, t).ln()
    }
}

/// A predicted law C · r^{spatial} · t^{power_t} · log(t)^{power_log} · |inner|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticForm {
    pub class: KernelClass,
    pub regime: DimensionRegime,
    pub power_t: f64,
    pub power_log: f64,
    /// Set for the d = 2 laws, which carry an inner ln(...) factor.
    pub has_loglog_factor: bool,
    pub inner_log: Option<InnerLog>,
    /// Power of |x| in the prefactor where the law states one (d ≥ 3).
    pub spatial_exponent: Option<f64>,
}

impl AsymptoticForm {
    /// The law with C = 1; the inner logarithm enters through its modulus.
    pub fn shape(&self, r: f64, t: f64) -> f64 {
        let mut v = t.powf(self.power_t);
        if self.power_log != 0.0 {
            v *= t.ln().powf(self.power_log);
        }
        if let Some(inner) = self.inner_log {
            v *= inner.value(r, t).abs();
        }
        if let Some(p) = self.spatial_exponent {
            v *= r.powf(p);
        }
        v
    }

    /// The fit model the class is checked with.
    pub fn model(&self) -> FitModel {
        match self.class {
            KernelClass::C1 => FitModel::PurePower,
            _ => FitModel::PowerTimesLogPower,
        }
    }
}

/// The predicted law for `params`' class in dimension `d`.
pub fn predict(d: u32, params: ClassParams) -> AsymptoticForm {
    let regime = DimensionRegime::of(d);
    let df = d as f64;
    let (power_t, power_log, inner_log, spatial_exponent) = match (params, regime) {
        (ClassParams::C1 { theta }, DimensionRegime::One) => (-theta / 2.0, 0.0, None, None),
        (ClassParams::C1 { theta }, DimensionRegime::Two) => (
            -theta,
            0.0,
            Some(InnerLog::TimePower {
                coef: 2f64.sqrt(),
                exponent: theta / 2.0,
            }),
            None,
        ),
        (ClassParams::C1 { theta }, DimensionRegime::ThreeOrMore) => {
            (-theta, 0.0, None, Some((theta + 1.0) * (2.0 - df) / 2.0))
        }
        (ClassParams::C2 { .. }, DimensionRegime::One) => (0.0, -0.5, None, None),
        (ClassParams::C2 { mu0 }, DimensionRegime::Two) => (
            0.0,
            -1.0,
            Some(InnerLog::LogPower {
                coef: (2.0 * mu0).sqrt(),
                exponent: 0.5,
            }),
            None,
        ),
        (ClassParams::C2 { .. }, DimensionRegime::ThreeOrMore) => (0.0, -1.0, None, Some(2.0 - df)),
        (ClassParams::C3 { s, .. }, DimensionRegime::One) => (0.0, -(1.0 + s) / 2.0, None, None),
        (ClassParams::C3 { s, c }, DimensionRegime::Two) => (
            0.0,
            -1.0 - s,
            Some(InnerLog::LogPower {
                coef: (2.0 * c).sqrt(),
                exponent: (1.0 + s) / 2.0,
            }),
            None,
        ),
        (ClassParams::C3 { s, .. }, DimensionRegime::ThreeOrMore) => (0.0, -1.0 - s, None, Some(2.0 - df)),
    };
    AsymptoticForm {
        class: params.class(),
        regime,
        power_t,
        power_log,
        has_loglog_factor: regime == DimensionRegime::Two,
        inner_log,
        spatial_exponent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    /// ln M = c + p ln t
    PurePower,
    /// ln M = c + p ln t + q ln ln t
    PowerTimesLogPower,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub power_t: f64,
    pub power_log: f64,
    pub intercept: f64,
    /// RMS residual of ln M.
    pub residual: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

/// Least-squares fit of ln v against (ln t, ln ln t) for the samples inside
/// `window`.
pub fn fit_samples(t: &[f64], v: &[f64], window: (f64, f64), model: FitModel) -> Result<FitResult> {
    if t.len() != v.len() {
        return Err(domain("fit_powerlaw", "t and value arrays differ in length"));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(domain("fit_powerlaw", format!("bad window [{lo}, {hi}]")));
    }
    if model == FitModel::PowerTimesLogPower && lo <= 1.0 {
        return Err(domain("fit_powerlaw", "ln ln t needs t > 1"));
    }
    let slack = 1e-9;
    let mut rows = Vec::new();
    for (&ti, &vi) in t.iter().zip(v) {
        if ti < lo * (1.0 - slack) || ti > hi * (1.0 + slack) {
            continue;
        }
        if !(vi > 0.0) {
            return Err(Error::NonPositive { t: ti, value: vi });
        }
        rows.push((ti, vi.ln()));
    }
    if rows.len() < 8 {
        return Err(Error::InsufficientPoints {
            needed: 8,
            found: rows.len(),
        });
    }
    let cols: Vec<Vec<f64>> = match model {
        FitModel::PurePower => vec![rows.iter().map(|r| r.0.ln()).collect()],
        FitModel::PowerTimesLogPower => vec![
            rows.iter().map(|r| r.0.ln()).collect(),
            rows.iter().map(|r| r.0.ln().ln()).collect(),
        ],
    };
    let y: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (coef, intercept, residual) = least_squares(&cols, &y);
    let (power_t, power_log) = match model {
        FitModel::PurePower => (coef[0], 0.0),
        FitModel::PowerTimesLogPower => (coef[0], coef[1]),
    };
    Ok(FitResult {
        power_t,
        power_log,
        intercept,
        residual,
        t_min: rows[0].0,
        t_max: rows[rows.len() - 1].0,
        points: rows.len(),
    })
}

/// Fits a computed curve; see [`fit_samples`].
pub fn fit_powerlaw(curve: &KernelCurve, window: (f64, f64), model: FitModel) -> Result<FitResult> {
    fit_samples(&curve.t_grid, &curve.values, window, model)
}

// Ordinary least squares with an intercept, via Householder QR on centred
// and scaled columns; ln t and ln ln t are nearly collinear on short windows.
fn least_squares(cols: &[Vec<f64>], y: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = y.len();
    let k = cols.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let ym = mean(y);
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let scales: Vec<f64> = cols
        .iter()
        .zip(&means)
        .map(|(c, m)| {
            c.iter()
                .map(|x| (x - m).powi(2))
                .sum::<f64>()
                .sqrt()
                .max(f64::MIN_POSITIVE)
        })
        .collect();
    // Column-major design matrix.
    let mut a: Vec<Vec<f64>> = cols
        .iter()
        .zip(means.iter().zip(&scales))
        .map(|(c, (m, s))| c.iter().map(|x| (x - m) / s).collect())
        .collect();
    let mut b: Vec<f64> = y.iter().map(|v| v - ym).collect();
    for j in 0..k {
        let norm = a[j][j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j) {
            let dot: f64 = v.iter().zip(&col[j..]).map(|(p, q)| p * q).sum();
            let f = 2.0 * dot / vnorm2;
            for (x, vi) in col[j..].iter_mut().zip(&v) {
                *x -= f * vi;
            }
        }
        let dot: f64 = v.iter().zip(&b[j..]).map(|(p, q)| p * q).sum();
        let f = 2.0 * dot / vnorm2;
        for (x, vi) in b[j..].iter_mut().zip(&v) {
            *x -= f * vi;
        }
    }
    let mut coef = vec![0.0; k];
    for j in (0..k).rev() {
        let mut s = b[j];
        for (i, c) in coef.iter().enumerate().skip(j + 1) {
            s -= a[i][j] * c;
        }
        coef[j] = s / a[j][j];
    }
    let rss: f64 = b[k..].iter().map(|x| x * x).sum();
    let coef: Vec<f64> = coef.iter().zip(&scales).map(|(c, s)| c / s).collect();
    let intercept = ym - coef.iter().zip(&means).map(|(c, m)| c * m).sum::<f64>();
    (coef, intercept, (rss / n as f64).sqrt())
}

/// Tolerances applied by [`verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerance {
    pub power_t: f64,
    pub power_log: f64,
    /// Minimum window width in decades.
    pub min_decades: f64,
}

impl VerifyTolerance {
    pub fn for_class(class: KernelClass) -> Self {
        match class {
            KernelClass::C1 => Self {
                power_t: 0.02,
                power_log: f64::INFINITY,
                min_decades: 3.0,
            },
            _ => Self {
                power_t: 0.005,
                power_log: 0.15,
                min_decades: 4.0,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verification {
    pub predicted: AsymptoticForm,
    pub fitted: FitResult,
    pub tolerance: VerifyTolerance,
    pub pass: bool,
    /// The computed Cesaro curve over the window.
    pub curve: KernelCurve,
}

/// Computes M_t(v^E) over `window` for `spec` at radius `r`, fits it with
/// the class's model and compares against [`predict`].
///
/// For d = 2 the curve is divided by |inner log| before fitting; the inner
/// argument must stay on one side of 1 across the window.
pub fn verify(
    d: u32,
    params: ClassParams,
    spec: SubordinatorSpec,
    r: f64,
    window: (f64, f64),
    cfg: &KernelConfig,
) -> Result<Verification> {
    let spec_params = ClassParams::from_spec(&spec)?;
    if spec_params.class() != params.class() {
        return Err(domain(
            "verify",
            format!(
                "spec {spec} is in class {}, not {}",
                spec_params.class(),
                params.class()
            ),
        ));
    }
    if !(r > 0.0) {
        return Err(domain("verify", format!("r must be > 0, got {r}")));
    }
    let predicted = predict(d, params);
    let grid = log_grid(window.0, window.1, POINTS_PER_DECADE)?;
    let curve = KernelCurve::compute(spec, d, r, CurveKind::CesaroMean, grid, cfg)?;
    let mut values = curve.values.clone();
    if let Some(inner) = predicted.inner_log {
        let (a0, a1) = (inner.argument(r, window.0), inner.argument(r, window.1));
        if (a0 - 1.0).signum() != (a1 - 1.0).signum() {
            return Err(domain(
                "verify",
                format!("inner logarithm changes sign inside [{}, {}]", window.0, window.1),
            ));
        }
        for (v, &t) in values.iter_mut().zip(&curve.t_grid) {
            *v /= inner.value(r, t).abs();
        }
    }
    let fitted = fit_samples(&curve.t_grid, &values, window, predicted.model())?;
    let tolerance = VerifyTolerance::for_class(predicted.class);
    let decades = (window.1 / window.0).log10();
    let pass = decades >= tolerance.min_decades - 1e-9
        && (fitted.power_t - predicted.power_t).abs() <= tolerance.power_t
        && (predicted.model() == FitModel::PurePower
            || (fitted.power_log - predicted.power_log).abs() <= tolerance.power_log);
    Ok(Verification {
        predicted,
        fitted,
        tolerance,
        pass,
        curve,
    })
}

/// M_t at two radii and the ratio predicted by the law's spatial prefactor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialRatio {
    pub measured: f64,
    pub predicted: f64,
}

/// Ratio M_t(r1)/M_t(r2) against (r1/r2)^{spatial_exponent} (d ≥ 3).
pub fn spatial_ratio(
    spec: SubordinatorSpec,
    d: u32,
    r1: f64,
    r2: f64,
    t: f64,
    cfg: &KernelConfig,
) -> Result<SpatialRatio> {
    let form = predict(d, ClassParams::from_spec(&spec)?);
    let p = form
        .spatial_exponent
        .ok_or_else(|| domain("spatial_ratio", "the law states no spatial power for this dimension"))?;
    let m = |r| KernelCurve::compute(spec, d, r, CurveKind::CesaroMean, vec![t], cfg).map(|c| c.values[0]);
    Ok(SpatialRatio {
        measured: m(r1)? / m(r2)?,
        predicted: (r1 / r2).powf(p),
    })
}

/// λ (ℒv^E)(λ) at λ = 1/t, which the Tauberian argument ties to M_t up to
/// a slowly varying factor.
pub fn karamata_proxy(spec: SubordinatorSpec, d: u32, r: f64, t: f64) -> Result<f64> {
    let l = Complex64::new(1.0 / t, 0.0);
    Ok((l * subordinated_kernel_laplace_complex(spec, d, r, l)?).re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        log_grid(1e3, 1e6, 24).unwrap()
    }

    #[test]
    fn predict_examples() {
        let f = predict(1, ClassParams::C1 { theta: 0.6 });
        assert!((f.power_t + 0.3).abs() < 1e-15 && f.power_log == 0.0);
        let f = predict(5, ClassParams::C2 { mu0: 1.0 });
        assert_eq!((f.power_t, f.power_log, f.spatial_exponent), (0.0, -1.0, Some(-3.0)));
        let f = predict(2, ClassParams::C3 { s: 0.5, c: 1.0 });
        assert_eq!((f.power_t, f.power_log, f.has_loglog_factor), (0.0, -1.5, true));
    }

    #[test]
    fn pure_power_fit_is_exact() {
        let t = grid();
        let v: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        let f = fit_samples(&t, &v, (1e3, 1e6), FitModel::PurePower).unwrap();
        assert!((f.power_t + 0.5).abs() < 1e-10);
        assert!(f.residual < 1e-12);
        assert_eq!(f.points, 73);
    }

    #[test]
    fn log_power_fits_are_exact() {
        let t = grid();
        let v: Vec<f64> = t.iter().map(|t| 1.0 / t.ln()).collect();
        let f = fit_samples(&t, &v, (1e3, 1e6), FitModel::PowerTimesLogPower).unwrap();
        assert!((f.power_log + 1.0).abs() < 1e-8 && f.power_t.abs() < 1e-8);
        let v: Vec<f64> = t.iter().map(|t| 3.0 * t.powf(-0.7) / t.ln()).collect();
        let f = fit_samples(&t, &v, (1e3, 1e6), FitModel::PowerTimesLogPower).unwrap();
        assert!((f.power_t + 0.7).abs() < 1e-8 && (f.power_log + 1.0).abs() < 1e-8);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-7);
    }

    #[test]
    fn fit_errors() {
        let t = grid();
        let v: Vec<f64> = t.iter().map(|t| t.powf(-0.5)).collect();
        assert!(matches!(
            fit_samples(&t, &v, (1e3, 1.2e3), FitModel::PurePower),
            Err(Error::InsufficientPoints { .. })
        ));
        let mut bad = v.clone();
        bad[10] = 0.0;
        assert!(matches!(
            fit_samples(&t, &bad, (1e3, 1e6), FitModel::PurePower),
            Err(Error::NonPositive { .. })
        ));
    }
}
