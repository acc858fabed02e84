//! Path-level sampling of subordinators S(t) and their inverses
//! E(t) = inf{s ≥ 0 : S(s) ≥ t}, with empirical checks against the
//! analytic densities.
//!
//! Draws are laid out in blocks of [`BLOCK_SIZE`]; block `k` uses stream
//! `k` of a ChaCha8 generator seeded by the pool seed, so pools are
//! bit-identical for any worker count.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::laplace::{InverseDensity, InversionConfig};
use crate::quad::{integrate_breaks, log_panels, QuadConfig};
use crate::specfun::{kanter_factor, mittag_leffler, stable_cdf};
use crate::subordinator::SubordinatorSpec;

pub const BLOCK_SIZE: usize = 1024;

/// A reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// One-sided θ-stable S(t), E e^{-λS(t)} = e^{-tλ^θ}, by Kanter's
/// representation S(1) = (A(U)/W)^{(1-θ)/θ}.
pub fn sample_stable_subordinator<R: Rng + ?Sized>(theta: f64, t: f64, rng: &mut R) -> f64 {
    let u = loop {
        let u: f64 = rng.random::<f64>() * PI;
        if u > 0.0 {
            break u;
        }
    };
    let w: f64 = Exp1.sample(rng);
    t.powf(1.0 / theta) * (kanter_factor(theta, u) / w).powf((1.0 - theta) / theta)
}

/// Gamma subordinator S(t): shape a·t, rate b.
pub fn sample_gamma_subordinator<R: Rng + ?Sized>(a: f64, b: f64, t: f64, rng: &mut R) -> f64 {
    ln_gamma_variate(a * t, rng).exp() / b
}

// ln of a Gamma(shape, 1) variate. Small shapes underflow in the direct
// sampler, so use G(α) = G(α+1) U^{1/α}.
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        return g.ln();
    }
    let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
    let u: f64 = 1.0 - rng.random::<f64>();
    g.ln() + u.ln() / shape
}

// Beta(α, β) fraction through log-gamma variates, stable for tiny shapes.
fn beta_fraction<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> f64 {
    let x = ln_gamma_variate(alpha, rng);
    let y = ln_gamma_variate(beta, rng);
    if x == f64::NEG_INFINITY && y == f64::NEG_INFINITY {
        // Both underflowed: the bridge is a single jump, left with probability α/(α+β).
        return if rng.random::<f64>() * (alpha + beta) < alpha {
            1.0
        } else {
            0.0
        };
    }
    1.0 / (1.0 + (y - x).exp())
}

/// Settings for path refinement in [`sample_inverse`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    /// Stop bisecting once the bracket is narrower than this fraction of its upper end.
    pub rel_width: f64,
    /// Maximum number of bracket doublings.
    pub max_doublings: usize,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            rel_width: 1e-6,
            max_doublings: 200,
        }
    }
}

/// One draw of E(t).
///
/// Stable: self-similarity gives E(t) = (t/S(1))^θ exactly. Gamma: the
/// path is sampled on a doubling bracket and refined by Gamma bridges
/// (S(m) - S(l) = (S(h) - S(l))·Beta(a(m-l), a(h-m))) until the crossing
/// of level t is located to `rel_width`.
pub fn sample_inverse<R: Rng + ?Sized>(spec: &SubordinatorSpec, t: f64, rng: &mut R, cfg: &PathConfig) -> Result<f64> {
    if !(t > 0.0) {
        return Err(domain("sample_inverse", format!("t must be > 0, got {t}")));
    }
    match *spec {
        SubordinatorSpec::Stable { theta } => {
            let s1 = sample_stable_subordinator(theta, 1.0, rng);
            Ok((t / s1).powf(theta))
        }
        SubordinatorSpec::Gamma { a, b } => gamma_inverse(a, b, t, rng, cfg),
        _ => Err(Error::Unsupported(
            "path sampling is available for Stable and Gamma subordinators",
        )),
    }
}

fn gamma_inverse<R: Rng + ?Sized>(a: f64, b: f64, t: f64, rng: &mut R, cfg: &PathConfig) -> Result<f64> {
    // Initial bracket at the mean crossing time b t / a.
    let (mut lo, mut s_lo) = (0.0, 0.0);
    let mut hi = b * t / a;
    let mut s_hi = sample_gamma_subordinator(a, b, hi, rng);
    let mut doublings = 0;
    while s_hi < t {
        if doublings == cfg.max_doublings {
            return Err(Error::BracketFailure(doublings));
        }
        lo = hi;
        s_lo = s_hi;
        s_hi += sample_gamma_subordinator(a, b, hi, rng);
        hi *= 2.0;
        doublings += 1;
    }
    while hi - lo > cfg.rel_width * hi {
        let mid = 0.5 * (lo + hi);
        let frac = beta_fraction(a * (mid - lo), a * (hi - mid), rng);
        assert!((0.0..=1.0).contains(&frac), "subordinator path must be nondecreasing");
        let s_mid = (s_lo + (s_hi - s_lo) * frac).min(s_hi);
        if s_mid >= t {
            hi = mid;
            s_hi = s_mid;
        } else {
            lo = mid;
            s_lo = s_mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Independent draws of E(t).
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePool {
    pub values: Vec<f64>,
    pub spec: SubordinatorSpec,
    pub t: f64,
    pub count: usize,
}

impl SamplePool {
    /// Draws `count` samples of E(t) in parallel over streams of `seed`.
    pub fn draw(spec: SubordinatorSpec, t: f64, count: usize, seed: u64, cfg: &PathConfig) -> Result<Self> {
        let values = draw_blocks(count, seed, |rng| sample_inverse(&spec, t, rng, cfg))?;
        Ok(Self { values, spec, t, count })
    }

    /// Sample mean and standard error of e^{-λE(t)}.
    pub fn laplace_functional(&self, lambda: f64) -> (f64, f64) {
        mean_and_stderr(self.values.iter().map(|e| (-lambda * e).exp()))
    }

    pub fn mean(&self) -> (f64, f64) {
        mean_and_stderr(self.values.iter().copied())
    }

    /// Kolmogorov-Smirnov distance to `cdf`.
    pub fn ks_distance<F: Fn(f64) -> Result<f64>>(&self, cdf: F) -> Result<f64> {
        ks_distance(&self.values, cdf)
    }
}

/// Runs `draw` `count` times, block k on stream k.
pub fn draw_blocks<F>(count: usize, seed: u64, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let blocks = count.div_ceil(BLOCK_SIZE);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let mut rng = RngStream::new(seed, k as u64).rng();
            let n = BLOCK_SIZE.min(count - k * BLOCK_SIZE);
            (0..n).map(|_| draw(&mut rng)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Mean and standard error; pairwise summation keeps the result independent
/// of how the data were produced.
pub fn mean_and_stderr<I: Iterator<Item = f64>>(values: I) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    let mean = pairwise_sum(&v) / n;
    let sq: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// sup_x |F_n(x) - F(x)|.
pub fn ks_distance<F: Fn(f64) -> Result<f64>>(values: &[f64], cdf: F) -> Result<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut worst: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x)?;
        worst = worst.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    Ok(worst)
}

/// P(E(t) ≤ τ) for the θ-stable inverse: P(S(1) ≥ t τ^{-1/θ}).
pub fn stable_inverse_cdf(theta: f64, t: f64, tau: f64) -> Result<f64> {
    if tau <= 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 - stable_cdf(theta, t * tau.powf(-1.0 / theta))?)
}

/// E e^{-λE(t)} = E_θ(-λt^θ) for the θ-stable inverse.
pub fn stable_inverse_laplace(theta: f64, t: f64, lambda: f64) -> Result<f64> {
    mittag_leffler(theta, lambda * t.powf(theta))
}

fn tau_panels(density: &InverseDensity, t: f64, upper: f64) -> Vec<f64> {
    let scale = density.spec.tau_scale(t);
    let mut edges = vec![0.0];
    edges.extend(log_panels(1e-8 * scale, upper, 4));
    edges
}

/// ∫_0^∞ e^{-λτ} G_t(τ) dτ by quadrature against the inverted density.
pub fn laplace_functional_reference(spec: SubordinatorSpec, t: f64, lambda: f64, cfg: &InversionConfig) -> Result<f64> {
    let g = InverseDensity::new(spec, *cfg);
    let upper = 80.0
        * spec
            .tau_scale(t)
            .max(1.0 / lambda.max(1e-300))
            .min(1e6 * spec.tau_scale(t));
    let err = std::cell::RefCell::new(None);
    let f = |tau: f64| match g.density(t, tau) {
        Ok(v) => (-lambda * tau).exp() * v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let r = integrate_breaks(f, &tau_panels(&g, t, upper), QuadConfig::new(1e-12, 1e-10))?;
    match err.into_inner() {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Tabulated P(E(t) ≤ τ) on `taus` (sorted) from the inverted density.
pub fn inverse_cdf_reference(spec: SubordinatorSpec, t: f64, taus: &[f64], cfg: &InversionConfig) -> Result<Vec<f64>> {
    let g = InverseDensity::new(spec, *cfg);
    let quad = QuadConfig::new(1e-12, 1e-10);
    let mut out = Vec::with_capacity(taus.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &tau in taus {
        if tau > prev {
            let err = std::cell::RefCell::new(None);
            let f = |u: f64| {
                g.density(t, u).unwrap_or_else(|e| {
                    err.borrow_mut().get_or_insert(e);
                    0.0
                })
            };
            let edges = if prev == 0.0 {
                tau_panels(&g, t, tau)
            } else {
                vec![prev, tau]
            };
            acc += integrate_breaks(f, &edges, quad)?.value;
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            prev = tau;
        }
        out.push(acc);
    }
    Ok(out)
}

/// Empirical v^E at given radii with bootstrap standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub bandwidth: f64,
    pub samples: usize,
}

/// How the radial KDE treats the boundary r = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Mirror the kernel at 0; total mass is exactly 1 but the estimate is
    /// O(h)-biased where the density has nonzero slope at 0.
    Reflection,
    /// Local-linear boundary kernel; O(h²) bias up to the boundary.
    LocalLinear,
}

/// Gaussian KDE of the radial samples R = |X| on [0, ∞).
#[derive(Debug, Clone, PartialEq)]
pub struct RadialKde {
    pub d: u32,
    pub bandwidth: f64,
    pub boundary: Boundary,
    radii: Vec<f64>,
}

impl RadialKde {
    pub fn new(d: u32, radii: Vec<f64>, bandwidth: f64, boundary: Boundary) -> Result<Self> {
        if radii.is_empty() || !(bandwidth > 0.0) {
            return Err(domain("RadialKde", "need samples and a positive bandwidth"));
        }
        Ok(Self {
            d,
            bandwidth,
            boundary,
            radii,
        })
    }

    /// Silverman's rule on the radial samples, times `factor`.
    pub fn silverman(d: u32, radii: Vec<f64>, factor: f64, boundary: Boundary) -> Result<Self> {
        let (_, se) = mean_and_stderr(radii.iter().copied());
        let n = radii.len() as f64;
        let sd = se * n.sqrt();
        let mut sorted = radii.clone();
        sorted.sort_by(f64::total_cmp);
        let q = |p: f64| sorted[((n - 1.0) * p) as usize];
        let iqr = (q(0.75) - q(0.25)) / 1.34;
        let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
        Self::new(d, radii, factor * 0.9 * spread * n.powf(-0.2), boundary)
    }

    /// Density of R at r.
    pub fn radial_density(&self, r: f64) -> f64 {
        let h = self.bandwidth;
        let c = 1.0 / ((2.0 * PI).sqrt() * h * self.radii.len() as f64);
        let terms: Vec<f64> = match self.boundary {
            Boundary::Reflection => self
                .radii
                .iter()
                .map(|&x| (-0.5 * ((r - x) / h).powi(2)).exp() + (-0.5 * ((r + x) / h).powi(2)).exp())
                .collect(),
            Boundary::LocalLinear => {
                // Moments a_j = ∫_{-p}^∞ u^j φ(u) du of the truncated kernel, p = r/h.
                let p = r / h;
                let phi_p = (-0.5 * p * p).exp() / (2.0 * PI).sqrt();
                let a0 = 0.5 * statrs::function::erf::erfc(-p / std::f64::consts::SQRT_2);
                let a1 = phi_p;
                let a2 = a0 - p * phi_p;
                let det = a0 * a2 - a1 * a1;
                self.radii
                    .iter()
                    .map(|&x| {
                        let u = (x - r) / h;
                        (a2 - a1 * u) / det * (-0.5 * u * u).exp()
                    })
                    .collect()
            }
        };
        c * pairwise_sum(&terms)
    }

    /// Density of X at |x| = r: f_R(r) / (|S^{d-1}| r^{d-1}).
    pub fn density(&self, r: f64) -> f64 {
        self.radial_density(r) / sphere_area(self.d, r)
    }

    /// Total mass of the radial estimate on [0, ∞): exactly 1 with reflection,
    /// since each mirrored kernel has unit mass there.
    pub fn mass(&self) -> Result<f64> {
        match self.boundary {
            Boundary::Reflection => Ok(1.0),
            Boundary::LocalLinear => {
                let hi = self.radii.iter().copied().fold(0.0, f64::max) + 10.0 * self.bandwidth;
                let mut edges = vec![0.0];
                edges.extend((1..=400).map(|i| hi * i as f64 / 400.0));
                Ok(integrate_breaks(|r| self.radial_density(r), &edges, QuadConfig::new(1e-10, 1e-8))?.value)
            }
        }
    }
}

/// |S^{d-1}| r^{d-1}; for d = 1 the two points ±r.
pub fn sphere_area(d: u32, r: f64) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * PI.powf(h) / crate::specfun::gamma_fn(h) * r.powi(d as i32 - 1)
}

/// Bandwidth, boundary treatment and bootstrap size for
/// [`empirical_subordinated_kernel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdeConfig {
    /// Multiplies Silverman's bandwidth.
    pub bandwidth_factor: f64,
    pub boundary: Boundary,
    pub resamples: usize,
}

impl Default for KdeConfig {
    fn default() -> Self {
        Self {
            bandwidth_factor: 0.5,
            boundary: Boundary::LocalLinear,
            resamples: 100,
        }
    }
}

/// Monte Carlo v^E(x, t): draws E(t), then X = √E(t) Z with Z standard
/// normal in R^d, and estimates the density of X at |x| ∈ `radii`.
pub fn empirical_subordinated_kernel(
    spec: SubordinatorSpec,
    d: u32,
    t: f64,
    n: usize,
    radii: &[f64],
    seed: u64,
    kde: &KdeConfig,
) -> Result<KernelEstimate> {
    if !(1..=3).contains(&d) {
        return Err(domain(
            "empirical_subordinated_kernel",
            format!("d must be 1, 2 or 3, got {d}"),
        ));
    }
    if d > 1 && radii.iter().any(|&r| r <= 0.0) {
        return Err(domain("empirical_subordinated_kernel", "radii must be > 0 for d >= 2"));
    }
    let cfg = PathConfig::default();
    let samples = draw_blocks(n, seed, |rng| {
        let e = sample_inverse(&spec, t, rng, &cfg)?;
        let z2: f64 = (0..d)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                z * z
            })
            .sum();
        Ok(e.sqrt() * z2.sqrt())
    })?;
    let resamples = kde.resamples;
    let boundary = kde.boundary;
    let kde = RadialKde::silverman(d, samples.clone(), kde.bandwidth_factor, boundary)?;
    let values: Vec<f64> = radii.iter().map(|&r| kde.density(r)).collect();
    let h = kde.bandwidth;
    let boots: Vec<Vec<f64>> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = RngStream::new(seed ^ 0x9e37_79b9_7f4a_7c15, b as u64).rng();
            let resample: Vec<f64> = (0..n).map(|_| samples[rng.random_range(0..n)]).collect();
            let k = RadialKde::new(d, resample, h, boundary).expect("nonempty resample");
            radii.iter().map(|&r| k.density(r)).collect()
        })
        .collect();
    let std_errors = (0..radii.len())
        .map(|j| {
            let (_, se) = mean_and_stderr(boots.iter().map(|b| b[j]));
            se * (resamples as f64).sqrt()
        })
        .collect();
    Ok(KernelEstimate {
        radii: radii.to_vec(),
        values,
        std_errors,
        bandwidth: h,
        samples: n,
    })
}
