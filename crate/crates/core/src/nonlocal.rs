//! Heat kernel of the jump operator Lu = a∗u − u on a periodic lattice.
//!
//! The fundamental solution is e^{-t}δ + v with the regularized kernel
//!
//!   v(x, t) = e^{-t} Σ_{k≥1} t^k a^{∗k}(x) / k!,
//!
//! computed here in Fourier space: each a^{∗k} is a power of the lattice
//! spectrum â. The atom e^{-t}δ is kept as a separate scalar.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use statrs::distribution::{DiscreteCDF, Poisson};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::kernel::{CurveKind, KernelConfig, KernelCurve};
use crate::laplace::InverseDensity;
use crate::quad::{log_panels, try_integrate_breaks};
use crate::subordinator::SubordinatorSpec;

/// Largest wrap-around mass tolerated on the periodic box.
pub const WRAP_TOLERANCE: f64 = 1e-10;
/// Largest Poisson mass allowed beyond the truncation order.
pub const SERIES_TAIL_TOLERANCE: f64 = 1e-12;
/// Most negative grid value attributed to FFT round-off.
pub const ROUNDOFF_FLOOR: f64 = -1e-14;

/// Periodic grid of n^d points with spacing h, origin at index 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    pub d: u32,
    pub n: usize,
    pub h: f64,
}

impl Lattice {
    pub fn new(d: u32, n: usize, h: f64) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(domain("Lattice", format!("d must be 1 or 2, got {d}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(domain("Lattice", format!("n must be a power of two >= 4, got {n}")));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(domain("Lattice", format!("h must be > 0, got {h}")));
        }
        Ok(Self { d, n, h })
    }

    /// Box side n·h.
    pub fn length(&self) -> f64 {
        self.n as f64 * self.h
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.d)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Signed lattice index of position i along one axis.
    pub fn signed(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Coordinates of flat index `idx` (row-major for d = 2).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let (i, j) = (idx % self.n, idx / self.n);
        let x = self.signed(i) as f64 * self.h;
        let y = if self.d == 2 {
            self.signed(j) as f64 * self.h
        } else {
            0.0
        };
        [x, y]
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.point(idx);
        x.hypot(y)
    }

    /// Flat index of -x.
    pub fn mirror(&self, idx: usize) -> usize {
        let (i, j) = (idx % self.n, idx / self.n);
        let m = |k: usize| (self.n - k) % self.n;
        if self.d == 1 {
            m(i)
        } else {
            m(i) + self.n * m(j)
        }
    }

    fn cell(&self) -> f64 {
        self.h.powi(self.d as i32)
    }
}

/// Real values on a [`Lattice`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl LatticeField {
    /// Σ values · h^d.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.lattice.cell()
    }

    /// Σ |x|² values · h^d.
    pub fn second_moment(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| self.lattice.radius(i).powi(2) * v)
            .sum::<f64>()
            * self.lattice.cell()
    }

    /// Value at the origin.
    pub fn at_origin(&self) -> f64 {
        self.values[0]
    }
}

/// Shape of the jump kernel a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelProfile {
    /// Centred Gaussian with `variance` per axis.
    Gaussian { variance: f64 },
    /// Uniform on the ball |x| ≤ radius.
    Uniform { radius: f64 },
}

/// A jump kernel a ≥ 0, a(x) = a(-x), ∫a = 1, ∫|x|²a < ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionKernelSpec {
    pub profile: KernelProfile,
}

impl ConvolutionKernelSpec {
    pub fn gaussian(variance: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(domain(
                "ConvolutionKernelSpec",
                format!("variance must be > 0, got {variance}"),
            ));
        }
        Ok(Self {
            profile: KernelProfile::Gaussian { variance },
        })
    }

    pub fn uniform(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(domain(
                "ConvolutionKernelSpec",
                format!("radius must be > 0, got {radius}"),
            ));
        }
        Ok(Self {
            profile: KernelProfile::Uniform { radius },
        })
    }

    /// Samples a on the lattice and rescales it to unit grid mass. Points
    /// on the edge of the uniform ball get trapezoid weight 1/2.
    pub fn discretize(&self, lattice: Lattice) -> Result<LatticeField> {
        let values: Vec<f64> = (0..lattice.len())
            .map(|i| {
                let r = lattice.radius(i);
                match self.profile {
                    KernelProfile::Gaussian { variance } => (-0.5 * r * r / variance).exp(),
                    KernelProfile::Uniform { radius } => {
                        let gap = r - radius;
                        if gap.abs() <= 1e-12 * radius {
                            0.5
                        } else if gap < 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                }
            })
            .collect();
        let mut field = LatticeField { lattice, values };
        let mass = field.mass();
        if !(mass > 0.0) {
            return Err(domain("discretize", "kernel is not resolved by the lattice spacing"));
        }
        field.values.iter_mut().for_each(|v| *v /= mass);
        Ok(field)
    }
}

// Forward or inverse unnormalized DFT of a field in place (2-D by rows then columns).
fn dft(lattice: Lattice, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(lattice.n)
    } else {
        planner.plan_fft_forward(lattice.n)
    };
    let n = lattice.n;
    for row in data.chunks_mut(n) {
        fft.process(row);
    }
    if lattice.d == 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            for i in 0..n {
                col[i] = data[i * n + j];
            }
            fft.process(&mut col);
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
    }
}

/// Lattice spectrum â of a kernel, normalized so â(0) = 1. Real because
/// the sampled kernel is symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpectrum {
    pub lattice: Lattice,
    pub values: Vec<f64>,
    /// ∫|x|² a on the grid.
    pub second_moment: f64,
}

impl KernelSpectrum {
    pub fn new(kernel: &ConvolutionKernelSpec, lattice: Lattice) -> Result<Self> {
        let a = kernel.discretize(lattice)?;
        let second_moment = a.second_moment();
        let cell = lattice.cell();
        let mut data: Vec<Complex64> = a.values.iter().map(|&v| Complex64::new(v * cell, 0.0)).collect();
        dft(lattice, &mut data, false);
        Ok(Self {
            lattice,
            values: data.iter().map(|c| c.re).collect(),
            second_moment,
        })
    }

    /// Two-sided Gaussian tail beyond half the box at covariance m₂t/d
    /// per axis, summed over axes.
    pub fn wrap_estimate(&self, t: f64) -> f64 {
        let d = self.lattice.d as f64;
        let sigma = (self.second_moment * t / d).sqrt();
        d * erfc(0.5 * self.lattice.length() / (sigma * std::f64::consts::SQRT_2))
    }

    fn check_box(&self, t: f64) -> Result<f64> {
        let estimate = self.wrap_estimate(t);
        if estimate > WRAP_TOLERANCE {
            return Err(Error::BoxTooSmall {
                estimate,
                tolerance: WRAP_TOLERANCE,
            });
        }
        Ok(estimate)
    }

    /// v(x, τ) at the point (r, 0, ...) from the trigonometric interpolant
    /// of the lattice solution, using the summed series e^{τ(â-1)} - e^{-τ}.
    pub fn point_value(&self, r: f64, tau: f64) -> f64 {
        let lat = self.lattice;
        let n = lat.n;
        let w = 2.0 * PI * r / lat.length();
        let cosines: Vec<f64> = (0..n).map(|i| (w * lat.signed(i) as f64).cos()).collect();
        let atom = (-tau).exp();
        let sum: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &a)| ((tau * (a - 1.0)).exp() - atom) * cosines[idx % n])
            .sum();
        sum / lat.length().powi(lat.d as i32)
    }
}

/// v(·, t) with its bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedKernel {
    pub field: LatticeField,
    pub t: f64,
    /// e^{-t}, the mass of the atom at the origin (not on the grid).
    pub singular_mass: f64,
    pub k_max: usize,
    pub wrap_estimate: f64,
    /// Most negative value before clamping.
    pub min_raw: f64,
    /// m₂ = ∫|x|² a of the discretized kernel.
    pub kernel_second_moment: f64,
}

/// Truncation order t + 12√t + 20.
pub fn default_order(t: f64) -> usize {
    (t + 12.0 * t.sqrt() + 20.0).ceil() as usize
}

/// v(·, t) on the lattice with the series cut at `k_max` (default
/// [`default_order`]).
pub fn regularized_kernel(
    kernel: &ConvolutionKernelSpec,
    lattice: Lattice,
    t: f64,
    k_max: Option<usize>,
) -> Result<RegularizedKernel> {
    let spectrum = KernelSpectrum::new(kernel, lattice)?;
    regularized_kernel_from(&spectrum, t, k_max)
}

/// [`regularized_kernel`] for a precomputed spectrum.
pub fn regularized_kernel_from(spectrum: &KernelSpectrum, t: f64, k_max: Option<usize>) -> Result<RegularizedKernel> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("regularized_kernel", format!("t must be > 0, got {t}")));
    }
    let k_max = k_max.unwrap_or_else(|| default_order(t));
    let poisson = Poisson::new(t).map_err(|e| domain("regularized_kernel", e.to_string()))?;
    let tail = poisson.sf(k_max as u64);
    if tail > SERIES_TAIL_TOLERANCE {
        return Err(domain(
            "regularized_kernel",
            format!("k_max = {k_max} leaves Poisson tail {tail:e} at t = {t}"),
        ));
    }
    let lattice = spectrum.lattice;
    let wrap_estimate = spectrum.check_box(t)?;
    let weights: Vec<f64> = (1..=k_max)
        .map(|k| (-t + k as f64 * t.ln() - ln_gamma(k as f64 + 1.0)).exp())
        .collect();
    let mut data: Vec<Complex64> = spectrum
        .values
        .iter()
        .map(|&a| {
            let mut power = 1.0;
            let mut sum = 0.0;
            for w in &weights {
                power *= a;
                sum += w * power;
            }
            Complex64::new(sum, 0.0)
        })
        .collect();
    dft(lattice, &mut data, true);
    let norm = 1.0 / (lattice.len() as f64 * lattice.cell());
    let raw: Vec<f64> = data.iter().map(|c| c.re * norm).collect();
    // v(x) = v(-x) holds exactly once each mirror pair shares one value.
    let mut values = vec![0.0; raw.len()];
    for (i, v) in values.iter_mut().enumerate() {
        *v = 0.5 * (raw[i] + raw[lattice.mirror(i)]);
    }
    let min_raw = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min_raw < ROUNDOFF_FLOOR {
        return Err(Error::Convergence {
            func: "regularized_kernel",
            msg: format!("grid value {min_raw:e} is below the round-off floor"),
        });
    }
    values.iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(RegularizedKernel {
        field: LatticeField { lattice, values },
        t,
        singular_mass: (-t).exp(),
        k_max,
        wrap_estimate,
        min_raw,
        kernel_second_moment: spectrum.second_moment,
    })
}

/// Distance of v(·, t) from the moment-matched Gaussian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComparison {
    pub t: f64,
    /// sup |v/g - 1| over grid points with |x| ≤ r_max_factor·√t.
    pub sup_rel_error: f64,
    /// t^{-1/4}
    pub band: f64,
    /// Per-axis variance of the comparison Gaussian, m₂t/d.
    pub variance: f64,
}

/// Compares v(·, t) with g(x) = (2πσ²)^{-d/2} e^{-|x|²/2σ²}, σ² = m₂t/d.
/// With m₂ = 2d this is (4πt)^{-d/2} e^{-|x|²/4t}.
pub fn gaussian_comparison(
    kernel: &ConvolutionKernelSpec,
    lattice: Lattice,
    t: f64,
    r_max_factor: f64,
) -> Result<GaussianComparison> {
    if !(t >= 10.0) {
        return Err(domain("gaussian_comparison", format!("t must be >= 10, got {t}")));
    }
    if !(r_max_factor >= 0.0) {
        return Err(domain("gaussian_comparison", "r_max_factor must be >= 0"));
    }
    let v = regularized_kernel(kernel, lattice, t, None)?;
    let d = lattice.d as f64;
    let variance = v.kernel_second_moment * t / d;
    let r_max = r_max_factor * t.sqrt();
    let mut worst: f64 = 0.0;
    for (i, &value) in v.field.values.iter().enumerate() {
        let r = lattice.radius(i);
        if r > r_max + 1e-12 {
            continue;
        }
        let g = (2.0 * PI * variance).powf(-0.5 * d) * (-0.5 * r * r / variance).exp();
        worst = worst.max((value / g - 1.0).abs());
    }
    Ok(GaussianComparison {
        t,
        sup_rel_error: worst,
        band: t.powf(-0.25),
        variance,
    })
}

/// M_t of the subordination of a τ-source f: ∫_0^∞ f(τ) H_t(τ) dτ, where
/// H_t(τ) = (1/t)∫_0^t G_s(τ) ds. Exchanging the s- and τ-integrals needs
/// one inversion per τ node instead of a τ-quadrature per s node.
///
/// H_t is closed-form for stable specs and inverted otherwise; pass a
/// density with an explicit backend to [`subordinated_cesaro_with`] to
/// choose.
pub fn subordinated_cesaro<F: Fn(f64) -> Result<f64>>(
    sub: SubordinatorSpec,
    source: F,
    t: f64,
    cfg: &KernelConfig,
) -> Result<f64> {
    subordinated_cesaro_with(&InverseDensity::new(sub, cfg.inversion), source, t, cfg)
}

/// [`subordinated_cesaro`] for a prepared density evaluator.
pub fn subordinated_cesaro_with<F: Fn(f64) -> Result<f64>>(
    density: &InverseDensity,
    source: F,
    t: f64,
    cfg: &KernelConfig,
) -> Result<f64> {
    subordinated_cesaro_upto(density, source, t, cfg).map(|(v, _)| v)
}

// Also returns the largest τ the quadrature reached.
fn subordinated_cesaro_upto<F: Fn(f64) -> Result<f64>>(
    density: &InverseDensity,
    source: F,
    t: f64,
    cfg: &KernelConfig,
) -> Result<(f64, f64)> {
    let scale = density.spec.tau_scale(t);
    let f = |tau: f64| -> Result<f64> {
        let h = density.averaged_density(t, tau)?;
        if h == 0.0 {
            return Ok(0.0);
        }
        Ok(h * source(tau)?)
    };
    let mut edges = vec![0.0];
    edges.extend(log_panels(1e-10 * scale, 4.0 * scale, 2));
    let mut hi = 4.0 * scale;
    let mut total = try_integrate_breaks(f, &edges, cfg.quad)?.value;
    for _ in 0..40 {
        let tail = try_integrate_breaks(f, &[hi, 2.0 * hi], cfg.quad)?.value;
        total += tail;
        hi *= 2.0;
        if tail.abs() <= 1e-12 * total.abs() {
            return Ok((total, hi));
        }
    }
    Err(Error::Convergence {
        func: "subordinated_cesaro",
        msg: format!("τ-tail did not decay at t = {t}"),
    })
}

/// M_t(v^E(x, ·)) at |x| = r for the nonlocal kernel subordinated by `sub`,
/// on `t_grid`. Runs in parallel over grid points.
pub fn subordinated_nonlocal_cesaro(
    kernel: &ConvolutionKernelSpec,
    lattice: Lattice,
    sub: SubordinatorSpec,
    r: f64,
    t_grid: Vec<f64>,
    cfg: &KernelConfig,
) -> Result<KernelCurve> {
    use rayon::prelude::*;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(
            "subordinated_nonlocal_cesaro",
            format!("r must be >= 0, got {r}"),
        ));
    }
    if t_grid.is_empty() || t_grid.windows(2).any(|w| !(w[1] > w[0])) || !(t_grid[0] > 0.0) {
        return Err(domain(
            "subordinated_nonlocal_cesaro",
            "t_grid must be positive and strictly increasing",
        ));
    }
    let spectrum = KernelSpectrum::new(kernel, lattice)?;
    let density = InverseDensity::new(sub, cfg.inversion);
    let values = t_grid
        .par_iter()
        .map(|&t| {
            let (m, tau_max) = subordinated_cesaro_upto(&density, |tau| Ok(spectrum.point_value(r, tau)), t, cfg)?;
            spectrum.check_box(tau_max)?;
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(KernelCurve {
        spec: sub,
        d: lattice.d,
        r,
        kind: CurveKind::CesaroMean,
        t_grid,
        values,
    })
}
