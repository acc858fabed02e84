use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use subkern_core::laplace::InversionMethod;
use subkern_core::SubordinatorSpec;

/// Inverse-subordinator densities, subordinated heat kernels and their
/// Cesaro means.
#[derive(Debug, Parser)]
#[command(name = "subkern", version)]
pub struct Cli {
    /// Worker threads for parallel grid evaluation [default: available cores]
    #[arg(long, global = true, env = "SUBKERN_WORKERS")]
    pub workers: Option<usize>,

    /// Write CSV here instead of standard output
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one special function
    Specfun(SpecfunArgs),
    /// Density G_t(τ) of the inverse subordinator E(t)
    Density(DensityArgs),
    /// Subordinated heat kernel v^E(x, t) = ∫ p_τ(x) G_t(τ) dτ
    Kernel(KernelArgs),
    /// Cesaro mean M_t(v^E) = (1/t) ∫_0^t v^E(x, s) ds
    Cesaro(CesaroArgs),
    /// Fit M_t against the long-time law of a kernel class
    Asymptotics(AsymptoticsArgs),
    /// Monte Carlo draws of E(t)
    Mc(McArgs),
    /// Lattice solution of ∂_t v = a * v − v with v(0) = δ
    Nonlocal(NonlocalArgs),
    /// Run the acceptance checks and list the failed ones
    VerifyAll(VerifyAllArgs),
}

/// A list of points: `v1,v2,...`, or `start:stop:count` (linear, endpoints
/// included; with --log, count points per decade).
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, count: usize },
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad number `{p}`: {e}"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, n] => {
                let count = n.trim().parse::<usize>().map_err(|e| format!("bad count `{n}`: {e}"))?;
                let (start, stop) = (num(a)?, num(b)?);
                if count == 0 || !(stop >= start) {
                    return Err(format!("`{s}`: need stop >= start and count >= 1"));
                }
                Ok(Grid::Range { start, stop, count })
            }
            [one] => Ok(Grid::List(one.split(',').map(num).collect::<Result<_, _>>()?)),
            _ => Err(format!("`{s}`: expected `v1,v2,...` or `start:stop:count`")),
        }
    }
}

impl Grid {
    pub fn linear(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Range { stop, count: 1, .. } => vec![stop],
            Grid::Range { start, stop, count } => (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }

    pub fn points(&self, log: bool) -> Result<Vec<f64>, String> {
        match *self {
            Grid::Range { start, stop, count } if log => {
                if !(start > 0.0 && stop > start) {
                    return Err("a log grid needs 0 < start < stop".into());
                }
                subkern_core::kernel::log_grid(start, stop, count).map_err(|e| e.to_string())
            }
            _ => Ok(self.linear()),
        }
    }
}

/// `t_min:t_max`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window(pub f64, pub f64);

impl FromStr for Window {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("`{s}`: expected `t_min:t_max`"))?;
        let a: f64 = a.trim().parse().map_err(|e| format!("bad number `{a}`: {e}"))?;
        let b: f64 = b.trim().parse().map_err(|e| format!("bad number `{b}`: {e}"))?;
        if !(a > 0.0 && b > a) {
            return Err(format!("`{s}`: need 0 < t_min < t_max"));
        }
        Ok(Window(a, b))
    }
}

fn parse_spec(s: &str) -> Result<SubordinatorSpec, String> {
    s.parse().map_err(|e: subkern_core::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<InversionMethod, String> {
    s.parse().map_err(|e: subkern_core::Error| e.to_string())
}

/// Numerical inversion settings.
#[derive(Debug, Clone, Args)]
pub struct InversionArgs {
    /// Inversion method: talbot or stehfest
    #[arg(long, default_value = "talbot", value_parser = parse_method)]
    pub method: InversionMethod,
    /// Contour nodes (Talbot) or terms (Gaver–Stehfest, even, ≤ 20) [default: 32 / 14]
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Relative tolerance of the refinement check between node counts
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Absolute tolerance of the refinement check, relative to 1/τ*(t)
    #[arg(long)]
    pub abs_tol: Option<f64>,
}

const SUB_HELP: &str = "Subordinator: stable:θ (Φ(λ) = λ^θ), gamma:a,b (Φ(λ) = a ln(1 + λ/b)), \
c1:θ (𝒦(λ) = λ^(θ-1)), c2:μ0 (𝒦(λ) ~ μ0 / (λ ln(1/λ))), c3:s,c (𝒦(λ) ~ c / (λ ln(1/λ)^(1+s)))";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpecialFn {
    /// Mittag-Leffler E_θ(−x); needs --theta
    Ml,
    /// M-Wright M_θ(x), x ≥ 0; needs --theta
    Mwright,
    /// ∫_x^∞ M_θ(z) z^(−1/θ) dz; needs --theta
    MwrightTail,
    /// Modified Bessel K_ν(x); needs --nu
    BesselK,
    /// Upper incomplete gamma Γ(0, x)
    Gamma0,
    /// Density of the standard θ-stable law, E e^(−λS) = e^(−λ^θ); needs --theta
    StableDensity,
    /// CDF of the standard θ-stable law; needs --theta
    StableCdf,
}

#[derive(Debug, Clone, Args)]
pub struct SpecfunArgs {
    /// Function to evaluate
    #[arg(long = "fn", value_enum)]
    pub function: SpecialFn,
    /// Index θ ∈ (0, 1] of the Mittag-Leffler, M-Wright and stable functions
    #[arg(long)]
    pub theta: Option<f64>,
    /// Order ν ≥ 0 of K_ν
    #[arg(long)]
    pub nu: Option<f64>,
    /// Argument
    #[arg(long)]
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Closed form for stable-type specs, inversion otherwise
    Auto,
    /// t^(−θ) M_θ(τ t^(−θ)); stable and c1 only
    Analytic,
    /// Inversion of 𝒦(λ) e^(−τΦ(λ)) in λ
    Numeric,
}

#[derive(Debug, Clone, Args)]
pub struct DensityArgs {
    #[arg(long, value_parser = parse_spec, help = SUB_HELP)]
    pub sub: SubordinatorSpec,
    /// Times t > 0 (`v1,v2,...` or `start:stop:count`)
    #[arg(long)]
    pub t: Grid,
    /// τ values ≥ 0 (`v1,v2,...` or `start:stop:count`)
    #[arg(long)]
    pub tau_grid: Grid,
    #[arg(long, value_enum, default_value = "auto")]
    pub backend: Backend,
    #[command(flatten)]
    pub inversion: InversionArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GeometryArgs {
    #[arg(long, value_parser = parse_spec, help = SUB_HELP)]
    pub sub: SubordinatorSpec,
    /// Space dimension d ≥ 1 of the heat kernel p_τ(x) = (2πτ)^(−d/2) e^(−|x|²/2τ)
    #[arg(long)]
    pub d: u32,
    /// Radius |x| (> 0 for d ≥ 2)
    #[arg(long)]
    pub r: f64,
    /// Times t > 0 (`v1,v2,...` or `start:stop:count`)
    #[arg(long)]
    pub t_grid: Grid,
    /// Read `start:stop:count` as count points per decade
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub inversion: InversionArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KernelRoute {
    /// τ-quadrature of p_τ(x) G_t(τ)
    Quadrature,
    /// Inversion of the closed-form transform of v^E
    Inversion,
}

#[derive(Debug, Clone, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_enum, default_value = "inversion")]
    pub route: KernelRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CesaroRoute {
    /// Time average of the inverted v^E(x, s) over s ∈ [0, t]
    TimeAverage,
    /// (1/t) times the inversion of (ℒv^E)(λ)/λ
    Transform,
}

#[derive(Debug, Clone, Args)]
pub struct CesaroArgs {
    #[command(flatten)]
    pub geometry: GeometryArgs,
    #[arg(long, value_enum, default_value = "time-average")]
    pub route: CesaroRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    /// 𝒦(λ) = λ^(θ−1); needs --theta
    C1,
    /// 𝒦(λ) ~ μ0 / (λ ln(1/λ)); needs --mu0
    C2,
    /// 𝒦(λ) ~ c / (λ ln(1/λ)^(1+s)); needs --s and --c
    C3,
}

#[derive(Debug, Clone, Args)]
pub struct AsymptoticsArgs {
    #[arg(long, value_enum)]
    pub class: ClassArg,
    /// θ ∈ (0, 1) of class c1
    #[arg(long)]
    pub theta: Option<f64>,
    /// μ0 > 0 of class c2
    #[arg(long)]
    pub mu0: Option<f64>,
    /// s > 0 of class c3
    #[arg(long)]
    pub s: Option<f64>,
    /// c > 0 of class c3
    #[arg(long)]
    pub c: Option<f64>,
    /// Space dimension d ≥ 1
    #[arg(long)]
    pub d: u32,
    /// Radius |x| > 0
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Fit window `t_min:t_max`
    #[arg(long)]
    pub window: Window,
}

#[derive(Debug, Clone, Args)]
pub struct McArgs {
    /// Subordinator (stable:θ or gamma:a,b)
    #[arg(long, value_parser = parse_spec)]
    pub sub: SubordinatorSpec,
    /// Time t > 0 at which E(t) is drawn
    #[arg(long)]
    pub t: f64,
    /// Number of draws
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Print summary statistics instead of the draws
    #[arg(long)]
    pub summary: bool,
    /// λ values for the Laplace functional E e^(−λE(t)) in the summary
    #[arg(long, default_value = "0.5,1,2")]
    pub lambda: Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileArg {
    /// a(x) ∝ e^(−|x|²/2v); set v with --variance
    Gaussian,
    /// a uniform on the ball of radius --radius
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct NonlocalArgs {
    /// Convolution kernel a (normalized to unit mass)
    #[arg(long, value_enum, default_value = "gaussian")]
    pub profile: ProfileArg,
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Lattice dimension (1 or 2)
    #[arg(long, default_value_t = 1)]
    pub d: u32,
    /// Points per axis (power of two)
    #[arg(long, default_value_t = 16384)]
    pub n: usize,
    /// Lattice spacing
    #[arg(long, default_value_t = 0.025)]
    pub h: f64,
    /// Times t > 0
    #[arg(long)]
    pub t: Grid,
    /// Print v on |x| ≤ factor·√t and compare with the Gaussian there
    #[arg(long, default_value_t = 2.0)]
    pub x_max_factor: f64,
    /// Subordinate the solution by this spec and print its Cesaro mean at --r instead
    #[arg(long, value_parser = parse_spec)]
    pub sub: Option<SubordinatorSpec>,
    /// Radius for --sub
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyAllArgs {
    /// Run only these criteria
    #[arg(long, value_delimiter = ',')]
    pub criteria: Option<Vec<u8>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let g: Grid = "0:4:5".parse().unwrap();
        assert_eq!(g.linear(), vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let g: Grid = "1,10".parse().unwrap();
        assert_eq!(g.linear(), vec![1.0, 10.0]);
        let g: Grid = "1e3:1e6:2".parse().unwrap();
        assert_eq!(g.points(true).unwrap().len(), 7);
        assert!("4:0:5".parse::<Grid>().is_err());
        assert!("1:2".parse::<Grid>().is_err());
        assert_eq!("1e3:1e6".parse::<Window>().unwrap(), Window(1e3, 1e6));
        assert!("1e6:1e3".parse::<Window>().is_err());
    }
}
