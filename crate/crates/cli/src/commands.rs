use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::CommandFactory;
use rayon::prelude::*;
use subkern_core::acceptance;
use subkern_core::asymptotics::{predict, verify, ClassParams};
use subkern_core::kernel::{cesaro_via_transform, subordinated_kernel, CurveKind, KernelConfig, KernelCurve};
use subkern_core::laplace::{DensityBackend, InverseDensity, InversionConfig, InversionMethod};
use subkern_core::montecarlo::{laplace_functional_reference, stable_inverse_cdf, PathConfig, SamplePool};
use subkern_core::nonlocal::{
    gaussian_comparison, regularized_kernel, subordinated_nonlocal_cesaro, ConvolutionKernelSpec, Lattice,
};
use subkern_core::specfun::{
    bessel_k, gamma_fn, m_wright, m_wright_tail_weight, mittag_leffler, stable_cdf, stable_density,
    upper_incomplete_gamma_zero,
};
use subkern_core::SubordinatorSpec;

use crate::args::*;
use crate::output::{fmt15, Csv};

/// Reports a bad flag combination the way clap reports parse errors (exit 2).
fn usage(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

fn required(value: Option<f64>, flag: &str, context: &str) -> f64 {
    value.unwrap_or_else(|| {
        usage(
            ErrorKind::MissingRequiredArgument,
            format!("{flag} is required for {context}"),
        )
    })
}

fn inversion_config(a: &InversionArgs) -> InversionConfig {
    let mut cfg = match a.method {
        InversionMethod::Talbot => InversionConfig::talbot(a.nodes.unwrap_or(32)),
        InversionMethod::GaverStehfest => InversionConfig::gaver_stehfest(a.nodes.unwrap_or(14)),
    };
    if let Some(r) = a.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(t) = a.abs_tol {
        cfg.abs_tol = t;
    }
    if let Err(e) = cfg.validate() {
        usage(
            ErrorKind::ValueValidation,
            format!("invalid --method/--nodes/--rel-tol/--abs-tol: {e}"),
        );
    }
    cfg
}

fn write_inversion(csv: &mut Csv, cfg: &InversionConfig) -> Result<()> {
    csv.meta("method", cfg.method)?;
    csv.meta("nodes", cfg.node_count)?;
    csv.meta("rel_tol", cfg.rel_tol)?;
    csv.meta("abs_tol", cfg.abs_tol)?;
    Ok(())
}

fn start(cli: &Cli, name: &str) -> Result<Csv> {
    let mut csv = Csv::open(cli.output.as_deref()).context("opening output")?;
    csv.comment(&format!("subkern {} {name}", env!("CARGO_PKG_VERSION")))?;
    let argv: Vec<String> = std::env::args().skip(1).collect();
    csv.meta("command", format!("subkern {}", argv.join(" ")))?;
    Ok(csv)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Specfun(a) => specfun(a),
        Command::Density(a) => density(cli, a),
        Command::Kernel(a) => kernel(cli, a),
        Command::Cesaro(a) => cesaro(cli, a),
        Command::Asymptotics(a) => asymptotics(cli, a),
        Command::Mc(a) => mc(cli, a),
        Command::Nonlocal(a) => nonlocal(cli, a),
        Command::VerifyAll(a) => verify_all(a),
    }
}

fn specfun(a: &SpecfunArgs) -> Result<()> {
    let theta = || required(a.theta, "--theta", "this --fn");
    let v = match a.function {
        SpecialFn::Ml => mittag_leffler(theta(), a.x)?,
        SpecialFn::Mwright => m_wright(theta(), a.x)?,
        SpecialFn::MwrightTail => m_wright_tail_weight(theta(), a.x)?,
        SpecialFn::BesselK => bessel_k(required(a.nu, "--nu", "--fn bessel-k"), a.x)?,
        SpecialFn::Gamma0 => upper_incomplete_gamma_zero(a.x)?,
        SpecialFn::StableDensity => stable_density(theta(), a.x)?,
        SpecialFn::StableCdf => stable_cdf(theta(), a.x)?,
    };
    println!("{}", fmt15(v));
    Ok(())
}

fn density(cli: &Cli, a: &DensityArgs) -> Result<()> {
    let cfg = inversion_config(&a.inversion);
    let g = match a.backend {
        Backend::Auto => InverseDensity::new(a.sub, cfg),
        Backend::Numeric => InverseDensity::numeric(a.sub, cfg),
        Backend::Analytic => InverseDensity::with_backend(a.sub, DensityBackend::AnalyticStable, cfg)
            .unwrap_or_else(|e| usage(ErrorKind::ValueValidation, format!("--backend analytic: {e}"))),
    };
    let ts = a.t.linear();
    let taus = a.tau_grid.linear();
    let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| taus.iter().map(move |&tau| (t, tau))).collect();
    let values = pairs
        .par_iter()
        .map(|&(t, tau)| g.density(t, tau))
        .collect::<subkern_core::Result<Vec<f64>>>()?;
    let mut csv = start(cli, "density")?;
    csv.meta("sub", a.sub)?;
    csv.meta("backend", format!("{:?}", g.backend))?;
    write_inversion(&mut csv, &cfg)?;
    csv.header(&["t", "tau", "G"])?;
    for (&(t, tau), &v) in pairs.iter().zip(&values) {
        csv.row(&[t, tau, v])?;
    }
    csv.finish()?;
    Ok(())
}

fn t_points(g: &GeometryArgs) -> Vec<f64> {
    g.t_grid
        .points(g.log)
        .unwrap_or_else(|e| usage(ErrorKind::ValueValidation, format!("--t-grid: {e}")))
}

fn write_geometry(csv: &mut Csv, g: &GeometryArgs, cfg: &KernelConfig) -> Result<()> {
    csv.meta("sub", g.sub)?;
    csv.meta("d", g.d)?;
    csv.meta("r", g.r)?;
    write_inversion(csv, &cfg.inversion)?;
    csv.meta("quad_abs_tol", cfg.quad.abs_tol)?;
    csv.meta("quad_rel_tol", cfg.quad.rel_tol)?;
    Ok(())
}

fn kernel_config(g: &GeometryArgs) -> KernelConfig {
    KernelConfig {
        inversion: inversion_config(&g.inversion),
        ..KernelConfig::default()
    }
}

fn write_curve(mut csv: Csv, ts: &[f64], values: &[f64]) -> Result<()> {
    csv.header(&["t", "value"])?;
    for (&t, &v) in ts.iter().zip(values) {
        csv.row(&[t, v])?;
    }
    csv.finish()?;
    Ok(())
}

fn kernel(cli: &Cli, a: &KernelArgs) -> Result<()> {
    let g = &a.geometry;
    let cfg = kernel_config(g);
    let ts = t_points(g);
    let values = match a.route {
        KernelRoute::Inversion => KernelCurve::compute(g.sub, g.d, g.r, CurveKind::VE, ts.clone(), &cfg)?.values,
        KernelRoute::Quadrature => ts
            .par_iter()
            .map(|&t| subordinated_kernel(g.sub, g.d, g.r, t, &cfg))
            .collect::<subkern_core::Result<Vec<f64>>>()?,
    };
    let mut csv = start(cli, "kernel")?;
    write_geometry(&mut csv, g, &cfg)?;
    csv.meta("route", format!("{:?}", a.route).to_lowercase())?;
    write_curve(csv, &ts, &values)
}

fn cesaro(cli: &Cli, a: &CesaroArgs) -> Result<()> {
    let g = &a.geometry;
    let cfg = kernel_config(g);
    let ts = t_points(g);
    let values = match a.route {
        CesaroRoute::TimeAverage => {
            KernelCurve::compute(g.sub, g.d, g.r, CurveKind::CesaroMean, ts.clone(), &cfg)?.values
        }
        CesaroRoute::Transform => ts
            .par_iter()
            .map(|&t| cesaro_via_transform(g.sub, g.d, g.r, t, &cfg.inversion))
            .collect::<subkern_core::Result<Vec<f64>>>()?,
    };
    let mut csv = start(cli, "cesaro")?;
    write_geometry(&mut csv, g, &cfg)?;
    csv.meta("route", format!("{:?}", a.route).to_lowercase())?;
    write_curve(csv, &ts, &values)
}

fn asymptotics(cli: &Cli, a: &AsymptoticsArgs) -> Result<()> {
    let (params, spec) = match a.class {
        ClassArg::C1 => {
            let theta = required(a.theta, "--theta", "--class c1");
            (ClassParams::C1 { theta }, SubordinatorSpec::class_c1(theta))
        }
        ClassArg::C2 => {
            let mu0 = required(a.mu0, "--mu0", "--class c2");
            (ClassParams::C2 { mu0 }, SubordinatorSpec::class_c2(mu0))
        }
        ClassArg::C3 => {
            let s = required(a.s, "--s", "--class c3");
            let c = required(a.c, "--c", "--class c3");
            (ClassParams::C3 { s, c }, SubordinatorSpec::class_c3(s, c))
        }
    };
    let spec = spec.unwrap_or_else(|e| usage(ErrorKind::ValueValidation, format!("class parameters: {e}")));
    let cfg = KernelConfig::default();
    let v = verify(a.d, params, spec, a.r, (a.window.0, a.window.1), &cfg)?;
    let form = predict(a.d, params);
    let mut csv = start(cli, "asymptotics")?;
    csv.meta("sub", spec)?;
    csv.meta("d", a.d)?;
    csv.meta("r", a.r)?;
    csv.meta("window", format!("{}:{}", a.window.0, a.window.1))?;
    write_inversion(&mut csv, &cfg.inversion)?;
    csv.meta("predicted_power_t", form.power_t)?;
    csv.meta("predicted_power_log", form.power_log)?;
    if let Some(p) = form.spatial_exponent {
        csv.meta("predicted_spatial_exponent", p)?;
    }
    csv.meta("tolerance_power_t", v.tolerance.power_t)?;
    csv.meta("tolerance_power_log", v.tolerance.power_log)?;
    csv.meta("residual", v.fitted.residual)?;
    csv.comment("predicted_shape is scaled to M at the first grid point")?;
    let c = &v.curve;
    let scale = c.values[0] / form.shape(a.r, c.t_grid[0]);
    csv.header(&["t", "M", "predicted_shape"])?;
    for (&t, &m) in c.t_grid.iter().zip(&c.values) {
        csv.row(&[t, m, scale * form.shape(a.r, t)])?;
    }
    csv.blank()?;
    csv.comment("summary")?;
    csv.header(&["fitted_power_t", "fitted_power_log", "pass"])?;
    csv.raw(&format!(
        "{},{},{}",
        fmt15(v.fitted.power_t),
        fmt15(v.fitted.power_log),
        if v.pass { "pass" } else { "fail" }
    ))?;
    csv.finish()?;
    Ok(())
}

fn mc(cli: &Cli, a: &McArgs) -> Result<()> {
    if !matches!(a.sub, SubordinatorSpec::Stable { .. } | SubordinatorSpec::Gamma { .. }) {
        usage(
            ErrorKind::ValueValidation,
            format!("--sub {}: paths are sampled for stable and gamma only", a.sub),
        );
    }
    let pool = SamplePool::draw(a.sub, a.t, a.n, a.seed, &PathConfig::default())?;
    let mut csv = start(cli, "mc")?;
    csv.meta("sub", a.sub)?;
    csv.meta("t", a.t)?;
    csv.meta("n", a.n)?;
    csv.meta("seed", a.seed)?;
    if !a.summary {
        csv.header(&["draw_index", "value"])?;
        for (i, &v) in pool.values.iter().enumerate() {
            csv.row(&[i as f64, v])?;
        }
        csv.finish()?;
        return Ok(());
    }
    let inv = InversionConfig::default();
    let cell = |x: Option<f64>| x.map(fmt15).unwrap_or_default();
    csv.header(&["statistic", "value", "std_error", "reference"])?;
    let (m, se) = pool.mean();
    let mean_ref = match a.sub {
        SubordinatorSpec::Stable { theta } => Some(a.t.powf(theta) / gamma_fn(1.0 + theta)),
        _ => None,
    };
    csv.raw(&format!("mean,{},{},{}", fmt15(m), fmt15(se), cell(mean_ref)))?;
    for lambda in a.lambda.linear() {
        let (m, se) = pool.laplace_functional(lambda);
        let reference = laplace_functional_reference(a.sub, a.t, lambda, &inv)?;
        csv.raw(&format!(
            "laplace:{lambda},{},{},{}",
            fmt15(m),
            fmt15(se),
            fmt15(reference)
        ))?;
    }
    if let SubordinatorSpec::Stable { theta } = a.sub {
        let ks = pool.ks_distance(|tau| stable_inverse_cdf(theta, a.t, tau))?;
        csv.raw(&format!("ks,{},,", fmt15(ks)))?;
    }
    csv.finish()?;
    Ok(())
}

fn nonlocal(cli: &Cli, a: &NonlocalArgs) -> Result<()> {
    let kernel = match a.profile {
        ProfileArg::Gaussian => ConvolutionKernelSpec::gaussian(a.variance),
        ProfileArg::Uniform => ConvolutionKernelSpec::uniform(a.radius),
    }
    .unwrap_or_else(|e| usage(ErrorKind::ValueValidation, format!("--variance/--radius: {e}")));
    let lattice =
        Lattice::new(a.d, a.n, a.h).unwrap_or_else(|e| usage(ErrorKind::ValueValidation, format!("--d/--n/--h: {e}")));
    let ts = a.t.linear();
    let mut csv = start(cli, "nonlocal")?;
    csv.meta("profile", format!("{:?}", kernel.profile))?;
    csv.meta("lattice", format!("d={} n={} h={}", a.d, a.n, a.h))?;
    if let Some(sub) = a.sub {
        let curve = subordinated_nonlocal_cesaro(&kernel, lattice, sub, a.r, ts.clone(), &KernelConfig::default())?;
        csv.meta("sub", sub)?;
        csv.meta("r", a.r)?;
        csv.header(&["t", "M"])?;
        for (&t, &m) in curve.t_grid.iter().zip(&curve.values) {
            csv.row(&[t, m])?;
        }
        csv.finish()?;
        return Ok(());
    }
    for &t in &ts {
        let v = regularized_kernel(&kernel, lattice, t, None)?;
        let x_max = a.x_max_factor * t.sqrt();
        csv.comment(&format!("t = {}", fmt15(t)))?;
        let mut rows: Vec<([f64; 2], f64)> = (0..lattice.len())
            .filter(|&i| lattice.radius(i) <= x_max + 1e-12)
            .map(|i| (lattice.point(i), v.field.values[i]))
            .collect();
        rows.sort_by(|p, q| p.0[0].total_cmp(&q.0[0]).then(p.0[1].total_cmp(&q.0[1])));
        if a.d == 1 {
            csv.header(&["x", "v"])?;
            for (p, val) in rows {
                csv.row(&[p[0], val])?;
            }
        } else {
            csv.header(&["x", "y", "v"])?;
            for (p, val) in rows {
                csv.row(&[p[0], p[1], val])?;
            }
        }
        csv.blank()?;
    }
    csv.comment("summary")?;
    csv.header(&["t", "sup_rel_error", "band"])?;
    for &t in &ts {
        if t < 10.0 {
            csv.comment(&format!("t = {t}: no Gaussian comparison below t = 10"))?;
            continue;
        }
        let c = gaussian_comparison(&kernel, lattice, t, a.x_max_factor)?;
        csv.row(&[t, c.sup_rel_error, c.band])?;
    }
    csv.finish()?;
    Ok(())
}

fn verify_all(a: &VerifyAllArgs) -> Result<()> {
    let ids = a.criteria.clone().unwrap_or_else(|| acceptance::CRITERIA.to_vec());
    let mut failed = Vec::new();
    for id in ids {
        let o = acceptance::run(id).unwrap_or_else(|e| usage(ErrorKind::ValueValidation, format!("--criteria: {e}")));
        println!("{o}");
        for d in &o.diagnostics {
            println!("      {d}");
        }
        if !o.pass {
            failed.push(id.to_string());
        }
    }
    if failed.is_empty() {
        println!("all criteria passed");
        Ok(())
    } else {
        bail!("failed criteria: {}", failed.join(", "))
    }
}
