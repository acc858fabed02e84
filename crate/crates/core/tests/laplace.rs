use num_complex::Complex64;
use subkern_core::laplace::{double_laplace_check, invert, DensityBackend, InverseDensity, InversionConfig};
use subkern_core::quad::{integrate_breaks, log_panels, QuadConfig};
use subkern_core::SubordinatorSpec;

fn families() -> Vec<SubordinatorSpec> {
    vec![
        SubordinatorSpec::stable(0.5).unwrap(),
        SubordinatorSpec::gamma(1.0, 1.0).unwrap(),
        SubordinatorSpec::class_c1(0.7).unwrap(),
        SubordinatorSpec::class_c2(1.0).unwrap(),
        SubordinatorSpec::class_c3(0.5, 1.0).unwrap(),
    ]
}

#[test]
fn stable_backends_agree() {
    let cfg = InversionConfig::default();
    for theta in [0.3, 0.5, 0.7] {
        let spec = SubordinatorSpec::stable(theta).unwrap();
        let analytic = InverseDensity::with_backend(spec, DensityBackend::AnalyticStable, cfg).unwrap();
        let numeric = InverseDensity::numeric(spec, cfg);
        for t in [0.5, 1.0, 2.0] {
            for tau in [0.1, 0.5, 1.0, 2.0] {
                let a = analytic.density(t, tau).unwrap();
                let n = numeric.density(t, tau).unwrap();
                assert!((a - n).abs() < 1e-8, "theta={theta} t={t} tau={tau}: {a} vs {n}");
            }
        }
    }
}

#[test]
fn every_family_is_a_tau_density() {
    let cfg = InversionConfig::default();
    for spec in families() {
        let g = InverseDensity::numeric(spec, cfg);
        for t in [1.0, 10.0, 100.0] {
            let n = g.normalization(t).unwrap();
            assert!((n.mass - 1.0).abs() < 1e-5, "{spec} t={t}: {n:?}");
        }
    }
}

#[test]
fn analytic_backend_is_normalized() {
    let g = InverseDensity::new(SubordinatorSpec::stable(0.3).unwrap(), InversionConfig::default());
    assert_eq!(g.backend, DensityBackend::AnalyticStable);
    let n = g.normalization(10.0).unwrap();
    assert!((n.mass - 1.0).abs() < 1e-8);
    assert_eq!(n.clamped_mass, 0.0);
}

#[test]
fn double_laplace_identity_on_grid() {
    let specs = [
        SubordinatorSpec::stable(0.5).unwrap(),
        SubordinatorSpec::stable(0.3).unwrap(),
        SubordinatorSpec::gamma(1.0, 1.0).unwrap(),
        SubordinatorSpec::class_c2(1.0).unwrap(),
        SubordinatorSpec::class_c3(0.5, 2.0).unwrap(),
    ];
    for spec in specs {
        for p in [0.5, 1.0, 2.0] {
            for lambda in [0.1, 0.4, 0.8] {
                let (n, a) = double_laplace_check(spec, p, lambda).unwrap();
                assert!((n - a).abs() < 1e-10, "{spec} p={p} lambda={lambda}");
            }
        }
    }
}

#[test]
fn forward_transform_of_density_in_t() {
    // ∫_0^∞ e^{-λt} G_t(τ) dt = 𝒦(λ) e^{-τΦ(λ)}
    let cfg = InversionConfig::default();
    for spec in [
        SubordinatorSpec::stable(0.6).unwrap(),
        SubordinatorSpec::gamma(1.0, 2.0).unwrap(),
    ] {
        let g = InverseDensity::numeric(spec, cfg);
        for (lambda, tau) in [(1.0, 0.5), (0.5, 1.0), (2.0, 0.2)] {
            let f = |t: f64| (-lambda * t).exp() * g.density(t, tau).unwrap();
            let mut edges = vec![0.0];
            edges.extend(log_panels(1e-6, 60.0 / lambda, 4));
            let got = integrate_breaks(f, &edges, QuadConfig::new(1e-10, 1e-9)).unwrap().value;
            let want = spec.kernel_laplace(lambda).unwrap() * (-tau * spec.laplace_exponent(lambda).unwrap()).exp();
            assert!(
                (got - want).abs() < 1e-5,
                "{spec} lambda={lambda} tau={tau}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn methods_agree_on_gamma_density() {
    let spec = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
    let f = |l: Complex64| spec.symbol(l) * (-0.7 * spec.exponent(l)).exp();
    let talbot = invert(f, 1.5, &InversionConfig::default()).unwrap();
    let gs = invert(f, 1.5, &InversionConfig::gaver_stehfest(14)).unwrap();
    assert!((talbot - gs).abs() < 1e-4 * talbot.abs(), "{talbot} vs {gs}");
}
