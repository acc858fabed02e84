use subkern_core::kernel::{heat_kernel, subordinated_kernel, KernelConfig};
use subkern_core::laplace::InversionConfig;
use subkern_core::montecarlo::*;
use subkern_core::SubordinatorSpec;

const N: usize = 100_000;

fn stable_pool() -> SamplePool {
    SamplePool::draw(
        SubordinatorSpec::stable(0.5).unwrap(),
        1.0,
        N,
        2024,
        &PathConfig::default(),
    )
    .unwrap()
}

#[test]
fn stable_inverse_mean_and_laplace_functional() {
    let pool = stable_pool();
    // E E(t) = t^θ/Γ(1+θ) = 2/√π at θ = 1/2, t = 1.
    let (m, se) = pool.mean();
    assert!((m - 2.0 / std::f64::consts::PI.sqrt()).abs() < 4.0 * se, "{m} ± {se}");
    for lambda in [0.5, 1.0, 2.0] {
        let (m, se) = pool.laplace_functional(lambda);
        let want = stable_inverse_laplace(0.5, 1.0, lambda).unwrap();
        assert!((m - want).abs() < 4.0 * se, "lambda={lambda}: {m} vs {want} ± {se}");
    }
    let (m, _) = pool.laplace_functional(1.0);
    assert!((m - 0.42758).abs() < 0.01);
}

#[test]
fn stable_inverse_law_matches_m_wright_cdf() {
    // ∫_0^τ M_{1/2}(u) du = erf(τ/2).
    let pool = stable_pool();
    let ks = pool.ks_distance(|x| Ok(statrs::function::erf::erf(x / 2.0))).unwrap();
    assert!(ks < 0.01, "{ks}");
    let mut v = pool.values.clone();
    v.sort_by(f64::total_cmp);
    for q in [0.1, 0.5, 0.9] {
        let x = v[(q * N as f64) as usize];
        let c = stable_inverse_cdf(0.5, 1.0, x).unwrap();
        assert!((c - q).abs() < 0.01, "q={q}: {c}");
    }
}

#[test]
fn stable_subordinator_is_levy_at_one_half() {
    let mut rng = RngStream::new(9, 0).rng();
    let draws: Vec<f64> = (0..N).map(|_| sample_stable_subordinator(0.5, 1.0, &mut rng)).collect();
    // E e^{-λS} = e^{-√λ} is the Lévy law with CDF erfc(1/(2√x)).
    let ks = ks_distance(&draws, |x| Ok(statrs::function::erf::erfc(0.5 / x.sqrt()))).unwrap();
    assert!(ks < 0.006, "{ks}");
}

#[test]
fn gamma_inverse_matches_inverted_density() {
    let spec = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
    let pool = SamplePool::draw(spec, 1.0, N, 77, &PathConfig::default()).unwrap();
    let cfg = InversionConfig::default();
    for lambda in [0.5, 1.0, 2.0] {
        let (m, se) = pool.laplace_functional(lambda);
        let want = laplace_functional_reference(spec, 1.0, lambda, &cfg).unwrap();
        assert!((m - want).abs() < 4.0 * se, "lambda={lambda}: {m} vs {want} ± {se}");
    }
    let mut v = pool.values.clone();
    v.sort_by(f64::total_cmp);
    let idx: Vec<usize> = (1..100).map(|i| i * N / 100).collect();
    let taus: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
    let cdf = inverse_cdf_reference(spec, 1.0, &taus, &cfg).unwrap();
    let worst = idx
        .iter()
        .zip(&cdf)
        .map(|(&i, c)| (c - i as f64 / N as f64).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn kde_matches_subordinated_kernel() {
    let spec = SubordinatorSpec::stable(0.5).unwrap();
    let radii = [0.0, 0.5, 1.0];
    let est = empirical_subordinated_kernel(spec, 1, 1.0, N, &radii, 6, &KdeConfig::default()).unwrap();
    let cfg = KernelConfig::default();
    for (i, &r) in radii.iter().enumerate() {
        let want = subordinated_kernel(spec, 1, r, 1.0, &cfg).unwrap();
        assert!(
            (est.values[i] - want).abs() < 3.0 * est.std_errors[i],
            "r={r}: {} vs {want}",
            est.values[i]
        );
    }
    let est = empirical_subordinated_kernel(spec, 3, 1.0, N, &[1.0], 6, &KdeConfig::default()).unwrap();
    let want = subordinated_kernel(spec, 3, 1.0, 1.0, &cfg).unwrap();
    assert!((est.values[0] - want).abs() < 3.0 * est.std_errors[0]);
}

#[test]
fn near_unit_index_recovers_heat_kernel() {
    let spec = SubordinatorSpec::stable(0.999).unwrap();
    let est = empirical_subordinated_kernel(spec, 1, 2.0, N, &[1.0], 6, &KdeConfig::default()).unwrap();
    let want = heat_kernel(1, 1.0, 2.0).unwrap();
    assert!(
        (est.values[0] - want).abs() < 3.0 * est.std_errors[0],
        "{} vs {want}",
        est.values[0]
    );
}

#[test]
fn radial_kde_masses() {
    let mut rng = RngStream::new(4, 0).rng();
    let spec = SubordinatorSpec::gamma(1.0, 1.0).unwrap();
    let r: Vec<f64> = (0..2000)
        .map(|_| sample_inverse(&spec, 1.0, &mut rng, &PathConfig::default()).unwrap())
        .collect();
    let refl = RadialKde::silverman(1, r.clone(), 1.0, Boundary::Reflection).unwrap();
    assert_eq!(refl.mass().unwrap(), 1.0);
    let ll = RadialKde::silverman(1, r, 1.0, Boundary::LocalLinear).unwrap();
    assert!((ll.mass().unwrap() - 1.0).abs() < 0.02);
}
