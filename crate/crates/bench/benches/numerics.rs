use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use subkern_core::kernel::{subordinated_kernel, subordinated_kernel_inverted, KernelConfig};
use subkern_core::laplace::{InverseDensity, InversionConfig};
use subkern_core::montecarlo::{PathConfig, SamplePool};
use subkern_core::nonlocal::{regularized_kernel, ConvolutionKernelSpec, Lattice};
use subkern_core::specfun::{bessel_k, m_wright, mittag_leffler};
use subkern_core::SubordinatorSpec;

fn specfun(c: &mut Criterion) {
    let mut g = c.benchmark_group("specfun");
    g.bench_function("mittag_leffler 0.5 x=3", |b| {
        b.iter(|| mittag_leffler(0.5, black_box(3.0)))
    });
    g.bench_function("m_wright 0.7 z=1.2", |b| b.iter(|| m_wright(0.7, black_box(1.2))));
    g.bench_function("bessel_k 1.5 z=0.3", |b| b.iter(|| bessel_k(1.5, black_box(0.3))));
    g.finish();
}

fn density(c: &mut Criterion) {
    let cfg = InversionConfig::default();
    let mut g = c.benchmark_group("inverse_density");
    for spec in [
        SubordinatorSpec::gamma(1.0, 1.0).unwrap(),
        SubordinatorSpec::class_c2(1.0).unwrap(),
    ] {
        let d = InverseDensity::numeric(spec, cfg);
        g.bench_function(format!("{spec} t=10 tau=1"), |b| {
            b.iter(|| d.density(10.0, black_box(1.0)))
        });
    }
    g.finish();
}

fn kernel(c: &mut Criterion) {
    let cfg = KernelConfig::default();
    let spec = SubordinatorSpec::class_c1(0.5).unwrap();
    let mut g = c.benchmark_group("subordinated_kernel");
    g.bench_function("quadrature d=3 t=10", |b| {
        b.iter(|| subordinated_kernel(spec, 3, 1.0, black_box(10.0), &cfg))
    });
    g.bench_function("inversion d=3 t=1e4", |b| {
        b.iter(|| subordinated_kernel_inverted(spec, 3, 1.0, black_box(1e4), &cfg.inversion))
    });
    g.finish();
}

fn sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("montecarlo");
    g.sample_size(10);
    for spec in [
        SubordinatorSpec::stable(0.5).unwrap(),
        SubordinatorSpec::gamma(1.0, 1.0).unwrap(),
    ] {
        g.bench_function(format!("{spec} 1e4 draws"), |b| {
            b.iter(|| SamplePool::draw(spec, 1.0, 10_000, black_box(3), &PathConfig::default()))
        });
    }
    g.finish();
}

fn lattice(c: &mut Criterion) {
    let kernel = ConvolutionKernelSpec::gaussian(1.0).unwrap();
    let lat = Lattice::new(1, 1 << 14, 0.025).unwrap();
    let mut g = c.benchmark_group("nonlocal");
    g.sample_size(10);
    g.bench_function("regularized_kernel 2^14 t=100", |b| {
        b.iter(|| regularized_kernel(&kernel, lat, black_box(100.0), None))
    });
    g.finish();
}

criterion_group!(benches, specfun, density, kernel, sampling, lattice);
criterion_main!(benches);
