//! Single-thread pool against the default rayon pool on the data-parallel
//! kernels. Built without the `parallel` feature both variants run the
//! sequential fallback.

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPool;

use conereg::cone::{dtn_perturbed, ConeConfig, MetricPerturbation, Potential, PotentialProfile};
use conereg::exponents::PotentialExponent;
use conereg::links::{link_spectrum, LinkModel};
use conereg::morrey::{ball_energies, cone_graph, geometric_radii};

fn pools() -> Vec<(&'static str, ThreadPool)> {
    let seq = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let par = rayon::ThreadPoolBuilder::new().build().unwrap();
    vec![("1-thread", seq), ("default", par)]
}

fn dtn(c: &mut Criterion) {
    let mut cfg = ConeConfig::new(LinkModel::circle(4.0 * PI), 2, 1.0);
    cfg.radial_nodes = 2000;
    cfg.modes = 32;
    cfg.perturbation = Some(MetricPerturbation::conformal(0.2, 0.5));
    cfg.potential = Some(Potential {
        profile: PotentialProfile::Lorentzian { amplitude: -1.0, scale: 0.3 },
        p: PotentialExponent::Infinite,
    });
    let grid = cfg.build().unwrap();
    let mut group = c.benchmark_group("dtn_perturbed");
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(dtn_perturbed(&grid).unwrap())))
        });
    }
    group.finish();
}

fn ball_energy(c: &mut Criterion) {
    let cg = cone_graph(2, 0.005, 1.0).unwrap();
    let f = cg.sample(|r, t| r.sqrt() * (t / 2.0).cos());
    let radii = geometric_radii(0.05, 0.25, 10);
    let centers: Vec<usize> = std::iter::once(cg.apex).chain((1..16).map(|k| k * 997)).collect();
    let mut group = c.benchmark_group("ball_energies");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| pool.install(|| black_box(ball_energies(&f, &cg.graph, &radii, &centers).unwrap())))
        });
    }
    group.finish();
}

fn spectra(c: &mut Criterion) {
    let links: Vec<(LinkModel, usize)> = (1..=3).map(|k| (LinkModel::suspension(LinkModel::circle(4.0 * PI), k), 2 + k)).collect();
    let mut group = c.benchmark_group("suspension_spectra");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                pool.install(|| {
                    for (link, n) in &links {
                        black_box(link_spectrum(link, *n, 16).unwrap());
                    }
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, dtn, ball_energy, spectra);
criterion_main!(benches);
