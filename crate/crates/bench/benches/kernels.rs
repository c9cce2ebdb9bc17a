use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use nqs_core::ansatz::{couplings_to_rbm, Ansatz, Spin1Rbm, UnaryRbm, Variational, DEFAULT_SOFTENING};
use nqs_core::exact::{aklt_nqs_xyz, SectorHamiltonian};
use nqs_core::model::{build_afh, build_aklt};
use nqs_core::vmc::{
    exact_batch, local_energy_cached, metropolis_sample_variational, sr_step, SamplerConfig, SrConfig,
};
use nqs_core::{Basis, SectorSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_params<A: Variational>(mut a: A, seed: u64) -> A {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p: Vec<Complex64> =
        (0..a.n_params()).map(|_| Complex64::new(rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))).collect();
    a.set_params(&p);
    a
}

fn amplitudes(c: &mut Criterion) {
    let n = 12;
    let rbm = random_params(Spin1Rbm::zeros(n, 12), 1);
    let unary = random_params(UnaryRbm::zeros(n, 12), 2);
    let sites: Vec<u8> = (0..n).map(|j| (j % 3) as u8).collect();
    let cache = rbm.cache(&sites);
    let ucache = unary.cache(&sites);
    let pair = [(0, 2u8), (5, 0u8)];
    c.bench_function("spin1 log_psi N=12 M=12", |b| b.iter(|| rbm.log_psi(black_box(&sites))));
    c.bench_function("spin1 ratio N=12 M=12", |b| b.iter(|| rbm.log_psi_ratio(&cache, &sites, black_box(&pair))));
    c.bench_function("unary ratio N=12 M=12", |b| b.iter(|| unary.log_psi_ratio(&ucache, &sites, black_box(&pair))));
    let mut d = vec![Complex64::new(0.0, 0.0); rbm.n_params()];
    c.bench_function("spin1 log derivatives N=12 M=12", |b| {
        b.iter(|| Variational::log_derivatives(&rbm, &sites, &cache, &mut d))
    });
}

fn local_energy(c: &mut Criterion) {
    let n = 12;
    let h = build_aklt(n, Basis::Xyz).unwrap();
    let (rbm, _) = couplings_to_rbm(&aklt_nqs_xyz(n).unwrap(), DEFAULT_SOFTENING);
    let sites = vec![0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2];
    let cache = rbm.cache(&sites);
    c.bench_function("local energy AKLT N=12 xyz", |b| {
        b.iter(|| local_energy_cached(&rbm, &h, black_box(&sites), &cache))
    });
}

fn sampling(c: &mut Criterion) {
    let n = 12;
    let h = build_afh(n, 1.0, true, Basis::Sz).unwrap();
    let rbm = random_params(Spin1Rbm::zeros(n, 6), 3);
    let cfg = SamplerConfig { n_samp: 1000, n_chains: 1, ..SamplerConfig::for_sites(n) };
    let mut group = c.benchmark_group("sampling");
    group.sample_size(10);
    group.bench_function("1000 samples with derivatives N=12 M=6", |b| {
        b.iter(|| metropolis_sample_variational(&rbm, SectorSpec::TotalSz(0), &h, &cfg).unwrap())
    });
    group.finish();
}

fn sector_matvec(c: &mut Criterion) {
    let h = build_aklt(10, Basis::Sz).unwrap();
    let sh = SectorHamiltonian::new(&h, SectorSpec::TotalSz(0)).unwrap();
    let x = vec![Complex64::new(1.0, 0.0); sh.dim()];
    let mut y = vec![Complex64::new(0.0, 0.0); sh.dim()];
    c.bench_function("sector matvec AKLT N=10 Sz", |b| b.iter(|| sh.apply(black_box(&x), &mut y)));
}

fn sr(c: &mut Criterion) {
    let n = 6;
    let h = build_afh(n, 1.0, true, Basis::Sz).unwrap();
    let rbm = random_params(Spin1Rbm::zeros(n, 12), 4);
    let batch = exact_batch(&rbm, SectorSpec::TotalSz(0), &h).unwrap();
    let cfg = SrConfig::default();
    c.bench_function("SR step exact batch N=6 M=12", |b| b.iter(|| sr_step(black_box(&batch), &cfg).unwrap()));
}

criterion_group!(benches, amplitudes, local_energy, sampling, sector_matvec, sr);
criterion_main!(benches);
