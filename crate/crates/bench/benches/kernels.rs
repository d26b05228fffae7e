//! Benchmarks for the hot kernels: the eigensolver, the PPT measurement
//! SDP, the NE seesaw and LOCC protocol evaluation.
//!
//! Run with `cargo bench -p discrim-bench`. Under `cargo test` criterion
//! executes each benchmark once as a smoke test.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use discrim_core::channels::{werner_holevo, weyl_flagged};
use discrim_core::haar::HaarSampler;
use discrim_core::linalg::{hermitian_eig, maximally_entangled, outer, BipartiteShape, Matrix};
use discrim_core::locc::{flagged_protocol, DiscriminationInstance};
use discrim_core::norms::ne_norm;
use discrim_core::sdp::ppt_measurement_value;

fn random_hermitian(n: usize, seed: u64) -> Matrix {
    let mut sampler = HaarSampler::new(seed, n);
    let g = sampler.ginibre(n, n);
    (&g + &g.dagger()).scale(0.5)
}

fn bench_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("hermitian_eig");
    for n in [16, 64] {
        let h = random_hermitian(n, 42);
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| hermitian_eig(h).unwrap())
        });
    }
    group.finish();
}

fn bench_ppt_sdp(c: &mut Criterion) {
    let pair = werner_holevo(3).unwrap();
    let psi = maximally_entangled(3);
    let xhat = pair.diff_apply_extended(&outer(&psi), 3).unwrap();
    let shape = BipartiteShape::new(3, 3);
    c.bench_function("ppt_measurement_value/wh3", |b| {
        b.iter(|| ppt_measurement_value(&xhat, shape).unwrap())
    });
}

fn bench_ne_seesaw(c: &mut Criterion) {
    let pair = werner_holevo(3).unwrap();
    c.bench_function("ne_norm/wh3_4restarts", |b| {
        b.iter(|| ne_norm(&pair, 4, 7).unwrap())
    });
}

fn bench_protocol(c: &mut Criterion) {
    let pair = weyl_flagged(3).unwrap();
    let instance = DiscriminationInstance::maximally_entangled(pair.clone()).unwrap();
    let tree = flagged_protocol(&pair, &instance.input, instance.dim_z).unwrap();
    c.bench_function("protocol_evaluate/weyl3", |b| {
        b.iter(|| instance.success_probability(&tree).unwrap())
    });
}

criterion_group!(benches, bench_eig, bench_ppt_sdp, bench_ne_seesaw, bench_protocol);
criterion_main!(benches);
