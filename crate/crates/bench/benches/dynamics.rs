use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use dimerflow::dynamics::{coupled_step, run, ChainState, DynamicsKind};
use dimerflow::exact::{exact_sample, kasteleyn_count};
use dimerflow::lattice::{build_lattice, carve_free};
use dimerflow::{LatticeKind, Region};
use dimerflow_bench::coupled_fixture;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

/// 1000 coupled updates of the extremal pair, per dynamics and lattice.
fn coupled_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("coupled_steps_x1000");
    for lattice in LatticeKind::ALL {
        for kind in DynamicsKind::ALL {
            let (d, cs) = coupled_fixture(lattice, 16, 1);
            group.bench_with_input(BenchmarkId::new(kind.to_string(), lattice), &kind, |b, &kind| {
                b.iter_batched(
                    || cs.clone(),
                    |mut cs| {
                        for _ in 0..1000 {
                            coupled_step(&mut cs, kind, &d);
                        }
                        cs
                    },
                    BatchSize::SmallInput,
                )
            });
        }
    }
    group.finish();
}

/// A single chain run to time 100 from an exact sample.
fn single_chain(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_to_time_100");
    let d = carve_free(&build_lattice(LatticeKind::Hexagon), &Region::Disk, 16).unwrap();
    let m = exact_sample(&d, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    for kind in DynamicsKind::ALL {
        let start = ChainState::new(m.clone(), &d, 5).unwrap();
        group.bench_function(kind.to_string(), |b| {
            b.iter_batched(
                || start.clone(),
                |s| run(s, kind, 100.0, &d, None).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn exact_oracles(c: &mut Criterion) {
    let mut group = c.benchmark_group("kasteleyn");
    for l in [8u32, 16] {
        let d = carve_free(&build_lattice(LatticeKind::Square), &Region::Square, l).unwrap();
        group.bench_with_input(BenchmarkId::new("count", l), &d, |b, d| b.iter(|| kasteleyn_count(black_box(d)).unwrap()));
    }
    let d = carve_free(&build_lattice(LatticeKind::SquareHexagon), &Region::Disk, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    group.bench_function("sample/squarehexagon_disk_8", |b| b.iter(|| exact_sample(&d, &mut rng).unwrap()));
    group.finish();
}

criterion_group!(benches, coupled_steps, single_chain, exact_oracles);
criterion_main!(benches);
