use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use ddgate::filter::{filter_table, SequenceSpec};
use ddgate::gate::{hybrid_candidates, synth_options};
use ddgate::resonance::sweep;
use ddgate::sequence::Protocol;
use ddgate::spin::{khz_to_rad, FieldConfig, HyperfineParams};
use ddgate::Exec;

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn bench_sweep(c: &mut Criterion) {
    let p = HyperfineParams::from_khz("c", 30.6, 25.7).unwrap();
    let f = FieldConfig::from_khz(314.0).unwrap();
    let mut g = c.benchmark_group("axis_sweep_udd4_20k");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                sweep(
                    &p,
                    &f,
                    Protocol::Udd(4),
                    black_box(1),
                    (1e-6, 40e-6),
                    20_000,
                    exec,
                )
                .unwrap()
            })
        });
    }
    g.finish();
}

fn bench_filter(c: &mut Criterion) {
    let omegas: Vec<f64> = (0..50_000).map(|i| khz_to_rad(0.02 * i as f64)).collect();
    let seqs = [
        (SequenceSpec::Cpmg { n: 9 }, 90.2e-6),
        (SequenceSpec::Udd { order: 4, n: 33 }, 110.4e-6),
    ];
    let mut g = c.benchmark_group("filter_grid_50k");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| filter_table(black_box(&seqs), &omegas, exec).unwrap())
        });
    }
    g.finish();
}

fn bench_hybrid_search(c: &mut Criterion) {
    let p = HyperfineParams::from_khz("c", 170.0, 70.0).unwrap();
    let f = FieldConfig::from_khz(2000.0).unwrap();
    let mut g = c.benchmark_group("hybrid_search_udd4");
    g.sample_size(20);
    for (name, exec) in MODES {
        let opts = synth_options(exec);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| hybrid_candidates(&p, &f, 4, black_box(FRAC_PI_2), &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, bench_sweep, bench_filter, bench_hybrid_search);
criterion_main!(benches);
