use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use pcp_core::montecarlo::{draw_realization, trial_rng};
use pcp_core::protocol::{build_schedule, run_oac_phase, run_sync_phase};
use pcp_core::theory::rmse_theory;
use pcp_core::{run_trials, MobilityModel, ParameterVector, SystemConfig, TrialPlan};

fn config(num_nodes: usize) -> SystemConfig {
    SystemConfig {
        num_nodes,
        cfo_var: 1000.0,
        mobility: MobilityModel::RayleighSpeed { mean_speed: 1.5 },
        ..SystemConfig::baseline()
    }
}

fn handshake(c: &mut Criterion) {
    let mut group = c.benchmark_group("handshake");
    for k in [5, 20] {
        let cfg = config(k);
        let schedule = build_schedule(&cfg).unwrap();
        let params = vec![ParameterVector::ones(cfg.num_oac_symbols); k];
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            let mut trial = 0;
            b.iter(|| {
                let mut rng = trial_rng(1, trial);
                trial += 1;
                let nodes = draw_realization(&cfg, &mut rng);
                let est = run_sync_phase(&cfg, &nodes, &schedule, &mut rng).unwrap();
                black_box(run_oac_phase(&cfg, &nodes, &schedule, &est, &params, &mut rng, false).unwrap())
            })
        });
    }
    group.finish();
}

fn trials(c: &mut Criterion) {
    let cfg = config(20);
    let plan = TrialPlan { symbols_of_interest: vec![0, 20, 80], ..TrialPlan::for_config(&cfg, 2_000, 7) };
    c.bench_function("run_trials K=20 n=2000", |b| b.iter(|| black_box(run_trials(&cfg, &plan).unwrap())));
}

fn theory(c: &mut Criterion) {
    let cfg = config(20);
    c.bench_function("rmse_theory grid 20x100", |b| {
        b.iter(|| {
            let mut acc = 0.0;
            for k in 1..=20 {
                for m in 0..100 {
                    acc += rmse_theory(k, m, &cfg).sigma;
                }
            }
            black_box(acc)
        })
    });
}

criterion_group!(benches, handshake, trials, theory);
criterion_main!(benches);
