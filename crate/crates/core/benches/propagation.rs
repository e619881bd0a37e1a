use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinecho::engine::EngineConfig;
use spinecho::par::Exec;
use spinecho::processing::{transform, TransformParams};
use spinecho::sequences::{
    build_diagonal_free_cosy, run_experiment, tau_for, AcquisitionParams, ExperimentPlan, RunOptions,
};
use spinecho::spinsys::{enumerate_isotopomers, parse_spin_system, Isotopomer};

const EXECS: [(&str, Exec); 2] = [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)];

fn fixture(name: &str) -> Vec<Isotopomer> {
    let path = format!("{}/fixtures/{name}.spin", env!("CARGO_MANIFEST_DIR"));
    enumerate_isotopomers(&parse_spin_system(&std::fs::read_to_string(path).unwrap()).unwrap())
}

fn plan() -> ExperimentPlan {
    let params = AcquisitionParams { aq1_s: 0.03, aq2_s: 0.1, ..Default::default() };
    ExperimentPlan::new(build_diagonal_free_cosy(tau_for(160.0)), None, &params).unwrap()
}

fn simulate(c: &mut Criterion) {
    let plan = plan();
    let mut group = c.benchmark_group("simulate");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    for system in ["three_spin", "geminal"] {
        let isos = fixture(system);
        for (name, exec) in EXECS {
            let opts = RunOptions { exec, ..Default::default() };
            group.bench_with_input(BenchmarkId::new(name, system), &isos, |b, isos| {
                b.iter(|| run_experiment(black_box(&plan), isos, EngineConfig::default(), opts).unwrap())
            });
        }
    }
    group.finish();
}

fn process(c: &mut Criterion) {
    let fid =
        run_experiment(&plan(), &fixture("three_spin"), EngineConfig::ideal(), RunOptions::default()).unwrap().fid;
    let mut group = c.benchmark_group("transform");
    for (name, exec) in EXECS {
        let p = TransformParams { zf1: 1024, zf2: 4096, exec, ..Default::default() };
        group.bench_function(name, |b| b.iter(|| transform(black_box(&fid), &p).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, simulate, process);
criterion_main!(benches);
