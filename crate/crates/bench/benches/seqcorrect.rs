use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use seqcorrect_core::distributions::{t_cdf, t_quantile};
use seqcorrect_core::montecarlo::table_scenarios;
use seqcorrect_core::{simulate_scenario, DesignSpec, RngStream, TableId, TrueParams};

fn special_functions(c: &mut Criterion) {
    c.bench_function("t_quantile df=14", |b| b.iter(|| t_quantile(black_box(0.975), black_box(14.0))));
    c.bench_function("t_quantile df=3.7", |b| b.iter(|| t_quantile(black_box(0.95), black_box(3.7))));
    c.bench_function("t_cdf df=14", |b| b.iter(|| t_cdf(black_box(1.3), black_box(14.0))));
}

fn trials(c: &mut Criterion) {
    let params = TrueParams::new(0.3, 1.0, 1.0, 1.0, 0.4).unwrap();
    let mut g = c.benchmark_group("run_trial");
    for (name, design) in [
        ("sprt", DesignSpec::sprt(10.0, 0.1, 5.0).unwrap()),
        ("rst", DesignSpec::rst(10.0, 0.1, 2.0).unwrap()),
        ("triangular", TableId::T5.design()),
    ] {
        let mut r = 0;
        g.bench_function(name, |b| {
            b.iter(|| {
                r += 1;
                design.run_trial(&params, &mut RngStream::new(1, r)).unwrap()
            })
        });
    }
    g.finish();
}

fn scenarios(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_scenario");
    g.sample_size(20);
    for id in [TableId::T1, TableId::T4, TableId::T5] {
        let sc = table_scenarios(id, 1000, 7).unwrap().remove(0);
        g.bench_function(format!("{id} row 1, 1000 reps"), |b| b.iter(|| simulate_scenario(&sc).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, special_functions, trials, scenarios);
criterion_main!(benches);
