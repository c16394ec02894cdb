use std::hint::black_box;
use std::sync::Arc;

use autoda_core::dsl::{
    built_in_final, evaluate, parse, EvalContext, FINAL_SOURCE, INITIAL_SOURCE,
};
use autoda_core::engine::{run_attack, AttackConfig, AttackProblem, ProgramProposal};
use autoda_core::seed::{rng_from, standard_normal};
use autoda_core::victims::{sphere_instances, SphereSetup};
use autoda_core::{InputVector, Shape};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn dsl_eval(c: &mut Criterion) {
    let program = built_in_final();
    let mut group = c.benchmark_group("dsl_eval_final");
    for dim in [16usize, 3072] {
        let mut rng = rng_from(1);
        let x0 = InputVector::flat(vec![0.5; dim]);
        let x1 = InputVector::flat(vec![0.25; dim]);
        let noise = standard_normal(&mut rng, Shape::Flat(dim));
        group.throughput(Throughput::Elements(dim as u64));
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| {
                let mut ctx = EvalContext {
                    x0: &x0,
                    x1: &x1,
                    noise: &noise,
                    s: 0.01,
                    rng: &mut rng,
                };
                black_box(evaluate(&program, &mut ctx).unwrap())
            })
        });
    }
    group.finish();
}

fn dsl_parse(c: &mut Criterion) {
    c.bench_function("parse_final", |b| {
        b.iter(|| parse(black_box(FINAL_SOURCE)).unwrap())
    });
    c.bench_function("parse_initial", |b| {
        b.iter(|| parse(black_box(INITIAL_SOURCE)).unwrap())
    });
}

fn sphere_attack(c: &mut Criterion) {
    let inst = sphere_instances(16, 1, 1, SphereSetup::default()).remove(0);
    let program = Arc::new(built_in_final());
    let config = AttackConfig {
        max_queries: 2000,
        seed: 3,
        ..AttackConfig::default()
    };
    let mut group = c.benchmark_group("sphere_attack");
    group.throughput(Throughput::Elements(config.max_queries));
    group.sample_size(20);
    group.bench_function("d16_2000_queries", |b| {
        b.iter(|| {
            let problem = AttackProblem {
                original: &inst.original,
                original_label: inst.label,
                start: &inst.start,
            };
            let mut proposal = ProgramProposal::new(Arc::clone(&program));
            run_attack(inst.oracle.as_ref(), problem, &mut proposal, &config).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, dsl_eval, dsl_parse, sphere_attack);
criterion_main!(benches);
