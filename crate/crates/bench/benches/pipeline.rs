//! Benchmarks for the hot paths: configuration enumeration, planning, and
//! the grammar round trip.

use std::collections::BTreeSet;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use stacksolve_core::benchgen::{generate, GenConfig};
use stacksolve_core::domain::enumerate_configurations;
use stacksolve_core::grammar::{parse_problem_nl, render_problem, Vocabulary};
use stacksolve_core::planner::{solve, PlannerConfig, Strategy};
use stacksolve_core::ObjectId;

fn bench_enumeration(c: &mut Criterion) {
    let objects: BTreeSet<ObjectId> = ["plate", "mug", "bowl", "fork", "spoon"]
        .into_iter()
        .map(ObjectId::household)
        .collect();
    c.bench_function("enumerate_configurations/5", |b| {
        b.iter(|| enumerate_configurations(&objects).unwrap())
    });
}

fn bench_solve(c: &mut Criterion) {
    let items = generate(&GenConfig {
        count: 20,
        ..GenConfig::defaults(7)
    })
    .unwrap();
    let many: Vec<_> = items
        .iter()
        .filter(|it| it.id.ends_with("many-constraints"))
        .collect();
    for (name, strategy) in [("bfs", Strategy::Bfs), ("astar", Strategy::AStarGoalCount)] {
        let config = PlannerConfig {
            strategy,
            ..PlannerConfig::default()
        };
        c.bench_function(&format!("solve/{name}/many-constraints"), |b| {
            b.iter_batched(
                || many.clone(),
                |batch| {
                    for item in batch {
                        solve(&item.problem, &config);
                    }
                },
                BatchSize::SmallInput,
            )
        });
    }
}

fn bench_grammar_round_trip(c: &mut Criterion) {
    let vocab = Vocabulary::default_vocabulary();
    let items = generate(&GenConfig {
        count: 20,
        ..GenConfig::defaults(7)
    })
    .unwrap();
    c.bench_function("grammar/render_parse/60-items", |b| {
        b.iter(|| {
            for item in &items {
                let text = render_problem(&item.problem);
                parse_problem_nl(&text, &vocab, &item.id).unwrap();
            }
        })
    });
}

criterion_group!(benches, bench_enumeration, bench_solve, bench_grammar_round_trip);
criterion_main!(benches);
