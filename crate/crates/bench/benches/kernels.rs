use criterion::{black_box, criterion_group, criterion_main, Criterion};

use pennies_core::certified::{build_tables, Rounding, Z058};
use pennies_core::dynamics::{a_system_solve, dabmn_evolve, Lattice, TerminalCondition, TerminalPreset};
use pennies_core::engine::{restrict, simulate_batch, GameConfig, Policy};
use pennies_core::margin::{margin_finite, margin_infinite};
use pennies_core::solution::standard_solution;
use pennies_core::Window;

fn solutions(c: &mut Criterion) {
    c.bench_function("standard_solution/-20..20", |b| {
        b.iter(|| standard_solution(black_box(0.58), Window::symmetric(20).unwrap()).unwrap())
    });
}

fn margins(c: &mut Criterion) {
    c.bench_function("margin_finite/5,5", |b| b.iter(|| margin_finite(black_box(1.3), 5, 5).unwrap()));
    c.bench_function("margin_infinite", |b| b.iter(|| margin_infinite(black_box(1.3), 1e-12).unwrap()));
}

fn certificates(c: &mut Criterion) {
    c.bench_function("build_tables", |b| b.iter(|| build_tables(black_box(Z058), Rounding::Nearest).unwrap()));
}

fn games(c: &mut Criterion) {
    let q = standard_solution(0.58, Window::symmetric(8).unwrap()).unwrap();
    let trail = Window::new(-5, 4).unwrap();
    let (boundary, a, bstakes) = restrict(&q, trail).unwrap();
    let config = GameConfig::finite(trail.lo, trail.hi, boundary, 0, 1).unwrap();
    let maxine = Policy::Table { lo: trail.lo + 1, stakes: a };
    let mina = Policy::Table { lo: trail.lo + 1, stakes: bstakes };
    c.bench_function("simulate_batch/1000", |b| {
        b.iter(|| simulate_batch(&config, &mina, &maxine, black_box(1000)).unwrap())
    });
}

fn dynamics(c: &mut Criterion) {
    c.bench_function("a_system_solve/20", |b| b.iter(|| a_system_solve(Lattice::Integers, black_box(1.0), 20).unwrap()));
    let terminal = TerminalCondition::preset(TerminalPreset::Plateau { delta: 1e-9 }, 8).unwrap();
    c.bench_function("dabmn_evolve/500", |b| b.iter(|| dabmn_evolve(&terminal, black_box(500), 100).unwrap()));
}

criterion_group!(kernels, solutions, margins, certificates, games, dynamics);
criterion_main!(kernels);
