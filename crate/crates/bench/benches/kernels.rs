//! Hot-path benchmarks at benchmark scale (30 nodes, dimension 20, memory 40).

use criterion::{criterion_group, criterion_main, Criterion};
use fdgm_core::anderson::{
    edge_update, solve_coefficients, PairMemory, SafeguardMode, SafeguardParams,
};
use fdgm_core::conjugate::dual_oracle;
use fdgm_core::fdgm::{fdgm_iteration, DualState};
use fdgm_core::network::generate_periodic_schedule;
use fdgm_core::problem::generate_instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const D: usize = 20;
const LAMBDA: f64 = 0.01;

fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| (rng.gen::<f64>() - 0.5) * 2.0 * scale).collect()
}

fn bench_dual_oracle(c: &mut Criterion) {
    let instance = generate_instance(99, 4, D, 200, LAMBDA).unwrap();
    let problem = &instance.locals[0];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let w = random_vec(&mut rng, D, 0.05);
    let warm = dual_oracle(problem, &w, 1e-10, None).unwrap().x;
    c.bench_function("dual_oracle_cold", |b| {
        b.iter(|| dual_oracle(black_box(problem), black_box(&w), 1e-10, None).unwrap())
    });
    c.bench_function("dual_oracle_warm", |b| {
        b.iter(|| dual_oracle(black_box(problem), black_box(&w), 1e-10, Some(&warm)).unwrap())
    });
}

fn bench_fdgm_iteration(c: &mut Criterion) {
    let n = 30;
    let schedule = generate_periodic_schedule(7, n, 5, 0.1).unwrap();
    let edges = schedule.edges_at(0);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let state = DualState {
        w: (0..n).map(|_| random_vec(&mut rng, D, 0.05)).collect(),
        iteration: 0,
    };
    let grads: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut rng, D, 1.0)).collect();
    c.bench_function("fdgm_iteration_n30", |b| {
        b.iter(|| fdgm_iteration(black_box(&state), black_box(&edges), black_box(&grads), 0.009))
    });
}

fn filled_memory(rng: &mut ChaCha8Rng, capacity: usize) -> (PairMemory, Vec<f64>, Vec<f64>) {
    let mut mem = PairMemory::new(capacity);
    let (mut w_i, mut w_j) = (vec![0.0; D], vec![0.0; D]);
    for k in 0..=capacity {
        w_i = random_vec(rng, D, 0.05);
        w_j = random_vec(rng, D, 0.05);
        let g_i = random_vec(rng, D, 1.0);
        let g_j = random_vec(rng, D, 1.0);
        mem.update(k, &w_i, &g_i, &w_j, &g_j);
    }
    (mem, w_i, w_j)
}

fn bench_coefficient_solve(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mem, w_i, w_j) = filled_memory(&mut rng, 40);
    c.bench_function("solve_coefficients_m40_d20", |b| {
        b.iter(|| solve_coefficients(black_box(&mem), black_box(&w_i), black_box(&w_j), 0.0))
    });
}

fn bench_edge_update(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mem, w_i, w_j) = filled_memory(&mut rng, 40);
    let g_i = random_vec(&mut rng, D, 1.0);
    let g_j = random_vec(&mut rng, D, 1.0);
    let params = SafeguardParams::from_step(0.9 * LAMBDA, 1.0 / LAMBDA);
    c.bench_function("edge_update_m40_d20", |b| {
        b.iter(|| {
            edge_update(
                black_box(&mem),
                black_box(&w_i),
                black_box(&w_j),
                black_box(&g_i),
                black_box(&g_j),
                &params,
                SafeguardMode::Simple,
                0.0,
                None,
            )
        })
    });
}

criterion_group!(
    kernels,
    bench_dual_oracle,
    bench_fdgm_iteration,
    bench_coefficient_solve,
    bench_edge_update
);
criterion_main!(kernels);
