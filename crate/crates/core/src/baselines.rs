//! Distributed projected subgradient baseline.
//!
//! The comparison method: every node mixes its primal iterate with its
//! neighbors' using Metropolis weights, takes a diminishing gradient step on
//! its own smooth loss, and projects back onto its own ball. No dual
//! variables, no certificates — this is the standard first-order
//! consensus-plus-subgradient scheme.

use crate::linalg;
use crate::network::WeightedEdges;
use crate::problem::ProblemInstance;

/// Per-node primal iterates, one row per node.
#[derive(Debug, Clone)]
pub struct PrimalState {
    pub x: Vec<Vec<f64>>,
    pub iteration: usize,
}

impl PrimalState {
    /// Starts every node at its own ball center (always feasible).
    pub fn from_centers(instance: &ProblemInstance) -> Self {
        PrimalState {
            x: instance
                .locals
                .iter()
                .map(|p| p.ball_center.clone())
                .collect(),
            iteration: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn dim(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// Row average, the consensus estimate.
    pub fn average(&self) -> Vec<f64> {
        let d = self.dim();
        let mut avg = vec![0.0; d];
        for row in &self.x {
            for r in 0..d {
                avg[r] += row[r];
            }
        }
        let n = self.n() as f64;
        avg.iter_mut().for_each(|v| *v /= n);
        avg
    }

    /// Mean squared distance of rows from their average.
    pub fn consensus_violation(&self) -> f64 {
        let avg = self.average();
        let total: f64 = self.x.iter().map(|row| linalg::dist_sq(row, &avg)).sum();
        total / self.n() as f64
    }
}

/// One synchronous baseline iteration with step `c/k`: Metropolis mixing of
/// the previous rows, a gradient step on each node's own smooth loss
/// (evaluated at the pre-mixing iterate), and projection onto the node's own
/// ball.
pub fn dps_iteration(
    state: &PrimalState,
    edges: &WeightedEdges,
    instance: &ProblemInstance,
    c: f64,
    k: usize,
) -> PrimalState {
    assert!(k >= 1, "diminishing step needs k >= 1");
    assert!(c >= 0.0);
    let n = state.n();
    let d = state.dim();
    assert_eq!(n, instance.n);

    // mixed_i = (1 − Σ_j h_ij)·x_i + Σ_j h_ij·x_j, neighbor terms in edge order
    let mut self_weight = vec![1.0; n];
    let mut mixed: Vec<Vec<f64>> = vec![vec![0.0; d]; n];
    for e in edges.iter() {
        self_weight[e.i] -= e.h;
        self_weight[e.j] -= e.h;
        for r in 0..d {
            mixed[e.i][r] += e.h * state.x[e.j][r];
            mixed[e.j][r] += e.h * state.x[e.i][r];
        }
    }
    for i in 0..n {
        for r in 0..d {
            mixed[i][r] += self_weight[i] * state.x[i][r];
        }
    }

    let step = c / k as f64;
    let x = (0..n)
        .map(|i| {
            let grad = instance.locals[i].grad_smooth(&state.x[i]);
            let moved: Vec<f64> = (0..d).map(|r| mixed[i][r] - step * grad[r]).collect();
            instance.locals[i].project(&moved)
        })
        .collect();
    PrimalState {
        x,
        iteration: state.iteration + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::network::{generate_periodic_schedule, GraphSchedule, WeightRule};
    use crate::problem::{generate_instance, LocalProblem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn free_instance(n: usize, d: usize, radius: f64) -> ProblemInstance {
        let locals: Vec<LocalProblem> = (0..n)
            .map(|_| {
                LocalProblem::new(DenseMatrix::zeros(0, d), vec![], 0.0, 1.0, vec![0.0; d], radius)
            })
            .collect();
        ProblemInstance {
            locals,
            n,
            d,
            samples: 0,
            seed: 0,
            lambda: 0.0,
            reference_solution: None,
            reference_value: None,
        }
    }

    fn single_slot(n: usize, edges: Vec<(usize, usize)>) -> WeightedEdges {
        GraphSchedule::new(n, vec![edges], WeightRule::Metropolis)
            .unwrap()
            .edges_at(0)
    }

    #[test]
    fn stationary_consensus_with_zero_step_is_fixed() {
        // All nodes at the origin, the ridge-only stationary point; zero step
        // constant leaves mixing of identical zero rows exact.
        let locals: Vec<LocalProblem> = (0..3)
            .map(|_| {
                LocalProblem::new(DenseMatrix::zeros(0, 2), vec![], 0.5, 1.0, vec![0.1, -0.1], 3.0)
            })
            .collect();
        let instance = ProblemInstance {
            locals,
            n: 3,
            d: 2,
            samples: 0,
            seed: 0,
            lambda: 0.5,
            reference_solution: None,
            reference_value: None,
        };
        let state = PrimalState {
            x: vec![vec![0.0; 2]; 3],
            iteration: 0,
        };
        let edges = single_slot(3, vec![(0, 1), (1, 2)]);
        let next = dps_iteration(&state, &edges, &instance, 0.0, 1);
        assert_eq!(next.x, state.x);
        assert_eq!(next.iteration, 1);
    }

    #[test]
    fn isolated_pair_swaps_rows() {
        // Degree-1 endpoints give Metropolis weight 1, so the pair exchanges
        // rows outright instead of averaging — the degenerate two-node case.
        let instance = free_instance(2, 2, 1e6);
        let state = PrimalState {
            x: vec![vec![1.0, 2.0], vec![-3.0, 4.0]],
            iteration: 0,
        };
        let edges = single_slot(2, vec![(0, 1)]);
        let next = dps_iteration(&state, &edges, &instance, 0.0, 1);
        assert_eq!(next.x[0], state.x[1]);
        assert_eq!(next.x[1], state.x[0]);
    }

    #[test]
    fn path_mixing_contracts_toward_average() {
        let instance = free_instance(3, 2, 1e6);
        let mut state = PrimalState {
            x: vec![vec![4.0, 0.0], vec![0.0, 2.0], vec![-4.0, -6.0]],
            iteration: 0,
        };
        let edges = single_slot(3, vec![(0, 1), (1, 2)]);
        let before_avg = state.average();
        let mut last = state.consensus_violation();
        for k in 1..=20 {
            state = dps_iteration(&state, &edges, &instance, 0.0, k);
            let now = state.consensus_violation();
            assert!(now <= last + 1e-12, "violation rose at step {k}: {last} -> {now}");
            last = now;
        }
        assert!(last < 1e-6, "rows failed to contract: {last}");
        // doubly stochastic mixing preserves the average
        let after_avg = state.average();
        for r in 0..2 {
            assert!((after_avg[r] - before_avg[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_straight_line_reimplementation() {
        let instance = generate_instance(42, 3, 4, 6, 0.1).unwrap();
        let sched = generate_periodic_schedule(9, 3, 1, 0.8).unwrap();
        let edges = sched.edges_at(0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<Vec<f64>> = (0..3)
            .map(|i| {
                let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
                instance.locals[i].project(&raw)
            })
            .collect();
        let state = PrimalState { x: x.clone(), iteration: 0 };
        let (c, k) = (0.7, 3);
        let next = dps_iteration(&state, &edges, &instance, c, k);

        // Oracle: build the full mixing matrix, then update row by row.
        let n = 3;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 1.0;
        }
        for e in edges.iter() {
            a[e.i][e.j] = e.h;
            a[e.j][e.i] = e.h;
            a[e.i][e.i] -= e.h;
            a[e.j][e.j] -= e.h;
        }
        for i in 0..n {
            let mut target = vec![0.0; 4];
            for j in 0..n {
                for r in 0..4 {
                    target[r] += a[i][j] * x[j][r];
                }
            }
            let grad = instance.locals[i].grad_smooth(&x[i]);
            for r in 0..4 {
                target[r] -= (c / k as f64) * grad[r];
            }
            let expected = instance.locals[i].project(&target);
            let dist = linalg::dist_sq(&next.x[i], &expected).sqrt();
            assert!(dist <= 1e-12, "node {i} differs by {dist}");
        }
    }

    #[test]
    fn mixing_matrix_is_doubly_stochastic() {
        for seed in 0..10 {
            let n = 6;
            let sched = generate_periodic_schedule(seed, n, 2, 0.5).unwrap();
            for slot in 0..2 {
                let edges = sched.edges_at(slot);
                let mut a = vec![vec![0.0; n]; n];
                for i in 0..n {
                    a[i][i] = 1.0;
                }
                for e in edges.iter() {
                    a[e.i][e.j] = e.h;
                    a[e.j][e.i] = e.h;
                    a[e.i][e.i] -= e.h;
                    a[e.j][e.j] -= e.h;
                }
                for i in 0..n {
                    let row: f64 = a[i].iter().sum();
                    assert!((row - 1.0).abs() <= 1e-12);
                    let col: f64 = (0..n).map(|j| a[j][i]).sum();
                    assert!((col - 1.0).abs() <= 1e-12);
                    assert!(a[i].iter().all(|&v| v >= 0.0), "negative mixing weight");
                }
            }
        }
    }

    #[test]
    fn outputs_stay_ball_feasible() {
        let instance = generate_instance(3, 4, 3, 4, 0.05).unwrap();
        let sched = generate_periodic_schedule(11, 4, 2, 0.6).unwrap();
        let mut state = PrimalState::from_centers(&instance);
        for k in 1..=30 {
            state = dps_iteration(&state, &sched.edges_at(k - 1), &instance, 10.0, k);
            for (i, row) in state.x.iter().enumerate() {
                let viol = instance.locals[i].ball_violation(row);
                assert!(viol <= 1e-9, "node {i} infeasible by {viol} at step {k}");
            }
        }
    }
}
