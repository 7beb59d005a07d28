//! Plain dual gradient iteration in edge-decomposed form.
//!
//! Each active edge computes a tentative pair of half-updates from the two
//! endpoints' dual gradients; each node then averages its own iterate with
//! the half-updates of its incident edges. The edge step moves the pair's
//! dual mass symmetrically, so the global sum `Σ_i w_i` — dual feasibility —
//! is conserved up to rounding, and the whole iteration equals one weighted
//! gradient step on the dual function.

use crate::linalg;
use crate::network::WeightedEdges;

/// Stacked dual iterate: one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DualState {
    pub w: Vec<Vec<f64>>,
    pub iteration: usize,
}

impl DualState {
    pub fn zeros(n: usize, d: usize) -> Self {
        DualState {
            w: vec![vec![0.0; d]; n],
            iteration: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn dim(&self) -> usize {
        self.w.first().map_or(0, Vec::len)
    }

    /// Norm of `Σ_i w_i`; zero for any dual-feasible point.
    pub fn conservation_residual(&self) -> f64 {
        let d = self.dim();
        let mut total = vec![0.0; d];
        for row in &self.w {
            for (t, &v) in total.iter_mut().zip(row.iter()) {
                *t += v;
            }
        }
        linalg::norm(&total)
    }

    pub fn max_row_norm(&self) -> f64 {
        self.w
            .iter()
            .map(|row| linalg::norm(row))
            .fold(0.0, f64::max)
    }
}

/// One tentative edge update: moves `β(∇d_i - ∇d_j)` from `w_i` to `w_j`.
/// The same increment is applied with opposite signs, so the pair sum is
/// preserved as real arithmetic (to rounding in floats).
pub fn edge_gradient_step(
    w_i: &[f64],
    w_j: &[f64],
    grad_i: &[f64],
    grad_j: &[f64],
    beta: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert!(beta > 0.0);
    let d = w_i.len();
    let mut half_ij = Vec::with_capacity(d);
    let mut half_ji = Vec::with_capacity(d);
    for r in 0..d {
        let delta = beta * (grad_i[r] - grad_j[r]);
        half_ij.push(w_i[r] - delta);
        half_ji.push(w_j[r] + delta);
    }
    (half_ij, half_ji)
}

/// Convex combination of a node's own iterate with its incident edge
/// half-updates: `(1 - Σ h)·w_i + Σ h·half`.
pub fn aggregate(w_i: &[f64], contributions: &[(f64, &[f64])]) -> Vec<f64> {
    let total: f64 = contributions.iter().map(|(h, _)| h).sum();
    let mut out: Vec<f64> = w_i.iter().map(|&v| (1.0 - total) * v).collect();
    for (h, half) in contributions {
        for (o, &x) in out.iter_mut().zip(half.iter()) {
            *o += h * x;
        }
    }
    out
}

/// One full iteration over the active edges: edge steps, then per-node
/// aggregation with contributions in ascending neighbor order.
pub fn fdgm_iteration(
    state: &DualState,
    edges: &WeightedEdges,
    grads: &[Vec<f64>],
    beta: f64,
) -> DualState {
    let n = state.n();
    assert_eq!(grads.len(), n);
    let mut contribs: Vec<Vec<(f64, Vec<f64>)>> = vec![Vec::new(); n];
    for e in edges.iter() {
        let (half_ij, half_ji) = edge_gradient_step(
            &state.w[e.i],
            &state.w[e.j],
            &grads[e.i],
            &grads[e.j],
            beta,
        );
        contribs[e.i].push((e.h, half_ij));
        contribs[e.j].push((e.h, half_ji));
    }
    let w = (0..n)
        .map(|i| {
            let views: Vec<(f64, &[f64])> = contribs[i]
                .iter()
                .map(|(h, half)| (*h, half.as_slice()))
                .collect();
            aggregate(&state.w[i], &views)
        })
        .collect();
    DualState {
        w,
        iteration: state.iteration + 1,
    }
}
