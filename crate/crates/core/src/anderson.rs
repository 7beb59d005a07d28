//! Per-edge Anderson acceleration with safeguards.
//!
//! Every undirected edge keeps one shared memory of recent iterate/gradient
//! pairs from both endpoints. Each iteration the edge solves a small
//! equality-constrained least-squares problem for extrapolation coefficients,
//! forms an accelerated candidate pair, and accepts it only if a safeguard
//! certifies sufficient dual descent; otherwise the edge falls back to the
//! plain gradient step. The fallback guarantees the per-edge descent
//! certificate regardless of how well extrapolation behaves, so acceleration
//! is free to be aggressive.
//!
//! [`classic_aa_step`] is the textbook single-sequence kernel, kept for
//! reference experiments on fixed-point maps.

use crate::fdgm::edge_gradient_step;
use crate::linalg::{self, DenseMatrix};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Relative ridge applied to the coefficient solve when the caller does not
/// pick one; scaled by `trace(MᵀM)/cols`.
const AUTO_RIDGE: f64 = 1e-10;

#[derive(Debug, Clone)]
struct MemoryEntry {
    index: usize,
    w_i: Vec<f64>,
    grad_i: Vec<f64>,
    w_j: Vec<f64>,
    grad_j: Vec<f64>,
}

/// Shared per-edge memory of the `capacity` most recent exchanges.
///
/// Both endpoints see the same indices, so the coefficient problem is
/// identical from either side and conservation survives acceleration.
#[derive(Debug, Clone)]
pub struct PairMemory {
    entries: VecDeque<MemoryEntry>,
    capacity: usize,
}

impl PairMemory {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "memory needs room for the current iterate");
        PairMemory {
            entries: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    /// Appends iteration `k`'s iterates and gradients, evicting the oldest
    /// entry when full. Indices must arrive strictly increasing.
    pub fn update(&mut self, k: usize, w_i: &[f64], grad_i: &[f64], w_j: &[f64], grad_j: &[f64]) {
        if let Some(last) = self.entries.back() {
            assert!(k > last.index, "iteration counters must increase");
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(MemoryEntry {
            index: k,
            w_i: w_i.to_vec(),
            grad_i: grad_i.to_vec(),
            w_j: w_j.to_vec(),
            grad_j: grad_j.to_vec(),
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }

    pub fn w_i_at(&self, t: usize) -> &[f64] {
        &self.entries[t].w_i
    }

    pub fn w_j_at(&self, t: usize) -> &[f64] {
        &self.entries[t].w_j
    }

    pub fn grad_i_at(&self, t: usize) -> &[f64] {
        &self.entries[t].grad_i
    }

    pub fn grad_j_at(&self, t: usize) -> &[f64] {
        &self.entries[t].grad_j
    }

    fn dim(&self) -> usize {
        self.entries.front().map_or(0, |e| e.w_i.len())
    }
}

/// Step size, smoothness bound, and safeguard strictness constants.
///
/// The derived `theta` values are the guaranteed per-edge descent factors:
/// whichever branch an edge takes, the dual decrease is at least
/// `theta1·‖∇d_i-∇d_j‖²` and `theta2·(moved distance)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SafeguardParams {
    pub c1: f64,
    pub c2: f64,
    pub l: f64,
    pub beta: f64,
}

impl SafeguardParams {
    /// Defaults `c1` and `c2` to the plain step's own descent constants, so
    /// a candidate is accepted exactly when it does at least as well as the
    /// fallback is guaranteed to.
    pub fn from_step(beta: f64, l: f64) -> Self {
        assert!(l > 0.0 && beta > 0.0 && beta < 1.0 / l, "need beta in (0, 1/L)");
        SafeguardParams {
            c1: beta * (1.0 - beta * l),
            c2: (1.0 / beta - l) / 2.0,
            l,
            beta,
        }
    }

    pub fn with_constants(beta: f64, l: f64, c1: f64, c2: f64) -> Self {
        assert!(l > 0.0 && beta > 0.0 && beta < 1.0 / l, "need beta in (0, 1/L)");
        assert!(c1 > 0.0 && c2 > 0.0);
        SafeguardParams { c1, c2, l, beta }
    }

    pub fn theta1(&self) -> f64 {
        (self.beta * (1.0 - self.beta * self.l)).min(self.c1)
    }

    pub fn theta2(&self) -> f64 {
        ((1.0 / self.beta - self.l) / 2.0).min(self.c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SafeguardMode {
    /// Smoothness-surrogate test: no extra dual-oracle calls.
    Simple,
    /// Direct dual-value test: two extra oracle calls per candidate.
    Exact,
}

/// Extrapolation coefficients for one edge, one vector per side.
#[derive(Debug, Clone)]
pub struct CoefficientSolution {
    pub alpha_ij: Vec<f64>,
    pub alpha_ji: Vec<f64>,
    /// True when the solver degenerated to the unit coefficients at the
    /// current iterate (memory too small or numerically singular system).
    pub fallback_used: bool,
}

/// Solves the per-edge coefficient problem: minimize
/// `‖D_i·α_ij − D_j·α_ji‖²` subject to `W_i·α_ij + W_j·α_ji = w_i + w_j`
/// and both coefficient vectors summing to one. Infeasibility never arises
/// because the current iterate is in memory: unit coefficients on it satisfy
/// every constraint, and that trivial point doubles as the failure fallback.
pub fn solve_coefficients(
    mem: &PairMemory,
    w_i_k: &[f64],
    w_j_k: &[f64],
    ridge: f64,
) -> CoefficientSolution {
    let p = mem.len();
    assert!(p >= 1, "memory must contain the current iterate");
    let d = mem.dim();
    assert_eq!(w_i_k.len(), d);
    debug_assert_eq!(mem.w_i_at(p - 1), w_i_k, "current iterate must be the newest entry");
    debug_assert_eq!(mem.w_j_at(p - 1), w_j_k);

    let trivial = || {
        let mut unit = vec![0.0; p];
        unit[p - 1] = 1.0;
        CoefficientSolution {
            alpha_ij: unit.clone(),
            alpha_ji: unit,
            fallback_used: true,
        }
    };
    if p == 1 {
        return trivial();
    }

    // Stacked unknown z = (α_ij, α_ji); objective matrix [D_i, −D_j].
    let mut objective = DenseMatrix::zeros(d, 2 * p);
    for t in 0..p {
        for r in 0..d {
            objective.set(r, t, mem.grad_i_at(t)[r]);
            objective.set(r, p + t, -mem.grad_j_at(t)[r]);
        }
    }
    let mut constraints = DenseMatrix::zeros(d + 2, 2 * p);
    let mut rhs = vec![0.0; d + 2];
    for t in 0..p {
        for r in 0..d {
            constraints.set(r, t, mem.w_i_at(t)[r]);
            constraints.set(r, p + t, mem.w_j_at(t)[r]);
        }
        constraints.set(d, t, 1.0);
        constraints.set(d + 1, p + t, 1.0);
    }
    for r in 0..d {
        rhs[r] = w_i_k[r] + w_j_k[r];
    }
    rhs[d] = 1.0;
    rhs[d + 1] = 1.0;

    let ridge_eff = if ridge > 0.0 {
        ridge
    } else {
        AUTO_RIDGE * objective.gram().trace() / (2 * p) as f64
    };
    match linalg::solve_eq_constrained_lsq(&objective, &constraints, &rhs, ridge_eff) {
        Ok(z) => CoefficientSolution {
            alpha_ij: z[..p].to_vec(),
            alpha_ji: z[p..].to_vec(),
            fallback_used: false,
        },
        Err(_) => trivial(),
    }
}

/// Forms the accelerated candidate pair: extrapolated iterates
/// `W·α` moved by `±β` times the combined gradient difference.
pub fn aa_candidate_step(
    mem: &PairMemory,
    alpha_ij: &[f64],
    alpha_ji: &[f64],
    beta: f64,
) -> (Vec<f64>, Vec<f64>) {
    let p = mem.len();
    assert_eq!(alpha_ij.len(), p);
    assert_eq!(alpha_ji.len(), p);
    let d = mem.dim();
    let mut tilde_ij = vec![0.0; d];
    let mut tilde_ji = vec![0.0; d];
    let mut grad_mix_i = vec![0.0; d];
    let mut grad_mix_j = vec![0.0; d];
    for t in 0..p {
        let (ai, aj) = (alpha_ij[t], alpha_ji[t]);
        let (wi, gi) = (mem.w_i_at(t), mem.grad_i_at(t));
        let (wj, gj) = (mem.w_j_at(t), mem.grad_j_at(t));
        for r in 0..d {
            tilde_ij[r] += ai * wi[r];
            grad_mix_i[r] += ai * gi[r];
            tilde_ji[r] += aj * wj[r];
            grad_mix_j[r] += aj * gj[r];
        }
    }
    let mut bar_ij = Vec::with_capacity(d);
    let mut bar_ji = Vec::with_capacity(d);
    for r in 0..d {
        let g = grad_mix_i[r] - grad_mix_j[r];
        bar_ij.push(tilde_ij[r] - beta * g);
        bar_ji.push(tilde_ji[r] + beta * g);
    }
    (bar_ij, bar_ji)
}

/// Smoothness-surrogate acceptance test. Bounds the candidate's dual change
/// from above by first-order expansion plus `L/2` curvature, then insists
/// that bound beats both descent thresholds.
pub fn safeguard_simple(
    w_i_k: &[f64],
    w_j_k: &[f64],
    grad_i: &[f64],
    grad_j: &[f64],
    bar_ij: &[f64],
    bar_ji: &[f64],
    params: &SafeguardParams,
) -> bool {
    let move_ij: Vec<f64> = bar_ij.iter().zip(w_i_k.iter()).map(|(&a, &b)| a - b).collect();
    let move_ji: Vec<f64> = bar_ji.iter().zip(w_j_k.iter()).map(|(&a, &b)| a - b).collect();
    let lhs = linalg::dot(grad_i, &move_ij)
        + 0.5 * params.l * linalg::norm_sq(&move_ij)
        + linalg::dot(grad_j, &move_ji)
        + 0.5 * params.l * linalg::norm_sq(&move_ji);
    lhs <= descent_threshold(grad_i, grad_j, &move_ij, &move_ji, params.c1, params.c2)
}

/// Direct acceptance test on dual values supplied by the caller.
#[allow(clippy::too_many_arguments)]
pub fn safeguard_exact(
    d_i_at_bar: f64,
    d_j_at_bar: f64,
    d_i_current: f64,
    d_j_current: f64,
    grad_i: &[f64],
    grad_j: &[f64],
    move_ij: &[f64],
    move_ji: &[f64],
    params: &SafeguardParams,
) -> bool {
    let lhs = (d_i_at_bar + d_j_at_bar) - (d_i_current + d_j_current);
    lhs <= descent_threshold(grad_i, grad_j, move_ij, move_ji, params.c1, params.c2)
}

fn descent_threshold(
    grad_i: &[f64],
    grad_j: &[f64],
    move_ij: &[f64],
    move_ji: &[f64],
    c1: f64,
    c2: f64,
) -> f64 {
    let grad_gap = linalg::dist_sq(grad_i, grad_j);
    let moved = linalg::norm_sq(move_ij) + linalg::norm_sq(move_ji);
    (-c1 * grad_gap).min(-c2 * moved)
}

/// Dual values of the two current iterates plus evaluators for candidate
/// points, used by the exact safeguard.
pub struct ExactEvaluator<'a> {
    pub d_i_current: f64,
    pub d_j_current: f64,
    pub eval_i: &'a mut dyn FnMut(&[f64]) -> f64,
    pub eval_j: &'a mut dyn FnMut(&[f64]) -> f64,
}

/// Result of one edge's update decision.
#[derive(Debug, Clone)]
pub struct EdgeUpdate {
    pub half_ij: Vec<f64>,
    pub half_ji: Vec<f64>,
    /// Whether the evaluated candidate passed the safeguard.
    pub accepted: bool,
    /// Whether the coefficient solve degenerated to unit coefficients,
    /// making the candidate the plain step.
    pub fallback: bool,
}

/// Full per-edge update: coefficient solve, accelerated candidate, safeguard
/// decision, plain-step fallback. The returned pair always satisfies the
/// per-edge descent certificate.
///
/// On the accelerated branch the pair sum drifts from `w_i + w_j` by the
/// constraint residual of the coefficient solve; the drift is split evenly
/// between the two halves before the safeguard sees the candidate, keeping
/// conservation at rounding level without biasing either endpoint.
#[allow(clippy::too_many_arguments)]
pub fn edge_update(
    mem: &PairMemory,
    w_i_k: &[f64],
    w_j_k: &[f64],
    grad_i: &[f64],
    grad_j: &[f64],
    params: &SafeguardParams,
    mode: SafeguardMode,
    ridge: f64,
    exact: Option<ExactEvaluator>,
) -> EdgeUpdate {
    let coeffs = solve_coefficients(mem, w_i_k, w_j_k, ridge);

    let (candidate_ij, candidate_ji) = if coeffs.fallback_used {
        edge_gradient_step(w_i_k, w_j_k, grad_i, grad_j, params.beta)
    } else {
        let (mut bar_ij, mut bar_ji) =
            aa_candidate_step(mem, &coeffs.alpha_ij, &coeffs.alpha_ji, params.beta);
        for r in 0..bar_ij.len() {
            let drift = (w_i_k[r] + w_j_k[r]) - (bar_ij[r] + bar_ji[r]);
            bar_ij[r] += 0.5 * drift;
            bar_ji[r] += 0.5 * drift;
        }
        (bar_ij, bar_ji)
    };

    let accepted = match mode {
        SafeguardMode::Simple => safeguard_simple(
            w_i_k, w_j_k, grad_i, grad_j, &candidate_ij, &candidate_ji, params,
        ),
        SafeguardMode::Exact => {
            let ev = exact.expect("exact safeguard needs dual-value evaluators");
            let d_i_at_bar = (ev.eval_i)(&candidate_ij);
            let d_j_at_bar = (ev.eval_j)(&candidate_ji);
            let move_ij: Vec<f64> = candidate_ij
                .iter()
                .zip(w_i_k.iter())
                .map(|(&a, &b)| a - b)
                .collect();
            let move_ji: Vec<f64> = candidate_ji
                .iter()
                .zip(w_j_k.iter())
                .map(|(&a, &b)| a - b)
                .collect();
            safeguard_exact(
                d_i_at_bar,
                d_j_at_bar,
                ev.d_i_current,
                ev.d_j_current,
                grad_i,
                grad_j,
                &move_ij,
                &move_ji,
                params,
            )
        }
    };

    if coeffs.fallback_used || accepted {
        EdgeUpdate {
            half_ij: candidate_ij,
            half_ji: candidate_ji,
            accepted,
            fallback: coeffs.fallback_used,
        }
    } else {
        let (half_ij, half_ji) = edge_gradient_step(w_i_k, w_j_k, grad_i, grad_j, params.beta);
        EdgeUpdate {
            half_ij,
            half_ji,
            accepted: false,
            fallback: false,
        }
    }
}

/// Verifies the per-edge descent certificate on exact dual values:
/// the pair's dual decrease must be at least `theta1` times the gradient gap
/// and `theta2` times the squared movement, up to `slack`.
#[allow(clippy::too_many_arguments)]
pub fn check_descent_certificate(
    w_i_k: &[f64],
    w_j_k: &[f64],
    half_ij: &[f64],
    half_ji: &[f64],
    d_half_i: f64,
    d_half_j: f64,
    d_current_i: f64,
    d_current_j: f64,
    grad_i: &[f64],
    grad_j: &[f64],
    params: &SafeguardParams,
    slack: f64,
) -> bool {
    let lhs = (d_half_i + d_half_j) - (d_current_i + d_current_j);
    let grad_gap = linalg::dist_sq(grad_i, grad_j);
    let moved = linalg::dist_sq(half_ij, w_i_k) + linalg::dist_sq(half_ji, w_j_k);
    let rhs = (-params.theta1() * grad_gap).min(-params.theta2() * moved);
    lhs <= rhs + slack
}

/// Extrapolation coefficients for the classic single-sequence kernel:
/// minimizes the combined residual over the last `min(m+1, len)` history
/// entries subject to the coefficients summing to one. A window of `m+1`
/// entries spans `m` residual differences, which is what makes the kernel
/// exact on affine maps once the window covers the space.
pub fn classic_aa_coefficients(
    history: &[(Vec<f64>, Vec<f64>)],
    m: usize,
    ridge: f64,
) -> Vec<f64> {
    assert!(!history.is_empty());
    let window = history.len().min(m + 1);
    let tail = &history[history.len() - window..];
    let p = tail.len();
    if p == 1 {
        return vec![1.0];
    }
    let d = tail[0].0.len();
    let mut residuals = DenseMatrix::zeros(d, p);
    for (t, (x, tx)) in tail.iter().enumerate() {
        for r in 0..d {
            residuals.set(r, t, tx[r] - x[r]);
        }
    }
    let ones = DenseMatrix::from_row_major(1, p, vec![1.0; p]);
    match linalg::solve_eq_constrained_lsq(&residuals, &ones, &[1.0], ridge) {
        Ok(alpha) => alpha,
        Err(_) => {
            let mut unit = vec![0.0; p];
            unit[p - 1] = 1.0;
            unit
        }
    }
}

/// One classic Anderson step on a fixed-point map: combines the mapped
/// history `T(x^t)` with the residual-minimizing coefficients.
pub fn classic_aa_step(history: &[(Vec<f64>, Vec<f64>)], m: usize, ridge: f64) -> Vec<f64> {
    let alpha = classic_aa_coefficients(history, m, ridge);
    let window = history.len().min(m + 1);
    let tail = &history[history.len() - window..];
    let d = tail[0].0.len();
    let mut next = vec![0.0; d];
    for (t, (_, tx)) in tail.iter().enumerate() {
        for r in 0..d {
            next[r] += alpha[t] * tx[r];
        }
    }
    next
}
