//! Local objectives and benchmark instances.
//!
//! Each node holds a ball-constrained regularized logistic regression
//! problem: a smooth loss over its private samples plus a ridge term,
//! restricted to a Euclidean ball. This module generates random instances,
//! evaluates objectives and gradients, and computes a high-accuracy
//! centralized reference solution used as ground truth by the experiment
//! harness.

use crate::linalg::{self, DenseMatrix};
use once_cell::sync::OnceCell;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Feasibility margin required of the origin at generation time.
const INTERIOR_MARGIN: f64 = 1e-6;

/// Iteration cap for the centralized reference solve.
const REFERENCE_CAP: usize = 1_000_000;

/// Sweep cap for the alternating-projection inner solver.
const DYKSTRA_CAP: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum ProblemError {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("reference solve did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// One node's objective: `scale * Σ_j log(1 + exp(-b_j <a_j, x>)) + (lambda/2)‖x‖²`
/// plus the indicator of the ball `‖x - ball_center‖ ≤ ball_radius`.
#[derive(Debug, Clone)]
pub struct LocalProblem {
    /// Sample features, one row per sample.
    pub features: DenseMatrix,
    /// Sample labels, each `+1.0` or `-1.0`.
    pub labels: Vec<f64>,
    /// Ridge weight; also the strong-convexity constant of the smooth part.
    pub lambda: f64,
    /// Weight applied to the logistic sum (`1/(n·M)` for generated instances).
    pub scale: f64,
    pub ball_center: Vec<f64>,
    pub ball_radius: f64,
    /// Strong-convexity constant, equal to `lambda`.
    pub mu: f64,
    lipschitz: OnceCell<f64>,
}

impl LocalProblem {
    pub fn new(
        features: DenseMatrix,
        labels: Vec<f64>,
        lambda: f64,
        scale: f64,
        ball_center: Vec<f64>,
        ball_radius: f64,
    ) -> Self {
        assert_eq!(features.rows(), labels.len(), "one label per sample");
        assert_eq!(features.cols(), ball_center.len(), "center dimension");
        assert!(labels.iter().all(|&b| b == 1.0 || b == -1.0), "labels must be ±1");
        assert!(lambda >= 0.0 && scale > 0.0 && ball_radius > 0.0);
        LocalProblem {
            features,
            labels,
            lambda,
            scale,
            ball_center,
            ball_radius,
            mu: lambda,
            lipschitz: OnceCell::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn samples(&self) -> usize {
        self.features.rows()
    }

    /// Smooth part of the objective (logistic sum plus ridge), ignoring the ball.
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.samples() {
            let z = -self.labels[j] * linalg::dot(self.features.row(j), x);
            acc += softplus(z);
        }
        self.scale * acc + 0.5 * self.lambda * linalg::norm_sq(x)
    }

    /// Full objective value; `+∞` outside the ball (within a radius-relative tolerance).
    pub fn eval_local(&self, x: &[f64]) -> f64 {
        let tol = 1e-12 * (1.0 + self.ball_radius);
        let dist = linalg::dist_sq(x, &self.ball_center).sqrt();
        if dist > self.ball_radius + tol {
            return f64::INFINITY;
        }
        self.smooth_value(x)
    }

    /// Gradient of the smooth part.
    pub fn grad_smooth(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut g: Vec<f64> = x.iter().map(|&v| self.lambda * v).collect();
        for j in 0..self.samples() {
            let row = self.features.row(j);
            let b = self.labels[j];
            let z = -b * linalg::dot(row, x);
            let coeff = self.scale * (-b) * sigmoid(z);
            for k in 0..d {
                g[k] += coeff * row[k];
            }
        }
        g
    }

    /// Upper bound on the gradient Lipschitz constant of the smooth part:
    /// `lambda + scale·‖features‖²_op/4`. Computed once and cached.
    pub fn smooth_lipschitz(&self) -> f64 {
        *self
            .lipschitz
            .get_or_init(|| self.lambda + self.scale * operator_norm_sq(&self.features) / 4.0)
    }

    /// Euclidean projection onto this node's ball.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        project_ball(&self.ball_center, self.ball_radius, x)
    }

    /// Signed ball-constraint violation `‖x - center‖ - radius` (negative inside).
    pub fn ball_violation(&self, x: &[f64]) -> f64 {
        linalg::dist_sq(x, &self.ball_center).sqrt() - self.ball_radius
    }
}

/// Euclidean projection onto the ball `‖x - center‖ ≤ radius`.
pub fn project_ball(center: &[f64], radius: f64, x: &[f64]) -> Vec<f64> {
    assert!(radius > 0.0);
    let dist = linalg::dist_sq(x, center).sqrt();
    if dist <= radius {
        return x.to_vec();
    }
    let shrink = radius / dist;
    center
        .iter()
        .zip(x.iter())
        .map(|(&c, &v)| c + shrink * (v - c))
        .collect()
}

fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration on the Gram matrix.
fn operator_norm_sq(a: &DenseMatrix) -> f64 {
    let g = a.gram();
    let d = g.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9e37_79b9_7f4a_7c15);
    let mut v: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() + 0.5).collect();
    let nrm = linalg::norm(&v);
    for t in v.iter_mut() {
        *t /= nrm;
    }
    let mut prev = 0.0;
    for _ in 0..10_000 {
        let gv = g.matvec(&v);
        let est = linalg::dot(&v, &gv);
        let nrm = linalg::norm(&gv);
        if nrm == 0.0 {
            return 0.0;
        }
        for (t, &s) in v.iter_mut().zip(gv.iter()) {
            *t = s / nrm;
        }
        if (est - prev).abs() <= 1e-13 * est.max(1.0) {
            return est;
        }
        prev = est;
    }
    prev
}

/// A full multi-node problem: `n` local objectives over a shared decision space.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub locals: Vec<LocalProblem>,
    pub n: usize,
    pub d: usize,
    /// Samples per node.
    pub samples: usize,
    pub seed: u64,
    pub lambda: f64,
    pub reference_solution: Option<Vec<f64>>,
    pub reference_value: Option<f64>,
}

/// Generates a random instance. Per node: sample features with the last
/// coordinate pinned to 1, perfectly balanced ±1 labels, a ball center near
/// the origin, and a radius of at least 1, so the origin is strictly interior
/// to every ball. Deterministic in `seed`.
pub fn generate_instance(
    seed: u64,
    n: usize,
    d: usize,
    samples: usize,
    lambda: f64,
) -> Result<ProblemInstance, ProblemError> {
    if n == 0 || d == 0 || samples == 0 {
        return Err(ProblemError::InvalidDims(format!(
            "n={n}, d={d}, samples={samples} must all be positive"
        )));
    }
    if samples % 2 != 0 {
        return Err(ProblemError::InvalidDims(format!(
            "samples={samples} must be even for balanced labels"
        )));
    }
    assert!(lambda > 0.0, "regularization must be positive");

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let feature_dist = Normal::new(2.0, 8.0_f64.sqrt()).unwrap();
    let center_dist = Normal::new(0.0, 0.1).unwrap();
    let radius_dist = Normal::new(0.0, 0.1_f64.sqrt()).unwrap();
    let scale = 1.0 / (n as f64 * samples as f64);

    let mut locals = Vec::with_capacity(n);
    for _ in 0..n {
        let mut data = vec![0.0; samples * d];
        for j in 0..samples {
            for k in 0..d - 1 {
                data[j * d + k] = feature_dist.sample(&mut rng);
            }
            data[j * d + d - 1] = 1.0;
        }
        let labels: Vec<f64> = (0..samples)
            .map(|j| if j < samples / 2 { 1.0 } else { -1.0 })
            .collect();
        let ball_center: Vec<f64> = (0..d).map(|_| center_dist.sample(&mut rng)).collect();
        let ball_radius = 1.0 + radius_dist.sample(&mut rng).abs();
        let features = DenseMatrix::from_row_major(samples, d, data);
        locals.push(LocalProblem::new(
            features,
            labels,
            lambda,
            scale,
            ball_center,
            ball_radius,
        ));
    }

    for (i, p) in locals.iter().enumerate() {
        let origin_dist = linalg::norm(&p.ball_center);
        assert!(
            origin_dist + INTERIOR_MARGIN < p.ball_radius,
            "ball {i} does not strictly contain the origin (dist {origin_dist}, radius {})",
            p.ball_radius
        );
    }

    Ok(ProblemInstance {
        locals,
        n,
        d,
        samples,
        seed,
        lambda,
        reference_solution: None,
        reference_value: None,
    })
}

impl ProblemInstance {
    /// Total objective `Σ_i f_i(x)` at a single shared point (`+∞` if any ball excludes it).
    pub fn total_value(&self, x: &[f64]) -> f64 {
        self.locals.iter().map(|p| p.eval_local(x)).sum()
    }

    /// Sum of the smooth parts only.
    pub fn total_smooth_value(&self, x: &[f64]) -> f64 {
        self.locals.iter().map(|p| p.smooth_value(x)).sum()
    }

    /// Minimizes the summed smooth objective over the intersection of all balls
    /// by projected gradient descent, with the intersection projection computed
    /// by Dykstra's alternating method (inner tolerance `tol/10`).
    ///
    /// Returns the point at which the gradient-mapping certificate
    /// `‖x - P(x - γ∇g(x))‖/γ ≤ tol` was verified, together with the summed
    /// smooth value there.
    pub fn solve_reference(&self, tol: f64) -> Result<(Vec<f64>, f64), ProblemError> {
        assert!(tol > 0.0);
        let lip: f64 = self.locals.iter().map(|p| p.smooth_lipschitz()).sum();
        let step = 1.0 / lip;
        let inner_tol = tol / 10.0;
        let mut x = vec![0.0; self.d];
        for _ in 0..REFERENCE_CAP {
            let mut g = vec![0.0; self.d];
            for p in &self.locals {
                let gp = p.grad_smooth(&x);
                for k in 0..self.d {
                    g[k] += gp[k];
                }
            }
            let y: Vec<f64> = x.iter().zip(g.iter()).map(|(&a, &b)| a - step * b).collect();
            let proj = dykstra_project(&self.locals, &y, inner_tol);
            let mapping = linalg::dist_sq(&x, &proj).sqrt() / step;
            if mapping <= tol {
                let value = self.total_smooth_value(&x);
                return Ok((x, value));
            }
            x = proj;
        }
        Err(ProblemError::NoConvergence(REFERENCE_CAP))
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            seed: self.seed,
            n: self.n,
            d: self.d,
            samples: self.samples,
            lambda: self.lambda,
            nodes: self
                .locals
                .iter()
                .map(|p| NodeDocument {
                    features: p.features.as_slice().to_vec(),
                    labels: p.labels.clone(),
                    ball_center: p.ball_center.clone(),
                    ball_radius: p.ball_radius,
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &InstanceDocument) -> Result<ProblemInstance, ProblemError> {
        if doc.n == 0 || doc.d == 0 || doc.samples == 0 {
            return Err(ProblemError::InvalidDims(
                "all instance dimensions must be positive".into(),
            ));
        }
        if doc.nodes.len() != doc.n {
            return Err(ProblemError::InvalidDims(format!(
                "document lists {} nodes but declares n={}",
                doc.nodes.len(),
                doc.n
            )));
        }
        let scale = 1.0 / (doc.n as f64 * doc.samples as f64);
        let mut locals = Vec::with_capacity(doc.n);
        for (i, node) in doc.nodes.iter().enumerate() {
            if node.features.len() != doc.samples * doc.d {
                return Err(ProblemError::InvalidDims(format!(
                    "node {i}: expected {}x{} features, got {} entries",
                    doc.samples,
                    doc.d,
                    node.features.len()
                )));
            }
            if node.labels.len() != doc.samples
                || !node.labels.iter().all(|&b| b == 1.0 || b == -1.0)
            {
                return Err(ProblemError::InvalidDims(format!("node {i}: bad labels")));
            }
            if node.ball_center.len() != doc.d || node.ball_radius <= 0.0 {
                return Err(ProblemError::InvalidDims(format!("node {i}: bad ball")));
            }
            locals.push(LocalProblem::new(
                DenseMatrix::from_row_major(doc.samples, doc.d, node.features.clone()),
                node.labels.clone(),
                doc.lambda,
                scale,
                node.ball_center.clone(),
                node.ball_radius,
            ));
        }
        Ok(ProblemInstance {
            locals,
            n: doc.n,
            d: doc.d,
            samples: doc.samples,
            seed: doc.seed,
            lambda: doc.lambda,
            reference_solution: None,
            reference_value: None,
        })
    }
}

/// Replayable on-disk form of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "M")]
    pub samples: usize,
    pub lambda: f64,
    pub nodes: Vec<NodeDocument>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeDocument {
    /// Row-major samples × dim feature block.
    pub features: Vec<f64>,
    pub labels: Vec<f64>,
    pub ball_center: Vec<f64>,
    pub ball_radius: f64,
}

/// Projection of `y` onto the intersection of all node balls via Dykstra's
/// alternating projections. Stops once a full sweep moves the iterate by at
/// most `tol` and every ball constraint is violated by at most `tol`.
fn dykstra_project(locals: &[LocalProblem], y: &[f64], tol: f64) -> Vec<f64> {
    let d = y.len();
    let mut x = y.to_vec();
    let mut corrections = vec![vec![0.0; d]; locals.len()];
    for _ in 0..DYKSTRA_CAP {
        let sweep_start = x.clone();
        for (p, q) in locals.iter().zip(corrections.iter_mut()) {
            let z: Vec<f64> = x.iter().zip(q.iter()).map(|(&a, &b)| a + b).collect();
            let proj = p.project(&z);
            for k in 0..d {
                q[k] = z[k] - proj[k];
            }
            x = proj;
        }
        let moved = linalg::dist_sq(&sweep_start, &x).sqrt();
        let violation = locals
            .iter()
            .map(|p| p.ball_violation(&x))
            .fold(f64::NEG_INFINITY, f64::max);
        if moved <= tol && violation <= tol {
            break;
        }
    }
    x
}
