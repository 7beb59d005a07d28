//! Per-node dual oracle.
//!
//! The dual function decomposes node-wise as `d_i(w) = max_x ⟨w, x⟩ - f_i(x)`,
//! the convex conjugate of the local objective. The maximizer doubles as the
//! dual gradient, so one inner solve yields the value, the gradient, and the
//! primal iterate reported to the user. Because every `f_i` is strongly
//! convex, `d_i` is smooth and the inner problem has a unique solution.

use crate::linalg;
use crate::problem::LocalProblem;
use thiserror::Error;

/// Iteration cap for the inner projected-gradient solve.
const INNER_CAP: usize = 100_000;

#[derive(Debug, Error)]
pub enum ConjugateError {
    #[error("inner solve stalled after {iterations} iterations (gradient mapping {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

/// Output of one conjugate evaluation at a dual point `w`.
#[derive(Debug, Clone)]
pub struct DualOracleResult {
    /// The inner maximizer; also the node's current primal iterate.
    pub x: Vec<f64>,
    /// Conjugate value `⟨w, x⟩ - f(x)`.
    pub value: f64,
    /// Dual gradient, identical to `x`.
    pub grad: Vec<f64>,
    /// Projected-gradient iterations spent (0 if the start already certified).
    pub inner_iters: usize,
}

/// Evaluates the conjugate of `problem` at `w`: solves
/// `max_x ⟨w, x⟩ - smooth(x)` over the node's ball by accelerated projected
/// gradient with step `1/L` and the constant momentum of the strongly convex
/// regime, stopping when the gradient-mapping norm is certified at most
/// `tol`. Starts from `warm_start` when given, else the ball center.
pub fn dual_oracle(
    problem: &LocalProblem,
    w: &[f64],
    tol: f64,
    warm_start: Option<&[f64]>,
) -> Result<DualOracleResult, ConjugateError> {
    assert_eq!(w.len(), problem.dim());
    assert!(tol > 0.0);
    let lipschitz = problem.smooth_lipschitz();
    let step = 1.0 / lipschitz;
    let momentum = if problem.mu > 0.0 {
        let root = (problem.mu / lipschitz).min(1.0).sqrt();
        (1.0 - root) / (1.0 + root)
    } else {
        0.0
    };
    let start = match warm_start {
        Some(s) => problem.project(s),
        None => problem.ball_center.clone(),
    };

    let forward = |z: &[f64]| {
        let mut g = problem.grad_smooth(z);
        for (gk, (&wk, &zk)) in g.iter_mut().zip(w.iter().zip(z.iter())) {
            *gk = zk - step * (*gk - wk);
        }
        problem.project(&g)
    };
    let certify = |x: Vec<f64>, inner_iters: usize| {
        let value = linalg::dot(w, &x) - problem.smooth_value(&x);
        Ok(DualOracleResult {
            grad: x.clone(),
            value,
            x,
            inner_iters,
        })
    };

    let first = forward(&start);
    let mut residual = linalg::dist_sq(&start, &first).sqrt() / step;
    if residual <= tol {
        return certify(start, 0);
    }
    // The momentum point may sit outside the ball, so the stopping rule
    // measures the gradient mapping there; the mapping is (3/step)-Lipschitz
    // at this step size and the returned projected point lies step·residual
    // away, so a quarter-tolerance check certifies the returned point.
    let mut y: Vec<f64> = first
        .iter()
        .zip(start.iter())
        .map(|(&cur, &old)| cur + momentum * (cur - old))
        .collect();
    let mut x_prev = first;
    let mut inner_iters = 1;
    loop {
        let x_next = forward(&y);
        residual = linalg::dist_sq(&y, &x_next).sqrt() / step;
        inner_iters += 1;
        if residual <= 0.25 * tol {
            return certify(x_next, inner_iters);
        }
        if inner_iters >= INNER_CAP {
            return Err(ConjugateError::NoConvergence {
                iterations: INNER_CAP,
                residual,
            });
        }
        for ((yk, &cur), &old) in y.iter_mut().zip(x_next.iter()).zip(x_prev.iter()) {
            *yk = cur + momentum * (cur - old);
        }
        x_prev = x_next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::problem::generate_instance;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Sample-free local problem whose smooth part is exactly `(mu/2)‖x‖²`.
    fn quadratic_local(d: usize, mu: f64, radius: f64) -> LocalProblem {
        LocalProblem::new(DenseMatrix::zeros(0, d), vec![], mu, 1.0, vec![0.0; d], radius)
    }

    fn logistic_local(seed: u64, d: usize, samples: usize, lambda: f64) -> LocalProblem {
        generate_instance(seed, 1, d, samples, lambda)
            .unwrap()
            .locals
            .into_iter()
            .next()
            .unwrap()
    }

    #[test]
    fn pure_quadratic_conjugate_has_closed_form() {
        let mu = 0.8;
        let p = quadratic_local(5, mu, 1e6);
        let w = [0.3, -1.2, 0.0, 2.5, 0.7];
        let out = dual_oracle(&p, &w, 1e-12, None).unwrap();
        let expected: Vec<f64> = w.iter().map(|&v| v / mu).collect();
        assert!(linalg::dist_sq(&out.x, &expected).sqrt() < 1e-9);
        let value_expected = linalg::norm_sq(&w) / (2.0 * mu);
        assert!((out.value - value_expected).abs() < 1e-9);
    }

    #[test]
    fn unit_ball_quadratic_conjugate() {
        let p = quadratic_local(4, 1.0, 1.0);
        let w = [2.0, 0.0, 0.0, 0.0];
        let out = dual_oracle(&p, &w, 1e-12, None).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-10);
        assert!(out.x[1..].iter().all(|&v| v.abs() < 1e-10));
        assert!((out.value - 1.5).abs() < 1e-10);
    }

    #[test]
    fn gradient_equals_maximizer_exactly() {
        let p = logistic_local(4, 6, 4, 0.5);
        let w = vec![0.2; 6];
        let out = dual_oracle(&p, &w, 1e-10, None).unwrap();
        assert_eq!(out.x, out.grad);
    }

    #[test]
    fn gradient_is_smooth_in_w() {
        let p = logistic_local(8, 8, 6, 0.3);
        let tol = 1e-10;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let w: Vec<f64> = (0..8).map(|_| 4.0 * (rng.gen::<f64>() - 0.5)).collect();
            let u: Vec<f64> = (0..8).map(|_| 4.0 * (rng.gen::<f64>() - 0.5)).collect();
            let gw = dual_oracle(&p, &w, tol, None).unwrap().grad;
            let gu = dual_oracle(&p, &u, tol, None).unwrap().grad;
            let lhs = linalg::dist_sq(&gw, &gu).sqrt();
            let rhs = linalg::dist_sq(&w, &u).sqrt() / p.mu + 2.0 * tol;
            assert!(lhs <= rhs, "smoothness violated: {lhs} > {rhs}");
        }
    }

    #[test]
    fn fenchel_young_identity_holds() {
        let p = logistic_local(12, 5, 8, 0.4);
        let tol = 1e-10;
        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for _ in 0..25 {
            let w: Vec<f64> = (0..5).map(|_| 3.0 * (rng.gen::<f64>() - 0.5)).collect();
            let out = dual_oracle(&p, &w, tol, None).unwrap();
            let f_at_x = p.eval_local(&out.x);
            assert!(f_at_x.is_finite(), "maximizer must be feasible");
            let defect = out.value + f_at_x - linalg::dot(&w, &out.x);
            assert!(defect.abs() <= 10.0 * tol);
        }
    }

    #[test]
    fn gradient_is_monotone() {
        let p = logistic_local(19, 6, 4, 0.2);
        let tol = 1e-10;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..25 {
            let w: Vec<f64> = (0..6).map(|_| 2.0 * (rng.gen::<f64>() - 0.5)).collect();
            let u: Vec<f64> = (0..6).map(|_| 2.0 * (rng.gen::<f64>() - 0.5)).collect();
            let gw = dual_oracle(&p, &w, tol, None).unwrap().grad;
            let gu = dual_oracle(&p, &u, tol, None).unwrap().grad;
            let diff_w: Vec<f64> = w.iter().zip(u.iter()).map(|(&a, &b)| a - b).collect();
            let diff_g: Vec<f64> = gw.iter().zip(gu.iter()).map(|(&a, &b)| a - b).collect();
            assert!(linalg::dot(&diff_g, &diff_w) >= -10.0 * tol);
        }
    }

    #[test]
    fn warm_and_cold_starts_agree() {
        let p = logistic_local(23, 7, 4, 1.0);
        let tol = 1e-10;
        let w: Vec<f64> = (0..7).map(|k| 0.3 * (k as f64) - 1.0).collect();
        let cold = dual_oracle(&p, &w, tol, None).unwrap();
        assert!(cold.inner_iters > 0);

        let shifted: Vec<f64> = w.iter().map(|&v| v + 0.01).collect();
        let cold2 = dual_oracle(&p, &shifted, tol, None).unwrap();
        let warm2 = dual_oracle(&p, &shifted, tol, Some(&cold.x)).unwrap();
        assert!(linalg::dist_sq(&cold2.x, &warm2.x).sqrt() <= 10.0 * tol);
        assert!(warm2.inner_iters <= cold2.inner_iters);

        let rewarm = dual_oracle(&p, &shifted, tol, Some(&warm2.x)).unwrap();
        assert_eq!(rewarm.inner_iters, 0, "converged start certifies immediately");
    }

    #[test]
    fn ill_conditioned_inner_solve_reports_failure() {
        let mut p = logistic_local(3, 4, 4, 1e-12);
        p.ball_radius = 1e30;
        let w = vec![50.0, -30.0, 20.0, 10.0];
        match dual_oracle(&p, &w, 1e-10, None) {
            Err(ConjugateError::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 100_000);
                assert!(residual > 1e-10);
            }
            Ok(_) => panic!("expected the inner solve to stall"),
        }
    }
}
