//! Small dense linear-algebra kernels.
//!
//! Everything here is sized for desk-scale problems (matrices up to a few
//! hundred rows), so the kernels favor simplicity and determinism over
//! asymptotic speed: a partially pivoted LU for the saddle-point solve and
//! cyclic Jacobi sweeps for symmetric eigenvalues.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    /// The saddle-point system could not be solved to acceptable accuracy.
    #[error("equality-constrained least-squares system is numerically singular")]
    SingularSystem,
    /// The Laplacian's spectral gap is numerically zero.
    #[error("graph Laplacian has no positive connectivity eigenvalue")]
    NotConnected,
}

/// Dense row-major matrix of `f64` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from a row-major entry slice; `data.len()` must equal `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must match dimensions");
        debug_assert!(data.iter().all(|v| v.is_finite()), "matrix entries must be finite");
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        DenseMatrix::from_row_major(r, c, rows.concat())
    }

    /// Builds a matrix whose `k`-th column is `columns[k]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|col| col.len() == r), "ragged columns");
        let mut m = DenseMatrix::zeros(r, c);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn add_assign_at(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Gram matrix `AᵀA` (symmetric `cols × cols`).
    pub fn gram(&self) -> DenseMatrix {
        let p = self.cols;
        let mut g = DenseMatrix::zeros(p, p);
        for k in 0..self.rows {
            let row = self.row(k);
            for i in 0..p {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..p {
                    g.add_assign_at(i, j, ri * row[j]);
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                let v = g.get(j, i);
                g.set(i, j, v);
            }
        }
        g
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// Euclidean distance squared between two equally sized slices.
#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Solves `min_z ‖M z‖² + ridge·‖z‖²  s.t.  A z = c` through the saddle-point
/// (KKT) system
///
/// ```text
/// [ 2(MᵀM + ridge·I)   Aᵀ ] [ z ]   [ 0 ]
/// [        A           0  ] [ ν ] = [ c ]
/// ```
///
/// factored by partially pivoted LU. When the factorization reports
/// near-singularity the solve is retried once in regularized form: a ridge of
/// `1e-10 · trace(MᵀM)/p` (if the caller passed zero) and a `−δ·I` block in
/// the constraint corner, which makes the system quasi-definite and therefore
/// factorable even when `A` carries redundant rows. Redundant-but-consistent
/// constraints are routine for this solver's callers; genuinely inconsistent
/// ones still fail the final residual gate: solutions whose constraint
/// residual exceeds `1e-6 · (1 + ‖c‖)` are rejected as
/// [`LinalgError::SingularSystem`].
pub fn solve_eq_constrained_lsq(
    m: &DenseMatrix,
    a: &DenseMatrix,
    c: &[f64],
    ridge: f64,
) -> Result<Vec<f64>, LinalgError> {
    let p = m.cols();
    assert_eq!(a.cols(), p, "objective and constraint column counts must agree");
    assert_eq!(c.len(), a.rows(), "constraint right-hand side length mismatch");
    assert!(ridge >= 0.0 && ridge.is_finite(), "ridge must be a finite nonnegative value");

    match kkt_solve(m, a, c, ridge, 0.0) {
        Ok(z) => Ok(z),
        Err(LinalgError::SingularSystem) => {
            let primal = if ridge > 0.0 {
                ridge
            } else {
                1e-10 * m.gram().trace() / p.max(1) as f64
            };
            let dual = 1e-10 * (1.0 + a.max_abs());
            if primal > 0.0 {
                kkt_solve(m, a, c, primal, dual)
            } else {
                Err(LinalgError::SingularSystem)
            }
        }
        err => err,
    }
}

fn kkt_solve(
    m: &DenseMatrix,
    a: &DenseMatrix,
    c: &[f64],
    ridge: f64,
    constraint_reg: f64,
) -> Result<Vec<f64>, LinalgError> {
    let p = m.cols();
    let r = a.rows();
    let dim = p + r;
    let gram = m.gram();

    let mut k = DenseMatrix::zeros(dim, dim);
    for i in 0..p {
        for j in 0..p {
            k.set(i, j, 2.0 * gram.get(i, j));
        }
        k.add_assign_at(i, i, 2.0 * ridge);
    }
    for i in 0..r {
        for j in 0..p {
            let v = a.get(i, j);
            k.set(p + i, j, v);
            k.set(j, p + i, v);
        }
        k.set(p + i, p + i, -constraint_reg);
    }

    let mut rhs = vec![0.0; dim];
    rhs[p..].copy_from_slice(c);

    let factor = LuFactor::new(k.clone())?;
    let mut sol = factor.solve(&rhs)?;
    // two rounds of iterative refinement recover accuracy lost to the
    // saddle-point system's squared conditioning
    for _ in 0..2 {
        let mut resid = rhs.clone();
        for (i, r) in resid.iter_mut().enumerate() {
            *r -= dot(k.row(i), &sol);
        }
        let delta = factor.solve(&resid)?;
        for (s, d) in sol.iter_mut().zip(&delta) {
            *s += d;
        }
    }
    let z = sol[..p].to_vec();
    if !z.iter().all(|v| v.is_finite()) {
        return Err(LinalgError::SingularSystem);
    }
    let az = a.matvec(&z);
    let resid: f64 = dist_sq(&az, c).sqrt();
    if resid > 1e-6 * (1.0 + norm(c)) {
        return Err(LinalgError::SingularSystem);
    }
    Ok(z)
}

/// LU factorization with partial pivoting; declares near-singularity when the
/// best available pivot falls below `1e-13` times the largest initial entry.
struct LuFactor {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactor {
    fn new(mut k: DenseMatrix) -> Result<Self, LinalgError> {
        let n = k.rows();
        assert_eq!(k.cols(), n);
        let mut perm: Vec<usize> = (0..n).collect();
        if n == 0 {
            return Ok(LuFactor { lu: k, perm });
        }
        let scale = k.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(LinalgError::SingularSystem);
        }
        let pivot_floor = 1e-13 * scale;

        for col in 0..n {
            let (piv_row, piv_abs) = (col..n)
                .map(|row| (row, k.get(row, col).abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            if piv_abs <= pivot_floor {
                return Err(LinalgError::SingularSystem);
            }
            if piv_row != col {
                for j in 0..n {
                    let tmp = k.get(col, j);
                    k.set(col, j, k.get(piv_row, j));
                    k.set(piv_row, j, tmp);
                }
                perm.swap(col, piv_row);
            }
            let pivot = k.get(col, col);
            for row in col + 1..n {
                let factor = k.get(row, col) / pivot;
                k.set(row, col, factor);
                if factor == 0.0 {
                    continue;
                }
                for j in col + 1..n {
                    let v = k.get(row, j) - factor * k.get(col, j);
                    k.set(row, j, v);
                }
            }
        }
        Ok(LuFactor { lu: k, perm })
    }

    fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let n = self.lu.rows();
        assert_eq!(rhs.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for row in 1..n {
            let mut acc = x[row];
            for j in 0..row {
                acc -= self.lu.get(row, j) * x[j];
            }
            x[row] = acc;
        }
        for row in (0..n).rev() {
            let mut acc = x[row];
            for j in row + 1..n {
                acc -= self.lu.get(row, j) * x[j];
            }
            x[row] = acc / self.lu.get(row, row);
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(LinalgError::SingularSystem)
        }
    }
}

/// Smallest eigenvalue of a symmetric graph Laplacian restricted to the
/// subspace orthogonal to the all-ones vector (the algebraic connectivity).
///
/// The trivial eigenpair is deflated by adding `shift · 𝟙𝟙ᵀ/n` with a shift
/// above the Gershgorin bound on the spectrum, after which a full Jacobi
/// eigendecomposition makes the connectivity eigenvalue the global minimum.
/// Values below `1e-10` report [`LinalgError::NotConnected`].
pub fn smallest_nonzero_laplacian_eig(l: &DenseMatrix) -> Result<f64, LinalgError> {
    let n = l.rows();
    assert_eq!(l.cols(), n, "Laplacian must be square");
    assert!(n >= 2, "connectivity eigenvalue needs at least two nodes");

    let max_diag = (0..n).map(|i| l.get(i, i)).fold(0.0_f64, f64::max);
    let shift = 2.0 * max_diag + 1.0;
    let bump = shift / n as f64;
    let mut deflated = l.clone();
    for i in 0..n {
        for j in 0..n {
            deflated.add_assign_at(i, j, bump);
        }
    }

    let eigs = jacobi_eigenvalues(&deflated);
    let lambda = eigs.into_iter().fold(f64::INFINITY, f64::min);
    if lambda < 1e-10 {
        Err(LinalgError::NotConnected)
    } else {
        Ok(lambda)
    }
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.clone();
    let frob: f64 = m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1e-14 * (1.0 + frob);

    for _sweep in 0..60 {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in p + 1..n {
                    s += m.get(p, q) * m.get(p, q);
                }
            }
            (2.0 * s).sqrt()
        };
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // smaller-magnitude root of t² + 2θt − 1 = 0 for stability
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    (0..n).map(|i| m.get(i, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn to_na(m: &DenseMatrix) -> DMatrix<f64> {
        DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
    }

    /// Independent route: parametrize the feasible set as `z₀ + N y` with `N`
    /// a nullspace basis of `A` from an SVD, then solve the reduced
    /// unconstrained normal equations.
    fn nullspace_reduction_lsq(
        m: &DenseMatrix,
        a: &DenseMatrix,
        c: &[f64],
        ridge: f64,
    ) -> Vec<f64> {
        let na_m = to_na(m);
        let na_a = to_na(a);
        let nc = DVector::from_column_slice(c);
        let z0 = na_a.clone().svd(true, true).solve(&nc, 1e-12).expect("particular solution");

        // nullspace of A from the near-zero eigenspace of AᵀA
        let p = a.cols();
        let eig = (na_a.transpose() * &na_a).symmetric_eigen();
        let null_cols: Vec<usize> =
            (0..p).filter(|&k| eig.eigenvalues[k].abs() <= 1e-10).collect();
        let null_dim = null_cols.len();
        let mut n_basis = DMatrix::zeros(p, null_dim);
        for (col, &k) in null_cols.iter().enumerate() {
            for i in 0..p {
                n_basis[(i, col)] = eig.eigenvectors[(i, k)];
            }
        }
        if null_dim == 0 {
            return z0.iter().copied().collect();
        }

        // min over y of ‖M(z0+Ny)‖² + ridge ‖z0+Ny‖², solved as one stacked
        // least-squares problem so no conditioning is lost to normal equations
        let q = m.rows();
        let sr = ridge.sqrt();
        let mut stacked = DMatrix::zeros(q + p, null_dim);
        let mut rhs = DVector::zeros(q + p);
        let mn = &na_m * &n_basis;
        let mz0 = &na_m * &z0;
        for i in 0..q {
            for j in 0..null_dim {
                stacked[(i, j)] = mn[(i, j)];
            }
            rhs[i] = -mz0[i];
        }
        for i in 0..p {
            for j in 0..null_dim {
                stacked[(q + i, j)] = sr * n_basis[(i, j)];
            }
            rhs[q + i] = -sr * z0[i];
        }
        let y = stacked.svd(true, true).solve(&rhs, 1e-14).expect("reduced solve");
        let z = z0 + n_basis * y;
        z.iter().copied().collect()
    }

    #[test]
    fn fully_constrained_single_variable() {
        let m = DenseMatrix::from_row_major(1, 1, vec![1.0]);
        let a = DenseMatrix::from_row_major(1, 1, vec![1.0]);
        let z = solve_eq_constrained_lsq(&m, &a, &[5.0], 0.0).unwrap();
        assert!((z[0] - 5.0).abs() < 1e-12, "constraint forces z = 5, got {}", z[0]);
    }

    #[test]
    fn zero_objective_splits_budget_evenly() {
        let m = DenseMatrix::zeros(2, 2);
        let a = DenseMatrix::from_row_major(1, 2, vec![1.0, 1.0]);
        let z = solve_eq_constrained_lsq(&m, &a, &[1.0], 1e-10).unwrap();
        assert!((z[0] - 0.5).abs() < 1e-9, "minimum-norm split, got {:?}", z);
        assert!((z[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn matches_nullspace_reduction_on_random_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let m = DenseMatrix::from_row_major(
                4,
                6,
                (0..24).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            let a = DenseMatrix::from_row_major(
                2,
                6,
                vec![1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0],
            );
            let c = [1.0, 0.0];
            let z = solve_eq_constrained_lsq(&m, &a, &c, 0.0).unwrap();
            let z_oracle = nullspace_reduction_lsq(&m, &a, &c, 0.0);

            let err = dist_sq(&z, &z_oracle).sqrt();
            let scale = 1.0 + norm(&z_oracle);
            assert!(err < 1e-8 * scale, "trial {trial}: routes disagree by {err:.3e}");
        }
    }

    #[test]
    fn constraint_residual_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = DenseMatrix::from_row_major(
            5,
            4,
            (0..20).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        );
        let a = DenseMatrix::from_row_major(1, 4, vec![1.0, 1.0, 1.0, 1.0]);
        let c = [2.0];
        let z = solve_eq_constrained_lsq(&m, &a, &c, 0.0).unwrap();
        let resid = (a.matvec(&z)[0] - c[0]).abs();
        assert!(resid <= 1e-6 * (1.0 + norm(&c)), "residual {resid:.3e} too large");
    }

    #[test]
    fn no_feasible_direction_beats_solution() {
        // optimality: z minimizes over the feasible affine set, so any sampled
        // feasible point must score at least as well (up to 1e-8 slack)
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DenseMatrix::from_row_major(
            3,
            5,
            (0..15).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        );
        let a = DenseMatrix::from_row_major(1, 5, vec![1.0; 5]);
        let c = [1.0];
        let ridge = 1e-8;
        let z = solve_eq_constrained_lsq(&m, &a, &c, ridge).unwrap();
        let objective = |v: &[f64]| norm_sq(&m.matvec(v)) + ridge * norm_sq(v);
        let base = objective(&z);
        for _ in 0..50 {
            // feasible perturbations: add a zero-sum direction
            let mut dir: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mean = dir.iter().sum::<f64>() / 5.0;
            dir.iter_mut().for_each(|v| *v -= mean);
            let other: Vec<f64> = z.iter().zip(&dir).map(|(a, b)| a + b).collect();
            assert!(
                objective(&other) >= base - 1e-8,
                "sampled feasible point beat the solver: {} < {}",
                objective(&other),
                base
            );
        }
    }

    #[test]
    fn singular_system_is_reported() {
        // A has a repeated row with inconsistent right-hand side
        let m = DenseMatrix::zeros(1, 2);
        let a = DenseMatrix::from_row_major(2, 2, vec![1.0, 1.0, 1.0, 1.0]);
        let got = solve_eq_constrained_lsq(&m, &a, &[1.0, 2.0], 0.0);
        assert_eq!(got, Err(LinalgError::SingularSystem));
    }

    #[test]
    fn ridge_retry_recovers_rank_deficient_objective() {
        // duplicate objective columns make MᵀM singular with a free feasible
        // direction; the internal ridge retry must still return a solution
        let m = DenseMatrix::from_row_major(2, 3, vec![1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let a = DenseMatrix::from_row_major(1, 3, vec![1.0, 1.0, 1.0]);
        let z = solve_eq_constrained_lsq(&m, &a, &[3.0], 0.0).unwrap();
        let sum: f64 = z.iter().sum();
        assert!((sum - 3.0).abs() < 1e-8, "constraint violated: {:?}", z);
    }

    #[test]
    fn path_graph_connectivity_eigenvalue() {
        let l = DenseMatrix::from_row_major(2, 2, vec![1.0, -1.0, -1.0, 1.0]);
        let lam = smallest_nonzero_laplacian_eig(&l).unwrap();
        assert!((lam - 2.0).abs() < 1e-8 * 2.0, "two-node path has gap 2, got {lam}");
    }

    #[test]
    fn complete_graph_connectivity_eigenvalue() {
        let n = 4;
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                l.set(i, j, if i == j { (n - 1) as f64 } else { -1.0 });
            }
        }
        let lam = smallest_nonzero_laplacian_eig(&l).unwrap();
        assert!((lam - 4.0).abs() < 1e-8 * 4.0, "K4 has gap 4, got {lam}");
    }

    #[test]
    fn disconnected_graph_is_detected() {
        // two isolated edges
        let mut l = DenseMatrix::zeros(4, 4);
        for (i, j) in [(0, 1), (2, 3)] {
            l.set(i, i, 1.0);
            l.set(j, j, 1.0);
            l.set(i, j, -1.0);
            l.set(j, i, -1.0);
        }
        assert_eq!(smallest_nonzero_laplacian_eig(&l), Err(LinalgError::NotConnected));
    }

    fn random_connected_laplacian(rng: &mut ChaCha8Rng, n: usize) -> DenseMatrix {
        let mut l = DenseMatrix::zeros(n, n);
        let add_edge = |l: &mut DenseMatrix, i: usize, j: usize| {
            l.add_assign_at(i, i, 1.0);
            l.add_assign_at(j, j, 1.0);
            l.add_assign_at(i, j, -1.0);
            l.add_assign_at(j, i, -1.0);
        };
        for j in 1..n {
            let i = rng.gen_range(0..j);
            add_edge(&mut l, i, j);
        }
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen::<f64>() < 0.3 {
                    add_edge(&mut l, i, j);
                }
            }
        }
        l
    }

    #[test]
    fn random_laplacian_matches_dense_eigensolver() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let l = random_connected_laplacian(&mut rng, 6);
            let lam = smallest_nonzero_laplacian_eig(&l).unwrap();
            let mut eigs: Vec<f64> =
                to_na(&l).symmetric_eigen().eigenvalues.iter().copied().collect();
            eigs.sort_by(f64::total_cmp);
            let oracle = eigs[1];
            assert!(
                (lam - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()),
                "jacobi {lam} vs eigensolver {oracle}"
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn eigenvalue_scales_linearly(seed in 0u64..500, scale in 0.1f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = random_connected_laplacian(&mut rng, 5);
            let mut scaled = l.clone();
            for i in 0..5 {
                for j in 0..5 {
                    scaled.set(i, j, scale * l.get(i, j));
                }
            }
            let base = smallest_nonzero_laplacian_eig(&l).unwrap();
            let got = smallest_nonzero_laplacian_eig(&scaled).unwrap();
            prop_assert!(
                (got - scale * base).abs() <= 1e-12 * (1.0 + scale * base),
                "eig(cL) = {} but c·eig(L) = {}", got, scale * base
            );
        }

        #[test]
        fn solutions_stay_feasible(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = DenseMatrix::from_row_major(
                3, 4, (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            );
            let a = DenseMatrix::from_row_major(1, 4, vec![1.0; 4]);
            let c = [rng.gen_range(-2.0..2.0)];
            if let Ok(z) = solve_eq_constrained_lsq(&m, &a, &c, 0.0) {
                let resid = (a.matvec(&z)[0] - c[0]).abs();
                prop_assert!(resid <= 1e-6 * (1.0 + c[0].abs()));
            }
        }
    }
}
