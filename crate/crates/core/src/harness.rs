//! Experiment orchestration: configuration, run loops, certificate auditing,
//! metrics, and artifact output.
//!
//! The dual methods share one engine: every iteration queries each node's
//! dual oracle (warm-started), emits a metrics row, updates the active edges
//! — plain gradient halves or safeguarded accelerated candidates — audits the
//! per-edge descent certificate on freshly evaluated dual values, and
//! aggregates. A certificate failure is a hard error carrying the offending
//! edge and bounds: the runtime guarantee is the point of the method, so a
//! violation means a bug or an oracle tolerance too loose to audit at the
//! requested slack.

use crate::anderson::{
    check_descent_certificate, edge_update, ExactEvaluator, PairMemory, SafeguardMode,
    SafeguardParams,
};
use crate::baselines::{dps_iteration, PrimalState};
use crate::conjugate::{dual_oracle, ConjugateError};
use crate::fdgm::{aggregate, edge_gradient_step, DualState};
use crate::linalg;
use crate::network::{generate_periodic_schedule, GraphSchedule, NetworkError, ScheduleDocument};
use crate::problem::{generate_instance, InstanceDocument, ProblemError, ProblemInstance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// Tolerance used when solving the centralized reference problem.
const REFERENCE_TOL: f64 = 1e-10;
/// Probability of keeping each non-tree edge when generating the base graph.
const EXTRA_EDGE_PROB: f64 = 0.1;
/// Decorrelates the schedule's random stream from the instance's.
const SCHEDULE_SEED_SALT: u64 = 0xA5C3_9E1B_7D42_06F8;
/// Certificate slack is this factor times oracle tolerance times value scale.
const CERT_SLACK_FACTOR: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Oracle(#[from] ConjugateError),
    #[error(
        "descent certificate violated at iteration {iteration}, edge ({i}, {j}): \
         dual change {decrease:.6e} exceeds bound {bound:.6e} + slack {slack:.3e}"
    )]
    CertificateViolation {
        iteration: usize,
        i: usize,
        j: usize,
        decrease: f64,
        bound: f64,
        slack: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Fdgm,
    FdgmAa,
    Dps,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Fdgm => "fdgm",
            Algorithm::FdgmAa => "fdgm_aa",
            Algorithm::Dps => "dps",
        }
    }
}

fn default_memory() -> usize {
    40
}
fn default_safeguard() -> SafeguardMode {
    SafeguardMode::Simple
}
fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Fdgm, Algorithm::FdgmAa, Algorithm::Dps]
}
fn default_iters() -> usize {
    2000
}
fn default_oracle_tol() -> f64 {
    1e-10
}
fn default_dps_step() -> f64 {
    1.0
}

/// One experiment's full parameterization. Loaded from JSON with
/// lower_snake_case keys; omitted optional fields take the documented
/// defaults, and `beta`/`c1`/`c2` default to the step-size-derived values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub samples_per_node: usize,
    pub lambda: f64,
    /// Connectivity window: the schedule is periodic with this period and
    /// every window of this many consecutive slots has a connected union.
    pub period: usize,
    #[serde(default = "default_memory")]
    pub memory: usize,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub c2: Option<f64>,
    #[serde(default = "default_safeguard")]
    pub safeguard_mode: SafeguardMode,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_iters")]
    pub iters: usize,
    #[serde(default = "default_oracle_tol")]
    pub oracle_tol: f64,
    #[serde(default = "default_dps_step")]
    pub dps_step: f64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let fail = |msg: String| Err(HarnessError::InvalidConfig(msg));
        if self.n < 2 {
            return fail(format!("n = {} but at least two nodes are required", self.n));
        }
        if self.d == 0 {
            return fail("d must be positive".into());
        }
        if self.samples_per_node == 0 || self.samples_per_node % 2 != 0 {
            return fail(format!(
                "samples_per_node = {} must be positive and even",
                self.samples_per_node
            ));
        }
        if !(self.lambda > 0.0) {
            return fail(format!("lambda = {} must be positive", self.lambda));
        }
        if self.period == 0 {
            return fail("period must be at least 1".into());
        }
        if self.memory == 0 {
            return fail("memory must be at least 1".into());
        }
        if !(self.oracle_tol > 0.0) {
            return fail(format!("oracle_tol = {} must be positive", self.oracle_tol));
        }
        if self.dps_step < 0.0 {
            return fail(format!("dps_step = {} must be nonnegative", self.dps_step));
        }
        let beta = self.resolved_beta();
        if !(beta > 0.0 && beta < self.lambda) {
            return fail(format!(
                "beta = {beta} must lie strictly inside (0, lambda = {}): the dual \
                 gradients are (1/lambda)-Lipschitz",
                self.lambda
            ));
        }
        for (name, v) in [("c1", self.c1), ("c2", self.c2)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return fail(format!("{name} = {v} must be positive"));
                }
            }
        }
        if self.algorithms.is_empty() {
            return fail("algorithms must not be empty".into());
        }
        for (idx, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..idx].contains(a) {
                return fail(format!("algorithm '{}' listed twice", a.label()));
            }
        }
        Ok(())
    }

    /// Step size: the configured value, or 90% of the stability limit.
    pub fn resolved_beta(&self) -> f64 {
        self.beta.unwrap_or(0.9 * self.lambda)
    }

    /// Smoothness constant of each node's dual: 1/lambda.
    pub fn dual_smoothness(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn safeguard_params(&self) -> SafeguardParams {
        let mut p = SafeguardParams::from_step(self.resolved_beta(), self.dual_smoothness());
        if let Some(c1) = self.c1 {
            p.c1 = c1;
        }
        if let Some(c2) = self.c2 {
            p.c2 = c2;
        }
        p
    }
}

/// One iteration's logged metrics. Dual-side columns are `None` for the
/// primal baseline; `accept_rate` is `None` until the first accelerated
/// update and for the non-accelerated methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub iter: usize,
    pub dual_value: Option<f64>,
    pub dual_gap: Option<f64>,
    pub primal_error: f64,
    pub func_gap: f64,
    pub consensus_violation: f64,
    pub conservation_residual: Option<f64>,
    pub accept_rate: Option<f64>,
}

/// Per-edge record of one iteration's gradient gap, enough to replay the
/// aggregate descent bound after the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDescentRecord {
    pub i: usize,
    pub j: usize,
    pub h: f64,
    pub grad_diff_sq: f64,
}

/// Everything a run produces beyond its side-effect-free metrics: per-edge
/// descent logs (one entry per iteration), periodic stacked-iterate
/// snapshots, and the per-iteration max row norm backing the conservation
/// bound. The primal baseline leaves the dual-side vectors empty.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub edge_logs: Vec<Vec<EdgeDescentRecord>>,
    pub snapshots: Vec<Vec<f64>>,
    pub max_w_norms: Vec<f64>,
}

/// The convergence-rate constants of the configured experiment, plus an
/// empirical lower estimate of the initial-distance constant taken from
/// observed iterates (the true value is not computable).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateConstants {
    pub l: f64,
    pub beta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub h_lower: f64,
    pub b: usize,
    pub eta_tilde: f64,
    pub lambda_lower: f64,
    pub tau: f64,
    pub r0_estimate: f64,
}

/// The rate constant `3·B·L²·η̃/θ₂ + 3/(h̲·θ₁)`.
pub fn tau_bound(b: usize, l: f64, eta_tilde: f64, theta1: f64, theta2: f64, h_lower: f64) -> f64 {
    3.0 * b as f64 * l * l * eta_tilde / theta2 + 3.0 / (h_lower * theta1)
}

/// Generates the problem instance (with its centralized reference solution)
/// and the periodic connectivity schedule for a validated configuration.
pub fn build_experiment(
    config: &ExperimentConfig,
) -> Result<(ProblemInstance, GraphSchedule), HarnessError> {
    config.validate()?;
    let mut instance = generate_instance(
        config.seed,
        config.n,
        config.d,
        config.samples_per_node,
        config.lambda,
    )?;
    let (x_star, f_star) = instance.solve_reference(REFERENCE_TOL)?;
    instance.reference_solution = Some(x_star);
    instance.reference_value = Some(f_star);
    let schedule = generate_periodic_schedule(
        config.seed ^ SCHEDULE_SEED_SALT,
        config.n,
        config.period,
        EXTRA_EDGE_PROB,
    )?;
    if !schedule.verify_b_connectivity(config.period) {
        return Err(HarnessError::InvalidConfig(
            "generated schedule failed its connectivity check".into(),
        ));
    }
    Ok((instance, schedule))
}

/// Plain dual gradient method from the zero dual state.
///
/// The instance must carry a reference solution (see [`build_experiment`]).
pub fn run_fdgm(
    config: &ExperimentConfig,
    instance: &ProblemInstance,
    schedule: &GraphSchedule,
) -> Result<RunOutput, HarnessError> {
    run_dual(
        config,
        instance,
        schedule,
        false,
        DualState::zeros(config.n, config.d),
    )
}

/// Accelerated dual method from the zero dual state: per-edge memories,
/// safeguarded candidates, plain-step fallback.
pub fn run_fdgm_aa(
    config: &ExperimentConfig,
    instance: &ProblemInstance,
    schedule: &GraphSchedule,
) -> Result<RunOutput, HarnessError> {
    run_dual(
        config,
        instance,
        schedule,
        true,
        DualState::zeros(config.n, config.d),
    )
}

fn run_dual(
    config: &ExperimentConfig,
    instance: &ProblemInstance,
    schedule: &GraphSchedule,
    accelerate: bool,
    mut state: DualState,
) -> Result<RunOutput, HarnessError> {
    let n = config.n;
    let d = config.d;
    let params = config.safeguard_params();
    let tol = config.oracle_tol;
    let iters = config.iters;
    let snap_every = (iters / 100).max(1);
    let x_star = instance
        .reference_solution
        .as_ref()
        .expect("instance must carry a reference solution");
    let f_star = instance
        .reference_value
        .expect("instance must carry a reference value");
    let d_star = -f_star;

    let mut warm: Vec<Option<Vec<f64>>> = vec![None; n];
    let mut memories: BTreeMap<(usize, usize), PairMemory> = BTreeMap::new();
    let mut rows = Vec::with_capacity(iters + 1);
    let mut edge_logs = Vec::with_capacity(iters);
    let mut snapshots = Vec::new();
    let mut max_w_norms = Vec::with_capacity(iters + 1);
    let mut pending_accept: Option<f64> = None;

    for k in 0..=iters {
        let mut results = Vec::with_capacity(n);
        for i in 0..n {
            let res = dual_oracle(&instance.locals[i], &state.w[i], tol, warm[i].as_deref())?;
            warm[i] = Some(res.x.clone());
            results.push(res);
        }
        let dual_value: f64 = results.iter().map(|r| r.value).sum();
        let mut avg = vec![0.0; d];
        for res in &results {
            for r in 0..d {
                avg[r] += res.x[r];
            }
        }
        avg.iter_mut().for_each(|v| *v /= n as f64);
        let primal_error =
            results.iter().map(|r| linalg::dist_sq(&r.x, x_star)).sum::<f64>() / n as f64;
        let consensus_violation =
            results.iter().map(|r| linalg::dist_sq(&r.x, &avg)).sum::<f64>() / n as f64;
        rows.push(MetricsRow {
            iter: k,
            dual_value: Some(dual_value),
            dual_gap: Some(dual_value - d_star),
            primal_error,
            func_gap: (instance.total_value(&avg) - f_star).abs(),
            consensus_violation,
            conservation_residual: Some(state.conservation_residual()),
            accept_rate: pending_accept.take(),
        });
        max_w_norms.push(state.max_row_norm());
        if k % snap_every == 0 || k == iters {
            snapshots.push(state.w.concat());
        }
        if k == iters {
            break;
        }

        let edges = schedule.edges_at(k);
        let grads: Vec<&[f64]> = results.iter().map(|r| r.grad.as_slice()).collect();
        let values: Vec<f64> = results.iter().map(|r| r.value).collect();
        let mut contribs: Vec<Vec<(f64, Vec<f64>)>> = vec![Vec::new(); n];
        let mut log = Vec::with_capacity(edges.len());
        let mut accepted_aa = 0usize;
        for e in edges.iter() {
            let (half_ij, half_ji, genuine_accept) = if accelerate {
                let mem = memories
                    .entry((e.i, e.j))
                    .or_insert_with(|| PairMemory::new(config.memory));
                mem.update(k, &state.w[e.i], grads[e.i], &state.w[e.j], grads[e.j]);
                let out = match config.safeguard_mode {
                    SafeguardMode::Simple => edge_update(
                        mem,
                        &state.w[e.i],
                        &state.w[e.j],
                        grads[e.i],
                        grads[e.j],
                        &params,
                        SafeguardMode::Simple,
                        0.0,
                        None,
                    ),
                    SafeguardMode::Exact => {
                        let mut err_i: Option<ConjugateError> = None;
                        let mut err_j: Option<ConjugateError> = None;
                        let out = {
                            let mut eval_i = |pt: &[f64]| {
                                match dual_oracle(
                                    &instance.locals[e.i],
                                    pt,
                                    tol,
                                    Some(&results[e.i].x),
                                ) {
                                    Ok(r) => r.value,
                                    Err(er) => {
                                        err_i = Some(er);
                                        f64::NAN
                                    }
                                }
                            };
                            let mut eval_j = |pt: &[f64]| {
                                match dual_oracle(
                                    &instance.locals[e.j],
                                    pt,
                                    tol,
                                    Some(&results[e.j].x),
                                ) {
                                    Ok(r) => r.value,
                                    Err(er) => {
                                        err_j = Some(er);
                                        f64::NAN
                                    }
                                }
                            };
                            edge_update(
                                mem,
                                &state.w[e.i],
                                &state.w[e.j],
                                grads[e.i],
                                grads[e.j],
                                &params,
                                SafeguardMode::Exact,
                                0.0,
                                Some(ExactEvaluator {
                                    d_i_current: values[e.i],
                                    d_j_current: values[e.j],
                                    eval_i: &mut eval_i,
                                    eval_j: &mut eval_j,
                                }),
                            )
                        };
                        if let Some(er) = err_i {
                            return Err(er.into());
                        }
                        if let Some(er) = err_j {
                            return Err(er.into());
                        }
                        out
                    }
                };
                (out.half_ij, out.half_ji, out.accepted && !out.fallback)
            } else {
                let (a, b) = edge_gradient_step(
                    &state.w[e.i],
                    &state.w[e.j],
                    grads[e.i],
                    grads[e.j],
                    params.beta,
                );
                (a, b, false)
            };

            log.push(EdgeDescentRecord {
                i: e.i,
                j: e.j,
                h: e.h,
                grad_diff_sq: linalg::dist_sq(grads[e.i], grads[e.j]),
            });

            // Audit on fresh evaluations so a buggy update cannot vouch for
            // itself; these calls leave the warm-start cache untouched.
            let audit_i = dual_oracle(&instance.locals[e.i], &half_ij, tol, Some(&results[e.i].x))?;
            let audit_j = dual_oracle(&instance.locals[e.j], &half_ji, tol, Some(&results[e.j].x))?;
            let slack = CERT_SLACK_FACTOR
                * tol
                * (1.0
                    + values[e.i].abs()
                    + values[e.j].abs()
                    + audit_i.value.abs()
                    + audit_j.value.abs());
            if !check_descent_certificate(
                &state.w[e.i],
                &state.w[e.j],
                &half_ij,
                &half_ji,
                audit_i.value,
                audit_j.value,
                values[e.i],
                values[e.j],
                grads[e.i],
                grads[e.j],
                &params,
                slack,
            ) {
                let decrease = audit_i.value + audit_j.value - values[e.i] - values[e.j];
                let grad_gap = linalg::dist_sq(grads[e.i], grads[e.j]);
                let moved = linalg::dist_sq(&half_ij, &state.w[e.i])
                    + linalg::dist_sq(&half_ji, &state.w[e.j]);
                let bound = (-params.theta1() * grad_gap).min(-params.theta2() * moved);
                return Err(HarnessError::CertificateViolation {
                    iteration: k,
                    i: e.i,
                    j: e.j,
                    decrease,
                    bound,
                    slack,
                });
            }

            if genuine_accept {
                accepted_aa += 1;
            }
            contribs[e.i].push((e.h, half_ij));
            contribs[e.j].push((e.h, half_ji));
        }
        if accelerate && !edges.is_empty() {
            pending_accept = Some(accepted_aa as f64 / edges.len() as f64);
        }
        edge_logs.push(log);

        let w_next: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let views: Vec<(f64, &[f64])> = contribs[i]
                    .iter()
                    .map(|(h, half)| (*h, half.as_slice()))
                    .collect();
                aggregate(&state.w[i], &views)
            })
            .collect();
        state = DualState {
            w: w_next,
            iteration: state.iteration + 1,
        };
    }

    Ok(RunOutput {
        rows,
        edge_logs,
        snapshots,
        max_w_norms,
    })
}

/// Projected subgradient baseline from the ball centers. Dual-side metric
/// columns stay empty; the instance must carry a reference solution.
pub fn run_dps(
    config: &ExperimentConfig,
    instance: &ProblemInstance,
    schedule: &GraphSchedule,
) -> Result<RunOutput, HarnessError> {
    let x_star = instance
        .reference_solution
        .as_ref()
        .expect("instance must carry a reference solution");
    let f_star = instance
        .reference_value
        .expect("instance must carry a reference value");
    let mut state = PrimalState::from_centers(instance);
    let mut rows = Vec::with_capacity(config.iters + 1);
    for k in 0..=config.iters {
        let avg = state.average();
        let primal_error =
            state.x.iter().map(|row| linalg::dist_sq(row, x_star)).sum::<f64>() / config.n as f64;
        rows.push(MetricsRow {
            iter: k,
            dual_value: None,
            dual_gap: None,
            primal_error,
            func_gap: (instance.total_value(&avg) - f_star).abs(),
            consensus_violation: state.consensus_violation(),
            conservation_residual: None,
            accept_rate: None,
        });
        if k == config.iters {
            break;
        }
        state = dps_iteration(
            &state,
            &schedule.edges_at(k),
            instance,
            config.dps_step,
            k + 1,
        );
    }
    Ok(RunOutput {
        rows,
        edge_logs: Vec::new(),
        snapshots: Vec::new(),
        max_w_norms: Vec::new(),
    })
}

/// Evaluates the worst-case rate constants of a configured experiment:
/// weight floor and union-graph connectivity over one schedule period, plus
/// the `tau` bound and an empirical initial-distance estimate from observed
/// iterate snapshots.
pub fn compute_rate_constants(
    config: &ExperimentConfig,
    schedule: &GraphSchedule,
    snapshots: &[Vec<f64>],
) -> RateConstants {
    let b = config.period;
    assert!(
        schedule.verify_b_connectivity(b),
        "rate constants need a connected union over every window"
    );
    let params = config.safeguard_params();

    let mut h_lower = f64::INFINITY;
    for k in 0..schedule.period() {
        for e in schedule.edges_at(k).iter() {
            h_lower = h_lower.min(e.h);
        }
    }

    let mut eta_tilde = 0.0f64;
    for t in 0..schedule.period() {
        let lap = schedule.union_laplacian(t * b, b);
        for i in 0..config.n {
            eta_tilde = eta_tilde.max(lap.get(i, i));
        }
    }

    let mut lambda_lower = f64::INFINITY;
    for offset in 0..schedule.period() {
        let lap = schedule.union_laplacian(offset, b);
        let eig = linalg::smallest_nonzero_laplacian_eig(&lap)
            .expect("connected union window");
        lambda_lower = lambda_lower.min(eig);
    }

    let mut r0_estimate = 0.0f64;
    for (idx, a) in snapshots.iter().enumerate() {
        for other in snapshots.iter().skip(idx + 1) {
            r0_estimate = r0_estimate.max(linalg::dist_sq(a, other).sqrt());
        }
    }

    let l = config.dual_smoothness();
    RateConstants {
        l,
        beta: params.beta,
        theta1: params.theta1(),
        theta2: params.theta2(),
        h_lower,
        b,
        eta_tilde,
        lambda_lower,
        tau: tau_bound(b, l, eta_tilde, params.theta1(), params.theta2(), h_lower),
        r0_estimate,
    }
}

/// Replays the aggregate per-iteration descent bound from the logged edge
/// gradient gaps: every dual decrease must be at least `theta1` times the
/// weighted sum of squared gradient differences, up to `slack`.
pub fn audit_accumulated_descent(
    rows: &[MetricsRow],
    edge_logs: &[Vec<EdgeDescentRecord>],
    theta1: f64,
    slack: f64,
) -> bool {
    if rows.len() != edge_logs.len() + 1 {
        return false;
    }
    for (k, log) in edge_logs.iter().enumerate() {
        let (Some(d0), Some(d1)) = (rows[k].dual_value, rows[k + 1].dual_value) else {
            return false;
        };
        let weighted_gap: f64 = log.iter().map(|r| r.h * r.grad_diff_sq).sum();
        if d1 - d0 > -theta1 * weighted_gap + slack {
            return false;
        }
    }
    true
}

pub const CSV_HEADER: &str =
    "iter,dual_value,dual_gap,primal_error,func_gap,consensus_violation,conservation_residual,accept_rate";

fn csv_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_opt(v: Option<f64>) -> String {
    v.map(csv_real).unwrap_or_default()
}

/// Writes metrics as CSV: pinned header, one row per iteration, reals at 17
/// significant digits (exact round-trip), not-applicable as empty fields.
pub fn write_csv(rows: &[MetricsRow], path: &Path) -> Result<(), HarnessError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.iter,
            csv_opt(row.dual_value),
            csv_opt(row.dual_gap),
            csv_real(row.primal_error),
            csv_real(row.func_gap),
            csv_real(row.consensus_violation),
            csv_opt(row.conservation_residual),
            csv_opt(row.accept_rate),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Instance plus schedule, written next to run outputs so an experiment can
/// be reloaded byte-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSnapshot {
    pub instance: InstanceDocument,
    pub schedule: ScheduleDocument,
}

/// Paths produced by [`execute_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    pub csv_paths: Vec<PathBuf>,
    pub snapshot_path: PathBuf,
    pub constants_path: PathBuf,
}

/// Runs every configured algorithm and writes one CSV per algorithm, the
/// instance/schedule snapshot, and the rate-constants JSON into `out_dir`.
pub fn execute_run(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts, HarnessError> {
    let (instance, schedule) = build_experiment(config)?;
    fs::create_dir_all(out_dir)?;
    let mut csv_paths = Vec::new();
    let mut r0_snapshots: Vec<Vec<f64>> = Vec::new();
    for algo in &config.algorithms {
        let output = match algo {
            Algorithm::Fdgm => run_fdgm(config, &instance, &schedule)?,
            Algorithm::FdgmAa => run_fdgm_aa(config, &instance, &schedule)?,
            Algorithm::Dps => run_dps(config, &instance, &schedule)?,
        };
        let path = out_dir.join(format!("{}.csv", algo.label()));
        write_csv(&output.rows, &path)?;
        csv_paths.push(path);
        if !output.snapshots.is_empty()
            && (r0_snapshots.is_empty() || *algo == Algorithm::FdgmAa)
        {
            r0_snapshots = output.snapshots;
        }
    }

    let snapshot_path = out_dir.join("instance.json");
    let snapshot = ExperimentSnapshot {
        instance: instance.to_document(),
        schedule: schedule.to_document(),
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(&snapshot_path)?), &snapshot)?;

    let constants_path = out_dir.join("rate_constants.json");
    let constants = compute_rate_constants(config, &schedule, &r0_snapshots);
    serde_json::to_writer_pretty(BufWriter::new(File::create(&constants_path)?), &constants)?;

    Ok(RunArtifacts {
        out_dir: out_dir.to_path_buf(),
        csv_paths,
        snapshot_path,
        constants_path,
    })
}

#[derive(Debug, Clone)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(VerifyCheck {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }
}

/// Runs the configured dual algorithms and audits every runtime guarantee:
/// per-edge certificates (inherent to the run), dual monotonicity,
/// conservation, accumulated descent, and the primal–dual distance bound.
pub fn execute_verify(config: &ExperimentConfig) -> Result<VerifyReport, HarnessError> {
    let (instance, schedule) = build_experiment(config)?;
    let params = config.safeguard_params();
    let tol = config.oracle_tol;
    let l = config.dual_smoothness();
    let mut report = VerifyReport::default();

    for algo in &config.algorithms {
        let label = algo.label();
        let output = match algo {
            Algorithm::Fdgm => run_fdgm(config, &instance, &schedule),
            Algorithm::FdgmAa => run_fdgm_aa(config, &instance, &schedule),
            Algorithm::Dps => continue,
        };
        let output = match output {
            Ok(out) => {
                report.push(
                    format!("{label}: edge descent certificates"),
                    true,
                    "held at every edge update",
                );
                out
            }
            Err(e @ HarnessError::CertificateViolation { .. }) => {
                report.push(format!("{label}: edge descent certificates"), false, e.to_string());
                continue;
            }
            Err(e) => return Err(e),
        };

        let mut mono_ok = true;
        let mut mono_detail = String::from("dual value nonincreasing");
        for pair in output.rows.windows(2) {
            let (d0, d1) = (pair[0].dual_value.unwrap(), pair[1].dual_value.unwrap());
            if d1 > d0 + 10.0 * tol {
                mono_ok = false;
                mono_detail = format!(
                    "rose from {d0:.12e} to {d1:.12e} at iteration {}",
                    pair[1].iter
                );
                break;
            }
        }
        report.push(format!("{label}: dual monotonicity"), mono_ok, mono_detail);

        let mut cons_ok = true;
        let mut cons_detail = String::from("within 1e-9·(1+max‖w_i‖)");
        for (row, max_norm) in output.rows.iter().zip(&output.max_w_norms) {
            let resid = row.conservation_residual.unwrap();
            if resid > 1e-9 * (1.0 + max_norm) {
                cons_ok = false;
                cons_detail =
                    format!("residual {resid:.3e} at iteration {} (max norm {max_norm:.3e})", row.iter);
                break;
            }
        }
        report.push(format!("{label}: conservation"), cons_ok, cons_detail);

        let max_abs_dual = output
            .rows
            .iter()
            .map(|r| r.dual_value.unwrap().abs())
            .fold(0.0f64, f64::max);
        let descent_slack = 10.0 * config.n as f64 * tol * (1.0 + max_abs_dual);
        let descent_ok = audit_accumulated_descent(
            &output.rows,
            &output.edge_logs,
            params.theta1(),
            descent_slack,
        );
        report.push(
            format!("{label}: accumulated descent"),
            descent_ok,
            format!("theta1 = {:.6e}, slack = {descent_slack:.3e}", params.theta1()),
        );

        let mut link_ok = true;
        let mut link_detail = String::from("‖x−x*‖ ≤ √(2L·gap) + 1e-6");
        for row in &output.rows {
            let gap = row.dual_gap.unwrap().max(0.0);
            let lhs = (config.n as f64 * row.primal_error).sqrt();
            if lhs > (2.0 * l * gap).sqrt() + 1e-6 {
                link_ok = false;
                link_detail = format!(
                    "distance {lhs:.6e} > bound {:.6e} at iteration {}",
                    (2.0 * l * gap).sqrt() + 1e-6,
                    row.iter
                );
                break;
            }
        }
        report.push(format!("{label}: primal–dual distance bound"), link_ok, link_detail);
    }
    Ok(report)
}

/// Returns a copy of `config` with one named parameter replaced by a parsed
/// value; used by the sweep subcommand.
pub fn apply_param(
    config: &ExperimentConfig,
    name: &str,
    value: &str,
) -> Result<ExperimentConfig, HarnessError> {
    fn real(name: &str, value: &str) -> Result<f64, HarnessError> {
        value.parse().map_err(|_| {
            HarnessError::InvalidConfig(format!("cannot parse '{value}' as a real for {name}"))
        })
    }
    fn count(name: &str, value: &str) -> Result<usize, HarnessError> {
        value.parse().map_err(|_| {
            HarnessError::InvalidConfig(format!("cannot parse '{value}' as a count for {name}"))
        })
    }
    let mut c = config.clone();
    match name {
        "beta" => c.beta = Some(real(name, value)?),
        "c1" => c.c1 = Some(real(name, value)?),
        "c2" => c.c2 = Some(real(name, value)?),
        "lambda" => c.lambda = real(name, value)?,
        "dps_step" => c.dps_step = real(name, value)?,
        "oracle_tol" => c.oracle_tol = real(name, value)?,
        "memory" => c.memory = count(name, value)?,
        "iters" => c.iters = count(name, value)?,
        "period" => c.period = count(name, value)?,
        other => {
            return Err(HarnessError::InvalidConfig(format!(
                "unknown sweep parameter '{other}'"
            )))
        }
    }
    c.validate()?;
    Ok(c)
}
