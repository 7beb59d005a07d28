//! Distributed consensus optimization by gradient descent on the Fenchel dual,
//! with per-edge safeguarded Anderson acceleration over time-varying networks.
//!
//! The primal problem is `min Σᵢ fᵢ(x)` over a common decision variable, where
//! each `fᵢ` is a strongly convex local loss restricted to a node-private ball.
//! Working on the dual turns consensus into a conservation law `Σᵢ wᵢ = 0` that
//! every edge update preserves, which makes the method auditable at runtime:
//! each accepted step must certify a quantified decrease of the dual objective.
//!
//! Module layout:
//! - [`linalg`]: small dense kernels (equality-constrained least squares, Laplacian spectral gap)
//! - [`problem`]: ball-constrained regularized logistic losses and instance generation
//! - [`conjugate`]: the per-node dual oracle (conjugate value and gradient)
//! - [`network`]: periodic gossip schedules with Metropolis weights
//! - [`fdgm`]: the plain dual gradient iteration in edge-decomposed form
//! - [`anderson`]: per-edge acceleration with memory, coefficient solve, and safeguards
//! - [`baselines`]: distributed projected subgradient comparison method
//! - [`harness`]: experiment configs, run loops, metrics, audits, and CSV output

pub mod anderson;
pub mod baselines;
pub mod conjugate;
pub mod fdgm;
pub mod harness;
pub mod linalg;
pub mod network;
pub mod problem;

pub use linalg::DenseMatrix;
pub use network::{GraphSchedule, WeightedEdges};
pub use anderson::{PairMemory, SafeguardMode, SafeguardParams};
pub use baselines::PrimalState;
pub use conjugate::DualOracleResult;
pub use fdgm::DualState;
pub use harness::{
    Algorithm, ExperimentConfig, HarnessError, MetricsRow, RateConstants, RunOutput, VerifyReport,
};
pub use problem::{LocalProblem, ProblemInstance};
