//! Event-driven Monte Carlo of the momentum jump process.
//!
//! Jump times come from an exogenous Poisson clock with rate 𝓡; a jump from k
//! is w = v + n with a Lévy component v ~ j/𝓡 and a lattice component n whose
//! conditional law depends on the process variant:
//!
//! - `Exact`: n ~ |κ_v(k,n)|² (the full master-equation dynamics);
//! - `IdealizedTwoStep`: the four jumps {−𝐧(k), −𝐧(k+v), 𝐧(k)−𝐧(k+v), 0}
//!   with probabilities 𝐫_±(k)𝐫_±(k+v), summed on coincidences;
//! - `IdealizedOneStep`: −𝐧(k+v) with probability 𝐑₋(k+v) = 2𝐫₋𝐫₊(k+v), else
//!   0, plus an extra jump −𝐧(K₀) with probability 𝐫₋(K₀) at time 0⁺;
//! - `BandModel(ϑ)`: sign flip of k+v with probability ½ whenever k+v lands
//!   within w_n(ϑ) = α·|n|^{−2ϑ}·2^{2ϑ−1} of a half-integer n/2 ≠ 0
//!   (ϑ = ½ gives the width α/|n|);
//! - `FreeLevy`: no lattice component (and no comb).
//!
//! Between events K is constant, so the time integral Y_t = ∫K dr accumulates
//! exactly.  Sign flips are counted with the one-event-lookahead rule: a flip
//! occurs at a Poisson time ending an odd run of consecutive sign changes,
//! once the next event confirms the sign has stabilized.

mod ensemble;
mod flip;
mod law;
mod occupation;
mod reflection;
mod tau;

pub use ensemble::{
    run_ensemble, EnsembleConfig, EnsembleSummary, Initial, RecordPlan, SnapshotStats,
};
pub use flip::{detect_sign_flips, detect_sign_flips_by_rescan, FlipDetector, FlipEvent};
pub use law::{step, ProcessLaw, StepOutcome, TrajectoryState};
pub use occupation::occupation_stats;
pub use reflection::{reflection_trial, ExitReason, ReflectionOutcome};
pub use tau::{ExcursionTracker, TauSequencer};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error(transparent)]
    Bloch(#[from] crate::bloch::BlochError),
    #[error("invalid configuration: {0}")]
    Config(String),
}
