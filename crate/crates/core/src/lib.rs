//! Phase-coded-pilot (PCP) distributed phase synchronization for coherent
//! over-the-air computation.
//!
//! The crate simulates the four-step BS/node pilot exchange at symbol level
//! under residual CFO, oscillator phase offset, Doppler and noise, and
//! evaluates the closed-form RMSE, CDF and computation-rate expressions that
//! predict its behavior.

pub mod channel;
pub mod error;
pub mod model;
pub mod montecarlo;
pub mod protocol;
pub mod theory;

pub use channel::{wrap_phase, ComplexSample};
pub use error::{Error, Result};
pub use model::{
    snr_db_to_noise_var, AmplitudeProfile, ConfigViolation, MobilityModel, NodeRealization, ParameterVector, PilotSymbol,
    SystemConfig,
};
pub use montecarlo::{run_trials, DeviationStats, TrialPlan};
pub use protocol::{build_schedule, OacOutcome, PhaseEstimates, Schedule};
pub use theory::{rmse_theory, VarianceBreakdown};
