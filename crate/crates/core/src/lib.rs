//! Conservative contextual linear bandits.
//!
//! A linear bandit plays one of `K` feature vectors each round and observes
//! `y_t = ⟨theta_star, phi⟩ + noise`. The policies here wrap the classic
//! optimistic strategy (LUCB) with a cumulative safety constraint against a
//! baseline action: total expected reward must stay above a `(1 - alpha)`
//! fraction of the baseline's at every round.
//!
//! * [`policies::Lucb`] — unconstrained optimism over an ellipsoidal
//!   confidence set.
//! * [`policies::Clucb`] — plays the optimistic candidate only when a
//!   worst-case value check clears the constraint; baseline rewards are
//!   known and rounds spent on the baseline are excluded from estimation.
//! * [`policies::Clucb2`] — same guarantee when baseline rewards are
//!   unknown; every observation feeds the estimator and both sides of the
//!   check come from the confidence set.
//!
//! The numeric core (`linalg`, `confidence`, `policies`) is generic over the
//! scalar type through [`scalar::Real`]; the simulation layers
//! (`environment`, `harness`) and the aliases at the crate root fix `f64`.

pub mod confidence;
pub mod environment;
pub mod harness;
pub mod linalg;
pub mod policies;
pub mod scalar;

mod error;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` vector, the concrete type used by the simulation layers.
pub type Vector = linalg::Vector<f64>;
/// `f64` regularized Gram matrix with maintained inverse.
pub type SpdState = linalg::SpdState<f64>;
/// `f64` regularized least-squares estimator state.
pub type RlsState = confidence::RlsState<f64>;
/// `f64` confidence set.
pub type ConfidenceSet = confidence::ConfidenceSet<f64>;
/// `f64` confidence-radius schedule.
pub type BetaSchedule = confidence::BetaSchedule<f64>;
/// `f64` policy decision record.
pub type Decision = policies::Decision<f64>;
