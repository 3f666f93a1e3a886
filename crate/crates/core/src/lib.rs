//! Two-frame indirect sampling on simulated epidemics.
//!
//! The crate generates an agent-based six-state epidemic on a grid
//! ([`synthpop`]), derives the 14-day contact links and the split of the
//! population into verified cases and their complement ([`frames`]), draws
//! probability samples from both frames with contact tracing ([`designs`]),
//! and estimates the number of infected people with generalized weight share
//! estimators combined across frames ([`estimators`]). Closed-form
//! anticipated variances live in [`anticipated`], the chained follow-up over
//! time in [`waves`], and the Monte Carlo runner with report emission in
//! [`harness`].
//!
//! Runnable walkthroughs of every capability are in the crate's `examples/`
//! directory (`cargo run --release --example <name>`).

pub mod anticipated;
pub mod designs;
pub mod error;
pub mod estimators;
pub mod frames;
pub mod harness;
pub mod rng;
pub mod synthpop;
pub mod waves;

pub use error::{Error, Result};
pub use synthpop::{HealthState, PersonId};
