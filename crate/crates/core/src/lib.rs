//! Quantum discord of two-qubit X states, with closed-form and numeric
//! measurement minimization, dispersive Tavis-Cummings dynamics in a lossy
//! cavity, and a truncated-Fock master-equation reference.

pub mod cli;
pub mod config;
pub mod discord;
pub mod dynamics;
pub mod error;
pub mod minimizer;
pub mod oracle;
pub mod propagator;
pub mod sweep;
pub mod xstate;

pub use discord::{discord, discord_numeric, discord_with, nullity_check, DiscordBreakdown, MeasurementBasis, NullityClass};
pub use dynamics::{evolve, find_zeros, trajectory, trajectory_with, TCParams, Trajectory, ZeroEvent, ZeroKind};
pub use error::{Error, Result};
pub use minimizer::{minimizer_by_name, ConditionalEntropyMinimizer};
pub use propagator::{propagator_by_name, Propagator};
pub use xstate::XState;
