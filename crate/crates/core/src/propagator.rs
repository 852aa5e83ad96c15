//! Named atomic-dynamics backends.

use rayon::prelude::*;

use crate::dynamics::{evolve, TCParams};
use crate::error::{Error, Result};
use crate::oracle::{integrate, DecayConvention, FockTruncation, OracleSettings, DEFAULT_DT, DEFAULT_TAIL_BOUND};
use crate::xstate::XState;

pub trait Propagator: Send + Sync {
    fn name(&self) -> &'static str;

    /// Atomic states at each physical time in `times` (ascending).
    fn propagate(&self, initial: &XState, params: &TCParams, times: &[f64]) -> Result<Vec<XState>>;
}

/// Closed-form solution, see [`evolve`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Analytic;

impl Propagator for Analytic {
    fn name(&self) -> &'static str {
        "analytic"
    }

    fn propagate(&self, initial: &XState, params: &TCParams, times: &[f64]) -> Result<Vec<XState>> {
        times.par_iter().map(|&t| evolve(initial, params, t)).collect()
    }
}

/// Truncated-Fock master-equation integration, traced over the field.
#[derive(Debug, Clone, Copy)]
pub struct MasterEquation {
    /// `None` picks the smallest truncation within [`DEFAULT_TAIL_BOUND`].
    pub n_max: Option<usize>,
    pub dt: f64,
    pub convention: DecayConvention,
}

impl Default for MasterEquation {
    fn default() -> Self {
        MasterEquation {
            n_max: None,
            dt: DEFAULT_DT,
            convention: DecayConvention::default(),
        }
    }
}

impl MasterEquation {
    pub fn settings(&self, params: &TCParams) -> OracleSettings {
        let trunc = match self.n_max {
            Some(n) => FockTruncation::new(n, params.alpha_sq),
            None => FockTruncation::auto(params.alpha_sq, DEFAULT_TAIL_BOUND),
        };
        OracleSettings {
            convention: self.convention,
            spot_check_every: 0,
            ..OracleSettings::new(trunc, self.dt)
        }
    }
}

impl Propagator for MasterEquation {
    fn name(&self) -> &'static str {
        "master-equation"
    }

    fn propagate(&self, initial: &XState, params: &TCParams, times: &[f64]) -> Result<Vec<XState>> {
        let run = integrate(initial, params, &self.settings(params), times)?;
        Ok(run.reduced.into_iter().map(|r| r.state).collect())
    }
}

pub const PROPAGATORS: &[&str] = &["analytic", "master-equation"];

/// Resolves a propagator by name. `oracle` configures the master-equation backend.
pub fn propagator_by_name(name: &str, oracle: MasterEquation) -> Result<Box<dyn Propagator>> {
    match name {
        "analytic" => Ok(Box::new(Analytic)),
        "master-equation" => Ok(Box::new(oracle)),
        _ => Err(Error::UnknownStrategy {
            kind: "propagator",
            name: name.to_string(),
            available: PROPAGATORS.join(", "),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry() {
        for &name in PROPAGATORS {
            assert_eq!(propagator_by_name(name, MasterEquation::default()).unwrap().name(), name);
        }
        assert!(propagator_by_name("euler", MasterEquation::default()).is_err());
    }

    #[test]
    fn backends_agree_without_dissipation() {
        let s = XState::new([0.25, 3.0 / 16.0, 5.0 / 16.0, 0.25], 0.25, 0.05);
        let p = TCParams {
            lambda: 1.0,
            kappa: 0.0,
            alpha_sq: 0.3,
        };
        let times = [0.0, 0.5, 1.0, 2.0];
        let a = Analytic.propagate(&s, &p, &times).unwrap();
        let m = MasterEquation::default().propagate(&s, &p, &times).unwrap();
        for (x, y) in a.iter().zip(&m) {
            assert!(crate::oracle::component_gap(x, y) < 1e-8);
        }
    }
}
