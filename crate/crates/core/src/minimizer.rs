//! Interchangeable strategies for minimising the conditional entropy over
//! measurements on qubit B, selectable by name.

use serde::Serialize;

use crate::discord::{
    c_m1, c_m2, minimize_numeric, MeasurementBasis, DEFAULT_GRID, DEFAULT_REFINE_ITERS,
};
use crate::error::{Error, Result};
use crate::xstate::XState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimizedEntropy {
    pub basis: MeasurementBasis,
    pub value: f64,
}

pub trait ConditionalEntropyMinimizer: Send + Sync {
    fn name(&self) -> &'static str;

    fn minimize(&self, state: &XState) -> Result<MinimizedEntropy>;
}

/// `min(c_m1, c_m2)` with the basis that realises it.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedForm;

impl ConditionalEntropyMinimizer for ClosedForm {
    fn name(&self) -> &'static str {
        "closed-form"
    }

    fn minimize(&self, state: &XState) -> Result<MinimizedEntropy> {
        let (m1, m2) = (c_m1(state)?, c_m2(state)?);
        Ok(if m1 <= m2 {
            MinimizedEntropy {
                basis: MeasurementBasis::computational(),
                value: m1,
            }
        } else {
            MinimizedEntropy {
                basis: MeasurementBasis::balanced_for(state),
                value: m2,
            }
        })
    }
}

/// Coarse grid plus shrinking local refinement; see [`minimize_numeric`].
#[derive(Debug, Clone, Copy)]
pub struct GridSearch {
    pub n_theta: usize,
    pub n_phi: usize,
    pub refine_iters: usize,
}

impl Default for GridSearch {
    fn default() -> Self {
        GridSearch {
            n_theta: DEFAULT_GRID.0,
            n_phi: DEFAULT_GRID.1,
            refine_iters: DEFAULT_REFINE_ITERS,
        }
    }
}

impl ConditionalEntropyMinimizer for GridSearch {
    fn name(&self) -> &'static str {
        "grid-search"
    }

    fn minimize(&self, state: &XState) -> Result<MinimizedEntropy> {
        let (basis, value) =
            minimize_numeric(state, (self.n_theta, self.n_phi), self.refine_iters)?;
        Ok(MinimizedEntropy { basis, value })
    }
}

pub const MINIMIZERS: &[&str] = &["closed-form", "grid-search"];

pub fn minimizer_by_name(name: &str) -> Result<Box<dyn ConditionalEntropyMinimizer>> {
    match name {
        "closed-form" => Ok(Box::new(ClosedForm)),
        "grid-search" => Ok(Box::new(GridSearch::default())),
        _ => Err(Error::UnknownStrategy {
            kind: "minimizer",
            name: name.to_string(),
            available: MINIMIZERS.join(", "),
        }),
    }
}
