//! Seeded random X states and the closed-form vs numeric measurement sweep.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::discord::{c_m1, c_m2, minimize_numeric, DEFAULT_GRID, DEFAULT_REFINE_ITERS};
use crate::error::Result;
use crate::xstate::XState;

/// Gaps above this are logged as counterexamples to the closed form.
pub const DISCREPANCY_LOG: f64 = 1e-4;
/// No gap may exceed this.
pub const DISCREPANCY_MAX: f64 = 1e-2;
/// Minimum fraction of states within [`DISCREPANCY_LOG`].
pub const DISCREPANCY_FRACTION: f64 = 0.99;

fn dirichlet4<R: Rng>(rng: &mut R) -> [f64; 4] {
    let w: [f64; 4] = std::array::from_fn(|_| rng.sample(Exp1));
    let total: f64 = w.iter().sum();
    w.map(|x| x / total)
}

/// Uniform populations on the simplex, coherence magnitudes uniform within the
/// positivity bounds, phases uniform.
pub fn random_xstate<R: Rng>(rng: &mut R) -> XState {
    let p = dirichlet4(rng);
    let r14 = rng.random::<f64>() * (p[0] * p[3]).sqrt();
    let r23 = rng.random::<f64>() * (p[1] * p[2]).sqrt();
    XState::new(p, r14, r23).with_phases(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU)
}

/// Random state with both coherences zero.
pub fn random_coherence_free<R: Rng>(rng: &mut R) -> XState {
    XState::diagonal(dirichlet4(rng))
}

/// Random state with `p1 = p2`, `p3 = p4` and `|ρ14| = |ρ23|`.
pub fn random_degenerate_balanced<R: Rng>(rng: &mut R) -> XState {
    let a = 0.5 * rng.random::<f64>();
    let b = 0.5 - a;
    let r = rng.random::<f64>() * (a * b).sqrt();
    XState::new([a, a, b, b], r, r).with_phases(rng.random::<f64>() * TAU, rng.random::<f64>() * TAU)
}

/// `n` states from a ChaCha8 stream seeded with `seed`.
pub fn seeded_states<F>(n: usize, seed: u64, mut draw: F) -> Vec<XState>
where
    F: FnMut(&mut ChaCha8Rng) -> XState,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| draw(&mut rng)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub index: usize,
    pub state: XState,
    pub closed_form: f64,
    pub numeric: f64,
    pub theta: f64,
    pub phi: f64,
}

impl Discrepancy {
    pub fn gap(&self) -> f64 {
        self.closed_form - self.numeric
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub seed: u64,
    pub n_states: usize,
    pub max_abs_gap: f64,
    pub within_log_threshold: usize,
    pub above_max: usize,
    /// States with a gap above [`DISCREPANCY_LOG`], in sweep order.
    pub discrepancies: Vec<Discrepancy>,
}

impl SweepReport {
    pub fn fraction_within(&self) -> f64 {
        self.within_log_threshold as f64 / self.n_states.max(1) as f64
    }

    pub fn passes(&self) -> bool {
        self.above_max == 0 && self.fraction_within() >= DISCREPANCY_FRACTION
    }
}

/// Compares `min(c_m1, c_m2)` with the grid-search minimum on `n` random states.
pub fn measurement_sweep(n: usize, seed: u64) -> Result<SweepReport> {
    let states = seeded_states(n, seed, random_xstate);
    let rows = states
        .par_iter()
        .enumerate()
        .map(|(index, s)| {
            let closed_form = c_m1(s)?.min(c_m2(s)?);
            let (basis, numeric) = minimize_numeric(s, DEFAULT_GRID, DEFAULT_REFINE_ITERS)?;
            Ok(Discrepancy {
                index,
                state: *s,
                closed_form,
                numeric,
                theta: basis.theta,
                phi: basis.phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut report = SweepReport {
        seed,
        n_states: n,
        max_abs_gap: 0.0,
        within_log_threshold: 0,
        above_max: 0,
        discrepancies: Vec::new(),
    };
    for row in rows {
        let gap = row.gap().abs();
        report.max_abs_gap = report.max_abs_gap.max(gap);
        if gap <= DISCREPANCY_LOG {
            report.within_log_threshold += 1;
        } else {
            log::info!(
                "closed-form minimum exceeds numeric by {:.3e} for state #{}: {:?}",
                row.gap(),
                row.index,
                row.state
            );
            report.discrepancies.push(row);
        }
        if gap > DISCREPANCY_MAX {
            report.above_max += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xstate::STATE_TOL;

    #[test]
    fn generated_states_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            for s in [
                random_xstate(&mut rng),
                random_coherence_free(&mut rng),
                random_degenerate_balanced(&mut rng),
            ] {
                assert!(s.validate(STATE_TOL).is_valid(), "{s:?}");
            }
        }
    }

    #[test]
    fn seeding_is_deterministic() {
        let a = seeded_states(20, 3, random_xstate);
        let b = seeded_states(20, 3, random_xstate);
        assert_eq!(a, b);
        assert_ne!(a, seeded_states(20, 4, random_xstate));
    }

    #[test]
    fn small_sweep_is_reproducible() {
        let a = measurement_sweep(12, 1).unwrap();
        let b = measurement_sweep(12, 1).unwrap();
        assert_eq!(a.max_abs_gap, b.max_abs_gap);
        assert_eq!(a.discrepancies.len(), b.discrepancies.len());
    }
}
