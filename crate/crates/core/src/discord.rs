//! Classical correlations and quantum discord of X states, with projective
//! measurements on qubit B.
//!
//! The measurement basis is `|+⟩ = cos θ|e_B⟩ + sin θ e^{iφ}|g_B⟩`,
//! `|−⟩ = sin θ|e_B⟩ − cos θ e^{iφ}|g_B⟩`. Two closed-form candidates
//! exist for the minimum conditional entropy: θ = 0 (giving `c_m1`) and
//! θ = π/4, φ = (φ14 − φ23)/2 (giving `c_m2`). [`minimize_numeric`] searches
//! the whole `(θ, φ)` range to check the claim that one of them is optimal.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimizer::{ClosedForm, ConditionalEntropyMinimizer, GridSearch};
use crate::xstate::{binary_entropy, xlog2x, XState};

/// Discord values below this are reported as a numerical anomaly.
pub const DISCORD_FLOOR: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementBasis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementBasis {
    /// `theta` must lie in `[0, π/2]`; `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) || !phi.is_finite() {
            return Err(Error::InvalidParams(format!(
                "measurement angle theta = {theta} outside [0, π/2]"
            )));
        }
        Ok(MeasurementBasis {
            theta,
            phi: phi.rem_euclid(TAU),
        })
    }

    /// Computational basis measurement (θ = 0).
    pub fn computational() -> Self {
        MeasurementBasis { theta: 0.0, phi: 0.0 }
    }

    /// The θ = π/4 basis phase-matched to the state's coherences.
    pub fn balanced_for(state: &XState) -> Self {
        MeasurementBasis {
            theta: FRAC_PI_4,
            phi: (0.5 * (state.phi14 - state.phi23)).rem_euclid(TAU),
        }
    }

    /// Components `(⟨g|k⟩, ⟨e|k⟩)` of the two outcome vectors `k = +, −`.
    fn outcome_vectors(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let phase = Complex64::from_polar(1.0, self.phi);
        [
            [phase * s, Complex64::new(c, 0.0)],
            [-phase * c, Complex64::new(s, 0.0)],
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscordBreakdown {
    pub mutual_info: f64,
    pub c_m1: f64,
    pub c_m2: f64,
    pub upsilon: f64,
    pub classical_corr: f64,
    pub discord: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullityClass {
    /// Both coherences vanish.
    CoherenceFree,
    /// Pairwise-degenerate populations with equal coherence magnitudes.
    DegenerateBalanced,
    NotNull,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullityVerdict {
    pub class: NullityClass,
    /// `max(r14, r23)`.
    pub coherence_residual: f64,
    /// `max(|p1 − p2|, |p3 − p4|, |r14 − r23|)`.
    pub degeneracy_residual: f64,
}

impl NullityVerdict {
    pub fn is_null(&self) -> bool {
        self.class != NullityClass::NotNull
    }
}

/// Conditional entropy of A after measuring B in `basis`, in bits.
///
/// Works on the dense matrix: for each outcome the unnormalised conditional
/// state is `M_k = Tr_B(Π_k ρ Π_k)` and `p_k S(M_k/p_k) = −Σ λ log λ + p_k log p_k`
/// over the eigenvalues λ of `M_k`.
pub fn cond_entropy_basis(state: &XState, basis: &MeasurementBasis) -> Result<f64> {
    state.ensure_valid()?;
    let rho = state.to_matrix();
    let mut total = 0.0;
    for v in basis.outcome_vectors() {
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (a, row) in m.iter_mut().enumerate() {
            for (a2, entry) in row.iter_mut().enumerate() {
                for b in 0..2 {
                    for b2 in 0..2 {
                        *entry += v[b].conj() * rho[(2 * a + b, 2 * a2 + b2)] * v[b2];
                    }
                }
            }
        }
        let (m00, m11) = (m[0][0].re, m[1][1].re);
        let p = m00 + m11;
        let radius = (0.5 * (m00 - m11)).hypot(m[0][1].norm());
        let (l1, l2) = (0.5 * p + radius, (0.5 * p - radius).max(0.0));
        total += xlog2x(p) - xlog2x(l1) - xlog2x(l2);
    }
    Ok(total.max(0.0))
}

/// Conditional entropy for the θ = 0 measurement.
pub fn c_m1(state: &XState) -> Result<f64> {
    state.ensure_valid()?;
    let XState { p1, p2, p3, p4, .. } = *state;
    // −x·log₂(x/(x+y)); an empty branch contributes nothing.
    let term = |x: f64, y: f64| {
        if x <= 0.0 {
            0.0
        } else {
            -x * (x / (x + y)).log2()
        }
    };
    Ok(term(p4, p2) + term(p2, p4) + term(p3, p1) + term(p1, p3))
}

pub fn upsilon(state: &XState) -> Result<f64> {
    state.ensure_valid()?;
    let imbalance = state.p1 + state.p2 - state.p3 - state.p4;
    let coherence = 2.0 * (state.r14 + state.r23);
    Ok(imbalance.hypot(coherence))
}

/// Conditional entropy for the phase-matched θ = π/4 measurement.
pub fn c_m2(state: &XState) -> Result<f64> {
    let u = upsilon(state)?;
    Ok(binary_entropy(0.5 * (1.0 + u)))
}

/// Closed-form discord: the minimum conditional entropy is `min(c_m1, c_m2)`.
pub fn discord(state: &XState) -> Result<DiscordBreakdown> {
    discord_with(state, &ClosedForm)
}

/// Discord with the measurement optimisation done by the default grid search.
pub fn discord_numeric(state: &XState) -> Result<DiscordBreakdown> {
    discord_with(state, &GridSearch::default())
}

/// Discord with the conditional-entropy minimum supplied by `minimizer`.
///
/// `c_m1`, `c_m2` and `upsilon` are always the closed-form values.
pub fn discord_with(
    state: &XState,
    minimizer: &dyn ConditionalEntropyMinimizer,
) -> Result<DiscordBreakdown> {
    let mutual_info = state.mutual_information()?;
    let s_a = state.marginal_a()?.entropy();
    let min_entropy = minimizer.minimize(state)?.value;
    let classical_corr = s_a - min_entropy;
    let discord = mutual_info - classical_corr;
    if discord < DISCORD_FLOOR {
        log::warn!(
            "negative discord {discord:e} from `{}` minimiser for {state:?}",
            minimizer.name()
        );
    }
    Ok(DiscordBreakdown {
        mutual_info,
        c_m1: c_m1(state)?,
        c_m2: c_m2(state)?,
        upsilon: upsilon(state)?,
        classical_corr,
        discord,
    })
}

/// Grid sizes and refinement depth used by [`minimize_numeric`] by default.
pub const DEFAULT_GRID: (usize, usize) = (64, 64);
pub const DEFAULT_REFINE_ITERS: usize = 6;

/// Local grid points per axis in each refinement round.
const REFINE_POINTS: usize = 9;
/// Spacing shrink factor between refinement rounds.
const REFINE_SHRINK: f64 = 4.0;

/// Direct search for the measurement minimising [`cond_entropy_basis`].
///
/// The θ axis always contains 0, π/4 and π/2 (the interval count is rounded up
/// to an even number ≥ `n_theta`). The φ axis is offset so that it contains
/// (φ14 − φ23)/2. Both closed-form bases are therefore grid points, and the
/// returned value never exceeds `min(c_m1, c_m2)` by more than rounding.
pub fn minimize_numeric(
    state: &XState,
    grid: (usize, usize),
    refine_iters: usize,
) -> Result<(MeasurementBasis, f64)> {
    let (n_theta, n_phi) = grid;
    if n_theta < 8 || n_phi < 8 {
        return Err(Error::InvalidParams(format!(
            "measurement grid {n_theta}×{n_phi} too coarse (need ≥ 8 per axis)"
        )));
    }
    state.ensure_valid()?;

    let intervals = n_theta + n_theta % 2;
    let mut h_theta = FRAC_PI_2 / intervals as f64;
    let mut h_phi = TAU / n_phi as f64;
    let phi0 = MeasurementBasis::balanced_for(state).phi;

    let eval = |theta: f64, phi: f64| -> Result<f64> {
        let basis = MeasurementBasis {
            theta,
            phi: phi.rem_euclid(TAU),
        };
        cond_entropy_basis(state, &basis)
    };

    let mut best = (0.0, phi0, f64::INFINITY);
    for i in 0..=intervals {
        let theta = i as f64 * h_theta;
        for j in 0..n_phi {
            let phi = phi0 + j as f64 * h_phi;
            let value = eval(theta, phi)?;
            if value < best.2 {
                best = (theta, phi, value);
            }
        }
    }

    let half = (REFINE_POINTS / 2) as f64;
    for _ in 0..refine_iters {
        let (theta_c, phi_c, _) = best;
        for i in 0..REFINE_POINTS {
            let theta = (theta_c + (i as f64 - half) / half * h_theta).clamp(0.0, FRAC_PI_2);
            for j in 0..REFINE_POINTS {
                let phi = phi_c + (j as f64 - half) / half * h_phi;
                let value = eval(theta, phi)?;
                if value < best.2 {
                    best = (theta, phi, value);
                }
            }
        }
        h_theta /= REFINE_SHRINK;
        h_phi /= REFINE_SHRINK;
    }

    let (theta, phi, value) = best;
    Ok((
        MeasurementBasis {
            theta,
            phi: phi.rem_euclid(TAU),
        },
        value,
    ))
}

/// Classifies `state` against the two zero-discord conditions.
///
/// Empirically, a non-`NotNull` verdict at tolerance `tol` implies
/// `discord(state).discord ≤ 10·tol` (checked in tests at `tol = 1e-8`).
pub fn nullity_check(state: &XState, tol: f64) -> Result<NullityVerdict> {
    state.ensure_valid()?;
    let coherence_residual = state.r14.max(state.r23);
    let degeneracy_residual = (state.p1 - state.p2)
        .abs()
        .max((state.p3 - state.p4).abs())
        .max((state.r14 - state.r23).abs());
    let class = if state.r14 <= tol && state.r23 <= tol {
        NullityClass::CoherenceFree
    } else if degeneracy_residual <= tol {
        NullityClass::DegenerateBalanced
    } else {
        NullityClass::NotNull
    };
    Ok(NullityVerdict {
        class,
        coherence_residual,
        degeneracy_residual,
    })
}

/// Zero-discord state from dropping every coherence.
pub fn build_chi_m1(state: &XState) -> Result<XState> {
    state.ensure_valid()?;
    Ok(XState::diagonal(state.populations()))
}

/// Zero-discord state with pairwise-averaged populations and averaged
/// coherence magnitudes; the input phases are kept.
///
/// Positivity follows from Cauchy–Schwarz,
/// `(√(p1p4) + √(p2p3))² ≤ (p1 + p2)(p3 + p4)`, but the result is still
/// validated before it is returned.
pub fn build_chi_m2(state: &XState) -> Result<XState> {
    state.ensure_valid()?;
    let low = 0.5 * (state.p1 + state.p2);
    let high = 0.5 * (state.p3 + state.p4);
    let r = 0.5 * (state.r14 + state.r23);
    let chi = XState {
        p1: low,
        p2: low,
        p3: high,
        p4: high,
        r14: r,
        phi14: state.phi14,
        r23: r,
        phi23: state.phi23,
    };
    chi.ensure_valid()?;
    Ok(chi)
}

/// Wootters concurrence of an X state.
pub fn concurrence(state: &XState) -> Result<f64> {
    state.ensure_valid()?;
    let outer = state.r14 - (state.p2 * state.p3).max(0.0).sqrt();
    let inner = state.r23 - (state.p1 * state.p4).max(0.0).sqrt();
    Ok(2.0 * outer.max(inner).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1_initial() -> XState {
        XState::new([0.25, 3.0 / 16.0, 5.0 / 16.0, 0.25], 0.25, 0.05)
    }

    fn fig3_separable() -> XState {
        XState::new([0.25; 4], 0.2, 0.0736)
    }

    fn eq9_state() -> XState {
        XState::new([0.3, 0.3, 0.2, 0.2], 0.1, 0.1)
    }

    #[test]
    fn theta_zero_matches_c_m1() {
        for s in [fig1_initial(), fig3_separable(), XState::bell(), eq9_state()] {
            let direct = cond_entropy_basis(&s, &MeasurementBasis::computational()).unwrap();
            assert!((direct - c_m1(&s).unwrap()).abs() < 1e-12);
            let flipped = MeasurementBasis::new(FRAC_PI_2, 1.3).unwrap();
            assert!((cond_entropy_basis(&s, &flipped).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_conditional_states_are_pure() {
        let s = XState::bell();
        for &(theta, phi) in &[(0.0, 0.0), (0.3, 2.0), (FRAC_PI_4, 5.0), (1.2, 0.7)] {
            let basis = MeasurementBasis::new(theta, phi).unwrap();
            assert!(cond_entropy_basis(&s, &basis).unwrap() < 1e-12);
        }
    }

    #[test]
    fn maximally_mixed_conditional_entropy_is_one() {
        let s = XState::maximally_mixed();
        for &(theta, phi) in &[(0.0, 0.0), (0.7, 2.0), (FRAC_PI_4, 4.0)] {
            let basis = MeasurementBasis::new(theta, phi).unwrap();
            assert!((cond_entropy_basis(&s, &basis).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((c_m1(&s).unwrap() - 1.0).abs() < 1e-15);
        assert!((c_m2(&s).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(upsilon(&s).unwrap(), 0.0);
    }

    #[test]
    fn upsilon_values() {
        assert!((upsilon(&XState::bell()).unwrap() - 1.0).abs() < 1e-15);
        assert!((upsilon(&fig3_separable()).unwrap() - 0.5472).abs() < 1e-15);
    }

    #[test]
    fn c_m2_matches_phase_matched_basis() {
        let states = [
            fig1_initial().with_phases(0.4, 2.9),
            fig3_separable().with_phases(5.0, 1.0),
            eq9_state(),
        ];
        for s in states {
            let basis = MeasurementBasis::balanced_for(&s);
            let direct = cond_entropy_basis(&s, &basis).unwrap();
            assert!((direct - c_m2(&s).unwrap()).abs() < 1e-10);
        }
        let expected = binary_entropy(0.7736);
        assert!((c_m2(&fig3_separable()).unwrap() - expected).abs() < 1e-15);
        assert_eq!(c_m2(&XState::bell()).unwrap(), 0.0);
    }

    #[test]
    fn bell_discord() {
        let d = discord(&XState::bell()).unwrap();
        assert!((d.discord - 1.0).abs() < 1e-12);
        assert!((d.classical_corr - 1.0).abs() < 1e-12);
        assert!((d.mutual_info - 2.0).abs() < 1e-12);
        assert_eq!(c_m1(&XState::bell()).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_and_balanced_states_have_zero_discord() {
        let d = discord(&XState::diagonal([0.1, 0.2, 0.3, 0.4])).unwrap();
        assert!(d.discord.abs() < 1e-12);
        let d = discord(&eq9_state()).unwrap();
        assert!(d.discord.abs() <= 1e-9);
    }

    #[test]
    fn numeric_minimum_on_simple_states() {
        let (_, v) = minimize_numeric(&XState::bell(), DEFAULT_GRID, 2).unwrap();
        assert!(v < 1e-12);
        let (_, v) = minimize_numeric(&XState::maximally_mixed(), DEFAULT_GRID, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(minimize_numeric(&XState::bell(), (4, 64), 1).is_err());
    }

    #[test]
    fn numeric_never_exceeds_closed_form() {
        for s in [
            fig1_initial().with_phases(1.0, 4.0),
            fig3_separable(),
            eq9_state().with_phases(0.2, 3.3),
        ] {
            let (_, v) = minimize_numeric(&s, (16, 16), 3).unwrap();
            let closed = c_m1(&s).unwrap().min(c_m2(&s).unwrap());
            assert!(v <= closed + 1e-12, "{v} > {closed}");
        }
    }

    #[test]
    fn nullity_verdicts() {
        let v = nullity_check(&XState::diagonal([0.1, 0.2, 0.3, 0.4]), 1e-8).unwrap();
        assert_eq!(v.class, NullityClass::CoherenceFree);
        let v = nullity_check(&eq9_state(), 1e-8).unwrap();
        assert_eq!(v.class, NullityClass::DegenerateBalanced);
        let v = nullity_check(&fig1_initial(), 1e-8).unwrap();
        assert_eq!(v.class, NullityClass::NotNull);
        assert!((v.degeneracy_residual - 0.2).abs() < 1e-15);
    }

    #[test]
    fn chi_states() {
        let d = XState::diagonal([0.1, 0.2, 0.3, 0.4]);
        assert_eq!(build_chi_m1(&d).unwrap(), d);

        let chi = build_chi_m2(&XState::bell()).unwrap();
        assert_eq!(chi.populations(), [0.25; 4]);
        assert_eq!((chi.r14, chi.r23), (0.25, 0.25));
        assert!(discord(&chi).unwrap().discord.abs() < 1e-9);

        let s = fig1_initial().with_phases(0.5, 1.5);
        let chi = build_chi_m2(&s).unwrap();
        assert_eq!(chi.populations(), [0.21875, 0.21875, 0.28125, 0.28125]);
        assert!((chi.r14 - 0.15).abs() < 1e-15 && (chi.r23 - 0.15).abs() < 1e-15);
        assert_eq!((chi.phi14, chi.phi23), (0.5, 1.5));
        for chi in [build_chi_m1(&s).unwrap(), chi] {
            assert!(nullity_check(&chi, 1e-12).unwrap().is_null());
            assert!(discord(&chi).unwrap().discord.abs() < 1e-9);
        }
    }

    #[test]
    fn concurrence_values() {
        assert!((concurrence(&XState::bell()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(concurrence(&fig3_separable()).unwrap(), 0.0);
        let entangled = XState::new([0.4, 0.1, 0.1, 0.4], 0.4, 0.05);
        assert!((concurrence(&entangled).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn invalid_state_rejected_everywhere() {
        let bad = XState::new([0.25; 4], 0.3, 0.0);
        assert!(c_m1(&bad).is_err());
        assert!(c_m2(&bad).is_err());
        assert!(discord(&bad).is_err());
        assert!(nullity_check(&bad, 1e-8).is_err());
        assert!(concurrence(&bad).is_err());
        assert!(cond_entropy_basis(&bad, &MeasurementBasis::computational()).is_err());
        assert!(MeasurementBasis::new(2.0, 0.0).is_err());
    }
}
