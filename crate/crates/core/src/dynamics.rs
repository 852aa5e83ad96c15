//! Closed-form atomic dynamics of the dispersive two-atom Tavis-Cummings
//! model with a damped cavity initially in a coherent state.
//!
//! Public trajectory times are dimensionless `λt`; rates are in the same
//! units as `lambda`. The populations p1 and p4 are constants of motion, the
//! inner block |2⟩,|3⟩ Rabi-oscillates undamped at frequency λ, and ρ14
//! picks up a field-dependent phase whose cavity damping leaves a non-zero
//! stationary magnitude.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discord::{discord, DiscordBreakdown};
use crate::error::{Error, Result};
use crate::propagator::{Analytic, Propagator};
use crate::xstate::XState;

/// Default discord level, in bits, below which a sample counts as zero.
pub const DEFAULT_ZERO_THRESHOLD: f64 = 5e-3;

/// Bracket width, in λt, at which golden-section refinement stops.
const REFINE_TOL: f64 = 1e-7;

/// Relative tolerance on center spacings `k·π/λ` for periodic events.
const PERIOD_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TCParams {
    pub lambda: f64,
    pub kappa: f64,
    pub alpha_sq: f64,
}

impl TCParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lambda.is_finite()
            && self.lambda > 0.0
            && self.kappa.is_finite()
            && self.kappa >= 0.0
            && self.alpha_sq.is_finite()
            && self.alpha_sq >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "need lambda > 0, kappa ≥ 0, alpha_sq ≥ 0; got {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersiveCoupling {
    pub lambda: f64,
    /// Set when `|δ| < 10·|g|`, where the effective Hamiltonian is doubtful.
    pub regime_warning: Option<String>,
}

/// Effective coupling `g²/(2δ)`; the sign follows the detuning.
pub fn lambda_from_g_delta(g: f64, delta: f64) -> Result<DispersiveCoupling> {
    if delta == 0.0 || !delta.is_finite() || !g.is_finite() {
        return Err(Error::InvalidParams(format!(
            "dispersive coupling needs finite non-zero detuning, got g = {g}, delta = {delta}"
        )));
    }
    let regime_warning = (delta.abs() < 10.0 * g.abs()).then(|| {
        format!(
            "|delta| = {} is below 10·|g| = {}; outside the dispersive regime",
            delta.abs(),
            10.0 * g.abs()
        )
    });
    Ok(DispersiveCoupling {
        lambda: g * g / (2.0 * delta),
        regime_warning,
    })
}

/// Inner-block decomposition of the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PropagatorCoefficients {
    pub c_plus: f64,
    pub c_minus: f64,
    pub c1: f64,
    pub c2: f64,
}

impl PropagatorCoefficients {
    pub fn from_state(state: &XState) -> Self {
        let rho23 = state.rho23();
        PropagatorCoefficients {
            c_plus: 0.5 * (state.p2 + state.p3),
            c_minus: 0.5 * (state.p2 - state.p3),
            c1: rho23.re,
            c2: rho23.im,
        }
    }
}

/// Atomic X state at physical time `t`.
pub fn evolve(initial: &XState, params: &TCParams, t: f64) -> Result<XState> {
    initial.ensure_valid()?;
    params.validate()?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidGrid(format!("time must be finite and ≥ 0, got {t}")));
    }
    let out = evolve_unchecked(initial, params, t);
    out.ensure_valid()?;
    Ok(out)
}

pub(crate) fn evolve_unchecked(initial: &XState, params: &TCParams, t: f64) -> XState {
    let PropagatorCoefficients {
        c_plus,
        c_minus,
        c1,
        c2,
    } = PropagatorCoefficients::from_state(initial);
    let lt = params.lambda * t;
    let (s, c) = lt.sin_cos();
    let p2 = c_plus + c_minus * c - c2 * s;
    let p3 = 1.0 - initial.p1 - p2 - initial.p4;
    let rho23 = Complex64::new(c1, c2 * c + c_minus * s);

    let i = Complex64::i();
    let z = Complex64::new(params.kappa, 2.0 * params.lambda);
    let shift = 2.0 * i * params.lambda * params.alpha_sq / z * (1.0 - (-z * t).exp());
    let rho41 = initial.rho14().conj() * (-i * lt - shift).exp();

    XState::from_complex([initial.p1, p2, p3, initial.p4], rho41.conj(), rho23)
}

/// `t → ∞` magnitude of ρ14: `r14(0)·exp(−4λ²|α|²/(κ² + 4λ²))`.
pub fn steady_coherence(initial_r14: f64, params: &TCParams) -> f64 {
    let l2 = params.lambda * params.lambda;
    initial_r14 * (-4.0 * l2 * params.alpha_sq / (params.kappa * params.kappa + 4.0 * l2)).exp()
}

/// The same limit with the denominator written as `κ² + (4λ)²`. It does not
/// follow from [`evolve`] and is kept only for side-by-side reporting.
pub fn steady_coherence_printed(initial_r14: f64, params: &TCParams) -> f64 {
    let l = params.lambda;
    initial_r14
        * (-4.0 * l * l * params.alpha_sq / (params.kappa * params.kappa + 16.0 * l * l)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroKind {
    Discrete,
    PeriodicMember,
    Asymptotic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEvent {
    pub t_center: f64,
    pub t_enter: f64,
    pub t_exit: f64,
    pub min_discord: f64,
    pub kind: ZeroKind,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub initial: XState,
    pub params: TCParams,
    /// Name of the propagator that produced `states`.
    pub propagator: String,
    /// Sample times in units of `1/λ`.
    pub times: Vec<f64>,
    pub states: Vec<XState>,
    pub breakdowns: Vec<DiscordBreakdown>,
    pub threshold: f64,
    pub zero_events: Vec<ZeroEvent>,
}

fn uniform_grid(t_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if n_samples < 2 || !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 samples over a positive window, got {n_samples} over [0, {t_max}]"
        )));
    }
    let step = t_max / (n_samples - 1) as f64;
    Ok((0..n_samples)
        .map(|k| if k + 1 == n_samples { t_max } else { k as f64 * step })
        .collect())
}

/// Analytic trajectory over `λt ∈ [0, t_max]` with the default zero threshold.
pub fn trajectory(
    initial: &XState,
    params: &TCParams,
    t_max: f64,
    n_samples: usize,
) -> Result<Trajectory> {
    trajectory_with(initial, params, t_max, n_samples, &Analytic, DEFAULT_ZERO_THRESHOLD)
}

pub fn trajectory_with(
    initial: &XState,
    params: &TCParams,
    t_max: f64,
    n_samples: usize,
    propagator: &dyn Propagator,
    threshold: f64,
) -> Result<Trajectory> {
    initial.ensure_valid()?;
    params.validate()?;
    let times = uniform_grid(t_max, n_samples)?;
    let physical: Vec<f64> = times.iter().map(|tau| tau / params.lambda).collect();
    let states = propagator.propagate(initial, params, &physical)?;
    let breakdowns = states
        .par_iter()
        .map(discord)
        .collect::<Result<Vec<_>>>()?;
    let mut traj = Trajectory {
        initial: *initial,
        params: *params,
        propagator: propagator.name().to_string(),
        times,
        states,
        breakdowns,
        threshold,
        zero_events: Vec::new(),
    };
    traj.zero_events = find_zeros(&traj, threshold)?;
    Ok(traj)
}

/// Locates intervals where the sampled discord stays below `threshold`.
///
/// Each run of below-threshold samples becomes one event. Entry and exit
/// times are linear interpolations of the threshold crossing. For analytic
/// trajectories the minimum is refined by golden-section search on the
/// closed-form dynamics; otherwise the smallest sample is reported.
pub fn find_zeros(traj: &Trajectory, threshold: f64) -> Result<Vec<ZeroEvent>> {
    let n = traj.times.len();
    if n == 0 || traj.breakdowns.len() != n {
        return Err(Error::InvalidGrid("empty or inconsistent trajectory".into()));
    }
    let d: Vec<f64> = traj.breakdowns.iter().map(|b| b.discord).collect();
    let t = &traj.times;
    let crossing = |a: usize, b: usize| {
        let (da, db) = (d[a], d[b]);
        if da == db {
            t[b]
        } else {
            t[a] + (threshold - da) / (db - da) * (t[b] - t[a])
        }
    };
    let refinable = traj.propagator == Analytic.name();

    let mut events = Vec::new();
    let mut i = 0;
    while i < n {
        if d[i] >= threshold {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && d[j + 1] < threshold {
            j += 1;
        }
        let t_enter = if i == 0 { t[0] } else { crossing(i - 1, i) };
        let t_exit = if j + 1 == n { t[n - 1] } else { crossing(j + 1, j) };
        let k = (i..=j).min_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap();
        let (mut t_center, mut min_discord) = (t[k], d[k]);
        if refinable {
            let lo = t[k.saturating_sub(1)].max(t_enter);
            let hi = t[(k + 1).min(n - 1)].min(t_exit);
            let (tc, dc) = golden_section_min(
                |tau| Ok(discord(&evolve(&traj.initial, &traj.params, tau / traj.params.lambda)?)?.discord),
                lo,
                hi,
                REFINE_TOL,
            )?;
            if dc < min_discord {
                t_center = tc;
                min_discord = dc;
            }
        }
        let kind = if j + 1 == n {
            ZeroKind::Asymptotic
        } else {
            ZeroKind::Discrete
        };
        events.push(ZeroEvent {
            t_center,
            t_enter,
            t_exit,
            min_discord,
            kind,
        });
        i = j + 1;
    }
    classify_periodic(&mut events);
    Ok(events)
}

/// Marks discrete events whose centers are spaced by a multiple of π/λ
/// (the population-crossing period) from another discrete event.
fn classify_periodic(events: &mut [ZeroEvent]) {
    let centers: Vec<Option<f64>> = events
        .iter()
        .map(|e| (e.kind != ZeroKind::Asymptotic).then_some(e.t_center))
        .collect();
    for (a, event) in events.iter_mut().enumerate() {
        let Some(ca) = centers[a] else { continue };
        let recurring = centers.iter().enumerate().any(|(b, cb)| match cb {
            Some(cb) if b != a => {
                let periods = (cb - ca).abs() / PI;
                let k = periods.round();
                k >= 1.0 && (periods - k).abs() <= PERIOD_TOL
            }
            _ => false,
        });
        if recurring {
            event.kind = ZeroKind::PeriodicMember;
        }
    }
}

/// Golden-section minimisation of a unimodal function on `[a, b]`.
pub(crate) fn golden_section_min<F>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while (b - a).abs() > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn fig1() -> (XState, TCParams) {
        (
            XState::new([0.25, 3.0 / 16.0, 5.0 / 16.0, 0.25], 0.25, 0.05),
            TCParams {
                lambda: 1.0,
                kappa: 0.05,
                alpha_sq: 0.5922,
            },
        )
    }

    fn fig3_separable() -> (XState, TCParams) {
        (
            XState::new([0.25; 4], 0.2, 0.0736),
            TCParams {
                lambda: 1.0,
                kappa: 0.05,
                alpha_sq: 1.0,
            },
        )
    }

    #[test]
    fn coupling_from_g_and_delta() {
        let c = lambda_from_g_delta(1.0, 50.0).unwrap();
        assert!((c.lambda - 0.01).abs() < 1e-15 && c.regime_warning.is_none());
        let c = lambda_from_g_delta(2.0, -40.0).unwrap();
        assert!((c.lambda + 0.05).abs() < 1e-15 && c.regime_warning.is_none());
        let c = lambda_from_g_delta(1.0, 5.0).unwrap();
        assert!((c.lambda - 0.1).abs() < 1e-15);
        assert!(c.regime_warning.is_some());
        assert!(lambda_from_g_delta(1.0, 0.0).is_err());
    }

    #[test]
    fn evolve_at_zero_is_identity() {
        let (s, p) = fig1();
        let s = s.with_phases(0.7, 2.1);
        let out = evolve(&s, &p, 0.0).unwrap();
        for (a, b) in out.populations().iter().zip(s.populations()) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((out.rho14() - s.rho14()).norm() < 1e-15);
        assert!((out.rho23() - s.rho23()).norm() < 1e-15);
    }

    #[test]
    fn separable_bell_diagonal_keeps_inner_block_fixed() {
        let (s, p) = fig3_separable();
        for k in 0..200 {
            let out = evolve(&s, &p, 0.37 * k as f64).unwrap();
            assert!((out.p2 - 0.25).abs() < 1e-15);
            assert!((out.r23 - 0.0736).abs() < 1e-15);
        }
    }

    #[test]
    fn populations_degenerate_at_quarter_period() {
        let (s, p) = fig1();
        let out = evolve(&s, &p, FRAC_PI_2).unwrap();
        assert!((out.p2 - 0.25).abs() < 1e-15);
        assert!((out.p3 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inner_coherence_is_periodic_and_constants_conserved() {
        let (s, p) = fig1();
        let s = s.with_phases(0.3, 1.1);
        for k in 0..50 {
            let t = 0.61 * k as f64;
            let a = evolve(&s, &p, t).unwrap();
            let b = evolve(&s, &p, t + TAU).unwrap();
            assert!((a.r23 - b.r23).abs() < 1e-12);
            assert_eq!((a.p1, a.p4), (s.p1, s.p4));
            assert!((a.populations().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn kappa_zero_outer_coherence_is_periodic() {
        let (s, mut p) = fig1();
        p.kappa = 0.0;
        for k in 0..30 {
            let t = 0.43 * k as f64;
            let a = evolve(&s, &p, t).unwrap();
            let b = evolve(&s, &p, t + PI).unwrap();
            assert!((a.r14 - b.r14).abs() < 1e-13);
        }
    }

    #[test]
    fn steady_values() {
        let (s, p) = fig3_separable();
        let v = steady_coherence(s.r14, &p);
        assert!((v - 0.2 * (-4.0f64 / 4.0025).exp()).abs() < 1e-16);
        assert!((v - 0.0736).abs() < 5e-4);
        assert!((steady_coherence_printed(s.r14, &p) - 0.0736).abs() > 5e-2);
        let no_field = TCParams { alpha_sq: 0.0, ..p };
        assert_eq!(steady_coherence(0.2, &no_field), 0.2);
        let overdamped = TCParams { kappa: 1e9, ..p };
        assert!((steady_coherence(0.2, &overdamped) - 0.2).abs() < 1e-15);
        let late = evolve(&s, &p, 1e4).unwrap();
        assert!((late.r14 - v).abs() < 1e-12);
    }

    #[test]
    fn degenerate_grid_rejected() {
        let (s, p) = fig1();
        assert!(matches!(trajectory(&s, &p, 0.0, 2), Err(Error::InvalidGrid(_))));
        assert!(matches!(trajectory(&s, &p, 1.0, 1), Err(Error::InvalidGrid(_))));
        assert!(evolve(&s, &p, -1.0).is_err());
    }

    #[test]
    fn stationary_diagonal_state_is_one_asymptotic_event() {
        // p2 = p3 keeps the inner block from rotating coherence in.
        let s = XState::diagonal([0.1, 0.25, 0.25, 0.4]);
        let (_, p) = fig1();
        let traj = trajectory(&s, &p, 10.0, 101).unwrap();
        assert_eq!(traj.zero_events.len(), 1);
        let e = traj.zero_events[0];
        assert_eq!(e.kind, ZeroKind::Asymptotic);
        assert_eq!((e.t_enter, e.t_exit), (0.0, 10.0));
    }

    #[test]
    fn figure_one_single_exact_zero() {
        // The exact zero sits at λt = π/2; later dips stay above 1e-5 bits.
        let (s, p) = fig1();
        let traj = trajectory_with(&s, &p, 30.0, 3001, &Analytic, 1e-5).unwrap();
        assert_eq!(traj.zero_events.len(), 1);
        let e = traj.zero_events[0];
        assert_eq!(e.kind, ZeroKind::Discrete);
        assert!(e.t_center > 0.0 && e.t_center <= TAU);
        assert!(e.t_enter <= e.t_center && e.t_center <= e.t_exit);
        assert!(e.min_discord < 1e-8);
        assert!((e.t_center - FRAC_PI_2).abs() < 1e-2);
    }

    #[test]
    fn golden_section_finds_parabola_minimum() {
        let (x, fx) = golden_section_min(|x| Ok((x - 0.3) * (x - 0.3)), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8 && fx < 1e-16);
    }
}
