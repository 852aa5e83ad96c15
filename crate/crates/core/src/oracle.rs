//! Master-equation reference for the atomic dynamics.
//!
//! The joint atom–field density matrix lives on `{|1⟩..|4⟩} ⊗ {|0⟩..|n_max⟩}`
//! with index `atom·(n_max + 1) + n`. It evolves under
//!
//! ```text
//! dρ/dt = −i[H, ρ] + γ (2aρa† − a†aρ − ρa†a)
//! H     = (λ/2) [ Σ_j (|e_j⟩⟨e_j| aa† − |g_j⟩⟨g_j| a†a) + σ₋ᴬσ₊ᴮ + σ₊ᴬσ₋ᴮ ]
//! ```
//!
//! where `γ = κ` or `κ/2` depending on [`DecayConvention`]. Operators are
//! assembled densely; the integrator applies them through a sparse view.
//! `aa†` is represented as `a†a + 1`, which remains exact at the truncation
//! edge where the product of truncated matrices would not.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, TCParams};
use crate::error::{Error, Result};
use crate::xstate::XState;

pub const DEFAULT_TAIL_BOUND: f64 = 1e-12;
pub const DEFAULT_DT: f64 = 1e-3;
/// `dt · max(λ(n_max + 1), κ n_max)` must not exceed this.
pub const STEP_GUARD: f64 = 0.1;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Meaning of `κ` in the cavity dissipator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayConvention {
    /// `κ (2aρa† − a†aρ − ρa†a)`: κ is the field-amplitude decay rate, ⟨a⟩ ∝ e^{−κt}.
    #[default]
    AmplitudeRate,
    /// `(κ/2)(2aρa† − a†aρ − ρa†a)`: κ is the photon-number decay rate, ⟨a†a⟩ ∝ e^{−κt}.
    EnergyRate,
}

impl DecayConvention {
    pub fn dissipator_rate(self, kappa: f64) -> f64 {
        match self {
            DecayConvention::AmplitudeRate => kappa,
            DecayConvention::EnergyRate => 0.5 * kappa,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DecayConvention::AmplitudeRate => "amplitude-rate",
            DecayConvention::EnergyRate => "energy-rate",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "amplitude-rate" => Ok(DecayConvention::AmplitudeRate),
            "energy-rate" => Ok(DecayConvention::EnergyRate),
            _ => Err(Error::UnknownStrategy {
                kind: "decay convention",
                name: name.to_string(),
                available: "amplitude-rate, energy-rate".into(),
            }),
        }
    }
}

/// Poisson probability mass above `n_max` for mean `alpha_sq`, summed directly.
pub fn poisson_tail(alpha_sq: f64, n_max: usize) -> f64 {
    if alpha_sq == 0.0 {
        return 0.0;
    }
    // log of the first omitted term, e^{−x} x^{n+1}/(n+1)!
    let mut log_term = -alpha_sq;
    for k in 1..=n_max + 1 {
        log_term += (alpha_sq / k as f64).ln();
    }
    let mut term = log_term.exp();
    let mut tail = 0.0;
    let mut k = n_max + 1;
    while term > tail * 1e-17 && term > 0.0 {
        tail += term;
        k += 1;
        term *= alpha_sq / k as f64;
    }
    tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FockTruncation {
    pub n_max: usize,
    /// Coherent-state probability beyond `n_max`.
    pub tail_mass: f64,
}

impl FockTruncation {
    pub fn new(n_max: usize, alpha_sq: f64) -> Self {
        FockTruncation {
            n_max,
            tail_mass: poisson_tail(alpha_sq, n_max),
        }
    }

    /// Smallest truncation whose tail mass is below `bound`.
    pub fn auto(alpha_sq: f64, bound: f64) -> Self {
        let mut n_max = 0;
        while poisson_tail(alpha_sq, n_max) >= bound {
            n_max += 1;
        }
        Self::new(n_max, alpha_sq)
    }

    pub fn dim(&self) -> usize {
        4 * (self.n_max + 1)
    }

    pub fn check(&self, alpha_sq: f64, bound: f64) -> Result<()> {
        if self.tail_mass <= bound {
            Ok(())
        } else {
            Err(Error::Truncation {
                n_max: self.n_max,
                tail: self.tail_mass,
                required: FockTruncation::auto(alpha_sq, bound).n_max,
            })
        }
    }
}

/// Full-space matrices for the field and atomic operators.
#[derive(Debug, Clone)]
pub struct OperatorRep {
    pub a: DMatrix<Complex64>,
    pub a_dag: DMatrix<Complex64>,
    pub number: DMatrix<Complex64>,
    pub identity: DMatrix<Complex64>,
    /// Index 0 is atom A, index 1 is atom B.
    pub sigma_plus: [DMatrix<Complex64>; 2],
    pub sigma_minus: [DMatrix<Complex64>; 2],
    pub proj_e: [DMatrix<Complex64>; 2],
    pub proj_g: [DMatrix<Complex64>; 2],
}

impl OperatorRep {
    pub fn new(trunc: &FockTruncation) -> Self {
        let nf = trunc.n_max + 1;
        let field_id = DMatrix::<Complex64>::identity(nf, nf);
        let mut a_f = DMatrix::<Complex64>::zeros(nf, nf);
        for n in 1..nf {
            a_f[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        let atom_id = Matrix4::<Complex64>::identity();
        let two_id = Matrix2::<Complex64>::identity();
        // single-qubit basis (g, e)
        let lower = Matrix2::new(ZERO, ONE, ZERO, ZERO);
        let raise = lower.transpose();
        let pe = Matrix2::new(ZERO, ZERO, ZERO, ONE);
        let pg = Matrix2::new(ONE, ZERO, ZERO, ZERO);

        let dyn4 = |m: Matrix4<Complex64>| DMatrix::from_column_slice(4, 4, m.as_slice());
        let on_atom = |j: usize, op: Matrix2<Complex64>| {
            let full = if j == 0 { op.kronecker(&two_id) } else { two_id.kronecker(&op) };
            dyn4(full).kronecker(&field_id)
        };
        let on_field = |op: &DMatrix<Complex64>| dyn4(atom_id).kronecker(op);

        let a = on_field(&a_f);
        let a_dag = a.adjoint();
        let number = &a_dag * &a;
        OperatorRep {
            identity: DMatrix::identity(trunc.dim(), trunc.dim()),
            sigma_plus: [on_atom(0, raise), on_atom(1, raise)],
            sigma_minus: [on_atom(0, lower), on_atom(1, lower)],
            proj_e: [on_atom(0, pe), on_atom(1, pe)],
            proj_g: [on_atom(0, pg), on_atom(1, pg)],
            a,
            a_dag,
            number,
        }
    }
}

pub fn build_hamiltonian(params: &TCParams, trunc: &FockTruncation) -> DMatrix<Complex64> {
    hamiltonian_from(&OperatorRep::new(trunc), params)
}

fn hamiltonian_from(ops: &OperatorRep, params: &TCParams) -> DMatrix<Complex64> {
    let a_a_dag = &ops.number + &ops.identity;
    let mut h = DMatrix::<Complex64>::zeros(ops.identity.nrows(), ops.identity.ncols());
    for j in 0..2 {
        h += &ops.proj_e[j] * &a_a_dag - &ops.proj_g[j] * &ops.number;
    }
    h += &ops.sigma_minus[0] * &ops.sigma_plus[1] + &ops.sigma_plus[0] * &ops.sigma_minus[1];
    h * Complex64::new(0.5 * params.lambda, 0.0)
}

/// Truncated coherent state, renormalised on the retained levels.
pub fn coherent_vector(alpha: Complex64, trunc: &FockTruncation) -> Result<DVector<Complex64>> {
    let alpha_sq = alpha.norm_sqr();
    let check = FockTruncation::new(trunc.n_max, alpha_sq);
    check.check(alpha_sq, DEFAULT_TAIL_BOUND)?;
    let mut v = DVector::<Complex64>::zeros(trunc.n_max + 1);
    let mut amp = ONE;
    v[0] = amp;
    for n in 1..=trunc.n_max {
        amp *= alpha / (n as f64).sqrt();
        v[n] = amp;
    }
    let norm = v.norm();
    Ok(v.unscale(norm))
}

/// Joint atom–field density matrix.
#[derive(Debug, Clone)]
pub struct JointState {
    pub n_max: usize,
    pub rho: DMatrix<Complex64>,
}

impl JointState {
    /// `ρ_atoms ⊗ σ_field`.
    pub fn product(atoms: &XState, field: &DMatrix<Complex64>) -> Self {
        let atoms = atoms.to_matrix();
        let atoms = DMatrix::from_column_slice(4, 4, atoms.as_slice());
        JointState {
            n_max: field.nrows() - 1,
            rho: atoms.kronecker(field),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.rho, &self.rho.adjoint())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        sym.symmetric_eigenvalues().min()
    }
}

fn max_abs_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Reduced atomic state plus the largest element outside the X pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedState {
    pub state: XState,
    pub off_x_residual: f64,
}

pub fn trace_out_field(joint: &JointState) -> ReducedState {
    let nf = joint.n_max + 1;
    let mut m = [[ZERO; 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = (0..nf).map(|n| joint.rho[(i * nf + n, j * nf + n)]).sum();
        }
    }
    let mut off_x: f64 = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, entry) in row.iter().enumerate() {
            let in_pattern = i == j || i + j == 3;
            let size = if i == j { entry.im.abs() } else { entry.norm() };
            if !in_pattern || i == j {
                off_x = off_x.max(size);
            }
        }
    }
    let state = XState::from_complex([m[0][0].re, m[1][1].re, m[2][2].re, m[3][3].re], m[0][3], m[1][2]);
    ReducedState {
        state,
        off_x_residual: off_x,
    }
}

/// Coordinate-list view of a dense operator, skipping exact zeros.
struct Sparse {
    entries: Vec<(usize, usize, Complex64)>,
}

impl Sparse {
    fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let mut entries = Vec::new();
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let v = m[(i, j)];
                if v != ZERO {
                    entries.push((i, j, v));
                }
            }
        }
        Sparse { entries }
    }

    /// `out += self · x`
    fn left_mul_add(&self, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>, scale: Complex64) {
        let d = x.ncols();
        for &(i, j, v) in &self.entries {
            let s = v * scale;
            for c in 0..d {
                out[(i, c)] += s * x[(j, c)];
            }
        }
    }

    /// `out += x · self`
    fn right_mul_add(&self, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>, scale: Complex64) {
        let d = x.nrows();
        for &(i, j, v) in &self.entries {
            let s = v * scale;
            let src = x.column(i);
            let mut dst = out.column_mut(j);
            for r in 0..d {
                dst[r] += s * src[r];
            }
        }
    }
}

struct Generator {
    hamiltonian: Sparse,
    a: Sparse,
    a_dag: Sparse,
    number_diag: Vec<f64>,
    rate: f64,
}

impl Generator {
    fn new(params: &TCParams, trunc: &FockTruncation, convention: DecayConvention) -> Self {
        let ops = OperatorRep::new(trunc);
        let h = hamiltonian_from(&ops, params);
        Generator {
            hamiltonian: Sparse::from_dense(&h),
            a: Sparse::from_dense(&ops.a),
            a_dag: Sparse::from_dense(&ops.a_dag),
            number_diag: ops.number.diagonal().iter().map(|z| z.re).collect(),
            rate: convention.dissipator_rate(params.kappa),
        }
    }

    fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = rho.nrows();
        let mut out = DMatrix::<Complex64>::zeros(d, d);
        let i = Complex64::i();
        self.hamiltonian.left_mul_add(rho, &mut out, -i);
        self.hamiltonian.right_mul_add(rho, &mut out, i);
        if self.rate != 0.0 {
            let g = Complex64::new(self.rate, 0.0);
            let mut a_rho = DMatrix::<Complex64>::zeros(d, d);
            self.a.left_mul_add(rho, &mut a_rho, ONE);
            self.a_dag.right_mul_add(&a_rho, &mut out, 2.0 * g);
            for c in 0..d {
                for r in 0..d {
                    let n_sum = self.number_diag[r] + self.number_diag[c];
                    out[(r, c)] -= g * n_sum * rho[(r, c)];
                }
            }
        }
        out
    }

    fn rk4_step(&self, rho: &DMatrix<Complex64>, h: f64) -> DMatrix<Complex64> {
        let half = Complex64::new(0.5 * h, 0.0);
        let full = Complex64::new(h, 0.0);
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1 * half));
        let k3 = self.apply(&(rho + &k2 * half));
        let k4 = self.apply(&(rho + &k3 * full));
        rho + (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleSettings {
    pub trunc: FockTruncation,
    pub dt: f64,
    pub convention: DecayConvention,
    /// Eigenvalue spot check on every `spot_check_every`-th sample; 0 disables it.
    pub spot_check_every: usize,
}

impl OracleSettings {
    pub fn new(trunc: FockTruncation, dt: f64) -> Self {
        OracleSettings {
            trunc,
            dt,
            convention: DecayConvention::default(),
            spot_check_every: 10,
        }
    }

    /// Largest admissible step for `params` at this truncation.
    pub fn max_dt(&self, params: &TCParams) -> f64 {
        let n = self.trunc.n_max as f64;
        let scale = (params.lambda * (n + 1.0)).max(params.kappa * n);
        STEP_GUARD / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct RunDiagnostics {
    pub steps: usize,
    pub max_trace_drift: f64,
    /// Largest `max|ρ − ρ†|` seen before the per-step symmetrisation.
    pub max_hermiticity_drift: f64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct OracleRun {
    pub times: Vec<f64>,
    pub reduced: Vec<ReducedState>,
    pub final_state: JointState,
    pub diagnostics: RunDiagnostics,
}

/// Integrates from `ρ_atoms ⊗ |α⟩⟨α|` (α = √alpha_sq) and records the
/// reduced state at each of `sample_times` (physical time, ascending).
pub fn integrate(
    initial: &XState,
    params: &TCParams,
    settings: &OracleSettings,
    sample_times: &[f64],
) -> Result<OracleRun> {
    initial.ensure_valid()?;
    params.validate()?;
    let bound = settings.max_dt(params);
    if !(settings.dt > 0.0) || settings.dt > bound {
        return Err(Error::StepSize {
            dt: settings.dt,
            bound,
        });
    }
    if sample_times.windows(2).any(|w| w[1] < w[0]) || sample_times.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidGrid("oracle sample times must be ascending and ≥ 0".into()));
    }
    let vac = coherent_vector(Complex64::new(params.alpha_sq.sqrt(), 0.0), &settings.trunc)?;
    let field = &vac * vac.adjoint();
    let mut joint = JointState::product(initial, &field);
    let generator = Generator::new(params, &settings.trunc, settings.convention);

    let mut diag = RunDiagnostics {
        min_eigenvalue: f64::INFINITY,
        ..Default::default()
    };
    let mut reduced = Vec::with_capacity(sample_times.len());
    let mut t = 0.0;
    for (k, &target) in sample_times.iter().enumerate() {
        let span = target - t;
        if span > 0.0 {
            let n_steps = (span / settings.dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / n_steps as f64;
            for _ in 0..n_steps {
                let next = generator.rk4_step(&joint.rho, h);
                let adj = next.adjoint();
                diag.max_hermiticity_drift = diag.max_hermiticity_drift.max(max_abs_diff(&next, &adj));
                joint.rho = (next + adj) * Complex64::new(0.5, 0.0);
                diag.max_trace_drift = diag.max_trace_drift.max((joint.trace() - ONE).norm());
                diag.steps += 1;
            }
            t = target;
        }
        if settings.spot_check_every > 0 && k % settings.spot_check_every == 0 {
            diag.min_eigenvalue = diag.min_eigenvalue.min(joint.min_eigenvalue());
        }
        reduced.push(trace_out_field(&joint));
    }
    Ok(OracleRun {
        times: sample_times.to_vec(),
        reduced,
        final_state: joint,
        diagnostics: diag,
    })
}

/// Largest component-wise gap between two X states over
/// `(p1..p4, Re/Im ρ14, Re/Im ρ23)`.
pub fn component_gap(a: &XState, b: &XState) -> f64 {
    let pops = a
        .populations()
        .iter()
        .zip(b.populations())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let d14 = a.rho14() - b.rho14();
    let d23 = a.rho23() - b.rho23();
    [pops, d14.re.abs(), d14.im.abs(), d23.re.abs(), d23.im.abs()]
        .into_iter()
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationSample {
    pub t: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub convention: DecayConvention,
    pub n_max: usize,
    pub dt: f64,
    pub samples: Vec<DeviationSample>,
    pub max_deviation: f64,
    pub t_at_max: f64,
    pub max_off_x_residual: f64,
    /// Largest drift of the oracle's p1 and p4 from their initial values.
    pub max_constant_drift: f64,
    pub diagnostics: RunDiagnostics,
}

/// Closed-form dynamics against the master-equation oracle on `t_grid`.
pub fn compare(
    initial: &XState,
    params: &TCParams,
    t_grid: &[f64],
    settings: &OracleSettings,
) -> Result<DeviationReport> {
    let run = integrate(initial, params, settings, t_grid)?;
    let mut samples = Vec::with_capacity(t_grid.len());
    let (mut max_deviation, mut t_at_max) = (0.0, t_grid.first().copied().unwrap_or(0.0));
    let (mut max_off_x, mut max_constant): (f64, f64) = (0.0, 0.0);
    for (&t, red) in t_grid.iter().zip(&run.reduced) {
        let analytic = evolve(initial, params, t)?;
        let deviation = component_gap(&analytic, &red.state);
        if deviation > max_deviation {
            max_deviation = deviation;
            t_at_max = t;
        }
        max_off_x = max_off_x.max(red.off_x_residual);
        max_constant = max_constant
            .max((red.state.p1 - initial.p1).abs())
            .max((red.state.p4 - initial.p4).abs());
        samples.push(DeviationSample { t, deviation });
    }
    Ok(DeviationReport {
        convention: settings.convention,
        n_max: settings.trunc.n_max,
        dt: settings.dt,
        samples,
        max_deviation,
        t_at_max,
        max_off_x_residual: max_off_x,
        max_constant_drift: max_constant,
        diagnostics: run.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(kappa: f64, alpha_sq: f64) -> TCParams {
        TCParams {
            lambda: 1.0,
            kappa,
            alpha_sq,
        }
    }

    fn index(atom: usize, n: usize, n_max: usize) -> usize {
        atom * (n_max + 1) + n
    }

    #[test]
    fn poisson_tail_values() {
        assert_eq!(poisson_tail(0.0, 0), 0.0);
        // x = 1, n_max = 0: 1 − e^{−1}
        assert!((poisson_tail(1.0, 0) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let t = FockTruncation::new(20, 1.0);
        assert!(t.tail_mass < 1e-12);
        let auto = FockTruncation::auto(1.2, DEFAULT_TAIL_BOUND);
        assert!(auto.n_max <= 25);
        assert!(poisson_tail(1.2, auto.n_max - 1) >= DEFAULT_TAIL_BOUND);
    }

    #[test]
    fn ladder_operator_algebra() {
        let trunc = FockTruncation::new(6, 0.0);
        let ops = OperatorRep::new(&trunc);
        for (k, z) in ops.number.diagonal().iter().enumerate() {
            assert!((z.re - (k % 7) as f64).abs() < 1e-14);
        }
        let comm = &ops.a * &ops.a_dag - &ops.a_dag * &ops.a;
        for atom in 0..4 {
            for n in 0..6 {
                let i = index(atom, n, 6);
                for j in 0..trunc.dim() {
                    let want = if i == j { ONE } else { ZERO };
                    assert!((comm[(i, j)] - want).norm() < 1e-14);
                }
            }
        }
        for j in 0..2 {
            let anti = &ops.sigma_plus[j] * &ops.sigma_minus[j] + &ops.sigma_minus[j] * &ops.sigma_plus[j];
            assert!(max_abs_diff(&anti, &ops.identity) < 1e-15);
            assert!(max_abs_diff(&(&ops.proj_e[j] + &ops.proj_g[j]), &ops.identity) < 1e-15);
        }
    }

    #[test]
    fn hamiltonian_structure() {
        let p = params(0.05, 0.6);
        let trunc = FockTruncation::new(5, 0.6);
        let h = build_hamiltonian(&p, &trunc);
        assert!(max_abs_diff(&h, &h.adjoint()) <= 1e-14);
        for n in 0..=5 {
            // exchange coupling |2⟩ ↔ |3⟩
            assert!((h[(index(1, n, 5), index(2, n, 5))] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            // Stark shifts: |gg,n⟩ → −λn, |ee,n⟩ → λ(n+1), mixed → λ/2
            assert!((h[(index(0, n, 5), index(0, n, 5))].re + n as f64).abs() < 1e-15);
            assert!((h[(index(3, n, 5), index(3, n, 5))].re - (n as f64 + 1.0)).abs() < 1e-15);
            assert!((h[(index(1, n, 5), index(1, n, 5))].re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn single_fock_level_edge() {
        let trunc = FockTruncation::new(0, 0.0);
        let h = build_hamiltonian(&params(0.0, 0.0), &trunc);
        assert_eq!(h.nrows(), 4);
        // aa† acts as 1, a†a as 0 on the only retained level
        assert_eq!(h[(3, 3)], Complex64::new(1.0, 0.0));
        assert_eq!(h[(0, 0)], ZERO);
        assert_eq!(h[(1, 2)], Complex64::new(0.5, 0.0));
    }

    #[test]
    fn coherent_vectors() {
        let trunc = FockTruncation::new(20, 1.0);
        let vac = coherent_vector(ZERO, &trunc).unwrap();
        assert_eq!(vac[0], ONE);
        assert!(vac.iter().skip(1).all(|z| *z == ZERO));
        let v = coherent_vector(Complex64::new(1.0, 0.0), &trunc).unwrap();
        assert!((v.norm_squared() - 1.0).abs() < 1e-14);
        let small = FockTruncation::new(3, 1.0);
        assert!(matches!(
            coherent_vector(Complex64::new(1.0, 0.0), &small),
            Err(Error::Truncation { required, .. }) if required > 3
        ));
    }

    #[test]
    fn partial_trace_of_products() {
        let atoms = XState::new([0.25, 3.0 / 16.0, 5.0 / 16.0, 0.25], 0.25, 0.05).with_phases(0.3, 1.0);
        let trunc = FockTruncation::new(14, 0.8);
        let v = coherent_vector(Complex64::new(0.8f64.sqrt(), 0.0), &trunc).unwrap();
        let joint = JointState::product(&atoms, &(&v * v.adjoint()));
        let red = trace_out_field(&joint);
        assert!(component_gap(&red.state, &atoms) < 1e-15);
        assert!(red.off_x_residual < 1e-16);

        let d = trunc.dim();
        let mixed = JointState {
            n_max: 14,
            rho: DMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0),
        };
        let red = trace_out_field(&mixed);
        assert!(component_gap(&red.state, &XState::maximally_mixed()) < 1e-15);
    }

    #[test]
    fn pure_exchange_rabi_oscillation() {
        // |g_A e_B⟩ ⊗ vacuum: p2(t) = cos²(λt/2)
        let atoms = XState::diagonal([0.0, 1.0, 0.0, 0.0]);
        let p = params(0.0, 0.0);
        let settings = OracleSettings::new(FockTruncation::new(2, 0.0), 1e-3);
        let times: Vec<f64> = (0..=40).map(|k| 0.25 * k as f64).collect();
        let run = integrate(&atoms, &p, &settings, &times).unwrap();
        for (t, red) in times.iter().zip(&run.reduced) {
            let want = (0.5 * t).cos().powi(2);
            assert!((red.state.p2 - want).abs() < 1e-9);
            assert!((red.state.p3 - (1.0 - want)).abs() < 1e-9);
        }
        assert!(run.diagnostics.max_trace_drift < 1e-8);
    }

    #[test]
    fn field_free_comparison_is_integrator_limited() {
        let atoms = XState::new([0.25, 3.0 / 16.0, 5.0 / 16.0, 0.25], 0.25, 0.05);
        let p = params(0.0, 0.0);
        let settings = OracleSettings::new(FockTruncation::new(0, 0.0), 1e-3);
        let grid: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        let report = compare(&atoms, &p, &grid, &settings).unwrap();
        assert!(report.max_deviation <= 1e-6, "{}", report.max_deviation);
        let report = compare(&atoms, &p, &[0.0], &settings).unwrap();
        assert!(report.max_deviation < 1e-14);
    }

    #[test]
    fn step_guard() {
        let atoms = XState::bell();
        let p = params(0.05, 0.6);
        let trunc = FockTruncation::auto(0.6, DEFAULT_TAIL_BOUND);
        let coarse = OracleSettings::new(trunc, 0.5);
        assert!(matches!(
            integrate(&atoms, &p, &coarse, &[0.0, 1.0]),
            Err(Error::StepSize { .. })
        ));
        let ok = OracleSettings::new(FockTruncation::new(25, 0.6), 1e-3);
        assert!(ok.max_dt(&p) >= 1e-3);
    }
}
