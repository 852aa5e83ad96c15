//! Two-qubit X states and the entropy primitives built on them.
//!
//! Basis ordering is fixed throughout the crate:
//!
//! | index | ket          |
//! |-------|--------------|
//! | 0     | `|g_A g_B⟩`  |
//! | 1     | `|g_A e_B⟩`  |
//! | 2     | `|e_A g_B⟩`  |
//! | 3     | `|e_A e_B⟩`  |
//!
//! i.e. `index = 2·a + b` with `g = 0`, `e = 1`. The only off-diagonal
//! elements an X state may carry are ρ14 (indices 0,3) and ρ23 (indices 1,2).

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when no explicit one is supplied.
pub const STATE_TOL: f64 = 1e-12;

/// X-form two-qubit density matrix.
///
/// Populations `p1..p4` are ρ11..ρ44. Coherences are stored in polar form:
/// ρ14 = `r14·e^{i·phi14}` and ρ23 = `r23·e^{i·phi23}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XState {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    #[serde(default)]
    pub r14: f64,
    #[serde(default)]
    pub phi14: f64,
    #[serde(default)]
    pub r23: f64,
    #[serde(default)]
    pub phi23: f64,
}

/// Reduced single-qubit state. X coherences never reach it, so it is diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitMarginal {
    pub p_ground: f64,
    pub p_excited: f64,
}

impl QubitMarginal {
    pub fn entropy(&self) -> f64 {
        binary_entropy(self.p_ground)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NonFinite,
    TraceNotUnity { sum: f64 },
    NegativePopulation { index: usize, value: f64 },
    NegativeMagnitude { which: &'static str, value: f64 },
    OuterBlock { p1_p4: f64, r14_sq: f64 },
    InnerBlock { p2_p3: f64, r23_sq: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite => write!(f, "non-finite entry"),
            Violation::TraceNotUnity { sum } => write!(f, "populations sum to {sum}, not 1"),
            Violation::NegativePopulation { index, value } => {
                write!(f, "population p{} = {value} is negative", index + 1)
            }
            Violation::NegativeMagnitude { which, value } => {
                write!(f, "coherence magnitude {which} = {value} is negative")
            }
            Violation::OuterBlock { p1_p4, r14_sq } => {
                write!(f, "outer block not positive: p1·p4 = {p1_p4} < |ρ14|² = {r14_sq}")
            }
            Violation::InnerBlock { p2_p3, r23_sq } => {
                write!(f, "inner block not positive: p2·p3 = {p2_p3} < |ρ23|² = {r23_sq}")
            }
        }
    }
}

/// List of violated invariants; empty means the state is physical.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl XState {
    /// State with real, non-negative coherences.
    pub fn new(p: [f64; 4], r14: f64, r23: f64) -> Self {
        XState {
            p1: p[0],
            p2: p[1],
            p3: p[2],
            p4: p[3],
            r14,
            phi14: 0.0,
            r23,
            phi23: 0.0,
        }
    }

    pub fn diagonal(p: [f64; 4]) -> Self {
        Self::new(p, 0.0, 0.0)
    }

    /// Sets the coherence phases, wrapped into `[0, 2π)`.
    pub fn with_phases(mut self, phi14: f64, phi23: f64) -> Self {
        self.phi14 = phi14.rem_euclid(TAU);
        self.phi23 = phi23.rem_euclid(TAU);
        self
    }

    /// Builds a state from complex coherences.
    pub fn from_complex(p: [f64; 4], rho14: Complex64, rho23: Complex64) -> Self {
        let (r14, phi14) = rho14.to_polar();
        let (r23, phi23) = rho23.to_polar();
        Self::new(p, r14, r23).with_phases(phi14, phi23)
    }

    /// The Bell state (|gg⟩ + |ee⟩)/√2.
    pub fn bell() -> Self {
        Self::new([0.5, 0.0, 0.0, 0.5], 0.5, 0.0)
    }

    pub fn maximally_mixed() -> Self {
        Self::diagonal([0.25; 4])
    }

    pub fn populations(&self) -> [f64; 4] {
        [self.p1, self.p2, self.p3, self.p4]
    }

    pub fn rho14(&self) -> Complex64 {
        Complex64::from_polar(self.r14, self.phi14)
    }

    pub fn rho23(&self) -> Complex64 {
        Complex64::from_polar(self.r23, self.phi23)
    }

    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut violations = Vec::new();
        let entries = [
            self.p1, self.p2, self.p3, self.p4, self.r14, self.phi14, self.r23, self.phi23,
        ];
        if entries.iter().any(|x| !x.is_finite()) {
            violations.push(Violation::NonFinite);
            return ValidationReport { violations };
        }
        let p = self.populations();
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > tol {
            violations.push(Violation::TraceNotUnity { sum });
        }
        for (index, &value) in p.iter().enumerate() {
            if value < -tol {
                violations.push(Violation::NegativePopulation { index, value });
            }
        }
        for (which, value) in [("r14", self.r14), ("r23", self.r23)] {
            if value < -tol {
                violations.push(Violation::NegativeMagnitude { which, value });
            }
        }
        let (p1_p4, r14_sq) = (self.p1 * self.p4, self.r14 * self.r14);
        if p1_p4 < r14_sq - tol {
            violations.push(Violation::OuterBlock { p1_p4, r14_sq });
        }
        let (p2_p3, r23_sq) = (self.p2 * self.p3, self.r23 * self.r23);
        if p2_p3 < r23_sq - tol {
            violations.push(Violation::InnerBlock { p2_p3, r23_sq });
        }
        ValidationReport { violations }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate(STATE_TOL);
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidState(report))
        }
    }

    /// Spectrum from the two 2×2 blocks, outer block first. Tiny negative
    /// values are clamped to zero.
    pub fn eigenvalues(&self) -> Result<[f64; 4]> {
        self.ensure_valid()?;
        Ok(self.eigenvalues_unchecked())
    }

    pub(crate) fn eigenvalues_unchecked(&self) -> [f64; 4] {
        let (o_plus, o_minus) = block_eigenvalues(self.p1, self.p4, self.r14);
        let (i_plus, i_minus) = block_eigenvalues(self.p2, self.p3, self.r23);
        [o_plus, o_minus, i_plus, i_minus].map(|x| x.max(0.0))
    }

    pub fn marginal_a(&self) -> Result<QubitMarginal> {
        self.ensure_valid()?;
        Ok(QubitMarginal {
            p_ground: self.p1 + self.p2,
            p_excited: self.p3 + self.p4,
        })
    }

    pub fn marginal_b(&self) -> Result<QubitMarginal> {
        self.ensure_valid()?;
        Ok(QubitMarginal {
            p_ground: self.p1 + self.p3,
            p_excited: self.p2 + self.p4,
        })
    }

    /// von Neumann entropy of the joint state, in bits.
    pub fn entropy(&self) -> Result<f64> {
        entropy_bits(&self.eigenvalues()?)
    }

    /// `S(ρ_A) + S(ρ_B) − S(ρ_AB)` in bits.
    pub fn mutual_information(&self) -> Result<f64> {
        let s_a = self.marginal_a()?.entropy();
        let s_b = self.marginal_b()?.entropy();
        Ok(s_a + s_b - self.entropy()?)
    }

    /// Dense 4×4 matrix in the crate's basis ordering.
    pub fn to_matrix(&self) -> Matrix4<Complex64> {
        let mut m = Matrix4::zeros();
        for (k, &p) in self.populations().iter().enumerate() {
            m[(k, k)] = Complex64::new(p, 0.0);
        }
        m[(0, 3)] = self.rho14();
        m[(3, 0)] = self.rho14().conj();
        m[(1, 2)] = self.rho23();
        m[(2, 1)] = self.rho23().conj();
        m
    }
}

fn block_eigenvalues(a: f64, d: f64, r: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(r);
    (mean + radius, mean - radius)
}

/// `x·log₂x` with the convention `0·log 0 = 0`.
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Shannon entropy of `(p, 1 − p)` in bits. `p` is clamped to `[0, 1]`.
pub fn binary_entropy(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    -(xlog2x(p) + xlog2x(1.0 - p))
}

/// `−Σ pᵢ log₂ pᵢ` in bits.
pub fn entropy_bits(probabilities: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for &p in probabilities {
        if p < -STATE_TOL || !p.is_finite() {
            return Err(Error::NegativeProbability { value: p });
        }
        acc -= xlog2x(p);
    }
    Ok(acc.max(0.0))
}
