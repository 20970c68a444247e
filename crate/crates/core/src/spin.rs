//! Density-matrix and ensemble-weight primitives for the tested spin-1/2.
//!
//! A 2x2 density matrix is stored through its independent elements
//! (`r_uu`, `r_ud`); `r_dd = 1 - r_uu` and `r_du = conj(r_ud)` are derived,
//! so the trace and hermiticity invariants hold by construction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities on 2x2 density matrices.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Tolerance on the norm of a Bloch direction vector.
pub const UNIT_TOL: f64 = 1e-9;

/// Density matrix of a spin-1/2 ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDensityMatrix {
    r_uu: f64,
    r_ud: Complex64,
}

/// Raw 2x2 entries, not constrained to be a valid density matrix.
/// Used for diagnostics and for constructing from externally supplied data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityEntries {
    pub r_uu: f64,
    pub r_dd: f64,
    pub r_ud: Complex64,
    pub r_du: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    Trace,
    Positivity,
    Hermiticity,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ViolationKind::Trace => write!(f, "trace"),
            ViolationKind::Positivity => write!(f, "positivity"),
            ViolationKind::Hermiticity => write!(f, "hermiticity"),
        }
    }
}

/// One violated density-matrix invariant, with the magnitude of the violation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub magnitude: f64,
}

/// Diagnostic check of the density-matrix invariants on raw entries.
///
/// Returns one entry per violated invariant; empty iff the entries form a
/// valid density matrix within [`ALGEBRA_TOL`].
pub fn validate(entries: &DensityEntries) -> Vec<Violation> {
    let mut out = Vec::new();

    let trace_dev = (entries.r_uu + entries.r_dd - 1.0).abs();
    if trace_dev > ALGEBRA_TOL {
        out.push(Violation {
            kind: ViolationKind::Trace,
            magnitude: trace_dev,
        });
    }

    let herm_dev = (entries.r_du - entries.r_ud.conj()).norm();
    if herm_dev > ALGEBRA_TOL {
        out.push(Violation {
            kind: ViolationKind::Hermiticity,
            magnitude: herm_dev,
        });
    }

    // det = r_uu r_dd - |r_ud||r_du|; for Hermitian entries this is the usual
    // r_uu r_dd - |r_ud|^2. Diagonal negativity also surfaces here.
    let det = entries.r_uu * entries.r_dd - entries.r_ud.norm() * entries.r_du.norm();
    let neg_diag = (-entries.r_uu).max(-entries.r_dd).max(0.0);
    let pos_dev = (-det).max(neg_diag);
    if pos_dev > ALGEBRA_TOL {
        out.push(Violation {
            kind: ViolationKind::Positivity,
            magnitude: pos_dev,
        });
    }

    out
}

impl SpinDensityMatrix {
    /// Build from the independent elements; `r_dd` is implied as `1 - r_uu`.
    pub fn new(r_uu: f64, r_ud: Complex64) -> Result<Self> {
        let rho = SpinDensityMatrix { r_uu, r_ud };
        let violations = validate(&rho.entries());
        if violations.is_empty() {
            Ok(rho)
        } else {
            let desc: Vec<String> = violations
                .iter()
                .map(|v| format!("{} violation {:.3e}", v.kind, v.magnitude))
                .collect();
            Err(Error::Validation(format!(
                "invalid density matrix: {}",
                desc.join(", ")
            )))
        }
    }

    /// Build from all four entries, checking trace, hermiticity and positivity.
    pub fn from_entries(entries: DensityEntries) -> Result<Self> {
        let violations = validate(&entries);
        if !violations.is_empty() {
            let desc: Vec<String> = violations
                .iter()
                .map(|v| format!("{} violation {:.3e}", v.kind, v.magnitude))
                .collect();
            return Err(Error::Validation(format!(
                "invalid density matrix: {}",
                desc.join(", ")
            )));
        }
        Ok(SpinDensityMatrix {
            r_uu: entries.r_uu,
            r_ud: entries.r_ud,
        })
    }

    /// Rank-1 projector onto the spin-1/2 state polarized along `direction`.
    ///
    /// r_uu = (1 + n_z)/2, r_ud = (n_x - i n_y)/2. The arithmetic is arranged
    /// so that mixing the two antipodal projectors with weight 1/2 recovers
    /// the maximally mixed state exactly in floating point.
    pub fn pure_state(direction: [f64; 3]) -> Result<Self> {
        let [x, y, z] = direction;
        let norm = (x * x + y * y + z * z).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Validation(format!(
                "direction ({x}, {y}, {z}) has norm {norm}, not a unit vector"
            )));
        }
        Ok(SpinDensityMatrix {
            r_uu: 0.5 + 0.5 * z,
            r_ud: Complex64::new(0.5 * x, -0.5 * y),
        })
    }

    /// The state 1/2 * identity.
    pub fn maximally_mixed() -> Self {
        SpinDensityMatrix {
            r_uu: 0.5,
            r_ud: Complex64::new(0.0, 0.0),
        }
    }

    pub fn r_uu(&self) -> f64 {
        self.r_uu
    }

    pub fn r_dd(&self) -> f64 {
        1.0 - self.r_uu
    }

    pub fn r_ud(&self) -> Complex64 {
        self.r_ud
    }

    pub fn r_du(&self) -> Complex64 {
        self.r_ud.conj()
    }

    pub fn entries(&self) -> DensityEntries {
        DensityEntries {
            r_uu: self.r_uu,
            r_dd: self.r_dd(),
            r_ud: self.r_ud,
            r_du: self.r_du(),
        }
    }

    /// Convex combination `lambda * self + (1 - lambda) * other`, entrywise.
    pub fn mix(&self, other: &SpinDensityMatrix, lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Validation(format!(
                "mixing weight lambda = {lambda} outside [0, 1]"
            )));
        }
        let w = 1.0 - lambda;
        Ok(SpinDensityMatrix {
            r_uu: lambda * self.r_uu + w * other.r_uu,
            r_ud: lambda * self.r_ud + w * other.r_ud,
        })
    }

    /// Max-norm distance between the 2x2 matrices.
    pub fn distance(&self, other: &SpinDensityMatrix) -> f64 {
        (self.r_uu - other.r_uu)
            .abs()
            .max((self.r_ud - other.r_ud).norm())
    }
}

/// Outcome weights of an ensemble split, q_i >= 0 with sum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleWeights {
    q: Vec<f64>,
}

impl EnsembleWeights {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Validation("empty weight vector".into()));
        }
        if let Some(bad) = q.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Validation(format!(
                "weight {bad} is negative or non-finite"
            )));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::Validation(format!(
                "weights sum to {sum}, deviation {:.3e} exceeds {ALGEBRA_TOL:.0e}",
                (sum - 1.0).abs()
            )));
        }
        Ok(EnsembleWeights { q })
    }

    pub fn weights(&self) -> &[f64] {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Combination rule for outcome frequencies when joining two sub-ensembles
    /// of `n1` and `n2` members: q_i = lambda q1_i + (1 - lambda) q2_i with
    /// lambda = n1/(n1 + n2).
    pub fn merge_frequencies(&self, other: &EnsembleWeights, n1: u64, n2: u64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Validation(format!(
                "outcome dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        if n1 + n2 == 0 {
            return Err(Error::Validation("n1 + n2 = 0, empty join".into()));
        }
        let lambda = n1 as f64 / (n1 + n2) as f64;
        let q = self
            .q
            .iter()
            .zip(&other.q)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        EnsembleWeights::new(q)
    }
}
