use crate::error::{Error, Result};

/// Sign of the tested spin's conserved z-eigenvalue, labelling the sector
/// in which the apparatus dynamics is conditioned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Up,
    Down,
}

impl Sector {
    pub fn sign(self) -> f64 {
        match self {
            Sector::Up => 1.0,
            Sector::Down => -1.0,
        }
    }

    pub fn flip(self) -> Sector {
        match self {
            Sector::Up => Sector::Down,
            Sector::Down => Sector::Up,
        }
    }

    pub const BOTH: [Sector; 2] = [Sector::Up, Sector::Down];
}

impl std::fmt::Display for Sector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Sector::Up => write!(f, "+1"),
            Sector::Down => write!(f, "-1"),
        }
    }
}

/// Model parameters in natural units (hbar = k_B = 1, energies in units of J).
///
/// * `n` — number of magnet (pointer) spins N
/// * `j` — quartet coupling energy J, the energy unit (normally 1)
/// * `temperature` — bath temperature T
/// * `gamma` — dimensionless magnet-bath coupling (sets the kinetic rate scale)
/// * `debye_cutoff` — bath Debye cutoff frequency Gamma
/// * `g` — system-apparatus coupling
/// * `n_tested` — number of spins in the tested system (1 for a single spin)
/// * `b_x` — transverse field on the tested spin (0 for an ideal measurement)
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub j: f64,
    pub temperature: f64,
    pub gamma: f64,
    pub debye_cutoff: f64,
    pub g: f64,
    pub n_tested: usize,
    pub b_x: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n: 100,
            j: 1.0,
            temperature: 0.2,
            gamma: 0.01,
            debye_cutoff: 10.0,
            g: 0.05,
            n_tested: 1,
            b_x: 0.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let mut violations = Vec::new();
        if self.n < 2 {
            violations.push(format!("N = {} must be >= 2", self.n));
        }
        if !(self.j > 0.0) || !self.j.is_finite() {
            violations.push(format!("J = {} must be positive and finite", self.j));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            violations.push(format!(
                "T = {} must be positive and finite",
                self.temperature
            ));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            violations.push(format!(
                "gamma = {} must be positive and finite",
                self.gamma
            ));
        }
        if !(self.debye_cutoff > 0.0) || !self.debye_cutoff.is_finite() {
            violations.push(format!(
                "Gamma = {} must be positive and finite",
                self.debye_cutoff
            ));
        }
        if !(self.g >= 0.0) || !self.g.is_finite() {
            violations.push(format!("g = {} must be non-negative and finite", self.g));
        }
        if self.n_tested < 1 {
            violations.push(format!("n = {} must be >= 1", self.n_tested));
        }
        if !self.b_x.is_finite() {
            violations.push(format!("b_x = {} must be finite", self.b_x));
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(violations.join("; ")))
        }
    }

    /// Phenomenological per-spin transverse-coherence decay time used when no
    /// explicit bath time is configured: theta = 1/(gamma T).
    ///
    /// The bath model behind it is a single-rate exponential; the mapping from
    /// (gamma, Gamma, T) to theta is not derived from a microscopic bath.
    pub fn default_bath_theta(&self) -> f64 {
        1.0 / (self.gamma * self.temperature)
    }

    /// Magnetization lattice value m_k = (2k - N)/N for site index k.
    pub fn lattice_m(&self, k: usize) -> f64 {
        (2.0 * k as f64 - self.n as f64) / self.n as f64
    }
}
