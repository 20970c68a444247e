//! Brute-force and exact-integration checks of the analytic dephasing
//! formulas and of the Born conservation law.
//!
//! Everything here evolves the closed system S + M exactly (no bath), either
//! by summing over all 2^N magnet configurations or by integrating the
//! Schroedinger equation in the symmetric sector: every implemented
//! Hamiltonian depends on the magnet only through its total magnetization, so
//! a (tested spin) x (magnetization index) amplitude vector of dimension
//! 2(N+1) is exact.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::spin::SpinDensityMatrix;

pub const MAX_ENUMERATION_N: usize = 20;
pub const MAX_CORRELATION_N: usize = 16;
pub const MAX_CORRELATION_K: usize = 3;
pub const MAX_EVOLVE_N: usize = 12;

/// Norm drift allowed over a whole nonideal evolution.
pub const NORM_DRIFT_LIMIT: f64 = 1e-8;

/// Magnet self-energy for total magnetization M = 2k - N, the quartet
/// mean-field term scaled to E(m) = -N J m^4/4.
fn quartic_energy(big_m: f64, n: f64, j: f64) -> f64 {
    -j * big_m.powi(4) / (4.0 * n.powi(3))
}

/// Kahan-compensated accumulator; the configuration sums run over up to 2^20
/// terms and plain summation would eat the 1e-12 agreement budget.
#[derive(Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Off-diagonal decay ratio r_ud(t)/r_ud(0) by full enumeration of the 2^N
/// magnet configurations, each carrying its explicit sector phases.
///
/// With `include_quartic` the magnet self-energy phases are carried in both
/// sectors and cancel in the off-diagonal product; the result equals the
/// quartic-free value, confirming that any energy that is a function of the
/// total magnetization leaves |r_ud(t)| unchanged.
pub fn enumerate_truncation_factor(n: usize, g: f64, t: f64, include_quartic: bool) -> Result<f64> {
    if n == 0 || n > MAX_ENUMERATION_N {
        return Err(Error::SizeLimit(format!(
            "enumeration supports 1 <= N <= {MAX_ENUMERATION_N}, got {n}"
        )));
    }
    let nf = n as f64;
    let weight = 0.5f64.powi(n as i32);
    let mut re = Compensated::default();
    let mut im = Compensated::default();
    for config in 0u32..(1u32 << n) {
        let ups = config.count_ones() as f64;
        let big_m = 2.0 * ups - nf;
        let e_m = if include_quartic {
            quartic_energy(big_m, nf, 1.0)
        } else {
            0.0
        };
        // sector energies under H_SA = -g s_z M (plus optional self-energy)
        let e_up = -g * big_m + e_m;
        let e_down = g * big_m + e_m;
        let phase_up = Complex64::from_polar(1.0, -e_up * t);
        let phase_down = Complex64::from_polar(1.0, -e_down * t);
        let term = weight * phase_up * phase_down.conj();
        re.add(term.re);
        im.add(term.im);
    }
    debug_assert!(im.sum.abs() < 1e-9, "configuration sum must be real");
    Ok(re.sum)
}

/// Magnitude of the correlation between the tested spin's transverse
/// components and the first k magnet spins, divided by |r_ud(0)|, by direct
/// summation over all magnet configurations.
pub fn correlation_oracle(k: usize, n: usize, g: f64, t: f64) -> Result<f64> {
    if k == 0 || k > MAX_CORRELATION_K {
        return Err(Error::Domain(format!(
            "correlation order k = {k} outside 1..={MAX_CORRELATION_K}"
        )));
    }
    if n < k || n > MAX_CORRELATION_N {
        return Err(Error::SizeLimit(format!(
            "correlation oracle supports k <= N <= {MAX_CORRELATION_N}, got N = {n}"
        )));
    }
    let nf = n as f64;
    let weight = 0.5f64.powi(n as i32);
    let mask = (1u32 << k) - 1;
    let mut re = Compensated::default();
    let mut im = Compensated::default();
    for config in 0u32..(1u32 << n) {
        let big_m = 2.0 * config.count_ones() as f64 - nf;
        let sign = if (config & mask).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let term = sign * weight * Complex64::from_polar(1.0, 2.0 * g * big_m * t);
        re.add(term.re);
        im.add(term.im);
    }
    Ok(Complex64::new(re.sum, im.sum).norm())
}

/// Pure state of (tested spin) x (symmetric magnet sector), amplitudes
/// indexed by (spin basis up/down, magnetization index k = 0..N).
#[derive(Debug, Clone)]
pub struct SymmetricSectorState {
    n: usize,
    /// Layout: [up_0 .. up_N, down_0 .. down_N].
    amps: Vec<Complex64>,
}

impl SymmetricSectorState {
    /// Product state chi (tested spin) x maximally mixed magnet, the latter
    /// folded in as sqrt(C(N,k)/2^N) amplitude per magnetization index.
    pub fn product_state(n: usize, chi_up: Complex64, chi_down: Complex64) -> Self {
        let dim = n + 1;
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * dim];
        let mut binom = vec![1.0f64; dim];
        for k in 0..n {
            binom[k + 1] = binom[k] * (n - k) as f64 / (k + 1) as f64;
        }
        let total = 2.0f64.powi(n as i32);
        for k in 0..dim {
            let root = (binom[k] / total).sqrt();
            amps[k] = chi_up * root;
            amps[dim + k] = chi_down * root;
        }
        SymmetricSectorState { n, amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Unnormalized reduced 2x2 matrix of the tested spin.
    fn reduced(&self) -> (f64, f64, Complex64) {
        let dim = self.n + 1;
        let mut uu = 0.0;
        let mut dd = 0.0;
        let mut ud = Complex64::new(0.0, 0.0);
        for k in 0..dim {
            uu += self.amps[k].norm_sqr();
            dd += self.amps[dim + k].norm_sqr();
            ud += self.amps[k] * self.amps[dim + k].conj();
        }
        (uu, dd, ud)
    }
}

/// Reduced tested-spin matrix along a nonideal trajectory; the entries carry
/// whatever the dynamics produced, without density-matrix validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedSpin {
    pub r_uu: f64,
    pub r_dd: f64,
    pub r_ud: Complex64,
}

#[derive(Debug, Clone)]
pub struct NonidealTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ReducedSpin>,
    /// Born-deviation measure delta(t) = |r_uu(t) - r_uu(0)|.
    pub born_deviation: Vec<f64>,
    pub max_norm_drift: f64,
}

struct SectorHamiltonian {
    /// Diagonal energies, same layout as the state amplitudes.
    diag: Vec<f64>,
    b_x: f64,
    dim: usize,
}

impl SectorHamiltonian {
    fn new(params: &ModelParams, include_quartic: bool) -> Self {
        let n = params.n;
        let dim = n + 1;
        let nf = n as f64;
        let mut diag = vec![0.0; 2 * dim];
        for k in 0..dim {
            let big_m = 2.0 * k as f64 - nf;
            let e_m = if include_quartic {
                quartic_energy(big_m, nf, params.j)
            } else {
                0.0
            };
            diag[k] = -params.g * big_m + e_m;
            diag[dim + k] = params.g * big_m + e_m;
        }
        SectorHamiltonian {
            diag,
            b_x: params.b_x,
            dim,
        }
    }

    /// out = -i H psi
    fn apply(&self, psi: &[Complex64], out: &mut [Complex64]) {
        let minus_i = Complex64::new(0.0, -1.0);
        for k in 0..self.dim {
            let up = psi[k];
            let down = psi[self.dim + k];
            out[k] = minus_i * (self.diag[k] * up - self.b_x * down);
            out[self.dim + k] = minus_i * (self.diag[self.dim + k] * down - self.b_x * up);
        }
    }
}

/// Eigendecomposition of a 2x2 Hermitian density matrix into up to two
/// (weight, spinor) branches.
fn density_branches(rho: &SpinDensityMatrix) -> Vec<(f64, Complex64, Complex64)> {
    let a = rho.r_uu();
    let d = rho.r_dd();
    let c = rho.r_ud();
    if c.norm() < 1e-15 {
        return vec![
            (a, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            (d, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
        ];
    }
    let half_diff = 0.5 * (a - d);
    let radius = (half_diff * half_diff + c.norm_sqr()).sqrt();
    let mean = 0.5 * (a + d);
    let mut branches = Vec::new();
    for lambda in [mean + radius, mean - radius] {
        // (M - lambda) v = 0 with v = (c, lambda - a)
        let v_up = c;
        let v_down = Complex64::new(lambda - a, 0.0);
        let norm = (v_up.norm_sqr() + v_down.norm_sqr()).sqrt();
        branches.push((lambda, v_up / norm, v_down / norm));
    }
    branches
}

/// Integrate the Schroedinger dynamics of S + M in the symmetric sector under
/// H = -b_x s_x - g s_z M (optionally plus the quartic magnet self-energy),
/// starting from rho0 x (maximally mixed magnet).
///
/// Returns the reduced tested-spin matrix at `n_samples + 1` uniformly spaced
/// times together with the Born-deviation measure. Errors with a step-size
/// guard when the state norm drifts by more than [`NORM_DRIFT_LIMIT`].
pub fn evolve_nonideal(
    params: &ModelParams,
    rho0: &SpinDensityMatrix,
    t_final: f64,
    dt: f64,
    include_quartic: bool,
    n_samples: usize,
) -> Result<NonidealTrajectory> {
    params.validate()?;
    if params.n > MAX_EVOLVE_N {
        return Err(Error::SizeLimit(format!(
            "nonideal evolution supports N <= {MAX_EVOLVE_N}, got {}",
            params.n
        )));
    }
    if !(t_final > 0.0) || !(dt > 0.0) || n_samples == 0 {
        return Err(Error::Validation(format!(
            "bad evolution window: t_final = {t_final}, dt = {dt}, n_samples = {n_samples}"
        )));
    }

    let hamiltonian = SectorHamiltonian::new(params, include_quartic);
    let branches: Vec<(f64, SymmetricSectorState)> = density_branches(rho0)
        .into_iter()
        .filter(|(w, _, _)| *w > 1e-14)
        .map(|(w, up, down)| (w, SymmetricSectorState::product_state(params.n, up, down)))
        .collect();

    let segment = t_final / n_samples as f64;
    let steps_per_segment = (segment / dt).ceil().max(1.0) as usize;
    let h = segment / steps_per_segment as f64;

    let dim = 2 * (params.n + 1);
    let mut k1 = vec![Complex64::new(0.0, 0.0); dim];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut stage = k1.clone();

    let mut states = Vec::with_capacity(n_samples + 1);
    let mut times = Vec::with_capacity(n_samples + 1);
    let mut max_norm_drift = 0.0f64;

    let mut branch_states: Vec<(f64, SymmetricSectorState)> = branches;
    let reduce = |branch_states: &[(f64, SymmetricSectorState)]| -> ReducedSpin {
        let mut r_uu = 0.0;
        let mut r_dd = 0.0;
        let mut r_ud = Complex64::new(0.0, 0.0);
        for (w, state) in branch_states {
            let (uu, dd, ud) = state.reduced();
            let trace = uu + dd;
            r_uu += w * (uu / trace);
            r_dd += w * (dd / trace);
            r_ud += w * (ud / trace);
        }
        ReducedSpin { r_uu, r_dd, r_ud }
    };

    times.push(0.0);
    states.push(reduce(&branch_states));

    for sample in 1..=n_samples {
        for _ in 0..steps_per_segment {
            for (_, state) in branch_states.iter_mut() {
                let psi = &mut state.amps;
                hamiltonian.apply(psi, &mut k1);
                for i in 0..dim {
                    stage[i] = psi[i] + 0.5 * h * k1[i];
                }
                hamiltonian.apply(&stage, &mut k2);
                for i in 0..dim {
                    stage[i] = psi[i] + 0.5 * h * k2[i];
                }
                hamiltonian.apply(&stage, &mut k3);
                for i in 0..dim {
                    stage[i] = psi[i] + h * k3[i];
                }
                hamiltonian.apply(&stage, &mut k4);
                for i in 0..dim {
                    psi[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        for (_, state) in &branch_states {
            max_norm_drift = max_norm_drift.max((state.norm() - 1.0).abs());
        }
        if max_norm_drift > NORM_DRIFT_LIMIT {
            return Err(Error::Guard {
                message: format!(
                    "norm drift {max_norm_drift:.3e} exceeds {NORM_DRIFT_LIMIT:.0e} at t = {}",
                    sample as f64 * segment
                ),
                suggested_dt: Some(h / 2.0),
            });
        }
        times.push(sample as f64 * segment);
        states.push(reduce(&branch_states));
    }

    let r_uu0 = rho0.r_uu();
    let born_deviation = states.iter().map(|s| (s.r_uu - r_uu0).abs()).collect();
    Ok(NonidealTrajectory {
        times,
        states,
        born_deviation,
        max_norm_drift,
    })
}
