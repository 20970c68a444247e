//! Registration dynamics of the pointer magnetization distribution.
//!
//! The magnet magnetization lives on the lattice m_k = (2k - N)/N. Its
//! distribution P_s(m, t), conditioned on the tested-spin sector s, follows a
//! single-spin-flip heat-bath master equation with flip-count prefactors:
//!
//! ```text
//! W+(m) = gamma * [N(1-m)/2] / (1 + exp(dE+/T)),   m -> m + 2/N
//! W-(m) = gamma * [N(1+m)/2] / (1 + exp(dE-/T)),   m -> m - 2/N
//! E(m)  = -N (J m^4/4 + g_active s m)
//! ```
//!
//! Detailed balance holds exactly with respect to binomial(N, k) exp(-E/T),
//! so the stationary states are the paramagnet/ferromagnet structure of the
//! free-energy landscape and the registration time scales as 1/(gamma J).
//! The measurement protocol couples at g_active = g for t_couple, then
//! decouples discontinuously (g_active = 0) and relaxes for t_relax.
//!
//! The same generator drives both the deterministic evolution (classic
//! fixed-step 4th-order integration of the master equation) and the exact-jump
//! kinetic Monte Carlo sampling used for Born statistics.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dephasing::DephasingParams;
use crate::error::{Error, Result};
use crate::params::{ModelParams, Sector};
use crate::spin::SpinDensityMatrix;
use crate::table::{Cell, Table};
use crate::thermo;

/// Mass fraction required for an unambiguous classification.
pub const MASS_LEVEL: f64 = 0.99;

/// Stability guard for the explicit integrator: dt * max total rate <= 0.1.
pub const GUARD_LIMIT: f64 = 0.1;

/// Probability distribution over the (N+1)-point magnetization lattice,
/// conditioned on one tested-spin sector.
#[derive(Debug, Clone, PartialEq)]
pub struct MagnetizationDistribution {
    n: usize,
    p: Vec<f64>,
    /// Conserved diagonal element r_ss(0) this distribution is conditioned on.
    pub sector_weight: f64,
}

/// ln C(N, k) for k = 0..=N, built by the multiplicative recurrence and
/// reflected so that the k <-> N-k symmetry is exact.
fn ln_binomials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let half = n / 2;
    for k in 0..half {
        out[k + 1] = out[k] + ((n - k) as f64).ln() - ((k + 1) as f64).ln();
    }
    for k in (half + 1)..=n {
        out[k] = out[n - k];
    }
    out
}

/// Magnet self-energy plus coupling, per lattice site: E = -N(J m^4/4 + gs m).
fn site_energy(m: f64, n: f64, j: f64, gs: f64) -> f64 {
    let m2 = m * m;
    -n * (j * (m2 * m2) / 4.0 + gs * m)
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

impl MagnetizationDistribution {
    /// The metastable "ready" state of the apparatus: a narrow symmetric peak
    /// around m = 0,
    ///
    /// ```text
    /// p(m) oc binomial(N, N(1+m)/2) exp(-N J m^4 / (4T)),
    /// ```
    ///
    /// the binomial counting measure with the quartet energy scale suppressing
    /// the large-|m| shoulders. Width ~ 1/sqrt(N).
    pub fn metastable_paramagnet(params: &ModelParams) -> Self {
        let n = params.n;
        let ln_c = ln_binomials(n);
        let scale = params.n as f64 * params.j / (4.0 * params.temperature);
        let mut lw = vec![0.0; n + 1];
        for k in 0..=n {
            let m = params.lattice_m(k);
            let m2 = m * m;
            lw[k] = ln_c[k] - scale * (m2 * m2);
        }
        let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|x| (x - max).exp()).collect();
        MagnetizationDistribution {
            n,
            p: normalized(w),
            sector_weight: 1.0,
        }
    }

    /// The exact stationary state of the generator for (T, g_active, s):
    /// p(m) oc binomial(N, N(1+m)/2) exp(-E(m)/T). For T below the transition
    /// this is ferromagnet-dominated; it is the detailed-balance reference,
    /// not the ready state.
    pub fn equilibrium(params: &ModelParams, sector: Sector, g_active: f64) -> Self {
        let n = params.n;
        let ln_c = ln_binomials(n);
        let gs = g_active * sector.sign();
        let nf = n as f64;
        let mut lw = vec![0.0; n + 1];
        for k in 0..=n {
            let m = params.lattice_m(k);
            lw[k] = ln_c[k] - site_energy(m, nf, params.j, gs) / params.temperature;
        }
        let max = lw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lw.iter().map(|x| (x - max).exp()).collect();
        MagnetizationDistribution {
            n,
            p: normalized(w),
            sector_weight: 1.0,
        }
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut p = vec![0.0; n + 1];
        p[index] = 1.0;
        MagnetizationDistribution {
            n,
            p,
            sector_weight: 1.0,
        }
    }

    pub fn from_probabilities(n: usize, p: Vec<f64>, sector_weight: f64) -> Result<Self> {
        if p.len() != n + 1 {
            return Err(Error::Validation(format!(
                "probability vector length {} does not match N + 1 = {}",
                p.len(),
                n + 1
            )));
        }
        let dist = MagnetizationDistribution {
            n,
            p,
            sector_weight,
        };
        dist.check()?;
        Ok(dist)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }

    pub fn lattice_m(&self, k: usize) -> f64 {
        (2.0 * k as f64 - self.n as f64) / self.n as f64
    }

    pub fn mean(&self) -> f64 {
        self.p
            .iter()
            .enumerate()
            .map(|(k, p)| p * self.lattice_m(k))
            .sum()
    }

    pub fn mean_abs(&self) -> f64 {
        self.p
            .iter()
            .enumerate()
            .map(|(k, p)| p * self.lattice_m(k).abs())
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.p
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let d = self.lattice_m(k) - mean;
                p * d * d
            })
            .sum()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Mass at lattice points with m * sign >= threshold.
    pub fn mass_beyond(&self, sector: Sector, threshold: f64) -> f64 {
        self.p
            .iter()
            .enumerate()
            .filter(|(k, _)| self.lattice_m(*k) * sector.sign() >= threshold)
            .map(|(_, p)| p)
            .sum()
    }

    /// Mass at lattice points with |m| < radius.
    pub fn mass_within(&self, radius: f64) -> f64 {
        self.p
            .iter()
            .enumerate()
            .filter(|(k, _)| self.lattice_m(*k).abs() < radius)
            .map(|(_, p)| p)
            .sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.p.iter().sum()
    }

    fn check(&self) -> Result<()> {
        if let Some(bad) = self.p.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::Validation(format!(
                "probability {bad} is negative or non-finite"
            )));
        }
        let total = self.total_mass();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "probabilities sum to {total}, deviation beyond 1e-9"
            )));
        }
        Ok(())
    }
}

/// Single-flip transition rates over the magnetization lattice.
/// `up[k]` is the rate m_k -> m_k + 2/N, `down[k]` the rate m_k -> m_k - 2/N.
#[derive(Debug, Clone, PartialEq)]
pub struct RateModel {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Heat-bath single-flip rates for sector `sector` with the coupling held at
/// `g_active` (g during the measurement, 0 after decoupling).
pub fn build_generator(params: &ModelParams, sector: Sector, g_active: f64) -> RateModel {
    let n = params.n;
    let nf = n as f64;
    let gs = g_active * sector.sign();
    let t = params.temperature;
    let mut up = vec![0.0; n + 1];
    let mut down = vec![0.0; n + 1];
    for k in 0..=n {
        let e_here = site_energy(params.lattice_m(k), nf, params.j, gs);
        if k < n {
            let de = site_energy(params.lattice_m(k + 1), nf, params.j, gs) - e_here;
            up[k] = params.gamma * (n - k) as f64 * logistic(-de / t);
        }
        if k > 0 {
            let de = site_energy(params.lattice_m(k - 1), nf, params.j, gs) - e_here;
            down[k] = params.gamma * k as f64 * logistic(-de / t);
        }
    }
    RateModel { up, down }
}

impl RateModel {
    pub fn dim(&self) -> usize {
        self.up.len()
    }

    pub fn max_total_rate(&self) -> f64 {
        self.up
            .iter()
            .zip(&self.down)
            .map(|(u, d)| u + d)
            .fold(0.0, f64::max)
    }
}

/// Net probability current across each bond (k, k+1).
fn bond_fluxes(p: &[f64], rates: &RateModel, flux: &mut [f64]) {
    let n = p.len() - 1;
    for k in 0..n {
        flux[k] = rates.up[k] * p[k] - rates.down[k + 1] * p[k + 1];
    }
}

/// dP/dt in flux (divergence) form; conserves total probability by
/// telescoping and maps bitwise onto the mirrored lattice.
fn master_derivative(p: &[f64], rates: &RateModel, flux: &mut [f64], out: &mut [f64]) {
    let n = p.len() - 1;
    bond_fluxes(p, rates, flux);
    out[0] = -flux[0];
    for k in 1..n {
        out[k] = flux[k - 1] - flux[k];
    }
    out[n] = flux[n - 1];
}

/// Deterministic integration of the master equation over `t_span` with the
/// classic 4th-order scheme at fixed step <= dt.
///
/// The stability guard dt * max_total_rate <= 0.1 is checked up front; on
/// violation the error carries a suggested step size.
pub fn evolve(
    dist: &MagnetizationDistribution,
    rates: &RateModel,
    t_span: f64,
    dt: f64,
) -> Result<MagnetizationDistribution> {
    if rates.dim() != dist.n + 1 {
        return Err(Error::Validation(format!(
            "rate table dimension {} does not match lattice size {}",
            rates.dim(),
            dist.n + 1
        )));
    }
    if !(t_span >= 0.0) || !(dt > 0.0) {
        return Err(Error::Validation(format!(
            "bad time span {t_span} or step {dt}"
        )));
    }
    let max_rate = rates.max_total_rate();
    if dt * max_rate > GUARD_LIMIT * (1.0 + 1e-12) {
        return Err(Error::Guard {
            message: format!(
                "dt * max_total_rate = {:.3e} exceeds {GUARD_LIMIT}",
                dt * max_rate
            ),
            suggested_dt: Some(GUARD_LIMIT / max_rate),
        });
    }
    if t_span == 0.0 {
        return Ok(dist.clone());
    }

    let n_steps = (t_span / dt).ceil().max(1.0) as usize;
    let h = t_span / n_steps as f64;
    let dim = dist.n + 1;

    let mut p = dist.p.clone();
    let mut stage = vec![0.0; dim];
    let mut flux = vec![0.0; dim - 1];
    let mut k1 = vec![0.0; dim];
    let mut k2 = vec![0.0; dim];
    let mut k3 = vec![0.0; dim];
    let mut k4 = vec![0.0; dim];

    for _ in 0..n_steps {
        master_derivative(&p, rates, &mut flux, &mut k1);
        for i in 0..dim {
            stage[i] = p[i] + 0.5 * h * k1[i];
        }
        master_derivative(&stage, rates, &mut flux, &mut k2);
        for i in 0..dim {
            stage[i] = p[i] + 0.5 * h * k2[i];
        }
        master_derivative(&stage, rates, &mut flux, &mut k3);
        for i in 0..dim {
            stage[i] = p[i] + h * k3[i];
        }
        master_derivative(&stage, rates, &mut flux, &mut k4);
        for i in 0..dim {
            p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    Ok(MagnetizationDistribution {
        n: dist.n,
        p,
        sector_weight: dist.sector_weight,
    })
}

/// Outcome label of a registration attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Registered(Sector),
    Relaxed,
    Undecided,
}

impl Classification {
    /// Pointer reading implied by the classification; `None` when the magnet
    /// carries no readable indication.
    pub fn pointer_sign(&self) -> Option<Sector> {
        match self {
            Classification::Registered(s) => Some(*s),
            _ => None,
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Classification::Registered(s) => write!(f, "Registered({s})"),
            Classification::Relaxed => write!(f, "Relaxed"),
            Classification::Undecided => write!(f, "Undecided"),
        }
    }
}

/// Classify a distribution: Registered(+-1) when at least [`MASS_LEVEL`] of
/// the mass lies beyond +-m_threshold, Relaxed when at least that much lies
/// within |m| < m_threshold/2, Undecided otherwise.
pub fn classify(dist: &MagnetizationDistribution, m_threshold: f64) -> Result<Classification> {
    if !(m_threshold > 0.0 && m_threshold < 1.0) {
        return Err(Error::Validation(format!(
            "m_threshold = {m_threshold} outside (0, 1)"
        )));
    }
    if dist.mass_beyond(Sector::Up, m_threshold) >= MASS_LEVEL {
        return Ok(Classification::Registered(Sector::Up));
    }
    if dist.mass_beyond(Sector::Down, m_threshold) >= MASS_LEVEL {
        return Ok(Classification::Registered(Sector::Down));
    }
    if dist.mass_within(m_threshold / 2.0) >= MASS_LEVEL {
        return Ok(Classification::Relaxed);
    }
    Ok(Classification::Undecided)
}

/// Coupling/decoupling protocol: couple at g_active = g for `t_couple`,
/// switch g_active to 0 discontinuously, relax for `t_relax`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t_couple: f64,
    pub t_relax: f64,
    pub dt: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            t_couple: 1500.0,
            t_relax: 500.0,
            dt: 0.1,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_couple > 0.0) || !(self.t_relax > 0.0) || !(self.dt > 0.0) {
            return Err(Error::Validation(format!(
                "schedule times must be positive: t_couple = {}, t_relax = {}, dt = {}",
                self.t_couple, self.t_relax, self.dt
            )));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.t_couple + self.t_relax
    }
}

/// Post-measurement description: the two sector weights (the conserved
/// diagonal elements), the sector-conditioned pointer distributions playing
/// the role of the apparatus states, the surviving off-diagonal weight, and
/// the free energy dumped into the bath per sector.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub sectors: [Sector; 2],
    pub weights: [f64; 2],
    pub distributions: [MagnetizationDistribution; 2],
    pub off_diagonal_weight: f64,
    pub dissipated_free_energy: [f64; 2],
}

/// Free energy dumped in the bath when the pointer settles at mean
/// magnetization `m_final`: N [F(0) - F(m_final)] per spin units, evaluated
/// on the decoupled (g = 0) landscape.
fn dissipated_free_energy(params: &ModelParams, m_final: f64) -> Result<f64> {
    let f0 = thermo::free_energy_per_spin(0.0, params.j, params.temperature, 0.0, Sector::Up)?;
    let f1 = thermo::free_energy_per_spin(
        m_final.clamp(-1.0, 1.0),
        params.j,
        params.temperature,
        0.0,
        Sector::Up,
    )?;
    Ok(params.n as f64 * (f0 - f1))
}

/// Run the full deterministic measurement protocol on both sectors.
///
/// Each sector s starts from the metastable paramagnet, evolves with
/// g_active = g for t_couple, then with g_active = 0 for t_relax. The
/// returned weights are exactly (r_uu(0), r_dd(0)): the diagonal elements are
/// conserved, which is the Born rule. The off-diagonal block is bookkept
/// separately through the damped truncation factor at t_couple.
pub fn run_measurement(
    rho0: &SpinDensityMatrix,
    params: &ModelParams,
    schedule: &Schedule,
) -> Result<MeasurementOutcome> {
    params.validate()?;
    schedule.validate()?;

    let mut distributions = Vec::with_capacity(2);
    let mut dissipated = [0.0; 2];
    for (slot, sector) in Sector::BOTH.into_iter().enumerate() {
        let mut dist = MagnetizationDistribution::metastable_paramagnet(params);
        dist.sector_weight = match sector {
            Sector::Up => rho0.r_uu(),
            Sector::Down => rho0.r_dd(),
        };
        let coupled = build_generator(params, sector, params.g);
        let dist = evolve(&dist, &coupled, schedule.t_couple, schedule.dt)?;
        let relaxed_rates = build_generator(params, sector, 0.0);
        let dist = evolve(&dist, &relaxed_rates, schedule.t_relax, schedule.dt)?;
        dissipated[slot] = dissipated_free_energy(params, dist.mean())?;
        distributions.push(dist);
    }

    let dephasing = DephasingParams::from_model(params)?;
    let off_diagonal_weight =
        dephasing.damped_truncation_factor(schedule.t_couple)?.abs() * rho0.r_ud().norm();

    let down = distributions.pop().expect("two sectors");
    let up = distributions.pop().expect("two sectors");
    Ok(MeasurementOutcome {
        sectors: Sector::BOTH,
        weights: [rho0.r_uu(), rho0.r_dd()],
        distributions: [up, down],
        off_diagonal_weight,
        dissipated_free_energy: dissipated,
    })
}

/// Outcome of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub sector: Sector,
    pub status: Classification,
    pub dissipated_free_energy: f64,
    pub final_m: f64,
    pub t_f: f64,
    pub seed: u64,
}

impl MeasurementRecord {
    /// Registered <=> a pointer sign exists, by construction.
    pub fn pointer_sign(&self) -> Option<Sector> {
        self.status.pointer_sign()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub registered_up: usize,
    pub registered_down: usize,
    pub relaxed: usize,
    pub undecided: usize,
}

impl OutcomeCounts {
    pub fn total(&self) -> usize {
        self.registered_up + self.registered_down + self.relaxed + self.undecided
    }
}

#[derive(Debug, Clone)]
pub struct SampleSummary {
    pub counts: OutcomeCounts,
    pub records: Vec<MeasurementRecord>,
}

/// One exact-jump trajectory through the couple/relax phases.
///
/// The flip direction is decided by comparing a uniform draw against the rate
/// of moving toward the coupled field direction, so trajectories in opposite
/// sectors consuming the same random stream are exact mirrors of each other.
/// Checkpoint times record the pre-jump state.
#[allow(clippy::too_many_arguments)]
fn run_trajectory(
    coupled: &RateModel,
    relaxed: &RateModel,
    sector: Sector,
    start_index: usize,
    schedule: &Schedule,
    rng: &mut ChaCha8Rng,
    checkpoints: &[f64],
    recorded: &mut Vec<usize>,
) -> usize {
    recorded.clear();
    let dim = coupled.dim();
    let mut index = start_index;
    let mut t = 0.0;
    let mut cp = 0;
    let aligned_up = sector == Sector::Up;

    for (rates, phase_end) in [(coupled, schedule.t_couple), (relaxed, schedule.total())] {
        loop {
            let up = rates.up[index];
            let down = rates.down[index];
            let total = up + down;
            if total <= 0.0 {
                break;
            }
            let wait = -(1.0 - rng.gen::<f64>()).ln() / total;
            let t_next = t + wait;
            if t_next > phase_end {
                break;
            }
            while cp < checkpoints.len() && checkpoints[cp] <= t_next {
                recorded.push(index);
                cp += 1;
            }
            t = t_next;
            let aligned_rate = if aligned_up { up } else { down };
            let move_aligned = rng.gen::<f64>() * total < aligned_rate;
            let move_up = move_aligned == aligned_up;
            if move_up {
                if index + 1 < dim {
                    index += 1;
                }
            } else {
                index = index.saturating_sub(1);
            }
        }
        while cp < checkpoints.len() && checkpoints[cp] <= phase_end {
            recorded.push(index);
            cp += 1;
        }
        t = phase_end;
    }
    while cp < checkpoints.len() {
        recorded.push(index);
        cp += 1;
    }
    index
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw_index(cdf: &[f64], u: f64) -> usize {
    match cdf.binary_search_by(|probe| probe.total_cmp(&u)) {
        Ok(i) | Err(i) => i.min(cdf.len() - 1),
    }
}

fn classify_point(m: f64, m_threshold: f64) -> Classification {
    if m >= m_threshold {
        Classification::Registered(Sector::Up)
    } else if m <= -m_threshold {
        Classification::Registered(Sector::Down)
    } else if m.abs() < m_threshold / 2.0 {
        Classification::Relaxed
    } else {
        Classification::Undecided
    }
}

/// Sample `n_runs` measurement runs: draw the sector with probability
/// r_ss(0), draw the initial magnetization from the metastable paramagnet,
/// run one kinetic Monte Carlo trajectory through the couple/relax phases,
/// classify the endpoint.
///
/// Runs are independent; run i consumes the dedicated stream i + 1 of the
/// ChaCha generator seeded with `seed`, and aggregation is pure counting, so
/// the result is identical however the runs are scheduled across threads.
pub fn sample_trajectories(
    rho0: &SpinDensityMatrix,
    params: &ModelParams,
    schedule: &Schedule,
    m_threshold: f64,
    n_runs: usize,
    seed: u64,
) -> Result<SampleSummary> {
    params.validate()?;
    schedule.validate()?;
    if n_runs < 1 {
        return Err(Error::Validation("n_runs must be >= 1".into()));
    }
    if !(m_threshold > 0.0 && m_threshold < 1.0) {
        return Err(Error::Validation(format!(
            "m_threshold = {m_threshold} outside (0, 1)"
        )));
    }

    let initial = MagnetizationDistribution::metastable_paramagnet(params);
    let cdf = cumulative(initial.probabilities());
    let generators = [
        build_generator(params, Sector::Up, params.g),
        build_generator(params, Sector::Down, params.g),
    ];
    let relaxed = [
        build_generator(params, Sector::Up, 0.0),
        build_generator(params, Sector::Down, 0.0),
    ];
    let r_uu = rho0.r_uu();
    let t_f = schedule.total();

    let records: Vec<MeasurementRecord> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64 + 1);
            let sector = if rng.gen::<f64>() < r_uu {
                Sector::Up
            } else {
                Sector::Down
            };
            let slot = if sector == Sector::Up { 0 } else { 1 };
            let start = draw_index(&cdf, rng.gen::<f64>());
            let mut scratch = Vec::new();
            let final_index = run_trajectory(
                &generators[slot],
                &relaxed[slot],
                sector,
                start,
                schedule,
                &mut rng,
                &[],
                &mut scratch,
            );
            let final_m = initial.lattice_m(final_index);
            let status = classify_point(final_m, m_threshold);
            let dissipated =
                dissipated_free_energy(params, final_m).expect("finite landscape value");
            MeasurementRecord {
                sector,
                status,
                dissipated_free_energy: dissipated,
                final_m,
                t_f,
                seed,
            }
        })
        .collect();

    let mut counts = OutcomeCounts::default();
    for record in &records {
        match record.status {
            Classification::Registered(Sector::Up) => counts.registered_up += 1,
            Classification::Registered(Sector::Down) => counts.registered_down += 1,
            Classification::Relaxed => counts.relaxed += 1,
            Classification::Undecided => counts.undecided += 1,
        }
    }
    Ok(SampleSummary { counts, records })
}

/// Ensemble-mean magnetization of sector-conditioned trajectories at the given
/// checkpoint times, plus the standard error of each mean. Shares the
/// trajectory core with [`sample_trajectories`].
pub fn sector_checkpoint_means(
    params: &ModelParams,
    sector: Sector,
    schedule: &Schedule,
    n_runs: usize,
    seed: u64,
    checkpoints: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    params.validate()?;
    schedule.validate()?;
    let initial = MagnetizationDistribution::metastable_paramagnet(params);
    let cdf = cumulative(initial.probabilities());
    let coupled = build_generator(params, sector, params.g);
    let relaxed = build_generator(params, sector, 0.0);

    let samples: Vec<Vec<f64>> = (0..n_runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64 + 1);
            let start = draw_index(&cdf, rng.gen::<f64>());
            let mut recorded = Vec::with_capacity(checkpoints.len());
            run_trajectory(
                &coupled,
                &relaxed,
                sector,
                start,
                schedule,
                &mut rng,
                checkpoints,
                &mut recorded,
            );
            recorded.iter().map(|&i| initial.lattice_m(i)).collect()
        })
        .collect();

    let nf = n_runs as f64;
    let mut means = vec![0.0; checkpoints.len()];
    let mut errs = vec![0.0; checkpoints.len()];
    for (j, mean) in means.iter_mut().enumerate() {
        *mean = samples.iter().map(|s| s[j]).sum::<f64>() / nf;
        let var = samples.iter().map(|s| (s[j] - *mean).powi(2)).sum::<f64>() / (nf - 1.0);
        errs[j] = (var / nf).sqrt();
    }
    Ok((means, errs))
}

/// Distribution snapshots as a `t,m,p` table.
pub fn snapshot_table(snapshots: &[(f64, &MagnetizationDistribution)]) -> Table {
    let mut table = Table::new(["t", "m", "p"]);
    for (t, dist) in snapshots {
        for (k, p) in dist.probabilities().iter().enumerate() {
            table.push_row(vec![
                Cell::Float(*t),
                Cell::Float(dist.lattice_m(k)),
                Cell::Float(*p),
            ]);
        }
    }
    table
}

/// Measurement records as a `run,sector,pointer,status,dissipated_F,seed` table.
pub fn records_table(records: &[MeasurementRecord]) -> Table {
    let mut table = Table::new(["run", "sector", "pointer", "status", "dissipated_F", "seed"]);
    for (run, record) in records.iter().enumerate() {
        let pointer = match record.pointer_sign() {
            Some(s) => s.to_string(),
            None => "none".to_string(),
        };
        let status = match record.status {
            Classification::Registered(_) => "Registered",
            Classification::Relaxed => "Relaxed",
            Classification::Undecided => "Undecided",
        };
        table.push_row(vec![
            Cell::Int(run as i64),
            Cell::Text(record.sector.to_string()),
            Cell::Text(pointer),
            Cell::Text(status.to_string()),
            Cell::Float(record.dissipated_free_energy),
            Cell::Int(record.seed as i64),
        ]);
    }
    table
}
