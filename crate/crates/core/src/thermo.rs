//! Mean-field thermodynamics of the quartic Curie-Weiss magnet.
//!
//! The magnet free energy per spin in the sector with tested-spin eigenvalue
//! s = +-1 is
//!
//! ```text
//! F(m)/N = -J m^4 / 4 - g s m - T S(m),
//! S(m)   = -[(1+m)/2 ln((1+m)/2) + (1-m)/2 ln((1-m)/2)],
//! ```
//!
//! in natural units (hbar = k_B = 1). The quartet coupling enters as the
//! mean-field energy `-N J m^4/4`; in sector s the system-apparatus coupling
//! acts as an external field of strength `g s` on each magnet spin. The
//! paramagnetic state near m = 0 is metastable below T = 3J/4; the barrier
//! towards the aligned ferromagnetic state +-m_F disappears at the critical
//! coupling g_c(T) obtained from the double-root condition F' = F'' = 0.

use crate::error::{Error, Result};
use crate::params::Sector;
use crate::table::{Cell, Table};

/// Number of grid points used to bracket the roots of F'.
const ROOT_GRID: usize = 2001;

/// atanh with its argument clamped to 1 - 1e-15, avoiding infinities at |m| = 1.
fn atanh_clamped(m: f64) -> f64 {
    const LIMIT: f64 = 1.0 - 1e-15;
    m.clamp(-LIMIT, LIMIT).atanh()
}

/// Binary mixing entropy per spin, with the 0 ln 0 = 0 convention so that
/// S(+-1) = 0 by continuity.
pub fn entropy_per_spin(m: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("magnetization {m} outside [-1, 1]")));
    }
    let mut s = 0.0;
    for p in [0.5 + 0.5 * m, 0.5 - 0.5 * m] {
        if p > 0.0 {
            s -= p * p.ln();
        }
    }
    Ok(s)
}

/// Free energy per spin F(m)/N in sector `sector`, units of J.
pub fn free_energy_per_spin(
    m: f64,
    j: f64,
    temperature: f64,
    g: f64,
    sector: Sector,
) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature {temperature} must be positive"
        )));
    }
    let s = entropy_per_spin(m)?;
    let m2 = m * m;
    Ok(-j * (m2 * m2) / 4.0 - g * sector.sign() * m - temperature * s)
}

/// d/dm of the free energy per spin: F'(m) = -J m^3 - g s + T atanh(m).
pub fn landscape_derivative(m: f64, j: f64, temperature: f64, g: f64, sector: Sector) -> f64 {
    -j * m * m * m - g * sector.sign() + temperature * atanh_clamped(m)
}

/// d^2/dm^2 of the free energy per spin: F''(m) = -3 J m^2 + T/(1 - m^2).
pub fn landscape_curvature(m: f64, j: f64, temperature: f64) -> f64 {
    -3.0 * j * m * m + temperature / (1.0 - m * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StationaryKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryPoint {
    pub m: f64,
    pub kind: StationaryKind,
}

/// All roots of F'(m) on (-1, 1), found by bracketing bisection seeded from
/// sign changes on a uniform grid and refined to |dm| <= 1e-10, each
/// classified by the sign of F''.
pub fn stationary_points(
    j: f64,
    temperature: f64,
    g: f64,
    sector: Sector,
) -> Result<Vec<StationaryPoint>> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature {temperature} must be positive"
        )));
    }
    let lo = -1.0 + 1e-9;
    let hi = 1.0 - 1e-9;
    let f = |m: f64| landscape_derivative(m, j, temperature, g, sector);

    let mut points = Vec::new();
    let mut prev_m = lo;
    let mut prev_f = f(lo);
    for i in 1..ROOT_GRID {
        let m = lo + (hi - lo) * i as f64 / (ROOT_GRID - 1) as f64;
        let fm = f(m);
        if prev_f == 0.0 {
            points.push(prev_m);
        } else if prev_f * fm < 0.0 {
            points.push(bisect(&f, prev_m, m));
        }
        prev_m = m;
        prev_f = fm;
    }
    if prev_f == 0.0 {
        points.push(prev_m);
    }

    Ok(points
        .into_iter()
        .map(|m| StationaryPoint {
            m,
            kind: if landscape_curvature(m, j, temperature) > 0.0 {
                StationaryKind::Minimum
            } else {
                StationaryKind::Maximum
            },
        })
        .collect())
}

fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..100 {
        let c = 0.5 * (a + b);
        if c == a || c == b {
            break;
        }
        let fc = f(c);
        if fa * fc <= 0.0 {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    0.5 * (a + b)
}

/// Ferromagnetic magnetization m_F: the minimum of the landscape with
/// m * s > 0 nearest |m| = 1, equivalently the stable fixed point of
/// m = tanh((J m^3 + g s)/T).
pub fn ferromagnetic_magnetization(
    j: f64,
    temperature: f64,
    g: f64,
    sector: Sector,
) -> Result<f64> {
    let minima: Vec<f64> = stationary_points(j, temperature, g, sector)?
        .into_iter()
        .filter(|p| p.kind == StationaryKind::Minimum && p.m * sector.sign() > 0.0)
        .map(|p| p.m)
        .collect();
    minima
        .into_iter()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .ok_or(Error::NoFerromagneticPhase { temperature })
}

/// Critical coupling g_c(T): the smallest g at which the barrier between the
/// paramagnetic region and the aligned ferromagnetic minimum disappears.
///
/// From the double-root condition F'(m*) = F''(m*) = 0: the curvature zero
/// gives 3 J m*^2 (1 - m*^2) = T, whose smaller positive root is
/// m*^2 = (1 - sqrt(1 - 4T/(3J)))/2, and then g_c = T atanh(m*) - J m*^3.
pub fn critical_coupling(j: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature {temperature} must be positive"
        )));
    }
    let limit = 0.75 * j;
    if temperature >= limit {
        return Err(Error::NoBarrierRegime { temperature, limit });
    }
    let disc = 1.0 - 4.0 * temperature / (3.0 * j);
    let m_star = ((1.0 - disc.sqrt()) / 2.0).sqrt();
    Ok(temperature * atanh_clamped(m_star) - j * m_star * m_star * m_star)
}

/// The spinodal magnetization m* entering the double-root construction.
pub fn spinodal_magnetization(j: f64, temperature: f64) -> Result<f64> {
    let limit = 0.75 * j;
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!(
            "temperature {temperature} must be positive"
        )));
    }
    if temperature >= limit {
        return Err(Error::NoBarrierRegime { temperature, limit });
    }
    let disc = 1.0 - 4.0 * temperature / (3.0 * j);
    Ok(((1.0 - disc.sqrt()) / 2.0).sqrt())
}

/// Sampled free-energy landscape F(m)/N for one (T, g, s).
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergyCurve {
    pub m_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    pub j: f64,
    pub temperature: f64,
    pub g: f64,
    pub sector: Sector,
}

/// Uniformly sampled landscape on [-0.999999, 0.999999].
pub fn export_curve(
    j: f64,
    temperature: f64,
    g: f64,
    sector: Sector,
    grid_size: usize,
) -> Result<FreeEnergyCurve> {
    if grid_size < 3 {
        return Err(Error::Validation(format!(
            "grid_size {grid_size} must be >= 3"
        )));
    }
    const EDGE: f64 = 0.999999;
    let mut m_grid = Vec::with_capacity(grid_size);
    let mut f_values = Vec::with_capacity(grid_size);
    let span = (grid_size - 1) as f64;
    for i in 0..grid_size {
        // integer-symmetric numerator keeps the grid an exact mirror of itself
        let m = EDGE * (2.0 * i as f64 - span) / span;
        m_grid.push(m);
        f_values.push(free_energy_per_spin(m, j, temperature, g, sector)?);
    }
    Ok(FreeEnergyCurve {
        m_grid,
        f_values,
        j,
        temperature,
        g,
        sector,
    })
}

impl FreeEnergyCurve {
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["m", "F_per_spin"]).with_comment(format!(
            "T={:e} g={:e} s={}",
            self.temperature, self.g, self.sector
        ));
        for (m, f) in self.m_grid.iter().zip(&self.f_values) {
            table.push_row(vec![Cell::Float(*m), Cell::Float(*f)]);
        }
        table
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const J: f64 = 1.0;

    #[test]
    fn entropy_examples() {
        assert!((entropy_per_spin(0.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy_per_spin(1.0).unwrap(), 0.0);
        assert_eq!(entropy_per_spin(-1.0).unwrap(), 0.0);
        // direct evaluation of the closed form at m = 1/2
        assert!((entropy_per_spin(0.5).unwrap() - 0.5623351446188083).abs() < 1e-15);
        assert!(entropy_per_spin(1.5).is_err());
    }

    #[test]
    fn free_energy_examples() {
        // at m = 0 only the entropy term survives
        let f0 = free_energy_per_spin(0.0, J, 0.2, 0.3, Sector::Up).unwrap();
        assert!((f0 - (-0.2 * std::f64::consts::LN_2)).abs() < 1e-15);
        // at m = 1 the entropy vanishes, leaving the quartic term
        let f1 = free_energy_per_spin(1.0, J, 0.2, 0.0, Sector::Up).unwrap();
        assert!((f1 - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn barrier_presence_flips_between_couplings() {
        // at T = 0.2: g = 0.02 keeps an interior local maximum on (0, 1),
        // g = 0.05 removes it
        let maxima = |g: f64| {
            stationary_points(J, 0.2, g, Sector::Up)
                .unwrap()
                .into_iter()
                .filter(|p| p.kind == StationaryKind::Maximum && p.m > 0.0 && p.m < 1.0)
                .count()
        };
        assert_eq!(maxima(0.02), 1);
        assert_eq!(maxima(0.05), 0);
    }

    #[test]
    fn stationary_points_at_zero_coupling() {
        let pts = stationary_points(J, 0.2, 0.0, Sector::Up).unwrap();
        let minima: Vec<f64> = pts
            .iter()
            .filter(|p| p.kind == StationaryKind::Minimum)
            .map(|p| p.m)
            .collect();
        let maxima: Vec<f64> = pts
            .iter()
            .filter(|p| p.kind == StationaryKind::Maximum)
            .map(|p| p.m)
            .collect();
        assert_eq!(minima.len(), 3);
        assert_eq!(maxima.len(), 2);
        assert!(minima.iter().any(|m| m.abs() < 1e-9));
        assert!(minima.iter().any(|m| (m - 0.9999089559652479).abs() < 1e-8));
        assert!(minima.iter().any(|m| (m + 0.9999089559652479).abs() < 1e-8));
        assert!(maxima.iter().any(|m| (m - 0.4654814846210944).abs() < 1e-8));
        assert!(maxima.iter().any(|m| (m + 0.4654814846210944).abs() < 1e-8));
    }

    #[test]
    fn supercritical_coupling_leaves_only_the_aligned_minimum() {
        // at g = 0.05 > g_c the whole interval (0, m_F) is monotone: the only
        // positive stationary point left is the ferromagnetic minimum itself
        let positives: Vec<StationaryPoint> = stationary_points(J, 0.2, 0.05, Sector::Up)
            .unwrap()
            .into_iter()
            .filter(|p| p.m > 0.0)
            .collect();
        assert_eq!(positives.len(), 1);
        assert_eq!(positives[0].kind, StationaryKind::Minimum);
        assert!(positives[0].m > 0.999);
    }

    #[test]
    fn positive_stationary_points_merge_near_spinodal_limit() {
        // the three positive stationary points of the g = 0 landscape merge as
        // T approaches 3J max m^2(1-m^2) = 3J/4
        let count_positive = |t: f64| {
            stationary_points(J, t, 0.0, Sector::Up)
                .unwrap()
                .iter()
                .filter(|p| p.m > 1e-9)
                .count()
        };
        assert_eq!(count_positive(0.4), 2);
        assert_eq!(count_positive(0.74), 0);
    }

    #[test]
    fn ferromagnetic_magnetization_examples() {
        let m_f = ferromagnetic_magnetization(J, 0.2, 0.0, Sector::Up).unwrap();
        assert!((m_f - 0.9999089559652479).abs() < 1e-10);
        // tanh fixed-point residual
        assert!((m_f - ((J * m_f.powi(3)) / 0.2).tanh()).abs() < 1e-12);
        // monotone in g: re-solve with the coupling on
        let m_f_g = ferromagnetic_magnetization(J, 0.2, 0.05, Sector::Up).unwrap();
        assert!(m_f_g > m_f);
        assert!(m_f > 0.999);

        assert!(matches!(
            ferromagnetic_magnetization(J, 0.8, 0.0, Sector::Up),
            Err(Error::NoFerromagneticPhase { .. })
        ));
    }

    #[test]
    fn critical_coupling_examples() {
        // double-root values, cross-checked against F' = F'' = 0 below
        assert!((critical_coupling(J, 0.2).unwrap() - 0.0356927301).abs() < 1e-9);
        assert!((critical_coupling(J, 0.1).unwrap() - 0.0123842241).abs() < 1e-9);
        assert!((critical_coupling(J, 0.3).unwrap() - 0.0669399983).abs() < 1e-9);
        assert!((spinodal_magnetization(J, 0.1).unwrap() - 0.1858099348).abs() < 1e-9);
        assert!((spinodal_magnetization(J, 0.3).unwrap() - 0.3357106870).abs() < 1e-9);
        assert!(matches!(
            critical_coupling(J, 0.75),
            Err(Error::NoBarrierRegime { .. })
        ));
    }

    #[test]
    fn critical_coupling_satisfies_double_root_condition() {
        // independent route: at (m*, g_c) both F' and F'' must vanish
        for t in [0.1, 0.2, 0.3, 0.5] {
            let g_c = critical_coupling(J, t).unwrap();
            let m_star = spinodal_magnetization(J, t).unwrap();
            let d1 = landscape_derivative(m_star, J, t, g_c, Sector::Up);
            let d2 = landscape_curvature(m_star, J, t);
            assert!(d1.abs() < 1e-12, "F'({m_star}) = {d1} at T = {t}");
            assert!(d2.abs() < 1e-9, "F''({m_star}) = {d2} at T = {t}");
        }
    }

    #[test]
    fn critical_coupling_increasing_in_temperature() {
        let mut prev = 0.0;
        for i in 0..=45 {
            let t = 0.05 + 0.01 * i as f64;
            let g_c = critical_coupling(J, t).unwrap();
            assert!(g_c > prev, "g_c not increasing at T = {t}");
            prev = g_c;
        }
    }

    #[test]
    fn barrier_disappears_exactly_above_critical_coupling() {
        let g_c = critical_coupling(J, 0.2).unwrap();
        for g in [0.02, 0.0356, 0.0358, 0.05] {
            let has_max = stationary_points(J, 0.2, g, Sector::Up)
                .unwrap()
                .iter()
                .any(|p| p.kind == StationaryKind::Maximum && p.m > 0.0 && p.m < 1.0);
            assert_eq!(has_max, g < g_c, "barrier mismatch at g = {g}");
        }
    }

    #[test]
    fn sector_mirror_symmetry_exact() {
        for i in 0..200 {
            let m = -0.995 + 0.01 * i as f64;
            let a = free_energy_per_spin(m, J, 0.2, 0.05, Sector::Up).unwrap();
            let b = free_energy_per_spin(-m, J, 0.2, 0.05, Sector::Down).unwrap();
            assert_eq!(a, b, "F(m; g, +) != F(-m; g, -) at m = {m}");
        }
    }

    #[test]
    fn zero_coupling_curve_is_even() {
        let curve = export_curve(J, 0.2, 0.0, Sector::Up, 501).unwrap();
        let n = curve.m_grid.len();
        for i in 0..n {
            assert_eq!(curve.f_values[i], curve.f_values[n - 1 - i]);
        }
    }

    #[test]
    fn coupling_term_is_linear_in_curve() {
        let base = export_curve(J, 0.2, 0.0, Sector::Up, 301).unwrap();
        let tilted = export_curve(J, 0.2, 0.05, Sector::Up, 301).unwrap();
        for i in 0..base.m_grid.len() {
            let diff = tilted.f_values[i] - base.f_values[i];
            assert!((diff - (-0.05 * base.m_grid[i])).abs() < 1e-15);
        }
    }

    #[test]
    fn paramagnetic_point_is_always_local_minimum() {
        for i in 1..=60 {
            let t = 0.0125 * i as f64;
            assert!(landscape_curvature(0.0, J, t) > 0.0);
        }
    }

    #[test]
    fn minima_satisfy_tanh_fixed_point() {
        for (t, g) in [(0.2, 0.0), (0.2, 0.05), (0.3, 0.02), (0.15, 0.01)] {
            for p in stationary_points(J, t, g, Sector::Up).unwrap() {
                if p.kind == StationaryKind::Minimum {
                    let rhs = ((J * p.m.powi(3) + g) / t).tanh();
                    assert!(
                        (p.m - rhs).abs() < 1e-10,
                        "fixed point residual {} at (T={t}, g={g}, m={})",
                        (p.m - rhs).abs(),
                        p.m
                    );
                }
            }
        }
    }

    #[test]
    fn export_curve_rejects_small_grid() {
        assert!(export_curve(J, 0.2, 0.0, Sector::Up, 2).is_err());
    }
}
