//! Off-diagonal (truncation) dynamics of the tested spin coupled to the
//! N-spin paramagnet.
//!
//! In the off-diagonal sector each magnet spin contributes a phase factor
//! cos(2 g t), so the coherence ratio r_ud(t)/r_ud(0) is cos^N(2 g t). For
//! large N this collapses on the Gaussian envelope exp(-t^2/tau^2) with
//! tau = 1/(g sqrt(2N)), but revives exactly at the recurrence times
//! t_k = k pi / g. A bath damping each spin's transverse coherence at rate
//! 1/theta multiplies every cosine by exp(-t/theta) and suppresses the k-th
//! recurrence to exp(-N t_k / theta); the onset time theta/N therefore has to
//! lie well before t_1 for the recurrences to be unobservable.

use crate::error::{Error, Result};
use crate::params::ModelParams;

/// x^n by binary exponentiation. All dephasing formulas share this one
/// multiplication order; `f64::powi` may compile to different chains at
/// different call sites, which would break the exact consistency identities
/// between the n = 1 and collective factors.
fn pow_n(x: f64, n: usize) -> f64 {
    let mut result = 1.0;
    let mut base = x;
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result *= base;
        }
        base *= base;
        e >>= 1;
    }
    result
}

/// Inputs of the truncation formulas.
///
/// `theta` is the per-spin transverse-coherence decay time of the bath
/// damping model; `None` means no bath (purely reversible dephasing).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingParams {
    pub n: usize,
    pub g: f64,
    pub n_tested: usize,
    pub theta: Option<f64>,
}

impl DephasingParams {
    pub fn new(n: usize, g: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::Validation(format!("N = {n} must be >= 1")));
        }
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Validation(format!("g = {g} must be positive")));
        }
        Ok(DephasingParams {
            n,
            g,
            n_tested: 1,
            theta: None,
        })
    }

    pub fn with_bath(mut self, theta: f64) -> Result<Self> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(Error::Validation(format!(
                "theta = {theta} must be positive"
            )));
        }
        self.theta = Some(theta);
        Ok(self)
    }

    /// Parameters taken from a model description, with the documented default
    /// bath time theta = 1/(gamma T).
    pub fn from_model(params: &ModelParams) -> Result<Self> {
        let mut p = DephasingParams::new(params.n, params.g)?;
        p.n_tested = params.n_tested;
        p.with_bath(params.default_bath_theta())
    }

    fn require_theta(&self) -> Result<f64> {
        self.theta.ok_or_else(|| {
            Error::Config("no bath configured: theta is required for damped quantities".into())
        })
    }

    /// Characteristic decay time tau = 1/(g sqrt(2N)) of the Gaussian envelope.
    pub fn tau(&self) -> f64 {
        1.0 / (self.g * (2.0 * self.n as f64).sqrt())
    }

    /// Exact dephasing factor r_ud(t)/r_ud(0) = cos^N(2 g t) without a bath.
    pub fn truncation_factor(&self, t: f64) -> f64 {
        pow_n((2.0 * self.g * t).cos(), self.n)
    }

    /// Large-N envelope exp(-t^2/tau^2).
    pub fn gaussian_envelope(&self, t: f64) -> f64 {
        let x = t / self.tau();
        (-x * x).exp()
    }

    /// Recurrence times t_k = k pi / g for k = 1..k_max, where the bare
    /// truncation factor revives to 1.
    pub fn recurrence_times(&self, k_max: usize) -> Vec<f64> {
        (1..=k_max)
            .map(|k| k as f64 * std::f64::consts::PI / self.g)
            .collect()
    }

    /// Dephasing factor with bath damping: [cos(2 g t) exp(-t/theta)]^N.
    pub fn damped_truncation_factor(&self, t: f64) -> Result<f64> {
        let theta = self.require_theta()?;
        let per_spin = (2.0 * self.g * t).cos() * (-t / theta).exp();
        Ok(pow_n(per_spin, self.n))
    }

    /// Time t_B = theta/N at which the collective damping exponent N t/theta
    /// reaches one.
    pub fn bath_onset_time(&self) -> Result<f64> {
        Ok(self.require_theta()? / self.n as f64)
    }

    /// The suppression criterion: the bath must set in well before the first
    /// recurrence, t_B < t_1.
    pub fn recurrences_suppressed(&self) -> Result<bool> {
        Ok(self.bath_onset_time()? < std::f64::consts::PI / self.g)
    }

    /// Magnitude envelope of the correlation between the tested spin's
    /// transverse components and k magnet spins, divided by |r_ud(0)|:
    /// |sin(2 g t)|^k |cos(2 g t)|^(N-k).
    ///
    /// Starts at zero (S and A initially uncorrelated), grows, and decays:
    /// the transverse information leaks into the magnet through a cascade of
    /// multi-spin correlations.
    pub fn correlation_cascade(&self, k: usize, t: f64) -> Result<f64> {
        if k < 1 || k > self.n {
            return Err(Error::Domain(format!(
                "correlation order k = {k} outside 1..={}",
                self.n
            )));
        }
        let phase = 2.0 * self.g * t;
        Ok(pow_n(phase.sin().abs(), k) * pow_n(phase.cos().abs(), self.n - k))
    }

    /// First maximum of the k-spin correlation envelope, at
    /// tan^2(2 g t*) = k/(N - k).
    pub fn correlation_peak_time(&self, k: usize) -> Result<f64> {
        if k < 1 || k >= self.n {
            return Err(Error::Domain(format!(
                "correlation order k = {k} outside 1..{}",
                self.n
            )));
        }
        let ratio = (k as f64 / (self.n - k) as f64).sqrt();
        Ok(ratio.atan() / (2.0 * self.g))
    }

    /// Dephasing factor of the (s, s') off-diagonal block when the tested
    /// observable is the average z-magnetization of n spins: cos^N(g (s - s') t).
    ///
    /// Eigenvalues live on the lattice {-1, -1 + 2/n, ..., +1}.
    pub fn collective_truncation_factor(
        &self,
        n_tested: usize,
        s: f64,
        s_prime: f64,
        t: f64,
    ) -> Result<f64> {
        for value in [s, s_prime] {
            if !is_collective_eigenvalue(n_tested, value) {
                return Err(Error::Domain(format!(
                    "{value} is not an eigenvalue of the n = {n_tested} collective observable"
                )));
            }
        }
        if s == s_prime {
            return Err(Error::Domain(
                "s = s' labels a diagonal block, not a dephasing off-diagonal".into(),
            ));
        }
        Ok(pow_n((self.g * (s - s_prime) * t).cos(), self.n))
    }

    /// Characteristic truncation time for adjacent eigenvalue pairs of the
    /// n-spin collective observable: n/(g sqrt(2N)).
    pub fn characteristic_time(&self, n_tested: usize) -> f64 {
        n_tested as f64 / (self.g * (2.0 * self.n as f64).sqrt())
    }
}

fn is_collective_eigenvalue(n_tested: usize, s: f64) -> bool {
    if n_tested == 0 || s.abs() > 1.0 + 1e-12 {
        return false;
    }
    let index = (s + 1.0) * n_tested as f64 / 2.0;
    (index - index.round()).abs() < 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(n: usize, g: f64) -> DephasingParams {
        DephasingParams::new(n, g).unwrap()
    }

    #[test]
    fn truncation_factor_examples() {
        let p = params(1000, 0.05);
        assert_eq!(p.truncation_factor(0.0), 1.0);

        let single = params(1, 0.05);
        assert!(single.truncation_factor(PI / (4.0 * 0.05)).abs() < 1e-15);

        // direct evaluation of cos^1000(2 g tau) against the frozen value
        let tau = p.tau();
        assert!((tau - 0.4472135954999579).abs() < 1e-15);
        assert!((p.truncation_factor(tau) - 0.36775676970780513).abs() < 1e-12);
        // close to, but not equal to, the envelope value e^-1
        assert!((p.truncation_factor(tau) - (-1.0f64).exp()).abs() < 2e-4);
    }

    #[test]
    fn gaussian_envelope_examples() {
        let p = params(1000, 0.05);
        assert!((p.gaussian_envelope(p.tau()) - (-1.0f64).exp()).abs() < 1e-15);
        let p200 = params(200, 0.05);
        assert!((p200.tau() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_approximation_bound() {
        // max |cos^N(2gt) - exp(-t^2/tau^2)| <= 0.01 on [0, 3 tau] for N = 1000
        let p = params(1000, 0.05);
        let tau = p.tau();
        let mut max_dev: f64 = 0.0;
        for i in 0..=3000 {
            let t = 3.0 * tau * i as f64 / 3000.0;
            max_dev = max_dev.max((p.truncation_factor(t) - p.gaussian_envelope(t)).abs());
        }
        assert!(max_dev <= 0.01, "max deviation {max_dev}");
    }

    #[test]
    fn recurrence_times_and_exact_revival() {
        let p = params(1000, 0.05);
        let times = p.recurrence_times(3);
        assert!((times[0] - 62.83185307179586).abs() < 1e-12);
        assert!((times[2] - 188.49555921538757).abs() < 1e-12);
        for t in &times {
            assert_eq!(p.truncation_factor(*t), 1.0, "no exact revival at {t}");
        }
    }

    #[test]
    fn truncation_factor_bounded_by_one() {
        let p = params(321, 0.05);
        let t1 = p.recurrence_times(1)[0];
        for i in 0..5000 {
            let t = t1 * 1.5 * i as f64 / 5000.0;
            assert!(p.truncation_factor(t).abs() <= 1.0);
        }
    }

    #[test]
    fn damped_truncation_examples() {
        let p = params(100, 0.05).with_bath(1e4).unwrap();
        assert_eq!(p.damped_truncation_factor(0.0).unwrap(), 1.0);

        // magnitude at the first recurrence is exp(-N t_1/theta)
        let t1 = p.recurrence_times(1)[0];
        let expected = (-100.0 * t1 / 1e4).exp();
        assert!((p.damped_truncation_factor(t1).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.5334880910911033).abs() < 1e-12);

        // enormous theta recovers the bare factor pointwise
        let slow = params(100, 0.05).with_bath(1e15).unwrap();
        for i in 0..200 {
            let t = 80.0 * i as f64 / 200.0;
            let bare = slow.truncation_factor(t);
            let damped = slow.damped_truncation_factor(t).unwrap();
            assert!((bare - damped).abs() < 1e-10);
        }
    }

    #[test]
    fn damping_never_exceeds_bare_factor() {
        let p = params(50, 0.05).with_bath(500.0).unwrap();
        for i in 1..=2000 {
            let t = 100.0 * i as f64 / 2000.0;
            assert!(
                p.damped_truncation_factor(t).unwrap().abs()
                    <= p.truncation_factor(t).abs() + 1e-15
            );
        }
    }

    #[test]
    fn damped_quantities_require_bath() {
        let p = params(100, 0.05);
        assert!(matches!(
            p.damped_truncation_factor(1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(p.bath_onset_time(), Err(Error::Config(_))));
    }

    #[test]
    fn bath_onset_examples() {
        let p = params(100, 0.05).with_bath(1e4).unwrap();
        assert_eq!(p.bath_onset_time().unwrap(), 100.0);
        // t_B = 100 > t_1 = 62.8: first recurrence only partially suppressed
        assert!(!p.recurrences_suppressed().unwrap());

        let big = params(1000, 0.05).with_bath(1e4).unwrap();
        assert_eq!(big.bath_onset_time().unwrap(), 10.0);
        assert!(big.recurrences_suppressed().unwrap());
    }

    #[test]
    fn correlation_cascade_shape() {
        let p = params(1000, 0.05);
        // S and A start uncorrelated
        for k in [1, 2, 5] {
            assert_eq!(p.correlation_cascade(k, 0.0).unwrap(), 0.0);
        }

        // k = 1 peak: stationarity condition tan^2(2gt*) = 1/999 and value
        let t_star = p.correlation_peak_time(1).unwrap();
        assert!((t_star - 0.31628049437571676).abs() < 1e-12);
        let peak = p.correlation_cascade(1, t_star).unwrap();
        assert!((peak - 0.01918498079903273).abs() < 1e-12);

        // grid scan agrees with the analytic peak location
        let mut best_t = 0.0;
        let mut best_v = 0.0;
        let t1 = p.recurrence_times(1)[0];
        for i in 0..=20000 {
            let t = 0.5 * t1 * i as f64 / 20000.0;
            let v = p.correlation_cascade(1, t).unwrap();
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
        assert!((best_t - t_star).abs() < 1e-3);
        assert!(best_v <= peak + 1e-12);

        // well past tau sqrt(k) but before the recurrence the envelope is tiny
        assert!(p.correlation_cascade(1, 5.0 * p.tau()).unwrap() < 1e-6);
        assert!(p.correlation_cascade(2, 6.0 * p.tau()).unwrap() < 1e-6);
    }

    #[test]
    fn correlation_peaks_decrease_with_order() {
        let p = params(1000, 0.05);
        let mut prev = f64::INFINITY;
        for k in 1..=5 {
            let t_star = p.correlation_peak_time(k).unwrap();
            let peak = p.correlation_cascade(k, t_star).unwrap();
            assert!(peak > 0.0);
            assert!(t_star < p.recurrence_times(1)[0] / 2.0);
            assert!(peak < prev, "peak not decreasing at k = {k}");
            prev = peak;
        }
    }

    #[test]
    fn correlation_rejects_bad_order() {
        let p = params(10, 0.05);
        assert!(p.correlation_cascade(0, 1.0).is_err());
        assert!(p.correlation_cascade(11, 1.0).is_err());
    }

    #[test]
    fn collective_factor_consistency() {
        let p = params(64, 0.05);
        // n = 1 extreme pair reduces to the single-spin truncation factor
        for i in 0..100 {
            let t = 0.4 * i as f64;
            let collective = p.collective_truncation_factor(1, 1.0, -1.0, t).unwrap();
            assert_eq!(collective, p.truncation_factor(t));
        }
        // the extreme pair is independent of n at fixed g, N
        for n_tested in [2, 4, 8] {
            let v = p
                .collective_truncation_factor(n_tested, 1.0, -1.0, 0.7)
                .unwrap();
            assert_eq!(v, p.truncation_factor(0.7));
        }
        // factor is 1 at t = 0 for all pairs
        assert_eq!(
            p.collective_truncation_factor(4, 0.5, -0.5, 0.0).unwrap(),
            1.0
        );
    }

    #[test]
    fn collective_characteristic_time_scaling() {
        let p = params(64, 0.05);
        let base = p.characteristic_time(1);
        assert!((base - p.tau()).abs() < 1e-15);
        assert!((p.characteristic_time(4) - 4.0 * base).abs() < 1e-15 * base);
    }

    #[test]
    fn collective_rejects_invalid_eigenvalues() {
        let p = params(16, 0.05);
        assert!(p.collective_truncation_factor(4, 0.3, -1.0, 1.0).is_err());
        assert!(p.collective_truncation_factor(4, 1.5, -1.0, 1.0).is_err());
        assert!(p.collective_truncation_factor(4, 0.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn default_bath_theta_from_model() {
        let model = ModelParams::default();
        let p = DephasingParams::from_model(&model).unwrap();
        assert_eq!(p.theta, Some(1.0 / (0.01 * 0.2)));
    }
}
