//! Physical model: background spectra, the search problem, quantum states,
//! and probability extraction.
//!
//! Levels are labelled by 1-based quantum numbers `n = 1..=n_levels`; the
//! amplitude vector of a [`WaveState`] is indexed by `n - 1`. Energies are
//! dimensionless (ħ = 1) and all frequencies are angular.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Squared-norm deviation beyond which a state is rejected outright.
pub const NORM_ERROR_TOL: f64 = 1e-6;

/// Squared-norm deviation expected of healthy unitary evolution.
pub const NORM_DRIFT_TOL: f64 = 1e-8;

/// Below this value of [`SearchProblem::bohr_gap_ratio`] the two-level
/// reduction of the dynamics becomes questionable and callers should warn.
pub const BOHR_RATIO_WARN: f64 = 10.0;

/// Ordered eigenvalues of the background Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    levels: Vec<f64>,
}

impl Spectrum {
    /// Builds a spectrum from raw eigenvalues, in label order.
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 3 {
            return Err(Error::InvalidModel(format!(
                "a spectrum needs at least 3 levels (initial, searched, spectator), got {}",
                levels.len()
            )));
        }
        if levels.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidModel("spectrum contains a non-finite eigenvalue".into()));
        }
        Ok(Self { levels })
    }

    /// Quantum-rotor spectrum `eps_n = scale * n^2` for `n = 1..=n_levels`.
    pub fn rotor(n_levels: usize, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidModel(format!("rotor scale must be positive, got {scale}")));
        }
        if n_levels < 3 {
            return Err(Error::InvalidModel(format!(
                "rotor needs at least 3 levels, got {n_levels}"
            )));
        }
        let levels = (1..=n_levels).map(|n| scale * (n * n) as f64).collect();
        Ok(Self { levels })
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees >= 3 levels
    }

    /// Eigenvalues in label order (`levels()[n - 1]` is the energy of level `n`).
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Energy of the level with 1-based label `n`, if it exists.
    pub fn energy(&self, label: usize) -> Option<f64> {
        (label >= 1).then(|| self.levels.get(label - 1).copied()).flatten()
    }

    /// Largest Bohr frequency `max |eps_m - eps_n|` over all level pairs.
    pub fn max_bohr_frequency(&self) -> f64 {
        let max = self.levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = self.levels.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    }

    /// Smallest gap `min |eps_m - eps_n|` over distinct level pairs
    /// (0 for a degenerate spectrum).
    pub fn min_bohr_frequency(&self) -> f64 {
        let mut sorted = self.levels.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// The search problem: a marked subset of levels, the initial level `j`
/// outside it, and the searched level `s` inside it.
///
/// Construction fixes the Rabi frequency `omega = 1/sqrt(N)`, the driving
/// Bohr frequency `omega_sj = eps_j - eps_s`, and the optimal measurement
/// time `tau = pi/(2 omega)`.
#[derive(Debug, Clone)]
pub struct SearchProblem {
    spectrum: Spectrum,
    subset: Vec<usize>,
    j: usize,
    s: usize,
    omega: f64,
    omega_sj: f64,
    tau: f64,
}

impl SearchProblem {
    pub fn new(
        spectrum: Spectrum,
        subset: impl IntoIterator<Item = usize>,
        j: usize,
        s: usize,
    ) -> Result<Self> {
        let mut subset: Vec<usize> = subset.into_iter().collect();
        subset.sort_unstable();
        subset.dedup();

        let n_levels = spectrum.len();
        let check_label = |label: usize, what: &str| -> Result<()> {
            if label < 1 || label > n_levels {
                return Err(Error::InvalidModel(format!(
                    "{what} label {label} outside the spectrum (1..={n_levels})"
                )));
            }
            Ok(())
        };
        for &n in &subset {
            check_label(n, "subset")?;
        }
        check_label(j, "initial-state")?;
        check_label(s, "searched-state")?;

        if subset.len() < 2 {
            return Err(Error::InvalidModel(format!(
                "searched subset must have at least 2 states, got {}",
                subset.len()
            )));
        }
        if subset.binary_search(&j).is_ok() {
            return Err(Error::InvalidModel(format!(
                "initial state j = {j} must lie outside the searched subset"
            )));
        }
        if subset.binary_search(&s).is_err() {
            return Err(Error::InvalidModel(format!(
                "searched state s = {s} must lie inside the searched subset"
            )));
        }
        // Exact energy ties inside the subset would un-mark the searched state.
        let mut energies: Vec<f64> = subset.iter().map(|&n| spectrum.levels()[n - 1]).collect();
        energies.sort_by(|a, b| a.total_cmp(b));
        if energies.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidModel(
                "searched subset contains degenerate eigenvalues; the searched energy must be unique".into(),
            ));
        }

        let n = subset.len() as f64;
        let omega = 1.0 / n.sqrt();
        let omega_sj = spectrum.levels()[j - 1] - spectrum.levels()[s - 1];
        let tau = std::f64::consts::FRAC_PI_2 * n.sqrt();
        Ok(Self { spectrum, subset, j, s, omega, omega_sj, tau })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// Marked labels, ascending.
    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    /// Number of marked states `N`.
    pub fn n_marked(&self) -> usize {
        self.subset.len()
    }

    /// Label of the initial state.
    pub fn j(&self) -> usize {
        self.j
    }

    /// Label of the searched state.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Rabi frequency of the resonant transfer, `1/sqrt(N)`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Bohr frequency of the driven transition, `eps_j - eps_s`.
    pub fn omega_sj(&self) -> f64 {
        self.omega_sj
    }

    /// Optimal measurement time `pi/(2 omega) = pi sqrt(N)/2`.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn contains(&self, label: usize) -> bool {
        self.subset.binary_search(&label).is_ok()
    }

    /// Smallest Bohr frequency of the spectrum divided by the Rabi frequency.
    ///
    /// The two-level reduction assumes this ratio is large; values below
    /// [`BOHR_RATIO_WARN`] deserve a warning.
    pub fn bohr_gap_ratio(&self) -> f64 {
        self.spectrum.min_bohr_frequency() / self.omega
    }
}

/// Complex amplitudes `a_n(t)` in the eigenbasis of the background
/// Hamiltonian, together with the current time.
#[derive(Debug, Clone)]
pub struct WaveState {
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl WaveState {
    /// The algorithm's starting state: unit amplitude on level `j` at `t = 0`.
    pub fn initial(problem: &SearchProblem) -> Self {
        Self::basis(problem.spectrum().len(), problem.j(), 0.0)
            .expect("problem labels are validated at construction")
    }

    /// A basis state: unit amplitude on `label`, everything else zero.
    pub fn basis(n_levels: usize, label: usize, time: f64) -> Result<Self> {
        if label < 1 || label > n_levels {
            return Err(Error::InvalidArgument(format!(
                "basis label {label} outside 1..={n_levels}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n_levels];
        amplitudes[label - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { amplitudes, time })
    }

    /// Wraps raw amplitudes, rejecting vectors with squared norm further
    /// than [`NORM_ERROR_TOL`] from one.
    pub fn new(amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_ERROR_TOL {
            return Err(Error::Integrity(format!(
                "state squared norm {norm_sq} deviates from 1 by more than {NORM_ERROR_TOL:e}"
            )));
        }
        Ok(Self { amplitudes, time })
    }

    pub(crate) fn from_parts_unchecked(amplitudes: Vec<Complex64>, time: f64) -> Self {
        Self { amplitudes, time }
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude of the level with 1-based label `n`.
    pub fn amplitude(&self, label: usize) -> Complex64 {
        self.amplitudes[label - 1]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Occupation probabilities of the initial and searched levels.
    ///
    /// Fails with an integrity error when the squared norm has drifted more
    /// than [`NORM_ERROR_TOL`] from one.
    pub fn probabilities(&self, problem: &SearchProblem) -> Result<ProbabilityRecord> {
        if self.amplitudes.len() != problem.spectrum().len() {
            return Err(Error::InvalidArgument(format!(
                "state has {} amplitudes but the spectrum has {} levels",
                self.amplitudes.len(),
                problem.spectrum().len()
            )));
        }
        let norm_sq = self.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_ERROR_TOL {
            return Err(Error::Integrity(format!(
                "state squared norm {norm_sq} deviates from 1 by more than {NORM_ERROR_TOL:e}"
            )));
        }
        let p_j = self.amplitude(problem.j()).norm_sqr();
        let p_s = self.amplitude(problem.s()).norm_sqr();
        let p_rest = (1.0 - p_j - p_s).max(0.0);
        Ok(ProbabilityRecord { p_j, p_s, p_rest, time: self.time })
    }
}

/// Occupation probabilities of the initial level, the searched level, and
/// everything else, at a given time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityRecord {
    pub p_j: f64,
    pub p_s: f64,
    pub p_rest: f64,
    pub time: f64,
}

/// Diagonal driving-field couplings `Gamma_nn` and the field frequency.
///
/// The field operator is diagonal in the background eigenbasis; only the
/// difference `eps = Gamma_ss - Gamma_jj` affects the two-level dynamics.
#[derive(Debug, Clone)]
pub struct FieldParams {
    gamma: Vec<f64>,
    omega0: f64,
    eps: f64,
    alpha: f64,
}

impl FieldParams {
    /// Field with per-level couplings `gamma[n - 1] = Gamma_nn`.
    pub fn new(problem: &SearchProblem, gamma: Vec<f64>, omega0: f64) -> Result<Self> {
        if gamma.len() != problem.spectrum().len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} couplings but the spectrum has {} levels",
                gamma.len(),
                problem.spectrum().len()
            )));
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument("field coupling is not finite".into()));
        }
        if !(omega0.is_finite() && omega0 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "field frequency must be positive, got {omega0}"
            )));
        }
        let eps = gamma[problem.s() - 1] - gamma[problem.j() - 1];
        let alpha = omega0 / problem.omega();
        Ok(Self { gamma, omega0, eps, alpha })
    }

    /// Field coupling only to the initial and searched levels.
    pub fn two_level(
        problem: &SearchProblem,
        gamma_jj: f64,
        gamma_ss: f64,
        omega0: f64,
    ) -> Result<Self> {
        let mut gamma = vec![0.0; problem.spectrum().len()];
        gamma[problem.j() - 1] = gamma_jj;
        gamma[problem.s() - 1] = gamma_ss;
        Self::new(problem, gamma, omega0)
    }

    /// No field at all (all couplings zero).
    pub fn zero(problem: &SearchProblem) -> Self {
        // omega0 never enters the dynamics when every coupling vanishes,
        // but the invariant omega0 > 0 still holds.
        Self::new(problem, vec![0.0; problem.spectrum().len()], problem.omega())
            .expect("zero field is always valid")
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    /// `Gamma_ss - Gamma_jj`.
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `omega0 / omega`, the field frequency in Rabi units.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn is_zero(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0.0)
    }
}
