//! Projective measurement as decoherence: Born-rule collapse, the analytic
//! interval-product coefficients, and reproducible trajectory ensembles.
//!
//! Between measurements the populations of the searched and initial levels
//! mix through the doubly stochastic matrix `[[p, q], [q, p]]` with
//! `p = cos^2(omega dt)`; its non-unit eigenvalue `2p - 1 = cos(2 omega dt)`
//! drives every product formula here.
//!
//! Ensembles are deterministic by construction: trajectory `t` draws from a
//! ChaCha8 generator seeded with the master seed on stream `t`, so results
//! are bit-identical for any execution order or thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{integrate_full, StepConfig};
use crate::error::{Error, Result};
use crate::model::{FieldParams, SearchProblem, WaveState, NORM_ERROR_TOL};

/// Measurement times given as the positive intervals between consecutive
/// measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSchedule {
    intervals: Vec<f64>,
}

impl MeasurementSchedule {
    pub fn new(intervals: Vec<f64>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidArgument("a schedule needs at least one interval".into()));
        }
        if intervals.iter().any(|dt| !(dt.is_finite() && *dt > 0.0)) {
            return Err(Error::InvalidArgument(
                "measurement intervals must be positive and finite".into(),
            ));
        }
        Ok(Self { intervals })
    }

    /// `m` measurements separated by the same interval.
    pub fn regular(dt: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one measurement".into()));
        }
        Self::new(vec![dt; m])
    }

    /// `m` equally spaced measurements inside the total time `tau`.
    pub fn zeno(tau: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("need at least one measurement".into()));
        }
        Self::new(vec![tau / m as f64; m])
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction guarantees at least one interval
    }

    /// Absolute measurement times `t_i`.
    pub fn times(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .scan(0.0, |acc, dt| {
                *acc += dt;
                Some(*acc)
            })
            .collect()
    }
}

/// Per-measurement analytic populations `(alpha_k, beta_k)`.
///
/// With the system starting in the initial level, `beta_k` is the
/// probability of finding the searched state right after the `k`-th
/// measurement and `alpha_k` the probability of the initial state;
/// `alpha_k + beta_k == 1` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovCoefficients {
    pairs: Vec<(f64, f64)>,
}

impl MarkovCoefficients {
    /// Accumulates the shared eigenvalue product `prod_i (2 p_i - 1)` and
    /// derives both coefficients from it.
    fn from_factors(factors: impl IntoIterator<Item = f64>) -> Self {
        let mut prod = 1.0;
        let pairs = factors
            .into_iter()
            .map(|f| {
                prod *= f;
                let beta = 0.5 * (1.0 - prod);
                (1.0 - beta, beta)
            })
            .collect();
        Self { pairs }
    }

    /// `(alpha_k, beta_k)` pairs for `k = 1..=m`.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Coefficients after the last measurement.
    pub fn last(&self) -> (f64, f64) {
        *self.pairs.last().expect("coefficients are built from at least one interval")
    }
}

/// Population transfer matrix `[[p, q], [q, p]]` over one interval, acting
/// on `(P_s, P_j)` with `p = cos^2(omega dt)`.
pub fn transition_matrix(omega: f64, dt: f64) -> [[f64; 2]; 2] {
    let c = (omega * dt).cos();
    let p = c * c;
    let q = 1.0 - p;
    [[p, q], [q, p]]
}

/// Analytic coefficients for an arbitrary schedule.
pub fn markov_coefficients(omega: f64, schedule: &MeasurementSchedule) -> MarkovCoefficients {
    MarkovCoefficients::from_factors(
        schedule.intervals().iter().map(|&dt| (2.0 * omega * dt).cos()),
    )
}

/// Analytic coefficients for `m` measurements at the fixed interval `dt`:
/// `beta_k = (1 - cos^k(2 omega dt)) / 2`.
pub fn regular_coefficients(omega: f64, dt: f64, m: usize) -> MarkovCoefficients {
    assert!(m >= 1, "need at least one measurement");
    let factor = (2.0 * omega * dt).cos();
    MarkovCoefficients::from_factors(std::iter::repeat(factor).take(m))
}

/// Analytic coefficients for `m` measurements inside one optimal time:
/// `beta_k = (1 - cos^k(pi/m)) / 2`.
pub fn zeno_coefficients(m: usize) -> MarkovCoefficients {
    assert!(m >= 1, "need at least one measurement");
    let factor = (std::f64::consts::PI / m as f64).cos();
    MarkovCoefficients::from_factors(std::iter::repeat(factor).take(m))
}

/// Searched-state probability for a single measurement at the estimated
/// optimal time `tau_star`.
///
/// Returns `(exact, approx)`: the exact value `(1 - cos(2 omega tau_star))/2`
/// and its quadratic approximation `1 - (pi^2/4) r^2` in the relative error
/// `r = (tau_star - tau)/tau`.
pub fn single_measurement(omega: f64, tau_star: f64) -> (f64, f64) {
    let exact = 0.5 * (1.0 - (2.0 * omega * tau_star).cos());
    let tau = crate::dynamics::optimal_time(omega);
    let r = (tau_star - tau) / tau;
    let approx = 1.0 - std::f64::consts::PI.powi(2) / 4.0 * r * r;
    (exact, approx)
}

/// Born-rule projective measurement: samples a level with probability
/// `|a_n|^2` and returns its label together with the collapsed state
/// (unit amplitude, phase reset, time unchanged).
pub fn collapse<R: Rng + ?Sized>(state: &WaveState, rng: &mut R) -> Result<(usize, WaveState)> {
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > NORM_ERROR_TOL {
        return Err(Error::Integrity(format!(
            "cannot collapse a state with squared norm {norm_sq}"
        )));
    }
    let u: f64 = rng.random::<f64>() * norm_sq;
    let amplitudes = state.amplitudes();
    let mut acc = 0.0;
    let mut chosen = None;
    for (idx, a) in amplitudes.iter().enumerate() {
        acc += a.norm_sqr();
        if u < acc {
            chosen = Some(idx);
            break;
        }
    }
    // u == norm_sq can only arise from rounding; take the last occupied level.
    let idx = match chosen {
        Some(idx) => idx,
        None => amplitudes
            .iter()
            .rposition(|a| a.norm_sqr() > 0.0)
            .expect("a normalized state has at least one occupied level"),
    };
    let label = idx + 1;
    let collapsed = WaveState::basis(amplitudes.len(), label, state.time())
        .expect("label derived from the amplitude vector");
    Ok((label, collapsed))
}

/// How trajectories are evolved between measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Closed-form two-level rotation restarted from each collapse. Valid
    /// only without a field or with equal couplings (`eps = 0`).
    TwoLevel,
    /// Full multi-level integration of the driven amplitude equations.
    Full,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::TwoLevel => "two-level",
            Backend::Full => "full",
        })
    }
}

/// Which of the tracked levels a trajectory occupied after a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Occupancy {
    Searched,
    Initial,
    Other,
}

/// Empirical populations after one measurement of the schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleStats {
    /// 1-based measurement count this row belongs to.
    pub measurement: usize,
    pub p_s: f64,
    pub p_j: f64,
    pub p_rest: f64,
    pub se_s: f64,
    pub se_j: f64,
    pub se_rest: f64,
}

/// Monte Carlo estimates over an ensemble of measured trajectories.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    stats: Vec<EnsembleStats>,
    n_traj: usize,
    master_seed: u64,
    backend: Backend,
}

impl EnsembleResult {
    /// One row per measurement of the schedule, in order.
    pub fn stats(&self) -> &[EnsembleStats] {
        &self.stats
    }

    pub fn n_traj(&self) -> usize {
        self.n_traj
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }
}

/// Binomial standard error of an empirical proportion.
pub fn standard_error(p_hat: f64, n: usize) -> f64 {
    (p_hat * (1.0 - p_hat) / n as f64).sqrt()
}

fn two_level_trajectory(
    omega: f64,
    intervals: &[f64],
    rng: &mut ChaCha8Rng,
) -> Vec<Occupancy> {
    let mut in_searched = false;
    intervals
        .iter()
        .map(|&dt| {
            let s = (omega * dt).sin();
            let switch_prob = s * s;
            if rng.random::<f64>() < switch_prob {
                in_searched = !in_searched;
            }
            if in_searched {
                Occupancy::Searched
            } else {
                Occupancy::Initial
            }
        })
        .collect()
}

fn full_trajectory(
    problem: &SearchProblem,
    field: &FieldParams,
    times: &[f64],
    cfg: &StepConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Occupancy>> {
    let mut state = WaveState::initial(problem);
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        state = integrate_full(problem, field, &state, t, cfg)?;
        let (label, collapsed) = collapse(&state, rng)?;
        state = collapsed;
        out.push(if label == problem.s() {
            Occupancy::Searched
        } else if label == problem.j() {
            Occupancy::Initial
        } else {
            Occupancy::Other
        });
    }
    Ok(out)
}

/// Runs `n_traj` independently seeded measured trajectories and aggregates
/// the occupancies after each measurement.
pub fn run_ensemble(
    problem: &SearchProblem,
    field: Option<&FieldParams>,
    schedule: &MeasurementSchedule,
    backend: Backend,
    n_traj: usize,
    master_seed: u64,
) -> Result<EnsembleResult> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("need at least one trajectory".into()));
    }
    if backend == Backend::TwoLevel {
        if let Some(f) = field {
            if f.eps() != 0.0 {
                return Err(Error::InvalidArgument(
                    "the two-level backend requires no field or equal couplings (eps = 0)".into(),
                ));
            }
        }
    }

    let zero_field;
    let field = match field {
        Some(f) => f,
        None => {
            zero_field = FieldParams::zero(problem);
            &zero_field
        }
    };

    let omega = problem.omega();
    let intervals = schedule.intervals();
    let times = schedule.times();
    let cfg = StepConfig::for_full(problem);

    let trajectories: Vec<Vec<Occupancy>> = (0..n_traj)
        .into_par_iter()
        .map(|traj| -> Result<Vec<Occupancy>> {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(traj as u64);
            match backend {
                Backend::TwoLevel => Ok(two_level_trajectory(omega, intervals, &mut rng)),
                Backend::Full => full_trajectory(problem, field, &times, &cfg, &mut rng),
            }
        })
        .collect::<Result<_>>()?;

    let m = intervals.len();
    let mut counts = vec![(0u64, 0u64, 0u64); m];
    for traj in &trajectories {
        for (k, occ) in traj.iter().enumerate() {
            match occ {
                Occupancy::Searched => counts[k].0 += 1,
                Occupancy::Initial => counts[k].1 += 1,
                Occupancy::Other => counts[k].2 += 1,
            }
        }
    }
    let stats = counts
        .iter()
        .enumerate()
        .map(|(k, &(n_s, n_j, n_rest))| {
            let p_s = n_s as f64 / n_traj as f64;
            let p_j = n_j as f64 / n_traj as f64;
            let p_rest = n_rest as f64 / n_traj as f64;
            EnsembleStats {
                measurement: k + 1,
                p_s,
                p_j,
                p_rest,
                se_s: standard_error(p_s, n_traj),
                se_j: standard_error(p_j, n_traj),
                se_rest: standard_error(p_rest, n_traj),
            }
        })
        .collect();

    Ok(EnsembleResult { stats, n_traj, master_seed, backend })
}
