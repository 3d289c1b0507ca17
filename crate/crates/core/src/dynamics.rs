//! Time evolution of the driven amplitude equations.
//!
//! Two integration routes are provided, both fixed-step fourth-order
//! Runge-Kutta so runs are bit-reproducible:
//!
//! * [`integrate_full`] evolves every amplitude `a_n(t)` of the interaction
//!   picture, with the resonant coupling acting between the initial level
//!   and the marked subset and the diagonal field `Gamma_nn sin(omega0 t)`
//!   acting on every level. Bohr frequencies follow the convention
//!   `omega_nm = eps_m - eps_n`, so the phase driving a marked level `n`
//!   is `omega_jn + omega_sj = eps_n - eps_s` and vanishes on the searched
//!   level.
//! * [`integrate_reduced`] evolves the rotating-frame pair
//!   `dx_j/dt = -i omega x_s e^{+i phi(t)}`,
//!   `dx_s/dt = -i omega x_j e^{-i phi(t)}` with
//!   `phi(t) = eps (cos(omega0 t) - 1)/omega0`. The coefficient matrix is
//!   anti-Hermitian and trace-free, so the pair norm is conserved.
//!
//! No renormalization is ever applied: norm drift is the primary accuracy
//! diagnostic and surfaces as an error instead of being hidden.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{
    FieldParams, ProbabilityRecord, SearchProblem, WaveState, NORM_ERROR_TOL,
};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Norm-drift checks run every this many steps during long integrations.
const DRIFT_CHECK_STRIDE: usize = 256;

/// Largest admissible step for the full model: 20 samples per period of the
/// fastest Bohr oscillation.
pub fn full_step_bound(problem: &SearchProblem) -> f64 {
    TWO_PI / problem.spectrum().max_bohr_frequency() / 20.0
}

/// Default step for the full model: 30 samples per fastest Bohr period.
///
/// Tighter than the admissible bound because runs at exactly the bound lose
/// a few parts in 1e8 of norm over 50 optimal times, while the default is
/// expected to stay within 1e-8 there.
pub fn full_step_default(problem: &SearchProblem) -> f64 {
    TWO_PI / problem.spectrum().max_bohr_frequency() / 30.0
}

/// Largest admissible step for the reduced model: 200 samples per period of
/// the fastest of the Rabi, field, and coupling-difference frequencies.
pub fn reduced_step_bound(omega: f64, eps: f64, omega0: f64) -> f64 {
    TWO_PI / omega.max(omega0).max(eps.abs()) / 200.0
}

/// Default step for the reduced model: 300 samples per fastest period, for
/// the same reason as [`full_step_default`].
pub fn reduced_step_default(omega: f64, eps: f64, omega0: f64) -> f64 {
    TWO_PI / omega.max(omega0).max(eps.abs()) / 300.0
}

/// Fixed-step integration parameters. The method is always classical RK4.
#[derive(Debug, Clone, Copy)]
pub struct StepConfig {
    step: f64,
    sample_every: usize,
}

impl StepConfig {
    pub fn new(step: f64, sample_every: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        if sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be at least 1".into()));
        }
        Ok(Self { step, sample_every })
    }

    /// Default step for the full model of `problem`.
    pub fn for_full(problem: &SearchProblem) -> Self {
        Self { step: full_step_default(problem), sample_every: 1 }
    }

    /// Default step for the reduced model.
    pub fn for_reduced(omega: f64, eps: f64, omega0: f64) -> Self {
        Self { step: reduced_step_default(omega, eps, omega0), sample_every: 1 }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn sample_every(&self) -> usize {
        self.sample_every
    }

    pub fn with_sample_every(mut self, sample_every: usize) -> Result<Self> {
        if sample_every == 0 {
            return Err(Error::InvalidArgument("sample_every must be at least 1".into()));
        }
        self.sample_every = sample_every;
        Ok(self)
    }
}

/// Splits a span into the number of RK4 steps implied by `max_step`, so the
/// effective step lands exactly on the end time and never exceeds the bound.
fn step_count(span: f64, max_step: f64) -> usize {
    ((span / max_step).ceil() as usize).max(1)
}

// ---------------------------------------------------------------------------
// full multi-level model
// ---------------------------------------------------------------------------

/// Precomputed structure of the driven amplitude equations.
struct FullSystem {
    omega: f64,
    j_idx: usize,
    subset_idx: Vec<usize>,
    /// Drive phase rate per marked level: `eps_n - eps_s`.
    lambda: Vec<f64>,
    gamma: Vec<f64>,
    omega0: f64,
    has_field: bool,
}

impl FullSystem {
    fn new(problem: &SearchProblem, field: &FieldParams) -> Self {
        let levels = problem.spectrum().levels();
        let eps_s = levels[problem.s() - 1];
        let subset_idx: Vec<usize> = problem.subset().iter().map(|&n| n - 1).collect();
        let lambda: Vec<f64> = subset_idx.iter().map(|&i| levels[i] - eps_s).collect();
        Self {
            omega: problem.omega(),
            j_idx: problem.j() - 1,
            subset_idx,
            lambda,
            gamma: field.gamma().to_vec(),
            omega0: field.omega0(),
            has_field: !field.is_zero(),
        }
    }

    fn dim(&self) -> usize {
        self.gamma.len()
    }

    /// Drive phases `e^{i lambda_k t}` for one stage time.
    fn phases(&self, t: f64, out: &mut [Complex64]) {
        for (p, &l) in out.iter_mut().zip(&self.lambda) {
            let (s, c) = (l * t).sin_cos();
            *p = Complex64::new(c, s);
        }
    }

    /// `da/dt` given the stage time and its precomputed drive phases.
    fn rhs(&self, t: f64, phases: &[Complex64], a: &[Complex64], out: &mut [Complex64]) {
        if self.has_field {
            let f = (self.omega0 * t).sin();
            for ((o, &g), &an) in out.iter_mut().zip(&self.gamma).zip(a) {
                // -i sin(omega0 t) Gamma_nn a_n
                *o = Complex64::new(0.0, -f * g) * an;
            }
        } else {
            out.fill(Complex64::new(0.0, 0.0));
        }
        let minus_i_omega = Complex64::new(0.0, -self.omega);
        let a_j = a[self.j_idx];
        let mut acc = Complex64::new(0.0, 0.0);
        for (&idx, &ph) in self.subset_idx.iter().zip(phases) {
            out[idx] += minus_i_omega * a_j * ph;
            acc += a[idx] * ph.conj();
        }
        out[self.j_idx] += minus_i_omega * acc;
    }
}

/// RK4 stage buffers for the full system.
struct FullStepper {
    sys: FullSystem,
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    scratch: Vec<Complex64>,
    ph0: Vec<Complex64>,
    ph_half: Vec<Complex64>,
    ph1: Vec<Complex64>,
}

impl FullStepper {
    fn new(sys: FullSystem) -> Self {
        let dim = sys.dim();
        let n_marked = sys.subset_idx.len();
        let zero = Complex64::new(0.0, 0.0);
        Self {
            sys,
            k1: vec![zero; dim],
            k2: vec![zero; dim],
            k3: vec![zero; dim],
            k4: vec![zero; dim],
            scratch: vec![zero; dim],
            ph0: vec![zero; n_marked],
            ph_half: vec![zero; n_marked],
            ph1: vec![zero; n_marked],
        }
    }

    /// Loads the drive phases for the first stage time.
    fn prime(&mut self, t0: f64) {
        let sys = &self.sys;
        sys.phases(t0, &mut self.ph0);
    }

    /// One RK4 step over `[t, t_next]`. Requires `ph0` to hold the phases of
    /// `t` (from [`Self::prime`] or the previous step); leaves them holding
    /// the phases of `t_next`.
    fn step(&mut self, t: f64, t_half: f64, t_next: f64, h: f64, a: &mut [Complex64]) {
        let half = 0.5 * h;
        self.sys.phases(t_half, &mut self.ph_half);
        self.sys.phases(t_next, &mut self.ph1);

        self.sys.rhs(t, &self.ph0, a, &mut self.k1);
        for (sc, (&ai, &ki)) in self.scratch.iter_mut().zip(a.iter().zip(&self.k1)) {
            *sc = ai + half * ki;
        }
        self.sys.rhs(t_half, &self.ph_half, &self.scratch, &mut self.k2);
        for (sc, (&ai, &ki)) in self.scratch.iter_mut().zip(a.iter().zip(&self.k2)) {
            *sc = ai + half * ki;
        }
        self.sys.rhs(t_half, &self.ph_half, &self.scratch, &mut self.k3);
        for (sc, (&ai, &ki)) in self.scratch.iter_mut().zip(a.iter().zip(&self.k3)) {
            *sc = ai + h * ki;
        }
        self.sys.rhs(t_next, &self.ph1, &self.scratch, &mut self.k4);

        let w = h / 6.0;
        for (i, ai) in a.iter_mut().enumerate() {
            *ai += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
        std::mem::swap(&mut self.ph0, &mut self.ph1);
    }
}

fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

fn check_drift(a: &[Complex64], t: f64) -> Result<()> {
    let n = norm_sq(a);
    if (n - 1.0).abs() > NORM_ERROR_TOL {
        return Err(Error::Accuracy(format!(
            "norm drift {:.3e} at t = {t:.6} exceeds {NORM_ERROR_TOL:e}; reduce the step",
            (n - 1.0).abs()
        )));
    }
    Ok(())
}

fn validate_full_inputs(
    problem: &SearchProblem,
    field: &FieldParams,
    state0: &WaveState,
    t_end: f64,
    cfg: &StepConfig,
) -> Result<()> {
    let dim = problem.spectrum().len();
    if state0.amplitudes().len() != dim {
        return Err(Error::InvalidArgument(format!(
            "state has {} amplitudes but the spectrum has {dim} levels",
            state0.amplitudes().len()
        )));
    }
    if field.gamma().len() != dim {
        return Err(Error::InvalidArgument(format!(
            "field has {} couplings but the spectrum has {dim} levels",
            field.gamma().len()
        )));
    }
    if !t_end.is_finite() || t_end < state0.time() {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} precedes the state time {}",
            state0.time()
        )));
    }
    let bound = full_step_bound(problem);
    if cfg.step() > bound {
        return Err(Error::InvalidArgument(format!(
            "step {:.6e} exceeds the full-model bound {bound:.6e} (20 samples per fastest Bohr period)",
            cfg.step()
        )));
    }
    Ok(())
}

/// Right-hand side of the driven amplitude equations at one instant.
///
/// Mostly a diagnostic view; the integrators evaluate the same expressions
/// internally with the stage phases cached.
pub fn full_rhs(
    problem: &SearchProblem,
    field: &FieldParams,
    t: f64,
    amplitudes: &[Complex64],
) -> Result<Vec<Complex64>> {
    let dim = problem.spectrum().len();
    if amplitudes.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "amplitude vector has length {} but the spectrum has {dim} levels",
            amplitudes.len()
        )));
    }
    if field.gamma().len() != dim {
        return Err(Error::InvalidArgument(format!(
            "field has {} couplings but the spectrum has {dim} levels",
            field.gamma().len()
        )));
    }
    let sys = FullSystem::new(problem, field);
    let mut phases = vec![Complex64::new(0.0, 0.0); sys.subset_idx.len()];
    sys.phases(t, &mut phases);
    let mut out = vec![Complex64::new(0.0, 0.0); dim];
    sys.rhs(t, &phases, amplitudes, &mut out);
    Ok(out)
}

/// Evolves the full multi-level state to `t_end`.
pub fn integrate_full(
    problem: &SearchProblem,
    field: &FieldParams,
    state0: &WaveState,
    t_end: f64,
    cfg: &StepConfig,
) -> Result<WaveState> {
    validate_full_inputs(problem, field, state0, t_end, cfg)?;
    let t0 = state0.time();
    let span = t_end - t0;
    let mut a = state0.amplitudes().to_vec();
    if span > 0.0 {
        let n_steps = step_count(span, cfg.step());
        let h = span / n_steps as f64;
        let mut stepper = FullStepper::new(FullSystem::new(problem, field));
        stepper.prime(t0);
        for k in 0..n_steps {
            let t = t0 + k as f64 * h;
            let t_half = t0 + (k as f64 + 0.5) * h;
            let t_next = t0 + (k + 1) as f64 * h;
            stepper.step(t, t_half, t_next, h, &mut a);
            if (k + 1) % DRIFT_CHECK_STRIDE == 0 {
                check_drift(&a, t_next)?;
            }
        }
        check_drift(&a, t_end)?;
    }
    Ok(WaveState::from_parts_unchecked(a, t_end))
}

/// One sampled point of a full-model trajectory.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub probabilities: ProbabilityRecord,
    pub norm: f64,
}

/// Evolves the full state to `t_end`, recording the occupation probabilities
/// every [`StepConfig::sample_every`] steps (first and last step included).
pub fn integrate_full_trajectory(
    problem: &SearchProblem,
    field: &FieldParams,
    state0: &WaveState,
    t_end: f64,
    cfg: &StepConfig,
) -> Result<(WaveState, Vec<TrajectorySample>)> {
    validate_full_inputs(problem, field, state0, t_end, cfg)?;
    let t0 = state0.time();
    let span = t_end - t0;
    let mut a = state0.amplitudes().to_vec();
    let mut samples = Vec::new();

    let j_idx = problem.j() - 1;
    let s_idx = problem.s() - 1;
    let record = |a: &[Complex64], t: f64, samples: &mut Vec<TrajectorySample>| {
        let p_j = a[j_idx].norm_sqr();
        let p_s = a[s_idx].norm_sqr();
        samples.push(TrajectorySample {
            probabilities: ProbabilityRecord {
                p_j,
                p_s,
                p_rest: (1.0 - p_j - p_s).max(0.0),
                time: t,
            },
            norm: norm_sq(a).sqrt(),
        });
    };

    record(&a, t0, &mut samples);
    if span > 0.0 {
        let n_steps = step_count(span, cfg.step());
        let h = span / n_steps as f64;
        let mut stepper = FullStepper::new(FullSystem::new(problem, field));
        stepper.prime(t0);
        for k in 0..n_steps {
            let t = t0 + k as f64 * h;
            let t_half = t0 + (k as f64 + 0.5) * h;
            let t_next = t0 + (k + 1) as f64 * h;
            stepper.step(t, t_half, t_next, h, &mut a);
            let done = k + 1;
            if done % DRIFT_CHECK_STRIDE == 0 {
                check_drift(&a, t_next)?;
            }
            if done % cfg.sample_every() == 0 || done == n_steps {
                record(&a, t_next, &mut samples);
            }
        }
        check_drift(&a, t_end)?;
    }
    Ok((WaveState::from_parts_unchecked(a, t_end), samples))
}

// ---------------------------------------------------------------------------
// reduced two-level model
// ---------------------------------------------------------------------------

/// Rotating-frame amplitudes of the initial and searched levels.
#[derive(Debug, Clone, Copy)]
pub struct ReducedState {
    pub x_j: Complex64,
    pub x_s: Complex64,
    pub time: f64,
}

impl ReducedState {
    /// Unit amplitude on the initial level at `t = 0`.
    pub fn initial() -> Self {
        Self { x_j: Complex64::new(1.0, 0.0), x_s: Complex64::new(0.0, 0.0), time: 0.0 }
    }

    pub fn new(x_j: Complex64, x_s: Complex64, time: f64) -> Result<Self> {
        let n = x_j.norm_sqr() + x_s.norm_sqr();
        if (n - 1.0).abs() > NORM_ERROR_TOL {
            return Err(Error::Integrity(format!(
                "reduced state squared norm {n} deviates from 1 by more than {NORM_ERROR_TOL:e}"
            )));
        }
        Ok(Self { x_j, x_s, time })
    }

    pub fn norm_sq(&self) -> f64 {
        self.x_j.norm_sqr() + self.x_s.norm_sqr()
    }

    pub fn p_j(&self) -> f64 {
        self.x_j.norm_sqr()
    }

    pub fn p_s(&self) -> f64 {
        self.x_s.norm_sqr()
    }
}

/// Coefficients of the rotating-frame pair.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ReducedCoeff {
    pub omega: f64,
    pub eps: f64,
    pub omega0: f64,
}

impl ReducedCoeff {
    /// `e^{i phi(t)}` with `phi(t) = eps (cos(omega0 t) - 1)/omega0`.
    #[inline]
    pub fn phase(&self, t: f64) -> Complex64 {
        let phi = self.eps * ((self.omega0 * t).cos() - 1.0) / self.omega0;
        let (s, c) = phi.sin_cos();
        Complex64::new(c, s)
    }

    /// Applies the coefficient matrix to `(x_j, x_s)` given the stage phase.
    #[inline]
    pub fn apply(&self, e: Complex64, x: [Complex64; 2]) -> [Complex64; 2] {
        let miw = Complex64::new(0.0, -self.omega);
        [miw * x[1] * e, miw * x[0] * e.conj()]
    }

    /// One RK4 step of the pair.
    #[inline]
    pub fn rk4_step(&self, t: f64, h: f64, x: [Complex64; 2]) -> [Complex64; 2] {
        let half = 0.5 * h;
        let e0 = self.phase(t);
        let e_half = self.phase(t + half);
        let e1 = self.phase(t + h);
        self.rk4_step_with(e0, e_half, e1, h, x)
    }

    /// One RK4 step given precomputed stage phases.
    #[inline]
    pub fn rk4_step_with(
        &self,
        e0: Complex64,
        e_half: Complex64,
        e1: Complex64,
        h: f64,
        x: [Complex64; 2],
    ) -> [Complex64; 2] {
        let half = 0.5 * h;
        let k1 = self.apply(e0, x);
        let k2 = self.apply(e_half, [x[0] + half * k1[0], x[1] + half * k1[1]]);
        let k3 = self.apply(e_half, [x[0] + half * k2[0], x[1] + half * k2[1]]);
        let k4 = self.apply(e1, [x[0] + h * k3[0], x[1] + h * k3[1]]);
        let w = h / 6.0;
        [
            x[0] + w * (k1[0] + 2.0 * (k2[0] + k3[0]) + k4[0]),
            x[1] + w * (k1[1] + 2.0 * (k2[1] + k3[1]) + k4[1]),
        ]
    }
}

pub(crate) fn validate_reduced_step(omega: f64, eps: f64, omega0: f64, cfg: &StepConfig) -> Result<()> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(Error::InvalidArgument(format!("omega0 must be positive, got {omega0}")));
    }
    if !eps.is_finite() {
        return Err(Error::InvalidArgument("eps is not finite".into()));
    }
    let bound = reduced_step_bound(omega, eps, omega0);
    if cfg.step() > bound {
        return Err(Error::InvalidArgument(format!(
            "step {:.6e} exceeds the reduced-model bound {bound:.6e} (200 samples per fastest period)",
            cfg.step()
        )));
    }
    Ok(())
}

/// Evolves the rotating-frame pair to `t_end`.
pub fn integrate_reduced(
    omega: f64,
    eps: f64,
    omega0: f64,
    x0: &ReducedState,
    t_end: f64,
    cfg: &StepConfig,
) -> Result<ReducedState> {
    validate_reduced_step(omega, eps, omega0, cfg)?;
    if !t_end.is_finite() || t_end < x0.time {
        return Err(Error::InvalidArgument(format!(
            "t_end = {t_end} precedes the state time {}",
            x0.time
        )));
    }
    let span = t_end - x0.time;
    let mut x = [x0.x_j, x0.x_s];
    if span > 0.0 {
        let coeff = ReducedCoeff { omega, eps, omega0 };
        let n_steps = step_count(span, cfg.step());
        let h = span / n_steps as f64;
        for k in 0..n_steps {
            x = coeff.rk4_step(x0.time + k as f64 * h, h, x);
        }
        let n = x[0].norm_sqr() + x[1].norm_sqr();
        if (n - 1.0).abs() > NORM_ERROR_TOL {
            return Err(Error::Accuracy(format!(
                "reduced norm drift {:.3e} exceeds {NORM_ERROR_TOL:e}; reduce the step",
                (n - 1.0).abs()
            )));
        }
    }
    Ok(ReducedState { x_j: x[0], x_s: x[1], time: t_end })
}

/// Closed-form field-free probabilities `(P_j, P_s) = (cos^2, sin^2)(omega t)`.
pub fn unperturbed_probabilities(omega: f64, t: f64) -> (f64, f64) {
    let (s, c) = (omega * t).sin_cos();
    (c * c, s * s)
}

/// The optimal measurement time `tau = pi/(2 omega)`, where the searched
/// probability first peaks.
pub fn optimal_time(omega: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 / omega
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Spectrum;
    use approx::assert_relative_eq;

    fn rotor_problem() -> SearchProblem {
        let spectrum = Spectrum::rotor(51, 1.0).unwrap();
        SearchProblem::new(spectrum, 1..=50, 51, 7).unwrap()
    }

    #[test]
    fn rhs_from_initial_state() {
        let p = rotor_problem();
        let field = FieldParams::zero(&p);
        let a = WaveState::initial(&p);
        let da = full_rhs(&p, &field, 0.0, a.amplitudes()).unwrap();
        let inv_sqrt_n = 1.0 / 50f64.sqrt();
        // searched level: exactly -i/sqrt(N)
        assert_relative_eq!(da[p.s() - 1].re, 0.0, epsilon = 1e-15);
        assert_relative_eq!(da[p.s() - 1].im, -inv_sqrt_n, max_relative = 1e-15);
        // every marked level is driven with modulus 1/sqrt(N)
        for &n in p.subset() {
            assert_relative_eq!(da[n - 1].norm(), inv_sqrt_n, max_relative = 1e-14);
        }
        // nothing flows back into j yet
        assert_eq!(da[p.j() - 1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_from_searched_state() {
        let p = rotor_problem();
        let field = FieldParams::zero(&p);
        let a = WaveState::basis(p.spectrum().len(), p.s(), 0.0).unwrap();
        let da = full_rhs(&p, &field, 0.0, a.amplitudes()).unwrap();
        let inv_sqrt_n = 1.0 / 50f64.sqrt();
        assert_relative_eq!(da[p.j() - 1].im, -inv_sqrt_n, max_relative = 1e-15);
        assert_relative_eq!(da[p.j() - 1].re, 0.0, epsilon = 1e-15);
        assert!(da[p.j() - 1].norm() <= inv_sqrt_n * (1.0 + 1e-12));
    }

    #[test]
    fn rhs_spectator_feels_only_the_field() {
        // spectator level outside subset and != j
        let spectrum = Spectrum::rotor(52, 1.0).unwrap();
        let p = SearchProblem::new(spectrum, 1..=50, 51, 7).unwrap();
        let omega0 = 0.3;
        let mut gamma = vec![0.0; 52];
        gamma[51] = 0.3; // spectator label 52
        let field = FieldParams::new(&p, gamma, omega0).unwrap();
        let a = WaveState::basis(52, 52, 0.0).unwrap();
        let t = std::f64::consts::FRAC_PI_2 / omega0; // sin(omega0 t) = 1
        let da = full_rhs(&p, &field, t, a.amplitudes()).unwrap();
        let expect = Complex64::new(0.0, -0.3);
        assert_relative_eq!(da[51].re, expect.re, epsilon = 1e-12);
        assert_relative_eq!(da[51].im, expect.im, max_relative = 1e-12);
    }

    #[test]
    fn rhs_rejects_wrong_lengths() {
        let p = rotor_problem();
        let field = FieldParams::zero(&p);
        let bad = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(full_rhs(&p, &field, 0.0, &bad), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn zero_span_returns_identical_state() {
        let p = rotor_problem();
        let field = FieldParams::zero(&p);
        let a = WaveState::initial(&p);
        let cfg = StepConfig::for_full(&p);
        let out = integrate_full(&p, &field, &a, 0.0, &cfg).unwrap();
        assert_eq!(out.amplitudes(), a.amplitudes());
        assert_eq!(out.time(), 0.0);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let p = rotor_problem();
        let field = FieldParams::zero(&p);
        let a = WaveState::initial(&p);
        let cfg = StepConfig::new(full_step_bound(&p) * 2.0, 1).unwrap();
        assert!(matches!(
            integrate_full(&p, &field, &a, 1.0, &cfg),
            Err(Error::InvalidArgument(_))
        ));
        let cfg = StepConfig::new(1.0, 1).unwrap();
        assert!(matches!(
            integrate_reduced(0.1, 0.0, 0.05, &ReducedState::initial(), 1.0, &cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reduced_matches_rabi_closed_form() {
        // eps = 0 collapses to an exact Rabi rotation.
        let omega = 1.0 / 50f64.sqrt();
        let cfg = StepConfig::for_reduced(omega, 0.0, omega);
        for frac in [0.25, 0.5, 1.0, 1.37] {
            let t = frac * optimal_time(omega);
            let out = integrate_reduced(omega, 0.0, omega, &ReducedState::initial(), t, &cfg)
                .unwrap();
            let (s, c) = (omega * t).sin_cos();
            // phase truncation at the bound step is ~2.6e-10 per step
            assert_relative_eq!(out.x_j.re, c, epsilon = 5e-8);
            assert_relative_eq!(out.x_j.im, 0.0, epsilon = 5e-8);
            assert_relative_eq!(out.x_s.re, 0.0, epsilon = 5e-8);
            assert_relative_eq!(out.x_s.im, -s, epsilon = 5e-8);
        }
        let tau = optimal_time(omega);
        let out =
            integrate_reduced(omega, 0.0, omega, &ReducedState::initial(), tau, &cfg).unwrap();
        assert!((out.p_s() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn unperturbed_probability_landmarks() {
        let omega = 1.0 / 50f64.sqrt();
        assert_eq!(unperturbed_probabilities(omega, 0.0), (1.0, 0.0));
        let (p_j, p_s) = unperturbed_probabilities(omega, optimal_time(omega));
        assert!(p_j < 1e-30);
        assert_relative_eq!(p_s, 1.0, max_relative = 1e-15);
        let (p_j, p_s) = unperturbed_probabilities(omega, optimal_time(omega) / 2.0);
        assert_relative_eq!(p_j, 0.5, max_relative = 1e-14);
        assert_relative_eq!(p_s, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn optimal_time_examples() {
        assert_relative_eq!(optimal_time(1.0 / 50f64.sqrt()), 11.10721, max_relative = 1e-6);
        assert_relative_eq!(optimal_time(1.0), std::f64::consts::FRAC_PI_2, max_relative = 1e-15);
        assert_relative_eq!(optimal_time(0.5), std::f64::consts::PI, max_relative = 1e-15);
    }

    #[test]
    fn step_config_validation() {
        assert!(StepConfig::new(0.0, 1).is_err());
        assert!(StepConfig::new(f64::NAN, 1).is_err());
        assert!(StepConfig::new(0.1, 0).is_err());
        let cfg = StepConfig::new(0.1, 1).unwrap().with_sample_every(10).unwrap();
        assert_eq!(cfg.sample_every(), 10);
    }
}
