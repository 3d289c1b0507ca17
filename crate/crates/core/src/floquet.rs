//! One-period monodromy analysis of the reduced driven pair and the
//! (alpha, eps) probability map.
//!
//! The rotating-frame coefficients have period `T = 2 pi / omega0`, so the
//! monodromy matrix is integrated over exactly that span from the identity
//! and the exponent obeys `cosh(mu T) = trace / 2`. Because the coefficient
//! matrix is anti-Hermitian and trace-free, the monodromy is unitary with
//! unit determinant: its trace is real, `|trace| <= 2`, and `mu` comes out
//! purely imaginary. The determinant and trace are therefore strong
//! integration diagnostics, not just bookkeeping.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{optimal_time, validate_reduced_step, ReducedCoeff, ReducedState, StepConfig};
use crate::error::{Error, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Determinant drift beyond this aborts a monodromy computation.
pub const DET_ERROR_TOL: f64 = 1e-6;

/// A Floquet exponent with `|Re mu|` below this counts as stable.
pub const STABLE_RE_TOL: f64 = 1e-6;

/// Fundamental solution matrix of the reduced pair over one coefficient
/// period, with spectral data.
#[derive(Debug, Clone)]
pub struct Monodromy {
    /// Row-major fundamental matrix at `t = T` (identity initial condition).
    pub matrix: [[Complex64; 2]; 2],
    /// Coefficient period `2 pi / omega0`.
    pub period: f64,
    pub trace: Complex64,
    pub det: Complex64,
    /// Floquet multipliers (eigenvalue pair of the matrix).
    pub eigenvalues: (Complex64, Complex64),
}

/// Integrates the reduced pair over one period `T = 2 pi / omega0` from the
/// identity and extracts the fundamental matrix.
pub fn monodromy(omega: f64, eps: f64, omega0: f64, cfg: &StepConfig) -> Result<Monodromy> {
    validate_reduced_step(omega, eps, omega0, cfg)?;
    let period = TWO_PI / omega0;
    let coeff = ReducedCoeff { omega, eps, omega0 };

    // March both columns simultaneously; they share the stage phases, and
    // the last stage phase of one step is the first of the next.
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut col1 = [one, zero];
    let mut col2 = [zero, one];
    let n_steps = ((period / cfg.step()).ceil() as usize).max(1);
    let h = period / n_steps as f64;
    let mut e0 = coeff.phase(0.0);
    for k in 0..n_steps {
        let e_half = coeff.phase((k as f64 + 0.5) * h);
        let e1 = coeff.phase((k + 1) as f64 * h);
        col1 = coeff.rk4_step_with(e0, e_half, e1, h, col1);
        col2 = coeff.rk4_step_with(e0, e_half, e1, h, col2);
        e0 = e1;
    }

    let matrix = [[col1[0], col2[0]], [col1[1], col2[1]]];
    let trace = matrix[0][0] + matrix[1][1];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    if (det - one).norm() > DET_ERROR_TOL {
        return Err(Error::Accuracy(format!(
            "monodromy determinant drifted to {det} (|det - 1| = {:.3e}); reduce the step",
            (det - one).norm()
        )));
    }
    // lambda^2 - tr lambda + det = 0
    let disc = (trace * trace - 4.0 * det).sqrt();
    let eigenvalues = (0.5 * (trace + disc), 0.5 * (trace - disc));
    Ok(Monodromy { matrix, period, trace, det, eigenvalues })
}

/// Floquet exponent on the principal branch, `mu = acosh(trace/2) / T`.
///
/// The result is defined modulo `i 2 pi / T`; for `|trace| <= 2` it is
/// purely imaginary and the solutions are bounded.
pub fn floquet_exponent(m: &Monodromy) -> Complex64 {
    (m.trace / 2.0).acosh() / m.period
}

/// Stability per the exponent: no real growth beyond [`STABLE_RE_TOL`].
pub fn is_stable(mu: Complex64) -> bool {
    mu.re.abs() <= STABLE_RE_TOL
}

/// Probability of the searched state at the optimal time under the field
/// `(eps, omega0)`, starting from the initial level.
pub fn searched_probability_at_tau(
    omega: f64,
    eps: f64,
    omega0: f64,
    cfg: &StepConfig,
) -> Result<f64> {
    let out = crate::dynamics::integrate_reduced(
        omega,
        eps,
        omega0,
        &ReducedState::initial(),
        optimal_time(omega),
        cfg,
    )?;
    Ok(out.p_s())
}

/// An inclusive `lo..=hi` grid with a fixed number of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidArgument(format!("bad grid range {lo}..{hi}")));
        }
        if steps < 2 {
            return Err(Error::InvalidArgument(format!(
                "a grid needs at least 2 steps, got {steps}"
            )));
        }
        Ok(Self { lo, hi, steps })
    }

    /// Grid points, ascending, with both endpoints exact.
    pub fn points(&self) -> Vec<f64> {
        let denom = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k == self.steps - 1 {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * k as f64 / denom
                }
            })
            .collect()
    }
}

/// Searched-state probability and Floquet data over an (alpha, eps) grid.
///
/// Matrices are row-major with alpha as the slow index: entry
/// `[i * n_eps + k]` belongs to `(alpha[i], eps_over_omega[k])`.
#[derive(Debug, Clone)]
pub struct StabilityMap {
    alpha: Vec<f64>,
    eps_over_omega: Vec<f64>,
    p_s_at_tau: Vec<f64>,
    mu_imag: Vec<f64>,
    trace: Vec<Complex64>,
    det_dev: Vec<f64>,
    stable: Vec<bool>,
}

impl StabilityMap {
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn eps_over_omega(&self) -> &[f64] {
        &self.eps_over_omega
    }

    pub fn p_s_at_tau(&self) -> &[f64] {
        &self.p_s_at_tau
    }

    pub fn mu_imag(&self) -> &[f64] {
        &self.mu_imag
    }

    pub fn trace(&self) -> &[Complex64] {
        &self.trace
    }

    /// Wronskian drift `|det - 1|` per cell, an integration diagnostic.
    pub fn det_dev(&self) -> &[f64] {
        &self.det_dev
    }

    pub fn stable(&self) -> &[bool] {
        &self.stable
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.len()
    }

    pub fn n_eps(&self) -> usize {
        self.eps_over_omega.len()
    }

    /// Flat index of the cell at `(alpha index, eps index)`.
    pub fn idx(&self, alpha_idx: usize, eps_idx: usize) -> usize {
        alpha_idx * self.eps_over_omega.len() + eps_idx
    }
}

struct Cell {
    p_s: f64,
    mu_imag: f64,
    trace: Complex64,
    det_dev: f64,
    stable: bool,
}

/// Evaluates probability and Floquet data on the grid. The eps grid is given
/// in units of the Rabi frequency. Cells are independent pure computations
/// and are evaluated in parallel; the result is identical for any thread
/// count.
pub fn stability_map(
    omega: f64,
    alpha_grid: &GridSpec,
    eps_grid: &GridSpec,
    cfg: &StepConfig,
) -> Result<StabilityMap> {
    if alpha_grid.lo <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "alpha grid must be strictly positive, got lo = {}",
            alpha_grid.lo
        )));
    }
    let alpha = alpha_grid.points();
    let eps_over_omega = eps_grid.points();
    let n_eps = eps_over_omega.len();

    let cells: Vec<Cell> = (0..alpha.len() * n_eps)
        .into_par_iter()
        .map(|flat| -> Result<Cell> {
            let a = alpha[flat / n_eps];
            let e = eps_over_omega[flat % n_eps];
            let omega0 = a * omega;
            let eps = e * omega;
            let with_coords = |err: Error| -> Error {
                match err {
                    Error::Accuracy(msg) => {
                        Error::Accuracy(format!("{msg} (at alpha = {a}, eps/omega = {e})"))
                    }
                    Error::InvalidArgument(msg) => {
                        Error::InvalidArgument(format!("{msg} (at alpha = {a}, eps/omega = {e})"))
                    }
                    other => other,
                }
            };
            let p_s = searched_probability_at_tau(omega, eps, omega0, cfg).map_err(with_coords)?;
            let m = monodromy(omega, eps, omega0, cfg).map_err(with_coords)?;
            let mu = floquet_exponent(&m);
            Ok(Cell {
                p_s,
                mu_imag: mu.im,
                trace: m.trace,
                det_dev: (m.det - Complex64::new(1.0, 0.0)).norm(),
                stable: is_stable(mu),
            })
        })
        .collect::<Result<Vec<Cell>>>()?;

    let mut p_s_at_tau = Vec::with_capacity(cells.len());
    let mut mu_imag = Vec::with_capacity(cells.len());
    let mut trace = Vec::with_capacity(cells.len());
    let mut det_dev = Vec::with_capacity(cells.len());
    let mut stable = Vec::with_capacity(cells.len());
    for c in cells {
        p_s_at_tau.push(c.p_s);
        mu_imag.push(c.mu_imag);
        trace.push(c.trace);
        det_dev.push(c.det_dev);
        stable.push(c.stable);
    }
    Ok(StabilityMap { alpha, eps_over_omega, p_s_at_tau, mu_imag, trace, det_dev, stable })
}
