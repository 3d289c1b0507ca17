//! Simulator for a resonant continuous-time quantum search algorithm treated
//! as an open system.
//!
//! A background Hamiltonian supplies the spectrum; a resonant coupling
//! between an initial level and a marked subset of `N` levels makes the
//! searched state's population oscillate at the Rabi frequency
//! `omega = 1/sqrt(N)`, peaking near one at the optimal time
//! `tau = pi/(2 omega)`. This crate covers three open-system experiments on
//! top of that mechanism:
//!
//! * [`dynamics`] — fixed-step RK4 integration of the driven amplitude
//!   equations, both the full multi-level system and the reduced
//!   rotating-frame pair, under a monochromatic diagonal field.
//! * [`floquet`] — one-period monodromy analysis of the reduced pair and the
//!   (alpha, eps) map of the searched-state probability at the optimal time.
//! * [`measurement`] — repeated projective measurements: analytic
//!   interval-product populations, Born-rule collapse, and reproducible
//!   Monte Carlo trajectory ensembles.
//!
//! Everything is a pure function over immutable value types, so any
//! computation may run concurrently; parallel code paths are written to give
//! bit-identical results for every thread count.

pub use num_complex;

pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod measurement;
pub mod model;

pub use error::{Error, Result};
pub use model::{
    FieldParams, ProbabilityRecord, SearchProblem, Spectrum, WaveState, BOHR_RATIO_WARN,
    NORM_DRIFT_TOL, NORM_ERROR_TOL,
};
