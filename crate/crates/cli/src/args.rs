use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Experiments on a resonant continuous-time quantum search algorithm
/// treated as an open system.
#[derive(Debug, Parser)]
#[command(name = "resonant", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Searched-state probability at the optimal time over an (alpha, eps)
    /// field-parameter grid, with Floquet data per cell.
    Fig1(CommonArgs),
    /// Repeated measurements at a fixed interval (1 + rel-error) * tau:
    /// analytic populations next to a Monte Carlo ensemble.
    Fig2(CommonArgs),
    /// m measurements within one optimal time: the measurement-frequency
    /// sweep that exhibits the quantum Zeno effect.
    Fig3(CommonArgs),
    /// Plain time evolution of the full model; probabilities and norm per
    /// sampled step.
    Evolve(CommonArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Fig3(_) => "fig3",
            Command::Evolve(_) => "evolve",
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Fig1(a) | Command::Fig2(a) | Command::Fig3(a) | Command::Evolve(a) => a,
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file (if given), then to built-in defaults.
#[derive(Debug, Default, Clone, Args)]
pub struct CommonArgs {
    /// Size N of the searched subset (default 50).
    #[arg(long)]
    pub n_states: Option<usize>,

    /// Number of spectrum levels (default N + 1).
    #[arg(long)]
    pub levels: Option<usize>,

    /// Label of the searched state (default: drawn from the master seed).
    #[arg(long)]
    pub s_index: Option<usize>,

    /// Master seed for everything stochastic (default 1).
    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte Carlo trajectories per ensemble (default 500).
    #[arg(long)]
    pub trajectories: Option<usize>,

    /// Relative error of the optimal-time estimate (default 0.2).
    #[arg(long)]
    pub rel_error: Option<f64>,

    /// Largest measurement count (default 50).
    #[arg(long)]
    pub m_max: Option<usize>,

    /// Alpha grid as lo:hi:steps, both endpoints included
    /// (default 0.01:1:101).
    #[arg(long)]
    pub alpha: Option<String>,

    /// Eps grid in units of the Rabi frequency, as lo:hi:steps
    /// (default 0:5:101).
    #[arg(long)]
    pub eps: Option<String>,

    /// Field coupling on the initial level (default 0).
    #[arg(long)]
    pub gamma_jj: Option<f64>,

    /// Field coupling on the searched level (default 0).
    #[arg(long)]
    pub gamma_ss: Option<f64>,

    /// Field frequency, absolute units (default omega/2).
    #[arg(long)]
    pub omega0: Option<f64>,

    /// Ensemble backend: two-level or full (default two-level).
    #[arg(long)]
    pub backend: Option<String>,

    /// Integrator step override; must satisfy the model's step bound.
    #[arg(long)]
    pub step: Option<f64>,

    /// End time for evolve, absolute units (default tau).
    #[arg(long)]
    pub t_end: Option<f64>,

    /// Record every k-th step in evolve (default: about 1000 rows).
    #[arg(long)]
    pub sample_every: Option<usize>,

    /// Output CSV path (default <command>.csv).
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Plain-text `key = value` config file; flags win over file entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}
