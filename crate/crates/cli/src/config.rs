//! Resolution of the run configuration: built-in defaults, overridden by the
//! config file, overridden by flags.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use resonant_core::floquet::GridSpec;
use resonant_core::measurement::Backend;

use crate::args::CommonArgs;
use crate::CliError;

/// Fully resolved parameters for one command invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n_states: usize,
    pub levels: usize,
    pub s_index: Option<usize>,
    pub seed: u64,
    pub trajectories: usize,
    pub rel_error: f64,
    pub m_max: usize,
    pub alpha: GridSpec,
    pub eps: GridSpec,
    pub gamma_jj: f64,
    pub gamma_ss: f64,
    pub omega0: Option<f64>,
    pub backend: Backend,
    pub step: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_every: Option<usize>,
    pub out: PathBuf,
}

pub fn parse_grid(text: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Invalid(format!(
            "grid '{text}' must have the form lo:hi:steps"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Invalid(format!("bad grid bound '{}'", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Invalid(format!("bad grid bound '{}'", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Invalid(format!("bad grid step count '{}'", parts[2])))?;
    GridSpec::new(lo, hi, steps).map_err(CliError::from)
}

fn parse_backend(text: &str) -> Result<Backend, CliError> {
    match text {
        "two-level" => Ok(Backend::TwoLevel),
        "full" => Ok(Backend::Full),
        other => Err(CliError::Invalid(format!(
            "backend must be 'two-level' or 'full', got '{other}'"
        ))),
    }
}

const KNOWN_KEYS: &[&str] = &[
    "n-states",
    "levels",
    "s-index",
    "seed",
    "trajectories",
    "rel-error",
    "m-max",
    "alpha",
    "eps",
    "gamma-jj",
    "gamma-ss",
    "omega0",
    "backend",
    "step",
    "t-end",
    "sample-every",
    "out",
];

/// Parses a `key = value` file. `#` starts a comment, blank lines are
/// skipped, keys match the long flag names.
fn read_config_file(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Invalid(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Invalid(format!(
                "{}:{}: unknown config key '{key}'",
                path.display(),
                lineno + 1
            )));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

fn from_file<T: FromStr>(file: &HashMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match file.get(key) {
        None => Ok(None),
        Some(text) => text
            .parse::<T>()
            .map(Some)
            .map_err(|_| CliError::Invalid(format!("bad config value '{text}' for '{key}'"))),
    }
}

pub fn resolve(args: &CommonArgs, default_out: &str) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => HashMap::new(),
    };

    let n_states = args.n_states.or(from_file(&file, "n-states")?).unwrap_or(50);
    let levels = args.levels.or(from_file(&file, "levels")?).unwrap_or(n_states + 1);
    let s_index = args.s_index.or(from_file(&file, "s-index")?);
    let seed = args.seed.or(from_file(&file, "seed")?).unwrap_or(1);
    let trajectories = args.trajectories.or(from_file(&file, "trajectories")?).unwrap_or(500);
    let rel_error = args.rel_error.or(from_file(&file, "rel-error")?).unwrap_or(0.2);
    let m_max = args.m_max.or(from_file(&file, "m-max")?).unwrap_or(50);
    let alpha = match args.alpha.clone().or(file.get("alpha").cloned()) {
        Some(text) => parse_grid(&text)?,
        None => GridSpec::new(0.01, 1.0, 101).map_err(CliError::from)?,
    };
    let eps = match args.eps.clone().or(file.get("eps").cloned()) {
        Some(text) => parse_grid(&text)?,
        None => GridSpec::new(0.0, 5.0, 101).map_err(CliError::from)?,
    };
    let gamma_jj = args.gamma_jj.or(from_file(&file, "gamma-jj")?).unwrap_or(0.0);
    let gamma_ss = args.gamma_ss.or(from_file(&file, "gamma-ss")?).unwrap_or(0.0);
    let omega0 = args.omega0.or(from_file(&file, "omega0")?);
    let backend = match args.backend.clone().or(file.get("backend").cloned()) {
        Some(text) => parse_backend(&text)?,
        None => Backend::TwoLevel,
    };
    let step = args.step.or(from_file(&file, "step")?);
    let t_end = args.t_end.or(from_file(&file, "t-end")?);
    let sample_every = args.sample_every.or(from_file(&file, "sample-every")?);
    let out = args
        .out
        .clone()
        .or(file.get("out").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(default_out));

    if n_states < 2 {
        return Err(CliError::Invalid(format!("n-states must be at least 2, got {n_states}")));
    }
    if levels < n_states + 1 {
        return Err(CliError::Invalid(format!(
            "levels must be at least n-states + 1 = {}, got {levels}",
            n_states + 1
        )));
    }
    if !(rel_error.is_finite() && rel_error > -1.0) {
        return Err(CliError::Invalid(format!("rel-error must exceed -1, got {rel_error}")));
    }
    if m_max == 0 {
        return Err(CliError::Invalid("m-max must be at least 1".into()));
    }
    if trajectories == 0 {
        return Err(CliError::Invalid("trajectories must be at least 1".into()));
    }

    Ok(RunConfig {
        n_states,
        levels,
        s_index,
        seed,
        trajectories,
        rel_error,
        m_max,
        alpha,
        eps,
        gamma_jj,
        gamma_ss,
        omega0,
        backend,
        step,
        t_end,
        sample_every,
        out,
    })
}
