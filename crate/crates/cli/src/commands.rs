use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resonant_core::dynamics::{
    full_step_default, integrate_full_trajectory, reduced_step_default, StepConfig,
};
use resonant_core::floquet::{stability_map, GridSpec};
use resonant_core::measurement::{
    regular_coefficients, run_ensemble, zeno_coefficients, EnsembleStats, MeasurementSchedule,
};
use resonant_core::model::{FieldParams, SearchProblem, Spectrum, WaveState, BOHR_RATIO_WARN};

use crate::config::RunConfig;
use crate::output::{fix6, sci9, CsvFile};
use crate::CliError;

/// ChaCha8 stream reserved for drawing the searched label; trajectories use
/// streams 0..n_traj.
const S_DRAW_STREAM: u64 = u64::MAX;

pub struct Summary {
    pub rows: usize,
}

fn grid_text(g: &GridSpec) -> String {
    format!("{}:{}:{}", g.lo, g.hi, g.steps)
}

/// Default rotor model per the run configuration. Returns the problem and
/// whether the searched label was drawn from the seed.
fn build_model(cfg: &RunConfig) -> Result<(SearchProblem, bool), CliError> {
    let spectrum = Spectrum::rotor(cfg.levels, 1.0)?;
    let (s, seeded) = match cfg.s_index {
        Some(s) => (s, false),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(S_DRAW_STREAM);
            (rng.random_range(1..=cfg.n_states), true)
        }
    };
    let problem = SearchProblem::new(spectrum, 1..=cfg.n_states, cfg.n_states + 1, s)?;
    let ratio = problem.bohr_gap_ratio();
    if ratio < BOHR_RATIO_WARN {
        eprintln!(
            "warning: smallest Bohr gap is only {ratio:.2} Rabi frequencies; \
             the two-level reduction may be inaccurate"
        );
    }
    Ok((problem, seeded))
}

fn model_meta(csv: &mut CsvFile, cfg: &RunConfig, problem: &SearchProblem, seeded: bool) {
    csv.meta("model", format!("rotor levels={} scale=1 (eps_n = n^2)", cfg.levels));
    csv.meta(
        "search",
        format!(
            "N={} subset=1..={} j={} s={}{}",
            problem.n_marked(),
            problem.n_marked(),
            problem.j(),
            problem.s(),
            if seeded { " (seed-drawn)" } else { "" }
        ),
    );
    csv.meta("omega", problem.omega());
    csv.meta("tau", problem.tau());
}

fn rng_meta(csv: &mut CsvFile) {
    csv.meta(
        "rng",
        "chacha8 seeded with the master seed; trajectory i draws from stream i, \
         stream 2^64-1 is reserved for the searched-label draw",
    );
}

fn field_for(cfg: &RunConfig, problem: &SearchProblem) -> Result<Option<FieldParams>, CliError> {
    if cfg.gamma_jj == 0.0 && cfg.gamma_ss == 0.0 {
        return Ok(None);
    }
    let omega0 = cfg.omega0.unwrap_or(problem.omega() / 2.0);
    let field = FieldParams::two_level(problem, cfg.gamma_jj, cfg.gamma_ss, omega0)?;
    Ok(Some(field))
}

fn field_meta(csv: &mut CsvFile, cfg: &RunConfig, field: &Option<FieldParams>) {
    match field {
        None => {
            csv.meta("field", "none");
        }
        Some(f) => {
            csv.meta(
                "field",
                format!(
                    "gamma-jj={} gamma-ss={} omega0={} (eps={} alpha={})",
                    cfg.gamma_jj,
                    cfg.gamma_ss,
                    f.omega0(),
                    f.eps(),
                    f.alpha()
                ),
            );
        }
    }
}

fn mc_row(m: usize, theory: (f64, f64), stats: &EnsembleStats) -> String {
    let (alpha, beta) = theory;
    format!(
        "{m},{},{},{},{},{},{},{}",
        fix6(beta),
        fix6(alpha),
        fix6(stats.p_s),
        fix6(stats.p_j),
        fix6(stats.p_rest),
        fix6(stats.se_s),
        fix6(stats.se_j)
    )
}

fn warn_step_ignored(cfg: &RunConfig, what: &str) {
    if cfg.step.is_some() {
        eprintln!("warning: --step does not apply to {what}; the ensemble uses the built-in step");
    }
}

pub fn fig1(cfg: &RunConfig) -> Result<Summary, CliError> {
    // The map depends only on the Rabi frequency, not on the spectrum.
    let omega = 1.0 / (cfg.n_states as f64).sqrt();
    let eps_abs_max = cfg.eps.lo.abs().max(cfg.eps.hi.abs()) * omega;
    let omega0_max = cfg.alpha.hi * omega;
    let step = cfg.step.unwrap_or_else(|| reduced_step_default(omega, eps_abs_max, omega0_max));
    let step_cfg = StepConfig::new(step, 1)?;

    let map = stability_map(omega, &cfg.alpha, &cfg.eps, &step_cfg)?;

    let mut csv = CsvFile::new();
    csv.meta("command", "fig1");
    csv.meta(
        "params",
        format!(
            "n-states={} alpha={} eps={} (eps in units of omega)",
            cfg.n_states,
            grid_text(&cfg.alpha),
            grid_text(&cfg.eps)
        ),
    );
    csv.meta("omega", omega);
    csv.meta("step", format!("{step}{}", if cfg.step.is_some() { " (override)" } else { "" }));
    csv.meta("rng", "none (deterministic grid evaluation)");
    csv.meta(
        "floquet",
        "mu on the principal branch of acosh(trace/2)/T, defined modulo 2*pi/T; T = 2*pi/omega0",
    );
    csv.header("alpha,eps_over_omega,p_s_at_tau,mu_imag,trace");

    let mut rows = 0;
    for (i, &a) in map.alpha().iter().enumerate() {
        for (k, &e) in map.eps_over_omega().iter().enumerate() {
            let idx = map.idx(i, k);
            csv.row(&format!(
                "{},{},{},{},{}",
                fix6(a),
                fix6(e),
                fix6(map.p_s_at_tau()[idx]),
                sci9(map.mu_imag()[idx]),
                sci9(map.trace()[idx].re)
            ));
            rows += 1;
        }
    }
    csv.write(&cfg.out)?;
    Ok(Summary { rows })
}

pub fn fig2(cfg: &RunConfig) -> Result<Summary, CliError> {
    warn_step_ignored(cfg, "fig2");
    let (problem, seeded) = build_model(cfg)?;
    let field = field_for(cfg, &problem)?;
    let dt = (1.0 + cfg.rel_error) * problem.tau();
    let schedule = MeasurementSchedule::regular(dt, cfg.m_max)?;
    let theory = regular_coefficients(problem.omega(), dt, cfg.m_max);
    let mc = run_ensemble(
        &problem,
        field.as_ref(),
        &schedule,
        cfg.backend,
        cfg.trajectories,
        cfg.seed,
    )?;

    let mut csv = CsvFile::new();
    csv.meta("command", "fig2");
    model_meta(&mut csv, cfg, &problem, seeded);
    csv.meta(
        "params",
        format!(
            "seed={} trajectories={} rel-error={} m-max={} backend={}",
            cfg.seed, cfg.trajectories, cfg.rel_error, cfg.m_max, cfg.backend
        ),
    );
    csv.meta("interval", format!("dt=(1+rel-error)*tau={dt}"));
    field_meta(&mut csv, cfg, &field);
    rng_meta(&mut csv);
    csv.header("m,p_s_theory,p_j_theory,p_s_mc,p_j_mc,p_rest_mc,stderr_s,stderr_j");
    for (k, (&pair, stats)) in theory.pairs().iter().zip(mc.stats()).enumerate() {
        csv.row(&mc_row(k + 1, pair, stats));
    }
    csv.write(&cfg.out)?;
    Ok(Summary { rows: cfg.m_max })
}

pub fn fig3(cfg: &RunConfig) -> Result<Summary, CliError> {
    warn_step_ignored(cfg, "fig3");
    let (problem, seeded) = build_model(cfg)?;
    let field = field_for(cfg, &problem)?;

    // one ensemble per measurement count, all inside the total time tau
    let mut rows_out = Vec::with_capacity(cfg.m_max);
    for m in 1..=cfg.m_max {
        let schedule = MeasurementSchedule::zeno(problem.tau(), m)?;
        let theory = zeno_coefficients(m).last();
        let mc = run_ensemble(
            &problem,
            field.as_ref(),
            &schedule,
            cfg.backend,
            cfg.trajectories,
            cfg.seed,
        )?;
        let stats = mc.stats()[m - 1];
        rows_out.push(mc_row(m, theory, &stats));
    }

    let mut csv = CsvFile::new();
    csv.meta("command", "fig3");
    model_meta(&mut csv, cfg, &problem, seeded);
    csv.meta(
        "params",
        format!(
            "seed={} trajectories={} m-max={} backend={} (m measurements in total time tau)",
            cfg.seed, cfg.trajectories, cfg.m_max, cfg.backend
        ),
    );
    field_meta(&mut csv, cfg, &field);
    rng_meta(&mut csv);
    csv.header("m,p_s_theory,p_j_theory,p_s_mc,p_j_mc,p_rest_mc,stderr_s,stderr_j");
    for row in &rows_out {
        csv.row(row);
    }
    csv.write(&cfg.out)?;
    Ok(Summary { rows: cfg.m_max })
}

pub fn evolve(cfg: &RunConfig) -> Result<Summary, CliError> {
    let (problem, seeded) = build_model(cfg)?;
    let field = field_for(cfg, &problem)?;
    let field_ref = match &field {
        Some(f) => f.clone(),
        None => FieldParams::zero(&problem),
    };
    let t_end = cfg.t_end.unwrap_or_else(|| problem.tau());
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(CliError::Invalid(format!("t-end must be non-negative, got {t_end}")));
    }
    let step = cfg.step.unwrap_or_else(|| full_step_default(&problem));
    let n_steps = (t_end / step).ceil().max(1.0) as usize;
    let sample_every = cfg.sample_every.unwrap_or_else(|| (n_steps / 1000).max(1));
    let step_cfg = StepConfig::new(step, sample_every)?;

    let state0 = WaveState::initial(&problem);
    let (_, samples) = integrate_full_trajectory(&problem, &field_ref, &state0, t_end, &step_cfg)?;

    let mut csv = CsvFile::new();
    csv.meta("command", "evolve");
    model_meta(&mut csv, cfg, &problem, seeded);
    csv.meta(
        "params",
        format!(
            "t-end={t_end} step={step}{} sample-every={sample_every}",
            if cfg.step.is_some() { " (override)" } else { "" }
        ),
    );
    field_meta(&mut csv, cfg, &field);
    csv.meta("rng", "none (closed evolution, no measurements)");
    csv.header("t,p_j,p_s,p_rest,norm");
    for s in &samples {
        let p = &s.probabilities;
        csv.row(&format!(
            "{},{},{},{},{}",
            fix6(p.time),
            fix6(p.p_j),
            fix6(p.p_s),
            fix6(p.p_rest),
            sci9(s.norm)
        ));
    }
    csv.write(&cfg.out)?;
    Ok(Summary { rows: samples.len() })
}
