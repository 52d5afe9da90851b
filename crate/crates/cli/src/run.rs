//! Resolves options (flag, then config file, then default), runs the
//! command and renders its output.

use std::path::{Path, PathBuf};

use dolinar_core::dolinar::{
    evolve_pc, helstrom_trajectory, simulate_telegraph, ControlLaw, EvolveOptions,
    TelegraphOptions, TelegraphTrajectory, DEFAULT_MAX_RATE,
};
use dolinar_core::multicopy::{
    exact_adaptive_pc, simulate_adaptive, theta_for_overlap, MAX_ENUMERATED_COPIES,
};
use dolinar_core::statemath::{coherent_overlap, multicopy_bound};
use dolinar_core::sweep::{self, Scheme, SweepConfig, SweepRow};
use dolinar_core::{CoherentBinary, Estimate, Execution, MonteCarlo, Priors};
use serde_json::{json, Map, Value};

use crate::args::{
    Cli, Command, ControlArg, EvalArgs, ExecutionArg, Format, PhysicsArgs, RunArgs, Scale,
    SchemeList, SimScheme, SimulateArgs, SweepArgs, SEED_ENV,
};
use crate::config::ConfigFile;
use crate::error::{CliError, CliResult};
use crate::format::{csv_number, json_number};

/// Everything a command writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub body: String,
    pub out: Option<PathBuf>,
    /// Trajectory export as `(path, JSON lines)`.
    pub trajectories: Option<(PathBuf, String)>,
}

/// Settings shared by every command.
#[derive(Debug, Clone)]
struct Common {
    priors: Priors,
    duration: f64,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
    execution: Execution,
}

pub fn run(cli: &Cli) -> CliResult<Rendered> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match &cli.command {
        Command::Fig1(a) => run_sweep("fig1", a, &cfg),
        Command::Fig3(a) => run_sweep("fig3", a, &cfg),
        Command::Eval(a) => run_eval(a, &cfg),
        Command::Simulate(a) => run_simulate(a, &cfg),
    }
}

/// Writes the rendered output to its destinations, or stdout.
pub fn emit(rendered: &Rendered) -> CliResult<()> {
    match &rendered.out {
        Some(path) => write_file(path, &rendered.body)?,
        None => print!("{}", rendered.body),
    }
    if let Some((path, text)) = &rendered.trajectories {
        write_file(path, text)?;
    }
    Ok(())
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn spec_err(msg: impl Into<String>) -> CliError {
    CliError::Spec(msg.into())
}

fn default_seed() -> CliResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| spec_err(format!("{SEED_ENV}='{v}' is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn resolve_common(physics: &PhysicsArgs, run: &RunArgs, cfg: &ConfigFile) -> CliResult<Common> {
    let q0 = cfg.pick(physics.q0, "q0", 0.5)?;
    let priors = Priors::new(q0)?;
    let duration = cfg.pick(physics.duration, "duration", 1.0)?;
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(spec_err(format!(
            "duration must be positive, got {duration}"
        )));
    }
    let seed = match cfg.layer(run.seed, "seed")? {
        Some(s) => s,
        None => default_seed()?,
    };
    let format = cfg.pick(run.format, "format", Format::Csv)?;
    let out = cfg.layer(run.out.clone(), "out")?;
    let execution = match cfg.pick(run.execution, "execution", ExecutionArg::Parallel)? {
        ExecutionArg::Parallel => Execution::Parallel,
        ExecutionArg::Sequential => Execution::Sequential,
    };
    if let Some(n) = cfg.layer(run.threads, "threads")? {
        configure_threads(n)?;
    }
    Ok(Common {
        priors,
        duration,
        seed,
        format,
        out,
        execution,
    })
}

#[cfg(feature = "parallel")]
fn configure_threads(n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(spec_err("threads must be >= 1"));
    }
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(spec_err("threads must be >= 1"));
    }
    Ok(())
}

fn num(x: f64) -> Value {
    json_number(x)
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn document(spec: Map<String, Value>, rows: Vec<Value>, seed: u64) -> String {
    let doc = json!({
        "spec": spec,
        "rows": rows,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("JSON values serialize");
    text.push('\n');
    text
}

fn run_sweep(command: &str, a: &SweepArgs, cfg: &ConfigFile) -> CliResult<Rendered> {
    let common = resolve_common(&a.physics, &a.run, cfg)?;
    let (default_schemes, default_beta) = match command {
        "fig3" => (
            vec![
                Scheme::Kennedy,
                Scheme::ImprovedKennedy,
                Scheme::SimplifiedDolinar,
            ],
            true,
        ),
        _ => (SweepConfig::default().schemes, false),
    };
    let schemes = cfg
        .pick(a.schemes.clone(), "schemes", SchemeList(default_schemes))?
        .0;
    let with_beta = cfg.pick(a.with_beta, "with_beta", default_beta)?;
    let lo = cfg.pick(a.lo, "lo", 0.01)?;
    let hi = cfg.pick(a.hi, "hi", 2.0)?;
    let points = cfg.pick(a.points, "points", 30)?;
    let scale = cfg.pick(a.scale, "scale", Scale::Log)?;
    let trials = cfg.pick(a.trials, "trials", 10_000)?;
    let u_max = cfg.layer(a.u_max, "u_max")?;
    let copies = cfg.pick(a.copies, "copies", 8)?;

    let axis = sweep::axis(lo, hi, points, scale == Scale::Log)?;
    let config = sweep_config(&common, schemes, with_beta, trials, u_max, copies)?;
    let rows = sweep::sweep(&axis, &config)?;

    let mut spec = Map::new();
    spec.insert("command".into(), json!(command));
    spec.insert("lo".into(), num(lo));
    spec.insert("hi".into(), num(hi));
    spec.insert("points".into(), json!(points));
    spec.insert("scale".into(), json!(scale.to_string()));
    describe_config(&mut spec, &config);
    Ok(render_table(&common, &config, &rows, spec))
}

fn run_eval(a: &EvalArgs, cfg: &ConfigFile) -> CliResult<Rendered> {
    let common = resolve_common(&a.physics, &a.run, cfg)?;
    let gamma_sq = cfg
        .layer(a.gamma_sq, "gamma_sq")?
        .ok_or_else(|| spec_err("eval needs --gamma-sq"))?;
    let deterministic: Vec<Scheme> = Scheme::ALL
        .into_iter()
        .filter(|s| !s.is_monte_carlo())
        .collect();
    let schemes = cfg
        .pick(a.schemes.clone(), "schemes", SchemeList(deterministic))?
        .0;
    let with_beta = cfg.pick(a.with_beta, "with_beta", true)?;
    let trials = cfg.pick(a.trials, "trials", 10_000)?;
    let u_max = cfg.layer(a.u_max, "u_max")?;
    let copies = cfg.pick(a.copies, "copies", 8)?;

    let config = sweep_config(&common, schemes, with_beta, trials, u_max, copies)?;
    let rows = sweep::sweep(&[gamma_sq], &config)?;

    let mut spec = Map::new();
    spec.insert("command".into(), json!("eval"));
    spec.insert("gamma_sq".into(), num(gamma_sq));
    describe_config(&mut spec, &config);
    Ok(render_table(&common, &config, &rows, spec))
}

fn sweep_config(
    common: &Common,
    schemes: Vec<Scheme>,
    with_beta: bool,
    trials: u64,
    u_max: Option<f64>,
    copies: usize,
) -> CliResult<SweepConfig> {
    if schemes.iter().any(Scheme::is_monte_carlo) && trials == 0 {
        return Err(spec_err("trials must be >= 1 when dolinar_mc is selected"));
    }
    if schemes.contains(&Scheme::Multicopy) && !(1..=MAX_ENUMERATED_COPIES).contains(&copies) {
        return Err(spec_err(format!(
            "copies must be in 1..={MAX_ENUMERATED_COPIES}"
        )));
    }
    Ok(SweepConfig {
        schemes,
        priors: common.priors,
        duration: common.duration,
        with_beta,
        mc: MonteCarlo::new(trials, common.seed).with_execution(common.execution),
        u_max,
        copies,
        execution: common.execution,
    })
}

fn describe_config(spec: &mut Map<String, Value>, config: &SweepConfig) {
    let names: Vec<&str> = config.schemes.iter().map(Scheme::name).collect();
    spec.insert("schemes".into(), json!(names));
    spec.insert("q0".into(), num(config.priors.q0()));
    spec.insert("duration".into(), num(config.duration));
    spec.insert("with_beta".into(), json!(config.with_beta));
    if config.schemes.contains(&Scheme::DolinarMc) {
        spec.insert("trials".into(), json!(config.mc.trials));
        spec.insert("u_max".into(), opt_num(config.u_max));
    }
    if config.schemes.contains(&Scheme::Multicopy) {
        spec.insert("copies".into(), json!(config.copies));
    }
}

fn render_table(
    common: &Common,
    config: &SweepConfig,
    rows: &[SweepRow],
    spec: Map<String, Value>,
) -> Rendered {
    let columns = sweep::columns(config);
    let body = match common.format {
        Format::Csv => {
            let mut text = columns.join(",");
            text.push('\n');
            for row in rows {
                let fields: Vec<String> = row
                    .values(config.with_beta)
                    .into_iter()
                    .map(csv_number)
                    .collect();
                text.push_str(&fields.join(","));
                text.push('\n');
            }
            text
        }
        Format::Json => {
            let rows = rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = columns
                        .iter()
                        .cloned()
                        .zip(row.values(config.with_beta).into_iter().map(num))
                        .collect();
                    Value::Object(obj)
                })
                .collect();
            document(spec, rows, common.seed)
        }
    };
    Rendered {
        body,
        out: common.out.clone(),
        trajectories: None,
    }
}

/// Column order of `simulate` output.
pub const SIMULATE_COLUMNS: [&str; 7] = [
    "scheme", "estimate", "stderr", "trials", "seed", "analytic", "z_score",
];

fn run_simulate(a: &SimulateArgs, cfg: &ConfigFile) -> CliResult<Rendered> {
    let common = resolve_common(&a.physics, &a.run, cfg)?;
    let scheme = cfg
        .layer(a.scheme, "scheme")?
        .ok_or_else(|| spec_err("simulate needs --scheme dolinar_mc|multicopy"))?;
    let trials = cfg.pick(a.trials, "trials", 100_000)?;
    if trials == 0 {
        return Err(spec_err("trials must be >= 1"));
    }
    let gamma_sq = cfg.layer(a.gamma_sq, "gamma_sq")?;
    let mc = MonteCarlo::new(trials, common.seed).with_execution(common.execution);

    let mut spec = Map::new();
    spec.insert("command".into(), json!("simulate"));
    spec.insert("scheme".into(), json!(scheme.to_string()));
    spec.insert("q0".into(), num(common.priors.q0()));
    spec.insert("trials".into(), json!(trials));

    let (estimate, analytic, trajectories) = match scheme {
        SimScheme::DolinarMc => {
            let psi = match (cfg.layer(a.psi, "psi")?, gamma_sq) {
                (Some(_), Some(_)) => {
                    return Err(spec_err("give either psi or gamma_sq, not both"))
                }
                (Some(psi), None) => psi,
                (None, Some(g)) => CoherentBinary::from_photons(g, common.duration)?.psi(),
                (None, None) => 1.0,
            };
            let control = cfg.pick(a.control, "control", ControlArg::Optimal)?;
            let law = match control {
                ControlArg::Optimal => ControlLaw::dolinar_optimal(common.duration),
                ControlArg::Capped => ControlLaw::capped(
                    cfg.layer(a.u_max, "u_max")?
                        .ok_or_else(|| spec_err("--control capped needs --u-max"))?,
                ),
                ControlArg::Constant => ControlLaw::constant(
                    cfg.layer(a.beta, "beta")?
                        .ok_or_else(|| spec_err("--control constant needs --beta"))?,
                ),
                ControlArg::Zero => ControlLaw::zero(),
            };
            let export = cfg.layer(a.trajectories.clone(), "trajectories")?;
            let record = match export {
                Some(_) => cfg.pick(a.record, "record", 100)?,
                None => 0,
            };
            let mut opts = TelegraphOptions::new(trials, common.seed).recording(record);
            opts.mc = mc;
            opts.max_rate = cfg.pick(a.max_rate, "max_rate", DEFAULT_MAX_RATE)?;
            let result = simulate_telegraph(common.priors, psi, &law, common.duration, &opts)?;
            let analytic = match control {
                ControlArg::Optimal => helstrom_trajectory(common.priors, psi, common.duration)?,
                _ => evolve_pc(
                    common.priors,
                    psi,
                    &law,
                    common.duration,
                    &EvolveOptions::default(),
                )?
                .pc(),
            };
            spec.insert("psi".into(), num(psi));
            spec.insert("duration".into(), num(common.duration));
            spec.insert("control".into(), json!(control.to_string()));
            match &law {
                ControlLaw::CappedDolinar { u_max } => {
                    spec.insert("u_max".into(), num(*u_max));
                }
                ControlLaw::Constant { beta } if control == ControlArg::Constant => {
                    spec.insert("beta".into(), num(*beta));
                }
                _ => {}
            }
            spec.insert("max_rate".into(), num(opts.max_rate));
            let trajectories = export.map(|path| (path, trajectory_lines(&result.trajectories)));
            (result.estimate, analytic, trajectories)
        }
        SimScheme::Multicopy => {
            if cfg.layer(a.trajectories.clone(), "trajectories")?.is_some() {
                return Err(spec_err(
                    "trajectory export is only available for dolinar_mc",
                ));
            }
            let copies = cfg.pick(a.copies, "copies", 2)?;
            if !(1..=MAX_ENUMERATED_COPIES).contains(&copies) {
                return Err(spec_err(format!(
                    "copies must be in 1..={MAX_ENUMERATED_COPIES}"
                )));
            }
            let chi = match (cfg.layer(a.chi, "chi")?, gamma_sq) {
                (Some(_), Some(_)) => {
                    return Err(spec_err("give either chi or gamma_sq, not both"))
                }
                (Some(chi), None) => chi,
                (None, Some(g)) => coherent_overlap(g / copies as f64),
                (None, None) => 0.8,
            };
            let theta = theta_for_overlap(chi)?;
            let estimate = simulate_adaptive(common.priors, theta, copies, &mc)?;
            let analytic = exact_adaptive_pc(common.priors, theta, copies)?;
            debug_assert!(
                (analytic - multicopy_bound(common.priors, chi, copies as u32)?).abs() < 1e-9
            );
            spec.insert("chi".into(), num(chi));
            spec.insert("copies".into(), json!(copies));
            (estimate, analytic, None)
        }
    };
    Ok(Rendered {
        body: render_estimate(&common, scheme, &estimate, analytic, spec),
        out: common.out.clone(),
        trajectories,
    })
}

fn render_estimate(
    common: &Common,
    scheme: SimScheme,
    estimate: &Estimate,
    analytic: f64,
    spec: Map<String, Value>,
) -> String {
    let z = estimate.z_score(analytic);
    match common.format {
        Format::Csv => {
            let fields = [
                scheme.to_string(),
                csv_number(estimate.value),
                csv_number(estimate.stderr),
                estimate.trials.to_string(),
                common.seed.to_string(),
                csv_number(analytic),
                csv_number(z),
            ];
            format!("{}\n{}\n", SIMULATE_COLUMNS.join(","), fields.join(","))
        }
        Format::Json => {
            let row = json!({
                "scheme": scheme.to_string(),
                "estimate": num(estimate.value),
                "stderr": num(estimate.stderr),
                "trials": estimate.trials,
                "seed": common.seed,
                "analytic": num(analytic),
                "z_score": num(z),
            });
            document(spec, vec![row], common.seed)
        }
    }
}

fn trajectory_lines(trajectories: &[TelegraphTrajectory]) -> String {
    let mut text = String::new();
    for tr in trajectories {
        let line = json!({
            "trial": tr.trial,
            "symbol": tr.symbol,
            "click_times": tr.click_times,
            "z_final": tr.z_final,
        });
        text.push_str(&line.to_string());
        text.push('\n');
    }
    text
}
