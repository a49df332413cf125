//! Argument definitions and command dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{collect_entries, parse_config, CommandKind, ConfigEntry, Origin, RunConfig};
use super::csv::{self, Provenance};
use crate::deviations::render_tables;
use crate::dressed::special_case_numeric;
use crate::dynamics::{evolve_with, EquationsOfMotion, IntegrationOptions, SgcBloch};
use crate::error::Error;
use crate::selftest::{run_selftest, FlippedTerm, SuiteRegistry};
use crate::state::BlochVector;
use crate::steadystate::{RelaxationSolver, SolverRegistry};
use crate::sweep::{
    figure_preset, preset_fingerprint, preset_names, run_sweep, Axis, AxisPoints, Observable,
    SweepMode, SweepParam, SweepSpec, OMEGA_RATIO_ANCHOR, PRESETS,
};

pub const EXIT_PHYSICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Preset name for the numeric and closed-form special case at `kc = 1`,
/// `phi = pi`.
const NONSTATIONARY: &str = "nonstationary";

#[derive(Debug, Parser)]
#[command(
    name = "vee-sgc",
    version,
    about = "Atom-photon entanglement in a driven V-type atom with spontaneously generated coherence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma21: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma31: Option<String>,
    #[arg(long = "omega-r", global = true, allow_hyphen_values = true)]
    pub omega_r: Option<String>,
    #[arg(long = "omega-l", global = true, allow_hyphen_values = true)]
    pub omega_l: Option<String>,
    #[arg(long = "delta-r", global = true, allow_hyphen_values = true)]
    pub delta_r: Option<String>,
    #[arg(long = "delta-l", global = true, allow_hyphen_values = true)]
    pub delta_l: Option<String>,
    #[arg(long = "delta-small", global = true, allow_hyphen_values = true)]
    pub delta_small: Option<String>,
    /// Relative phase in radians; accepts forms like `pi/6` or `4pi/3`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kc: Option<String>,
    #[arg(long, global = true)]
    pub dt: Option<String>,
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<String>,
    /// Record every n-th integration step.
    #[arg(long, global = true)]
    pub stride: Option<String>,
    /// Convergence tolerance of the relaxation solver.
    #[arg(long, global = true)]
    pub tolerance: Option<String>,
    #[arg(long, global = true)]
    pub workers: Option<String>,
    /// Stationary-state solver: liouvillian, relaxation or closed-form.
    #[arg(long, global = true)]
    pub solver: Option<String>,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// File of key=value lines using the flag names as keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    fn entries(&self) -> Vec<ConfigEntry> {
        [
            ("gamma21", &self.gamma21),
            ("gamma31", &self.gamma31),
            ("omega-r", &self.omega_r),
            ("omega-l", &self.omega_l),
            ("delta-r", &self.delta_r),
            ("delta-l", &self.delta_l),
            ("delta-small", &self.delta_small),
            ("phi", &self.phi),
            ("kc", &self.kc),
            ("dt", &self.dt),
            ("t-end", &self.t_end),
            ("stride", &self.stride),
            ("tolerance", &self.tolerance),
            ("workers", &self.workers),
            ("solver", &self.solver),
            ("out", &self.out),
            ("format", &self.format),
        ]
        .into_iter()
        .filter_map(|(key, v)| {
            v.as_ref().map(|value| ConfigEntry {
                key: key.to_string(),
                value: value.clone(),
                origin: Origin::Flag,
            })
        })
        .collect()
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate from the ground state and write the trajectory.
    Evolve,
    /// Solve for the stationary state.
    Steady,
    /// Evaluate observables over a parameter grid.
    Sweep {
        /// `name:min:max:n`; one or two axes. Names are parameter names
        /// (underscored), `delta` or `omega_ratio`.
        #[arg(long = "axis", required = true, allow_hyphen_values = true)]
        axes: Vec<String>,
        /// Comma-separated subset of entropy, populations, coherences.
        #[arg(long, value_delimiter = ',', default_value = "entropy")]
        observables: Vec<String>,
        /// Record trajectories (to t-end) instead of stationary values.
        #[arg(long)]
        transient: bool,
    },
    /// Run a named figure preset, or `nonstationary`.
    Preset {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Run the built-in oracle and invariant checks.
    Selftest {
        #[arg(long = "suite")]
        suites: Vec<String>,
        #[arg(long)]
        list: bool,
        /// Reverse the sign of one term of the equations of motion.
        #[arg(long, hide = true)]
        flip_sign_hook: bool,
    },
    /// Print freshly measured deviation tables in document layout.
    Deviations,
}

impl Command {
    fn kind(&self) -> Option<CommandKind> {
        match self {
            Command::Evolve => Some(CommandKind::Evolve),
            Command::Steady => Some(CommandKind::Steady),
            Command::Sweep { .. } => Some(CommandKind::Sweep),
            Command::Preset { .. } => Some(CommandKind::Preset),
            Command::Selftest { .. } => Some(CommandKind::Selftest),
            Command::Deviations => None,
        }
    }
}

fn usage(msg: impl std::fmt::Display) -> i32 {
    eprintln!("vee-sgc: {msg}");
    EXIT_USAGE
}

fn physics(err: &Error) -> i32 {
    eprintln!("vee-sgc: {err}");
    EXIT_PHYSICS
}

fn is_usage_error(err: &Error) -> bool {
    matches!(
        err,
        Error::InvalidParams(_)
            | Error::UnknownPreset(_)
            | Error::UnknownSolver(_)
            | Error::UnknownSuite(_)
            | Error::InvalidSweep(_)
            | Error::OutOfDomain(_)
    )
}

fn report(err: &Error) -> i32 {
    if is_usage_error(err) {
        usage(err)
    } else if let Error::Io { .. } = err {
        eprintln!("vee-sgc: {err}");
        EXIT_PHYSICS
    } else {
        physics(err)
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let file_text = match &cli.common.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => Some(t),
            Err(e) => return usage(format!("{}: {e}", path.display())),
        },
        None => None,
    };
    let flags = cli.common.entries();
    let mut cfg = match parse_config(file_text.as_deref(), &flags) {
        Ok(c) => c,
        Err(e) => return usage(e),
    };
    cfg.command = cli.command.kind();

    let mut explicit: Vec<ConfigEntry> = match file_text.as_deref().map(collect_entries) {
        Some(Ok(e)) => e,
        _ => Vec::new(),
    };
    explicit.extend(flags);

    match &cli.command {
        Command::Evolve => cmd_evolve(&cfg),
        Command::Steady => cmd_steady(&cfg),
        Command::Sweep {
            axes,
            observables,
            transient,
        } => cmd_sweep(&cfg, axes, observables, *transient),
        Command::Preset { name, list } => {
            if *list {
                for p in PRESETS {
                    println!("{:<14} {}", p.name, p.description);
                }
                println!(
                    "{NONSTATIONARY:<14} kc = 1, phi = pi special case, numeric and closed forms"
                );
                return 0;
            }
            match name {
                Some(n) => cmd_preset(&cfg, n, &explicit),
                None => usage("preset needs a name (see `preset --list`)"),
            }
        }
        Command::Selftest {
            suites,
            list,
            flip_sign_hook,
        } => {
            if *list {
                for s in SuiteRegistry::builtin().iter() {
                    println!("{:<12} {}", s.name(), s.description());
                }
                return 0;
            }
            cmd_selftest(suites, *flip_sign_hook)
        }
        Command::Deviations => match render_tables() {
            Ok(t) => {
                print!("{t}");
                0
            }
            Err(e) => report(&e),
        },
    }
}

fn provenance(cfg: &RunConfig) -> Provenance {
    Provenance::now(cfg.provenance())
}

fn options(cfg: &RunConfig) -> IntegrationOptions {
    IntegrationOptions {
        dt: cfg.numerics.dt,
        stride: cfg.numerics.stride,
    }
}

fn cmd_evolve(cfg: &RunConfig) -> i32 {
    let traj = match evolve_with(
        &SgcBloch,
        &cfg.params,
        &BlochVector::GROUND,
        cfg.numerics.t_end,
        options(cfg),
    ) {
        Ok(t) => t,
        Err(e) => return report(&e),
    };
    let prov = provenance(cfg);
    match csv::emit_to(cfg.out.as_deref(), |w| {
        csv::write_trajectory(w, &prov, &traj)
    }) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn cmd_steady(cfg: &RunConfig) -> i32 {
    let mut registry = SolverRegistry::builtin();
    registry.register(Box::new(RelaxationSolver {
        tolerance: cfg.numerics.tolerance,
        ..RelaxationSolver::default()
    }));
    let solver = match registry.get(&cfg.solver) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let outcome = cfg.params.normalized().and_then(|p| solver.solve(&p));
    if let Err(e) = &outcome {
        if is_usage_error(e) {
            return usage(e);
        }
    }
    let prov = provenance(cfg);
    if let Err(e) = csv::emit_to(cfg.out.as_deref(), |w| {
        csv::write_steady(w, &prov, &outcome)
    }) {
        return report(&e);
    }
    match &outcome {
        Ok(_) => 0,
        Err(e) => physics(e),
    }
}

fn emit_sweeps(cfg: &RunConfig, prov: Provenance, specs: &[SweepSpec]) -> i32 {
    let mut results = Vec::with_capacity(specs.len());
    for spec in specs {
        match run_sweep(spec, cfg.numerics.workers) {
            Ok(r) => results.push(r),
            Err(e) => return report(&e),
        }
    }
    match csv::emit_to(cfg.out.as_deref(), |w| {
        csv::write_sweeps(w, &prov, &results)
    }) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn cmd_sweep(cfg: &RunConfig, axes: &[String], observables: &[String], transient: bool) -> i32 {
    let axes = match axes
        .iter()
        .map(|a| Axis::parse(a))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(a) => a,
        Err(e) => return usage(e),
    };
    let observables = match observables
        .iter()
        .map(|o| Observable::parse(o.trim()))
        .collect::<Result<Vec<_>, _>>()
    {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let mut spec = SweepSpec::steady("sweep", cfg.params, axes, &observables);
    spec.solver = cfg.solver.clone();
    if transient {
        spec.mode = SweepMode::Transient {
            t_end: cfg.numerics.t_end,
            dt: cfg.numerics.dt,
            stride: cfg.numerics.stride,
        };
    }
    if let Err(e) = spec.validate() {
        return usage(e);
    }
    emit_sweeps(cfg, provenance(cfg), &[spec])
}

/// Whether `value` for parameter `name` is compatible with `spec`: either
/// swept over by one of its axes or equal to its base value.
fn consistent_with(spec: &SweepSpec, name: &str, value: f64) -> bool {
    let covers = |points: &AxisPoints, x: f64| match points {
        AxisPoints::Values(v) => v.contains(&x),
        AxisPoints::Linear { min, max, .. } => (min.min(*max)..=max.max(*min)).contains(&x),
    };
    for axis in &spec.axes {
        match (&axis.param, name) {
            (SweepParam::Field(f), _) if *f == name => return covers(&axis.points, value),
            (SweepParam::Detuning, "delta_r" | "delta_l") => return covers(&axis.points, value),
            (SweepParam::OmegaRatio, "omega_l") => return value == OMEGA_RATIO_ANCHOR,
            (SweepParam::OmegaRatio, "omega_r") => {
                return covers(&axis.points, value / OMEGA_RATIO_ANCHOR)
            }
            _ => {}
        }
    }
    spec.base.get(name) == Some(value)
}

fn cmd_preset(cfg: &RunConfig, name: &str, explicit: &[ConfigEntry]) -> i32 {
    if name == NONSTATIONARY {
        let omega0 = cfg.params.omega_r;
        let prov = provenance(cfg).meta("preset", NONSTATIONARY).meta(
            "parameters",
            "kc=1 phi=pi gamma21=gamma31=1 omega_l=omega_r detunings=0",
        );
        return match special_case_numeric(omega0, cfg.numerics.t_end, options(cfg)) {
            Ok(traj) => match csv::emit_to(cfg.out.as_deref(), |w| {
                csv::write_special_case(w, &prov, omega0, &traj)
            }) {
                Ok(()) => 0,
                Err(e) => report(&e),
            },
            Err(e) => report(&e),
        };
    }
    let specs = match figure_preset(name) {
        Ok(s) => s,
        Err(e) => {
            return usage(format!(
                "{e}; known presets: {}, {NONSTATIONARY}",
                preset_names().join(", ")
            ))
        }
    };
    for entry in explicit {
        let pname = entry.key.replace('-', "_");
        let Some(value) = cfg.params.get(&pname) else {
            continue;
        };
        if !specs.iter().any(|s| consistent_with(s, &pname, value)) {
            return usage(format!(
                "{} = {value} is inconsistent with preset {name}",
                entry.key
            ));
        }
    }
    let prov = provenance(cfg).meta("preset", name).meta(
        "fingerprint",
        format!("{:016x}", preset_fingerprint(&specs)),
    );
    emit_sweeps(cfg, prov, &specs)
}

fn cmd_selftest(suites: &[String], flip_sign_hook: bool) -> i32 {
    // reverses the drive coupling of rho22 into Im rho12
    let flipped = FlippedTerm {
        inner: &SgcBloch,
        output: 3,
        input: 0,
    };
    let eom: &dyn EquationsOfMotion = if flip_sign_hook { &flipped } else { &SgcBloch };
    let report = match run_selftest(eom, suites) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    for c in &report.checks {
        println!("{c}");
    }
    let failures = report.failures().count();
    println!("{} checks, {} failed", report.checks.len(), failures);
    if report.passed() {
        0
    } else {
        EXIT_PHYSICS
    }
}
