//! Parameter-grid evaluation of stationary and transient observables.
//!
//! Grid points are evaluated independently (optionally on a worker pool) and
//! assembled in row-major order over the axes, so the result never depends
//! on completion order.

mod presets;

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::dynamics::{evolve_with, IntegrationOptions, SgcBloch, SystemParams};
use crate::error::{Error, Result};
use crate::state::{populations, von_neumann_entropy, BlochVector, DensityMatrix};
use crate::steadystate::SolverRegistry;

pub use presets::{figure_preset, preset_fingerprint, preset_names, FigurePreset, PRESETS};

/// `omega_ratio` sweeps hold `omega_l` at this value and set
/// `omega_r = ratio * omega_l`.
pub const OMEGA_RATIO_ANCHOR: f64 = 0.1;

/// Quantity varied along a sweep axis.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepParam {
    /// One field of [`SystemParams`], by name.
    Field(&'static str),
    /// Both detunings together, `delta_r = delta_l`.
    Detuning,
    /// `omega_r / omega_l` at fixed `omega_l = OMEGA_RATIO_ANCHOR`.
    OmegaRatio,
}

impl SweepParam {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "delta" => Ok(SweepParam::Detuning),
            "omega_ratio" => Ok(SweepParam::OmegaRatio),
            _ => SystemParams::NAMES
                .iter()
                .find(|n| **n == name)
                .map(|n| SweepParam::Field(n))
                .ok_or_else(|| Error::InvalidSweep(format!("unknown sweep parameter `{name}`"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Field(n) => n,
            SweepParam::Detuning => "delta",
            SweepParam::OmegaRatio => "omega_ratio",
        }
    }

    fn apply(&self, p: &mut SystemParams, x: f64) {
        match self {
            SweepParam::Field(n) => {
                p.set(n, x);
            }
            SweepParam::Detuning => {
                p.delta_r = x;
                p.delta_l = x;
            }
            SweepParam::OmegaRatio => {
                p.omega_l = OMEGA_RATIO_ANCHOR;
                p.omega_r = x * OMEGA_RATIO_ANCHOR;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AxisPoints {
    /// `n >= 2` evenly spaced points including both ends.
    Linear { min: f64, max: f64, n: usize },
    /// Explicit values, used by presets for curve families.
    Values(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub param: SweepParam,
    pub points: AxisPoints,
}

impl Axis {
    pub fn linear(param: SweepParam, min: f64, max: f64, n: usize) -> Self {
        Axis {
            param,
            points: AxisPoints::Linear { min, max, n },
        }
    }

    pub fn values(param: SweepParam, values: &[f64]) -> Self {
        Axis {
            param,
            points: AxisPoints::Values(values.to_vec()),
        }
    }

    pub fn len(&self) -> usize {
        match &self.points {
            AxisPoints::Linear { n, .. } => *n,
            AxisPoints::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value(&self, k: usize) -> f64 {
        match &self.points {
            AxisPoints::Linear { min, max, n } => {
                if k + 1 == *n {
                    *max
                } else {
                    min + (max - min) * (k as f64 / (*n - 1) as f64)
                }
            }
            AxisPoints::Values(v) => v[k],
        }
    }

    /// `name:min:max:n` for linear axes, `name=v1,v2,...` otherwise.
    pub fn describe(&self) -> String {
        match &self.points {
            AxisPoints::Linear { min, max, n } => {
                format!("{}:{:.16e}:{:.16e}:{}", self.param.name(), min, max, n)
            }
            AxisPoints::Values(v) => {
                let vals: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
                format!("{}={}", self.param.name(), vals.join(","))
            }
        }
    }

    /// Parses the `name:min:max:n` form.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidSweep(format!(
                "axis `{text}` is not of the form name:min:max:n"
            )));
        }
        let param = SweepParam::parse(parts[0])?;
        let num = |s: &str| {
            crate::cli::parse_number(s)
                .ok_or_else(|| Error::InvalidSweep(format!("bad number `{s}` in axis `{text}`")))
        };
        let n = parts[3]
            .parse::<usize>()
            .map_err(|_| Error::InvalidSweep(format!("bad point count in axis `{text}`")))?;
        Ok(Axis::linear(param, num(parts[1])?, num(parts[2])?, n))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Entropy,
    Populations,
    Coherences,
}

impl Observable {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "entropy" => Ok(Observable::Entropy),
            "populations" => Ok(Observable::Populations),
            "coherences" => Ok(Observable::Coherences),
            _ => Err(Error::InvalidSweep(format!("unknown observable `{name}`"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::Entropy => "entropy",
            Observable::Populations => "populations",
            Observable::Coherences => "coherences",
        }
    }

    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Observable::Entropy => &["entropy_nats"],
            Observable::Populations => &["rho11", "rho22", "rho33"],
            Observable::Coherences => &["abs_rho12", "abs_rho13", "abs_rho23"],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepMode {
    Steady,
    Transient { t_end: f64, dt: f64, stride: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Panel or curve-family label, carried into the output.
    pub label: String,
    pub base: SystemParams,
    pub axes: Vec<Axis>,
    pub observables: Vec<Observable>,
    pub mode: SweepMode,
    /// Name of the stationary-state solver (steady mode only).
    pub solver: String,
}

impl SweepSpec {
    pub fn steady(label: &str, base: SystemParams, axes: Vec<Axis>, obs: &[Observable]) -> Self {
        SweepSpec {
            label: label.to_string(),
            base,
            axes,
            observables: obs.to_vec(),
            mode: SweepMode::Steady,
            solver: "liouvillian".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSweep(format!(
                "need 1 or 2 axes, got {}",
                self.axes.len()
            )));
        }
        for axis in &self.axes {
            match &axis.points {
                AxisPoints::Linear { min, max, n } => {
                    if *n < 2 {
                        return Err(Error::InvalidSweep(format!(
                            "axis {} needs at least 2 points",
                            axis.param.name()
                        )));
                    }
                    if !min.is_finite() || !max.is_finite() {
                        return Err(Error::InvalidSweep("non-finite axis bound".into()));
                    }
                }
                AxisPoints::Values(v) => {
                    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidSweep(format!(
                            "axis {} needs finite values",
                            axis.param.name()
                        )));
                    }
                }
            }
        }
        if self.observables.is_empty() {
            return Err(Error::InvalidSweep("no observables requested".into()));
        }
        if let SweepMode::Transient { t_end, dt, .. } = self.mode {
            if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) {
                return Err(Error::InvalidSweep(
                    "transient mode needs 0 < dt <= t_end".into(),
                ));
            }
        }
        self.base.validate()
    }

    pub fn grid_size(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    /// Coordinates of point `index` in row-major order (first axis slowest).
    pub fn coordinates(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut coords = vec![0.0; self.axes.len()];
        for (d, axis) in self.axes.iter().enumerate().rev() {
            coords[d] = axis.value(rem % axis.len());
            rem /= axis.len();
        }
        coords
    }

    pub fn point_params(&self, coords: &[f64]) -> SystemParams {
        let mut p = self.base;
        for (axis, &x) in self.axes.iter().zip(coords) {
            axis.param.apply(&mut p, x);
        }
        p
    }

    /// Canonical one-line-per-field description, stable across runs.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "label={}", self.label);
        for (n, v) in SystemParams::NAMES.iter().zip(self.base.values()) {
            let _ = writeln!(s, "{n}={v:.16e}");
        }
        for (i, a) in self.axes.iter().enumerate() {
            let _ = writeln!(s, "axis{i}={}", a.describe());
        }
        let obs: Vec<&str> = self.observables.iter().map(|o| o.name()).collect();
        let _ = writeln!(s, "observables={}", obs.join(","));
        match self.mode {
            SweepMode::Steady => {
                let _ = writeln!(s, "mode=steady");
                let _ = writeln!(s, "solver={}", self.solver);
            }
            SweepMode::Transient { t_end, dt, stride } => {
                let _ = writeln!(s, "mode=transient:{t_end:.16e}:{dt:.16e}:{stride}");
            }
        }
        s
    }
}

/// Observables of one state; all are computed, the sweep selects which are
/// reported.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObservableValues {
    pub entropy: f64,
    pub populations: [f64; 3],
    /// `|rho12|`, `|rho13|`, `|rho23|`.
    pub coherences: [f64; 3],
}

impl ObservableValues {
    pub fn of(v: &BlochVector) -> Result<Self> {
        let rho = DensityMatrix::from_bloch(v);
        Ok(ObservableValues {
            entropy: von_neumann_entropy(&rho)?.nats(),
            populations: populations(&rho),
            coherences: [v.rho12().norm(), v.rho13().norm(), v.rho32().norm()],
        })
    }

    pub fn select(&self, obs: Observable) -> Vec<f64> {
        match obs {
            Observable::Entropy => vec![self.entropy],
            Observable::Populations => self.populations.to_vec(),
            Observable::Coherences => self.coherences.to_vec(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointOutcome {
    Steady(ObservableValues),
    Transient(Vec<(f64, ObservableValues)>),
    /// No unique stationary state.
    Degenerate {
        smallest_singular_values: [f64; 2],
    },
    Failed {
        code: &'static str,
        message: String,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointRecord {
    pub index: usize,
    pub coords: Vec<f64>,
    pub params: SystemParams,
    pub outcome: PointOutcome,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub records: Vec<PointRecord>,
    pub code_version: &'static str,
}

impl SweepResult {
    pub fn degenerate_count(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.outcome, PointOutcome::Degenerate { .. }))
            .count()
    }

    /// Steady-mode entropies in grid order (`None` at flagged points).
    pub fn steady_entropies(&self) -> Vec<Option<f64>> {
        self.records
            .iter()
            .map(|r| match &r.outcome {
                PointOutcome::Steady(o) => Some(o.entropy),
                _ => None,
            })
            .collect()
    }
}

fn evaluate(spec: &SweepSpec, registry: &SolverRegistry, index: usize) -> PointRecord {
    let coords = spec.coordinates(index);
    let raw = spec.point_params(&coords);
    let outcome = match raw.normalized() {
        Err(e) => PointOutcome::Failed {
            code: e.code(),
            message: e.to_string(),
        },
        Ok(p) => evaluate_point(spec, registry, &p),
    };
    PointRecord {
        index,
        coords,
        params: raw,
        outcome,
    }
}

fn evaluate_point(spec: &SweepSpec, registry: &SolverRegistry, p: &SystemParams) -> PointOutcome {
    let result = match spec.mode {
        SweepMode::Steady => registry
            .get(&spec.solver)
            .and_then(|s| s.solve(p))
            .and_then(|r| ObservableValues::of(&r.state))
            .map(PointOutcome::Steady),
        SweepMode::Transient { t_end, dt, stride } => evolve_with(
            &SgcBloch,
            p,
            &BlochVector::GROUND,
            t_end,
            IntegrationOptions { dt, stride },
        )
        .and_then(|traj| {
            traj.samples
                .iter()
                .map(|s| ObservableValues::of(&s.state).map(|o| (s.t, o)))
                .collect::<Result<Vec<_>>>()
        })
        .map(PointOutcome::Transient),
    };
    match result {
        Ok(o) => o,
        Err(Error::DegenerateLiouvillian {
            smallest_singular_values,
        }) => PointOutcome::Degenerate {
            smallest_singular_values,
        },
        Err(e) => PointOutcome::Failed {
            code: e.code(),
            message: e.to_string(),
        },
    }
}

/// Evaluates every grid point. `workers = 1` runs serially on the calling
/// thread; larger values use a dedicated pool of that width.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<SweepResult> {
    spec.validate()?;
    let registry = SolverRegistry::builtin();
    registry.get(&spec.solver)?;
    let n = spec.grid_size();
    let records = if workers <= 1 {
        (0..n).map(|i| evaluate(spec, &registry, i)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidSweep(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            (0..n)
                .into_par_iter()
                .map(|i| evaluate(spec, &registry, i))
                .collect()
        })
    };
    Ok(SweepResult {
        spec: spec.clone(),
        records,
        code_version: env!("CARGO_PKG_VERSION"),
    })
}

/// Linear grid over `[0, 2 pi]`.
pub fn phase_axis(n: usize) -> Axis {
    Axis::linear(SweepParam::Field("phi"), 0.0, TAU, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steadystate::solve_steady;
    use std::f64::consts::PI;

    #[test]
    fn row_major_coordinates() {
        let spec = SweepSpec::steady(
            "t",
            SystemParams::default(),
            vec![
                Axis::values(SweepParam::Field("kc"), &[0.1, 0.2]),
                Axis::linear(SweepParam::Field("phi"), 0.0, 1.0, 3),
            ],
            &[Observable::Entropy],
        );
        assert_eq!(spec.grid_size(), 6);
        assert_eq!(spec.coordinates(0), vec![0.1, 0.0]);
        assert_eq!(spec.coordinates(2), vec![0.1, 1.0]);
        assert_eq!(spec.coordinates(4), vec![0.2, 0.5]);
    }

    #[test]
    fn single_point_matches_direct_solve() {
        let spec = SweepSpec::steady(
            "one",
            SystemParams::default(),
            vec![Axis::values(SweepParam::Field("phi"), &[0.0])],
            &[Observable::Entropy],
        );
        let r = run_sweep(&spec, 1).unwrap();
        let direct = solve_steady(&SystemParams::default()).unwrap();
        let s = von_neumann_entropy(&direct.density_matrix())
            .unwrap()
            .nats();
        assert_eq!(r.steady_entropies(), vec![Some(s)]);
    }

    #[test]
    fn degenerate_points_are_flagged_not_fatal() {
        let base = SystemParams {
            kc: 1.0,
            ..SystemParams::default()
        };
        let spec = SweepSpec::steady(
            "deg",
            base,
            vec![Axis::values(SweepParam::Field("phi"), &[0.0, PI, 1.0])],
            &[Observable::Entropy, Observable::Populations],
        );
        let r = run_sweep(&spec, 2).unwrap();
        assert_eq!(r.records.len(), 3);
        // at full interference both phi = 0 (trapped dark state) and
        // phi = pi (undamped oscillation) lack a unique stationary state
        assert_eq!(r.degenerate_count(), 2);
        assert!(matches!(r.records[2].outcome, PointOutcome::Steady(_)));
    }

    #[test]
    fn invalid_points_are_recorded() {
        let spec = SweepSpec::steady(
            "bad",
            SystemParams::default(),
            vec![Axis::linear(SweepParam::Field("kc"), 0.5, 1.5, 3)],
            &[Observable::Entropy],
        );
        let r = run_sweep(&spec, 1).unwrap();
        assert_eq!(r.records.len(), 3);
        assert!(matches!(
            r.records[2].outcome,
            PointOutcome::Failed {
                code: "invalid_params",
                ..
            }
        ));
    }

    #[test]
    fn omega_ratio_anchor() {
        let mut p = SystemParams::default();
        SweepParam::OmegaRatio.apply(&mut p, 2.5);
        assert_eq!(p.omega_l, 0.1);
        assert!((p.omega_r - 0.25).abs() < 1e-16);
    }

    #[test]
    fn axis_parsing() {
        let a = Axis::parse("delta:-10:10:201").unwrap();
        assert_eq!(a.param, SweepParam::Detuning);
        assert_eq!(a.len(), 201);
        assert_eq!(a.value(100), 0.0);
        assert_eq!(a.value(200), 10.0);
        assert!(Axis::parse("nope:0:1:3").is_err());
        assert!(Axis::parse("phi:0:1").is_err());
        let a = Axis::parse("phi:0:2pi:5").unwrap();
        assert_eq!(a.value(4), TAU);
    }

    #[test]
    fn rejects_malformed_specs() {
        let mut spec = SweepSpec::steady(
            "x",
            SystemParams::default(),
            vec![Axis::linear(SweepParam::Field("phi"), 0.0, 1.0, 1)],
            &[Observable::Entropy],
        );
        assert!(spec.validate().is_err());
        spec.axes.clear();
        assert!(spec.validate().is_err());
    }

    #[test]
    fn transient_points_carry_samples() {
        let mut spec = SweepSpec::steady(
            "tr",
            SystemParams::default(),
            vec![Axis::values(SweepParam::Field("phi"), &[0.0, 1.0])],
            &[Observable::Entropy],
        );
        spec.mode = SweepMode::Transient {
            t_end: 1.0,
            dt: 0.01,
            stride: 10,
        };
        let r = run_sweep(&spec, 1).unwrap();
        match &r.records[0].outcome {
            PointOutcome::Transient(s) => assert_eq!(s.len(), 11),
            other => panic!("{other:?}"),
        }
    }
}
