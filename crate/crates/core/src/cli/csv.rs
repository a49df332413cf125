//! Column-oriented text output.
//!
//! Layout: a `# vee-sgc v<version> <timestamp>` line, the `# key=value`
//! configuration block, optional `#: ` metadata lines, a header row, then
//! data rows. Floating-point cells carry 17 significant digits; empty cells
//! mark values that do not exist at that row.

use std::io::{self, Write};
use std::path::Path;

use crate::dressed::{
    from_dressed, special_case_eigenvalues_eq12, special_case_trajectory_eq11, DressedTrajectory,
};
use crate::dynamics::{SystemParams, Trajectory};
use crate::error::{Error, Result};
use crate::state::{eigenvalues_hermitian3, von_neumann_entropy, BlochVector};
use crate::steadystate::SteadyStateReport;
use crate::sweep::{Observable, PointOutcome, SweepMode, SweepResult, OMEGA_RATIO_ANCHOR};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Provenance {
    pub timestamp: String,
    /// Configuration, written as `# key=value`.
    pub config: Vec<(String, String)>,
    /// Anything else worth recording, written as `#: key=value`.
    pub meta: Vec<(String, String)>,
}

impl Provenance {
    pub fn now(config: Vec<(String, String)>) -> Self {
        Provenance {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            config,
            meta: Vec::new(),
        }
    }

    pub fn meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.meta.push((key.to_string(), value.into()));
        self
    }
}

pub fn num(x: f64) -> String {
    // no negative zero in output
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn write_preamble(w: &mut dyn Write, prov: &Provenance) -> io::Result<()> {
    writeln!(w, "# vee-sgc v{VERSION} {}", prov.timestamp)?;
    for (k, v) in &prov.config {
        writeln!(w, "# {k}={v}")?;
    }
    for (k, v) in &prov.meta {
        writeln!(w, "#: {k}={v}")?;
    }
    Ok(())
}

fn write_row(w: &mut dyn Write, cells: &[String]) -> io::Result<()> {
    writeln!(w, "{}", cells.join(","))
}

const STATE_COLUMNS: [&str; 9] = [
    "rho11", "rho22", "rho33", "re_rho12", "im_rho12", "re_rho13", "im_rho13", "re_rho23",
    "im_rho23",
];

fn state_cells(v: &BlochVector) -> Vec<String> {
    [
        v.rho11(),
        v.p22,
        v.p33,
        v.re12,
        v.im12,
        v.re13,
        v.im13,
        v.re32,
        -v.im32,
    ]
    .into_iter()
    .map(num)
    .collect()
}

pub fn write_trajectory(w: &mut dyn Write, prov: &Provenance, traj: &Trajectory) -> io::Result<()> {
    write_preamble(w, prov)?;
    let mut header = vec!["t_gamma".to_string(), "entropy_nats".to_string()];
    header.extend(STATE_COLUMNS.iter().map(|s| s.to_string()));
    write_row(w, &header)?;
    for s in &traj.samples {
        let mut row = vec![num(s.t), num(s.entropy)];
        row.extend(state_cells(&s.state));
        write_row(w, &row)?;
    }
    Ok(())
}

/// One row for a stationary-state request. A degenerate or failed solve
/// yields `degenerate`/`error` set and empty state cells.
pub fn write_steady(
    w: &mut dyn Write,
    prov: &Provenance,
    outcome: &Result<SteadyStateReport>,
) -> io::Result<()> {
    write_preamble(w, prov)?;
    let mut header = vec!["entropy_nats".to_string()];
    header.extend(STATE_COLUMNS.iter().map(|s| s.to_string()));
    header.extend(
        ["residual", "sigma_min", "sigma_min2", "degenerate", "error"]
            .iter()
            .map(|s| s.to_string()),
    );
    write_row(w, &header)?;
    let blank = |n: usize| vec![String::new(); n];
    let row = match outcome {
        Ok(r) => {
            let entropy = von_neumann_entropy(&r.density_matrix()).map(|e| e.nats());
            let mut row = vec![entropy.as_ref().map(|&e| num(e)).unwrap_or_default()];
            row.extend(state_cells(&r.state));
            row.push(num(r.residual));
            match r.smallest_singular_values {
                Some([a, b]) => row.extend([num(a), num(b)]),
                None => row.extend(blank(2)),
            }
            row.push("0".into());
            row.push(
                entropy
                    .err()
                    .map(|e| e.code().to_string())
                    .unwrap_or_default(),
            );
            row
        }
        Err(e) => {
            let mut row = blank(1 + STATE_COLUMNS.len() + 1);
            match e {
                Error::DegenerateLiouvillian {
                    smallest_singular_values: [a, b],
                } => {
                    row.extend([num(*a), num(*b), "1".into(), String::new()]);
                }
                _ => {
                    row.extend(blank(2));
                    row.extend(["0".into(), e.code().to_string()]);
                }
            }
            row
        }
    };
    write_row(w, &row)
}

fn sweep_columns(results: &[SweepResult]) -> (bool, Vec<Observable>) {
    let transient = results
        .iter()
        .any(|r| matches!(r.spec.mode, SweepMode::Transient { .. }));
    let observables = [
        Observable::Entropy,
        Observable::Populations,
        Observable::Coherences,
    ]
    .into_iter()
    .filter(|o| results.iter().any(|r| r.spec.observables.contains(o)))
    .collect();
    (transient, observables)
}

/// All sweeps of one request in a single table, in spec order then grid
/// order. Each spec's canonical description goes to the metadata lines.
pub fn write_sweeps(
    w: &mut dyn Write,
    prov: &Provenance,
    results: &[SweepResult],
) -> io::Result<()> {
    let mut prov = prov.clone();
    prov.meta
        .push(("omega_ratio_anchor".into(), num(OMEGA_RATIO_ANCHOR)));
    for r in results {
        for line in r.spec.canonical().lines() {
            prov.meta
                .push((format!("sweep.{}", r.spec.label), line.to_string()));
        }
    }
    write_preamble(w, &prov)?;

    let (transient, observables) = sweep_columns(results);
    let mut header = vec!["panel".to_string(), "point".to_string()];
    header.extend(SystemParams::NAMES.iter().map(|s| s.to_string()));
    if transient {
        header.push("t_gamma".into());
    }
    for o in &observables {
        header.extend(o.columns().iter().map(|s| s.to_string()));
    }
    header.extend(["degenerate".to_string(), "error".to_string()]);
    write_row(w, &header)?;

    let width: usize = observables.iter().map(|o| o.columns().len()).sum();
    for r in results {
        for rec in &r.records {
            let mut lead = vec![r.spec.label.clone(), rec.index.to_string()];
            lead.extend(rec.params.values().into_iter().map(num));
            let obs_cells = |v: &crate::sweep::ObservableValues| -> Vec<String> {
                observables
                    .iter()
                    .flat_map(|&o| {
                        let wanted = r.spec.observables.contains(&o);
                        v.select(o)
                            .into_iter()
                            .map(move |x| if wanted { num(x) } else { String::new() })
                    })
                    .collect()
            };
            let mut emit = |t: Option<f64>, cells: Vec<String>, tail: [String; 2]| {
                let mut row = lead.clone();
                if transient {
                    row.push(t.map(num).unwrap_or_default());
                }
                row.extend(cells);
                row.extend(tail);
                write_row(w, &row)
            };
            match &rec.outcome {
                PointOutcome::Steady(v) => emit(None, obs_cells(v), ["0".into(), String::new()])?,
                PointOutcome::Transient(samples) => {
                    for (t, v) in samples {
                        emit(Some(*t), obs_cells(v), ["0".into(), String::new()])?;
                    }
                }
                PointOutcome::Degenerate { .. } => emit(
                    None,
                    vec![String::new(); width],
                    ["1".into(), String::new()],
                )?,
                PointOutcome::Failed { code, .. } => emit(
                    None,
                    vec![String::new(); width],
                    ["0".into(), code.to_string()],
                )?,
            }
        }
    }
    Ok(())
}

/// Non-stationary special case: numeric rows first, then the closed
/// forms at the same times. Every row carries its mode.
pub fn write_special_case(
    w: &mut dyn Write,
    prov: &Provenance,
    omega0: f64,
    numeric: &DressedTrajectory,
) -> io::Result<()> {
    write_preamble(w, prov)?;
    write_row(
        w,
        &[
            "mode",
            "t_gamma",
            "rho11",
            "rho_psipsi",
            "rho_phiphi",
            "re_rho_1psi",
            "im_rho_1psi",
            "lambda_max",
            "lambda_min",
            "entropy_nats",
            "positivity_violated",
        ]
        .map(String::from),
    )?;
    for s in &numeric.samples {
        let m = &s.matrix;
        let lambda_max = eigenvalues_hermitian3(&from_dressed(m))
            .map(|v| v[0])
            .unwrap_or(f64::NAN);
        write_row(
            w,
            &[
                "numeric".to_string(),
                num(s.t),
                num(m.rho11()),
                num(m.rho_psipsi()),
                num(m.rho_phiphi()),
                num(m.rho_1psi().re),
                num(m.rho_1psi().im),
                num(lambda_max),
                num(s.min_eigenvalue),
                num(s.entropy),
                u8::from(s.min_eigenvalue < -1e-6).to_string(),
            ],
        )?;
    }
    for s in &numeric.samples {
        let m = special_case_trajectory_eq11(omega0, s.t);
        let (lp, lm) = special_case_eigenvalues_eq12(omega0, s.t);
        let violated = lm < 0.0 || m.rho_1psi().norm_sqr() > m.rho11() * m.rho_psipsi();
        write_row(
            w,
            &[
                "formula".to_string(),
                num(s.t),
                num(m.rho11()),
                num(m.rho_psipsi()),
                num(m.rho_phiphi()),
                num(m.rho_1psi().re),
                num(m.rho_1psi().im),
                num(lp),
                num(lm),
                crate::dressed::eq12_entropy((lp, lm))
                    .map(num)
                    .unwrap_or_default(),
                u8::from(violated).to_string(),
            ],
        )?;
    }
    Ok(())
}

/// Runs `body` against the file at `dest`, or standard output when `None`.
pub fn emit_to(
    dest: Option<&Path>,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<()> {
    match dest {
        Some(path) => {
            let io_err = |source| Error::Io {
                path: path.to_path_buf(),
                source,
            };
            let file = std::fs::File::create(path).map_err(io_err)?;
            let mut w = io::BufWriter::new(file);
            body(&mut w).map_err(io_err)?;
            w.flush().map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = io::BufWriter::new(stdout.lock());
            let res = body(&mut w).and_then(|_| w.flush());
            res.map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

/// Everything after the first line, for comparing runs.
pub fn body_without_timestamp(csv: &str) -> &str {
    csv.split_once('\n').map_or("", |(_, rest)| rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::steadystate::solve_steady;
    use crate::sweep::{run_sweep, Axis, SweepParam, SweepSpec};

    fn prov() -> Provenance {
        Provenance {
            timestamp: "2026-01-01T00:00:00Z".into(),
            config: vec![("kc".into(), num(0.5))],
            meta: vec![],
        }
    }

    fn render(f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn empty_trajectory_is_preamble_and_header() {
        let text = render(|w| write_trajectory(w, &prov(), &Trajectory::default()));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            format!("# vee-sgc v{VERSION} 2026-01-01T00:00:00Z")
        );
        assert_eq!(lines[1], "# kc=5.0000000000000000e-1");
        assert!(lines[2].starts_with("t_gamma,entropy_nats,rho11,rho22,rho33,re_rho12"));
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-17, 6.02214076e23, 0.0] {
            let s = num(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn trajectory_rows() {
        let traj = evolve(&SystemParams::default(), &BlochVector::GROUND, 0.01, 0.005).unwrap();
        let text = render(|w| write_trajectory(w, &prov(), &traj));
        assert_eq!(text.lines().count(), 3 + 3);
        let last = text.lines().last().unwrap();
        assert_eq!(last.split(',').count(), 11);
    }

    #[test]
    fn degenerate_steady_row() {
        let p = crate::dressed::special_case_params(0.1);
        let text = render(|w| write_steady(w, &prov(), &solve_steady(&p)));
        let header: Vec<&str> = text.lines().nth(2).unwrap().split(',').collect();
        let row: Vec<&str> = text.lines().nth(3).unwrap().split(',').collect();
        assert_eq!(header.len(), row.len());
        let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
        assert_eq!(col("degenerate"), "1");
        assert_eq!(col("entropy_nats"), "");
        assert_eq!(col("rho11"), "");
        assert!(!col("sigma_min").is_empty());
    }

    #[test]
    fn degenerate_sweep_row_has_empty_observables() {
        let base = SystemParams {
            kc: 1.0,
            ..SystemParams::default()
        };
        let spec = SweepSpec::steady(
            "p",
            base,
            vec![Axis::values(
                SweepParam::Field("phi"),
                &[1.0, std::f64::consts::PI],
            )],
            &[Observable::Entropy, Observable::Populations],
        );
        let r = run_sweep(&spec, 1).unwrap();
        let text = render(|w| write_sweeps(w, &prov(), &[r]));
        let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data.len(), 3);
        let header: Vec<&str> = data[0].split(',').collect();
        let row: Vec<&str> = data[2].split(',').collect();
        assert_eq!(header.len(), row.len());
        let idx = |n: &str| header.iter().position(|h| *h == n).unwrap();
        assert_eq!(row[idx("degenerate")], "1");
        for c in ["entropy_nats", "rho11", "rho22", "rho33"] {
            assert_eq!(row[idx(c)], "");
        }
        let ok: Vec<&str> = data[1].split(',').collect();
        assert_eq!(ok[idx("degenerate")], "0");
        assert!(!ok[idx("entropy_nats")].is_empty());
    }

    #[test]
    fn special_case_rows_are_tagged() {
        let traj = crate::dressed::special_case_numeric(
            0.1,
            1.0,
            crate::dynamics::IntegrationOptions { dt: 0.1, stride: 5 },
        )
        .unwrap();
        let text = render(|w| write_special_case(w, &prov(), 0.1, &traj));
        let modes: Vec<&str> = text
            .lines()
            .skip(3)
            .map(|l| l.split(',').next().unwrap())
            .collect();
        assert_eq!(
            modes,
            ["numeric", "numeric", "numeric", "formula", "formula", "formula"]
        );
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = emit_to(Some(Path::new("/nonexistent-dir/out.csv")), |_| Ok(())).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
