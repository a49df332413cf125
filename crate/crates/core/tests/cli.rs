use std::process::{Command, Output};

use vee_sgc::cli::csv::body_without_timestamp;
use vee_sgc::cli::parse_provenance;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vee-sgc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column<'a>(rows: &'a [Vec<String>], name: &str) -> Vec<&'a str> {
    let idx = rows[0]
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[idx].as_str()).collect()
}

#[test]
fn steady_succeeds_with_full_precision_numbers() {
    let o = run(&["steady", "--kc", "0.5", "--phi", "pi/6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("# vee-sgc v0.1.0 "), "{first}");
    let stamp = first.rsplit(' ').next().unwrap();
    assert!(
        chrono::DateTime::parse_from_rfc3339(stamp).is_ok(),
        "{stamp}"
    );
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 2);
    let rho11 = column(&rows, "rho11")[0];
    let mantissa = rho11.split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
    assert_eq!(column(&rows, "degenerate"), ["0"]);
}

#[test]
fn degenerate_steady_request_is_a_physics_error() {
    let o = run(&["steady", "--kc", "1", "--phi", "pi"]);
    assert_eq!(o.status.code(), Some(1));
    let rows = data_rows(&stdout(&o));
    assert_eq!(column(&rows, "degenerate"), ["1"]);
    assert_eq!(column(&rows, "rho11"), [""]);
    assert!(!o.stderr.is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["steady", "--kc", "1.5"][..],
        &["steady", "--kc", "abc"],
        &["steady", "--no-such-flag", "1"],
        &["preset", "fig99"],
        &["frobnicate"],
        &["selftest", "--suite", "nope"],
        &["sweep", "--axis", "phi:0:1:1"],
        &["steady", "--config", "/nonexistent/vee.conf"],
    ] {
        let o = run(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn selftest_passes_and_the_flipped_term_fails_the_oracle() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = run(&["selftest", "--flip-sign-hook"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    let oracle = text
        .lines()
        .find(|l| l.contains("closed-form oracle"))
        .expect("oracle line");
    assert!(oracle.starts_with("[ FAIL]"), "{oracle}");
}

#[test]
fn selftest_runs_a_single_suite() {
    let o = run(&["selftest", "--suite", "dressed"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let checks: Vec<&str> = text.lines().filter(|l| l.starts_with('[')).collect();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|l| l.contains("] dressed/")), "{text}");
}

#[test]
fn config_file_with_flag_override_and_provenance() {
    let dir = std::env::temp_dir().join(format!("vee-sgc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.conf");
    std::fs::write(
        &cfg,
        "# weak field\nkc = 0.3\nphi = pi/2\nt-end = 1\nstride = 250\n",
    )
    .unwrap();
    let out = dir.join("traj.csv");
    let o = run(&[
        "evolve",
        "--config",
        cfg.to_str().unwrap(),
        "--kc",
        "0.6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let parsed = parse_provenance(&text).unwrap();
    assert_eq!(parsed.params.kc, 0.6);
    assert_eq!(parsed.params.phi, std::f64::consts::FRAC_PI_2);
    assert_eq!(parsed.numerics.stride, 250);
    let rows = data_rows(&text);
    assert_eq!(column(&rows, "t_gamma").len(), 5);

    std::fs::write(&cfg, "kc = 0.3\nbogus = 1\n").unwrap();
    let o = run(&["steady", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn preset_accepts_consistent_parameters_only() {
    let o = run(&["preset", "fig2c", "--kc", "0.99", "--phi", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert!(column(&rows, "kc")
        .iter()
        .all(|k| k.parse::<f64>().unwrap() == 0.99));

    let o = run(&["preset", "fig2c", "--kc", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn preset_rerun_is_byte_identical() {
    let a = stdout(&run(&["preset", "fig2c"]));
    let b = stdout(&run(&["preset", "fig2c", "--workers", "3"]));
    assert_eq!(body_without_timestamp(&a), body_without_timestamp(&b));
}

#[test]
fn sweep_flags_degenerate_points() {
    let o = run(&[
        "sweep",
        "--kc",
        "1",
        "--axis",
        "phi:0:pi:3",
        "--observables",
        "entropy,populations",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    assert_eq!(column(&rows, "degenerate"), ["1", "0", "1"]);
    assert_eq!(column(&rows, "entropy_nats")[0], "");
    assert!(!column(&rows, "rho11")[1].is_empty());
}

#[test]
fn nonstationary_preset_tags_each_row_with_its_mode() {
    let o = run(&["preset", "nonstationary", "--t-end", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&stdout(&o));
    let modes = column(&rows, "mode");
    assert!(modes.contains(&"numeric") && modes.contains(&"formula"));
}
