//! Built-in oracle and invariant checks, grouped into named suites.
//!
//! Suites receive the equations of motion as a trait object so that a
//! deliberately broken variant can be substituted to confirm that the checks
//! actually detect errors.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::deviations::{
    measure_dressed, oracle_phase_values, reconcile_closed_form, reconcile_dressed,
    ClosedFormEntry, DOCUMENT, ORACLE_FIELDS, ORACLE_KC, ORACLE_PHASES,
};
use crate::dressed::{
    analyze_oscillation, eq11_angular_frequency, from_dressed, reduced_equations_angular_frequency,
    special_case_eigenvalues_eq12, special_case_numeric, special_case_params,
    special_case_trajectory_eq11, to_dressed,
};
use crate::dynamics::{
    convergence_order_with, evolve_with, EquationsOfMotion, IntegrationOptions, MeasuredOrder,
    SystemParams,
};
use crate::error::{Error, Result};
use crate::state::{eigh3, von_neumann_entropy, BlochVector, DensityMatrix};
use crate::steadystate::{
    analytic_steady_eq3, build_liouvillian, solve_steady, ClosedFormDeviation, Liouvillian,
    MatrixElement, CLOSED_FORM_TOL,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A documented disagreement that was reproduced as documented.
    Known,
    /// Measured and reported only.
    Info,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "FAIL",
            CheckStatus::Known => "known",
            CheckStatus::Info => "info",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: String,
    pub status: CheckStatus,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:>5}] {}/{}: residual {:.3e} (tol {:.1e})",
            self.status.label(),
            self.suite,
            self.name,
            self.residual,
            self.tolerance
        )?;
        if !self.detail.is_empty() {
            write!(f, "  {}", self.detail)?;
        }
        Ok(())
    }
}

fn check(suite: &'static str, name: &str, residual: f64, tolerance: f64) -> CheckResult {
    CheckResult {
        suite,
        name: name.to_string(),
        status: if residual <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        residual,
        tolerance,
        detail: String::new(),
    }
}

fn failed(suite: &'static str, name: &str, err: &Error) -> CheckResult {
    CheckResult {
        suite,
        name: name.to_string(),
        status: CheckStatus::Fail,
        residual: f64::NAN,
        tolerance: 0.0,
        detail: err.to_string(),
    }
}

impl CheckResult {
    fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }
}

pub trait SelfTestSuite: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, eom: &dyn EquationsOfMotion) -> Vec<CheckResult>;
}

/// Deterministic low-discrepancy numbers in `[0, 1)`.
fn weyl(k: usize) -> f64 {
    const ALPHA: f64 = 0.618_033_988_749_894_9;
    (k as f64 * ALPHA).fract()
}

/// Deterministic full-rank density matrix number `k`.
fn sample_density(k: usize) -> DensityMatrix {
    let a = Matrix3::from_fn(|i, j| {
        let idx = 18 * k + 6 * i + 2 * j;
        Complex64::new(weyl(idx + 1) - 0.5, weyl(idx + 2) - 0.5)
    });
    let m = a * a.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(m / tr)
}

/// Deterministic parameter set number `k`, away from the degenerate point.
fn sample_params(k: usize) -> SystemParams {
    let u = |j: usize| weyl(16 * k + j + 1);
    SystemParams {
        gamma21: 0.5 + u(0),
        gamma31: 0.5 + u(1),
        omega_r: u(2),
        omega_l: u(3),
        delta_r: 10.0 * u(4) - 5.0,
        delta_l: 10.0 * u(5) - 5.0,
        delta_small: u(6) - 0.5,
        phi: 2.0 * PI * u(7),
        kc: 0.9 * u(8),
    }
}

struct StateSuite;

impl SelfTestSuite for StateSuite {
    fn name(&self) -> &'static str {
        "state"
    }

    fn description(&self) -> &'static str {
        "eigen-decomposition and entropy of 3x3 density matrices"
    }

    fn run(&self, _eom: &dyn EquationsOfMotion) -> Vec<CheckResult> {
        const S: &str = "state";
        let mut out = Vec::new();

        let refs = [
            ([1.0, 0.0, 0.0], 0.0),
            ([0.5, 0.5, 0.0], LN_2),
            ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], 3.0_f64.ln()),
        ];
        let err = refs
            .iter()
            .map(|(d, s)| {
                von_neumann_entropy(&DensityMatrix::diagonal(*d))
                    .map(|e| (e.nats() - s).abs())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max);
        out.push(check(S, "entropy reference values", err, 1e-15));

        let mut eig_res: f64 = 0.0;
        let mut ortho: f64 = 0.0;
        let mut unitary: f64 = 0.0;
        for k in 0..200 {
            let rho = sample_density(k);
            match eigh3(&rho) {
                Ok(e) => {
                    for j in 0..3 {
                        let u = e.vectors.column(j);
                        let r = rho.0 * u - u * Complex64::from(e.values[j]);
                        eig_res = eig_res.max(r.iter().fold(0.0, |m: f64, z| m.max(z.norm())));
                    }
                    let g = e.vectors.adjoint() * e.vectors - Matrix3::identity();
                    ortho = ortho.max(g.iter().fold(0.0, |m: f64, z| m.max(z.norm())));
                }
                Err(_) => eig_res = f64::INFINITY,
            }
            let d = from_dressed(&to_dressed(&rho));
            let s0 = von_neumann_entropy(&rho).map(|e| e.nats());
            let s1 = von_neumann_entropy(&d).map(|e| e.nats());
            unitary = unitary.max(match (s0, s1) {
                (Ok(a), Ok(b)) => (a - b).abs(),
                _ => f64::INFINITY,
            });
        }
        out.push(check(S, "eigenpair residual (200 states)", eig_res, 1e-12));
        out.push(check(S, "eigenvector orthonormality", ortho, 1e-12));
        out.push(check(S, "entropy under basis rotation", unitary, 1e-12));
        out
    }
}

struct DynamicsSuite;

impl SelfTestSuite for DynamicsSuite {
    fn name(&self) -> &'static str {
        "dynamics"
    }

    fn description(&self) -> &'static str {
        "equations of motion, generator consistency and RK4 order"
    }

    fn run(&self, eom: &dyn EquationsOfMotion) -> Vec<CheckResult> {
        const S: &str = "dynamics";
        let mut out = Vec::new();

        let mut diff: f64 = 0.0;
        for k in 0..20 {
            let p = sample_params(k);
            let probed = Liouvillian::probe(eom, &p);
            let explicit = build_liouvillian(&p);
            diff = diff
                .max((probed.matrix - explicit.matrix).amax())
                .max((probed.offset - explicit.offset).amax());
        }
        out.push(check(S, "generator vs explicit matrix", diff, 1e-13));

        let p = SystemParams {
            omega_r: 0.7,
            omega_l: 0.4,
            delta_r: 1.0,
            kc: 0.6,
            phi: 1.0,
            ..SystemParams::default()
        };
        let order = convergence_order_with(eom, &p, &BlochVector::GROUND, 0.2, 8.0);
        out.push(match order {
            MeasuredOrder::Order(q) => check(S, "RK4 measured order", (q - 4.0).abs(), 0.3)
                .with_detail(format!("order {q:.4}")),
            MeasuredOrder::Exact => check(S, "RK4 measured order", f64::INFINITY, 0.3)
                .with_detail("no truncation error measurable"),
        });

        let opts = IntegrationOptions {
            dt: 1e-2,
            stride: 10,
        };
        out.push(
            match evolve_with(eom, &p, &BlochVector::GROUND, 20.0, opts) {
                Ok(traj) => {
                    let tr = traj
                        .samples
                        .iter()
                        .map(|s| (DensityMatrix::from_bloch(&s.state).trace() - 1.0).norm())
                        .fold(0.0, f64::max);
                    check(S, "trace along trajectory", tr, 0.0)
                }
                Err(e) => failed(S, "trace along trajectory", &e),
            },
        );

        let run = |phi: f64| {
            let q = SystemParams { kc: 0.0, phi, ..p };
            evolve_with(eom, &q, &BlochVector::GROUND, 5.0, opts)
        };
        out.push(match (run(0.0), run(2.0)) {
            (Ok(a), Ok(b)) => {
                let d = a
                    .samples
                    .iter()
                    .zip(&b.samples)
                    .map(|(x, y)| (x.state - y.state).max_abs())
                    .fold(0.0, f64::max);
                check(S, "phase independence without interference", d, 0.0)
            }
            (Err(e), _) | (_, Err(e)) => failed(S, "phase independence without interference", &e),
        });
        out
    }
}

struct SteadyStateSuite;

fn closed_form_entries(eom: &dyn EquationsOfMotion) -> Result<Vec<ClosedFormEntry>> {
    let mut out = Vec::new();
    for &omega0 in &ORACLE_FIELDS {
        for &kc in &ORACLE_KC {
            for (&label, phi) in ORACLE_PHASES.iter().zip(oracle_phase_values()) {
                let p = SystemParams {
                    omega_r: omega0,
                    omega_l: omega0,
                    phi,
                    kc,
                    ..SystemParams::default()
                };
                let numeric =
                    DensityMatrix::from_bloch(&Liouvillian::probe(eom, &p).solve()?.state);
                let analytic = analytic_steady_eq3(omega0, phi, kc)?;
                for element in MatrixElement::ALL {
                    let idx = element.index();
                    let (n, a) = (numeric.0[idx], analytic.0[idx]);
                    if (n - a).norm() > CLOSED_FORM_TOL {
                        out.push(ClosedFormEntry {
                            phase_label: label,
                            deviation: ClosedFormDeviation {
                                omega0,
                                kc,
                                phi,
                                element,
                                numeric: n,
                                closed_form: a,
                            },
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

impl SelfTestSuite for SteadyStateSuite {
    fn name(&self) -> &'static str {
        "steadystate"
    }

    fn description(&self) -> &'static str {
        "stationary solve, closed-form oracle and degeneracy detection"
    }

    fn run(&self, eom: &dyn EquationsOfMotion) -> Vec<CheckResult> {
        const S: &str = "steadystate";
        let mut out = Vec::new();

        const ORACLE: &str = "closed-form oracle (60 points)";
        out.push(match closed_form_entries(eom) {
            Ok(entries) => {
                let r = reconcile_closed_form(&entries, DOCUMENT);
                let worst = entries
                    .iter()
                    .map(|e| e.deviation.magnitude())
                    .fold(0.0, f64::max);
                let mut c = check(S, ORACLE, worst, CLOSED_FORM_TOL);
                if r.is_clean() && !entries.is_empty() {
                    c.status = CheckStatus::Known;
                    c.detail = format!("{} documented element mismatches reproduced", r.matched);
                } else if !r.is_clean() {
                    c.status = CheckStatus::Fail;
                    c.detail = format!(
                        "{} undocumented, {} stale; first: {}",
                        r.undocumented.len(),
                        r.stale.len(),
                        r.undocumented
                            .first()
                            .or(r.stale.first())
                            .cloned()
                            .unwrap_or_default()
                    );
                }
                c
            }
            Err(e) => failed(S, ORACLE, &e),
        });

        let mut residual: f64 = 0.0;
        for k in 0..20 {
            let p = sample_params(k);
            residual = residual.max(match Liouvillian::probe(eom, &p).solve() {
                Ok(r) => eom.derivative(&p, &r.state).max_abs(),
                Err(_) => f64::INFINITY,
            });
        }
        out.push(check(S, "stationarity residual", residual, 1e-10));

        let flagged = [0.01, 0.1, 0.5, 1.0]
            .iter()
            .filter(|&&o| {
                matches!(
                    solve_steady(&special_case_params(o)),
                    Err(Error::DegenerateLiouvillian { .. })
                )
            })
            .count();
        out.push(
            check(
                S,
                "degeneracy flagged at kc = 1, phi = pi",
                (4 - flagged) as f64,
                0.0,
            )
            .with_detail(format!("{flagged}/4 field strengths flagged")),
        );
        out
    }
}

struct DressedSuite;

impl SelfTestSuite for DressedSuite {
    fn name(&self) -> &'static str {
        "dressed"
    }

    fn description(&self) -> &'static str {
        "transcribed dressed-basis equations vs the rotated bare-basis generator"
    }

    fn run(&self, _eom: &dyn EquationsOfMotion) -> Vec<CheckResult> {
        const S: &str = "dressed";
        let measured = measure_dressed();
        let r = reconcile_dressed(&measured, DOCUMENT);
        let worst = measured
            .iter()
            .map(|e| e.deviation.magnitude())
            .fold(0.0, f64::max);
        let mut c = check(
            S,
            "coefficient consistency (9 parameter sets)",
            worst,
            1e-12,
        );
        if r.is_clean() && !measured.is_empty() {
            c.status = CheckStatus::Known;
            c.detail = format!("{} documented coefficient mismatches reproduced", r.matched);
        } else if !r.is_clean() {
            c.status = CheckStatus::Fail;
            c.detail = format!(
                "{} undocumented, {} stale",
                r.undocumented.len(),
                r.stale.len()
            );
        }
        vec![c]
    }
}

struct FormulaSuite;

impl SelfTestSuite for FormulaSuite {
    fn name(&self) -> &'static str {
        "formula"
    }

    fn description(&self) -> &'static str {
        "special-case closed forms as transcribed, and the numeric special case"
    }

    fn run(&self, _eom: &dyn EquationsOfMotion) -> Vec<CheckResult> {
        const S: &str = "formula";
        let mut out = Vec::new();
        let omega0 = 0.1;
        let quarter = PI / 2.0 / eq11_angular_frequency(omega0);

        let (p0, m0) = special_case_eigenvalues_eq12(omega0, 0.0);
        out.push(check(
            S,
            "eigenvalues at t = 0",
            (p0 - 1.0).abs().max(m0.abs()),
            1e-12,
        ));
        let (pq, mq) = special_case_eigenvalues_eq12(omega0, quarter);
        let r = 2.0_f64.powf(0.25);
        out.push(check(
            S,
            "eigenvalues at quarter period",
            (pq - (1.0 + r) / 2.0)
                .abs()
                .max((mq - (1.0 - r) / 2.0).abs()),
            1e-12,
        ));
        out.push(CheckResult {
            suite: S,
            name: "closed-form eigenvalue sign".into(),
            status: if mq < 0.0 {
                CheckStatus::Known
            } else {
                CheckStatus::Fail
            },
            residual: mq,
            tolerance: 0.0,
            detail: "smaller closed-form eigenvalue is negative at quarter period".into(),
        });
        let m = special_case_trajectory_eq11(omega0, quarter);
        let excess = m.rho_1psi().norm_sqr() - m.rho11() * m.rho_psipsi();
        out.push(CheckResult {
            suite: S,
            name: "closed-form coherence bound".into(),
            status: if excess > 0.0 {
                CheckStatus::Known
            } else {
                CheckStatus::Fail
            },
            residual: excess,
            tolerance: 0.0,
            detail: "|rho_1psi|^2 exceeds rho11 rho_psipsi at quarter period".into(),
        });

        let opts = IntegrationOptions {
            dt: 1e-2,
            stride: 10,
        };
        out.push(match special_case_numeric(omega0, 200.0, opts) {
            Ok(traj) => {
                let rep = analyze_oscillation(&traj);
                let measured = rep.angular_frequency.unwrap_or(f64::NAN);
                let expected = eq11_angular_frequency(omega0);
                CheckResult {
                    suite: S,
                    name: "numeric oscillation frequency".into(),
                    status: CheckStatus::Info,
                    residual: (measured - expected).abs() / expected,
                    tolerance: 0.0,
                    detail: format!(
                        "measured {measured:.6}, closed form {expected:.6}, reduced equations {:.6}, max rho_phiphi {:.1e}",
                        reduced_equations_angular_frequency(omega0),
                        rep.max_rho_phiphi
                    ),
                }
            }
            Err(e) => failed(S, "numeric oscillation frequency", &e),
        });
        out
    }
}

/// Named suites, run in registration order.
pub struct SuiteRegistry {
    suites: Vec<Box<dyn SelfTestSuite>>,
}

impl SuiteRegistry {
    pub fn builtin() -> Self {
        SuiteRegistry {
            suites: vec![
                Box::new(StateSuite),
                Box::new(DynamicsSuite),
                Box::new(SteadyStateSuite),
                Box::new(DressedSuite),
                Box::new(FormulaSuite),
            ],
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.suites.iter().map(|s| s.name()).collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn SelfTestSuite> {
        self.suites
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownSuite(name.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn SelfTestSuite> {
        self.suites.iter().map(|s| s.as_ref())
    }
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SelfTestReport {
    pub checks: Vec<CheckResult>,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }
}

/// Runs the named suites (all of them when `names` is empty).
pub fn run_selftest(eom: &dyn EquationsOfMotion, names: &[String]) -> Result<SelfTestReport> {
    let registry = SuiteRegistry::builtin();
    let suites: Vec<&dyn SelfTestSuite> = if names.is_empty() {
        registry.iter().collect()
    } else {
        names
            .iter()
            .map(|n| registry.get(n))
            .collect::<Result<_>>()?
    };
    Ok(SelfTestReport {
        checks: suites.iter().flat_map(|s| s.run(eom)).collect(),
    })
}

/// Wraps affine equations of motion and reverses the sign of a single
/// coupling: the contribution of input variable `input` to the derivative
/// of variable `output`.
pub struct FlippedTerm<'a> {
    pub inner: &'a dyn EquationsOfMotion,
    pub output: usize,
    pub input: usize,
}

impl EquationsOfMotion for FlippedTerm<'_> {
    fn derivative(&self, p: &SystemParams, v: &BlochVector) -> BlochVector {
        let full = self.inner.derivative(p, v).to_array();
        let mut without = v.to_array();
        without[self.input] = 0.0;
        let rest = self
            .inner
            .derivative(p, &BlochVector::from_array(without))
            .to_array();
        let mut out = full;
        out[self.output] = rest[self.output] - (full[self.output] - rest[self.output]);
        BlochVector::from_array(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SgcBloch;

    #[test]
    fn sample_states_are_physical() {
        for k in 0..50 {
            let rho = sample_density(k);
            assert!((rho.trace() - 1.0).norm() < 1e-15);
            assert!(eigh3(&rho).unwrap().values[2] > 0.0);
        }
    }

    #[test]
    fn unknown_suite() {
        let err = run_selftest(&SgcBloch, &["nope".to_string()]).unwrap_err();
        assert!(matches!(err, Error::UnknownSuite(_)));
    }

    #[test]
    fn dressed_suite_only() {
        let r = run_selftest(&SgcBloch, &["dressed".to_string()]).unwrap();
        assert!(r.checks.iter().all(|c| c.suite == "dressed"));
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn flipped_sign_breaks_the_oracle() {
        let flipped = FlippedTerm {
            inner: &SgcBloch,
            output: 3,
            input: 0,
        };
        let r = run_selftest(&flipped, &["steadystate".to_string()]).unwrap();
        let oracle = r
            .checks
            .iter()
            .find(|c| c.name.starts_with("closed-form oracle"))
            .unwrap();
        assert_eq!(oracle.status, CheckStatus::Fail);
    }
}
