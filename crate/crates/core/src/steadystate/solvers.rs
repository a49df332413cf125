//! Interchangeable stationary-state solvers, looked up by name.

use super::{
    analytic_steady_eq3, build_liouvillian, check_physical, solve_steady, stationarity_residual,
    SteadyStateReport,
};
use crate::dynamics::{integrate, SgcBloch, SystemParams};
use crate::error::{Error, Result};
use crate::state::BlochVector;

pub trait SteadyStateSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve(&self, p: &SystemParams) -> Result<SteadyStateReport>;
}

/// Direct solve of the affine stationarity condition, with a singular-value
/// degeneracy check. The default.
#[derive(Clone, Copy, Debug, Default)]
pub struct LiouvillianSolver;

impl SteadyStateSolver for LiouvillianSolver {
    fn name(&self) -> &'static str {
        "liouvillian"
    }

    fn description(&self) -> &'static str {
        "linear solve of A v = -b with singular-value degeneracy check"
    }

    fn solve(&self, p: &SystemParams) -> Result<SteadyStateReport> {
        solve_steady(p)
    }
}

/// Long-time RK4 evolution from the ground state.
#[derive(Clone, Copy, Debug)]
pub struct RelaxationSolver {
    pub t_end: f64,
    pub dt: f64,
    /// Largest `||dv/dt||_inf` accepted at `t_end`.
    pub tolerance: f64,
}

impl Default for RelaxationSolver {
    fn default() -> Self {
        RelaxationSolver {
            t_end: 500.0,
            dt: 1e-2,
            tolerance: 1e-8,
        }
    }
}

impl SteadyStateSolver for RelaxationSolver {
    fn name(&self) -> &'static str {
        "relaxation"
    }

    fn description(&self) -> &'static str {
        "RK4 evolution from the ground state to t = 500/gamma"
    }

    fn solve(&self, p: &SystemParams) -> Result<SteadyStateReport> {
        p.validate()?;
        let n = (self.t_end / self.dt).round() as usize;
        let state = integrate(&SgcBloch, p, &BlochVector::GROUND, self.dt, n);
        let residual = stationarity_residual(p, &state);
        if !(residual <= self.tolerance) {
            return Err(Error::NotConverged { residual });
        }
        check_physical(&state)?;
        Ok(SteadyStateReport {
            state,
            residual: build_liouvillian(p).apply(&state).max_abs(),
            smallest_singular_values: None,
        })
    }
}

/// The weak-field closed form; only defined for equal unit decay rates,
/// equal resonant fields and `delta_small = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClosedFormSolver;

impl SteadyStateSolver for ClosedFormSolver {
    fn name(&self) -> &'static str {
        "closed-form"
    }

    fn description(&self) -> &'static str {
        "weak-field closed form (gamma21 = gamma31 = 1, resonant equal fields)"
    }

    fn solve(&self, p: &SystemParams) -> Result<SteadyStateReport> {
        p.validate()?;
        let in_domain = p.gamma21 == 1.0
            && p.gamma31 == 1.0
            && p.delta_r == 0.0
            && p.delta_l == 0.0
            && p.delta_small == 0.0
            && p.omega_r == p.omega_l;
        if !in_domain {
            return Err(Error::OutOfDomain(
                "requires gamma21 = gamma31 = 1, zero detunings and omega_r = omega_l".into(),
            ));
        }
        let rho = analytic_steady_eq3(p.omega_r, p.phi, p.kc)?;
        let state = rho.to_bloch();
        Ok(SteadyStateReport {
            state,
            residual: build_liouvillian(p).apply(&state).max_abs(),
            smallest_singular_values: None,
        })
    }
}

pub struct SolverRegistry {
    solvers: Vec<Box<dyn SteadyStateSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry {
            solvers: Vec::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(LiouvillianSolver));
        r.register(Box::new(RelaxationSolver::default()));
        r.register(Box::new(ClosedFormSolver));
        r
    }

    /// Adds a solver; a later registration under the same name replaces the
    /// earlier one.
    pub fn register(&mut self, solver: Box<dyn SteadyStateSolver>) {
        self.solvers.retain(|s| s.name() != solver.name());
        self.solvers.push(solver);
    }

    pub fn get(&self, name: &str) -> Result<&dyn SteadyStateSolver> {
        self.solvers
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::UnknownSolver(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.iter().map(|s| s.name()).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn SteadyStateSolver> {
        self.solvers.iter().map(|s| s.as_ref())
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
