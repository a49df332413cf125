//! Equations of motion of the driven V-type atom with spontaneously
//! generated coherence, and their fixed-step RK4 integration.
//!
//! All rates and frequencies are in units of the decay rate gamma, times in
//! units of 1/gamma.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{populations, von_neumann_entropy, BlochVector, DensityMatrix};

pub const DEFAULT_DT: f64 = 1e-3;

/// Local error (one step vs two half steps) above which a step size is
/// rejected before integrating.
pub const STEP_PROBE_TOL: f64 = 1e-4;

/// Populations must stay inside `[-POPULATION_SLACK, 1 + POPULATION_SLACK]`.
pub const POPULATION_SLACK: f64 = 0.01;

/// Physical knobs of the model.
///
/// Defaults: `gamma21 = gamma31 = 1`, `omega_r = omega_l = 0.1`, everything
/// else zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub gamma21: f64,
    pub gamma31: f64,
    pub omega_r: f64,
    pub omega_l: f64,
    pub delta_r: f64,
    pub delta_l: f64,
    /// Relative frequency of the two driving fields.
    pub delta_small: f64,
    /// Relative phase `phi_R - phi_L`, radians.
    pub phi: f64,
    /// Interference strength `cos(theta)` between the two dipoles.
    pub kc: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            gamma21: 1.0,
            gamma31: 1.0,
            omega_r: 0.1,
            omega_l: 0.1,
            delta_r: 0.0,
            delta_l: 0.0,
            delta_small: 0.0,
            phi: 0.0,
            kc: 0.0,
        }
    }
}

impl SystemParams {
    /// Parameter names, in the order used for provenance and CSV columns.
    pub const NAMES: [&'static str; 9] = [
        "gamma21",
        "gamma31",
        "omega_r",
        "omega_l",
        "delta_r",
        "delta_l",
        "delta_small",
        "phi",
        "kc",
    ];

    pub fn values(&self) -> [f64; 9] {
        [
            self.gamma21,
            self.gamma31,
            self.omega_r,
            self.omega_l,
            self.delta_r,
            self.delta_l,
            self.delta_small,
            self.phi,
            self.kc,
        ]
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Self::NAMES
            .iter()
            .position(|n| *n == name)
            .map(|i| self.values()[i])
    }

    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let slot = match name {
            "gamma21" => &mut self.gamma21,
            "gamma31" => &mut self.gamma31,
            "omega_r" => &mut self.omega_r,
            "omega_l" => &mut self.omega_l,
            "delta_r" => &mut self.delta_r,
            "delta_l" => &mut self.delta_l,
            "delta_small" => &mut self.delta_small,
            "phi" => &mut self.phi,
            "kc" => &mut self.kc,
            _ => return false,
        };
        *slot = value;
        true
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.values()) {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
        }
        if self.gamma21 <= 0.0 || self.gamma31 <= 0.0 {
            return Err(Error::InvalidParams("decay rates must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.kc) {
            return Err(Error::InvalidParams(format!(
                "kc = {} outside [0, 1]",
                self.kc
            )));
        }
        if self.omega_r < 0.0 || self.omega_l < 0.0 {
            return Err(Error::InvalidParams(
                "Rabi frequencies must be non-negative".into(),
            ));
        }
        Ok(())
    }

    /// Validates and reduces `phi` to `[0, 2 pi)`.
    pub fn normalized(mut self) -> Result<Self> {
        self.validate()?;
        let phi = self.phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        self.phi = if phi >= TAU { 0.0 } else { phi };
        Ok(self)
    }

    /// Cross-damping strength `kc * sqrt(gamma21 * gamma31)`.
    pub fn cross_damping(&self) -> f64 {
        self.kc * (self.gamma21 * self.gamma31).sqrt()
    }
}

/// Time derivative of the independent variables.
///
/// Implemented as a trait so diagnostic code can swap in altered equations
/// (for example, a deliberately broken variant used as a negative control).
pub trait EquationsOfMotion: Sync {
    fn derivative(&self, p: &SystemParams, v: &BlochVector) -> BlochVector;
}

/// The optical Bloch equations with spontaneously generated coherence.
#[derive(Clone, Copy, Debug, Default)]
pub struct SgcBloch;

impl EquationsOfMotion for SgcBloch {
    fn derivative(&self, p: &SystemParams, v: &BlochVector) -> BlochVector {
        rhs(p, v)
    }
}

/// Right-hand side of the density-matrix equations, in complex form.
///
/// `rho11` is eliminated through the closure relation and `rho23 = conj(rho32)`.
/// The interference terms are only evaluated when `kc > 0`, so at `kc = 0`
/// the result does not depend on `phi` at all, not even through signed zeros.
pub fn rhs(p: &SystemParams, v: &BlochVector) -> BlochVector {
    let i = Complex64::i();
    let (g21, g31) = (p.gamma21, p.gamma31);
    let (om_r, om_l) = (Complex64::from(p.omega_r), Complex64::from(p.omega_l));

    let rho11 = Complex64::from(v.rho11());
    let rho22 = Complex64::from(v.p22);
    let rho33 = Complex64::from(v.p33);
    let rho12 = v.rho12();
    let rho13 = v.rho13();
    let rho32 = v.rho32();
    let (rho21, rho31, rho23) = (rho12.conj(), rho13.conj(), rho32.conj());

    let mut d22 = -2.0 * g21 * rho22 + i * (om_r * rho12 - om_r.conj() * rho21);
    let mut d33 = -2.0 * g31 * rho33 + i * (om_l * rho13 - om_l.conj() * rho31);
    let mut d12 = -(g21 + i * p.delta_r) * rho12
        + i * om_r.conj() * (rho22 - rho11)
        + i * om_l.conj() * rho32;
    let mut d13 = -(g31 - i * (p.delta_small - p.delta_l)) * rho13
        + i * om_l.conj() * (rho33 - rho11)
        + i * om_r.conj() * rho23;
    let mut d32 = -(g21 + g31 + i * (p.delta_r - p.delta_l + p.delta_small)) * rho32
        + i * om_l * rho12
        - i * om_r.conj() * rho31;

    if p.kc > 0.0 {
        let k = p.cross_damping();
        let e_plus = Complex64::from_polar(1.0, p.phi);
        let e_minus = e_plus.conj();
        let sgc = k * (rho23 * e_minus + rho32 * e_plus);
        d22 -= sgc;
        d33 -= sgc;
        d12 -= k * rho13 * e_minus;
        d13 -= k * rho12 * e_plus;
        d32 -= k * (rho22 + rho33) * e_minus;
    }

    BlochVector {
        p22: d22.re,
        p33: d33.re,
        re12: d12.re,
        im12: d12.im,
        re13: d13.re,
        im13: d13.im,
        re32: d32.re,
        im32: d32.im,
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4_step<E: EquationsOfMotion + ?Sized>(
    eom: &E,
    p: &SystemParams,
    v: &BlochVector,
    dt: f64,
) -> BlochVector {
    let k1 = eom.derivative(p, v);
    let k2 = eom.derivative(p, &(*v + k1 * (0.5 * dt)));
    let k3 = eom.derivative(p, &(*v + k2 * (0.5 * dt)));
    let k4 = eom.derivative(p, &(*v + k3 * dt));
    *v + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0)
}

/// Integrates `n_steps` of size `dt` without any checks.
pub fn integrate<E: EquationsOfMotion + ?Sized>(
    eom: &E,
    p: &SystemParams,
    v0: &BlochVector,
    dt: f64,
    n_steps: usize,
) -> BlochVector {
    (0..n_steps).fold(*v0, |v, _| rk4_step(eom, p, &v, dt))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrationOptions {
    pub dt: f64,
    /// Record every `stride`-th step (the final state is always recorded).
    pub stride: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            dt: DEFAULT_DT,
            stride: 1,
        }
    }
}

/// One recorded sample of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: BlochVector,
    pub entropy: f64,
    pub populations: [f64; 3],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }
}

fn sample(t: f64, state: BlochVector) -> Result<Sample> {
    let rho = DensityMatrix::from_bloch(&state);
    Ok(Sample {
        t,
        state,
        entropy: von_neumann_entropy(&rho)?.nats(),
        populations: populations(&rho),
    })
}

fn check_populations(v: &BlochVector, t: f64) -> Result<()> {
    for (name, x) in [("rho11", v.rho11()), ("rho22", v.p22), ("rho33", v.p33)] {
        if !(-POPULATION_SLACK..=1.0 + POPULATION_SLACK).contains(&x) || !x.is_finite() {
            return Err(Error::StepTooLarge {
                time: t,
                detail: format!("{name} = {x} left the physical range"),
            });
        }
    }
    Ok(())
}

/// Evolves `v0` from `t = 0` to `t_end` with the model equations.
pub fn evolve(p: &SystemParams, v0: &BlochVector, t_end: f64, dt: f64) -> Result<Trajectory> {
    evolve_with(
        &SgcBloch,
        p,
        v0,
        t_end,
        IntegrationOptions { dt, stride: 1 },
    )
}

/// Fixed-step RK4 from 0 to `t_end`. Sample times are `k * dt`.
pub fn evolve_with<E: EquationsOfMotion + ?Sized>(
    eom: &E,
    p: &SystemParams,
    v0: &BlochVector,
    t_end: f64,
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    p.validate()?;
    let dt = opts.dt;
    if !(t_end > 0.0 && dt > 0.0 && dt <= t_end) || !t_end.is_finite() {
        return Err(Error::InvalidParams(format!(
            "need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}"
        )));
    }
    let stride = opts.stride.max(1);
    let n_steps = (t_end / dt).round() as usize;

    let one = rk4_step(eom, p, v0, dt);
    let two = rk4_step(eom, p, &rk4_step(eom, p, v0, 0.5 * dt), 0.5 * dt);
    let probe = (one - two).max_abs();
    if probe > STEP_PROBE_TOL {
        return Err(Error::StepTooLarge {
            time: 0.0,
            detail: format!("step-doubling error estimate {probe:e} at dt = {dt}"),
        });
    }

    let mut samples = Vec::with_capacity(n_steps / stride + 2);
    samples.push(sample(0.0, *v0)?);
    let mut v = *v0;
    for k in 1..=n_steps {
        v = rk4_step(eom, p, &v, dt);
        let t = k as f64 * dt;
        check_populations(&v, t)?;
        if k % stride == 0 || k == n_steps {
            samples.push(sample(t, v)?);
        }
    }
    Ok(Trajectory { samples })
}

/// Outcome of the self-convergence measurement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MeasuredOrder {
    /// Successive refinements agree to roundoff; no order can be measured.
    Exact,
    Order(f64),
}

/// Differences below this are treated as roundoff.
const ORDER_ROUNDOFF: f64 = 1e-13;

/// Richardson estimate of the convergence order from runs at `dt`, `dt/2`
/// and `dt/4` over `[0, t_end]`.
pub fn convergence_order_with<E: EquationsOfMotion + ?Sized>(
    eom: &E,
    p: &SystemParams,
    v0: &BlochVector,
    dt: f64,
    t_end: f64,
) -> MeasuredOrder {
    let n = (t_end / dt).round().max(1.0) as usize;
    let coarse = integrate(eom, p, v0, dt, n);
    let mid = integrate(eom, p, v0, dt / 2.0, 2 * n);
    let fine = integrate(eom, p, v0, dt / 4.0, 4 * n);
    let e1 = (coarse - mid).max_abs();
    let e2 = (mid - fine).max_abs();
    if e1 <= ORDER_ROUNDOFF || e2 <= ORDER_ROUNDOFF {
        MeasuredOrder::Exact
    } else {
        MeasuredOrder::Order((e1 / e2).log2())
    }
}

/// Measures the order with a step sized to the fastest rate in `p`.
///
/// `dt = 0.2 / rate` over ten steps keeps the truncation error well above
/// roundoff while staying in the asymptotic regime. Longer horizons let
/// strongly damped runs settle and leave only roundoff to measure.
pub fn convergence_order_check(p: &SystemParams, v0: &BlochVector) -> MeasuredOrder {
    let rate = [
        2.0 * p.gamma21,
        2.0 * p.gamma31,
        p.omega_r,
        p.omega_l,
        p.delta_r.abs(),
        p.delta_l.abs(),
        (p.delta_r - p.delta_l + p.delta_small).abs(),
        1.0,
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    let dt = 0.2 / rate;
    convergence_order_with(&SgcBloch, p, v0, dt, 10.0 * dt)
}
