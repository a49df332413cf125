//! Stationary states of the equations of motion.
//!
//! The equations are affine in the 8 independent variables,
//! `dv/dt = A v + b`, with `b` coming from eliminating `rho11`. A stationary
//! state is the solution of `A v = -b`; when `A` is (numerically) singular
//! the dynamics has a family of non-decaying solutions and no unique
//! stationary state exists.

mod closed_form;
mod solvers;

use nalgebra::{SMatrix, SVector};

use crate::dynamics::{rhs, EquationsOfMotion, SystemParams};
use crate::error::{Error, Result};
use crate::state::{eigenvalues_hermitian3, BlochVector, DensityMatrix};

pub use closed_form::{
    analytic_steady_eq3, closed_form_deviations, ClosedFormDeviation, MatrixElement,
    CLOSED_FORM_TOL,
};
pub use solvers::{
    ClosedFormSolver, LiouvillianSolver, RelaxationSolver, SolverRegistry, SteadyStateSolver,
};

pub type Mat8 = SMatrix<f64, 8, 8>;
pub type Vec8 = SVector<f64, 8>;

/// `A` is treated as singular when its smallest singular value falls below
/// this fraction of the largest.
pub const DEGENERACY_RATIO: f64 = 1e-8;
/// Maximum accepted `||A v + b||_inf` for a returned stationary state.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Minimum accepted eigenvalue of a returned stationary state.
pub const PSD_SLACK: f64 = 1e-8;

/// Affine generator `dv/dt = matrix * v + offset` of the 8-variable system.
#[derive(Clone, Debug, PartialEq)]
pub struct Liouvillian {
    pub matrix: Mat8,
    pub offset: Vec8,
}

pub(crate) fn to_vec8(v: &BlochVector) -> Vec8 {
    Vec8::from(v.to_array())
}

pub(crate) fn from_vec8(v: &Vec8) -> BlochVector {
    BlochVector::from_array(std::array::from_fn(|i| v[i]))
}

/// Writes out `A` and `b` term by term.
///
/// Component order is `(p22, p33, re12, im12, re13, im13, re32, im32)`, with
/// `K = kc sqrt(gamma21 gamma31)`, `c = cos(phi)`, `s = sin(phi)`.
pub fn build_liouvillian(p: &SystemParams) -> Liouvillian {
    const P22: usize = 0;
    const P33: usize = 1;
    const U12: usize = 2;
    const V12: usize = 3;
    const U13: usize = 4;
    const V13: usize = 5;
    const U32: usize = 6;
    const V32: usize = 7;

    let (g21, g31) = (p.gamma21, p.gamma31);
    let (a, l) = (p.omega_r, p.omega_l);
    let w13 = p.delta_small - p.delta_l;
    let d32 = p.delta_r - p.delta_l + p.delta_small;

    let mut m = Mat8::zeros();
    let mut b = Vec8::zeros();

    // populations
    m[(P22, P22)] = -2.0 * g21;
    m[(P22, V12)] = -2.0 * a;
    m[(P33, P33)] = -2.0 * g31;
    m[(P33, V13)] = -2.0 * l;

    // rho12
    m[(U12, U12)] = -g21;
    m[(U12, V12)] = p.delta_r;
    m[(U12, V32)] = -l;
    m[(V12, V12)] = -g21;
    m[(V12, U12)] = -p.delta_r;
    m[(V12, P22)] = 2.0 * a;
    m[(V12, P33)] = a;
    m[(V12, U32)] = l;
    b[V12] = -a;

    // rho13
    m[(U13, U13)] = -g31;
    m[(U13, V13)] = -w13;
    m[(U13, V32)] = a;
    m[(V13, V13)] = -g31;
    m[(V13, U13)] = w13;
    m[(V13, P22)] = l;
    m[(V13, P33)] = 2.0 * l;
    m[(V13, U32)] = a;
    b[V13] = -l;

    // rho32
    m[(U32, U32)] = -(g21 + g31);
    m[(U32, V32)] = d32;
    m[(U32, V12)] = -l;
    m[(U32, V13)] = -a;
    m[(V32, V32)] = -(g21 + g31);
    m[(V32, U32)] = -d32;
    m[(V32, U12)] = l;
    m[(V32, U13)] = -a;

    if p.kc > 0.0 {
        let k = p.cross_damping();
        let (s, c) = p.phi.sin_cos();
        for row in [P22, P33] {
            m[(row, U32)] -= 2.0 * k * c;
            m[(row, V32)] += 2.0 * k * s;
        }
        m[(U12, U13)] -= k * c;
        m[(U12, V13)] -= k * s;
        m[(V12, V13)] -= k * c;
        m[(V12, U13)] += k * s;

        m[(U13, U12)] -= k * c;
        m[(U13, V12)] += k * s;
        m[(V13, V12)] -= k * c;
        m[(V13, U12)] -= k * s;

        m[(U32, P22)] -= k * c;
        m[(U32, P33)] -= k * c;
        m[(V32, P22)] += k * s;
        m[(V32, P33)] += k * s;
    }

    Liouvillian {
        matrix: m,
        offset: b,
    }
}

impl Liouvillian {
    /// Recovers `A` and `b` from any affine equations of motion by probing
    /// with the zero vector and the unit vectors.
    pub fn probe<E: EquationsOfMotion + ?Sized>(eom: &E, p: &SystemParams) -> Liouvillian {
        let offset = to_vec8(&eom.derivative(p, &BlochVector::from_array([0.0; 8])));
        let mut matrix = Mat8::zeros();
        for j in 0..8 {
            let mut e = [0.0; 8];
            e[j] = 1.0;
            let col = to_vec8(&eom.derivative(p, &BlochVector::from_array(e))) - offset;
            matrix.set_column(j, &col);
        }
        Liouvillian { matrix, offset }
    }

    pub fn apply(&self, v: &BlochVector) -> BlochVector {
        from_vec8(&(self.matrix * to_vec8(v) + self.offset))
    }

    /// Singular values, descending.
    pub fn singular_values(&self) -> [f64; 8] {
        let sv = self.matrix.singular_values();
        let mut out: [f64; 8] = std::array::from_fn(|i| sv[i]);
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Solves `A v = -b` after checking that `A` is not singular.
    pub fn solve(&self) -> Result<SteadyStateReport> {
        let sv = self.singular_values();
        let smallest = [sv[7], sv[6]];
        if !(sv[7] > DEGENERACY_RATIO * sv[0]) {
            return Err(Error::DegenerateLiouvillian {
                smallest_singular_values: smallest,
            });
        }
        let x = self
            .matrix
            .lu()
            .solve(&(-self.offset))
            .ok_or(Error::DegenerateLiouvillian {
                smallest_singular_values: smallest,
            })?;
        let state = from_vec8(&x);
        let residual = self.apply(&state).max_abs();
        Ok(SteadyStateReport {
            state,
            residual,
            smallest_singular_values: Some(smallest),
        })
    }
}

/// A unique stationary state together with its solve diagnostics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SteadyStateReport {
    pub state: BlochVector,
    /// `||A v + b||_inf` at the returned state.
    pub residual: f64,
    /// Smallest and second-smallest singular values of `A`, when the solver
    /// computed them.
    pub smallest_singular_values: Option<[f64; 2]>,
}

impl SteadyStateReport {
    pub fn density_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_bloch(&self.state)
    }
}

/// Checks that a candidate stationary state is a physical density matrix.
pub(crate) fn check_physical(state: &BlochVector) -> Result<()> {
    let values = eigenvalues_hermitian3(&DensityMatrix::from_bloch(state))?;
    if values[2] < -PSD_SLACK {
        return Err(Error::PositivityViolation {
            min_eigenvalue: values[2],
        });
    }
    Ok(())
}

/// Unique stationary state of the model, or `DegenerateLiouvillian` when the
/// generator is singular.
pub fn solve_steady(p: &SystemParams) -> Result<SteadyStateReport> {
    p.validate()?;
    let report = build_liouvillian(p).solve()?;
    if report.residual > RESIDUAL_TOL {
        return Err(Error::NotConverged {
            residual: report.residual,
        });
    }
    check_physical(&report.state)?;
    Ok(report)
}

/// `||rhs(p, v)||_inf`, the stationarity residual of an arbitrary state.
pub fn stationarity_residual(p: &SystemParams, v: &BlochVector) -> f64 {
    rhs(p, v).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SgcBloch;
    use crate::state::von_neumann_entropy;
    use std::f64::consts::PI;

    fn generic() -> SystemParams {
        SystemParams {
            gamma21: 1.3,
            gamma31: 0.8,
            omega_r: 0.6,
            omega_l: 0.35,
            delta_r: 1.5,
            delta_l: -0.7,
            delta_small: 0.2,
            phi: 2.3,
            kc: 0.7,
        }
    }

    #[test]
    fn bare_decay_structure() {
        let p = SystemParams {
            omega_r: 0.0,
            omega_l: 0.0,
            gamma21: 1.5,
            gamma31: 0.5,
            ..SystemParams::default()
        };
        let l = build_liouvillian(&p);
        assert_eq!(l.offset, Vec8::zeros());
        assert_eq!(l.matrix[(0, 0)], -3.0);
        assert_eq!(l.matrix[(1, 1)], -1.0);
        for j in 1..8 {
            assert_eq!(l.matrix[(0, j)], 0.0);
        }
        for j in (0..8).filter(|&j| j != 1) {
            assert_eq!(l.matrix[(1, j)], 0.0);
        }
    }

    #[test]
    fn explicit_matches_probed() {
        let p = generic();
        let explicit = build_liouvillian(&p);
        let probed = Liouvillian::probe(&SgcBloch, &p);
        let diff = (explicit.matrix - probed.matrix).amax();
        assert!(diff <= 1e-14, "{diff}");
        assert!((explicit.offset - probed.offset).amax() <= 1e-15);
    }

    #[test]
    fn phase_free_without_interference() {
        let a = SystemParams {
            kc: 0.0,
            ..generic()
        };
        let b = SystemParams { phi: 0.4, ..a };
        assert_eq!(build_liouvillian(&a), build_liouvillian(&b));
    }

    #[test]
    fn no_fields_relaxes_to_ground() {
        let p = SystemParams {
            omega_r: 0.0,
            omega_l: 0.0,
            kc: 0.5,
            ..SystemParams::default()
        };
        let r = solve_steady(&p).unwrap();
        assert!(r.state.max_abs() <= 1e-15);
        let s = von_neumann_entropy(&r.density_matrix()).unwrap();
        assert_eq!(s.nats(), 0.0);
    }

    #[test]
    fn full_interference_at_opposite_phase_is_degenerate() {
        for omega in [0.01, 0.1, 0.5, 1.0] {
            let p = SystemParams {
                kc: 1.0,
                phi: PI,
                omega_r: omega,
                omega_l: omega,
                ..SystemParams::default()
            };
            let err = solve_steady(&p).unwrap_err();
            assert!(
                matches!(err, Error::DegenerateLiouvillian { .. }),
                "omega {omega}: {err}"
            );
        }
    }

    #[test]
    fn independent_decay_closed_form() {
        // ρ22 = Ω²(1+Ω²)/(Ω²+(1+2Ω²)²) for equal resonant fields, no interference
        let o: f64 = 0.1;
        let p = SystemParams {
            omega_r: o,
            omega_l: o,
            ..SystemParams::default()
        };
        let r = solve_steady(&p).unwrap();
        let o2 = o * o;
        let expected = o2 * (1.0 + o2) / (o2 + (1.0 + 2.0 * o2).powi(2));
        assert!((r.state.p22 - expected).abs() <= 1e-12);
        assert!((r.state.p33 - expected).abs() <= 1e-12);
        assert!(r.residual <= RESIDUAL_TOL);
    }
}
