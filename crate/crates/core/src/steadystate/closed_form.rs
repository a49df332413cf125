//! Closed-form weak-field stationary state for equal resonant fields and
//! equal decay rates, evaluated exactly as transcribed
//! (no algebraic simplification), plus its comparison with the numeric
//! solve.

use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;

use super::solve_steady;
use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Entrywise agreement required between the closed form and the numeric
/// stationary state.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Stationary density matrix for `gamma21 = gamma31 = 1`,
/// `delta_r = delta_l = 0` and `omega_r = omega_l = omega0`.
///
/// The closed form states `rho22 = rho33` and `rho12 = rho13`; both
/// equalities are built into the returned matrix.
pub fn analytic_steady_eq3(omega0: f64, phi: f64, kc: f64) -> Result<DensityMatrix> {
    let i = Complex64::i();
    let o2 = omega0 * omega0;
    let k2 = kc * kc;
    let c = phi.cos();
    let e_plus = Complex64::from_polar(1.0, phi);
    let e_minus = e_plus.conj();

    let den = kc * o2 * (7.0 + 4.0 * o2 + k2) * c
        - k2 * (k2 - 2.0 + 3.0 * o2)
        - o2
        - (1.0 + 2.0 * o2).powi(2);
    let den12 = 2.0 * kc * o2 * (7.0 + 4.0 * o2 + k2) * c
        - 2.0 * k2 * (k2 - 2.0 + 3.0 * o2)
        - 2.0 * o2
        - 2.0 * (1.0 + 2.0 * o2).powi(2);
    for d in [den, den12] {
        if d.abs() < DENOMINATOR_FLOOR {
            return Err(Error::DegenerateDenominator { magnitude: d.abs() });
        }
    }

    let rho22 = o2 * (kc * (2.0 + o2) * c - o2 - (1.0 + k2)) / den;
    let rho12 = -i
        * omega0
        * (kc * (2.0 * o2 * kc * c - (o2 + 2.0 * (k2 - 1.0))) * e_minus
            + kc * o2 * e_plus
            + 2.0 * ((k2 - 1.0) - o2))
        / den12;
    let rho23 = o2 * (o2 * kc * c - kc * e_plus * (kc * e_plus - 2.0) - (1.0 + o2)) / den;

    let rho11 = 1.0 - (rho22 + rho22);
    let rho13 = rho12;
    let r = Complex64::from;
    Ok(DensityMatrix::from_matrix(Matrix3::new(
        r(rho11),
        rho12,
        rho13,
        rho12.conj(),
        r(rho22),
        rho23,
        rho13.conj(),
        rho23.conj(),
        r(rho22),
    )))
}

/// Independent matrix elements compared between the two routes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixElement {
    Rho11,
    Rho22,
    Rho33,
    Rho12,
    Rho13,
    Rho23,
}

impl MatrixElement {
    pub const ALL: [MatrixElement; 6] = [
        MatrixElement::Rho11,
        MatrixElement::Rho22,
        MatrixElement::Rho33,
        MatrixElement::Rho12,
        MatrixElement::Rho13,
        MatrixElement::Rho23,
    ];

    pub fn index(self) -> (usize, usize) {
        match self {
            MatrixElement::Rho11 => (0, 0),
            MatrixElement::Rho22 => (1, 1),
            MatrixElement::Rho33 => (2, 2),
            MatrixElement::Rho12 => (0, 1),
            MatrixElement::Rho13 => (0, 2),
            MatrixElement::Rho23 => (1, 2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MatrixElement::Rho11 => "rho11",
            MatrixElement::Rho22 => "rho22",
            MatrixElement::Rho33 => "rho33",
            MatrixElement::Rho12 => "rho12",
            MatrixElement::Rho13 => "rho13",
            MatrixElement::Rho23 => "rho23",
        }
    }
}

impl fmt::Display for MatrixElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One matrix element where the closed form and the numeric solve disagree
/// by more than [`CLOSED_FORM_TOL`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormDeviation {
    pub omega0: f64,
    pub kc: f64,
    pub phi: f64,
    pub element: MatrixElement,
    pub numeric: Complex64,
    pub closed_form: Complex64,
}

impl ClosedFormDeviation {
    pub fn magnitude(&self) -> f64 {
        (self.numeric - self.closed_form).norm()
    }
}

/// Compares the closed form with `solve_steady` at one point and returns
/// every element that disagrees.
pub fn closed_form_deviations(omega0: f64, phi: f64, kc: f64) -> Result<Vec<ClosedFormDeviation>> {
    let p = SystemParams {
        gamma21: 1.0,
        gamma31: 1.0,
        omega_r: omega0,
        omega_l: omega0,
        delta_r: 0.0,
        delta_l: 0.0,
        delta_small: 0.0,
        phi,
        kc,
    };
    let numeric = solve_steady(&p)?.density_matrix();
    let analytic = analytic_steady_eq3(omega0, phi, kc)?;
    Ok(MatrixElement::ALL
        .iter()
        .filter_map(|&element| {
            let idx = element.index();
            let (n, a) = (numeric.0[idx], analytic.0[idx]);
            ((n - a).norm() > CLOSED_FORM_TOL).then_some(ClosedFormDeviation {
                omega0,
                kc,
                phi,
                element,
                numeric: n,
                closed_form: a,
            })
        })
        .collect())
}
