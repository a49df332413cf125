//! Symmetric/antisymmetric ("dressed") basis of the excited doublet,
//! `|psi> = (|2> + |3>)/sqrt(2)`, `|phi> = (|2> - |3>)/sqrt(2)`.
//!
//! Two modes live here and are never mixed:
//!
//! * numeric: the bare-basis equations of motion, integrated and rotated into
//!   the dressed basis. Authoritative.
//! * formula: the transcribed dressed-basis equations of motion and the
//!   special-case closed forms for `kc = 1`, `phi = pi`, equal fields,
//!   kept verbatim. These are known to disagree with the numeric
//!   mode (see `KNOWN_DEVIATIONS.md`); they are kept for reproduction only.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::dynamics::{evolve_with, IntegrationOptions, SgcBloch, SystemParams};
use crate::error::Result;
use crate::state::{eigenvalues_hermitian3, entropy_of_spectrum, DensityMatrix};

const ONE: usize = 0;
const PSI: usize = 1;
const PHI: usize = 2;

/// Labels of the dressed basis, in storage order.
pub const DRESSED_LABELS: [&str; 3] = ["1", "psi", "phi"];

/// Density matrix (or its time derivative) in the basis `{|1>, |psi>, |phi>}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedBasisMatrix(pub Matrix3<Complex64>);

impl DressedBasisMatrix {
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn rho11(&self) -> f64 {
        self.0[(ONE, ONE)].re
    }

    pub fn rho_psipsi(&self) -> f64 {
        self.0[(PSI, PSI)].re
    }

    pub fn rho_phiphi(&self) -> f64 {
        self.0[(PHI, PHI)].re
    }

    pub fn rho_1psi(&self) -> Complex64 {
        self.0[(ONE, PSI)]
    }

    pub fn rho_1phi(&self) -> Complex64 {
        self.0[(ONE, PHI)]
    }

    pub fn rho_psiphi(&self) -> Complex64 {
        self.0[(PSI, PHI)]
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }
}

/// The real orthogonal, symmetric, involutive change of basis. Row `k` is
/// the bra of dressed state `k` in bare components.
pub fn dressed_unitary() -> Matrix3<Complex64> {
    let h = Complex64::from(FRAC_1_SQRT_2);
    let (z, o) = (Complex64::from(0.0), Complex64::from(1.0));
    Matrix3::new(o, z, z, z, h, h, z, h, -h)
}

/// `U rho U^dagger`.
pub fn to_dressed(rho: &DensityMatrix) -> DressedBasisMatrix {
    let u = dressed_unitary();
    DressedBasisMatrix(u * rho.0 * u.adjoint())
}

/// Inverse of [`to_dressed`].
pub fn from_dressed(m: &DressedBasisMatrix) -> DensityMatrix {
    let u = dressed_unitary();
    DensityMatrix::from_matrix(u.adjoint() * m.0 * u)
}

/// Equations of motion in the bare basis as a complex-linear map on all nine
/// entries of a general 3x3 matrix (no Hermiticity or trace assumed).
///
/// On Hermitian unit-trace inputs this coincides with
/// [`crate::dynamics::rhs`]; it exists so the dressed-basis equations can be
/// compared coefficient by coefficient.
pub fn bare_generator(p: &SystemParams, rho: &Matrix3<Complex64>) -> Matrix3<Complex64> {
    let i = Complex64::i();
    let (g21, g31) = (p.gamma21, p.gamma31);
    let (om_r, om_l) = (p.omega_r, p.omega_l);
    let k = p.cross_damping();
    let e_plus = Complex64::from_polar(1.0, p.phi);
    let e_minus = e_plus.conj();
    let r = |a: usize, b: usize| rho[(a - 1, b - 1)];

    let d22 = -2.0 * g21 * r(2, 2) + i * om_r * (r(1, 2) - r(2, 1))
        - k * (r(2, 3) * e_minus + r(3, 2) * e_plus);
    let d33 = -2.0 * g31 * r(3, 3) + i * om_l * (r(1, 3) - r(3, 1))
        - k * (r(2, 3) * e_minus + r(3, 2) * e_plus);
    let d12 =
        -(g21 + i * p.delta_r) * r(1, 2) + i * om_r * (r(2, 2) - r(1, 1)) + i * om_l * r(3, 2)
            - k * r(1, 3) * e_minus;
    let d21 = -(g21 - i * p.delta_r) * r(2, 1)
        - i * om_r * (r(2, 2) - r(1, 1))
        - i * om_l * r(2, 3)
        - k * r(3, 1) * e_plus;
    let d13 = -(g31 - i * (p.delta_small - p.delta_l)) * r(1, 3)
        + i * om_l * (r(3, 3) - r(1, 1))
        + i * om_r * r(2, 3)
        - k * r(1, 2) * e_plus;
    let d31 = -(g31 + i * (p.delta_small - p.delta_l)) * r(3, 1)
        - i * om_l * (r(3, 3) - r(1, 1))
        - i * om_r * r(3, 2)
        - k * r(2, 1) * e_minus;
    let d32 = -(g21 + g31 + i * (p.delta_r - p.delta_l + p.delta_small)) * r(3, 2)
        + i * om_l * r(1, 2)
        - i * om_r * r(3, 1)
        - k * (r(2, 2) + r(3, 3)) * e_minus;
    let d23 = -(g21 + g31 - i * (p.delta_r - p.delta_l + p.delta_small)) * r(2, 3)
        - i * om_l * r(2, 1)
        + i * om_r * r(1, 3)
        - k * (r(2, 2) + r(3, 3)) * e_plus;
    let d11 = -(d22 + d33);

    Matrix3::new(d11, d12, d13, d21, d22, d23, d31, d32, d33)
}

/// Transcribed dressed-basis equations of motion, term for term.
///
/// Only the upper triangle and the two excited populations are given; the
/// lower triangle is filled by conjugation and `d11 = -(d_psipsi + d_phiphi)`.
pub fn dressed_rhs_eq9(p: &SystemParams, m: &DressedBasisMatrix) -> DressedBasisMatrix {
    let i = Complex64::i();
    let (g21, g31) = (p.gamma21, p.gamma31);
    let k = p.cross_damping();
    let (sin, cos) = p.phi.sin_cos();
    let dd = p.delta_r - p.delta_l;
    let ds = p.delta_r + p.delta_l;
    let sum = p.omega_r + p.omega_l;
    let diff = p.omega_r - p.omega_l;
    let x = |a: usize, b: usize| m.0[(a, b)];

    let d_psipsi = -(g21 + g31 + 2.0 * k * cos) * x(PSI, PSI)
        - ((g21 + g31 + i * dd) / 2.0 + i * k * sin) * x(PSI, PHI)
        + (-(g21 + g31 - i * dd) / 2.0 + i * k * sin) * x(PHI, PSI)
        + i * sum / SQRT_2 * (x(ONE, PSI) - x(PSI, ONE));

    let d_phiphi = (-g21 - g31 + 2.0 * k * cos) * x(PHI, PHI)
        - ((g21 + g31 - i * dd) / 2.0 + i * k * sin) * x(PHI, PSI)
        + (-(g21 + g31 + i * dd) / 2.0 + i * k * sin) * x(PSI, PHI)
        + i * diff / SQRT_2 * (x(ONE, PHI) - x(PHI, ONE));

    let d_psiphi = (-(g21 - g31 + i * dd) / 2.0 + i * k * sin) * x(PSI, PSI)
        + (-(g21 - g31 - i * dd) / 2.0 + i * k * sin) * x(PHI, PHI)
        - (g21 + g31) * x(PSI, PHI)
        + i * sum / SQRT_2 * x(ONE, PHI)
        - i * diff / SQRT_2 * x(PSI, ONE);

    let d_1psi = -((g21 + g31 + i * ds) / 2.0 + k * cos) * x(ONE, PSI)
        - ((g21 - g31 + i * dd) / 2.0 + i * k * sin) * x(ONE, PHI)
        + i * sum * (x(PSI, PSI) - x(ONE, ONE))
        + i * diff * x(PHI, PSI);

    let d_1phi = -((g21 - g31 + i * dd) / 2.0 + i * k * sin) * x(ONE, PHI)
        + (-(g21 + g31 + i * ds) / 2.0 + k * cos) * x(ONE, PSI)
        + i * diff * (x(PHI, PHI) - x(ONE, ONE))
        + i * sum * x(PSI, PHI);

    let d_11 = -(d_phiphi + d_psipsi);

    DressedBasisMatrix(Matrix3::new(
        d_11,
        d_1psi,
        d_1phi,
        d_1psi.conj(),
        d_psipsi,
        d_psiphi,
        d_1phi.conj(),
        d_psiphi.conj(),
        d_phiphi,
    ))
}

/// Time derivative of the numeric model, rotated into the dressed basis.
pub fn dressed_rhs_numeric(p: &SystemParams, rho: &DensityMatrix) -> DressedBasisMatrix {
    let d = crate::dynamics::rhs(p, &rho.to_bloch());
    let mut dm = DensityMatrix::from_bloch(&d).0;
    dm[(0, 0)] = Complex64::from(-(d.p22 + d.p33));
    to_dressed(&DensityMatrix::from_matrix(dm))
}

/// Largest entrywise difference between the transcribed dressed equations and
/// the rotated numeric derivative at one state.
pub fn conjugation_residual(p: &SystemParams, rho: &DensityMatrix) -> f64 {
    let a = dressed_rhs_numeric(p, rho);
    let b = dressed_rhs_eq9(p, &to_dressed(rho));
    (a.0 - b.0).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// One coefficient of the dressed equations that differs from the rotated
/// bare-basis generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoefficientDeviation {
    /// Derivative being compared, `(row, col)` in dressed storage order.
    pub output: (usize, usize),
    /// Matrix element the coefficient multiplies.
    pub input: (usize, usize),
    pub transcribed: Complex64,
    pub rotated: Complex64,
}

impl CoefficientDeviation {
    pub fn magnitude(&self) -> f64 {
        (self.transcribed - self.rotated).norm()
    }
}

impl fmt::Display for CoefficientDeviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lbl = |(a, b): (usize, usize)| format!("{}{}", DRESSED_LABELS[a], DRESSED_LABELS[b]);
        write!(
            f,
            "d/dt rho_{} <- rho_{}: transcribed {:.6} vs rotated {:.6}",
            lbl(self.output),
            lbl(self.input),
            self.transcribed,
            self.rotated
        )
    }
}

/// Coefficient-by-coefficient comparison of the transcribed dressed equations
/// against `U G(U^dagger E U) U^dagger` for every matrix unit `E`, restricted
/// to the upper triangle and diagonal of the output (the rest follows by
/// conjugation).
pub fn eq9_coefficient_deviations(p: &SystemParams, tol: f64) -> Vec<CoefficientDeviation> {
    let u = dressed_unitary();
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            let mut unit = Matrix3::<Complex64>::zeros();
            unit[(a, b)] = Complex64::from(1.0);
            let transcribed = dressed_rhs_eq9(p, &DressedBasisMatrix(unit)).0;
            let rotated = u * bare_generator(p, &(u.adjoint() * unit * u)) * u.adjoint();
            for r in 0..3 {
                for c in r..3 {
                    let dev = CoefficientDeviation {
                        output: (r, c),
                        input: (a, b),
                        transcribed: transcribed[(r, c)],
                        rotated: rotated[(r, c)],
                    };
                    if dev.magnitude() > tol {
                        out.push(dev);
                    }
                }
            }
        }
    }
    out
}

/// Phase of the special case's population oscillation, `4 omega0 t / sqrt(2)`.
fn rabi_angle(omega0: f64, t: f64) -> f64 {
    4.0 * omega0 * t / SQRT_2
}

/// Angular frequency of the special-case closed form, `4 omega0 / sqrt(2)`.
pub fn eq11_angular_frequency(omega0: f64) -> f64 {
    4.0 * omega0 / SQRT_2
}

/// Angular frequency implied by the reduced two-level equations as transcribed
/// (couplings `2 omega0 / sqrt(2)` and `2 omega0`), `2 sqrt(2 sqrt(2)) omega0`.
pub fn reduced_equations_angular_frequency(omega0: f64) -> f64 {
    2.0 * (2.0 * omega0 / SQRT_2 * 2.0 * omega0).sqrt()
}

/// Special-case closed form (`kc = 1`, `phi = pi`, equal fields, ground-state
/// start), as transcribed. Formula mode: positivity is not guaranteed.
pub fn special_case_trajectory_eq11(omega0: f64, t: f64) -> DressedBasisMatrix {
    let theta = rabi_angle(omega0, t);
    let (sin, cos) = theta.sin_cos();
    let z = Complex64::from(0.0);
    let rho_1psi = Complex64::new(0.0, -SQRT_2 / 2.0) * sin;
    DressedBasisMatrix(Matrix3::new(
        Complex64::from(0.5 * (1.0 + cos)),
        rho_1psi,
        z,
        rho_1psi.conj(),
        Complex64::from(0.5 * (1.0 - cos)),
        z,
        z,
        z,
        z,
    ))
}

/// `(lambda_plus, lambda_minus)` as transcribed for the special case. Formula
/// mode: `lambda_minus` goes negative between the turning points.
pub fn special_case_eigenvalues_eq12(omega0: f64, t: f64) -> (f64, f64) {
    let theta = rabi_angle(omega0, t);
    let (sin, cos) = theta.sin_cos();
    let root = (cos * cos + SQRT_2 * sin * sin).sqrt();
    ((1.0 + root) / 2.0, (1.0 - root) / 2.0)
}

/// Entropy of the closed-form two-eigenvalue spectrum, `None` where an
/// eigenvalue is negative and the logarithm is undefined.
pub fn eq12_entropy(lambdas: (f64, f64)) -> Option<f64> {
    let (p, m) = lambdas;
    if p < 0.0 || m < 0.0 {
        return None;
    }
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    Some(h(p) + h(m))
}

/// Parameters of the non-stationary special case.
pub fn special_case_params(omega0: f64) -> SystemParams {
    SystemParams {
        gamma21: 1.0,
        gamma31: 1.0,
        omega_r: omega0,
        omega_l: omega0,
        delta_r: 0.0,
        delta_l: 0.0,
        delta_small: 0.0,
        phi: PI,
        kc: 1.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedSample {
    pub t: f64,
    pub matrix: DressedBasisMatrix,
    pub entropy: f64,
    pub min_eigenvalue: f64,
    pub trace: Complex64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DressedTrajectory {
    pub samples: Vec<DressedSample>,
}

/// Numeric evolution of the special case from `|1><1|`, sampled in the
/// dressed basis.
pub fn special_case_numeric(
    omega0: f64,
    t_end: f64,
    opts: IntegrationOptions,
) -> Result<DressedTrajectory> {
    let p = special_case_params(omega0);
    let traj = evolve_with(
        &SgcBloch,
        &p,
        &crate::state::BlochVector::GROUND,
        t_end,
        opts,
    )?;
    let samples = traj
        .samples
        .iter()
        .map(|s| {
            let rho = DensityMatrix::from_bloch(&s.state);
            let values = eigenvalues_hermitian3(&rho)?;
            Ok(DressedSample {
                t: s.t,
                matrix: to_dressed(&rho),
                entropy: entropy_of_spectrum(&values)?.nats(),
                min_eigenvalue: values[2],
                trace: rho.trace(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DressedTrajectory { samples })
}

/// Summary of the ground-population oscillation in a sampled trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillationReport {
    /// From the mean spacing of upward mean-crossings; `None` with fewer
    /// than two crossings.
    pub angular_frequency: Option<f64>,
    pub peak_to_peak: f64,
    pub first_cycle_amplitude: Option<f64>,
    pub last_cycle_amplitude: Option<f64>,
    pub cycles: usize,
    pub max_rho_phiphi: f64,
}

/// Zero-crossing analysis of `rho11(t)` about its mean.
pub fn analyze_oscillation(traj: &DressedTrajectory) -> OscillationReport {
    let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let y: Vec<f64> = traj.samples.iter().map(|s| s.matrix.rho11()).collect();
    let max_rho_phiphi = traj
        .samples
        .iter()
        .map(|s| s.matrix.rho_phiphi())
        .fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let mean = y.iter().sum::<f64>() / y.len().max(1) as f64;

    let mut crossings = Vec::new();
    let mut crossing_idx = Vec::new();
    for k in 1..y.len() {
        let (a, b) = (y[k - 1] - mean, y[k] - mean);
        if a < 0.0 && b >= 0.0 {
            let frac = a / (a - b);
            crossings.push(t[k - 1] + frac * (t[k] - t[k - 1]));
            crossing_idx.push(k);
        }
    }

    let angular_frequency = (crossings.len() >= 2).then(|| {
        let span = crossings[crossings.len() - 1] - crossings[0];
        2.0 * PI * (crossings.len() - 1) as f64 / span
    });
    let cycle_amp = |w: &[usize]| {
        let seg = &y[w[0]..w[1]];
        let (lo, hi) = seg
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        hi - lo
    };
    let cycles: Vec<f64> = crossing_idx.windows(2).map(cycle_amp).collect();

    OscillationReport {
        angular_frequency,
        peak_to_peak: hi - lo,
        first_cycle_amplitude: cycles.first().copied(),
        last_cycle_amplitude: cycles.last().copied(),
        cycles: cycles.len(),
        max_rho_phiphi,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{von_neumann_entropy, BlochVector};

    fn sample_state() -> DensityMatrix {
        DensityMatrix::from_bloch(&BlochVector {
            p22: 0.3,
            p33: 0.2,
            re12: 0.1,
            im12: -0.15,
            re13: 0.05,
            im13: 0.12,
            re32: -0.08,
            im32: 0.02,
        })
    }

    #[test]
    fn ground_state_is_unchanged() {
        let g = DensityMatrix::diagonal([1.0, 0.0, 0.0]);
        assert_eq!(to_dressed(&g).0, g.0);
    }

    #[test]
    fn level_two_splits_evenly() {
        let m = to_dressed(&DensityMatrix::diagonal([0.0, 1.0, 0.0]));
        for (i, j) in [(PSI, PSI), (PHI, PHI), (PSI, PHI), (PHI, PSI)] {
            assert!((m.0[(i, j)] - Complex64::from(0.5)).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_invariants() {
        let rho = sample_state();
        let m = to_dressed(&rho);
        let back = from_dressed(&m);
        assert!((back.0 - rho.0).iter().all(|z| z.norm() <= 1e-14));
        let s0 = von_neumann_entropy(&rho).unwrap().nats();
        let s1 = von_neumann_entropy(&DensityMatrix::from_matrix(m.0))
            .unwrap()
            .nats();
        assert!((s0 - s1).abs() <= 1e-12);
        assert!((m.trace() - rho.trace()).norm() <= 1e-15);
    }

    #[test]
    fn generator_matches_rhs_on_states() {
        let p = SystemParams {
            gamma21: 1.2,
            gamma31: 0.7,
            omega_r: 0.4,
            omega_l: 0.3,
            delta_r: 0.5,
            delta_l: -0.2,
            delta_small: 0.1,
            phi: 0.9,
            kc: 0.8,
        };
        let rho = sample_state();
        let g = bare_generator(&p, &rho.0);
        let d = crate::dynamics::rhs(&p, &rho.to_bloch());
        let mut expected = DensityMatrix::from_bloch(&d).0;
        expected[(0, 0)] = Complex64::from(-(d.p22 + d.p33));
        assert!((g - expected).iter().all(|z| z.norm() <= 1e-15));
    }

    #[test]
    fn dark_combination_damping_cancels() {
        let p = special_case_params(0.1);
        let k = p.cross_damping();
        let coeff = p.gamma21 + p.gamma31 + 2.0 * k * p.phi.cos();
        assert_eq!(coeff, 0.0);
    }

    #[test]
    fn transcribed_equations_vanish_on_undriven_ground_state() {
        let p = SystemParams {
            omega_r: 0.0,
            omega_l: 0.0,
            kc: 0.7,
            phi: 1.0,
            ..SystemParams::default()
        };
        let g = to_dressed(&DensityMatrix::diagonal([1.0, 0.0, 0.0]));
        assert_eq!(dressed_rhs_eq9(&p, &g).0, Matrix3::zeros());
    }

    #[test]
    fn closed_form_turning_points() {
        let omega0 = 0.1;
        assert_eq!(
            special_case_trajectory_eq11(omega0, 0.0).0,
            DensityMatrix::diagonal([1.0, 0.0, 0.0]).0
        );
        let half = PI / eq11_angular_frequency(omega0);
        let m = special_case_trajectory_eq11(omega0, half);
        assert!((m.rho_psipsi() - 1.0).abs() < 1e-15);
        assert!(m.rho11().abs() < 1e-15);
        assert!(m.rho_1psi().norm() < 1e-15);

        let quarter = half / 2.0;
        let m = special_case_trajectory_eq11(omega0, quarter);
        assert!((m.rho11() - 0.5).abs() < 1e-15);
        assert!((m.rho_psipsi() - 0.5).abs() < 1e-15);
        assert!((m.rho_1psi().norm() - SQRT_2 / 2.0).abs() < 1e-15);
        // coherence exceeds sqrt(rho11 rho_psipsi)
        assert!(m.rho_1psi().norm_sqr() > m.rho11() * m.rho_psipsi());
    }

    #[test]
    fn closed_form_eigenvalues() {
        let omega0 = 0.2;
        assert_eq!(special_case_eigenvalues_eq12(omega0, 0.0), (1.0, 0.0));
        let half = PI / eq11_angular_frequency(omega0);
        let (p, m) = special_case_eigenvalues_eq12(omega0, half);
        assert!((p - 1.0).abs() < 1e-15 && m.abs() < 1e-15);
        let (p, m) = special_case_eigenvalues_eq12(omega0, half / 2.0);
        let q = 2.0_f64.powf(0.25);
        assert!((p - (1.0 + q) / 2.0).abs() < 1e-12);
        assert!((m - (1.0 - q) / 2.0).abs() < 1e-12);
        assert!(eq12_entropy((p, m)).is_none());
        assert_eq!(eq12_entropy((1.0, 0.0)), Some(0.0));
    }

    #[test]
    fn frequency_candidates() {
        assert!((eq11_angular_frequency(1.0) - 2.0 * SQRT_2).abs() < 1e-15);
        assert!((reduced_equations_angular_frequency(1.0) - 2.0_f64.powf(1.75)).abs() < 1e-14);
    }

    #[test]
    fn numeric_special_case_stays_in_bright_doublet() {
        let traj = special_case_numeric(
            0.5,
            20.0,
            IntegrationOptions {
                dt: 1e-3,
                stride: 10,
            },
        )
        .unwrap();
        let rep = analyze_oscillation(&traj);
        assert!(rep.max_rho_phiphi <= 1e-8);
        assert!(rep.peak_to_peak > 0.99);
        let w = rep.angular_frequency.unwrap();
        assert!((w - eq11_angular_frequency(0.5)).abs() < 1e-3 * w);
    }
}
