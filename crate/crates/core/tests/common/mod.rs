//! Oracles and random draws shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vee_sgc::dynamics::SystemParams;
use vee_sgc::state::{BlochVector, DensityMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Random Hermitian matrix with entries in the unit square.
pub fn random_hermitian(rng: &mut ChaCha8Rng) -> Matrix3<Complex64> {
    let g = Matrix3::from_fn(|_, _| complex(rng));
    (g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random full-rank density matrix, `G G^dagger / tr`.
pub fn random_density(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = Matrix3::from_fn(|_, _| complex(rng));
    let m = g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::from_matrix(m / tr)
}

/// Random Bloch vector, physical or not.
pub fn random_bloch(rng: &mut ChaCha8Rng) -> BlochVector {
    BlochVector::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
}

/// Parameters in the physicality-suite ranges: `gamma = 1`, field strengths
/// up to `gamma`, detunings up to `5 gamma`, any interference and phase.
pub fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        gamma21: 1.0,
        gamma31: 1.0,
        omega_r: rng.gen_range(0.0..=1.0),
        omega_l: rng.gen_range(0.0..=1.0),
        delta_r: rng.gen_range(-5.0..=5.0),
        delta_l: rng.gen_range(-5.0..=5.0),
        delta_small: 0.0,
        phi: rng.gen_range(0.0..TAU),
        kc: rng.gen_range(0.0..=1.0),
    }
}

/// Generic parameters with unequal decay rates and a nonzero relative
/// frequency, for algebraic identities that hold everywhere.
pub fn random_generic_params(rng: &mut ChaCha8Rng) -> SystemParams {
    SystemParams {
        gamma21: rng.gen_range(0.2..2.0),
        gamma31: rng.gen_range(0.2..2.0),
        omega_r: rng.gen_range(0.0..2.0),
        omega_l: rng.gen_range(0.0..2.0),
        delta_r: rng.gen_range(-5.0..5.0),
        delta_l: rng.gen_range(-5.0..5.0),
        delta_small: rng.gen_range(-1.0..1.0),
        phi: rng.gen_range(0.0..TAU),
        kc: rng.gen_range(0.0..=1.0),
    }
}

/// Eigenvalues of a Hermitian 3x3 matrix from its characteristic
/// polynomial: trigonometric roots of the depressed cubic, polished by
/// Newton steps on the polynomial. Descending order.
pub fn char_poly_eigenvalues(m: &Matrix3<Complex64>) -> [f64; 3] {
    let a = |i: usize, j: usize| m[(i, j)];
    let tr = (a(0, 0) + a(1, 1) + a(2, 2)).re;
    let minors = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0))
        + (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0))
        + (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1));
    let det = (a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
        - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)))
    .re;
    let (c2, c1, c0) = (tr, minors.re, det);

    // lambda = x + s turns lambda^3 - c2 lambda^2 + c1 lambda - c0 into
    // x^3 + p x + q
    let s = c2 / 3.0;
    let p = c1 - 3.0 * s * s;
    let q = -2.0 * s * s * s + c1 * s - c0;
    let mut roots = if p.abs() < 1e-300 {
        [s + (-q).cbrt(); 3]
    } else {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        [0.0, 1.0, 2.0].map(|k| s + r * (theta - 2.0 * PI * k / 3.0).cos())
    };

    let poly = |x: f64| ((x - c2) * x + c1) * x - c0;
    let slope = |x: f64| (3.0 * x - 2.0 * c2) * x + c1;
    for root in roots.iter_mut() {
        for _ in 0..3 {
            let d = slope(*root);
            if d.abs() > 1e-6 {
                *root -= poly(*root) / d;
            }
        }
    }
    roots.sort_by(|x, y| y.total_cmp(x));
    roots
}
