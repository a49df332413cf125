//! Atomic state: the 3x3 density matrix, its 8-component real
//! parametrisation, and the von Neumann entropy of its spectrum.
//!
//! Levels are indexed 1 (ground), 2 and 3 (excited doublet) in the physics
//! and 0, 1, 2 in the matrix storage.

use std::ops::{Add, Mul, Sub};

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entrywise Hermiticity tolerance accepted by the eigen-solver.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues in `[-CLAMP_WINDOW, 0)` are treated as roundoff and set to zero.
pub const CLAMP_WINDOW: f64 = 1e-9;

/// Independent real variables of the atomic equations of motion.
///
/// The ground population is not stored: `rho11 = 1 - (p22 + p33)`. The
/// remaining off-diagonal elements follow from Hermiticity, with
/// `rho23 = conj(rho32)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BlochVector {
    pub p22: f64,
    pub p33: f64,
    pub re12: f64,
    pub im12: f64,
    pub re13: f64,
    pub im13: f64,
    pub re32: f64,
    pub im32: f64,
}

impl BlochVector {
    pub const DIM: usize = 8;

    /// All population in `|1>`.
    pub const GROUND: BlochVector = BlochVector {
        p22: 0.0,
        p33: 0.0,
        re12: 0.0,
        im12: 0.0,
        re13: 0.0,
        im13: 0.0,
        re32: 0.0,
        im32: 0.0,
    };

    pub fn from_array(a: [f64; 8]) -> Self {
        BlochVector {
            p22: a[0],
            p33: a[1],
            re12: a[2],
            im12: a[3],
            re13: a[4],
            im13: a[5],
            re32: a[6],
            im32: a[7],
        }
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.p22, self.p33, self.re12, self.im12, self.re13, self.im13, self.re32, self.im32,
        ]
    }

    pub fn rho12(&self) -> Complex64 {
        Complex64::new(self.re12, self.im12)
    }

    pub fn rho13(&self) -> Complex64 {
        Complex64::new(self.re13, self.im13)
    }

    pub fn rho32(&self) -> Complex64 {
        Complex64::new(self.re32, self.im32)
    }

    pub fn rho11(&self) -> f64 {
        1.0 - (self.p22 + self.p33)
    }

    pub fn max_abs(&self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }
}

impl Add for BlochVector {
    type Output = BlochVector;

    fn add(self, rhs: BlochVector) -> BlochVector {
        let (a, b) = (self.to_array(), rhs.to_array());
        BlochVector::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;

    fn sub(self, rhs: BlochVector) -> BlochVector {
        let (a, b) = (self.to_array(), rhs.to_array());
        BlochVector::from_array(std::array::from_fn(|i| a[i] - b[i]))
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;

    fn mul(self, k: f64) -> BlochVector {
        let a = self.to_array();
        BlochVector::from_array(std::array::from_fn(|i| a[i] * k))
    }
}

/// Atomic density matrix in the bare basis {|1>, |2>, |3>}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(pub Matrix3<Complex64>);

impl DensityMatrix {
    /// Packs the independent variables into a Hermitian unit-trace matrix.
    pub fn from_bloch(v: &BlochVector) -> Self {
        let r = |x: f64| Complex64::new(x, 0.0);
        let rho12 = v.rho12();
        let rho13 = v.rho13();
        let rho32 = v.rho32();
        DensityMatrix(Matrix3::new(
            r(v.rho11()),
            rho12,
            rho13,
            rho12.conj(),
            r(v.p22),
            rho32.conj(),
            rho13.conj(),
            rho32,
            r(v.p33),
        ))
    }

    /// Reads the independent variables back out. Exact inverse of
    /// [`DensityMatrix::from_bloch`].
    pub fn to_bloch(&self) -> BlochVector {
        let m = &self.0;
        BlochVector {
            p22: m[(1, 1)].re,
            p33: m[(2, 2)].re,
            re12: m[(0, 1)].re,
            im12: m[(0, 1)].im,
            re13: m[(0, 2)].re,
            im13: m[(0, 2)].im,
            re32: m[(2, 1)].re,
            im32: m[(2, 1)].im,
        }
    }

    pub fn from_matrix(m: Matrix3<Complex64>) -> Self {
        DensityMatrix(m)
    }

    pub fn diagonal(d: [f64; 3]) -> Self {
        let mut m = Matrix3::zeros();
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(*x, 0.0);
        }
        DensityMatrix(m)
    }

    pub fn matrix(&self) -> &Matrix3<Complex64> {
        &self.0
    }

    /// `rho11 + (rho22 + rho33)`, summed in the order that makes the trace of
    /// a matrix built by `from_bloch` exactly one.
    pub fn trace(&self) -> Complex64 {
        let m = &self.0;
        m[(0, 0)] + (m[(1, 1)] + m[(2, 2)])
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let m = &self.0;
        let mut dev = 0.0_f64;
        for i in 0..3 {
            for j in i..3 {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        dev
    }
}

/// Von Neumann entropy in nats.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EntropyValue(pub f64);

impl EntropyValue {
    pub fn nats(self) -> f64 {
        self.0
    }
}

/// Spectrum and eigenvectors of a Hermitian 3x3 matrix, descending order.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: [f64; 3],
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: Matrix3<Complex64>,
}

/// Cyclic complex Jacobi diagonalisation.
///
/// Each rotation first strips the phase of the pivot element and then applies
/// the real symmetric Jacobi rotation, so the iteration converges
/// quadratically exactly as in the real case.
pub fn eigh3(rho: &DensityMatrix) -> Result<HermitianEigen> {
    let deviation = rho.hermiticity_deviation();
    if deviation > HERMITIAN_TOL || !deviation.is_finite() {
        return Err(Error::NonHermitianInput { deviation });
    }
    // work on the exactly Hermitian part
    let mut a = (rho.0 + rho.0.adjoint()) * Complex64::new(0.5, 0.0);
    let mut z = Matrix3::<Complex64>::identity();

    let scale = a.iter().fold(0.0_f64, |m, x| m.max(x.norm()));
    if scale == 0.0 {
        return Ok(HermitianEigen {
            values: [0.0; 3],
            vectors: z,
        });
    }

    for _sweep in 0..64 {
        let off: f64 = [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[(p, q)];
            let r = apq.norm();
            if r == 0.0 {
                continue;
            }
            let phase = apq / r;
            let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * r);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            let mut j = Matrix3::<Complex64>::identity();
            j[(p, p)] = Complex64::new(c, 0.0);
            j[(p, q)] = Complex64::new(s, 0.0);
            j[(q, p)] = -phase.conj() * s;
            j[(q, q)] = phase.conj() * c;

            a = j.adjoint() * a * j;
            a[(p, q)] = Complex64::new(0.0, 0.0);
            a[(q, p)] = Complex64::new(0.0, 0.0);
            z *= j;
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &k| a[(k, k)].re.total_cmp(&a[(i, i)].re));
    let values = order.map(|i| a[(i, i)].re);
    let mut vectors = Matrix3::zeros();
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &z.column(i));
    }
    Ok(HermitianEigen { values, vectors })
}

/// The three real eigenvalues, largest first.
pub fn eigenvalues_hermitian3(rho: &DensityMatrix) -> Result<[f64; 3]> {
    eigh3(rho).map(|e| e.values)
}

/// Entropy of a spectrum with the `0 ln 0 = 0` convention.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<EntropyValue> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -CLAMP_WINDOW {
        return Err(Error::PositivityViolation {
            min_eigenvalue: min,
        });
    }
    let s = values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .fold(0.0, |acc, x| acc + x);
    Ok(EntropyValue(s))
}

/// `S = -sum_j l_j ln l_j` over the eigenvalues of `rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<EntropyValue> {
    entropy_of_spectrum(&eigenvalues_hermitian3(rho)?)
}

pub fn populations(rho: &DensityMatrix) -> [f64; 3] {
    let m = rho.matrix();
    [m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re]
}
