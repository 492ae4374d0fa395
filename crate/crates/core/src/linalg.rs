//! Dense complex matrices for the small Hilbert spaces of a two-wing Bell
//! experiment: single qubits (2), the photon pair or the generator pair (4),
//! and the full photons-plus-generators space (16).

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::DensityOperator;

/// Residual allowed when validating Hermiticity, trace and positivity.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Largest side length produced anywhere in the crate.
pub const MAX_DIM: usize = 16;

const ALLOWED_DIMS: [usize; 4] = [2, 4, 8, 16];

/// Square complex matrix stored densely in row-major order.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if ALLOWED_DIMS.contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidDimension(dim))
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return Err(Error::MalformedData {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Ok(m)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.data[i * m.dim + i] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    /// Rank-one operator `|v><v|`.
    pub fn outer(v: &[Complex64]) -> Result<Self> {
        let dim = v.len();
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for a in v {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Complex64]> {
        self.data.chunks(self.dim)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.data[j * n + i].conj());
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Trace of `self * other` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<Complex64> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        Ok(acc)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let n = self.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        Ok(Self { dim: n, data })
    }

    /// Kronecker product; entry `(i*b + k, j*b + l)` is `self(i,j) * other(k,l)`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (da, db) = (self.dim, other.dim);
        let dim = da * db;
        if dim > MAX_DIM {
            return Err(Error::DimensionOverflow {
                left: da,
                right: db,
            });
        }
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..da {
            for j in 0..da {
                let a = self.data[i * da + j];
                for k in 0..db {
                    for l in 0..db {
                        data[(i * db + k) * dim + (j * db + l)] = a * other.data[k * db + l];
                    }
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_dim(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Largest entry-wise modulus of `self - self^dagger`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let r = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(r);
            }
        }
        worst
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual > VALIDATION_TOL {
            Err(Error::NonHermitian { residual })
        } else {
            Ok(())
        }
    }

    /// Eigenvalues of a Hermitian matrix in ascending order.
    ///
    /// The `n x n` Hermitian `A + iB` is embedded as the real symmetric
    /// `2n x 2n` block matrix `[[A, -B], [B, A]]`, whose spectrum is that of
    /// the original with every eigenvalue doubled, and diagonalized with
    /// cyclic Jacobi rotations.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        self.ensure_hermitian()?;
        let n = self.dim;
        let m = 2 * n;
        let mut s = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                // symmetrize so the embedding is exactly symmetric
                let z = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                s[i * m + j] = z.re;
                s[(i + n) * m + (j + n)] = z.re;
                s[i * m + (j + n)] = -z.im;
                s[(i + n) * m + j] = z.im;
            }
        }
        jacobi_symmetric(&mut s, m);
        let mut eig: Vec<f64> = (0..m).map(|i| s[i * m + i]).collect();
        eig.sort_by(|a, b| a.total_cmp(b));
        Ok(eig
            .chunks(2)
            .map(|pair| 0.5 * (pair[0] + pair[1]))
            .collect())
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        } else {
            Ok(())
        }
    }
}

/// Cyclic Jacobi sweeps on a dense symmetric matrix, in place. On return
/// the diagonal holds the eigenvalues.
fn jacobi_symmetric(a: &mut [f64], n: usize) {
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: f64 = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum::<f64>() + off;
        if off <= f64::EPSILON * f64::EPSILON * scale || off == 0.0 {
            return;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.rows() {
            let cells: Vec<String> = row
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

fn zip_with(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    op: impl Fn(Complex64, Complex64) -> Complex64,
) -> ComplexMatrix {
    assert_eq!(a.dim, b.dim, "dimension mismatch in element-wise operation");
    ComplexMatrix {
        dim: a.dim,
        data: a
            .data
            .iter()
            .zip(&b.data)
            .map(|(x, y)| op(*x, *y))
            .collect(),
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
            .expect("dimension mismatch in matrix product")
    }
}

/// `Tr(state * observable)` for a validated state and a Hermitian observable.
pub fn expectation(state: &ComplexMatrix, observable: &ComplexMatrix) -> Result<f64> {
    if state.dim() != observable.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: observable.dim(),
        });
    }
    observable.ensure_hermitian()?;
    real_trace(state, observable)
}

/// Real part of `Tr(a * b)`, rejecting any imaginary residue above tolerance.
pub(crate) fn real_trace(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let t = a.trace_product(b)?;
    if t.im.abs() >= VALIDATION_TOL {
        return Err(Error::NumericIntegrity { imag: t.im });
    }
    Ok(t.re)
}

/// Checks Hermiticity, unit trace and positivity, in that order.
pub fn validate_density(m: ComplexMatrix) -> Result<DensityOperator> {
    validate_density_labeled(m, "")
}

pub(crate) fn validate_density_labeled(m: ComplexMatrix, label: &str) -> Result<DensityOperator> {
    m.ensure_hermitian()?;
    let trace = m.trace();
    if (trace.re - 1.0).abs() > VALIDATION_TOL {
        return Err(Error::NonUnitTrace { trace: trace.re });
    }
    let min_eigenvalue = m.hermitian_eigenvalues()?[0];
    if min_eigenvalue <= -VALIDATION_TOL {
        return Err(Error::NotPositive { min_eigenvalue });
    }
    Ok(DensityOperator::from_validated(m, label))
}

/// Pauli Z.
pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[1.0, -1.0]).expect("2x2")
}

/// Pauli X.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

/// Pauli Y.
pub fn pauli_y() -> ComplexMatrix {
    let i = Complex64::new(0.0, 1.0);
    let o = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_vec(2, vec![o, -i, i, o]).expect("2x2")
}
