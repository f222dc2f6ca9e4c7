//! Finite-dimensional inner-product space primitives.
//!
//! [`Vector`] and [`LinearOperator`] are small dense types with hard
//! dimension checks. The symmetric eigensolver is a cyclic Jacobi sweep,
//! which is plenty for the problem sizes this crate targets and is fully
//! deterministic.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Off-diagonal tolerance of the Jacobi eigensolver, relative to the
/// Frobenius norm of the input. Also the threshold below which a smallest
/// eigenvalue is treated as zero.
pub const TOL_EIG: f64 = 1e-12;

/// Sweep cap of the Jacobi eigensolver.
pub const MAX_JACOBI_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("operator data of length {len} is not an n×n matrix")]
    NotSquare { len: usize },
    #[error("empty vectors and operators are not supported")]
    Empty,
    #[error("non-finite entry encountered")]
    NonFinite,
    #[error("operator is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps")]
    EigenNotConverged { sweeps: usize },
    #[error("operator is singular or indefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Singular { min_eigenvalue: f64 },
    #[error("‖B − I‖ = {distance} is not below 1")]
    NotContractive { distance: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(LinalgError::NonFinite)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// An element of ℝⁿ with finite entries.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(LinalgError::Empty);
        }
        check_finite(&entries)?;
        Ok(Self(entries))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "zero-dimensional vector");
        Self(vec![0.0; n])
    }

    /// The `i`-th standard basis vector of ℝⁿ.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Vector) -> Result<Vector> {
        self.zip_with(other, |a, b| a + alpha * b)
    }

    pub fn scale(&self, alpha: f64) -> Result<Vector> {
        Vector::new(self.0.iter().map(|a| alpha * a).collect())
    }

    pub fn distance(&self, other: &Vector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// Applies `f` entrywise, rejecting non-finite results.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Vector> {
        Vector::new(self.0.iter().map(|&a| f(a)).collect())
    }

    fn zip_with(&self, other: &Vector, f: impl Fn(f64, f64) -> f64) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Vector::new(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = LinalgError;

    fn try_from(entries: Vec<f64>) -> Result<Self> {
        Vector::new(entries)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

/// Dense n×n real matrix, stored row-major.
#[derive(Clone, PartialEq)]
pub struct LinearOperator {
    n: usize,
    data: Vec<f64>,
}

impl LinearOperator {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        if data.len() != n * n {
            return Err(LinalgError::NotSquare { len: data.len() });
        }
        check_finite(&data)?;
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(LinalgError::NotSquare {
                    len: n * (n - 1) + row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n]).expect("identity is finite")
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::new(n, data)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        check_dim(self.n, v.dim())?;
        let out = self
            .data
            .chunks(self.n)
            .map(|row| row.iter().zip(v.as_slice()).map(|(a, b)| a * b).sum())
            .collect();
        Vector::new(out)
    }

    /// The adjoint, which in a real inner-product space is the transpose.
    pub fn adjoint(&self) -> LinearOperator {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        LinearOperator { n, data }
    }

    pub fn add(&self, other: &LinearOperator) -> Result<LinearOperator> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &LinearOperator) -> Result<LinearOperator> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Result<LinearOperator> {
        LinearOperator::new(self.n, self.data.iter().map(|a| alpha * a).collect())
    }

    pub fn matmul(&self, other: &LinearOperator) -> Result<LinearOperator> {
        check_dim(self.n, other.n)?;
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        LinearOperator::new(n, data)
    }

    /// Largest |Aᵢⱼ − Aⱼᵢ|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i]).abs());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    fn zip_with(
        &self,
        other: &LinearOperator,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<LinearOperator> {
        check_dim(self.n, other.n)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| f(a, b))
            .collect();
        LinearOperator::new(self.n, data)
    }

    fn check_symmetric(&self) -> Result<()> {
        let asymmetry = self.asymmetry();
        if asymmetry > TOL_EIG * self.frobenius_norm().max(1.0) {
            Err(LinalgError::NotSymmetric { asymmetry })
        } else {
            Ok(())
        }
    }

    /// Solves `A y = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Vector) -> Result<Vector> {
        check_dim(self.n, rhs.dim())?;
        let n = self.n;
        let mut a = self.data.clone();
        let mut b = rhs.as_slice().to_vec();
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
                .expect("non-empty range");
            if a[pivot * n + col].abs() <= f64::EPSILON * scale * n as f64 {
                return Err(LinalgError::Singular {
                    min_eigenvalue: a[pivot * n + col],
                });
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                b.swap(pivot, col);
            }
            let p = a[col * n + col];
            for i in (col + 1)..n {
                let factor = a[i * n + col] / p;
                if factor == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[i * n + j] -= factor * a[col * n + j];
                }
                b[i] -= factor * b[col];
            }
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let tail: f64 = ((i + 1)..n).map(|j| a[i * n + j] * y[j]).sum();
            y[i] = (b[i] - tail) / a[i * n + i];
        }
        Vector::new(y)
    }

    /// Dense inverse, column by column.
    pub fn inverse(&self) -> Result<LinearOperator> {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for j in 0..n {
            let col = self.solve(&Vector::unit(n, j))?;
            for i in 0..n {
                data[i * n + j] = col[i];
            }
        }
        LinearOperator::new(n, data)
    }
}

impl fmt::Debug for LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

impl Serialize for LinearOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LinearOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        LinearOperator::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// The symmetric part ½(A + Aᵀ). Mirror entries are averaged so the result
/// is exactly symmetric.
pub fn symmetrize(a: &LinearOperator) -> LinearOperator {
    let n = a.n;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = a.data[i * n + i];
        for j in (i + 1)..n {
            let m = 0.5 * (a.data[i * n + j] + a.data[j * n + i]);
            data[i * n + j] = m;
            data[j * n + i] = m;
        }
    }
    LinearOperator { n, data }
}

/// Eigenvalues of a symmetric operator in ascending order.
///
/// Cyclic Jacobi: every sweep rotates away each off-diagonal pair in turn.
/// Stops once the off-diagonal Frobenius norm drops below
/// `TOL_EIG · ‖S‖_F`.
pub fn eigenvalues_sym(s: &LinearOperator) -> Result<Vec<f64>> {
    s.check_symmetric()?;
    let n = s.n;
    let mut a = symmetrize(s).data;
    let threshold = TOL_EIG * s.frobenius_norm();
    let off_norm = |a: &[f64]| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += 2.0 * a[i * n + j] * a[i * n + j];
            }
        }
        sum.sqrt()
    };

    let mut sweeps = 0;
    while off_norm(&a) > threshold {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(LinalgError::EigenNotConverged { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // tan of the rotation angle, smaller root for stability
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
            }
        }
    }

    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

pub fn min_eigenvalue_sym(s: &LinearOperator) -> Result<f64> {
    Ok(eigenvalues_sym(s)?[0])
}

pub fn max_eigenvalue_sym(s: &LinearOperator) -> Result<f64> {
    Ok(*eigenvalues_sym(s)?.last().expect("n ≥ 1"))
}

/// True iff ⟨Sx, x⟩ ≥ 0 up to `tol`, i.e. λ_min(S) ≥ −tol.
pub fn is_positive(s: &LinearOperator, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue_sym(s)? >= -tol)
}

/// ‖S⁻¹‖ = 1/λ_min(S) for symmetric positive definite S.
pub fn inverse_norm(s: &LinearOperator) -> Result<f64> {
    let min_eigenvalue = min_eigenvalue_sym(s)?;
    if min_eigenvalue <= TOL_EIG {
        return Err(LinalgError::Singular { min_eigenvalue });
    }
    Ok(1.0 / min_eigenvalue)
}

/// Spectral norm, computed as √λ_max(AᵀA).
pub fn operator_norm(a: &LinearOperator) -> Result<f64> {
    let gram = symmetrize(&a.adjoint().matmul(a)?);
    Ok(max_eigenvalue_sym(&gram)?.max(0.0).sqrt())
}

/// Upper bound 1/(1 − ‖B − I‖) on ‖B⁻¹‖, valid when ‖B − I‖ < 1.
pub fn banach_inverse_bound(b: &LinearOperator) -> Result<f64> {
    let distance = operator_norm(&b.sub(&LinearOperator::identity(b.dim()))?)?;
    if distance >= 1.0 {
        return Err(LinalgError::NotContractive { distance });
    }
    Ok(1.0 / (1.0 - distance))
}
