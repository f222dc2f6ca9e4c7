//! Smooth maps F: ℝⁿ → ℝⁿ with exact Jacobians.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, LinearOperator, Vector};
use crate::sampling;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("polynomial map has {found} rows of coefficients, expected {expected}")]
    CoefficientRows { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// A continuously differentiable map with exact Jacobian access.
pub trait SmoothMap: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &Vector) -> Result<Vector, LinalgError>;

    fn jacobian(&self, x: &Vector) -> Result<LinearOperator, LinalgError>;

    /// `order`-th derivative of a scalar map at `x`, when exact higher
    /// derivatives are available.
    fn scalar_derivative(&self, _x: f64, _order: usize) -> Option<f64> {
        None
    }

    /// Polynomial degree, if the map is a polynomial.
    fn polynomial_degree(&self) -> Option<usize> {
        None
    }
}

/// Separable polynomial map
///
/// ```text
/// Fᵢ(x) = (M x)ᵢ + qᵢ + Σ_{d ≥ 2} cᵢ,d (xᵢ − sᵢ)^d
/// ```
///
/// Affine maps are the special case with no coefficients. The nonlinear part
/// acts componentwise, so every higher derivative is a diagonal multilinear
/// map whose norm is the largest diagonal coefficient in magnitude.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolynomialMap", into = "RawPolynomialMap")]
pub struct PolynomialMap {
    linear: LinearOperator,
    offset: Vector,
    center: Vector,
    /// `coefficients[i][j]` multiplies (xᵢ − sᵢ)^(j + 2).
    coefficients: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPolynomialMap {
    matrix: LinearOperator,
    offset: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    center: Option<Vector>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    coefficients: Vec<Vec<f64>>,
}

impl TryFrom<RawPolynomialMap> for PolynomialMap {
    type Error = MapError;

    fn try_from(raw: RawPolynomialMap) -> Result<Self, MapError> {
        let n = raw.matrix.dim();
        let center = raw.center.unwrap_or_else(|| Vector::zeros(n));
        let coefficients = if raw.coefficients.is_empty() {
            vec![Vec::new(); n]
        } else {
            raw.coefficients
        };
        PolynomialMap::new(raw.matrix, raw.offset, center, coefficients)
    }
}

impl From<PolynomialMap> for RawPolynomialMap {
    fn from(map: PolynomialMap) -> Self {
        let zero_center = map.center.as_slice().iter().all(|&c| c == 0.0);
        let no_terms = map.coefficients.iter().all(Vec::is_empty);
        RawPolynomialMap {
            matrix: map.linear,
            offset: map.offset,
            center: (!zero_center).then_some(map.center),
            coefficients: if no_terms { Vec::new() } else { map.coefficients },
        }
    }
}

impl PolynomialMap {
    pub fn new(
        linear: LinearOperator,
        offset: Vector,
        center: Vector,
        coefficients: Vec<Vec<f64>>,
    ) -> Result<Self, MapError> {
        let n = linear.dim();
        for v in [&offset, &center] {
            if v.dim() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: v.dim(),
                }
                .into());
            }
        }
        if coefficients.len() != n {
            return Err(MapError::CoefficientRows {
                expected: n,
                found: coefficients.len(),
            });
        }
        if coefficients.iter().flatten().any(|c| !c.is_finite()) {
            return Err(LinalgError::NonFinite.into());
        }
        Ok(Self {
            linear,
            offset,
            center,
            coefficients,
        })
    }

    /// F(x) = M x + q.
    pub fn affine(linear: LinearOperator, offset: Vector) -> Result<Self, MapError> {
        let n = linear.dim();
        Self::new(linear, offset, Vector::zeros(n), vec![Vec::new(); n])
    }

    /// Scalar polynomial Σₖ aₖ xᵏ from ascending coefficients `[a₀, a₁, a₂, …]`.
    pub fn scalar(ascending: &[f64]) -> Result<Self, MapError> {
        let at = |k: usize| ascending.get(k).copied().unwrap_or(0.0);
        Self::new(
            LinearOperator::diagonal(&[at(1)])?,
            Vector::new(vec![at(0)])?,
            Vector::zeros(1),
            vec![ascending.iter().skip(2).copied().collect()],
        )
    }

    pub fn linear(&self) -> &LinearOperator {
        &self.linear
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    pub fn is_affine(&self) -> bool {
        self.coefficients.iter().flatten().all(|&c| c == 0.0)
    }

    /// Coefficient of the diagonal `order`-th derivative of component `i` at
    /// shift `d = xᵢ − sᵢ` (order ≥ 2).
    fn diagonal_derivative(&self, i: usize, d: f64, order: usize) -> f64 {
        self.coefficients[i]
            .iter()
            .enumerate()
            .map(|(j, &c)| (j + 2, c))
            .filter(|&(degree, _)| degree >= order)
            .map(|(degree, c)| {
                let falling: f64 = ((degree - order + 1)..=degree).map(|k| k as f64).product();
                c * falling * d.powi((degree - order) as i32)
            })
            .sum()
    }

    /// Norm of the `order`-th derivative at `x` as a multilinear map
    /// (order ≥ 2). Diagonal multilinear maps have norm max |coefficient|.
    pub fn derivative_norm(&self, x: &Vector, order: usize) -> Result<f64, LinalgError> {
        assert!(order >= 2, "derivative_norm is for order ≥ 2");
        let d = x.sub(&self.center)?;
        Ok((0..self.dim())
            .map(|i| self.diagonal_derivative(i, d[i], order).abs())
            .fold(0.0, f64::max))
    }
}

impl SmoothMap for PolynomialMap {
    fn dim(&self) -> usize {
        self.linear.dim()
    }

    fn eval(&self, x: &Vector) -> Result<Vector, LinalgError> {
        let d = x.sub(&self.center)?;
        let base = self.linear.apply(x)?.add(&self.offset)?;
        let out = (0..self.dim())
            .map(|i| {
                let terms: f64 = self.coefficients[i]
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| c * d[i].powi(j as i32 + 2))
                    .sum();
                base[i] + terms
            })
            .collect();
        Vector::new(out)
    }

    fn jacobian(&self, x: &Vector) -> Result<LinearOperator, LinalgError> {
        let d = x.sub(&self.center)?;
        let diag: Vec<f64> = (0..self.dim())
            .map(|i| {
                self.coefficients[i]
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| (j + 2) as f64 * c * d[i].powi(j as i32 + 1))
                    .sum()
            })
            .collect();
        self.linear.add(&LinearOperator::diagonal(&diag)?)
    }

    fn scalar_derivative(&self, x: f64, order: usize) -> Option<f64> {
        if self.dim() != 1 {
            return None;
        }
        let point = Vector::new(vec![x]).ok()?;
        match order {
            0 => self.eval(&point).ok().map(|v| v[0]),
            1 => self.jacobian(&point).ok().map(|j| j.get(0, 0)),
            _ => Some(self.diagonal_derivative(0, x - self.center[0], order)),
        }
    }

    fn polynomial_degree(&self) -> Option<usize> {
        let nonlinear = self
            .coefficients
            .iter()
            .filter_map(|row| row.iter().rposition(|&c| c != 0.0).map(|j| j + 2))
            .max();
        let linear = self.linear.rows().iter().flatten().any(|&a| a != 0.0);
        Some(nonlinear.unwrap_or(if linear { 1 } else { 0 }))
    }
}

impl fmt::Debug for PolynomialMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolynomialMap")
            .field("matrix", &self.linear)
            .field("offset", &self.offset)
            .field("center", &self.center)
            .field("coefficients", &self.coefficients)
            .finish()
    }
}

type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A map given by closures: `eval` returns F(x), `jacobian` returns F'(x)
/// row-major.
#[derive(Clone)]
pub struct ClosureMap {
    dim: usize,
    eval: Arc<VecFn>,
    jacobian: Arc<VecFn>,
}

impl ClosureMap {
    pub fn new(
        dim: usize,
        eval: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        jacobian: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            jacobian: Arc::new(jacobian),
        }
    }
}

impl SmoothMap for ClosureMap {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> Result<Vector, LinalgError> {
        if x.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        let out = Vector::new((self.eval)(x.as_slice()))?;
        if out.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: out.dim(),
            });
        }
        Ok(out)
    }

    fn jacobian(&self, x: &Vector) -> Result<LinearOperator, LinalgError> {
        if x.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: x.dim(),
            });
        }
        LinearOperator::new(self.dim, (self.jacobian)(x.as_slice()))
    }
}

impl fmt::Debug for ClosureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosureMap").field("dim", &self.dim).finish()
    }
}

/// Largest central-difference Jacobian error
/// ‖(F(x + h e) − F(x − h e))/(2h) − F'(x) e‖ over `samples` seeded points
/// x ∈ B[center, radius] and unit directions e.
pub fn jacobian_consistency(
    map: &dyn SmoothMap,
    center: &Vector,
    radius: f64,
    samples: usize,
    seed: u64,
    h: f64,
) -> Result<f64, LinalgError> {
    let mut rng = sampling::rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..samples {
        let x = sampling::point_in_ball(&mut rng, center, radius);
        let e = sampling::unit_direction(&mut rng, map.dim());
        let forward = map.eval(&x.axpy(h, &e)?)?;
        let backward = map.eval(&x.axpy(-h, &e)?)?;
        let fd = forward.sub(&backward)?.scale(0.5 / h)?;
        let exact = map.jacobian(&x)?.apply(&e)?;
        worst = worst.max(fd.distance(&exact)?);
    }
    Ok(worst)
}
