//! One Newton step: find y with 0 ∈ g + A(y − x) + T(y).
//!
//! When the symmetric part of A is positive definite with smallest
//! eigenvalue c > 0, the map y ↦ g + A(y − x) is c-strongly monotone and
//! L-Lipschitz (L = ‖A‖), so the inclusion has exactly one solution. For
//! T = 0 it is a dense linear solve; otherwise forward-backward splitting
//!
//! ```text
//! y ← J_{βT}(y − β(g + A(y − x))),   β = c/L²
//! ```
//!
//! contracts with factor q = √(1 − c²/L²). Iteration stops once the
//! subproblem's own natural residual (λ = 1) is at most the tolerance.

use thiserror::Error;

use crate::linalg::{self, LinalgError, LinearOperator, Vector};
use crate::monotone::{MonotoneOperator, OperatorError};

pub const DEFAULT_INNER_TOL: f64 = 1e-12;
pub const DEFAULT_INNER_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("symmetric part of the Jacobian is not positive definite (λ_min = {c:e})")]
    NotStronglyMonotone { c: f64 },
    #[error("forward-backward did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterExceeded { iterations: usize, residual: f64 },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The linearized inclusion 0 ∈ g + A(y − x) + T(y) at the point x.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedInclusion<'a> {
    /// g = F(x)
    pub residual: &'a Vector,
    /// A = F'(x)
    pub jacobian: &'a LinearOperator,
    pub point: &'a Vector,
    pub operator: &'a MonotoneOperator,
}

impl LinearizedInclusion<'_> {
    /// g + A(y − x)
    pub fn affine_part(&self, y: &Vector) -> Result<Vector, LinalgError> {
        self.residual.add(&self.jacobian.apply(&y.sub(self.point)?)?)
    }

    fn check_dims(&self) -> Result<(), LinalgError> {
        let n = self.point.dim();
        for found in [self.residual.dim(), self.jacobian.dim(), self.operator.dim()] {
            if found != n {
                return Err(LinalgError::DimensionMismatch { expected: n, found });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMethod {
    Direct,
    ForwardBackward { beta: f64, contraction: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepSolution {
    pub y: Vector,
    pub method: StepMethod,
    pub iterations: usize,
    /// Fixed-point residuals ‖yₖ − yₖ₊₁‖ of the forward-backward loop.
    pub residuals: Vec<f64>,
    /// λ_min of the symmetric part of A.
    pub strong_monotonicity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Use forward-backward even when T = 0.
    pub force_forward_backward: bool,
    /// Inner starting point; defaults to x.
    pub start: Option<Vector>,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_INNER_TOL,
            max_iter: DEFAULT_INNER_MAX_ITER,
            force_forward_backward: false,
            start: None,
        }
    }
}

pub fn solve_step(
    p: &LinearizedInclusion<'_>,
    tol: f64,
    max_iter: usize,
) -> Result<StepSolution, StepError> {
    solve_step_with(
        p,
        &StepOptions {
            tol,
            max_iter,
            ..StepOptions::default()
        },
    )
}

pub fn solve_step_with(
    p: &LinearizedInclusion<'_>,
    opts: &StepOptions,
) -> Result<StepSolution, StepError> {
    p.check_dims()?;
    let c = linalg::min_eigenvalue_sym(&linalg::symmetrize(p.jacobian))?;
    if c <= linalg::TOL_EIG {
        return Err(StepError::NotStronglyMonotone { c });
    }

    if p.operator.is_zero() && !opts.force_forward_backward {
        let y = p.point.sub(&p.jacobian.solve(p.residual)?)?;
        return Ok(StepSolution {
            y,
            method: StepMethod::Direct,
            iterations: 1,
            residuals: Vec::new(),
            strong_monotonicity: c,
        });
    }

    let lipschitz = linalg::operator_norm(p.jacobian)?;
    let beta = c / (lipschitz * lipschitz);
    let contraction = (1.0 - (c / lipschitz).powi(2)).max(0.0).sqrt();
    // At any point ‖R_β‖ ≤ max(1, β)·‖R_1‖ (‖R_λ‖ grows with λ, ‖R_λ‖/λ
    // shrinks), so the fixed-point step is a cheap filter before the λ = 1
    // residual is evaluated
    let gate = opts.tol * beta.max(1.0);

    let mut y = opts.start.clone().unwrap_or_else(|| p.point.clone());
    let mut residuals = Vec::new();
    for iteration in 1..=opts.max_iter {
        let forward = y.axpy(-beta, &p.affine_part(&y)?)?;
        let next = p.operator.resolvent(beta, &forward)?;
        let residual = next.distance(&y)?;
        residuals.push(residual);
        y = next;
        if residual <= gate && subproblem_residual(p, &y)? <= opts.tol {
            return Ok(StepSolution {
                y,
                method: StepMethod::ForwardBackward { beta, contraction },
                iterations: iteration,
                residuals,
                strong_monotonicity: c,
            });
        }
    }
    Err(StepError::MaxIterExceeded {
        iterations: opts.max_iter,
        residual: residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// Natural residual (λ = 1) of the linearized inclusion at y. For affine F
/// it equals the natural residual of F + T at y.
pub fn subproblem_residual(p: &LinearizedInclusion<'_>, y: &Vector) -> Result<f64, StepError> {
    Ok(natural_residual(&p.affine_part(y)?, y, p.operator, 1.0)?)
}

/// ‖x − J_{λT}(x − λ F(x))‖ / λ, which vanishes exactly when
/// 0 ∈ F(x) + T(x).
pub fn natural_residual(
    f_val: &Vector,
    x: &Vector,
    op: &MonotoneOperator,
    lambda: f64,
) -> Result<f64, OperatorError> {
    let projected = op.resolvent(lambda, &x.axpy(-lambda, f_val)?)?;
    Ok(x.distance(&projected)? / lambda)
}

/// Recovers an element t ∈ T(y') from the resolvent graph at
/// z = y − λ(g + A(y − x)) and returns ‖g + A(y − x) + t‖ together with
/// ‖y − y'‖. Both vanish at the exact step.
pub fn inclusion_certificate(
    p: &LinearizedInclusion<'_>,
    y: &Vector,
    lambda: f64,
) -> Result<(f64, f64), StepError> {
    let affine = p.affine_part(y)?;
    let z = y.axpy(-lambda, &affine)?;
    let (y_graph, t_val) = p.operator.graph_sample(lambda, &z)?;
    Ok((affine.add(&t_val)?.norm(), y.distance(&y_graph)?))
}
