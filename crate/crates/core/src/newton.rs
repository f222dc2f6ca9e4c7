//! Outer Newton iteration 0 ∈ F(xₖ) + F'(xₖ)(xₖ₊₁ − xₖ) + T(xₖ₊₁) and the
//! diagnostics that compare its iterates against a majorant sequence.

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{LinalgError, Vector};
use crate::majorant::{
    self, MajorantConditionReport, MajorantError, MajorantFunction, RadiusReport, SamplingGrid,
};
use crate::monotone::{MonotoneOperator, OperatorError};
use crate::sampling;
use crate::smooth::SmoothMap;
use crate::subproblem::{self, LinearizedInclusion, StepError, StepOptions};

/// Largest admissible violation of the majorant condition before
/// verification refuses to run.
pub const CONDITION_TOL: f64 = 1e-8;

/// A run counts as having come back to x* when it converged and ends this
/// close to it.
pub const BASIN_DISTANCE_TOL: f64 = 1e-8;

/// Distances below this are rounding noise for rate estimates.
pub const ORDER_NOISE_FLOOR: f64 = 1e3 * f64::EPSILON;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewtonError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, NewtonError>;

/// F, T, the radius κ of the ball around x* where F is defined, and x* when
/// it is known.
#[derive(Clone)]
pub struct ProblemInstance {
    pub map: Arc<dyn SmoothMap>,
    pub operator: MonotoneOperator,
    pub kappa: f64,
    pub solution: Option<Vector>,
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("dim", &self.map.dim())
            .field("operator", &self.operator)
            .field("kappa", &self.kappa)
            .field("solution", &self.solution)
            .finish()
    }
}

impl ProblemInstance {
    pub fn new(
        map: Arc<dyn SmoothMap>,
        operator: MonotoneOperator,
        kappa: f64,
        solution: Option<Vector>,
    ) -> Result<Self> {
        let n = map.dim();
        if operator.dim() != n {
            return Err(NewtonError::InvalidProblem(format!(
                "operator has dimension {} but F has dimension {n}",
                operator.dim()
            )));
        }
        if !(kappa > 0.0) {
            return Err(NewtonError::InvalidProblem(format!("κ must be positive, got {kappa}")));
        }
        if let Some(x) = &solution {
            if x.dim() != n {
                return Err(NewtonError::InvalidProblem(format!(
                    "solution has dimension {} but F has dimension {n}",
                    x.dim()
                )));
            }
        }
        Ok(Self {
            map,
            operator,
            kappa,
            solution,
        })
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Natural residual with λ = 1.
    pub fn residual(&self, x: &Vector) -> Result<f64> {
        let f_val = self.map.eval(x)?;
        Ok(subproblem::natural_residual(&f_val, x, &self.operator, 1.0)?)
    }

    fn require_solution(&self) -> Result<&Vector> {
        self.solution
            .as_ref()
            .ok_or_else(|| NewtonError::PreconditionViolated("the solution x* is not known".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveConfig {
    pub outer_tol: f64,
    pub inner_tol: f64,
    pub max_outer: usize,
    pub inner_max_iter: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-12,
            inner_tol: subproblem::DEFAULT_INNER_TOL,
            max_outer: 50,
            inner_max_iter: subproblem::DEFAULT_INNER_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    StepFailed(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterates: Vec<Vector>,
    pub residuals: Vec<f64>,
    /// ‖xₖ − x*‖ when x* is known.
    pub distances: Option<Vec<f64>>,
    /// Majorant sequence tₖ with t₀ = ‖x₀ − x*‖.
    pub majorant_sequence: Option<Vec<f64>>,
    /// tₖ₊₁/tₖ², one entry per step.
    pub ratio_majorant: Option<Vec<Option<f64>>>,
    /// ‖xₖ₊₁ − x*‖/‖xₖ − x*‖², one entry per step.
    pub ratio_empirical: Option<Vec<Option<f64>>>,
    /// f''(t₀)/(2|f'(t₀)|)
    pub ratio_bound: Option<f64>,
    pub radii: Option<RadiusReport>,
    pub inner_iterations: Vec<usize>,
    pub status: SolveStatus,
}

impl SolveReport {
    /// Number of Newton steps taken.
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn final_iterate(&self) -> &Vector {
        self.iterates.last().expect("x0 is always recorded")
    }

    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("x0 is always recorded")
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Runs Newton from x0 until the natural residual is at most `outer_tol`.
pub fn solve(p: &ProblemInstance, x0: &Vector, cfg: &SolveConfig) -> Result<SolveReport> {
    solve_with_majorant(p, x0, cfg, None)
}

/// Like [`solve`], additionally attaching the majorant sequence and ratio
/// caps when both x* and f are available and 0 < ‖x0 − x*‖ < ρ.
pub fn solve_with_majorant(
    p: &ProblemInstance,
    x0: &Vector,
    cfg: &SolveConfig,
    f: Option<&MajorantFunction>,
) -> Result<SolveReport> {
    if x0.dim() != p.dim() {
        return Err(NewtonError::InvalidProblem(format!(
            "x0 has dimension {} but F has dimension {}",
            x0.dim(),
            p.dim()
        )));
    }
    if !(cfg.outer_tol > 0.0 && cfg.inner_tol > 0.0) {
        return Err(NewtonError::InvalidProblem("tolerances must be positive".into()));
    }

    let mut iterates = vec![x0.clone()];
    let mut residuals = vec![p.residual(x0)?];
    let mut inner_iterations = Vec::new();
    let opts = StepOptions {
        tol: cfg.inner_tol,
        max_iter: cfg.inner_max_iter,
        ..StepOptions::default()
    };

    let mut status = SolveStatus::MaxIter;
    let mut x = x0.clone();
    loop {
        let residual = *residuals.last().unwrap();
        if residual <= cfg.outer_tol {
            status = SolveStatus::Converged;
            break;
        }
        if inner_iterations.len() >= cfg.max_outer {
            break;
        }
        match newton_step(p, &x, residual, &opts) {
            Ok((next, inner)) => match p.residual(&next) {
                Ok(r) if r.is_finite() => {
                    inner_iterations.push(inner);
                    residuals.push(r);
                    iterates.push(next.clone());
                    x = next;
                }
                Ok(_) | Err(_) => {
                    status = SolveStatus::StepFailed("residual is not finite".into());
                    break;
                }
            },
            Err(reason) => {
                status = SolveStatus::StepFailed(reason);
                break;
            }
        }
    }

    let mut report = SolveReport {
        iterates,
        residuals,
        distances: None,
        majorant_sequence: None,
        ratio_majorant: None,
        ratio_empirical: None,
        ratio_bound: None,
        radii: None,
        inner_iterations,
        status,
    };
    if let Some(xstar) = &p.solution {
        let d = report
            .iterates
            .iter()
            .map(|x| x.distance(xstar))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        report.ratio_empirical = Some(step_ratios(&d));
        report.distances = Some(d);
    }
    if let Some(f) = f {
        let radii = f.radii(p.kappa)?;
        report.radii = Some(radii);
        if let Some(d) = &report.distances {
            let t0 = d[0];
            if t0 > 0.0 && t0 < radii.rho {
                let t = f.sequence(t0, report.steps())?;
                report.ratio_majorant = Some(step_ratios(&t));
                report.ratio_bound = Some(f.ratio_bound(t0)?);
                report.majorant_sequence = Some(t);
            }
        }
    }
    Ok(report)
}

/// One outer step from x, where `residual` is the natural residual at x.
///
/// The subproblem is solved to inner_tol·min(1, residual²), but not below a
/// floor, so the outer iteration stays quadratic down to the last step. The floor
/// 16ε(1 + ‖x‖ + ‖F(x)‖) is about where the subproblem residual stops being
/// computable; if the tightened solve still stalls it is redone at inner_tol.
fn newton_step(
    p: &ProblemInstance,
    x: &Vector,
    residual: f64,
    opts: &StepOptions,
) -> std::result::Result<(Vector, usize), String> {
    let g = p.map.eval(x).map_err(|e| e.to_string())?;
    let a = p.map.jacobian(x).map_err(|e| e.to_string())?;
    let inclusion = LinearizedInclusion {
        residual: &g,
        jacobian: &a,
        point: x,
        operator: &p.operator,
    };
    let floor = 16.0 * f64::EPSILON * (1.0 + x.norm() + g.norm());
    let forced = StepOptions {
        tol: opts.tol.min((opts.tol * (residual * residual).min(1.0)).max(floor)),
        ..opts.clone()
    };
    let attempt = subproblem::solve_step_with(&inclusion, &forced).or_else(|e| match e {
        StepError::MaxIterExceeded { .. } if forced.tol < opts.tol => {
            subproblem::solve_step_with(&inclusion, opts)
        }
        other => Err(other),
    });
    match attempt {
        Ok(step) => Ok((step.y, step.iterations)),
        Err(e @ StepError::NotStronglyMonotone { .. }) => Err(format!("positivity lost: {e}")),
        Err(e) => Err(e.to_string()),
    }
}

/// s[k+1]/s[k]² for each consecutive pair, `None` where s[k] = 0.
fn step_ratios(s: &[f64]) -> Vec<Option<f64>> {
    s.windows(2)
        .map(|w| (w[0] > 0.0).then(|| w[1] / (w[0] * w[0])))
        .collect()
}

/// Comparison slack 1e-10·(1 + t) absorbing inner-solver inexactness.
pub fn comparison_slack(t: f64) -> f64 {
    1e-10 * (1.0 + t)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// min over k of (bound − measured). A check passes while every
    /// margin stays above −slack.
    pub worst_margin: f64,
    pub worst_step: Option<usize>,
    pub checked: usize,
}

impl CheckOutcome {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            worst_margin: f64::INFINITY,
            worst_step: None,
            checked: 0,
        }
    }

    /// Records measured ≤ bound + slack at step k.
    fn record(&mut self, k: usize, measured: f64, bound: f64, slack: f64) {
        let margin = bound - measured;
        self.checked += 1;
        if !(margin + slack >= 0.0) {
            self.passed = false;
        }
        if !(margin >= self.worst_margin) {
            self.worst_margin = margin;
            self.worst_step = Some(k);
        }
    }

    /// Records measured < bound at step k, with no slack.
    fn record_strict(&mut self, k: usize, measured: f64, bound: f64) {
        self.record(k, measured, bound, 0.0);
        if !(measured < bound) {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub t0: f64,
    pub radii: RadiusReport,
    pub ratio_bound: Option<f64>,
    pub condition: MajorantConditionReport,
    pub solve: SolveReport,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

pub const CHECK_DOMINATION: &str = "distance_below_majorant";
pub const CHECK_STEP_BOUND: &str = "per_step_quadratic_bound";
pub const CHECK_RATIO_CAP: &str = "majorant_ratio_cap";
pub const CHECK_DECREASE: &str = "strict_decrease";
pub const CHECK_GEOMETRIC: &str = "geometric_decay";

/// Runs Newton from x0 with t₀ = ‖x0 − x*‖ and checks, for every k,
///
/// * ‖xₖ − x*‖ ≤ tₖ
/// * ‖xₖ₊₁ − x*‖ ≤ (tₖ₊₁/tₖ²)‖xₖ − x*‖²
/// * tₖ₊₁/tₖ² ≤ f''(t₀)/(2|f'(t₀)|)
/// * ‖xₖ₊₁ − x*‖ < ‖xₖ − x*‖ (or already at noise level)
/// * ‖xₖ − x*‖ ≤ t₀(t₁/t₀)^{2ᵏ−1}
///
/// each with slack 1e-10·(1 + tₖ).
pub fn verify_theorem(
    p: &ProblemInstance,
    f: &MajorantFunction,
    x0: &Vector,
    cfg: &SolveConfig,
) -> Result<TheoremReport> {
    verify_theorem_with_grid(p, f, x0, cfg, SamplingGrid::default())
}

pub fn verify_theorem_with_grid(
    p: &ProblemInstance,
    f: &MajorantFunction,
    x0: &Vector,
    cfg: &SolveConfig,
    grid: SamplingGrid,
) -> Result<TheoremReport> {
    let xstar = p.require_solution()?;
    let radii = f.radii(p.kappa)?;
    let t0 = x0.distance(xstar)?;
    if !(t0 < radii.r) {
        return Err(NewtonError::PreconditionViolated(format!(
            "t0 = ‖x0 − x*‖ = {t0} is not below the convergence radius r = {}",
            radii.r
        )));
    }
    let condition = majorant::check_majorant_condition(p.map.as_ref(), xstar, f, p.kappa, grid)?;
    if condition.max_violation > CONDITION_TOL {
        return Err(NewtonError::PreconditionViolated(format!(
            "majorant condition fails by {:e}",
            condition.max_violation
        )));
    }

    let solve = solve_with_majorant(p, x0, cfg, Some(f))?;
    let mut checks = vec![
        CheckOutcome::new(CHECK_DOMINATION),
        CheckOutcome::new(CHECK_STEP_BOUND),
        CheckOutcome::new(CHECK_RATIO_CAP),
        CheckOutcome::new(CHECK_DECREASE),
        CheckOutcome::new(CHECK_GEOMETRIC),
    ];
    let mut ratio_bound = None;
    if t0 > 0.0 {
        let d = solve.distances.as_ref().expect("x* is known");
        let t = solve.majorant_sequence.as_ref().expect("0 < t0 < r ≤ ρ");
        let cap = solve.ratio_bound.expect("0 < t0 < ν");
        ratio_bound = Some(cap);
        let decay = if t.len() > 1 { t[1] / t0 } else { 0.0 };
        for k in 0..d.len() {
            let eps = comparison_slack(t[k]);
            checks[0].record(k, d[k], t[k], eps);
            let geometric = t0 * decay.powf(2f64.powi(k as i32) - 1.0);
            checks[4].record(k, d[k], geometric, eps);
            if k + 1 == d.len() {
                break;
            }
            let eps_next = comparison_slack(t[k + 1]);
            if t[k] > 0.0 {
                let ratio = t[k + 1] / (t[k] * t[k]);
                checks[1].record(k, d[k + 1], ratio * d[k] * d[k], eps_next);
                checks[2].record(k, ratio, cap, eps);
            }
            if d[k + 1] > eps_next {
                checks[3].record_strict(k, d[k + 1], d[k]);
            } else {
                // already at noise level
                checks[3].record(k, d[k + 1], eps_next, 0.0);
            }
        }
    }
    let passed = solve.converged() && checks.iter().all(|c| c.passed);
    Ok(TheoremReport {
        t0,
        radii,
        ratio_bound,
        condition,
        solve,
        checks,
        passed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UniquenessReport {
    /// σ̄ − 1e-6, the radius actually sampled.
    pub radius: f64,
    pub samples: usize,
    /// Samples other than x* with zero natural residual.
    pub spurious: usize,
    /// Smallest natural residual divided by the distance to x*.
    pub min_residual_ratio: Option<f64>,
}

impl UniquenessReport {
    pub fn unique(&self) -> bool {
        self.spurious == 0
    }
}

pub const UNIQUENESS_MARGIN: f64 = 1e-6;

/// Samples B[x*, σ̄ − 1e-6] and counts points other than x* where the
/// natural residual vanishes. Finding none is evidence, not proof, that x*
/// is the only solution there.
pub fn check_uniqueness(
    p: &ProblemInstance,
    f: &MajorantFunction,
    samples: usize,
    seed: u64,
) -> Result<UniquenessReport> {
    let xstar = p.require_solution()?;
    let radius = f.radii(p.kappa)?.sigma_bar - UNIQUENESS_MARGIN;
    let mut report = UniquenessReport {
        radius,
        samples: 0,
        spurious: 0,
        min_residual_ratio: None,
    };
    if !(radius > 0.0) {
        return Ok(report);
    }
    let mut rng = sampling::rng(seed);
    for _ in 0..samples {
        let x = sampling::point_in_ball(&mut rng, xstar, radius);
        let dist = x.distance(xstar)?;
        report.samples += 1;
        if dist == 0.0 {
            continue;
        }
        let residual = p.residual(&x)?;
        if !(residual > 0.0) {
            report.spurious += 1;
        }
        let ratio = residual / dist;
        report.min_residual_ratio = Some(report.min_residual_ratio.map_or(ratio, |m| m.min(ratio)));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalRadius {
    pub directions: Vec<Vector>,
    pub radii: Vec<f64>,
    pub r_max: f64,
}

impl EmpiricalRadius {
    pub fn min(&self) -> f64 {
        self.radii.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Configuration used to decide whether a start point lies in the basin.
pub fn basin_config(cfg: &SolveConfig) -> SolveConfig {
    SolveConfig {
        max_outer: cfg.max_outer.max(100),
        ..*cfg
    }
}

/// Whether Newton started at x0 converges back to x*.
pub fn returns_to_solution(p: &ProblemInstance, x0: &Vector, cfg: &SolveConfig) -> Result<bool> {
    let xstar = p.require_solution()?;
    let report = solve(p, x0, cfg)?;
    Ok(report.converged() && report.final_iterate().distance(xstar)? <= BASIN_DISTANCE_TOL)
}

/// For `count` seeded unit directions d, the largest s ≤ r_max (found by
/// bisection to `bisect_tol`) such that Newton from x* + s·d returns to x*.
pub fn empirical_radius(
    p: &ProblemInstance,
    count: usize,
    r_max: f64,
    bisect_tol: f64,
    seed: u64,
    cfg: &SolveConfig,
) -> Result<EmpiricalRadius> {
    let directions = sampling::directions(seed, p.dim(), count);
    empirical_radius_along(p, directions, r_max, bisect_tol, cfg)
}

pub fn empirical_radius_along(
    p: &ProblemInstance,
    directions: Vec<Vector>,
    r_max: f64,
    bisect_tol: f64,
    cfg: &SolveConfig,
) -> Result<EmpiricalRadius> {
    let xstar = p.require_solution()?;
    if !(r_max > 0.0 && bisect_tol > 0.0) {
        return Err(NewtonError::InvalidProblem(
            "r_max and bisect_tol must be positive".into(),
        ));
    }
    let cfg = basin_config(cfg);
    let mut radii = Vec::with_capacity(directions.len());
    for d in &directions {
        let unit = d.scale(1.0 / d.norm())?;
        let converges = |s: f64| returns_to_solution(p, &xstar.axpy(s, &unit)?, &cfg);
        if converges(r_max)? {
            radii.push(r_max);
            continue;
        }
        let (mut lo, mut hi) = (0.0, r_max);
        while hi - lo > bisect_tol {
            let mid = 0.5 * (lo + hi);
            if converges(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        radii.push(lo);
    }
    Ok(EmpiricalRadius {
        directions,
        radii,
        r_max,
    })
}

/// E_F(x, y) = F(y) − [F(x) + F'(x)(y − x)].
pub fn linearization_error(map: &dyn SmoothMap, x: &Vector, y: &Vector) -> Result<Vector> {
    let linear = map.eval(x)?.add(&map.jacobian(x)?.apply(&y.sub(x)?)?)?;
    Ok(map.eval(y)?.sub(&linear)?)
}

/// Least-squares slope of log dₖ₊₁ against log dₖ over the last three
/// pairs with both distances above [`ORDER_NOISE_FLOOR`].
pub fn empirical_order(distances: &[f64]) -> Option<f64> {
    let pairs: Vec<(f64, f64)> = distances
        .windows(2)
        .filter(|w| w[0] > ORDER_NOISE_FLOOR && w[1] > ORDER_NOISE_FLOOR)
        .map(|w| (w[0].ln(), w[1].ln()))
        .collect();
    let tail = &pairs[pairs.len().saturating_sub(3)..];
    if tail.len() < 2 {
        return None;
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinearOperator;
    use crate::smooth::PolynomialMap;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn scalar_quadratic() -> ProblemInstance {
        let map = PolynomialMap::scalar(&[-1.0, 0.0, 1.0]).unwrap();
        ProblemInstance::new(Arc::new(map), MonotoneOperator::zero(1), 10.0, Some(v(&[1.0])))
            .unwrap()
    }

    fn affine_half_line() -> ProblemInstance {
        let map = PolynomialMap::scalar(&[1.0, 1.0]).unwrap();
        ProblemInstance::new(
            Arc::new(map),
            MonotoneOperator::nonnegative_orthant(1),
            10.0,
            Some(v(&[0.0])),
        )
        .unwrap()
    }

    #[test]
    fn scalar_newton_iterates() {
        let report = solve(&scalar_quadratic(), &v(&[1.2]), &SolveConfig::default()).unwrap();
        assert!(report.converged());
        let xs: Vec<f64> = report.iterates.iter().map(|x| x[0]).collect();
        assert_eq!(xs[0], 1.2);
        assert!((xs[1] - 1.0166666666666667).abs() < 1e-15);
        assert!((xs[2] - 1.0001366120218580).abs() < 1e-13);
        assert!((report.final_iterate()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn affine_vi_is_solved_in_one_step() {
        let report = solve(&affine_half_line(), &v(&[0.5]), &SolveConfig::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.steps(), 1);
        assert_eq!(report.final_iterate(), &v(&[0.0]));
        assert_eq!(report.final_residual(), 0.0);
    }

    #[test]
    fn starting_at_the_solution_takes_no_steps() {
        let report = solve(&scalar_quadratic(), &v(&[1.0]), &SolveConfig::default()).unwrap();
        assert!(report.converged());
        assert_eq!(report.steps(), 0);
    }

    #[test]
    fn lost_positivity_is_step_failed() {
        let report = solve(&scalar_quadratic(), &v(&[0.0]), &SolveConfig::default()).unwrap();
        assert!(matches!(report.status, SolveStatus::StepFailed(_)));
        let report = solve(&scalar_quadratic(), &v(&[-0.5]), &SolveConfig::default()).unwrap();
        assert!(matches!(report.status, SolveStatus::StepFailed(_)));
    }

    #[test]
    fn iteration_cap_is_max_iter() {
        let cfg = SolveConfig {
            max_outer: 2,
            ..SolveConfig::default()
        };
        let report = solve(&scalar_quadratic(), &v(&[3.0]), &cfg).unwrap();
        assert_eq!(report.status, SolveStatus::MaxIter);
        assert_eq!(report.steps(), 2);
    }

    #[test]
    fn verify_scalar_quadratic_is_tight() {
        let f = MajorantFunction::lipschitz(1.0).unwrap();
        let report =
            verify_theorem(&scalar_quadratic(), &f, &v(&[1.5]), &SolveConfig::default()).unwrap();
        assert!(report.passed, "{:#?}", report.checks);
        assert_eq!(report.ratio_bound, Some(1.0));
        let ratios = report.solve.ratio_majorant.as_ref().unwrap();
        assert!((ratios[0].unwrap() - 1.0).abs() < 1e-15);
        let cap = report.checks.iter().find(|c| c.name == CHECK_RATIO_CAP).unwrap();
        assert_eq!(cap.worst_margin, 0.0);
    }

    #[test]
    fn verify_rejects_start_outside_radius() {
        let f = MajorantFunction::lipschitz(1.0).unwrap();
        let err = verify_theorem(&scalar_quadratic(), &f, &v(&[1.7]), &SolveConfig::default());
        assert!(matches!(err, Err(NewtonError::PreconditionViolated(_))));
    }

    #[test]
    fn verify_rejects_invalid_majorant() {
        // K = 0.5 underestimates the true constant 1
        let f = MajorantFunction::lipschitz(0.5).unwrap();
        let err = verify_theorem(&scalar_quadratic(), &f, &v(&[1.5]), &SolveConfig::default());
        assert!(matches!(err, Err(NewtonError::PreconditionViolated(_))));
    }

    #[test]
    fn uniqueness_examples() {
        let f = MajorantFunction::lipschitz(1.0).unwrap();
        assert!(check_uniqueness(&scalar_quadratic(), &f, 500, 1).unwrap().unique());
        assert!(check_uniqueness(&affine_half_line(), &f, 500, 1).unwrap().unique());
        let empty = check_uniqueness(&scalar_quadratic(), &f, 0, 1).unwrap();
        assert!(empty.unique());
        assert_eq!(empty.samples, 0);
    }

    #[test]
    fn scalar_basin_boundary_is_zero() {
        let p = scalar_quadratic();
        let cfg = SolveConfig::default();
        let toward_zero = empirical_radius_along(&p, vec![v(&[-1.0])], 5.0, 1e-8, &cfg).unwrap();
        assert!((toward_zero.radii[0] - 1.0).abs() < 1e-8);
        let both = empirical_radius(&p, 2, 5.0, 1e-8, 0, &cfg).unwrap();
        assert_eq!(both.radii[0], 5.0);
        assert!(both.min() >= 2.0 / 3.0);
    }

    #[test]
    fn affine_basin_is_r_max() {
        let map = PolynomialMap::affine(
            LinearOperator::from_rows(&[vec![2.0, 1.0], vec![0.0, 1.0]]).unwrap(),
            v(&[-3.0, -1.0]),
        )
        .unwrap();
        let p = ProblemInstance::new(Arc::new(map), MonotoneOperator::zero(2), 10.0, Some(v(&[1.0, 1.0])))
            .unwrap();
        let r = empirical_radius(&p, 5, 4.0, 1e-6, 3, &SolveConfig::default()).unwrap();
        assert!(r.radii.iter().all(|&s| s == 4.0));
    }

    #[test]
    fn linearization_error_examples() {
        let p = scalar_quadratic();
        assert_eq!(linearization_error(p.map.as_ref(), &v(&[1.5]), &v(&[1.0])).unwrap(), v(&[0.25]));
        assert_eq!(linearization_error(p.map.as_ref(), &v(&[1.5]), &v(&[1.5])).unwrap(), v(&[0.0]));
        let affine = affine_half_line();
        assert_eq!(
            linearization_error(affine.map.as_ref(), &v(&[-2.0]), &v(&[7.0])).unwrap(),
            v(&[0.0])
        );
    }

    #[test]
    fn empirical_order_of_scalar_newton_is_two() {
        let report = solve(&scalar_quadratic(), &v(&[1.5]), &SolveConfig::default()).unwrap();
        let order = empirical_order(report.distances.as_ref().unwrap()).unwrap();
        assert!((1.8..=2.2).contains(&order), "order {order}");
        assert_eq!(empirical_order(&[1.0, 0.5]), None);
    }
}
