//! Majorant functions and the scalar quantities derived from them.
//!
//! A majorant f: [0, R) → ℝ satisfies f(0) = 0, f'(0) = −1 and has a convex,
//! strictly increasing derivative. It controls how fast F' may vary around a
//! solution x*:
//!
//! ```text
//! ‖F̂'(x*)⁻¹‖ ‖F'(x) − F'(x* + τ(x − x*))‖ ≤ f'(‖x − x*‖) − f'(τ‖x − x*‖)
//! ```
//!
//! From f alone we get the convergence radius r, the uniqueness radius σ̄,
//! and the scalar Newton sequence tₖ₊₁ = |n_f(tₖ)| that dominates the
//! distances ‖xₖ − x*‖ of the Newton iterates.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, Vector};
use crate::sampling;
use crate::smooth::SmoothMap;

/// Absolute tolerance of the radius bisections.
pub const RADIUS_TOL: f64 = 1e-12;

/// Grid size for the h1/h2 sanity checks on custom majorants.
pub const VALIDATION_GRID: usize = 1024;

/// Below this t, φ(t) = f(t)/(t f'(t)) − 1 is replaced by f''(0) t / 2.
const PHI_TAYLOR_CUTOFF: f64 = 1e-8;

const H1_TOL: f64 = 1e-12;
const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MajorantError {
    #[error("invalid majorant: {0}")]
    InvalidMajorant(String),
    #[error("{what}: t = {t} is outside the admissible domain")]
    Domain { what: &'static str, t: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub type Result<T> = std::result::Result<T, MajorantError>;

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied majorant given by f, f', f'' on [0, R).
#[derive(Clone)]
pub struct CustomMajorant {
    value: Arc<ScalarFn>,
    derivative: Arc<ScalarFn>,
    second_derivative: Arc<ScalarFn>,
    domain_end: f64,
}

#[derive(Clone)]
pub enum MajorantKind {
    /// f(t) = K t²/2 − t on [0, ∞).
    Lipschitz { k: f64 },
    /// f(t) = t/(1 − γt) − 2t on [0, 1/γ).
    Smale { gamma: f64 },
    Custom(CustomMajorant),
}

impl fmt::Debug for MajorantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MajorantKind::Lipschitz { k } => write!(f, "Lipschitz {{ k: {k} }}"),
            MajorantKind::Smale { gamma } => write!(f, "Smale {{ gamma: {gamma} }}"),
            MajorantKind::Custom(c) => write!(f, "Custom {{ domain_end: {} }}", c.domain_end),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MajorantFunction {
    kind: MajorantKind,
}

/// Radii derived from a majorant and the radius κ of the ball on which the
/// majorant condition is known to hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    /// sup{t : f'(t) < 0}
    pub nu: f64,
    /// sup{t ∈ (0, ν) : f(t)/(t f'(t)) − 1 < 1}
    pub rho: f64,
    /// sup{0 < t < κ : f(t) < 0}
    pub sigma: f64,
    pub kappa: f64,
    /// Convergence radius min(κ, ρ).
    pub r: f64,
    /// Uniqueness radius min(r, σ).
    pub sigma_bar: f64,
}

impl MajorantFunction {
    pub fn lipschitz(k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(MajorantError::InvalidMajorant(format!(
                "Lipschitz constant must be positive, got {k}"
            )));
        }
        Ok(Self {
            kind: MajorantKind::Lipschitz { k },
        })
    }

    pub fn smale(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(MajorantError::InvalidMajorant(format!(
                "γ must be positive, got {gamma}"
            )));
        }
        Ok(Self {
            kind: MajorantKind::Smale { gamma },
        })
    }

    /// Wraps user-supplied f, f', f'' on [0, R). h1 and h2 are spot-checked
    /// on a grid; this filters typos, it does not prove anything.
    pub fn custom(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second_derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain_end: f64,
    ) -> Result<Self> {
        if !(domain_end.is_finite() && domain_end > 0.0) {
            return Err(MajorantError::InvalidMajorant(format!(
                "custom majorants need a finite positive domain end, got {domain_end}"
            )));
        }
        let f = Self {
            kind: MajorantKind::Custom(CustomMajorant {
                value: Arc::new(value),
                derivative: Arc::new(derivative),
                second_derivative: Arc::new(second_derivative),
                domain_end,
            }),
        };
        f.validate()?;
        Ok(f)
    }

    /// f(t) = −t + Σⱼ aⱼ t^(j+2), a custom majorant that can be written down
    /// in a config file.
    pub fn polynomial(coefficients: Vec<f64>, domain_end: f64) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(MajorantError::InvalidMajorant("non-finite coefficient".into()));
        }
        let c0 = Arc::new(coefficients);
        let (c1, c2) = (c0.clone(), c0.clone());
        Self::custom(
            move |t| -t + c0.iter().enumerate().map(|(j, a)| a * t.powi(j as i32 + 2)).sum::<f64>(),
            move |t| {
                -1.0 + c1
                    .iter()
                    .enumerate()
                    .map(|(j, a)| (j + 2) as f64 * a * t.powi(j as i32 + 1))
                    .sum::<f64>()
            },
            move |t| {
                c2.iter()
                    .enumerate()
                    .map(|(j, a)| ((j + 2) * (j + 1)) as f64 * a * t.powi(j as i32))
                    .sum::<f64>()
            },
            domain_end,
        )
    }

    pub fn kind(&self) -> &MajorantKind {
        &self.kind
    }

    /// Right end R of the domain [0, R).
    pub fn domain_end(&self) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { .. } => f64::INFINITY,
            MajorantKind::Smale { gamma } => 1.0 / gamma,
            MajorantKind::Custom(c) => c.domain_end,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { k } => k * t * t / 2.0 - t,
            MajorantKind::Smale { gamma } => t / (1.0 - gamma * t) - 2.0 * t,
            MajorantKind::Custom(c) => (c.value)(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { k } => k * t - 1.0,
            MajorantKind::Smale { gamma } => 1.0 / ((1.0 - gamma * t) * (1.0 - gamma * t)) - 2.0,
            MajorantKind::Custom(c) => (c.derivative)(t),
        }
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { k } => *k,
            MajorantKind::Smale { gamma } => 2.0 * gamma / (1.0 - gamma * t).powi(3),
            MajorantKind::Custom(c) => (c.second_derivative)(t),
        }
    }

    /// Grid check of h1 (f(0) = 0, f'(0) = −1) and h2 (f' convex and
    /// strictly increasing).
    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(MajorantError::InvalidMajorant(msg));
        if self.value(0.0).abs() > H1_TOL {
            return invalid(format!("f(0) = {} ≠ 0", self.value(0.0)));
        }
        if (self.derivative(0.0) + 1.0).abs() > H1_TOL {
            return invalid(format!("f'(0) = {} ≠ −1", self.derivative(0.0)));
        }
        let end = self.domain_end();
        if !end.is_finite() {
            // closed forms are valid by construction
            return Ok(());
        }
        let grid: Vec<f64> = (0..VALIDATION_GRID)
            .map(|i| end * i as f64 / VALIDATION_GRID as f64)
            .collect();
        let slopes: Vec<f64> = grid.iter().map(|&t| self.derivative(t)).collect();
        if let Some(i) = slopes.iter().position(|s| !s.is_finite()) {
            return invalid(format!("f' is not finite at t = {}", grid[i]));
        }
        for (i, w) in slopes.windows(2).enumerate() {
            if w[1] <= w[0] {
                return invalid(format!("f' is not strictly increasing near t = {}", grid[i]));
            }
        }
        for (i, w) in slopes.windows(3).enumerate() {
            let chord = 0.5 * (w[0] + w[2]);
            if w[1] > chord + H1_TOL * (1.0 + chord.abs()) {
                return invalid(format!("f' is not convex near t = {}", grid[i + 1]));
            }
        }
        Ok(())
    }

    /// ν = sup{t ∈ [0, R) : f'(t) < 0}.
    pub fn nu(&self) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { k } => 1.0 / k,
            MajorantKind::Smale { gamma } => (2f64.sqrt() - 1.0) / (2f64.sqrt() * gamma),
            MajorantKind::Custom(c) => {
                let probe = below(c.domain_end);
                if self.derivative(probe) < 0.0 {
                    c.domain_end
                } else {
                    bisect(0.0, probe, |t| self.derivative(t) < 0.0)
                }
            }
        }
    }

    /// φ(t) = f(t)/(t f'(t)) − 1, with its first-order Taylor form near 0.
    pub fn phi(&self, t: f64) -> f64 {
        if t < PHI_TAYLOR_CUTOFF {
            self.second_derivative(0.0) * t / 2.0
        } else {
            self.value(t) / (t * self.derivative(t)) - 1.0
        }
    }

    /// ρ = sup{t ∈ (0, ν) : φ(t) < 1}.
    ///
    /// For custom majorants φ is scanned on a grid over (0, ν) and the last
    /// crossing of 1 is refined by bisection, so a non-monotone φ still gets
    /// the supremum (up to grid resolution).
    pub fn rho(&self) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { k } => 2.0 / (3.0 * k),
            MajorantKind::Smale { gamma } => (5.0 - 17f64.sqrt()) / (4.0 * gamma),
            MajorantKind::Custom(_) => {
                let nu = self.nu();
                let grid = self.phi_grid(nu);
                let below_one: Vec<bool> = grid.iter().map(|&t| self.phi_below_one(t)).collect();
                match below_one.iter().rposition(|&b| b) {
                    Some(i) if i + 1 == grid.len() => nu,
                    Some(i) => bisect(grid[i], grid[i + 1], |t| self.phi_below_one(t)),
                    // φ(0⁺) = 0, so the first grid cell holds a crossing
                    None => bisect(0.0, grid[0], |t| self.phi_below_one(t)),
                }
            }
        }
    }

    /// φ(t) < 1 on the part of the domain where f' < 0. The bisected ν can
    /// overshoot the root of f' slightly, and past it φ is large and negative.
    fn phi_below_one(&self, t: f64) -> bool {
        self.derivative(t) < 0.0 && self.phi(t) < 1.0
    }

    fn phi_grid(&self, nu: f64) -> Vec<f64> {
        let mut grid: Vec<f64> = (1..VALIDATION_GRID)
            .map(|i| nu * i as f64 / VALIDATION_GRID as f64)
            .collect();
        grid.push(below(nu));
        grid
    }

    /// Number of times φ − 1 changes sign on the validation grid over (0, ν).
    /// More than one means ρ depends on the grid resolution.
    pub fn phi_crossings(&self) -> usize {
        let nu = self.nu();
        let mut signs = std::iter::once(0.0)
            .chain(self.phi_grid(nu))
            .map(|t| self.phi_below_one(t))
            .collect::<Vec<_>>();
        signs.dedup();
        signs.len() - 1
    }

    /// σ = sup{0 < t < κ : f(t) < 0}, also capped by R.
    pub fn sigma(&self, kappa: f64) -> f64 {
        match &self.kind {
            MajorantKind::Lipschitz { k } => kappa.min(2.0 / k),
            MajorantKind::Smale { gamma } => kappa.min(1.0 / (2.0 * gamma)),
            MajorantKind::Custom(c) => {
                let upper = kappa.min(c.domain_end);
                let nu = self.nu();
                if upper <= nu {
                    return upper;
                }
                let probe = if upper == c.domain_end { below(upper) } else { upper };
                if self.value(probe) < 0.0 {
                    upper
                } else {
                    bisect(nu, probe, |t| self.value(t) < 0.0)
                }
            }
        }
    }

    pub fn radii(&self, kappa: f64) -> Result<RadiusReport> {
        if !(kappa > 0.0) {
            return Err(MajorantError::InvalidArgument(format!(
                "κ must be positive, got {kappa}"
            )));
        }
        let nu = self.nu();
        let rho = self.rho();
        let sigma = self.sigma(kappa);
        let r = kappa.min(rho);
        Ok(RadiusReport {
            nu,
            rho,
            sigma,
            kappa,
            r,
            sigma_bar: r.min(sigma),
        })
    }

    /// n_f(t) = t − f(t)/f'(t), defined while f'(t) < 0.
    pub fn newton_map(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0 && t < self.domain_end()) {
            return Err(MajorantError::Domain {
                what: "newton_map",
                t,
            });
        }
        let slope = self.derivative(t);
        if !(slope < 0.0) {
            return Err(MajorantError::Domain {
                what: "newton_map (f'(t) ≥ 0)",
                t,
            });
        }
        // t f'(t) − f(t) in closed form where available; the generic
        // t − f/f' loses all relative accuracy as t → 0
        let numerator = match &self.kind {
            MajorantKind::Lipschitz { k } => k * t * t / 2.0,
            MajorantKind::Smale { gamma } => gamma * t * t / (1.0 - gamma * t).powi(2),
            MajorantKind::Custom(_) => return Ok(t - self.value(t) / slope),
        };
        Ok(numerator / slope)
    }

    /// t₀, …, tₙ with tₖ₊₁ = |n_f(tₖ)|. Requires 0 < t₀ < ρ.
    pub fn sequence(&self, t0: f64, n: usize) -> Result<Vec<f64>> {
        if !(t0 > 0.0 && t0 < self.rho()) {
            return Err(MajorantError::Domain {
                what: "majorant sequence start (need 0 < t0 < ρ)",
                t: t0,
            });
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(t0);
        let mut t = t0;
        for _ in 0..n {
            t = self.newton_map(t)?.abs();
            out.push(t);
        }
        Ok(out)
    }

    /// f''(t₀)/(2|f'(t₀)|), the cap on tₖ₊₁/tₖ².
    pub fn ratio_bound(&self, t0: f64) -> Result<f64> {
        if !(t0 > 0.0 && t0 < self.nu()) {
            return Err(MajorantError::Domain {
                what: "ratio_bound (need 0 < t0 < ν)",
                t: t0,
            });
        }
        Ok(self.second_derivative(t0) / (2.0 * self.derivative(t0).abs()))
    }

    /// e_f(t, u) = f(u) − [f(t) + f'(t)(u − t)].
    pub fn linearization_error(&self, t: f64, u: f64) -> f64 {
        self.value(u) - (self.value(t) + self.derivative(t) * (u - t))
    }
}

/// Largest float comfortably below `x` (x > 0).
fn below(x: f64) -> f64 {
    x * (1.0 - 4.0 * f64::EPSILON)
}

/// Boundary of `holds` between `lo` (holds) and `hi` (fails).
fn bisect(mut lo: f64, mut hi: f64, holds: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= RADIUS_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Where the majorant condition is sampled: `points` radii out to
/// min(κ, R) along seeded directions, each paired with `taus` evenly spaced
/// τ ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub points: usize,
    pub taus: usize,
    pub seed: u64,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self {
            points: 20,
            taus: 20,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionSample {
    pub x: Vector,
    pub tau: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantConditionReport {
    /// max(lhs − rhs) over all samples; ≤ 0 when the condition holds.
    pub max_violation: f64,
    pub worst: Option<ConditionSample>,
    pub samples: usize,
}

/// Both sides of the majorant condition at one (x, τ).
pub fn majorant_condition_at(
    map: &dyn SmoothMap,
    xstar: &Vector,
    f: &MajorantFunction,
    x: &Vector,
    tau: f64,
) -> Result<(f64, f64)> {
    let scale = linalg::inverse_norm(&linalg::symmetrize(&map.jacobian(xstar)?))?;
    condition_sides(map, xstar, scale, f, x, tau)
}

fn condition_sides(
    map: &dyn SmoothMap,
    xstar: &Vector,
    scale: f64,
    f: &MajorantFunction,
    x: &Vector,
    tau: f64,
) -> Result<(f64, f64)> {
    let offset = x.sub(xstar)?;
    let s = offset.norm();
    let inner = xstar.axpy(tau, &offset)?;
    let diff = map.jacobian(x)?.sub(&map.jacobian(&inner)?)?;
    let lhs = scale * linalg::operator_norm(&diff)?;
    let rhs = f.derivative(s) - f.derivative(tau * s);
    Ok((lhs, rhs))
}

/// Samples the majorant condition over B(x*, min(κ, R)) and reports the
/// worst violation.
pub fn check_majorant_condition(
    map: &dyn SmoothMap,
    xstar: &Vector,
    f: &MajorantFunction,
    kappa: f64,
    grid: SamplingGrid,
) -> Result<MajorantConditionReport> {
    if grid.points == 0 || grid.taus < 2 {
        return Err(MajorantError::InvalidArgument(
            "sampling grid needs at least one point and two τ values".into(),
        ));
    }
    let scale = linalg::inverse_norm(&linalg::symmetrize(&map.jacobian(xstar)?))?;
    let reach = below(kappa.min(f.domain_end()));
    let dirs = sampling::directions(grid.seed, map.dim(), grid.points);
    let mut report = MajorantConditionReport {
        max_violation: f64::NEG_INFINITY,
        worst: None,
        samples: 0,
    };
    for (i, d) in dirs.iter().enumerate() {
        let s = reach * (i + 1) as f64 / grid.points as f64;
        let x = xstar.axpy(s, d)?;
        for j in 0..grid.taus {
            let tau = j as f64 / (grid.taus - 1) as f64;
            let (lhs, rhs) = condition_sides(map, xstar, scale, f, &x, tau)?;
            report.samples += 1;
            if lhs - rhs > report.max_violation {
                report.max_violation = lhs - rhs;
                report.worst = Some(ConditionSample {
                    x: x.clone(),
                    tau,
                    lhs,
                    rhs,
                });
            }
        }
    }
    Ok(report)
}

/// γ for a scalar polynomial F at x*:
///
/// ```text
/// γ = max_{2 ≤ n ≤ nmax} ( |F'(x*)|⁻¹ |F⁽ⁿ⁾(x*)| / n! )^{1/(n−1)}
/// ```
///
/// Exact for polynomials of degree ≤ nmax. The inverse-norm factor sits
/// inside the root; pulling it outside underestimates γ whenever
/// |F'(x*)|⁻¹ < 1 and the degree exceeds two, and the Smale majorant built
/// from such a γ can violate the majorant condition.
pub fn gamma_estimate_1d(map: &dyn SmoothMap, xstar: &Vector, nmax: usize) -> Result<f64> {
    if map.dim() != 1 || xstar.dim() != 1 {
        return Err(MajorantError::Unsupported(
            "automatic γ is only available for scalar maps; supply γ directly".into(),
        ));
    }
    let degree = map.polynomial_degree().ok_or_else(|| {
        MajorantError::Unsupported("automatic γ needs a polynomial map".into())
    })?;
    if nmax < degree {
        return Err(MajorantError::InvalidArgument(format!(
            "nmax = {nmax} is below the polynomial degree {degree}"
        )));
    }
    let x = xstar[0];
    let slope = map
        .scalar_derivative(x, 1)
        .ok_or_else(|| MajorantError::Unsupported("missing exact derivatives".into()))?;
    let scale = linalg::inverse_norm(&linalg::LinearOperator::diagonal(&[slope])?)?;
    let mut gamma = 0.0_f64;
    let mut factorial = 1.0;
    for n in 2..=nmax {
        factorial *= n as f64;
        let dn = map
            .scalar_derivative(x, n)
            .ok_or_else(|| MajorantError::Unsupported("missing exact derivatives".into()))?;
        let term = (scale * dn.abs() / factorial).powf(1.0 / (n - 1) as f64);
        gamma = gamma.max(term);
    }
    Ok(gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::PolynomialMap;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn newton_map_examples() {
        let lip = MajorantFunction::lipschitz(1.0).unwrap();
        assert_eq!(lip.newton_map(0.0).unwrap(), 0.0);
        assert!(close(lip.newton_map(0.5).unwrap(), -0.25, 1e-15));
        let smale = MajorantFunction::smale(1.0).unwrap();
        // −γt²/(2(1 − γt)² − 1) at γ = 1, t = 0.1
        assert!(close(smale.newton_map(0.1).unwrap(), -0.01 / 0.62, 1e-15));
        assert!(matches!(lip.newton_map(1.0), Err(MajorantError::Domain { .. })));
        assert!(matches!(smale.newton_map(1.0), Err(MajorantError::Domain { .. })));
        assert!(lip.newton_map(-0.1).is_err());
    }

    #[test]
    fn radii_closed_forms() {
        let r = MajorantFunction::lipschitz(1.0).unwrap().radii(10.0).unwrap();
        assert_eq!((r.nu, r.rho, r.sigma), (1.0, 2.0 / 3.0, 2.0));
        assert_eq!((r.r, r.sigma_bar), (2.0 / 3.0, 2.0 / 3.0));

        let s = MajorantFunction::smale(1.0).unwrap().radii(10.0).unwrap();
        assert!(close(s.rho, 0.2192235935955849, 1e-15));
        assert!(close(s.nu, 0.2928932188134524, 1e-15));
        assert_eq!(s.sigma, 0.5);
    }

    #[test]
    fn radii_take_minimum_with_kappa() {
        let r = MajorantFunction::lipschitz(1.0).unwrap().radii(0.1).unwrap();
        assert_eq!(r.r, 0.1);
        assert_eq!(r.sigma, 0.1);
        assert_eq!(r.sigma_bar, 0.1);
        assert!(MajorantFunction::lipschitz(1.0).unwrap().radii(0.0).is_err());
    }

    #[test]
    fn custom_wrapping_lipschitz_matches_closed_form() {
        let custom =
            MajorantFunction::custom(|t| t * t / 2.0 - t, |t| t - 1.0, |_| 1.0, 10.0).unwrap();
        let got = custom.radii(10.0).unwrap();
        let want = MajorantFunction::lipschitz(1.0).unwrap().radii(10.0).unwrap();
        for (a, b) in [
            (got.nu, want.nu),
            (got.rho, want.rho),
            (got.sigma, want.sigma),
            (got.r, want.r),
            (got.sigma_bar, want.sigma_bar),
        ] {
            assert!(close(a, b, 1e-10), "{a} vs {b}");
        }
        assert_eq!(custom.phi_crossings(), 1);

        for k in [0.5, 1.0, 3.0] {
            let custom = MajorantFunction::custom(
                move |t| k * t * t / 2.0 - t,
                move |t| k * t - 1.0,
                move |_| k,
                100.0 / k,
            )
            .unwrap();
            assert!(close(custom.rho(), 2.0 / (3.0 * k), 1e-10), "K = {k}: {}", custom.rho());
        }
    }

    #[test]
    fn custom_validation_rejects_bad_majorants() {
        // f'(0) = 1
        assert!(MajorantFunction::custom(|t| t, |_| 1.0, |_| 0.0, 1.0).is_err());
        // f' concave: f(t) = −t + t^1.5 style derivative −1 + √t
        assert!(MajorantFunction::custom(
            |t| -t + t.powf(1.5) / 1.5,
            |t| -1.0 + t.sqrt(),
            |t| 0.5 / t.sqrt(),
            4.0
        )
        .is_err());
        // f' constant (not strictly increasing)
        assert!(MajorantFunction::custom(|t| -t, |_| -1.0, |_| 0.0, 1.0).is_err());
        assert!(MajorantFunction::custom(|t| -t, |_| -1.0, |_| 0.0, f64::INFINITY).is_err());
        assert!(MajorantFunction::lipschitz(0.0).is_err());
        assert!(MajorantFunction::smale(-1.0).is_err());
    }

    #[test]
    fn sequence_examples() {
        let lip = MajorantFunction::lipschitz(1.0).unwrap();
        let t = lip.sequence(0.5, 2).unwrap();
        assert_eq!(t[0], 0.5);
        assert!(close(t[1], 0.25, 1e-15));
        assert!(close(t[2], 0.041666666666666664, 1e-15));

        let smale = MajorantFunction::smale(1.0).unwrap();
        let t = smale.sequence(0.1, 1).unwrap();
        assert!(close(t[1], 0.016129032258064516, 1e-15));

        assert!(lip.sequence(2.0 / 3.0, 3).is_err());
        assert!(lip.sequence(0.0, 3).is_err());
    }

    #[test]
    fn sequence_first_ratio_tends_to_half_curvature() {
        let lip = MajorantFunction::lipschitz(3.0).unwrap();
        let t0 = 1e-6;
        let t = lip.sequence(t0, 1).unwrap();
        assert!(close(t[1] / (t0 * t0), 1.5, 1e-4));
    }

    #[test]
    fn ratio_bound_examples() {
        let lip = MajorantFunction::lipschitz(1.0).unwrap();
        assert!(close(lip.ratio_bound(0.5).unwrap(), 1.0, 1e-15));
        assert!(close(lip.ratio_bound(1e-12).unwrap(), 0.5, 1e-11));
        let smale = MajorantFunction::smale(1.0).unwrap();
        // (2/0.9³) / (2 |1/0.81 − 2|)
        let want = (2.0 / 0.729) / (2.0 * (2.0 - 1.0 / 0.81));
        assert!(close(smale.ratio_bound(0.1).unwrap(), want, 1e-13));
        assert!(close(want, 1.7921146953405018, 1e-12));
        assert!(lip.ratio_bound(1.0).is_err());
        assert!(lip.ratio_bound(0.0).is_err());
    }

    #[test]
    fn phi_equals_one_at_rho() {
        for f in [
            MajorantFunction::lipschitz(2.5).unwrap(),
            MajorantFunction::smale(0.7).unwrap(),
        ] {
            assert!(close(f.phi(f.rho()), 1.0, 1e-9));
            assert!(close(f.phi(1e-10), f.second_derivative(0.0) * 0.5e-10, 1e-20));
        }
    }

    #[test]
    fn majorant_condition_scalar_example() {
        let map = PolynomialMap::scalar(&[-1.0, 0.0, 1.0]).unwrap();
        let lip = MajorantFunction::lipschitz(1.0).unwrap();
        let xstar = v(&[1.0]);
        let (lhs, rhs) = majorant_condition_at(&map, &xstar, &lip, &v(&[1.5]), 0.0).unwrap();
        assert!(close(lhs, 0.5, 1e-15) && close(rhs, 0.5, 1e-15));
        let (lhs, rhs) = majorant_condition_at(&map, &xstar, &lip, &v(&[1.3]), 1.0).unwrap();
        assert_eq!((lhs, rhs), (0.0, 0.0));
        for tau in [0.0, 0.4, 1.0] {
            let (lhs, rhs) = majorant_condition_at(&map, &xstar, &lip, &xstar, tau).unwrap();
            assert_eq!((lhs, rhs), (0.0, 0.0));
        }
        let report =
            check_majorant_condition(&map, &xstar, &lip, 10.0, SamplingGrid::default()).unwrap();
        assert!(report.max_violation <= 1e-10);
        assert_eq!(report.samples, 400);
    }

    #[test]
    fn gamma_examples() {
        let quad = PolynomialMap::scalar(&[-1.0, 0.0, 1.0]).unwrap();
        assert!(close(gamma_estimate_1d(&quad, &v(&[1.0]), 4).unwrap(), 0.5, 1e-15));
        let affine = PolynomialMap::scalar(&[3.0, 2.0]).unwrap();
        assert_eq!(gamma_estimate_1d(&affine, &v(&[-4.0]), 3).unwrap(), 0.0);
        let cubic = PolynomialMap::scalar(&[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(close(gamma_estimate_1d(&cubic, &v(&[1.0]), 3).unwrap(), 1.0, 1e-15));
        assert!(gamma_estimate_1d(&cubic, &v(&[1.0]), 2).is_err());
    }

    #[test]
    fn gamma_rejects_multivariate_maps() {
        let map = PolynomialMap::affine(linalg::LinearOperator::identity(2), v(&[0.0, 0.0])).unwrap();
        assert!(matches!(
            gamma_estimate_1d(&map, &v(&[0.0, 0.0]), 3),
            Err(MajorantError::Unsupported(_))
        ));
    }

    /// F(x) = 2(x−1) + ½(x−1)² + 0.2(x−1)³ at x* = 1, where |F'(x*)|⁻¹ = ½.
    /// With the inverse-norm factor outside the root γ would be 0.25, and the
    /// resulting Smale majorant is violated; the estimator's γ = √0.1 is not.
    #[test]
    fn gamma_with_factor_inside_the_root_keeps_majorant_condition() {
        let map = PolynomialMap::new(
            linalg::LinearOperator::diagonal(&[2.0]).unwrap(),
            v(&[-2.0]),
            v(&[1.0]),
            vec![vec![0.5, 0.2]],
        )
        .unwrap();
        let xstar = v(&[1.0]);
        let gamma = gamma_estimate_1d(&map, &xstar, 3).unwrap();
        assert!(close(gamma, 0.1f64.sqrt(), 1e-15));

        let grid = SamplingGrid::default();
        let good = MajorantFunction::smale(gamma).unwrap();
        let report = check_majorant_condition(&map, &xstar, &good, 10.0, grid).unwrap();
        assert!(report.max_violation <= 1e-10, "{report:?}");

        let outside = MajorantFunction::smale(0.25).unwrap();
        let report = check_majorant_condition(&map, &xstar, &outside, 10.0, grid).unwrap();
        assert!(report.max_violation > 1e-3, "{report:?}");
    }
}
