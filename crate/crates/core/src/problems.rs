//! Built-in problem instances with known solutions and majorant constants.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, LinearOperator, Vector};
use crate::majorant::{MajorantError, MajorantFunction};
use crate::monotone::MonotoneOperator;
use crate::newton::{NewtonError, ProblemInstance};
use crate::sampling;
use crate::smooth::{MapError, PolynomialMap, SmoothMap};

/// Natural-residual tolerance for a declared solution.
pub const SOLUTION_TOL: f64 = 1e-10;

/// Declared Lipschitz constants are the measured value times this.
pub const K_SAFETY: f64 = 1.05;

/// Smallest K declared for a problem whose Jacobian is constant.
pub const K_FLOOR: f64 = 1e-3;

/// Grid points per unit of κ when scanning second derivatives.
const LIPSCHITZ_GRID: usize = 2001;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("infeasible complementarity data: {0}")]
    Infeasible(String),
    #[error("invalid problem spec: {0}")]
    Invalid(String),
    #[error("unknown built-in problem {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error(transparent)]
    Majorant(#[from] MajorantError),
}

pub type Result<T> = std::result::Result<T, ProblemError>;

/// F + T ∋ 0 with its solution and the constants of its majorants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: usize,
    pub map: PolynomialMap,
    pub operator: MonotoneOperator,
    pub solution: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_k: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smale_gamma: Option<f64>,
    pub kappa: f64,
}

impl ProblemSpec {
    /// Dimensions agree, κ and the constants are positive, and the natural
    /// residual at the solution is at most [`SOLUTION_TOL`].
    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if n == 0 {
            return Err(ProblemError::Invalid("dimension must be positive".into()));
        }
        for (what, found) in [
            ("map", self.map.dim()),
            ("operator", self.operator.dim()),
            ("solution", self.solution.dim()),
        ] {
            if found != n {
                return Err(ProblemError::Invalid(format!(
                    "{what} has dimension {found}, expected {n}"
                )));
            }
        }
        for (what, value) in [("lipschitz_k", self.lipschitz_k), ("smale_gamma", self.smale_gamma)] {
            if let Some(c) = value {
                if !(c.is_finite() && c > 0.0) {
                    return Err(ProblemError::Invalid(format!("{what} must be positive, got {c}")));
                }
            }
        }
        let residual = self.instance()?.residual(&self.solution)?;
        if !(residual <= SOLUTION_TOL) {
            return Err(ProblemError::Invalid(format!(
                "natural residual at the declared solution is {residual:e}"
            )));
        }
        Ok(())
    }

    pub fn instance(&self) -> Result<ProblemInstance> {
        Ok(ProblemInstance::new(
            Arc::new(self.map.clone()),
            self.operator.clone(),
            self.kappa,
            Some(self.solution.clone()),
        )?)
    }

    /// Lipschitz and Smale majorants for every declared constant.
    pub fn declared_majorants(&self) -> Result<Vec<MajorantFunction>> {
        let mut out = Vec::new();
        if let Some(k) = self.lipschitz_k {
            out.push(MajorantFunction::lipschitz(k)?);
        }
        if let Some(gamma) = self.smale_gamma {
            out.push(MajorantFunction::smale(gamma)?);
        }
        Ok(out)
    }
}

/// ‖F̂'(x*)⁻¹‖ · sup ‖F''‖ over B[x*, κ].
///
/// The nonlinear part is separable, so the Jacobian difference is diagonal
/// and its Lipschitz constant is the largest |pᵢ''| over the coordinate
/// ranges [x*ᵢ − κ, x*ᵢ + κ], scanned on a uniform grid.
pub fn measured_lipschitz(map: &PolynomialMap, xstar: &Vector, kappa: f64) -> Result<f64> {
    let scale = linalg::inverse_norm(&linalg::symmetrize(&map.jacobian(xstar)?))?;
    let n = xstar.dim();
    let ones = Vector::new(vec![1.0; n])?;
    let mut worst = 0.0_f64;
    for i in 0..LIPSCHITZ_GRID {
        let s = kappa * (2.0 * i as f64 / (LIPSCHITZ_GRID - 1) as f64 - 1.0);
        worst = worst.max(map.derivative_norm(&xstar.axpy(s, &ones)?, 2)?);
    }
    Ok(scale * worst)
}

fn declared_lipschitz(map: &PolynomialMap, xstar: &Vector, kappa: f64) -> Result<f64> {
    Ok((K_SAFETY * measured_lipschitz(map, xstar, kappa)?).max(K_FLOOR))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NcpOptions {
    /// Curvature of the perturbation φᵢ(x) = ε xᵢ²/2.
    pub epsilon: f64,
    pub kappa: f64,
}

impl Default for NcpOptions {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            kappa: 1.0,
        }
    }
}

/// Nonlinear complementarity problem 0 ≤ x ⟂ F(x) ≥ 0 with
/// F(x) = Mx + q + φ(x) and prescribed solution. `active` holds 0-based
/// indices where x*ᵢ = 0; there F(x*)ᵢ = 1, elsewhere F(x*)ᵢ = 0.
pub fn make_ncp(n: usize, seed: u64, xstar: &Vector, active: &[usize]) -> Result<ProblemSpec> {
    make_ncp_with(n, seed, xstar, active, NcpOptions::default())
}

pub fn make_ncp_with(
    n: usize,
    seed: u64,
    xstar: &Vector,
    active: &[usize],
    opts: NcpOptions,
) -> Result<ProblemSpec> {
    if n == 0 || xstar.dim() != n {
        return Err(ProblemError::Infeasible(format!(
            "x* has dimension {} but n = {n}",
            xstar.dim()
        )));
    }
    let active: BTreeSet<usize> = active.iter().copied().collect();
    if let Some(&i) = active.iter().find(|&&i| i >= n) {
        return Err(ProblemError::Infeasible(format!("active index {i} out of range")));
    }
    for i in 0..n {
        let ok = if active.contains(&i) { xstar[i] == 0.0 } else { xstar[i] > 0.0 };
        if !ok {
            return Err(ProblemError::Infeasible(format!(
                "x*[{i}] = {} is inconsistent with index {i} being {}",
                xstar[i],
                if active.contains(&i) { "active" } else { "inactive" }
            )));
        }
    }
    if !(opts.epsilon >= 0.0 && opts.kappa > 0.0) {
        return Err(ProblemError::Invalid("ε must be nonnegative and κ positive".into()));
    }

    let m = random_spd(n, seed)?;
    let coefficients = vec![vec![0.5 * opts.epsilon]; n];
    let nonlinear = PolynomialMap::new(m.clone(), Vector::zeros(n), Vector::zeros(n), coefficients)?;
    let at_solution = nonlinear.eval(xstar)?;
    let target: Vec<f64> = (0..n).map(|i| if active.contains(&i) { 1.0 } else { 0.0 }).collect();
    let q = Vector::new(target)?.sub(&at_solution)?;
    let map = PolynomialMap::new(m, q, Vector::zeros(n), nonlinear.coefficients().to_vec())?;

    let scale = linalg::inverse_norm(&linalg::symmetrize(&map.jacobian(xstar)?))?;
    let lipschitz_k = Some(declared_lipschitz(&map, xstar, opts.kappa)?);
    let smale_gamma = (opts.epsilon > 0.0).then(|| scale * opts.epsilon / 2.0);
    let kind = if opts.epsilon > 0.0 { "ncp" } else { "affine-ncp" };
    let spec = ProblemSpec {
        name: format!("{kind}-{n}d-seed{seed}"),
        dimension: n,
        map,
        operator: MonotoneOperator::nonnegative_orthant(n),
        solution: xstar.clone(),
        lipschitz_k,
        smale_gamma,
        kappa: opts.kappa,
    };
    spec.validate()?;
    Ok(spec)
}

/// Q D Qᵀ with Q orthogonal (Gram-Schmidt on a Gaussian matrix) and D drawn
/// uniformly from [1, 10].
fn random_spd(n: usize, seed: u64) -> Result<LinearOperator> {
    let mut rng = sampling::rng(seed);
    let mut basis: Vec<Vector> = Vec::with_capacity(n);
    while basis.len() < n {
        let mut v = sampling::unit_direction(&mut rng, n);
        for b in &basis {
            v = v.axpy(-v.dot(b)?, b)?;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            basis.push(v.scale(1.0 / norm)?);
        }
    }
    let spectrum: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..=10.0)).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = (0..n).map(|k| basis[k][i] * spectrum[k] * basis[k][j]).sum();
        }
    }
    // exact symmetry, independent of summation rounding
    Ok(linalg::symmetrize(&LinearOperator::new(n, data)?))
}

fn v(x: &[f64]) -> Vector {
    Vector::new(x.to_vec()).expect("finite literal")
}

/// x² − 1 = 0 with root 1.
pub fn scalar_quadratic() -> ProblemSpec {
    ProblemSpec {
        name: "scalar-quadratic".into(),
        dimension: 1,
        map: PolynomialMap::scalar(&[-1.0, 0.0, 1.0]).expect("valid"),
        operator: MonotoneOperator::zero(1),
        solution: v(&[1.0]),
        lipschitz_k: Some(1.0),
        smale_gamma: Some(0.5),
        kappa: 10.0,
    }
}

/// x + 1 ∈ −N_{[0,∞)}(x) with solution 0.
pub fn affine_ncp_1d() -> ProblemSpec {
    ProblemSpec {
        name: "affine-ncp-1d".into(),
        dimension: 1,
        map: PolynomialMap::scalar(&[1.0, 1.0]).expect("valid"),
        operator: MonotoneOperator::nonnegative_orthant(1),
        solution: v(&[0.0]),
        lipschitz_k: Some(1.0),
        smale_gamma: None,
        kappa: 10.0,
    }
}

pub fn ncp_4d() -> ProblemSpec {
    let mut spec =
        make_ncp(4, 7, &v(&[1.0, 0.0, 0.5, 0.0]), &[1, 3]).expect("consistent construction");
    spec.name = "ncp-4d".into();
    spec
}

pub fn affine_ncp_3d() -> ProblemSpec {
    let opts = NcpOptions {
        epsilon: 0.0,
        ..NcpOptions::default()
    };
    let mut spec = make_ncp_with(3, 11, &v(&[0.5, 0.0, 2.0]), &[1], opts)
        .expect("consistent construction");
    spec.name = "affine-ncp-3d".into();
    spec
}

/// Coupled 2D cubic with T = 0, the Smale test case. γ = √0.1 comes from
/// the cubic terms: ‖F̂'(x*)⁻¹‖ = 1/2 and the largest cubic coefficient is
/// 0.2, which beats the quadratic bound 0.25.
pub fn smale_2d_poly() -> ProblemSpec {
    let m = LinearOperator::from_rows(&[vec![3.0, 1.0], vec![-1.0, 2.0]]).expect("valid");
    let xstar = v(&[1.0, -0.5]);
    let q = m.apply(&xstar).expect("same dimension").scale(-1.0).expect("finite");
    let map = PolynomialMap::new(m, q, xstar.clone(), vec![vec![0.5, 0.2], vec![-0.3, 0.1]])
        .expect("valid");
    let kappa = 1.5;
    let lipschitz_k = declared_lipschitz(&map, &xstar, kappa).expect("positive definite at x*");
    ProblemSpec {
        name: "smale-2d-poly".into(),
        dimension: 2,
        map,
        operator: MonotoneOperator::zero(2),
        solution: xstar,
        lipschitz_k: Some(lipschitz_k),
        smale_gamma: Some(0.1_f64.sqrt()),
        kappa,
    }
}

pub fn builtin_problems() -> Vec<ProblemSpec> {
    vec![scalar_quadratic(), affine_ncp_1d(), ncp_4d(), affine_ncp_3d(), smale_2d_poly()]
}

pub fn builtin(name: &str) -> Result<ProblemSpec> {
    builtin_problems()
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| ProblemError::Unknown(name.to_string()))
}
