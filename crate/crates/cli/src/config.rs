//! JSON run configuration.

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use serde::Deserialize;

use monotone_newton::linalg::Vector;
use monotone_newton::majorant::MajorantFunction;
use monotone_newton::monotone::MonotoneOperator;
use monotone_newton::newton::{ProblemInstance, SolveConfig};
use monotone_newton::problems::{self, ProblemSpec};
use monotone_newton::smooth::{PolynomialMap, SmoothMap};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub problem: Option<ProblemRef>,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub start: Option<Start>,
    #[serde(default)]
    pub majorant: Option<MajorantChoice>,
    /// Overrides the problem's κ.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub basin: Option<BasinConfig>,
    #[serde(default = "default_uniqueness_samples")]
    pub uniqueness_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_uniqueness_samples() -> usize {
    1000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProblemRef {
    Builtin(String),
    Inline(InlineProblem),
}

/// Like a library spec, except the solution may be unknown.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineProblem {
    #[serde(default)]
    pub name: Option<String>,
    pub map: PolynomialMap,
    pub operator: MonotoneOperator,
    #[serde(default)]
    pub solution: Option<Vector>,
    #[serde(default)]
    pub lipschitz_k: Option<f64>,
    #[serde(default)]
    pub smale_gamma: Option<f64>,
    pub kappa: f64,
}

/// x0 = x* + t0·d/‖d‖.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Start {
    pub t0: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MajorantChoice {
    /// K defaults to the problem's declared constant.
    Lipschitz {
        #[serde(default)]
        k: Option<f64>,
    },
    /// γ defaults to the problem's declared constant.
    Smale {
        #[serde(default)]
        gamma: Option<f64>,
    },
    /// f(t) = −t + Σⱼ aⱼ t^(j+2) on [0, domain_end).
    Custom {
        coefficients: Vec<f64>,
        domain_end: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub outer: f64,
    pub inner: f64,
    pub max_outer: usize,
    pub inner_max_iter: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        let d = SolveConfig::default();
        Self {
            outer: d.outer_tol,
            inner: d.inner_tol,
            max_outer: d.max_outer,
            inner_max_iter: d.inner_max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasinConfig {
    pub directions: usize,
    /// Defaults to κ.
    #[serde(default)]
    pub r_max: Option<f64>,
    #[serde(default = "default_bisect_tol")]
    pub bisect_tol: f64,
}

fn default_bisect_tol() -> f64 {
    1e-7
}

/// A problem resolved from the config, with its declared constants.
pub struct ResolvedProblem {
    pub name: String,
    pub instance: ProblemInstance,
    pub lipschitz_k: Option<f64>,
    pub smale_gamma: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).context("malformed config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        ensure!(
            self.schema_version == SCHEMA_VERSION,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            self.schema_version
        );
        let t = &self.tolerances;
        ensure!(t.outer > 0.0 && t.inner > 0.0, "tolerances must be positive");
        ensure!(t.max_outer > 0 && t.inner_max_iter > 0, "iteration limits must be positive");
        if let Some(k) = self.kappa {
            ensure!(k > 0.0, "kappa must be positive");
        }
        ensure!(
            !(self.x0.is_some() && self.start.is_some()),
            "give either x0 or start, not both"
        );
        if let Some(b) = &self.basin {
            ensure!(b.bisect_tol > 0.0, "basin.bisect_tol must be positive");
            if let Some(r) = b.r_max {
                ensure!(r > 0.0, "basin.r_max must be positive");
            }
        }
        Ok(())
    }

    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            outer_tol: self.tolerances.outer,
            inner_tol: self.tolerances.inner,
            max_outer: self.tolerances.max_outer,
            inner_max_iter: self.tolerances.inner_max_iter,
        }
    }

    pub fn problem(&self) -> Result<Option<ResolvedProblem>> {
        let Some(problem) = &self.problem else {
            return Ok(None);
        };
        let mut resolved = match problem {
            ProblemRef::Builtin(name) => from_spec(problems::builtin(name)?)?,
            ProblemRef::Inline(inline) => match &inline.solution {
                Some(solution) => {
                    let spec = ProblemSpec {
                        name: inline.name.clone().unwrap_or_else(|| "inline".into()),
                        dimension: inline.map.dim(),
                        map: inline.map.clone(),
                        operator: inline.operator.clone(),
                        solution: solution.clone(),
                        lipschitz_k: inline.lipschitz_k,
                        smale_gamma: inline.smale_gamma,
                        kappa: inline.kappa,
                    };
                    spec.validate()?;
                    from_spec(spec)?
                }
                None => ResolvedProblem {
                    name: inline.name.clone().unwrap_or_else(|| "inline".into()),
                    instance: ProblemInstance::new(
                        Arc::new(inline.map.clone()),
                        inline.operator.clone(),
                        inline.kappa,
                        None,
                    )?,
                    lipschitz_k: inline.lipschitz_k,
                    smale_gamma: inline.smale_gamma,
                },
            },
        };
        if let Some(k) = self.kappa {
            resolved.instance.kappa = k;
        }
        Ok(Some(resolved))
    }

    pub fn require_problem(&self) -> Result<ResolvedProblem> {
        self.problem()?.context("this command needs a problem")
    }

    /// The configured majorant, with missing constants taken from the
    /// problem.
    pub fn majorant(&self, problem: Option<&ResolvedProblem>) -> Result<Option<MajorantFunction>> {
        let Some(choice) = &self.majorant else {
            return Ok(None);
        };
        let f = match choice {
            MajorantChoice::Lipschitz { k } => {
                let k = k
                    .or_else(|| problem.and_then(|p| p.lipschitz_k))
                    .context("lipschitz majorant needs k (the problem declares none)")?;
                MajorantFunction::lipschitz(k)?
            }
            MajorantChoice::Smale { gamma } => {
                let gamma = gamma
                    .or_else(|| problem.and_then(|p| p.smale_gamma))
                    .context("smale majorant needs gamma (the problem declares none)")?;
                MajorantFunction::smale(gamma)?
            }
            MajorantChoice::Custom {
                coefficients,
                domain_end,
            } => MajorantFunction::polynomial(coefficients.clone(), *domain_end)?,
        };
        Ok(Some(f))
    }

    pub fn require_majorant(&self, problem: Option<&ResolvedProblem>) -> Result<MajorantFunction> {
        self.majorant(problem)?.context("this command needs a majorant")
    }

    /// κ from the config, else from the problem.
    pub fn kappa(&self, problem: Option<&ResolvedProblem>) -> Result<f64> {
        self.kappa
            .or_else(|| problem.map(|p| p.instance.kappa))
            .context("kappa is required when no problem is given")
    }

    pub fn x0(&self, problem: &ResolvedProblem) -> Result<Vector> {
        let n = problem.instance.dim();
        let x0 = match (&self.x0, &self.start) {
            (Some(x0), None) => Vector::new(x0.clone())?,
            (None, Some(start)) => {
                let xstar = problem
                    .instance
                    .solution
                    .as_ref()
                    .context("start offsets need a known solution")?;
                ensure!(start.t0 >= 0.0, "start.t0 must be nonnegative");
                let d = Vector::new(start.direction.clone())?;
                ensure!(d.norm() > 0.0, "start.direction must be nonzero");
                ensure!(d.dim() == n, "start.direction has dimension {}, expected {n}", d.dim());
                xstar.axpy(start.t0 / d.norm(), &d)?
            }
            (None, None) => bail!("a starting point (x0 or start) is required"),
            (Some(_), Some(_)) => unreachable!("rejected in validate"),
        };
        ensure!(x0.dim() == n, "x0 has dimension {}, expected {n}", x0.dim());
        Ok(x0)
    }
}

fn from_spec(spec: ProblemSpec) -> Result<ResolvedProblem> {
    Ok(ResolvedProblem {
        instance: spec.instance()?,
        name: spec.name,
        lipschitz_k: spec.lipschitz_k,
        smale_gamma: spec.smale_gamma,
    })
}
