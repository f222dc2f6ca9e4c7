//! Maximal monotone operators, represented through their resolvents
//! J_{λT} = (I + λT)⁻¹.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{LinalgError, Vector};

/// Slack on ⟨u − v, x − y⟩ ≥ 0 in [`check_monotone`].
pub const MONOTONICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OperatorError {
    #[error("resolvent step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("box bound {index}: lower {lower} exceeds upper {upper}")]
    InvertedBounds { index: usize, lower: f64, upper: f64 },
    #[error("box bound {index} is NaN")]
    NanBound { index: usize },
    #[error("box bounds have lengths {lower} and {upper}")]
    BoundLengths { lower: usize, upper: usize },
    #[error("ℓ1 weight must be finite and nonnegative, got {0}")]
    NegativeWeight(f64),
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which maximal monotone operator T is.
#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    /// T ≡ {0}; the inclusion reduces to F(x) = 0.
    Zero,
    /// Normal cone of the box [lower, upper]; ±∞ bounds are allowed.
    NormalConeBox { lower: Vec<f64>, upper: Vec<f64> },
    /// Subdifferential of `weight · ‖x‖₁`.
    L1Subdifferential { weight: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator", into = "RawOperator")]
pub struct MonotoneOperator {
    kind: OperatorKind,
    dim: usize,
}

/// Wire format. Infinite box bounds are written as `null`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawOperator {
    Zero {
        dim: usize,
    },
    NormalConeBox {
        #[serde(with = "extended_reals::lower")]
        lower: Vec<f64>,
        #[serde(with = "extended_reals::upper")]
        upper: Vec<f64>,
    },
    L1Subdifferential {
        dim: usize,
        weight: f64,
    },
}

impl TryFrom<RawOperator> for MonotoneOperator {
    type Error = OperatorError;

    fn try_from(raw: RawOperator) -> Result<Self, OperatorError> {
        match raw {
            RawOperator::Zero { dim } => Ok(Self::zero(dim)),
            RawOperator::NormalConeBox { lower, upper } => Self::normal_cone_box(lower, upper),
            RawOperator::L1Subdifferential { dim, weight } => Self::l1(dim, weight),
        }
    }
}

impl From<MonotoneOperator> for RawOperator {
    fn from(op: MonotoneOperator) -> Self {
        match op.kind {
            OperatorKind::Zero => RawOperator::Zero { dim: op.dim },
            OperatorKind::NormalConeBox { lower, upper } => {
                RawOperator::NormalConeBox { lower, upper }
            }
            OperatorKind::L1Subdifferential { weight } => RawOperator::L1Subdifferential {
                dim: op.dim,
                weight,
            },
        }
    }
}

impl MonotoneOperator {
    pub fn zero(dim: usize) -> Self {
        Self {
            kind: OperatorKind::Zero,
            dim,
        }
    }

    pub fn normal_cone_box(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, OperatorError> {
        if lower.len() != upper.len() {
            return Err(OperatorError::BoundLengths {
                lower: lower.len(),
                upper: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(LinalgError::Empty.into());
        }
        for (index, (&lo, &hi)) in lower.iter().zip(&upper).enumerate() {
            if lo.is_nan() || hi.is_nan() {
                return Err(OperatorError::NanBound { index });
            }
            if lo > hi {
                return Err(OperatorError::InvertedBounds {
                    index,
                    lower: lo,
                    upper: hi,
                });
            }
        }
        let dim = lower.len();
        Ok(Self {
            kind: OperatorKind::NormalConeBox { lower, upper },
            dim,
        })
    }

    /// Normal cone of the nonnegative orthant ℝⁿ₊; the inclusion then reads
    /// as a complementarity problem.
    pub fn nonnegative_orthant(dim: usize) -> Self {
        Self::normal_cone_box(vec![0.0; dim], vec![f64::INFINITY; dim])
            .expect("orthant bounds are ordered")
    }

    pub fn l1(dim: usize, weight: f64) -> Result<Self, OperatorError> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(OperatorError::NegativeWeight(weight));
        }
        Ok(Self {
            kind: OperatorKind::L1Subdifferential { weight },
            dim,
        })
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, OperatorKind::Zero)
    }

    /// The unique y with z − y ∈ λT(y).
    pub fn resolvent(&self, lambda: f64, z: &Vector) -> Result<Vector, OperatorError> {
        if !(lambda > 0.0) {
            return Err(OperatorError::NonPositiveStep(lambda));
        }
        if z.dim() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: z.dim(),
            }
            .into());
        }
        let y = match &self.kind {
            OperatorKind::Zero => z.clone(),
            // clamp(lo, hi) would panic on lo == hi == ±∞, so clamp by hand
            OperatorKind::NormalConeBox { lower, upper } => Vector::new(
                z.as_slice()
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&v, (&lo, &hi))| v.max(lo).min(hi))
                    .collect(),
            )?,
            OperatorKind::L1Subdifferential { weight } => {
                let threshold = lambda * weight;
                z.map(|v| v.signum() * (v.abs() - threshold).max(0.0))?
            }
        };
        Ok(y)
    }

    /// A point `(y, (z − y)/λ)` on the graph of T, with y = J_{λT}(z).
    pub fn graph_sample(&self, lambda: f64, z: &Vector) -> Result<(Vector, Vector), OperatorError> {
        let y = self.resolvent(lambda, z)?;
        let value = z.sub(&y)?.scale(1.0 / lambda)?;
        Ok((y, value))
    }
}

/// Samples graph points of T at seeded pseudorandom z (entries uniform in
/// [−3, 3], λ log-uniform in [0.1, 10]) and tests ⟨u − v, x − y⟩ ≥ −1e−12
/// over every pair.
pub fn check_monotone(op: &MonotoneOperator, samples: usize, seed: u64) -> Result<bool, OperatorError> {
    if samples < 2 {
        return Err(OperatorError::TooFewSamples(samples));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z = Vector::new((0..op.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect())?;
        let lambda = 10f64.powf(rng.gen_range(-1.0..1.0));
        points.push(op.graph_sample(lambda, &z)?);
    }
    for (i, (x, u)) in points.iter().enumerate() {
        for (y, v) in &points[i + 1..] {
            if u.sub(v)?.dot(&x.sub(y)?)? < -MONOTONICITY_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

mod extended_reals {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    fn write<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|v| v.is_finite().then_some(*v))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    fn read<'de, D: Deserializer<'de>>(d: D, missing: f64) -> Result<Vec<f64>, D::Error> {
        let raw = Vec::<Option<f64>>::deserialize(d)?;
        Ok(raw.into_iter().map(|v| v.unwrap_or(missing)).collect())
    }

    /// `null` lower bound means −∞.
    pub mod lower {
        use serde::{Deserializer, Serializer};

        pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
            super::write(values, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            super::read(d, f64::NEG_INFINITY)
        }
    }

    /// `null` upper bound means +∞.
    pub mod upper {
        use serde::{Deserializer, Serializer};

        pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
            super::write(values, s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            super::read(d, f64::INFINITY)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::new(x.to_vec()).unwrap()
    }

    fn unit_box(n: usize) -> MonotoneOperator {
        MonotoneOperator::normal_cone_box(vec![0.0; n], vec![1.0; n]).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let zero = MonotoneOperator::zero(2);
        assert_eq!(zero.resolvent(1.0, &v(&[3.0, -2.0])).unwrap(), v(&[3.0, -2.0]));

        assert_eq!(unit_box(2).resolvent(0.7, &v(&[2.0, -3.0])).unwrap(), v(&[1.0, 0.0]));

        let l1 = MonotoneOperator::l1(2, 1.0).unwrap();
        let y = l1.resolvent(1.0, &v(&[2.0, -0.5])).unwrap();
        assert_eq!(y, v(&[1.0, 0.0]));
        // optimality: z − y ∈ λ ∂|·|(y) componentwise
        assert_eq!(2.0 - y[0], 1.0); // ∂|·|(1) = {1}
        assert!((-0.5 - y[1]).abs() <= 1.0); // ∂|·|(0) = [−1, 1]
    }

    #[test]
    fn graph_sample_examples() {
        let (x, u) = MonotoneOperator::zero(1).graph_sample(1.0, &v(&[5.0])).unwrap();
        assert_eq!((x, u), (v(&[5.0]), v(&[0.0])));

        let half_line = MonotoneOperator::nonnegative_orthant(1);
        let (x, u) = half_line.graph_sample(1.0, &v(&[-2.0])).unwrap();
        assert_eq!((x, u), (v(&[0.0]), v(&[-2.0])));

        let l1 = MonotoneOperator::l1(1, 1.0).unwrap();
        let (x, u) = l1.graph_sample(2.0, &v(&[3.0])).unwrap();
        assert_eq!((x, u), (v(&[1.0]), v(&[1.0])));
    }

    #[test]
    fn check_monotone_examples() {
        assert!(check_monotone(&MonotoneOperator::zero(3), 50, 1).unwrap());
        assert!(check_monotone(&unit_box(3), 50, 2).unwrap());
        assert!(check_monotone(&MonotoneOperator::l1(3, 0.8).unwrap(), 50, 3).unwrap());
        assert!(matches!(
            check_monotone(&MonotoneOperator::zero(1), 1, 0),
            Err(OperatorError::TooFewSamples(1))
        ));
    }

    #[test]
    fn infinite_bounds_are_skipped() {
        let op = MonotoneOperator::normal_cone_box(
            vec![f64::NEG_INFINITY, 0.0],
            vec![f64::INFINITY, f64::INFINITY],
        )
        .unwrap();
        assert_eq!(op.resolvent(1.0, &v(&[-7.0, -7.0])).unwrap(), v(&[-7.0, 0.0]));
    }

    #[test]
    fn infinite_bounds_round_trip_through_json() {
        let op = MonotoneOperator::nonnegative_orthant(2);
        let json = serde_json::to_string(&op).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"normal_cone_box","lower":[0.0,0.0],"upper":[null,null]}"#
        );
        let back: MonotoneOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(back, op);
        let bad = r#"{"kind":"normal_cone_box","lower":[2.0],"upper":[1.0]}"#;
        assert!(serde_json::from_str::<MonotoneOperator>(bad).is_err());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(matches!(
            MonotoneOperator::normal_cone_box(vec![1.0], vec![0.0]),
            Err(OperatorError::InvertedBounds { index: 0, .. })
        ));
        assert!(MonotoneOperator::l1(2, -1.0).is_err());
        assert!(matches!(
            MonotoneOperator::zero(1).resolvent(0.0, &v(&[1.0])),
            Err(OperatorError::NonPositiveStep(_))
        ));
        assert!(MonotoneOperator::zero(2).resolvent(1.0, &v(&[1.0])).is_err());
    }
}
