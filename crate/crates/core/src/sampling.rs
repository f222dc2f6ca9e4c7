//! Seeded sampling helpers shared by the property checks.
//!
//! Everything runs on ChaCha8 so samples are identical across platforms for
//! a given seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::Vector;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly distributed unit vector in ℝⁿ.
pub fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let raw: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return Vector::new(raw.into_iter().map(|v| v / norm).collect())
                .expect("normalized gaussian is finite");
        }
    }
}

/// `count` unit directions. In one dimension these alternate +1, −1 so both
/// sides of the solution are covered deterministically.
pub fn directions(seed: u64, n: usize, count: usize) -> Vec<Vector> {
    if n == 1 {
        return (0..count)
            .map(|i| Vector::new(vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).expect("finite"))
            .collect();
    }
    let mut rng = rng(seed);
    (0..count).map(|_| unit_direction(&mut rng, n)).collect()
}

/// Uniform sample from the closed ball B[center, radius].
pub fn point_in_ball(rng: &mut ChaCha8Rng, center: &Vector, radius: f64) -> Vector {
    let n = center.dim();
    let d = unit_direction(rng, n);
    let u: f64 = rng.gen_range(0.0..=1.0);
    let s = radius * u.powf(1.0 / n as f64);
    center.axpy(s, &d).expect("same dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_reproducible() {
        let a = directions(11, 3, 5);
        let b = directions(11, 3, 5);
        assert_eq!(a, b);
        for d in &a {
            assert!((d.norm() - 1.0).abs() < 1e-15);
        }
        let one_d = directions(0, 1, 3);
        assert_eq!(one_d.iter().map(|d| d[0]).collect::<Vec<_>>(), vec![1.0, -1.0, 1.0]);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut r = rng(5);
        let c = Vector::new(vec![1.0, -2.0]).unwrap();
        for _ in 0..200 {
            let p = point_in_ball(&mut r, &c, 0.3);
            assert!(p.distance(&c).unwrap() <= 0.3 + 1e-15);
        }
    }
}
