use proptest::prelude::*;

use monotone_newton::linalg::{self, LinearOperator, Vector};
use monotone_newton::majorant::MajorantFunction;
use monotone_newton::monotone::MonotoneOperator;
use monotone_newton::newton::{self, SolveConfig};
use monotone_newton::problems;
use monotone_newton::sampling;
use monotone_newton::smooth::SmoothMap;
use monotone_newton::subproblem::{self, LinearizedInclusion, StepMethod, StepOptions};

fn vector(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(-3.0..3.0f64, n).prop_map(|v| Vector::new(v).unwrap())
}

fn matrix(n: usize) -> impl Strategy<Value = LinearOperator> {
    prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |d| LinearOperator::new(n, d).unwrap())
}

/// Matrix whose symmetric part is I + BᵀB/n plus a skew part.
fn strongly_monotone(n: usize) -> impl Strategy<Value = LinearOperator> {
    (matrix(n), matrix(n)).prop_map(move |(b, c)| {
        let spd = b.adjoint().matmul(&b).unwrap().scale(1.0 / n as f64).unwrap();
        let skew = c.sub(&c.adjoint()).unwrap().scale(0.5).unwrap();
        LinearOperator::identity(n).add(&spd).unwrap().add(&skew).unwrap()
    })
}

fn operator(n: usize) -> impl Strategy<Value = MonotoneOperator> {
    prop_oneof![
        Just(MonotoneOperator::zero(n)),
        Just(MonotoneOperator::nonnegative_orthant(n)),
        (0.0..2.0f64).prop_map(move |w| MonotoneOperator::l1(n, w).unwrap()),
        prop::collection::vec((-2.0..0.0f64, 0.0..2.0f64), n).prop_map(|b| {
            let (lo, hi): (Vec<f64>, Vec<f64>) = b.into_iter().unzip();
            MonotoneOperator::normal_cone_box(lo, hi).unwrap()
        }),
    ]
}

fn majorant() -> impl Strategy<Value = MajorantFunction> {
    prop_oneof![
        (0.1..5.0f64).prop_map(|k| MajorantFunction::lipschitz(k).unwrap()),
        (0.1..5.0f64).prop_map(|g| MajorantFunction::smale(g).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quadratic_form_is_bounded_by_inverse_norm(
        (g, x) in (1usize..6).prop_flat_map(|n| (strongly_monotone(n), vector(n))),
    ) {
        let lhs = g.apply(&x).unwrap().dot(&x).unwrap();
        let rhs = x.norm().powi(2) / linalg::inverse_norm(&linalg::symmetrize(&g)).unwrap();
        prop_assert!(lhs >= rhs - 1e-10 * (1.0 + rhs));
    }

    #[test]
    fn symmetrize_is_linear_and_idempotent((a, b) in (matrix(4), matrix(4)), s in -3.0..3.0f64) {
        let sym = linalg::symmetrize(&a);
        prop_assert_eq!(linalg::symmetrize(&sym), sym.clone());
        prop_assert!(sym.asymmetry() == 0.0);
        let lhs = linalg::symmetrize(&a.add(&b.scale(s).unwrap()).unwrap());
        let rhs = sym.add(&linalg::symmetrize(&b).scale(s).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn inner_product_with_symmetric_part(a in matrix(3), x in vector(3)) {
        let lhs = a.apply(&x).unwrap().dot(&x).unwrap();
        let rhs = linalg::symmetrize(&a).apply(&x).unwrap().dot(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn banach_bound_holds(e in matrix(4), target in 0.0..0.95f64) {
        let norm = linalg::operator_norm(&e).unwrap();
        prop_assume!(norm > 1e-9);
        let b = LinearOperator::identity(4).add(&e.scale(target / norm).unwrap()).unwrap();
        let inv = linalg::operator_norm(&b.inverse().unwrap()).unwrap();
        let bound = linalg::banach_inverse_bound(&b).unwrap();
        prop_assert!(inv <= bound * (1.0 + 1e-10));
    }

    #[test]
    fn norm_of_symmetric_square(a in matrix(4)) {
        let s = linalg::symmetrize(&a);
        let norm = linalg::operator_norm(&s).unwrap();
        let sq = linalg::operator_norm(&s.matmul(&s).unwrap()).unwrap();
        prop_assert!((sq - norm * norm).abs() <= 1e-9 * (1.0 + sq));
    }

    #[test]
    fn eigenvalues_sum_to_trace(a in matrix(5)) {
        let s = linalg::symmetrize(&a);
        let eig = linalg::eigenvalues_sym(&s).unwrap();
        let trace: f64 = (0..5).map(|i| s.get(i, i)).sum();
        prop_assert!((eig.iter().sum::<f64>() - trace).abs() <= 1e-10);
        prop_assert!(eig.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn resolvent_is_firmly_nonexpansive(
        op in operator(3),
        z1 in vector(3),
        z2 in vector(3),
        lambda in prop::sample::select(vec![0.1, 1.0, 10.0]),
    ) {
        let j1 = op.resolvent(lambda, &z1).unwrap();
        let j2 = op.resolvent(lambda, &z2).unwrap();
        let dj = j1.sub(&j2).unwrap();
        let lhs = dj.norm().powi(2);
        let rhs = dj.dot(&z1.sub(&z2).unwrap()).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn box_resolvent_ignores_lambda(z in vector(3), l1 in 0.01..100.0f64, l2 in 0.01..100.0f64) {
        let op = MonotoneOperator::normal_cone_box(vec![-1.0, 0.0, -0.5], vec![1.0, 2.0, 0.5]).unwrap();
        prop_assert_eq!(op.resolvent(l1, &z).unwrap(), op.resolvent(l2, &z).unwrap());
    }

    #[test]
    fn graph_samples_are_monotone(
        op in operator(2),
        z1 in vector(2),
        z2 in vector(2),
        l1 in 0.1..10.0f64,
        l2 in 0.1..10.0f64,
    ) {
        let (x1, u1) = op.graph_sample(l1, &z1).unwrap();
        let (x2, u2) = op.graph_sample(l2, &z2).unwrap();
        let inner = u1.sub(&u2).unwrap().dot(&x1.sub(&x2).unwrap()).unwrap();
        prop_assert!(inner >= -1e-12);
    }

    #[test]
    fn scaled_newton_map_is_nondecreasing(f in majorant(), a in 0.01..0.99f64, b in 0.01..0.99f64) {
        let nu = f.nu();
        let (s, t) = if a < b { (a * nu, b * nu) } else { (b * nu, a * nu) };
        let q = |t: f64| f.newton_map(t).unwrap().abs() / (t * t);
        prop_assert!(q(s) <= q(t) * (1.0 + 1e-10));
    }

    #[test]
    fn majorant_sequence_decreases_with_capped_ratios(f in majorant(), frac in 0.01..0.99f64) {
        let t0 = frac * f.rho();
        let t = f.sequence(t0, 8).unwrap();
        let cap = f.ratio_bound(t0).unwrap();
        for k in 0..8 {
            prop_assert!(t[k + 1] < t[k] || t[k] == 0.0);
            // t² leaves the normal range within a few steps for small t0
            if (t[k] * t[k]).is_normal() && t[k + 1].is_normal() {
                prop_assert!(t[k + 1] / (t[k] * t[k]) <= cap * (1.0 + 1e-12));
            }
        }
        prop_assert!(f.phi(t0) < 1.0);
    }

    #[test]
    fn forward_backward_contracts(a in strongly_monotone(3), op in operator(3), g in vector(3), x in vector(3)) {
        let p = LinearizedInclusion { residual: &g, jacobian: &a, point: &x, operator: &op };
        let opts = StepOptions { force_forward_backward: true, ..StepOptions::default() };
        let step = subproblem::solve_step_with(&p, &opts).unwrap();
        let StepMethod::ForwardBackward { contraction, .. } = step.method else {
            panic!("forced forward-backward");
        };
        for w in step.residuals.windows(2) {
            if w[0] > 1e-13 {
                prop_assert!(w[1] <= (contraction + 1e-10) * w[0], "{} > {}·{}", w[1], contraction, w[0]);
            }
        }
        let (cert, gap) = subproblem::inclusion_certificate(&p, &step.y, 1.0).unwrap();
        prop_assert!(gap <= 1e-12 && cert <= 1e-12 * (1.0 + linalg::operator_norm(&a).unwrap()));
    }

    #[test]
    fn step_is_unique(a in strongly_monotone(3), op in operator(3), g in vector(3), x in vector(3), s in vector(3)) {
        let p = LinearizedInclusion { residual: &g, jacobian: &a, point: &x, operator: &op };
        let from_x = subproblem::solve_step_with(&p, &StepOptions { force_forward_backward: true, ..StepOptions::default() }).unwrap();
        let from_s = subproblem::solve_step_with(&p, &StepOptions { force_forward_backward: true, start: Some(s), ..StepOptions::default() }).unwrap();
        let c = from_x.strong_monotonicity;
        // both points have residual ≤ tol, and strong monotonicity separates solutions
        prop_assert!(from_x.y.distance(&from_s.y).unwrap() <= 4e-12 * (1.0 + linalg::operator_norm(&a).unwrap()) / c);
    }

    #[test]
    fn newton_map_contracts_inside_radius(which in 0usize..5, frac in 0.02..0.98f64, seed in any::<u64>()) {
        let spec = &problems::builtin_problems()[which];
        let p = spec.instance().unwrap();
        for f in spec.declared_majorants().unwrap() {
            let r = f.radii(spec.kappa).unwrap().r;
            let t = frac * r;
            let mut rng = sampling::rng(seed);
            let x = sampling::point_in_ball(&mut rng, &spec.solution, t);
            let d = x.distance(&spec.solution).unwrap();
            let cfg = SolveConfig { max_outer: 1, ..SolveConfig::default() };
            let report = newton::solve(&p, &x, &cfg).unwrap();
            prop_assume!(report.steps() == 1);
            let next = report.final_iterate().distance(&spec.solution).unwrap();
            let bound = f.newton_map(t).unwrap().abs() / (t * t) * d * d;
            prop_assert!(next <= bound + 1e-10 * (1.0 + t), "{}: {next} > {bound}", spec.name);
            prop_assert!(next < r);
        }
    }

    #[test]
    fn linearization_error_vanishes_for_affine_maps(x in vector(3), y in vector(3)) {
        let spec = problems::affine_ncp_3d();
        let e = newton::linearization_error(&spec.map, &x, &y).unwrap();
        prop_assert!(e.norm() <= 1e-12 * (1.0 + x.norm() + y.norm()) * 10.0);
        prop_assert_eq!(newton::linearization_error(&spec.map, &x, &x).unwrap(), Vector::zeros(3));
    }
}

#[test]
fn quadratic_order_on_nonlinear_builtins() {
    for spec in problems::builtin_problems().into_iter().filter(|s| !s.map.is_affine()) {
        let p = spec.instance().unwrap();
        let f = spec.declared_majorants().unwrap().remove(0);
        let r = f.radii(spec.kappa).unwrap().r;
        let d = sampling::directions(4, spec.dimension, 1).remove(0);
        let report = newton::solve(&p, &spec.solution.axpy(0.9 * r, &d).unwrap(), &SolveConfig::default()).unwrap();
        assert!(report.converged(), "{}", spec.name);
        if let Some(order) = newton::empirical_order(report.distances.as_ref().unwrap()) {
            assert!((1.8..=2.2).contains(&order), "{}: order {order}", spec.name);
        }
    }
}

#[test]
fn jacobians_match_finite_differences_on_builtins() {
    for spec in problems::builtin_problems() {
        let err = monotone_newton::smooth::jacobian_consistency(&spec.map, &spec.solution, spec.kappa, 100, 9, 1e-6)
            .unwrap();
        assert!(err <= 1e-6 * (1.0 + spec.map.jacobian(&spec.solution).unwrap().frobenius_norm()), "{}: {err}", spec.name);
    }
}
