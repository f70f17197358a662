use proptest::prelude::*;
use riemann_entropy::entropy::{entropy, gradient, hessian};
use riemann_entropy::*;

fn problem_strategy() -> impl Strategy<Value = ValidatedProblem> {
    problems(prop_oneof![Just(0.0), 0.2..1.2f64].boxed())
}

fn diffusive_problem_strategy() -> impl Strategy<Value = ValidatedProblem> {
    problems((0.2..1.2f64).boxed())
}

fn problems(coeff: BoxedStrategy<f64>) -> impl Strategy<Value = ValidatedProblem> {
    (1usize..=4)
        .prop_flat_map(move |n| {
            (
                -1.0..1.0f64,
                prop::collection::vec(0.1..1.0f64, n),
                prop::collection::vec(-2.0..2.0f64, n),
                prop::collection::vec(coeff.clone(), n),
            )
        })
        .prop_map(|(start, widths, v, a)| {
            let mut u = vec![start];
            for w in widths {
                u.push(u.last().unwrap() + w);
            }
            PiecewiseProblem::new(u, v, a).validate().unwrap()
        })
}

/// A strictly increasing point, which lies in `Ω` for every problem.
fn point(p: &ValidatedProblem, seed: &[f64]) -> Vec<f64> {
    let mut x = Vec::with_capacity(p.d());
    let mut acc = -1.5 + 3.0 * seed[0];
    for k in 0..p.d() {
        x.push(acc);
        acc += 0.05 + seed[k + 1];
    }
    x
}

fn seeds() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_is_nonnegative(p in problem_strategy(), s in seeds()) {
        let x = point(&p, &s);
        prop_assert!(entropy(&p, &x).unwrap() >= 0.0);
    }

    #[test]
    fn entropy_is_convex_along_segments(p in problem_strategy(), s in seeds(), t in seeds(), w in 0.0..1.0f64) {
        let (x, y) = (point(&p, &s), point(&p, &t));
        let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (1.0 - w) * a + w * b).collect();
        let (ex, ey, ez) = (entropy(&p, &x).unwrap(), entropy(&p, &y).unwrap(), entropy(&p, &z).unwrap());
        prop_assert!(ez <= (1.0 - w) * ex + w * ey + 1e-10 * (1.0 + ex.abs() + ey.abs()));
    }

    #[test]
    fn hessian_is_positive_definite(p in problem_strategy(), s in seeds()) {
        let x = point(&p, &s);
        prop_assume!(p.d() > 0);
        prop_assert!(hessian(&p, &x).unwrap().cholesky().is_ok());
    }

    #[test]
    fn minimizer_satisfies_kkt_and_beats_samples(p in problem_strategy(), s in seeds()) {
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        prop_assert!(m.kkt.optimal);
        let x = point(&p, &s);
        prop_assert!(m.energy <= entropy(&p, &x).unwrap() + 1e-12);
        prop_assert!(verify(&SelfSimilarProfile::build(&p, &m.xi).unwrap(), default_tolerance(&p)).passed);
    }

    #[test]
    fn minimizer_gradient_vanishes_off_constraints(p in diffusive_problem_strategy()) {
        // with every a_k > 0 the cone is open and the minimizer is interior
        prop_assume!(p.d() > 0);
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        let g = gradient(&p, m.xi.as_slice()).unwrap();
        prop_assert!(g.iter().all(|x| x.abs() <= 1e-9));
    }

    #[test]
    fn profile_is_monotone_between_the_states(p in problem_strategy()) {
        let m = minimize(&p, &MinimizeOptions::default()).unwrap();
        let prof = SelfSimilarProfile::build(&p, &m.xi).unwrap();
        prop_assert_eq!(prof.eval(-1e6), p.alpha());
        prop_assert_eq!(prof.eval(1e6), p.beta());
        let mut prev = p.alpha();
        for i in 0..=400 {
            let value = prof.eval(-6.0 + 12.0 * i as f64 / 400.0);
            prop_assert!(value >= prev && value <= p.beta());
            prev = value;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn finite_volume_respects_bounds_and_order(p in problem_strategy()) {
        let fd = solve_fd(&p, &FdParams::for_problem(&p, 0.05, 0.5, 0.4)).unwrap();
        prop_assert!(fd.values.iter().all(|&u| u >= p.alpha() && u <= p.beta()));
        // plateaus can alternate by an ulp where the diffusive tail underflows
        let ulps = 8.0 * f64::EPSILON * p.alpha().abs().max(p.beta().abs()).max(1.0);
        prop_assert!(fd.values.windows(2).all(|w| w[1] >= w[0] - ulps));
        let scale = p.beta() - p.alpha();
        prop_assert!((fd.mass_change() - fd.boundary_inflow).abs() <= 1e-10 * (1.0 + scale));
    }
}
