use proptest::prelude::*;
use radlevy::bernstein::Atom;
use radlevy::generator::RadialTestFunction;
use radlevy::numerics::{bessel_j, gamma};
use radlevy::simulation::sample_subordinated;
use radlevy::{BernsteinSpec, Convention, LevyMeasure, QuadratureConfig, SubordinatorModel};

fn measure() -> impl Strategy<Value = LevyMeasure> {
    prop_oneof![
        (0.05f64..0.95, 0.1f64..5.0).prop_map(|(index, scale)| LevyMeasure::StableJump { index, scale }),
        (0.1f64..5.0, 0.1f64..5.0).prop_map(|(shape, rate)| LevyMeasure::GammaJump { shape, rate }),
        (0.0f64..3.0).prop_map(|barrier| LevyMeasure::InverseGaussianJump { barrier }),
        (0.1f64..5.0, 0.1f64..5.0)
            .prop_map(|(intensity, jump_rate)| LevyMeasure::ExponentialCp { intensity, jump_rate }),
        proptest::collection::vec((0.1f64..4.0, 0.1f64..2.0), 1..4).prop_map(|v| LevyMeasure::FiniteAtomic {
            atoms: v
                .into_iter()
                .map(|(location, weight)| Atom { location, weight })
                .collect()
        }),
    ]
}

fn spec() -> impl Strategy<Value = BernsteinSpec> {
    (prop_oneof![Just(0.0), 0.01f64..2.0], measure()).prop_map(|(b, m)| BernsteinSpec::new(b, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn f_is_nondecreasing_and_concave(s in spec(), u in 0.01f64..20.0, h in 0.01f64..5.0) {
        let f0 = s.eval_f(u).unwrap();
        let f1 = s.eval_f(u + h).unwrap();
        let f2 = s.eval_f(u + 2.0 * h).unwrap();
        let tol = 1e-10 * (1.0 + f2.abs());
        prop_assert!(s.eval_f(0.0).unwrap().abs() <= 1e-12);
        prop_assert!(f1 >= f0 - tol && f2 >= f1 - tol);
        prop_assert!(f2 - 2.0 * f1 + f0 <= tol);
    }

    #[test]
    fn closed_form_agrees_with_quadrature(s in spec(), u in 0.05f64..10.0) {
        let a = s.eval_f_closed(u);
        let b = s.eval_f_quadrature(u, &QuadratureConfig::default()).unwrap();
        prop_assert!((a - b).abs() <= 1e-7 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn atom_rate_is_finite_only_for_finite_jump_mass(s in spec()) {
        let finite_mass = s.drift() == 0.0
            && matches!(s.levy_measure(), LevyMeasure::ExponentialCp { .. } | LevyMeasure::FiniteAtomic { .. });
        prop_assert_eq!(s.atom_rate().is_finite(), finite_mass);
    }

    #[test]
    fn spec_json_round_trips(s in spec()) {
        let text = serde_json::to_string(&s).unwrap();
        let back: BernsteinSpec = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn laplace_transform_is_a_semigroup(s in spec(), t1 in 0.1f64..2.0, t2 in 0.1f64..2.0, u in 0.0f64..10.0) {
        let m = SubordinatorModel::new(s);
        let a = m.laplace(t1, u).unwrap() * m.laplace(t2, u).unwrap();
        let b = m.laplace(t1 + t2, u).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + b));
        prop_assert!(b > 0.0 && b <= 1.0);
    }

    #[test]
    fn gamma_negative_moment_matches_closed_form(shape in 0.5f64..3.0, rate in 0.2f64..3.0, kappa in 0.1f64..1.5) {
        let s = BernsteinSpec::new(0.0, LevyMeasure::GammaJump { shape, rate }).unwrap();
        let m = SubordinatorModel::new(s);
        let t = 1.0;
        prop_assume!(shape * t > kappa + 0.05);
        let want = gamma(shape * t - kappa) / gamma(shape * t) * rate.powf(kappa);
        let got = m.neg_moment(kappa, t, &QuadratureConfig::default()).unwrap().value;
        prop_assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }

    #[test]
    fn gamma_negative_moment_diverges_below_the_shape(shape in 0.2f64..2.0, rate in 0.2f64..3.0, excess in 0.1f64..1.0) {
        let s = BernsteinSpec::new(0.0, LevyMeasure::GammaJump { shape, rate }).unwrap();
        let m = SubordinatorModel::new(s);
        let nm = m.neg_moment(shape + excess, 1.0, &QuadratureConfig::default()).unwrap();
        prop_assert!(nm.value.is_infinite());
        prop_assert_eq!(nm.route_b, Some(f64::INFINITY));
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..30.0) {
        let a = gamma(x + 1.0);
        let b = x * gamma(x);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn bessel_recurrence(nu in 1.0f64..8.0, x in 0.1f64..60.0) {
        let jm = bessel_j(nu - 1.0, x).unwrap();
        let j = bessel_j(nu, x).unwrap();
        let jp = bessel_j(nu + 1.0, x).unwrap();
        let scale = jm.abs().max(jp.abs()).max(j.abs()).max(1e-300);
        prop_assert!((jm + jp - 2.0 * nu / x * j).abs() <= 1e-9 * scale.max(2.0 * nu / x * j.abs()));
    }

    #[test]
    fn bump_primitive_inverts_the_radial_derivative(power in 2u32..6, radius in 0.5f64..4.0, r in 0.01f64..1.0) {
        let u = RadialTestFunction::poly_bump(power, radius).unwrap();
        let v = u.primitive();
        let r = r * radius;
        let lhs = v.derivative(r) / r;
        let rhs = u.evaluate(r);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn samples_depend_only_on_the_seed(seed in any::<u64>(), k in 1usize..4) {
        let m = SubordinatorModel::from_catalog("ig").unwrap();
        let a = sample_subordinated(&m, k, 1.0, 2000, seed, Convention::Default).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| sample_subordinated(&m, k, 1.0, 2000, seed, Convention::Default).unwrap());
        prop_assert_eq!(a, b);
    }
}
