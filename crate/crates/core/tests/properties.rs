use newton_dual::convex_core::{check_c_m, check_c_m_star, conjugate, convexify, Body, Domain2, GridConvexFn, PolyConvexFn};
use newton_dual::corpus::{apply_variant, random_body, random_domain, Variant};
use newton_dual::geometry::Vec2;
use newton_dual::heel_front::{self, SupportFn};
use newton_dual::hessian_measure::f0_polyhedral;
use newton_dual::maxwell_stratum as mx;
use newton_dual::newton_radial::height_ratio;
use newton_dual::resistance::{dual_resistance_of, primal_resistance, tilde_transform};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn body(seed: u64) -> PolyConvexFn {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = match seed % 3 {
        0 => Domain2::unit_square(),
        1 => Domain2::disk_approx(48, 1.0).unwrap(),
        _ => random_domain(&mut rng).unwrap(),
    };
    let m = rng.gen_range(0.5..3.0);
    random_body(&mut rng, &domain, m).unwrap()
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![Just(Variant::Valid), Just(Variant::Lifted), Just(Variant::OverCap)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn biconjugate_recovers_body(seed in any::<u64>(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let u = body(seed);
        let uu = conjugate(&conjugate(&u).unwrap()).unwrap();
        let v = &u.domain().vertices;
        let k = (s * v.len() as f64) as usize % v.len();
        // Domains are star-shaped about the origin.
        let x = v[k] * (0.98 * t);
        prop_assert!((u.value(x) - uu.eval_unrestricted(x)).abs() <= 1e-10 * (1.0 + u.value(x).abs()));
    }

    #[test]
    fn primal_equals_dual(seed in any::<u64>()) {
        let u = body(seed);
        let jp = primal_resistance(&u).unwrap().value;
        let jd = dual_resistance_of(&conjugate(&u).unwrap()).unwrap().value;
        prop_assert!((jp - jd).abs() <= 1e-12 * jp);
    }

    #[test]
    fn hessian_measure_mass_is_area(seed in any::<u64>()) {
        let u = body(seed);
        let total = f0_polyhedral(&conjugate(&u).unwrap()).unwrap().total_mass();
        prop_assert!((total - u.domain().area()).abs() <= 1e-12 * u.domain().area());
    }

    #[test]
    fn class_membership_matches_dual_class(seed in any::<u64>(), var in variant()) {
        let base = body(seed);
        let m = base.height_cap().unwrap();
        let u = apply_variant(&base, var).unwrap();
        let primal = check_c_m(&u, m).pass;
        let dual = check_c_m_star(&conjugate(&u).unwrap(), u.domain(), m).pass;
        prop_assert_eq!(primal, dual);
        prop_assert_eq!(primal, var == Variant::Valid);
    }

    #[test]
    fn tilde_never_increases_resistance(seed in any::<u64>()) {
        let u = body(seed);
        let m = u.height_cap().unwrap();
        let w = conjugate(&u).unwrap();
        let before = dual_resistance_of(&w).unwrap().value;
        let wt = tilde_transform(&w, u.domain(), m).unwrap();
        prop_assert!(check_c_m_star(&wt, u.domain(), m).pass);
        prop_assert!(dual_resistance_of(&wt).unwrap().value <= before * (1.0 + 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn convexify_is_idempotent(a in -1.0f64..1.0, b in 0.5f64..4.0, n in 6usize..14) {
        let d = Domain2::unit_square();
        let g = GridConvexFn::sample(&d, n, |x| x.dot(x) + a * (b * x.x).sin() * (b * x.y).cos()).unwrap();
        let once = convexify(&g).unwrap();
        let twice = convexify(&once).unwrap();
        prop_assert!(once.convexity_defect().0 <= 1e-12);
        for (p, q) in once.values.iter().zip(&twice.values) {
            prop_assert!((p - q).abs() <= 1e-14 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn reduced_functional_is_rotation_invariant(seed in any::<u64>(), alpha in 0.0f64..std::f64::consts::TAU, m in 0.5f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(3..9);
        let mut pts: Vec<Vec2> = (0..k).map(|_| Vec2::polar(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.05..0.7)).collect();
        pts.push(Vec2::ZERO);
        let s = SupportFn::polygon(&pts, heel_front::DEFAULT_N).unwrap();
        let r = s.rotated(alpha).unwrap();
        let a = heel_front::reduced_functional(&s, m).unwrap().value;
        let b = heel_front::reduced_functional(&r, m).unwrap().value;
        prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
    }

    #[test]
    fn height_ratio_is_increasing(v in 1.0f64..100.0, dv in 1e-6f64..10.0) {
        prop_assert!(height_ratio(v + dv) > height_ratio(v));
    }

    #[test]
    fn el_rhs_is_even_under_reflection(v in 0.2f64..5.0, t in -0.95f64..0.95, w in -1.0f64..1.0) {
        let p = t * v;
        let a = mx::el_rhs(p, v, w).unwrap();
        let b = mx::el_rhs(-p, v, -w).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn stratum_round_trip(s in 0.7f64..1.0, m in 1.8f64..2.5) {
        let c = mx::symmetric_extremal(m, s, 2e-3).unwrap();
        let st = mx::stratum_from_dual(&c).unwrap();
        for k in (0..c.p.len()).step_by(7) {
            let back = st.dual_value(c.p[k], m);
            prop_assert!((back - c.v[k]).abs() <= 1e-9 * (1.0 + c.v[k]), "p = {}: {} vs {}", c.p[k], back, c.v[k]);
        }
    }
}
