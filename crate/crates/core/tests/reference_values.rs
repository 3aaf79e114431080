use newton_dual::geometry::Vec2;
use newton_dual::heel_front::{self, SupportFn};
use newton_dual::newton_radial::{calibrate, profile_point, radial_resistance, revolve};
use newton_dual::resistance::{legendre_eigenvalues, primal_resistance};
use std::f64::consts::PI;

#[test]
fn segment_transition_constant() {
    let t = heel_front::sweep_transition().unwrap();
    assert!((t.m_crit - 1.17953).abs() < 1e-5, "{}", t.m_crit);
    assert!(t.sides_below >= 3);
}

#[test]
fn biangle_wins_at_height_two() {
    let table = heel_front::regular_table(2.0, 64, heel_front::DEFAULT_N).unwrap();
    let seg = table.iter().find(|o| o.sides == 2).unwrap();
    assert!(table.iter().filter(|o| o.sides >= 3).all(|o| o.j_star > seg.j_star));
}

#[test]
fn best_polygons_below_the_transition() {
    for (m, sides) in [(0.7, 4), (0.9, 3), (1.1, 3), (1.5, 2), (2.0, 2)] {
        assert_eq!(heel_front::best_regular(m, heel_front::MAX_SIDES).unwrap().sides, sides, "M = {m}");
    }
}

#[test]
fn many_sided_polygon_approaches_disk() {
    let poly = heel_front::optimize_regular(720, 2.0).unwrap();
    let (_, jd) = heel_front::optimize_disk(2.0).unwrap();
    assert!((poly.j_star - jd).abs() < 1e-6, "{} vs {}", poly.j_star, jd);
}

#[test]
fn tall_bodies() {
    let m = 10.0;
    let cone = PI / (1.0 + m * m);
    for sides in [3, 4, 6, 12] {
        let o = heel_front::optimize_regular(sides, m).unwrap();
        assert!(o.r_star < 0.05 && (o.j_star - cone).abs() < 1e-3, "m = {sides}: {o:?}");
    }
    // The segment does not collapse at M = 10.
    let seg = heel_front::optimize_regular(2, m).unwrap();
    assert!((seg.r_star - 0.557).abs() < 2e-3 && (seg.j_star - 0.02128).abs() < 1e-5, "{seg:?}");
    let body = heel_front::heel_body(&SupportFn::regular(2, seg.r_star, heel_front::DEFAULT_N).unwrap(), m, 720).unwrap();
    let jp = primal_resistance(&body).unwrap().value;
    assert!((jp - seg.j_star).abs() < 2e-3 * seg.j_star, "{jp}");
}

#[test]
fn legendre_values() {
    let (l1, l2) = legendre_eigenvalues(Vec2::new(0.6, 0.8));
    assert!((l2 + 0.5).abs() < 1e-15 && (l1 - 0.5).abs() < 1e-15);
    for k in 0..1000 {
        let r = 1.0 + k as f64 * 0.01;
        let c = heel_front::legendre_coefficient(r);
        assert!(c >= 0.0);
        assert!((c - r * r * (r * r - 1.0) / (1.0 + r * r).powi(2)).abs() < 1e-14);
    }
}

#[test]
fn newton_profile_nose_and_revolution() {
    assert_eq!(profile_point(-1.0, 1.0).unwrap(), (2.0, 0.0));
    let p = calibrate(1.0, 1.0).unwrap();
    let exact = radial_resistance(&p).value;
    let gaps: Vec<f64> = [90, 180, 360].iter().map(|&k| (primal_resistance(&revolve(&p, k).unwrap()).unwrap().value - exact).abs()).collect();
    for w in gaps.windows(2) {
        assert!(w[0] / w[1] >= 2.0, "{gaps:?}");
    }
}
