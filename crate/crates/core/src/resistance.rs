//! Newton's resistance `J(u) = ∫ 1/(1+|∇u|²)` in primal and dual form, the
//! gradient-modulus transform, convergence harness and convexity audits.

use crate::convex_core::{check_c_m_star, Body, Domain2, GridConvexFn, Piece, PolyConvexFn};
use crate::error::{Error, Result};
use crate::geometry::{self, clip_halfplane, Vec2};
use crate::hessian_measure::{f0_polyhedral, AtomicMeasure2};
use serde::{Deserialize, Serialize};

/// Lower edge of the open gradient band `(0, 1)`; smaller moduli count as front.
pub const BAND_EPS: f64 = 1e-6;
/// Uniform angular samples on the unit circle for the tilde transform.
pub const TILDE_SAMPLES: usize = 720;
/// Default flag level for the discrete Hessian determinant.
pub const DET_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PrimalExact,
    PrimalQuadrature,
    DualAtoms,
    DualCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResistanceResult {
    pub value: f64,
    pub method: Method,
    pub error_estimate: f64,
}

pub fn newton_weight(g: Vec2) -> f64 {
    1.0 / (1.0 + g.norm2())
}

/// Exact for piecewise-linear bodies: `Σ area(cell) / (1 + |∇u|²)`.
pub fn primal_resistance(u: &dyn Body) -> Result<ResistanceResult> {
    if !(u.domain().area() > 0.0) {
        return Err(Error::Invalid("empty domain".into()));
    }
    let cells = u.gradient_cells();
    let value = geometry::neumaier_sum(cells.iter().map(|&(a, g)| a * newton_weight(g)));
    Ok(ResistanceResult {
        value,
        method: Method::PrimalExact,
        error_estimate: 4.0 * f64::EPSILON * cells.len() as f64 * value,
    })
}

/// `∫ 1/(1+|p|²) dF0`; exact for atomic measures.
pub fn dual_resistance(f0: &AtomicMeasure2) -> Result<ResistanceResult> {
    if let Some(a) = f0.atoms.iter().find(|a| !(a.mass >= 0.0)) {
        return Err(Error::NegativeMass { p: a.p, mass: a.mass });
    }
    for c in &f0.curves {
        if let Some(k) = c.density.iter().position(|d| !(*d >= 0.0)) {
            return Err(Error::NegativeMass { p: c.samples[k], mass: c.density[k] });
        }
    }
    let value = f0.integrate(newton_weight);
    let n = f0.atoms.len() + f0.curves.iter().map(|c| c.samples.len()).sum::<usize>();
    Ok(ResistanceResult {
        value,
        method: if f0.curves.is_empty() { Method::DualAtoms } else { Method::DualCurve },
        error_estimate: 4.0 * f64::EPSILON * n as f64 * value,
    })
}

/// Dual resistance of a polyhedral conjugate.
pub fn dual_resistance_of(w: &PolyConvexFn) -> Result<ResistanceResult> {
    dual_resistance(&f0_polyhedral(w)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientHistogram {
    pub edges: Vec<f64>,
    /// Area with `edges[k] <= |∇u| < edges[k+1]`; the last bin is open above.
    pub mass: Vec<f64>,
    /// `|∇u| < BAND_EPS`.
    pub front_mass: f64,
    /// `BAND_EPS <= |∇u| < 1`.
    pub band_mass: f64,
    /// `|∇u| >= 1`.
    pub steep_mass: f64,
    pub total: f64,
}

/// Area-weighted histogram of gradient moduli.
pub fn gradient_histogram(u: &dyn Body, edges: &[f64]) -> GradientHistogram {
    let mut mass = vec![0.0; edges.len()];
    let (mut front, mut band, mut steep) = (Vec::new(), Vec::new(), Vec::new());
    for (a, g) in u.gradient_cells() {
        let s = g.norm();
        if let Some(k) = edges.iter().rposition(|&e| s >= e) {
            mass[k] += a;
        }
        if s < BAND_EPS {
            front.push(a);
        } else if s < 1.0 {
            band.push(a);
        } else {
            steep.push(a);
        }
    }
    let (front_mass, band_mass, steep_mass) =
        (geometry::neumaier_sum(front), geometry::neumaier_sum(band), geometry::neumaier_sum(steep));
    GradientHistogram {
        edges: edges.to_vec(),
        mass,
        front_mass,
        band_mass,
        steep_mass,
        total: front_mass + band_mass + steep_mass,
    }
}

/// Angles on the unit circle refined so that one piece of `w` is active between neighbours.
fn circle_breakpoints(w: &PolyConvexFn, k: usize) -> Vec<f64> {
    let active = |th: f64| -> (usize, f64) {
        let q = Vec2::polar(th);
        let mut best = (0, f64::NEG_INFINITY);
        for (i, p) in w.pieces().iter().enumerate() {
            let v = p.eval(q);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    };
    fn refine(
        w: &PolyConvexFn,
        active: &dyn Fn(f64) -> (usize, f64),
        (ta, ia): (f64, usize),
        (tb, ib): (f64, usize),
        depth: usize,
        out: &mut Vec<f64>,
    ) {
        if ia == ib || depth == 0 {
            return;
        }
        let (pa, pb) = (w.pieces()[ia], w.pieces()[ib]);
        let diff = |t: f64| pa.eval(Vec2::polar(t)) - pb.eval(Vec2::polar(t));
        let (mut lo, mut hi) = (ta, tb);
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if diff(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let tc = 0.5 * (lo + hi);
        let (ic, vc) = active(tc);
        let own = pa.eval(Vec2::polar(tc)).max(pb.eval(Vec2::polar(tc)));
        if vc > own + 1e-13 * (1.0 + vc.abs()) && ic != ia && ic != ib {
            refine(w, active, (ta, ia), (tc, ic), depth - 1, out);
            out.push(tc);
            refine(w, active, (tc, ic), (tb, ib), depth - 1, out);
        } else {
            out.push(tc);
        }
    }
    let h = std::f64::consts::TAU / k as f64;
    let mut out = Vec::with_capacity(2 * k);
    for j in 0..k {
        let (ta, tb) = (j as f64 * h, (j + 1) as f64 * h);
        out.push(ta);
        refine(w, &active, (ta, active(ta).0), (tb, active(tb).0), 40, &mut out);
    }
    out
}

/// The set `Y_Q = {y ∈ Ω : <q, y> <= w(q)}` over the refined circle samples `q`.
pub fn tilde_front_set(w: &PolyConvexFn, omega: &Domain2, samples: usize) -> Vec<Vec2> {
    let mut poly = omega.vertices.clone();
    for th in circle_breakpoints(w, samples) {
        let q = Vec2::polar(th);
        poly = clip_halfplane(&poly, q, w.eval_unrestricted(q));
        if poly.is_empty() {
            break;
        }
    }
    poly
}

/// `ũ* = max(w, s_Y)` with `Y = {y ∈ Ω : <q, y> <= w(q) for |q| = 1}`.
///
/// On each arc of the unit circle where a single piece `<x_i, q> + b_i` of `w`
/// is active, constraints at the arc's ends already imply it on the whole arc
/// (because `b_i <= 0`), so `s_Y <= w` on the circle and `ũ* = w` for `|p| >= 1`.
pub fn tilde_transform(w: &PolyConvexFn, omega: &Domain2, m: f64) -> Result<PolyConvexFn> {
    tilde_transform_with(w, omega, m, TILDE_SAMPLES)
}

pub fn tilde_transform_with(w: &PolyConvexFn, omega: &Domain2, m: f64, samples: usize) -> Result<PolyConvexFn> {
    let report = check_c_m_star(w, omega, m);
    if !report.pass {
        return Err(Error::NotInClass(format!("tilde_transform input fails C_M*: {:?}", report.violations)));
    }
    let y = tilde_front_set(w, omega, samples);
    let mut pieces = w.pieces().to_vec();
    pieces.extend(y.iter().map(|&v| Piece::new(v, 0.0)));
    // Clipping leaves near-duplicate vertices; as lifted points they would make
    // sliver hull faces, so slopes closer than the tolerance are merged.
    let pieces = merge_close_slopes(pieces, 1e-10 * omega.scale());
    PolyConvexFn::raw(pieces, w.domain().clone(), w.height_cap())
}

/// Keep one piece per cluster of nearby slopes: the one with the largest offset.
fn merge_close_slopes(mut pieces: Vec<Piece>, tol: f64) -> Vec<Piece> {
    pieces.sort_by(|p, q| p.a.x.total_cmp(&q.a.x).then(p.a.y.total_cmp(&q.a.y)));
    let mut out: Vec<Piece> = Vec::with_capacity(pieces.len());
    for p in pieces {
        let mut hit = None;
        for (k, q) in out.iter().enumerate().rev() {
            if p.a.x - q.a.x > tol {
                break;
            }
            if (p.a - q.a).norm() <= tol {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) => {
                if p.b > out[k].b {
                    out[k] = p;
                }
            }
            None => out.push(p),
        }
    }
    out
}

/// `max |w(t q) - t w(q)|` over `|q| = 1` samples and `t ∈ [0, 1]`.
pub fn radial_linearity_defect(w: &PolyConvexFn, angles: usize, steps: usize) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..angles {
        let q = Vec2::polar(std::f64::consts::TAU * (j as f64 + 0.37) / angles as f64);
        let wq = w.eval_unrestricted(q);
        for s in 0..=steps {
            let t = s as f64 / steps as f64;
            worst = worst.max((w.eval_unrestricted(q * t) - t * wq).abs());
        }
    }
    worst
}

/// `h(r) = 1 - r/2` against `f(r) = 1/(1+r²)` on `[0, 1]`: `(|h(0)-f(0)|, |h(1)-f(1)|, max(h-f))`.
pub fn h_tangency(n: usize) -> (f64, f64, f64) {
    let f = |r: f64| 1.0 / (1.0 + r * r);
    let h = |r: f64| 1.0 - 0.5 * r;
    let worst = (0..=n).map(|k| k as f64 / n as f64).map(|r| h(r) - f(r)).fold(f64::NEG_INFINITY, f64::max);
    ((h(0.0) - f(0.0)).abs(), (h(1.0) - f(1.0)).abs(), worst)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub labels: Vec<usize>,
    pub values: Vec<f64>,
    pub gaps: Vec<f64>,
    pub limit: f64,
    pub final_gap: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `|J(u_k) - J(u)|` along a sequence sharing one domain.
pub fn convergence_harness(seq: &[&dyn Body], labels: &[usize], limit: f64, tolerance: f64) -> Result<ConvergenceReport> {
    let Some(first) = seq.first() else {
        return Err(Error::Invalid("empty sequence".into()));
    };
    if labels.len() != seq.len() {
        return Err(Error::Invalid("labels and sequence differ in length".into()));
    }
    let d0 = first.domain();
    let mut values = Vec::with_capacity(seq.len());
    for (i, u) in seq.iter().enumerate() {
        if !u.domain().same_as(d0, 1e-12 * d0.scale()) {
            return Err(Error::DomainMismatch { index: i });
        }
        values.push(primal_resistance(*u)?.value);
    }
    let gaps: Vec<f64> = values.iter().map(|v| (v - limit).abs()).collect();
    let final_gap = *gaps.last().unwrap();
    Ok(ConvergenceReport {
        labels: labels.to_vec(),
        values,
        gaps,
        limit,
        final_gap,
        tolerance,
        pass: final_gap < tolerance,
    })
}

/// Eigenvalues of the Hessian of `p ↦ 1/(1+|p|²)`: radial-transverse `λ1`, radial `λ2`.
pub fn legendre_eigenvalues(p: Vec2) -> (f64, f64) {
    let s = 1.0 + p.norm2();
    (2.0 / (s * s), 2.0 * (1.0 - 3.0 * p.norm2()) / (s * s * s))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrictConvexityReport {
    pub audited: usize,
    pub flagged: usize,
    pub flagged_fraction: f64,
    pub max_det: f64,
}

/// Finite-difference `det D²g` on lattice nodes whose 3x3 stencil lies strictly inside the height band.
pub fn strict_convexity_audit(g: &GridConvexFn, band: (f64, f64), threshold: f64) -> Result<StrictConvexityReport> {
    let Some(lat) = &g.lattice else {
        return Err(Error::Invalid("strict convexity audit needs a lattice-sampled body".into()));
    };
    let h2 = lat.h * lat.h;
    let (mut audited, mut flagged, mut max_det) = (0usize, 0usize, 0.0f64);
    for j in 1..lat.ny.saturating_sub(1) {
        for i in 1..lat.nx.saturating_sub(1) {
            let mut st = [[0.0; 3]; 3];
            let mut ok = true;
            'stencil: for dj in 0..3 {
                for di in 0..3 {
                    match lat.at(i as isize + di as isize - 1, j as isize + dj as isize - 1) {
                        Some(k) if g.values[k] > band.0 && g.values[k] < band.1 => st[dj][di] = g.values[k],
                        _ => {
                            ok = false;
                            break 'stencil;
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            let uxx = (st[1][2] - 2.0 * st[1][1] + st[1][0]) / h2;
            let uyy = (st[2][1] - 2.0 * st[1][1] + st[0][1]) / h2;
            let uxy = (st[2][2] - st[0][2] - st[2][0] + st[0][0]) / (4.0 * h2);
            let det = uxx * uyy - uxy * uxy;
            audited += 1;
            max_det = max_det.max(det);
            if det > threshold {
                flagged += 1;
            }
        }
    }
    Ok(StrictConvexityReport {
        audited,
        flagged,
        flagged_fraction: if audited > 0 { flagged as f64 / audited as f64 } else { 0.0 },
        max_det,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::{check_c_m_star, conjugate, cone, pyramid, slab};
    use crate::hessian_measure::Atom;

    #[test]
    fn closed_form_values() {
        let sq = Domain2::unit_square();
        assert_eq!(primal_resistance(&slab(0.0, &sq).unwrap()).unwrap().value, 4.0);
        let d = Domain2::disk_approx(720, 1.0).unwrap();
        let j = primal_resistance(&cone(1.0, &d).unwrap()).unwrap().value;
        assert!((j - d.area() / 2.0).abs() < 1e-13);
        let single = AtomicMeasure2 { atoms: vec![Atom { p: Vec2::ZERO, mass: std::f64::consts::PI }], curves: vec![] };
        assert_eq!(dual_resistance(&single).unwrap().value, std::f64::consts::PI);
        let neg = AtomicMeasure2 { atoms: vec![Atom { p: Vec2::ZERO, mass: -1.0 }], curves: vec![] };
        assert!(matches!(dual_resistance(&neg), Err(Error::NegativeMass { .. })));
    }

    #[test]
    fn duality_on_pyramid_and_cone() {
        for u in [pyramid(0.6).unwrap(), cone(2.0, &Domain2::disk_approx(100, 1.0).unwrap()).unwrap()] {
            let jp = primal_resistance(&u).unwrap().value;
            let jd = dual_resistance_of(&conjugate(&u).unwrap()).unwrap().value;
            assert!((jp - jd).abs() <= 1e-13 * jp);
        }
    }

    #[test]
    fn support_function_is_tilde_fixed() {
        let d = Domain2::disk_approx(64, 1.0).unwrap();
        let w = conjugate(&slab(0.0, &d).unwrap()).unwrap();
        let t = tilde_transform(&w, &d, 1.0).unwrap();
        assert!(radial_linearity_defect(&t, 97, 20) < 1e-12);
        let (a, b) = (dual_resistance_of(&w).unwrap().value, dual_resistance_of(&t).unwrap().value);
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn tilde_output_is_in_class_and_agrees_outside_unit_ball() {
        let c = crate::corpus::Corpus::generate(9, 12).unwrap();
        for u in &c.bodies {
            let m = u.height_cap().unwrap();
            let w = conjugate(u).unwrap();
            let t = tilde_transform(&w, u.domain(), m).unwrap();
            assert!(check_c_m_star(&t, u.domain(), m).pass);
            for k in 0..200 {
                let p = Vec2::polar(k as f64 * 0.31) * (1.0 + 0.02 * k as f64);
                assert!((t.eval_unrestricted(p) - w.eval_unrestricted(p)).abs() < 1e-12 * (1.0 + p.norm()));
            }
            assert!(dual_resistance_of(&t).unwrap().value <= dual_resistance_of(&w).unwrap().value + 1e-12);
        }
    }

    #[test]
    fn tilde_rejects_out_of_class() {
        let d = Domain2::unit_square();
        let w = conjugate(&slab(0.3, &d).unwrap()).unwrap();
        assert!(matches!(tilde_transform(&w, &d, 1.0), Err(Error::NotInClass(_))));
    }

    #[test]
    fn histogram_of_cone_and_pyramid() {
        let d = Domain2::disk_approx(64, 1.0).unwrap();
        let h = gradient_histogram(&cone(2.0, &d).unwrap(), &[0.0, 1.0, 1.9, 2.1]);
        assert!((h.mass[2] - d.area()).abs() < 1e-13 && h.band_mass == 0.0);
        let h = gradient_histogram(&pyramid(0.5).unwrap(), &[0.0, 1.0]);
        assert!((h.band_mass - 4.0).abs() < 1e-13);
    }

    #[test]
    fn tangent_line_and_eigenvalues() {
        let (a, b, worst) = h_tangency(10_000);
        assert!(a == 0.0 && b == 0.0 && worst <= 0.0);
        assert_eq!(legendre_eigenvalues(Vec2::ZERO), (2.0, 2.0));
        let (_, l2) = legendre_eigenvalues(Vec2::new(0.6, 0.8));
        assert!((l2 + 0.5).abs() < 1e-15);
    }

    #[test]
    fn audit_paraboloid_and_cone() {
        let d = Domain2::unit_square();
        let g = GridConvexFn::sample(&d, 41, |x| x.norm2()).unwrap();
        let r = strict_convexity_audit(&g, (0.0, 10.0), 1e-3).unwrap();
        assert_eq!(r.flagged, r.audited);
        // Developable: the discrete determinant is O(h²) and is never flagged.
        let c = GridConvexFn::sample(&d, 41, |x| x.norm()).unwrap();
        let r = strict_convexity_audit(&c, (0.3, 10.0), DET_THRESHOLD).unwrap();
        assert!(r.audited > 100 && r.flagged == 0);
        let fine = GridConvexFn::sample(&d, 81, |x| x.norm()).unwrap();
        let rf = strict_convexity_audit(&fine, (0.3, 10.0), DET_THRESHOLD).unwrap();
        assert!(rf.max_det < 0.6 * r.max_det);
    }

    #[test]
    fn harness_rejects_mismatched_domains() {
        let a = slab(0.0, &Domain2::unit_square()).unwrap();
        let b = slab(0.0, &Domain2::disk_approx(16, 1.0).unwrap()).unwrap();
        let seq: [&dyn Body; 2] = [&a, &b];
        assert!(matches!(convergence_harness(&seq, &[1, 2], 4.0, 1e-3), Err(Error::DomainMismatch { index: 1 })));
    }
}
