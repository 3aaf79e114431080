//! Hessian measures in the plane.
//!
//! `F0` of a conjugate is the pushforward of Lebesgue measure under the
//! gradient map of the primal body: one atom per linearity cell, at the cell's
//! slope, weighing the cell's area. Smooth patches contribute `det D²v dp`, and
//! a merge curve between two smooth patches carries a line density.

use crate::convex_core::{PolyConvexFn, HULL_MERGE_TOL};
use crate::error::{Error, Result};
use crate::geometry::{self, area, convex_intersection, Mat2, Vec2};
use crate::hull3::LowerHull;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Asymmetry allowed in a reported Hessian.
pub const HESSIAN_SYMMETRY_TOL: f64 = 1e-8;
/// Side probes for the merge-curve orientation check, relative to curve scale.
pub const ORIENTATION_OFFSET: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Atom {
    pub p: Vec2,
    pub mass: f64,
}

impl From<[f64; 3]> for Atom {
    fn from(v: [f64; 3]) -> Self {
        Atom { p: Vec2::new(v[0], v[1]), mass: v[2] }
    }
}

impl From<Atom> for [f64; 3] {
    fn from(a: Atom) -> Self {
        [a.p.x, a.p.y, a.mass]
    }
}

/// Line density sampled along a curve; `weights` are quadrature weights in the curve parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePart {
    pub samples: Vec<Vec2>,
    pub density: Vec<f64>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure2 {
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub curves: Vec<CurvePart>,
}

impl AtomicMeasure2 {
    pub fn total_mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// `∫ g dF` with a fixed summation order.
    pub fn integrate<G: Fn(Vec2) -> f64>(&self, g: G) -> f64 {
        let atoms = self.atoms.iter().map(|a| a.mass * g(a.p));
        let curves = self
            .curves
            .iter()
            .flat_map(|c| c.samples.iter().zip(&c.density).zip(&c.weights).map(|((&p, &d), &w)| w * d * g(p)).collect::<Vec<_>>());
        geometry::neumaier_sum(atoms.chain(curves))
    }

    /// Atom mass inside the closed rectangle `[lo, hi]`.
    pub fn mass_in_rect(&self, lo: Vec2, hi: Vec2) -> f64 {
        geometry::neumaier_sum(
            self.atoms
                .iter()
                .filter(|a| a.p.x >= lo.x && a.p.x <= hi.x && a.p.y >= lo.y && a.p.y <= hi.y)
                .map(|a| a.mass),
        )
    }

    pub fn merge(mut self, other: AtomicMeasure2) -> Self {
        self.atoms.extend(other.atoms);
        self.curves.extend(other.curves);
        self
    }
}

/// Exact `F0` of a polyhedral conjugate.
///
/// `w` must live on a dual box (as produced by [`crate::convex_core::conjugate`]).
/// The lifted points `(slope, -offset)` of its pieces are the graph vertices of
/// the primal body; their lower hull's faces are the primal cells.
pub fn f0_polyhedral(w: &PolyConvexFn) -> Result<AtomicMeasure2> {
    let Some(half) = dual_half_width(w) else {
        return Err(Error::UnboundedSubdifferential { p: geometry::centroid(&w.domain().vertices) });
    };
    let lifted: Vec<[f64; 3]> = w.pieces().iter().map(|p| [p.a.x, p.a.y, -p.b]).collect();
    let hull = LowerHull::with_merge_tol(&lifted, HULL_MERGE_TOL)?;
    // Near-vertical hull faces (a lifted point almost on a boundary edge) give
    // huge but legitimate slopes with negligible mass; only non-finite ones are rejected.
    // Faces under the canonical cell-area floor are rounding slivers along collinear boundary points.
    let floor = crate::convex_core::MIN_CELL_AREA * hull.total_area().max(1.0);
    let mut atoms: Vec<Atom> =
        hull.faces.iter().filter(|f| f.area >= floor).map(|f| Atom { p: f.slope, mass: f.area }).collect();
    if let Some(a) = atoms.iter().find(|a| !a.p.is_finite() || !a.mass.is_finite()) {
        return Err(Error::UnboundedSubdifferential { p: a.p });
    }
    atoms.sort_by(|a, b| a.p.x.total_cmp(&b.p.x).then(a.p.y.total_cmp(&b.p.y)));
    Ok(AtomicMeasure2 { atoms: merge_close_atoms(atoms, 1e-12 * (1.0 + half)), curves: Vec::new() })
}

fn dual_half_width(w: &PolyConvexFn) -> Option<f64> {
    match w.domain().kind {
        crate::convex_core::DomainKind::DualBox { half_width } => Some(half_width),
        _ => None,
    }
}

fn merge_close_atoms(atoms: Vec<Atom>, tol: f64) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        let mut hit = None;
        for (k, b) in out.iter().enumerate().rev() {
            if a.p.x - b.p.x > tol {
                break;
            }
            if (a.p - b.p).norm() <= tol {
                hit = Some(k);
                break;
            }
        }
        match hit {
            Some(k) => out[k].mass += a.mass,
            None => out.push(a),
        }
    }
    out
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SteinerReport {
    /// Fitted `(c0, c1, c2)` of `L²(η^ε) = c0 + c1 ε + c2 ε²`.
    pub coefficients: [f64; 3],
    pub residual: f64,
    /// `F0` atom mass at each point of η.
    pub masses: Vec<f64>,
    /// `|c2 - Σ masses|`.
    pub mass_gap: f64,
}

/// Fit the Steiner-type polynomial of a vertex set η of a polyhedral conjugate.
pub fn steiner_check(w: &PolyConvexFn, eta: &[Vec2], eps: &[f64]) -> Result<SteinerReport> {
    if eps.len() < 3 || eps.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::Invalid("steiner_check needs at least three epsilons in (0, 1]".into()));
    }
    let sub: Vec<Vec<Vec2>> = eta.iter().map(|&p| w.subdifferential(p).map(|s| s.vertices)).collect::<Result<_>>()?;
    let emax = eps.iter().copied().fold(0.0, f64::max);
    let inflated = |k: usize, e: f64| -> Vec<Vec2> { sub[k].iter().map(|&x| eta[k] + x * e).collect() };

    // Inflated atoms must be pairwise disjoint at the largest epsilon.
    let big: Vec<Vec<Vec2>> = (0..eta.len()).map(|k| inflated(k, emax)).collect();
    let boxes: Vec<(Vec2, Vec2)> = big.iter().map(|p| geometry::bbox(p)).collect();
    for i in 0..eta.len() {
        for j in i + 1..eta.len() {
            let (a, b) = (boxes[i], boxes[j]);
            if a.1.x < b.0.x || b.1.x < a.0.x || a.1.y < b.0.y || b.1.y < a.0.y {
                continue;
            }
            if big[i].len() >= 3 && big[j].len() >= 3 {
                let inter = convex_intersection(&big[i], &big[j]);
                if area(&inter) > 1e-14 * emax * emax {
                    return Err(Error::Overlap { p: eta[i], q: eta[j] });
                }
            }
        }
    }

    let values: Vec<f64> = eps
        .iter()
        .map(|&e| geometry::neumaier_sum((0..eta.len()).map(|k| area(&inflated(k, e)))))
        .collect();
    let a = DMatrix::from_fn(eps.len(), 3, |i, j| eps[i].powi(j as i32));
    let b = DVector::from_vec(values.clone());
    let svd = a.clone().svd(true, true);
    let c = svd.solve(&b, 1e-14).map_err(|e| Error::Invalid(e.to_string()))?;
    let fit = &a * &c;
    let residual = fit.iter().zip(&values).map(|(f, v)| (f - v).abs()).fold(0.0, f64::max);

    let f0 = f0_polyhedral(w)?;
    let tol = 1e-9 * (1.0 + w.max_slope_norm());
    let masses: Vec<f64> = eta
        .iter()
        .map(|&p| f0.atoms.iter().filter(|a| (a.p - p).norm() <= tol).map(|a| a.mass).sum())
        .collect();
    let total: f64 = geometry::neumaier_sum(masses.iter().copied());
    Ok(SteinerReport { coefficients: [c[0], c[1], c[2]], residual, mass_gap: (c[2] - total).abs(), masses })
}

/// A twice differentiable function on a patch of p-space.
pub trait SmoothPatch: Sync {
    fn value(&self, p: Vec2) -> f64;
    fn gradient(&self, p: Vec2) -> Vec2;
    fn hessian(&self, p: Vec2) -> Mat2;
}

/// `|p|² / 2`.
#[derive(Debug, Clone, Copy)]
pub struct HalfSquare;

impl SmoothPatch for HalfSquare {
    fn value(&self, p: Vec2) -> f64 {
        0.5 * p.norm2()
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        p
    }
    fn hessian(&self, _: Vec2) -> Mat2 {
        Mat2::identity()
    }
}

/// `sqrt(1 + |p|²)`.
#[derive(Debug, Clone, Copy)]
pub struct Hyperboloid;

impl SmoothPatch for Hyperboloid {
    fn value(&self, p: Vec2) -> f64 {
        (1.0 + p.norm2()).sqrt()
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        p / self.value(p)
    }
    fn hessian(&self, p: Vec2) -> Mat2 {
        let s = self.value(p);
        (Mat2::identity() - Mat2::outer(p, p).scale(1.0 / (s * s))).scale(1.0 / s)
    }
}

/// `|p| - m`: the conjugate side of the rim at height `m` on the unit disk.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedNorm {
    pub m: f64,
}

impl SmoothPatch for ShiftedNorm {
    fn value(&self, p: Vec2) -> f64 {
        p.norm() - self.m
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        p / p.norm()
    }
    fn hessian(&self, p: Vec2) -> Mat2 {
        let r = p.norm();
        let t = (p / r).rot90();
        Mat2::outer(t, t).scale(1.0 / r)
    }
}

/// Positively homogeneous `r v(θ)`, e.g. the support function of a front set.
pub struct PolarSupport {
    pub v: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub dv: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    pub d2v: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl PolarSupport {
    /// Support function of the disk of radius `rho` centred at the origin.
    pub fn disk(rho: f64) -> Self {
        PolarSupport { v: Box::new(move |_| rho), dv: Box::new(|_| 0.0), d2v: Box::new(|_| 0.0) }
    }
}

impl SmoothPatch for PolarSupport {
    fn value(&self, p: Vec2) -> f64 {
        p.norm() * (self.v)(p.angle())
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        let th = p.angle();
        let e = Vec2::polar(th);
        e * (self.v)(th) + e.rot90() * (self.dv)(th)
    }
    fn hessian(&self, p: Vec2) -> Mat2 {
        let th = p.angle();
        let t = Vec2::polar(th).rot90();
        Mat2::outer(t, t).scale(((self.v)(th) + (self.d2v)(th)) / p.norm())
    }
}

/// Patch from closures, for callers with their own derivatives.
pub struct FnPatch {
    pub value: Box<dyn Fn(Vec2) -> f64 + Send + Sync>,
    pub gradient: Box<dyn Fn(Vec2) -> Vec2 + Send + Sync>,
    pub hessian: Box<dyn Fn(Vec2) -> Mat2 + Send + Sync>,
}

impl SmoothPatch for FnPatch {
    fn value(&self, p: Vec2) -> f64 {
        (self.value)(p)
    }
    fn gradient(&self, p: Vec2) -> Vec2 {
        (self.gradient)(p)
    }
    fn hessian(&self, p: Vec2) -> Mat2 {
        (self.hessian)(p)
    }
}

fn checked_hessian(patch: &dyn SmoothPatch, p: Vec2) -> Result<Mat2> {
    let h = patch.hessian(p);
    let gap = (h.a12 - h.a21).abs();
    if !(gap <= HESSIAN_SYMMETRY_TOL * (1.0 + h.max_abs())) {
        return Err(Error::AsymmetricHessian { p, gap });
    }
    Ok(h)
}

/// `F0` density `det D²v` of a smooth patch at the samples.
pub fn f0_density_smooth(patch: &dyn SmoothPatch, samples: &[Vec2]) -> Result<Vec<f64>> {
    samples.iter().map(|&p| checked_hessian(patch, p).map(|h| h.det())).collect()
}

/// A parameterized curve with quadrature weights in its parameter.
#[derive(Debug, Clone)]
pub struct ParamCurve {
    pub params: Vec<f64>,
    pub points: Vec<Vec2>,
    pub tangents: Vec<Vec2>,
    pub weights: Vec<f64>,
}

impl ParamCurve {
    /// Closed curve on `[0, 2π)` with `n` uniform samples (trapezoid weights).
    pub fn closed<P: Fn(f64) -> Vec2, D: Fn(f64) -> Vec2>(n: usize, p: P, dp: D) -> ParamCurve {
        let h = std::f64::consts::TAU / n as f64;
        let params: Vec<f64> = (0..n).map(|k| k as f64 * h).collect();
        ParamCurve {
            points: params.iter().map(|&t| p(t)).collect(),
            tangents: params.iter().map(|&t| dp(t)).collect(),
            weights: vec![h; n],
            params,
        }
    }

    /// Open curve on `[a, b]`, composite 8-point Gauss-Legendre over `panels`.
    pub fn open<P: Fn(f64) -> Vec2, D: Fn(f64) -> Vec2>(a: f64, b: f64, panels: usize, p: P, dp: D) -> ParamCurve {
        let rule = crate::quadrature::gauss8();
        let h = (b - a) / panels as f64;
        let (mut params, mut weights) = (Vec::new(), Vec::new());
        for k in 0..panels {
            for (t, w) in rule.on(a + k as f64 * h, a + (k + 1) as f64 * h) {
                params.push(t);
                weights.push(w);
            }
        }
        ParamCurve {
            points: params.iter().map(|&t| p(t)).collect(),
            tangents: params.iter().map(|&t| dp(t)).collect(),
            weights,
            params,
        }
    }

    fn scale(&self) -> f64 {
        let (lo, hi) = geometry::bbox(&self.points);
        (hi - lo).norm().max(1e-300)
    }
}

/// `F0` of `v0 ∨ v1` carried by the merge curve γ, as a density per unit parameter:
/// `½ ⟨(D²v0 + D²v1) R(∇v1 - ∇v0), γ'⟩` with `R` the rotation by π/2.
///
/// γ must run with the region `v0 < v1` on its right.
pub fn f0_merge_curve(v0: &dyn SmoothPatch, v1: &dyn SmoothPatch, gamma: &ParamCurve) -> Result<AtomicMeasure2> {
    let scale = gamma.scale();
    let delta = ORIENTATION_OFFSET * scale;
    let mut density = Vec::with_capacity(gamma.points.len());
    for k in 0..gamma.points.len() {
        let (p, dp, t) = (gamma.points[k], gamma.tangents[k], gamma.params[k]);
        let a = v0.value(p);
        let b = v1.value(p);
        let vtol = 1e-9 * (1.0 + a.abs());
        if (a - b).abs() > vtol {
            return Err(Error::Invalid(format!("patches differ by {} on the curve at parameter {t}", a - b)));
        }
        let right = -dp.rot90() / dp.norm();
        let on_right = v1.value(p + right * delta) - v0.value(p + right * delta);
        let on_left = v1.value(p - right * delta) - v0.value(p - right * delta);
        let stol = 1e-12 * (1.0 + a.abs());
        if on_right < -stol || on_left > stol {
            return Err(Error::Orientation { t });
        }
        let h = checked_hessian(v0, p)? + checked_hessian(v1, p)?;
        let g = (v1.gradient(p) - v0.gradient(p)).rot90();
        let d = 0.5 * h.form(g, dp);
        if d < -1e-10 * (1.0 + h.max_abs()) {
            return Err(Error::NegativeMass { p, mass: d });
        }
        density.push(d.max(0.0));
    }
    Ok(AtomicMeasure2 {
        atoms: Vec::new(),
        curves: vec![CurvePart { samples: gamma.points.clone(), density, weights: gamma.weights.clone() }],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::{conjugate, cone, pyramid, slab, Domain2};

    #[test]
    fn pyramid_has_four_unit_atoms() {
        let a = 1.7;
        let f = f0_polyhedral(&conjugate(&pyramid(a).unwrap()).unwrap()).unwrap();
        assert_eq!(f.atoms.len(), 4);
        for at in &f.atoms {
            assert!((at.mass - 1.0).abs() < 1e-14);
            assert!((at.p.norm() - a).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_square_is_one_atom_at_origin() {
        let f = f0_polyhedral(&conjugate(&slab(0.0, &Domain2::unit_square()).unwrap()).unwrap()).unwrap();
        assert_eq!(f.atoms.len(), 1);
        assert!(f.atoms[0].p.norm() < 1e-15 && (f.atoms[0].mass - 4.0).abs() < 1e-14);
    }

    #[test]
    fn cone_atoms_are_equal_on_the_circle() {
        let d = Domain2::disk_approx(48, 1.0).unwrap();
        let f = f0_polyhedral(&conjugate(&cone(0.8, &d).unwrap()).unwrap()).unwrap();
        assert_eq!(f.atoms.len(), 48);
        let m0 = f.atoms[0].mass;
        for a in &f.atoms {
            assert!((a.mass - m0).abs() < 1e-14 && (a.p.norm() - 0.8).abs() < 1e-13);
        }
        assert!((f.total_mass() - d.area()).abs() < 1e-13);
    }

    #[test]
    fn primal_body_is_rejected() {
        assert!(matches!(f0_polyhedral(&pyramid(1.0).unwrap()), Err(Error::UnboundedSubdifferential { .. })));
    }

    #[test]
    fn steiner_single_vertex_and_empty_set() {
        let w = conjugate(&pyramid(1.0).unwrap()).unwrap();
        let eps = [0.05, 0.1, 0.2, 0.3];
        let r = steiner_check(&w, &[Vec2::new(1.0, 0.0)], &eps).unwrap();
        assert!(r.coefficients[0].abs() < 1e-13 && r.coefficients[1].abs() < 1e-12);
        assert!((r.coefficients[2] - 1.0).abs() < 1e-12 && r.residual < 1e-13);
        let e = steiner_check(&w, &[], &eps).unwrap();
        assert!(e.coefficients.iter().all(|c| c.abs() < 1e-15));
        let all = [Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(0.0, -1.0)];
        // p + ε∂w(p) is injective for convex w, so only a repeated point can overlap.
        let twice = [all[0], all[1], all[0]];
        assert!(matches!(steiner_check(&w, &twice, &eps), Err(Error::Overlap { .. })));
        let ok = steiner_check(&w, &all, &[0.5, 0.8, 1.0]).unwrap();
        assert!((ok.coefficients[2] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_densities() {
        let ps = [Vec2::new(0.3, -0.2), Vec2::new(1.5, 0.7), Vec2::new(-2.0, 0.1)];
        for d in f0_density_smooth(&HalfSquare, &ps).unwrap() {
            assert!((d - 1.0).abs() < 1e-15);
        }
        for (d, p) in f0_density_smooth(&Hyperboloid, &ps).unwrap().iter().zip(ps) {
            assert!((d - 1.0 / (1.0 + p.norm2()).powi(2)).abs() < 1e-14);
        }
        for d in f0_density_smooth(&PolarSupport::disk(0.4), &ps).unwrap() {
            assert!(d.abs() < 1e-15);
        }
        let skew = FnPatch {
            value: Box::new(|_| 0.0),
            gradient: Box::new(|_| Vec2::ZERO),
            hessian: Box::new(|_| Mat2::new(1.0, 0.1, 0.0, 1.0)),
        };
        assert!(matches!(f0_density_smooth(&skew, &ps), Err(Error::AsymmetricHessian { .. })));
    }

    #[test]
    fn disk_front_merge_density() {
        let (rho, m) = (0.3, 2.0);
        let r = m / (1.0 - rho);
        let gamma = ParamCurve::closed(64, |t| Vec2::polar(t) * r, |t| Vec2::polar(t).rot90() * r);
        let f = f0_merge_curve(&PolarSupport::disk(rho), &ShiftedNorm { m }, &gamma).unwrap();
        for d in &f.curves[0].density {
            assert!((d - 0.5 * (1.0 - rho * rho)).abs() < 1e-14);
        }
        let rev = ParamCurve::closed(64, |t| Vec2::polar(-t) * r, |t| -Vec2::polar(-t).rot90() * r);
        assert!(matches!(
            f0_merge_curve(&PolarSupport::disk(rho), &ShiftedNorm { m }, &rev),
            Err(Error::Orientation { .. })
        ));
        let same = f0_merge_curve(&ShiftedNorm { m }, &ShiftedNorm { m }, &gamma).unwrap();
        assert!(same.total_mass().abs() < 1e-15);
    }
}
