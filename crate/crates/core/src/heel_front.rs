//! Heel bodies `(δ_Ω + M) ∨ δ_ω` over the unit disk, parameterized by the support function
//! `v(θ) = s_ω(cos θ, sin θ)` of the front set ω.
//!
//! The merge curve is `r(θ) = M / (1 - v(θ))`; with `f(r) = 1/(1+r²)` the resistance is
//! `½∫ [v² + (1-v²) f(r) - c(r) v'²] dθ`, `c(r) = 1 - f + r f' = r²(r²-1)/(1+r²)²`.

use crate::convex_core::{Domain2, PolyConvexFn};
use crate::error::{Error, Result};
use crate::geometry::{self, Vec2};
use crate::hessian_measure::{Atom, AtomicMeasure2, CurvePart};
use crate::quadrature::gauss8;
use crate::resistance::{dual_resistance, Method, ResistanceResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Default θ resolution: quadrature panels per full turn.
pub const DEFAULT_N: usize = 4096;
pub const SCAN_POINTS: usize = 64;
pub const GOLDEN_TOL: f64 = 1e-10;
/// Circumradii at or beyond this are treated as touching the rim.
pub const R_LIMIT: f64 = 1.0 - 1e-6;
pub const MAX_SIDES: usize = 64;
pub const TRANSITION_BRACKET: (f64, f64) = (0.5, 3.0);
pub const TRANSITION_TOL: f64 = 1e-8;
pub const AUDIT_TOL: f64 = 1e-9;
/// θ samples used to build bump perturbations.
pub const BUMP_SAMPLES: usize = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Generator {
    Polygon { vertices: Vec<Vec2> },
    Disk { rho: f64 },
    Free,
}

#[derive(Debug, Clone, PartialEq)]
enum Front {
    /// Counter-clockwise hull; one vertex is a point front, two a segment.
    Vertices(Vec<Vec2>),
    Disk(f64),
}

/// Arc of the circle on which a single vertex `w` of ω is the support point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub w: Vec2,
    pub t0: f64,
    pub t1: f64,
}

/// Switch angle between consecutive arcs; `lambda` is the jump of `v'` (the edge length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Switch {
    pub theta: f64,
    pub lambda: f64,
    pub v: f64,
}

#[derive(Debug, Clone)]
pub struct SupportFn {
    pub theta: Vec<f64>,
    pub v: Vec<f64>,
    pub generator: Generator,
    front: Front,
}

fn theta_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

impl SupportFn {
    /// Support function of the convex hull of `points`, sampled on `n` angles.
    pub fn polygon(points: &[Vec2], n: usize) -> Result<SupportFn> {
        let hull = geometry::convex_hull(points);
        let s = Self::from_hull(hull.clone(), n)?;
        Ok(SupportFn { generator: Generator::Polygon { vertices: hull }, ..s })
    }

    /// Regular `m`-gon with circumradius `r` and a vertex on the positive x-axis; `m = 2` is the segment `[-r, r] × {0}`.
    pub fn regular(m: usize, r: f64, n: usize) -> Result<SupportFn> {
        if m < 2 {
            return Err(Error::Invalid(format!("regular front needs m >= 2, got {m}")));
        }
        if !(r >= 0.0) {
            return Err(Error::Invalid(format!("circumradius must be nonnegative, got {r}")));
        }
        SupportFn::polygon(&regular_vertices(m, r), n)
    }

    pub fn disk(rho: f64, n: usize) -> Result<SupportFn> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::Invalid(format!("disk front needs 0 <= rho < 1, got {rho}")));
        }
        if n < 3 {
            return Err(Error::Invalid("need at least 3 angles".into()));
        }
        Ok(SupportFn { theta: theta_grid(n), v: vec![rho; n], generator: Generator::Disk { rho }, front: Front::Disk(rho) })
    }

    /// Free profile on a uniform grid, projected to a support function through the hull of
    /// its gradient curve `v e + v' e⊥`. `dv` defaults to periodic central differences.
    pub fn from_samples(v: &[f64], dv: Option<&[f64]>) -> Result<SupportFn> {
        let n = v.len();
        if n < 3 {
            return Err(Error::Invalid("need at least 3 samples".into()));
        }
        let h = TAU / n as f64;
        let d: Vec<f64> = match dv {
            Some(d) if d.len() == n => d.to_vec(),
            Some(d) => return Err(Error::Invalid(format!("{} derivative samples for {n} values", d.len()))),
            None => (0..n).map(|k| (v[(k + 1) % n] - v[(k + n - 1) % n]) / (2.0 * h)).collect(),
        };
        let pts: Vec<Vec2> = (0..n)
            .map(|k| {
                let e = Vec2::polar(h * k as f64);
                e * v[k] + e.rot90() * d[k]
            })
            .collect();
        Self::from_hull(geometry::convex_hull(&pts), n)
    }

    fn from_hull(hull: Vec<Vec2>, n: usize) -> Result<SupportFn> {
        if hull.is_empty() {
            return Err(Error::Invalid("empty front set".into()));
        }
        if n < 3 {
            return Err(Error::Invalid("need at least 3 angles".into()));
        }
        if let Some(w) = hull.iter().find(|w| !(w.norm() < 1.0)) {
            return Err(Error::Invalid(format!("front vertex {w:?} is not inside the unit disk (v >= 1)")));
        }
        let theta = theta_grid(n);
        let v: Vec<f64> = theta.iter().map(|&t| support_of(&hull, t)).collect();
        let s = SupportFn { theta, v, generator: Generator::Free, front: Front::Vertices(hull) };
        let lo = s.min_v();
        if lo < -1e-12 {
            return Err(Error::Invalid(format!("origin is outside the front set (min v = {lo})")));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.theta.len()
    }

    /// Hull vertices of ω; `None` for a disk front.
    pub fn vertices(&self) -> Option<&[Vec2]> {
        match &self.front {
            Front::Vertices(w) => Some(w),
            Front::Disk(_) => None,
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        match &self.front {
            Front::Vertices(w) => support_of(w, theta),
            Front::Disk(rho) => *rho,
        }
    }

    /// Smooth arcs in increasing angle, covering one full turn.
    pub fn arcs(&self) -> Vec<Arc> {
        let Front::Vertices(w) = &self.front else { return Vec::new() };
        let k = w.len();
        if k == 1 {
            return vec![Arc { w: w[0], t0: 0.0, t1: TAU }];
        }
        let phi: Vec<f64> = (0..k).map(|j| geometry::edge_normal(w[j], w[(j + 1) % k]).angle()).collect();
        (0..k)
            .map(|j| {
                let t0 = phi[(j + k - 1) % k];
                let mut t1 = phi[j];
                while t1 <= t0 {
                    t1 += TAU;
                }
                Arc { w: w[j], t0, t1 }
            })
            .collect()
    }

    /// Angles where `v'` jumps; empty for a disk or a point.
    pub fn switches(&self) -> Vec<Switch> {
        let Front::Vertices(w) = &self.front else { return Vec::new() };
        let k = w.len();
        if k == 1 {
            return Vec::new();
        }
        (0..k)
            .map(|j| {
                let e = w[(j + 1) % k] - w[j];
                let theta = Vec2::new(e.y, -e.x).angle();
                Switch { theta, lambda: e.norm(), v: w[j].dot(Vec2::polar(theta)) }
            })
            .collect()
    }

    pub fn min_v(&self) -> f64 {
        match &self.front {
            Front::Disk(rho) => *rho,
            Front::Vertices(_) => self
                .arcs()
                .iter()
                .map(|a| {
                    let mut m = a.w.dot(Vec2::polar(a.t0)).min(a.w.dot(Vec2::polar(a.t1)));
                    if a.w.norm() > 0.0 {
                        let anti = a.w.angle() + PI;
                        for t in [anti - TAU, anti, anti + TAU] {
                            if t > a.t0 && t < a.t1 {
                                m = m.min(-a.w.norm());
                            }
                        }
                    }
                    m
                })
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_v(&self) -> f64 {
        match &self.front {
            Front::Disk(rho) => *rho,
            Front::Vertices(w) => w.iter().map(|p| p.norm()).fold(0.0, f64::max),
        }
    }

    /// Smallest merge-curve radius `M / (1 - v)`.
    pub fn min_merge_radius(&self, m: f64) -> f64 {
        m / (1.0 - self.min_v())
    }

    /// Same front rotated by `alpha`.
    pub fn rotated(&self, alpha: f64) -> Result<SupportFn> {
        match &self.front {
            Front::Disk(rho) => SupportFn::disk(*rho, self.n()),
            Front::Vertices(w) => {
                let (c, s) = (alpha.cos(), alpha.sin());
                let pts: Vec<Vec2> = w.iter().map(|p| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y)).collect();
                SupportFn::polygon(&pts, self.n())
            }
        }
    }
}

fn support_of(w: &[Vec2], theta: f64) -> f64 {
    let e = Vec2::polar(theta);
    w.iter().map(|p| p.dot(e)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn regular_vertices(m: usize, r: f64) -> Vec<Vec2> {
    if m == 2 {
        return vec![Vec2::new(r, 0.0), Vec2::new(-r, 0.0)];
    }
    (0..m).map(|k| Vec2::polar(TAU * k as f64 / m as f64) * r).collect()
}

/// Newton weight of the merge curve at radius `r`.
pub fn f_of(r: f64) -> f64 {
    1.0 / (1.0 + r * r)
}

/// Coefficient of `-v'²` in the reduced integrand, `1 - f + r f'`.
pub fn legendre_coefficient(r: f64) -> f64 {
    let f = f_of(r);
    let df = -2.0 * r * f * f;
    1.0 - f + r * df
}

/// Integrand of the reduced functional.
#[inline]
fn integrand(v: f64, dv: f64, m: f64) -> f64 {
    let r = m / (1.0 - v);
    let r2 = r * r;
    let q = 1.0 + r2;
    let c = r2 * (r2 - 1.0) / (q * q);
    0.5 * (v * v + (1.0 - v * v) / q - c * dv * dv)
}

fn panels_for(len: f64, n: usize) -> usize {
    ((n as f64 * len / TAU).ceil() as usize).max(1)
}

/// `Σ arcs ∫ g(w, θ) dθ` with panel boundaries at every switch angle.
fn integrate_arcs<G: FnMut(Vec2, f64) -> f64>(arcs: &[Arc], n: usize, mut g: G) -> f64 {
    let rule = gauss8();
    let mut parts = Vec::with_capacity(arcs.len());
    for a in arcs {
        let p = panels_for(a.t1 - a.t0, n);
        let h = (a.t1 - a.t0) / p as f64;
        let mut s = 0.0;
        for k in 0..p {
            let lo = a.t0 + h * k as f64;
            let hi = if k + 1 == p { a.t1 } else { lo + h };
            s += rule.integrate(lo, hi, |t| g(a.w, t));
        }
        parts.push(s);
    }
    geometry::neumaier_sum(parts)
}

fn check_height(m: f64) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::Invalid(format!("height M must be positive, got {m}")));
    }
    Ok(())
}

/// Reduced functional with `panels` Gauss-8 panels per full turn.
pub fn reduced_functional_with(omega: &SupportFn, m: f64, panels: usize) -> Result<f64> {
    check_height(m)?;
    if !(omega.max_v() < 1.0) {
        return Err(Error::Invalid("v >= 1: the front touches the rim".into()));
    }
    Ok(match &omega.front {
        Front::Disk(rho) => {
            let rule = gauss8();
            let h = TAU / panels.max(1) as f64;
            let per = rule.integrate(0.0, h, |_| integrand(*rho, 0.0, m));
            per * panels.max(1) as f64
        }
        Front::Vertices(_) => integrate_arcs(&omega.arcs(), panels, |w, t| {
            let e = Vec2::polar(t);
            integrand(w.dot(e), w.dot(e.rot90()), m)
        }),
    })
}

/// Resistance of the heel body, with the θ resolution of `omega`; the error estimate compares against half resolution.
pub fn reduced_functional(omega: &SupportFn, m: f64) -> Result<ResistanceResult> {
    let n = omega.n();
    let value = reduced_functional_with(omega, m, n)?;
    let coarse = reduced_functional_with(omega, m, (n / 2).max(1))?;
    Ok(ResistanceResult { value, method: Method::DualCurve, error_estimate: (value - coarse).abs() })
}

/// Closed form for a disk front of radius `rho`.
pub fn disk_functional(rho: f64, m: f64) -> f64 {
    let r = m / (1.0 - rho);
    PI * (rho * rho + (1.0 - rho * rho) * f_of(r))
}

/// `L²(ω) = ½∫(v² - v'²) dθ` arc by arc.
pub fn front_area(omega: &SupportFn) -> f64 {
    match &omega.front {
        Front::Disk(rho) => PI * rho * rho,
        Front::Vertices(_) => integrate_arcs(&omega.arcs(), omega.n(), |w, t| {
            let e = Vec2::polar(t);
            let (v, dv) = (w.dot(e), w.dot(e.rot90()));
            0.5 * (v * v - dv * dv)
        }),
    }
}

/// Shoelace area of the hull (0 for points and segments).
pub fn shoelace_area(omega: &SupportFn) -> f64 {
    match &omega.front {
        Front::Disk(rho) => PI * rho * rho,
        Front::Vertices(w) if w.len() >= 3 => geometry::area(w),
        Front::Vertices(_) => 0.0,
    }
}

/// `F₀` restricted to the merge curve at angle `θ`, located at `r(θ) e_θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MergeDensity {
    /// `½(1 + v + v'')(1 - v)` per unit θ.
    Density { at: Vec2, value: f64 },
    /// `λ(1 - v)/2` at a switch angle.
    Atom { at: Vec2, lambda: f64, mass: f64 },
}

/// Switch angles are matched within `1e-12`.
pub fn merge_density(omega: &SupportFn, m: f64, theta: f64) -> Result<MergeDensity> {
    check_height(m)?;
    let at_angle = |t: f64, v: f64| Vec2::polar(t) * (m / (1.0 - v));
    for s in omega.switches() {
        let d = (theta - s.theta).rem_euclid(TAU);
        if d.min(TAU - d) < 1e-12 {
            return Ok(MergeDensity::Atom { at: at_angle(s.theta, s.v), lambda: s.lambda, mass: 0.5 * s.lambda * (1.0 - s.v) });
        }
    }
    let v = omega.value(theta);
    let kappa = match &omega.front {
        Front::Disk(rho) => *rho,
        Front::Vertices(_) => 0.0,
    };
    Ok(MergeDensity::Density { at: at_angle(theta, v), value: 0.5 * (1.0 + kappa) * (1.0 - v) })
}

/// Full `F₀` of the heel conjugate: `area(ω)` at the origin plus the merge curve.
pub fn merge_measure(omega: &SupportFn, m: f64) -> Result<AtomicMeasure2> {
    check_height(m)?;
    let mut atoms = vec![Atom { p: Vec2::ZERO, mass: front_area(omega) }];
    let mut curves = Vec::new();
    let rule = gauss8();
    let n = omega.n();
    let mut push_part = |t0: f64, t1: f64, v_of: &dyn Fn(f64) -> f64, kappa: f64| {
        let p = panels_for(t1 - t0, n);
        let h = (t1 - t0) / p as f64;
        let mut part = CurvePart { samples: Vec::new(), density: Vec::new(), weights: Vec::new() };
        for k in 0..p {
            for (t, wt) in rule.on(t0 + h * k as f64, t0 + h * (k + 1) as f64) {
                let v = v_of(t);
                part.samples.push(Vec2::polar(t) * (m / (1.0 - v)));
                part.density.push(0.5 * (1.0 + kappa) * (1.0 - v));
                part.weights.push(wt);
            }
        }
        curves.push(part);
    };
    match &omega.front {
        Front::Disk(rho) => push_part(0.0, TAU, &|_| *rho, *rho),
        Front::Vertices(_) => {
            for a in omega.arcs() {
                push_part(a.t0, a.t1, &|t| a.w.dot(Vec2::polar(t)), 0.0);
            }
            for s in omega.switches() {
                atoms.push(Atom { p: Vec2::polar(s.theta) * (m / (1.0 - s.v)), mass: 0.5 * s.lambda * (1.0 - s.v) });
            }
        }
    }
    Ok(AtomicMeasure2 { atoms, curves })
}

/// Resistance through the merge-curve measure.
pub fn dual_route(omega: &SupportFn, m: f64) -> Result<ResistanceResult> {
    dual_resistance(&merge_measure(omega, m)?)
}

/// Polyhedral heel body on `disk_approx(rim, 1)`; a disk front is replaced by an inscribed `rim`-gon.
pub fn heel_body(omega: &SupportFn, m: f64, rim: usize) -> Result<PolyConvexFn> {
    check_height(m)?;
    let domain = Domain2::disk_approx(rim, 1.0)?;
    let front: Vec<Vec2> = match &omega.front {
        Front::Vertices(w) => w.clone(),
        Front::Disk(rho) if *rho == 0.0 => vec![Vec2::ZERO],
        Front::Disk(rho) => regular_vertices(rim, *rho),
    };
    let mut pts: Vec<(Vec2, f64)> = front.into_iter().map(|p| (p, 0.0)).collect();
    pts.extend(domain.vertices.iter().map(|&p| (p, m)));
    PolyConvexFn::from_lifted_points(domain, &pts, Some(m))
}

/// Quadrature table for the half arc `[0, π/m]` of a regular `m`-gon with vertex at angle 0.
struct HalfArc {
    cos: Vec<f64>,
    sin: Vec<f64>,
    weight: Vec<f64>,
    copies: f64,
}

impl HalfArc {
    fn new(m: usize, n: usize) -> HalfArc {
        let half = PI / m as f64;
        let p = panels_for(half, n);
        let h = half / p as f64;
        let (mut cos, mut sin, mut weight) = (Vec::new(), Vec::new(), Vec::new());
        for k in 0..p {
            for (t, w) in gauss8().on(h * k as f64, h * (k + 1) as f64) {
                cos.push(t.cos());
                sin.push(t.sin());
                weight.push(w);
            }
        }
        HalfArc { cos, sin, weight, copies: 2.0 * m as f64 }
    }

    fn value(&self, r: f64, m: f64) -> f64 {
        let mut s = 0.0;
        for k in 0..self.weight.len() {
            s += self.weight[k] * integrand(r * self.cos[k], -r * self.sin[k], m);
        }
        self.copies * s
    }
}

/// Reduced functional of the regular `m`-gon with circumradius `r`, by symmetry from one half arc.
pub fn regular_value(sides: usize, r: f64, m: f64, n: usize) -> f64 {
    HalfArc::new(sides, n).value(r, m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularOptimum {
    pub sides: usize,
    pub m: f64,
    pub r_star: f64,
    pub j_star: f64,
    pub min_merge_radius: f64,
    /// Merge curve stays outside the unit circle (within 1e-9).
    pub rim_ok: bool,
    pub evaluations: usize,
}

/// Scan then golden section on `[lo, hi]`; returns (argmin, min, evaluations).
fn minimize_1d<F: Fn(f64) -> f64>(lo: f64, hi: f64, scan: usize, tol: f64, f: F) -> (f64, f64, usize) {
    let xs: Vec<f64> = (0..=scan).map(|k| lo + (hi - lo) * k as f64 / scan as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut evals = xs.len();
    let k = (0..ys.len()).min_by(|&i, &j| ys[i].total_cmp(&ys[j])).unwrap_or(0);
    let (mut a, mut b) = (xs[k.saturating_sub(1)], xs[(k + 1).min(scan)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    evals += 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        evals += 1;
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    let (mut best_x, mut best_y) = (x, fx);
    for (&xi, &yi) in [(&xs[k], &ys[k]), (&c, &fc), (&d, &fd)] {
        if yi < best_y {
            best_x = xi;
            best_y = yi;
        }
    }
    (best_x, best_y, evals + 1)
}

/// Best regular `sides`-gon front for height `m` over the circumradius.
pub fn optimize_regular(sides: usize, m: f64) -> Result<RegularOptimum> {
    optimize_regular_with(sides, m, DEFAULT_N)
}

pub fn optimize_regular_with(sides: usize, m: f64, n: usize) -> Result<RegularOptimum> {
    if sides < 2 {
        return Err(Error::Invalid(format!("need at least 2 sides, got {sides}")));
    }
    check_height(m)?;
    let table = HalfArc::new(sides, n);
    let (r_star, j_star, evaluations) = minimize_1d(0.0, R_LIMIT, SCAN_POINTS, GOLDEN_TOL, |r| table.value(r, m));
    if r_star > R_LIMIT - 1e-6 {
        return Err(Error::IllPosed(format!("minimizer for m = {sides}, M = {m} runs into the rim (R = {r_star})")));
    }
    let min_v = if sides == 2 { 0.0 } else { r_star * (PI / sides as f64).cos() };
    let min_merge_radius = m / (1.0 - min_v);
    Ok(RegularOptimum { sides, m, r_star, j_star, min_merge_radius, rim_ok: min_merge_radius >= 1.0 - 1e-9, evaluations })
}

/// Best disk front: `(ρ*, J*)`.
pub fn optimize_disk(m: f64) -> Result<(f64, f64)> {
    check_height(m)?;
    let (rho, j, _) = minimize_1d(0.0, R_LIMIT, SCAN_POINTS, GOLDEN_TOL, |r| disk_functional(r, m));
    Ok((rho, j))
}

/// Optima for `sides = 2..=max_sides`, in order.
pub fn regular_table(m: f64, max_sides: usize, n: usize) -> Result<Vec<RegularOptimum>> {
    (2..=max_sides).into_par_iter().map(|k| optimize_regular_with(k, m, n)).collect()
}

/// Globally best regular front over `2..=max_sides`.
pub fn best_regular(m: f64, max_sides: usize) -> Result<RegularOptimum> {
    let table = regular_table(m, max_sides, DEFAULT_N)?;
    Ok(table.into_iter().min_by(|a, b| a.j_star.total_cmp(&b.j_star)).expect("nonempty sweep"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transition {
    pub m_crit: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Best polygon (m >= 3) just below the crossover.
    pub sides_below: usize,
    pub gap_lo: f64,
    pub gap_hi: f64,
}

/// `J*_segment - min_{3 <= m <= max_sides} J*_m` and the winning m.
pub fn segment_gap(m: f64, max_sides: usize, n: usize) -> Result<(f64, usize)> {
    let table = regular_table(m, max_sides, n)?;
    let best = table[1..].iter().min_by(|a, b| a.j_star.total_cmp(&b.j_star)).expect("at least one polygon");
    Ok((table[0].j_star - best.j_star, best.sides))
}

/// Height where the segment front starts beating every regular polygon.
pub fn sweep_transition() -> Result<Transition> {
    sweep_transition_with(TRANSITION_BRACKET, MAX_SIDES, DEFAULT_N, TRANSITION_TOL)
}

pub fn sweep_transition_with(bracket: (f64, f64), max_sides: usize, n: usize, tol: f64) -> Result<Transition> {
    if max_sides < 3 {
        return Err(Error::Invalid("the comparison needs polygons with at least 3 sides".into()));
    }
    let (mut lo, mut hi) = bracket;
    let (g_lo, mut sides_below) = segment_gap(lo, max_sides, n)?;
    let (g_hi, _) = segment_gap(hi, max_sides, n)?;
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi, target: 0.0 });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let (g, k) = segment_gap(mid, max_sides, n)?;
        if g > 0.0 {
            lo = mid;
            sides_below = k;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Transition { m_crit: 0.5 * (lo + hi), bracket, iterations, sides_below, gap_lo: g_lo, gap_hi: g_hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    /// Gaussian jitter of every vertex, σ = 1e-3.
    Jitter,
    /// Cut one corner at a random fraction (< 2%) of its edges.
    CornerCut,
    /// `a cos⁴` bump on `v` over a random arc, then hull projection.
    Bump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub m: f64,
    pub j_base: f64,
    pub trials: usize,
    pub admissible: usize,
    pub improvements: usize,
    /// Smallest `J(perturbed) - J(base)` seen.
    pub worst_delta: f64,
    pub worst_kind: Option<Perturbation>,
}

fn perturb<R: Rng>(rng: &mut R, base: &[Vec2], kind: Perturbation, n: usize) -> Result<SupportFn> {
    match kind {
        Perturbation::Jitter => {
            let pts: Vec<Vec2> = base.iter().map(|p| *p + Vec2::new(normal(rng), normal(rng)) * 1e-3).collect();
            SupportFn::polygon(&pts, n)
        }
        Perturbation::CornerCut => {
            let k = base.len();
            if k < 3 {
                let pts: Vec<Vec2> = base.iter().map(|p| *p * (1.0 - rng.gen_range(0.0..0.02))).collect();
                return SupportFn::polygon(&pts, n);
            }
            let j = rng.gen_range(0..k);
            let s = rng.gen_range(0.0..0.02);
            let (prev, next) = (base[(j + k - 1) % k], base[(j + 1) % k]);
            let mut pts: Vec<Vec2> = base.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, p)| *p).collect();
            pts.push(base[j] + (prev - base[j]) * s);
            pts.push(base[j] + (next - base[j]) * s);
            SupportFn::polygon(&pts, n)
        }
        Perturbation::Bump => {
            let center = rng.gen_range(0.0..TAU);
            let width = rng.gen_range(0.05..0.5);
            let amp = 1e-3 * normal(rng);
            let h = TAU / BUMP_SAMPLES as f64;
            let (mut v, mut dv) = (Vec::with_capacity(BUMP_SAMPLES), Vec::with_capacity(BUMP_SAMPLES));
            for k in 0..BUMP_SAMPLES {
                let t = h * k as f64;
                let e = Vec2::polar(t);
                let w = base.iter().copied().max_by(|a, b| a.dot(e).total_cmp(&b.dot(e))).expect("nonempty front");
                let d = (t - center + PI).rem_euclid(TAU) - PI;
                let (b, db) = if d.abs() < width {
                    let x = PI * d / (2.0 * width);
                    (amp * x.cos().powi(4), -amp * 4.0 * x.cos().powi(3) * x.sin() * PI / (2.0 * width))
                } else {
                    (0.0, 0.0)
                };
                v.push(w.dot(e) + b);
                dv.push(w.dot(e.rot90()) + db);
            }
            let mut s = SupportFn::from_samples(&v, Some(&dv))?;
            s.theta = theta_grid(n);
            s.v = s.theta.iter().map(|&t| s.value(t)).collect();
            Ok(s)
        }
    }
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Random admissible perturbations of a polygonal front; counts those that lower J by more than [`AUDIT_TOL`].
pub fn perturbation_audit(base: &SupportFn, m: f64, trials: usize, seed: u64) -> Result<AuditReport> {
    let Some(verts) = base.vertices() else {
        return Err(Error::Invalid("perturbation audit needs a polygonal front".into()));
    };
    let n = base.n();
    let j_base = reduced_functional_with(base, m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kinds = [Perturbation::Jitter, Perturbation::CornerCut, Perturbation::Bump];
    let mut report = AuditReport { m, j_base, trials, admissible: 0, improvements: 0, worst_delta: f64::INFINITY, worst_kind: None };
    for t in 0..trials {
        let kind = kinds[t % kinds.len()];
        let Ok(s) = perturb(&mut rng, verts, kind, n) else { continue };
        let Ok(j) = reduced_functional_with(&s, m, n) else { continue };
        report.admissible += 1;
        let delta = j - j_base;
        if delta < -AUDIT_TOL {
            report.improvements += 1;
        }
        if delta < report.worst_delta {
            report.worst_delta = delta;
            report.worst_kind = Some(kind);
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeTrial {
    pub k: usize,
    pub amplitude: f64,
    pub delta: f64,
}

/// Circle front `v ≡ ρ` perturbed by `ε cos kθ` with `ε = 0.9ρ/(k²-1)` (so `v + v'' > 0`),
/// both sampled on `samples` angles and hull-projected; negative `delta` is a descent direction.
pub fn circle_modes(rho: f64, m: f64, modes: &[usize], samples: usize) -> Result<Vec<ModeTrial>> {
    check_height(m)?;
    let h = TAU / samples as f64;
    let sampled = |eps: f64, k: usize| -> Result<f64> {
        let v: Vec<f64> = (0..samples).map(|j| rho + eps * (k as f64 * h * j as f64).cos()).collect();
        let dv: Vec<f64> = (0..samples).map(|j| -eps * k as f64 * (k as f64 * h * j as f64).sin()).collect();
        let s = SupportFn::from_samples(&v, Some(&dv))?;
        reduced_functional_with(&s, m, DEFAULT_N.max(samples))
    };
    let j0 = sampled(0.0, 0)?;
    modes
        .iter()
        .filter(|&&k| k >= 2)
        .map(|&k| {
            let amplitude = 0.9 * rho / ((k * k - 1) as f64);
            Ok(ModeTrial { k, amplitude, delta: sampled(amplitude, k)? - j0 })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::primal_resistance;

    #[test]
    fn cone_and_disk_closed_forms() {
        for m in [0.5, 1.0, 2.0, 4.0] {
            let point = SupportFn::disk(0.0, DEFAULT_N).unwrap();
            let j = reduced_functional(&point, m).unwrap().value;
            assert!((j - PI / (1.0 + m * m)).abs() < 1e-12);
            let origin = SupportFn::polygon(&[Vec2::ZERO], DEFAULT_N).unwrap();
            assert!((reduced_functional(&origin, m).unwrap().value - j).abs() < 1e-12);
            for rho in [0.1, 0.4, 0.8] {
                let d = SupportFn::disk(rho, DEFAULT_N).unwrap();
                assert!((reduced_functional(&d, m).unwrap().value - disk_functional(rho, m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn areas_match_shoelace() {
        let sq = SupportFn::regular(4, 0.5, DEFAULT_N).unwrap();
        assert!((front_area(&sq) - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let pts: Vec<Vec2> = (0..7).map(|_| Vec2::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6))).collect();
            let Ok(s) = SupportFn::polygon(&pts, DEFAULT_N) else { continue };
            assert!((front_area(&s) - shoelace_area(&s)).abs() < 1e-10);
        }
        let seg = SupportFn::regular(2, 0.5, DEFAULT_N).unwrap();
        assert!(front_area(&seg).abs() < 1e-12, "{}", front_area(&seg));
    }

    #[test]
    fn dual_route_matches_reduced_functional() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 10 {
            let pts: Vec<Vec2> = (0..rng.gen_range(3..9)).map(|_| Vec2::polar(rng.gen_range(0.0..TAU)) * rng.gen_range(0.1..0.7)).collect();
            let Ok(s) = SupportFn::polygon(&pts, DEFAULT_N) else { continue };
            let m = rng.gen_range(0.5..3.0);
            let a = reduced_functional(&s, m).unwrap().value;
            let b = dual_route(&s, m).unwrap().value;
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            let mass = merge_measure(&s, m).unwrap().total_mass();
            assert!((mass - PI).abs() < 1e-10);
            checked += 1;
        }
        let d = SupportFn::disk(0.3, DEFAULT_N).unwrap();
        assert!((dual_route(&d, 1.5).unwrap().value - disk_functional(0.3, 1.5)).abs() < 1e-12);
    }

    #[test]
    fn densities_and_atoms() {
        let d = SupportFn::disk(0.3, 64).unwrap();
        let MergeDensity::Density { value, .. } = merge_density(&d, 1.0, 0.7).unwrap() else { panic!() };
        assert!((value - 0.5 * (1.0 - 0.09)).abs() < 1e-15);
        let sq = SupportFn::regular(4, 0.5, 64).unwrap();
        let sw = sq.switches();
        assert_eq!(sw.len(), 4);
        let MergeDensity::Atom { lambda, mass, .. } = merge_density(&sq, 1.0, sw[0].theta).unwrap() else { panic!() };
        assert!(lambda > 0.0 && (lambda - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((mass - 0.5 * lambda * (1.0 - 0.5 * (PI / 4.0).cos())).abs() < 1e-14);
    }

    #[test]
    fn regular_value_agrees_with_generic_route() {
        for sides in [2, 3, 5, 8] {
            let s = SupportFn::regular(sides, 0.4, DEFAULT_N).unwrap();
            let a = reduced_functional_with(&s, 1.3, DEFAULT_N).unwrap();
            let b = regular_value(sides, 0.4, 1.3, DEFAULT_N);
            assert!((a - b).abs() < 1e-12, "{sides}: {a} vs {b}");
        }
    }

    #[test]
    fn rotation_invariance() {
        let s = SupportFn::polygon(&[Vec2::new(0.5, 0.1), Vec2::new(-0.2, 0.4), Vec2::new(-0.3, -0.3), Vec2::new(0.2, -0.4)], DEFAULT_N).unwrap();
        let j = reduced_functional_with(&s, 1.1, DEFAULT_N).unwrap();
        for alpha in [0.3, 1.7, 4.0] {
            let jr = reduced_functional_with(&s.rotated(alpha).unwrap(), 1.1, DEFAULT_N).unwrap();
            assert!((j - jr).abs() < 1e-12);
        }
    }

    #[test]
    fn legendre_coefficient_sign() {
        for k in 0..1000 {
            let r = 1.0 + k as f64 * 0.01;
            let c = legendre_coefficient(r);
            let closed = r * r * (r * r - 1.0) / (1.0 + r * r).powi(2);
            assert!((c - closed).abs() < 1e-15 && c >= 0.0);
        }
        assert!(legendre_coefficient(0.5) < 0.0);
    }

    #[test]
    fn primal_heel_body_matches() {
        let s = SupportFn::regular(3, 0.3, DEFAULT_N).unwrap();
        let j = reduced_functional(&s, 1.0).unwrap().value;
        let u = heel_body(&s, 1.0, 720).unwrap();
        let jp = primal_resistance(&u).unwrap().value;
        assert!((j - jp).abs() / j < 2e-3, "{j} vs {jp}");
    }

    #[test]
    fn rejects_rim_contact() {
        assert!(SupportFn::regular(3, 1.0, 64).is_err());
        assert!(SupportFn::disk(1.0, 64).is_err());
        assert!(optimize_regular(3, 0.0).is_err());
    }
}
