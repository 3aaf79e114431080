//! Plane-symmetric bodies: the convex hull of the rim circle at height M and a convex
//! curve `u₀` in the plane `x₂ = 0`.
//!
//! Dual profile `v(p₁) = u₀*(p₁) + M`. Resistance
//! `J = ∫ [2√(v²-p²) v'²/(1+v²)² - (p v' - v)/(√(v²-p²) v (1+v²))] dp`,
//! whose Euler-Lagrange equation is solved by [`el_rhs`].

use crate::convex_core::{Domain2, PolyConvexFn};
use crate::error::{Error, Result};
use crate::geometry::{self, Vec2};
use crate::quadrature::{composite, gauss8};
use crate::resistance::{Method, ResistanceResult};
use serde::{Deserialize, Serialize};

pub const SINGULAR_TOL: f64 = 1e-12;
pub const HALVING_TOL: f64 = 1e-9;
pub const MAX_HALVINGS: usize = 10;
/// Gauss-8 panels on substituted end pieces.
pub const END_PANELS: usize = 256;
pub const DEFAULT_STEP: f64 = 1e-3;

/// `v''` from the Euler-Lagrange equation of the Maxwell functional.
pub fn el_rhs(p: f64, v: f64, w: f64) -> Result<f64> {
    let d = p * p - v * v;
    if d.abs() <= SINGULAR_TOL {
        return Err(Error::Singularity { p1: p, v });
    }
    Ok((v - p * w) / d + 2.0 * v * w * w / (v * v + 1.0) + v * (w * w - 1.0) / (2.0 * d))
}

/// `|rhs(λp, λv, w) - rhs(p, v, w)/λ|` and its closed-form value: only the middle term
/// `2vw²/(v²+1)` fails to scale like `1/λ`.
pub fn homogeneity_defect(p: f64, v: f64, w: f64, lambda: f64) -> Result<(f64, f64)> {
    let observed = (el_rhs(lambda * p, lambda * v, w)? - el_rhs(p, v, w)? / lambda).abs();
    let predicted = (2.0 * lambda * v * w * w / (lambda * lambda * v * v + 1.0) - 2.0 * v * w * w / (lambda * (v * v + 1.0))).abs();
    Ok((observed, predicted))
}

/// Lagrangian of the Maxwell functional.
pub fn lagrangian(p: f64, v: f64, w: f64) -> f64 {
    let q = ((v - p.abs()) * (v + p.abs())).sqrt();
    let a = 1.0 + v * v;
    2.0 * q * w * w / (a * a) - (p * w - v) / (q * v * a)
}

/// `(∂L/∂v, ∂L/∂w)`.
pub fn lagrangian_partials(p: f64, v: f64, w: f64) -> (f64, f64) {
    let q2 = (v - p.abs()) * (v + p.abs());
    let q = q2.sqrt();
    let a = 1.0 + v * v;
    let g = 1.0 / (q * v * a);
    let lv = 2.0 * w * w * (v / (q * a * a) - 4.0 * q * v / (a * a * a)) + g + (p * w - v) * g * (v / q2 + 1.0 / v + 2.0 * v / a);
    let lw = 4.0 * q * w / (a * a) - p * g;
    (lv, lw)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum End {
    /// Integration stops at the last node.
    Open,
    /// Continues as `v = |p| + c` (slope ±1) to infinity.
    Tail,
    /// The last node lies on the light cone `v = |p|`.
    Touch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    OdeShot,
    FromStratum,
    Analytic,
}

/// Dual profile on increasing nodes; a repeated node carries a kink (two slopes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaxwellCurve {
    pub m: f64,
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub left: End,
    pub right: End,
    pub source: Source,
}

impl MaxwellCurve {
    pub fn new(m: f64, p: Vec<f64>, v: Vec<f64>, dv: Vec<f64>, left: End, right: End, source: Source) -> Result<MaxwellCurve> {
        if p.len() < 2 || v.len() != p.len() || dv.len() != p.len() {
            return Err(Error::Invalid("curve needs at least two nodes with matching v and v'".into()));
        }
        if p.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::Invalid("curve nodes must be nondecreasing".into()));
        }
        if !(m > 0.0) {
            return Err(Error::Invalid(format!("height M must be positive, got {m}")));
        }
        let c = MaxwellCurve { m, p, v, dv, left, right, source };
        for (end, k) in [(left, 0), (right, c.p.len() - 1)] {
            if end == End::Tail && (c.dv[k].abs() - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!("tail end needs |v'| = 1, got {}", c.dv[k])));
            }
        }
        Ok(c)
    }

    /// `v ≡ M` on `[-M, M]`: the conjugate of a point stratum, touching the cone at both ends.
    pub fn point_stratum(m: f64, nodes: usize) -> Result<MaxwellCurve> {
        let n = nodes.max(2);
        let p: Vec<f64> = (0..n).map(|k| -m + 2.0 * m * k as f64 / (n - 1) as f64).collect();
        MaxwellCurve::new(m, p, vec![m; n], vec![0.0; n], End::Touch, End::Touch, Source::Analytic)
    }

    /// Mirror image `p -> -p`.
    pub fn reversed(&self) -> MaxwellCurve {
        MaxwellCurve {
            m: self.m,
            p: self.p.iter().rev().map(|x| -x).collect(),
            v: self.v.iter().rev().copied().collect(),
            dv: self.dv.iter().rev().map(|x| -x).collect(),
            left: self.right,
            right: self.left,
            source: self.source,
        }
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.dv.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Node range `[A*, B*]` before tails.
    pub fn range(&self) -> (f64, f64) {
        (self.p[0], self.p[self.p.len() - 1])
    }
}

/// Outcome of an integration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Exit {
    Reached,
    SlopeBound { p: f64, v: f64, slope: f64 },
    Singularity { p: f64, v: f64 },
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub p: Vec<f64>,
    pub v: Vec<f64>,
    pub dv: Vec<f64>,
    pub exit: Exit,
}

fn rk4(p: f64, v: f64, w: f64, h: f64) -> Result<(f64, f64)> {
    let k1 = (w, el_rhs(p, v, w)?);
    let k2 = (w + 0.5 * h * k1.1, el_rhs(p + 0.5 * h, v + 0.5 * h * k1.0, w + 0.5 * h * k1.1)?);
    let k3 = (w + 0.5 * h * k2.1, el_rhs(p + 0.5 * h, v + 0.5 * h * k2.0, w + 0.5 * h * k2.1)?);
    let k4 = (w + h * k3.1, el_rhs(p + h, v + h * k3.0, w + h * k3.1)?);
    Ok((v + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0), w + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1)))
}

/// Fixed-step RK4 from `p0` towards `p_end`; stops exactly where `|v'|` reaches 1 or at a singularity.
pub fn integrate_fixed(p0: f64, v0: f64, dv0: f64, p_end: f64, step: f64) -> Trace {
    let dir = if p_end >= p0 { 1.0 } else { -1.0 };
    let h = step.abs() * dir;
    let (mut p, mut v, mut w) = (p0, v0, dv0);
    let mut tr = Trace { p: vec![p], v: vec![v], dv: vec![w], exit: Exit::Reached };
    let steps = ((p_end - p0).abs() / step.abs()).ceil() as usize;
    for k in 0..steps {
        let hk = if k + 1 == steps { p_end - p } else { h };
        let next = match rk4(p, v, w, hk) {
            Ok(y) => y,
            Err(_) => {
                tr.exit = Exit::Singularity { p, v };
                return tr;
            }
        };
        if next.1.abs() > 1.0 {
            let target = next.1.signum();
            let (mut lo, mut hi) = (0.0, 1.0);
            let mut hit = next;
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                match rk4(p, v, w, mid * hk) {
                    Ok(y) if y.1.abs() >= 1.0 => {
                        hi = mid;
                        hit = y;
                    }
                    Ok(_) => lo = mid,
                    Err(_) => hi = mid,
                }
            }
            let pe = p + hi * hk;
            tr.p.push(pe);
            tr.v.push(hit.0);
            tr.dv.push(target);
            tr.exit = Exit::SlopeBound { p: pe, v: hit.0, slope: target };
            return tr;
        }
        p = if k + 1 == steps { p_end } else { p0 + h * (k + 1) as f64 };
        (v, w) = next;
        tr.p.push(p);
        tr.v.push(v);
        tr.dv.push(w);
        if v - p.abs() <= SINGULAR_TOL * (1.0 + v.abs()) {
            tr.exit = Exit::Singularity { p, v };
            return tr;
        }
    }
    tr
}

/// Step-halving driver: halves until the sup-norm change on shared nodes is below [`HALVING_TOL`].
fn integrate_converged(p0: f64, v0: f64, dv0: f64, p_end: f64, step: f64) -> Result<Trace> {
    if !(step > 0.0) {
        return Err(Error::Invalid(format!("step must be positive, got {step}")));
    }
    let mut h = step;
    let mut prev = integrate_fixed(p0, v0, dv0, p_end, h);
    for _ in 0..MAX_HALVINGS {
        h *= 0.5;
        let cur = integrate_fixed(p0, v0, dv0, p_end, h);
        let shared = (prev.p.len() - 1).min((cur.p.len() - 1) / 2);
        let mut change = 0.0f64;
        for k in 0..shared {
            change = change.max((cur.v[2 * k] - prev.v[k]).abs()).max((cur.dv[2 * k] - prev.dv[k]).abs());
        }
        let (ep, ec) = (*prev.p.last().unwrap(), *cur.p.last().unwrap());
        change = change.max((ep - ec).abs());
        if change < HALVING_TOL {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::IllPosed(format!("step halving did not converge down to step {h}")))
}

/// Integrates the EL equation over `[p0, p_end]` with step halving.
pub fn shoot(v0: f64, dv0: f64, range: (f64, f64), step: f64) -> Result<MaxwellCurve> {
    let (p0, p_end) = range;
    if !(v0 > p0.abs()) || !(dv0.abs() <= 1.0) {
        return Err(Error::Invalid(format!("need v0 > |p0| and |v0'| <= 1, got v0 = {v0}, v0' = {dv0}")));
    }
    let tr = integrate_converged(p0, v0, dv0, p_end, step)?;
    match tr.exit {
        Exit::Reached => {}
        Exit::SlopeBound { p, slope, .. } => return Err(Error::SlopeBound { p1: p, slope }),
        Exit::Singularity { p, v } => return Err(Error::Singularity { p1: p, v }),
    }
    let m = v0 - p0.abs();
    let (p, v, dv) = if p_end >= p0 { (tr.p, tr.v, tr.dv) } else { (rev(tr.p), rev(tr.v), rev(tr.dv)) };
    MaxwellCurve::new(m.max(f64::MIN_POSITIVE), p, v, dv, End::Open, End::Open, Source::OdeShot)
}

fn rev(mut x: Vec<f64>) -> Vec<f64> {
    x.reverse();
    x
}

/// Symmetric extremal from `v(0) = M`, `v'(0±) = ±s`, continued to the first exit on each side.
///
/// Exit with `v' = 1` continues as the tail `v = p + c`; exit with `v' = -1` (the curve turned
/// concave) is glued to the line of slope -1 down to the light cone.
pub fn symmetric_extremal(m: f64, s: f64, step: f64) -> Result<MaxwellCurve> {
    if !(m > 0.0) || !(0.0..=1.0).contains(&s) {
        return Err(Error::Invalid(format!("need M > 0 and 0 <= s <= 1, got M = {m}, s = {s}")));
    }
    let limit = 10.0 * (1.0 + m);
    let tr = integrate_converged(0.0, m, s, limit, step)?;
    let (mut p, mut v, mut dv) = (tr.p, tr.v, tr.dv);
    let right = match tr.exit {
        Exit::SlopeBound { slope, .. } if slope > 0.0 => End::Tail,
        Exit::SlopeBound { p: pe, v: ve, .. } => {
            let ps = 0.5 * (ve + pe);
            p.push(ps);
            v.push(ps);
            dv.push(-1.0);
            End::Touch
        }
        Exit::Singularity { p, v } => return Err(Error::Singularity { p1: p, v }),
        Exit::Reached => return Err(Error::IllPosed(format!("no exit before p = {limit}"))),
    };
    let mut full_p: Vec<f64> = p.iter().rev().map(|x| -x).collect();
    let mut full_v: Vec<f64> = v.iter().rev().copied().collect();
    let mut full_dv: Vec<f64> = dv.iter().rev().map(|x| -x).collect();
    let skip = if s == 0.0 { 1 } else { 0 };
    full_p.extend(p.iter().skip(skip));
    full_v.extend(v.iter().skip(skip));
    full_dv.extend(dv.iter().skip(skip));
    MaxwellCurve::new(m, full_p, full_v, full_dv, right, right, Source::OdeShot)
}

/// Hermite interpolant on `[a, b]`: `(v, v')` at `x`.
#[inline]
fn hermite(a: f64, b: f64, va: f64, vb: f64, da: f64, db: f64, x: f64) -> (f64, f64) {
    let h = b - a;
    let s = (x - a) / h;
    let (s2, s3) = (s * s, s * s * s);
    let v = (2.0 * s3 - 3.0 * s2 + 1.0) * va + (s3 - 2.0 * s2 + s) * h * da + (-2.0 * s3 + 3.0 * s2) * vb + (s3 - s2) * h * db;
    let d = ((6.0 * s2 - 6.0 * s) * va + (3.0 * s2 - 4.0 * s + 1.0) * h * da + (-6.0 * s2 + 6.0 * s) * vb + (3.0 * s2 - 2.0 * s) * h * db) / h;
    (v, d)
}

fn check_admissible(c: &MaxwellCurve) -> Result<()> {
    let n = c.p.len();
    for k in 0..n {
        let at_touch = (k == 0 && c.left == End::Touch) || (k == n - 1 && c.right == End::Touch);
        if !at_touch && !(c.v[k] - c.p[k].abs() > SINGULAR_TOL * (1.0 + c.v[k])) {
            return Err(Error::Singularity { p1: c.p[k], v: c.v[k] });
        }
    }
    Ok(())
}

/// `∫ L` over one Hermite interval, with `p = a + τ²` / `p = b - τ²` at touching ends.
fn interval_integral(c: &MaxwellCurve, k: usize, panels: usize) -> f64 {
    let (a, b) = (c.p[k], c.p[k + 1]);
    let f = |x: f64| {
        let (v, w) = hermite(a, b, c.v[k], c.v[k + 1], c.dv[k], c.dv[k + 1], x);
        lagrangian(x, v, w)
    };
    let touch_a = k == 0 && c.left == End::Touch;
    let touch_b = k + 2 == c.p.len() && c.right == End::Touch;
    let rule = gauss8();
    match (touch_a, touch_b) {
        (false, false) => rule.integrate(a, b, f),
        (true, false) => composite(rule, 0.0, (b - a).sqrt(), panels, |t| 2.0 * t * f(a + t * t)),
        (false, true) => composite(rule, 0.0, (b - a).sqrt(), panels, |t| 2.0 * t * f(b - t * t)),
        (true, true) => {
            let mid = 0.5 * (a + b);
            let half = (mid - a).sqrt();
            composite(rule, 0.0, half, panels, |t| 2.0 * t * f(a + t * t)) + composite(rule, 0.0, half, panels, |t| 2.0 * t * f(b - t * t))
        }
    }
}

/// `∫_{p_e}^{∞} L(p, p + c, 1) dp` (mirrored for the left end) via `p = p_e + t/(1-t)`.
fn tail_integral(pe: f64, ve: f64, panels: usize) -> f64 {
    let c = ve - pe;
    composite(gauss8(), 0.0, 1.0, panels, |t| {
        let x = pe + t / (1.0 - t);
        let v = x + c;
        let q = (c * (2.0 * x + c)).sqrt();
        let a = 1.0 + v * v;
        (2.0 * q / (a * a) + c / (q * v * a)) / ((1.0 - t) * (1.0 - t))
    })
}

/// Maxwell functional of `c`.
pub fn maxwell_resistance(c: &MaxwellCurve) -> Result<ResistanceResult> {
    let fine = maxwell_resistance_with(c, END_PANELS)?;
    let coarse = maxwell_resistance_with(c, END_PANELS / 2)?;
    Ok(ResistanceResult { value: fine, method: Method::DualCurve, error_estimate: (fine - coarse).abs() })
}

/// Same with `panels` Gauss-8 panels on every substituted end piece.
pub fn maxwell_resistance_with(c: &MaxwellCurve, panels: usize) -> Result<f64> {
    check_admissible(c)?;
    let n = c.p.len();
    let mut parts = Vec::with_capacity(n + 1);
    if c.left == End::Tail {
        parts.push(tail_integral(-c.p[0], c.v[0], panels));
    }
    for k in 0..n - 1 {
        if c.p[k + 1] > c.p[k] {
            parts.push(interval_integral(c, k, panels));
        }
    }
    if c.right == End::Tail {
        parts.push(tail_integral(c.p[n - 1], c.v[n - 1], panels));
    }
    let value = geometry::neumaier_sum(parts);
    if !value.is_finite() {
        return Err(Error::IllPosed("Maxwell functional is not finite".into()));
    }
    Ok(value)
}

/// Max-norm of the discrete Euler-Lagrange residual (gradient of the midpoint-rule functional
/// divided by the step) over interior nodes with equal spacing on both sides.
pub fn el_residual(c: &MaxwellCurve) -> f64 {
    let n = c.p.len();
    let mut worst = 0.0f64;
    for i in 1..n - 1 {
        let (hl, hr) = (c.p[i] - c.p[i - 1], c.p[i + 1] - c.p[i]);
        if !(hl > 0.0 && hr > 0.0) || (hl - hr).abs() > 1e-9 * hl {
            continue;
        }
        let (ml, mr) = (0.5 * (c.p[i - 1] + c.p[i]), 0.5 * (c.p[i] + c.p[i + 1]));
        let (vl, vr) = (0.5 * (c.v[i - 1] + c.v[i]), 0.5 * (c.v[i] + c.v[i + 1]));
        let (wl, wr) = ((c.v[i] - c.v[i - 1]) / hl, (c.v[i + 1] - c.v[i]) / hr);
        let (lvl, lwl) = lagrangian_partials(ml, vl, wl);
        let (lvr, lwr) = lagrangian_partials(mr, vr, wr);
        let r = (0.5 * (lvl + lvr) * hl + lwl - lwr) / hl;
        worst = worst.max(r.abs());
    }
    worst
}

/// Convex section `u₀` of the body in the symmetry plane, as a polyline `(x, u)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stratum {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl Stratum {
    /// Piecewise-linear value; `+∞` outside `[x₀, x_n]`.
    pub fn value(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return f64::INFINITY;
        }
        let k = self.x.partition_point(|&t| t <= x).clamp(1, n.max(2) - 1);
        if n == 1 {
            return self.u[0];
        }
        let (a, b) = (self.x[k - 1], self.x[k]);
        if b == a {
            return self.u[k - 1].min(self.u[k]);
        }
        self.u[k - 1] + (self.u[k] - self.u[k - 1]) * (x - a) / (b - a)
    }

    pub fn min(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup_i (p x_i - u_i) + M`.
    pub fn dual_value(&self, p: f64, m: f64) -> f64 {
        self.x.iter().zip(&self.u).map(|(&x, &u)| p * x - u).fold(f64::NEG_INFINITY, f64::max) + m
    }
}

/// 1D conjugate at the curve's nodes: `x = v'`, `u = p v' - v + M`.
pub fn stratum_from_dual(c: &MaxwellCurve) -> Result<Stratum> {
    if let Some(k) = c.dv.iter().position(|d| d.abs() > 1.0 + 1e-12) {
        return Err(Error::SlopeBound { p1: c.p[k], slope: c.dv[k].abs() });
    }
    if !c.is_convex(1e-12) {
        return Err(Error::NotInClass("dual profile is not convex".into()));
    }
    let mut pts: Vec<(f64, f64)> = (0..c.p.len()).map(|k| (c.dv[k].clamp(-1.0, 1.0), c.p[k] * c.dv[k] - c.v[k] + c.m)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|b, a| (b.0 - a.0).abs() <= 1e-15);
    Ok(Stratum { x: pts.iter().map(|p| p.0).collect(), u: pts.iter().map(|p| p.1).collect() })
}

/// Lower hull of the lifted stratum `(x, 0, u₀(x))` and the rim polygon at height M.
pub fn assemble_body(stratum: &Stratum, m: f64, rim: usize) -> Result<PolyConvexFn> {
    let lo = stratum.min();
    if lo.abs() > 1e-12 * (1.0 + m) {
        return Err(Error::NotInClass(format!("stratum minimum is {lo}, not 0")));
    }
    if stratum.max() > m * (1.0 + 1e-12) {
        return Err(Error::NotInClass(format!("stratum exceeds the height cap: {} > {m}", stratum.max())));
    }
    if stratum.x.iter().any(|x| x.abs() > 1.0 + 1e-12) {
        return Err(Error::NotInClass("stratum leaves [-1, 1]".into()));
    }
    let domain = Domain2::disk_approx(rim, 1.0)?;
    let mut pts: Vec<(Vec2, f64)> = stratum.x.iter().zip(&stratum.u).map(|(&x, &u)| (Vec2::new(x.clamp(-1.0, 1.0), 0.0), u)).collect();
    pts.extend(domain.vertices.iter().map(|&p| (p, m)));
    PolyConvexFn::from_lifted_points(domain, &pts, Some(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resistance::primal_resistance;
    use std::f64::consts::PI;

    #[test]
    fn rhs_values_and_parity() {
        for m in [0.5, 1.0, 2.0] {
            assert!((el_rhs(0.0, m, 0.0).unwrap() + 0.5 / m).abs() < 1e-15);
            let s: f64 = 0.7;
            let expect = -(1.0 + s * s) / (2.0 * m) + 2.0 * m * s * s / (1.0 + m * m);
            assert!((el_rhs(0.0, m, s).unwrap() - expect).abs() < 1e-14);
        }
        let a = el_rhs(0.3, 1.2, 0.4).unwrap();
        assert!((a - el_rhs(-0.3, 1.2, -0.4).unwrap()).abs() < 1e-15);
        assert!(matches!(el_rhs(1.0, 1.0, 0.0), Err(Error::Singularity { .. })));
    }

    #[test]
    fn partials_match_finite_differences() {
        for &(p, v, w) in &[(0.2, 1.5, 0.3), (-0.7, 1.1, -0.8), (0.0, 2.0, 0.9)] {
            let (lv, lw) = lagrangian_partials(p, v, w);
            let h = 1e-6;
            let fv = (lagrangian(p, v + h, w) - lagrangian(p, v - h, w)) / (2.0 * h);
            let fw = (lagrangian(p, v, w + h) - lagrangian(p, v, w - h)) / (2.0 * h);
            assert!((lv - fv).abs() < 1e-7 && (lw - fw).abs() < 1e-7);
        }
    }

    #[test]
    fn symmetric_shot_is_even() {
        let tr_r = integrate_fixed(0.0, 2.0, 0.0, 0.5, 1e-3);
        let tr_l = integrate_fixed(0.0, 2.0, 0.0, -0.5, 1e-3);
        for k in 0..tr_r.p.len() {
            assert!((tr_r.v[k] - tr_l.v[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn rk4_order() {
        let at = |h: f64| *integrate_fixed(0.0, 2.0, 0.8, 0.5, h).v.last().unwrap();
        let (a, b, c) = (at(0.1), at(0.05), at(0.025));
        let ratio = (a - b) / (b - c);
        assert!((12.0..20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn cone_curve_gives_cone_value() {
        for m in [0.5, 1.0, 2.0] {
            let c = MaxwellCurve::point_stratum(m, 33).unwrap();
            let j = maxwell_resistance(&c).unwrap().value;
            assert!((j - PI / (1.0 + m * m)).abs() < 1e-10, "{j}");
        }
    }

    #[test]
    fn stratum_examples() {
        let m = 1.5;
        let p: Vec<f64> = (0..=40).map(|k| -1.0 + k as f64 / 20.0).collect();
        let flat = MaxwellCurve::new(m, p.clone(), p.iter().map(|x| m + x.abs()).collect(), p.iter().map(|x| if *x < 0.0 { -1.0 } else { 1.0 }).collect(), End::Open, End::Open, Source::Analytic).unwrap();
        let s = stratum_from_dual(&flat).unwrap();
        assert!(s.u.iter().all(|u| u.abs() < 1e-15) && s.x[0] == -1.0 && *s.x.last().unwrap() == 1.0);
        let quad = MaxwellCurve::new(m, p.clone(), p.iter().map(|x| m + x * x / 2.0).collect(), p.clone(), End::Open, End::Open, Source::Analytic).unwrap();
        let s = stratum_from_dual(&quad).unwrap();
        for (x, u) in s.x.iter().zip(&s.u) {
            assert!((u - x * x / 2.0).abs() < 1e-15);
        }
        for (&pk, &vk) in quad.p.iter().zip(&quad.v) {
            assert!((s.dual_value(pk, m) - vk).abs() < 1e-12);
        }
    }

    #[test]
    fn shot_curve_duality_and_reflection() {
        let c = symmetric_extremal(2.0, 0.8, DEFAULT_STEP).unwrap();
        assert_eq!(c.right, End::Tail);
        assert!(c.is_convex(1e-12));
        let j = maxwell_resistance(&c).unwrap().value;
        let jr = maxwell_resistance(&c.reversed()).unwrap().value;
        assert!((j - jr).abs() < 1e-12);
        let s = stratum_from_dual(&c).unwrap();
        assert!(s.min().abs() < 1e-15);
        let u = assemble_body(&s, 2.0, 720).unwrap();
        let jp = primal_resistance(&u).unwrap().value;
        assert!((j - jp).abs() / j < 2e-3, "{j} vs {jp}");
    }

    #[test]
    fn concave_shot_is_glued_to_the_cone() {
        let c = symmetric_extremal(2.0, 0.0, DEFAULT_STEP).unwrap();
        assert_eq!(c.right, End::Touch);
        assert!(!c.is_convex(1e-12));
        assert!(stratum_from_dual(&c).is_err());
        let n = c.p.len();
        assert!((c.v[n - 1] - c.p[n - 1]).abs() < 1e-12);
    }
}
