//! The classical Newtonian body of revolution.
//!
//! Side profile in the slope parameter `v = u'(x) >= 1`:
//! `x = -p0/2 (1/v + 2v + v³)`, `u = -p0/2 (ln(1/v) + v² + ¾v⁴ - 7/4)`, `p0 < 0`.
//! At `v = 1` the profile meets the flat front disk of radius `-2 p0`.

use crate::convex_core::{Domain2, PolyConvexFn};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::quadrature::{adaptive, gauss8};
use crate::resistance::{Method, ResistanceResult};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_SAMPLES: usize = 512;
const BRACKET: (f64, f64) = (1.0 + 1e-12, 1e6);
const MAX_BISECT: usize = 200;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    pub p0: f64,
    pub v: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub x_front: f64,
    pub x0: f64,
    pub m: f64,
    pub v_max: f64,
}

fn x_of(p0: f64, v: f64) -> f64 {
    -0.5 * p0 * (1.0 / v + 2.0 * v + v * v * v)
}

fn u_of(p0: f64, v: f64) -> f64 {
    -0.5 * p0 * (-v.ln() + v * v + 0.75 * v.powi(4) - 1.75)
}

fn dx_dv(p0: f64, v: f64) -> f64 {
    -0.5 * p0 * (-1.0 / (v * v) + 2.0 + 3.0 * v * v)
}

/// `(x, u)` on the side profile.
pub fn profile_point(p0: f64, v: f64) -> Result<(f64, f64)> {
    if !(p0 < 0.0) {
        return Err(Error::Invalid(format!("p0 must be negative, got {p0}")));
    }
    if !(v >= 1.0) {
        return Err(Error::Invalid(format!("slope parameter v = {v} is below 1 (off the optimal branch)")));
    }
    Ok((x_of(p0, v), u_of(p0, v)))
}

/// `u(v) / x(v)`, independent of `p0` and increasing on `(1, ∞)`.
pub fn height_ratio(v: f64) -> f64 {
    u_of(-1.0, v) / x_of(-1.0, v)
}

/// Profile through `u(x0) = M` with `samples` slopes uniform in `[1, v_max]`.
pub fn calibrate(x0: f64, m: f64) -> Result<RadialProfile> {
    calibrate_with(x0, m, DEFAULT_SAMPLES)
}

pub fn calibrate_with(x0: f64, m: f64, samples: usize) -> Result<RadialProfile> {
    if !(x0 > 0.0 && x0.is_finite()) || !(m > 0.0 && m.is_finite()) {
        return Err(Error::Invalid(format!("need x0 > 0 and M > 0, got x0 = {x0}, M = {m}")));
    }
    if samples < 2 {
        return Err(Error::Invalid("need at least two profile samples".into()));
    }
    let target = m / x0;
    let (mut lo, mut hi) = BRACKET;
    let (g_lo, g_hi) = (height_ratio(lo), height_ratio(hi));
    if !(g_lo < target && target < g_hi) {
        return Err(Error::Bracket { lo, hi, g_lo, g_hi, target });
    }
    for _ in 0..MAX_BISECT {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if height_ratio(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v_max = if (height_ratio(hi) - target).abs() < (height_ratio(lo) - target).abs() { hi } else { lo };
    let p0 = -2.0 * x0 / (1.0 / v_max + 2.0 * v_max + v_max.powi(3));
    let tol = 1e-10 * (1.0 + m + x0);
    let (xe, ue) = (x_of(p0, v_max), u_of(p0, v_max));
    if (xe - x0).abs() > tol || (ue - m).abs() > tol {
        return Err(Error::IllPosed(format!("calibration residuals |x - x0| = {}, |u - M| = {}", (xe - x0).abs(), (ue - m).abs())));
    }
    let v: Vec<f64> = (0..samples).map(|k| 1.0 + (v_max - 1.0) * k as f64 / (samples - 1) as f64).collect();
    let mut v = v;
    v[0] = 1.0;
    v[samples - 1] = v_max;
    let x: Vec<f64> = v.iter().map(|&s| x_of(p0, s)).collect();
    let u: Vec<f64> = v.iter().map(|&s| u_of(p0, s)).collect();
    Ok(RadialProfile { p0, x_front: x[0], v, x, u, x0, m, v_max })
}

impl RadialProfile {
    /// Height at radius `r` (flat front, side profile, `+∞` past `x0`); slope found by bisection.
    pub fn height_at(&self, r: f64) -> f64 {
        if r <= self.x_front {
            return 0.0;
        }
        if r > self.x0 * (1.0 + 1e-14) {
            return f64::INFINITY;
        }
        let (mut lo, mut hi) = (1.0, self.v_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if x_of(self.p0, mid) < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        u_of(self.p0, 0.5 * (lo + hi))
    }

    /// Edge slope `du/dx` at the front edge, from the parameterization (`= v` there).
    pub fn edge_slope(&self) -> f64 {
        let v = self.v[0];
        let du_dv = -0.5 * self.p0 * (-1.0 / v + 2.0 * v + 3.0 * v.powi(3));
        du_dv / dx_dv(self.p0, v)
    }
}

/// `π x_front² + 2π ∫ x dx / (1 + u'(x)²)`, integrated in the slope parameter.
pub fn radial_resistance(profile: &RadialProfile) -> ResistanceResult {
    let p0 = profile.p0;
    let side = adaptive(1.0, profile.v_max, 1e-14, 40, |v| x_of(p0, v) * dx_dv(p0, v) / (1.0 + v * v));
    ResistanceResult {
        value: PI * profile.x_front * profile.x_front + 2.0 * PI * side.value,
        method: Method::PrimalQuadrature,
        error_estimate: 2.0 * PI * side.error,
    }
}

/// Same integral over `x`, with `v(x)` from monotone piecewise-linear inversion of the samples.
pub fn radial_resistance_by_inversion(profile: &RadialProfile) -> ResistanceResult {
    let rule = gauss8();
    let mut side = 0.0;
    for k in 0..profile.x.len() - 1 {
        let (xa, xb) = (profile.x[k], profile.x[k + 1]);
        let (va, vb) = (profile.v[k], profile.v[k + 1]);
        side += rule.integrate(xa, xb, |x| {
            let v = va + (vb - va) * (x - xa) / (xb - xa);
            x / (1.0 + v * v)
        });
    }
    let value = PI * profile.x_front * profile.x_front + 2.0 * PI * side;
    let exact = radial_resistance(profile).value;
    ResistanceResult { value, method: Method::PrimalQuadrature, error_estimate: (value - exact).abs() }
}

/// Polyhedral body of revolution on `disk_approx(m, x0)`: one ring of `m` points per profile sample.
pub fn revolve(profile: &RadialProfile, m: usize) -> Result<PolyConvexFn> {
    let domain = Domain2::disk_approx(m, profile.x0)?;
    let dirs: Vec<Vec2> = (0..m).map(|j| Vec2::polar(std::f64::consts::TAU * j as f64 / m as f64)).collect();
    let n = profile.x.len();
    let mut pts = Vec::with_capacity(n * m);
    for k in 0..n {
        let (r, z) = if k == n - 1 { (profile.x0, profile.m) } else { (profile.x[k], profile.u[k]) };
        for (j, d) in dirs.iter().enumerate() {
            let p = if k == n - 1 { domain.vertices[j] } else { *d * r };
            pts.push((p, z));
        }
    }
    PolyConvexFn::from_lifted_points(domain, &pts, Some(profile.m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parametric_values() {
        assert_eq!(profile_point(-1.0, 1.0).unwrap(), (2.0, 0.0));
        let (x, u) = profile_point(-1.0, 2.0).unwrap();
        assert!((x - 6.25).abs() < 1e-15);
        assert!((u - (14.25 - 2f64.ln()) / 2.0).abs() < 1e-14);
        let (x2, u2) = profile_point(-2.0, 1.7).unwrap();
        let (x1, u1) = profile_point(-1.0, 1.7).unwrap();
        assert!((x2 - 2.0 * x1).abs() < 1e-15 && (u2 - 2.0 * u1).abs() < 1e-15);
        assert!(profile_point(-1.0, 0.9).is_err());
    }

    #[test]
    fn calibration_residuals_and_homogeneity() {
        let p = calibrate(1.0, 1.0).unwrap();
        let (x, u) = profile_point(p.p0, p.v_max).unwrap();
        assert!((x - 1.0).abs() < 1e-12 && (u - 1.0).abs() < 1e-12);
        let q = calibrate(2.0, 2.0).unwrap();
        assert!((q.v_max - p.v_max).abs() < 1e-12 && (q.p0 - 2.0 * p.p0).abs() < 1e-12);
        assert_eq!(p.u[0], 0.0);
        assert!((p.x_front + 2.0 * p.p0).abs() < 1e-15);
        assert!((p.edge_slope() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn flat_limit() {
        let p = calibrate(1.0, 1e-6).unwrap();
        assert!(p.v_max < 1.01);
        assert!((radial_resistance(&p).value - PI).abs() < 1e-3);
    }

    #[test]
    fn quadrature_routes_agree() {
        let p = calibrate(1.0, 1.0).unwrap();
        let a = radial_resistance(&p);
        let b = radial_resistance_by_inversion(&p);
        assert!(a.error_estimate < 1e-12);
        assert!((a.value - b.value).abs() < 1e-5);
    }

    #[test]
    fn ratio_is_increasing() {
        let mut prev = height_ratio(1.0);
        for k in 1..5000 {
            let g = height_ratio(1.0 + k as f64 * 1e-3);
            assert!(g > prev);
            prev = g;
        }
    }
}
