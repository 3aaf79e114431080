//! The acceptance suite: twelve criteria, each a list of numeric checks against thresholds.
//!
//! Shared by `tests/acceptance.rs` and the `accept` CLI command.

use crate::convex_core::{conjugate, Body, Domain2, Piece, PolyConvexFn};
use crate::corpus::{band_body, Corpus};
use crate::error::Result;
use crate::geometry::Vec2;
use crate::heel_front::{self, SupportFn};
use crate::hessian_measure::{f0_merge_curve, f0_polyhedral, steiner_check, ParamCurve, PolarSupport, ShiftedNorm};
use crate::maxwell_stratum::{self as mx, End, MaxwellCurve, Source};
use crate::newton_radial;
use crate::resistance::{self, convergence_harness, dual_resistance_of, gradient_histogram, legendre_eigenvalues, primal_resistance, tilde_transform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::time::Instant;

pub const SEED: u64 = 7;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"<="`, `">="`, `"in"` (threshold is the half width around `target`) or `"flag"`.
    pub relation: String,
    pub pass: bool,
}

impl Check {
    fn le(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, relation: "<=".into(), pass: value <= threshold }
    }

    fn lt(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, relation: "<".into(), pass: value < threshold }
    }

    fn ge(name: &str, value: f64, threshold: f64) -> Check {
        Check { name: name.into(), value, threshold, relation: ">=".into(), pass: value >= threshold }
    }

    fn within(name: &str, value: f64, lo: f64, hi: f64) -> Check {
        Check { name: format!("{name} in [{lo}, {hi}]"), value, threshold: hi, relation: "in".into(), pass: (lo..=hi).contains(&value) }
    }

    fn flag(name: &str, ok: bool) -> Check {
        Check { name: name.into(), value: if ok { 1.0 } else { 0.0 }, threshold: 1.0, relation: "flag".into(), pass: ok }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Criterion {
    pub id: usize,
    pub title: String,
    pub checks: Vec<Check>,
    pub pass: bool,
    /// Expected to fail; `note` explains why.
    pub known_red: bool,
    pub note: Option<String>,
    pub error: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl Criterion {
    pub fn line(&self) -> String {
        let tag = match (self.pass, self.known_red) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let summary: Vec<String> = self
            .checks
            .iter()
            .map(|c| match c.relation.as_str() {
                "flag" => format!("{}{}", if c.pass { "" } else { "!" }, c.name),
                "in" => format!("{}{} = {:.6}", if c.pass { "" } else { "!" }, c.name, c.value),
                r => format!("{}{} = {:.3e} ({r} {:.0e})", if c.pass { "" } else { "!" }, c.name, c.value, c.threshold),
            })
            .collect();
        let mut s = format!("[{tag}] {:>2} {} ({:.1} s): {}", self.id, self.title, self.seconds, summary.join("; "));
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        s
    }
}

pub const TITLES: [&str; 12] = [
    "duality identity",
    "mass conservation",
    "Steiner polynomial",
    "cone identity",
    "merge density",
    "front transition",
    "regular-polygon local optimality",
    "gradient-modulus transform",
    "Newton radial body",
    "Maxwell Euler-Lagrange",
    "pointwise-limit continuity",
    "Legendre eigenvalues",
];

const CRITERION_10_NOTE: &str = "rhs(λp, λv, v') = rhs(p, v, v')/λ cannot hold: the middle term 2vv'²/(v²+1) is not \
homogeneous of degree -1. The measured defect equals that term's closed-form defect at every sample; the other checks pass.";

pub fn run(id: usize) -> Criterion {
    let t = Instant::now();
    let out = match id {
        1 => duality(),
        2 => mass(),
        3 => steiner(),
        4 => cone_identity(),
        5 => merge_density(),
        6 => transition(),
        7 => local_optimality(),
        8 => gradient_modulus(),
        9 => newton_radial_checks(),
        10 => maxwell(),
        11 => continuity(),
        12 => legendre(),
        _ => Err(crate::error::Error::Invalid(format!("no criterion {id}"))),
    };
    let known_red = id == 10;
    let (checks, error) = match out {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    Criterion {
        id,
        title: TITLES.get(id.wrapping_sub(1)).copied().unwrap_or("unknown").into(),
        pass: error.is_none() && !checks.is_empty() && checks.iter().all(|c| c.pass),
        checks,
        known_red,
        note: known_red.then(|| CRITERION_10_NOTE.to_string()),
        error,
        seconds: t.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<Criterion> {
    (1..=12).map(run).collect()
}

fn duality() -> Result<Vec<Check>> {
    let t = Instant::now();
    let corpus = Corpus::generate(SEED, 100)?;
    let mut worst = 0.0f64;
    for u in &corpus.bodies {
        let jp = primal_resistance(u)?.value;
        let jd = dual_resistance_of(&conjugate(u)?)?.value;
        worst = worst.max((jp - jd).abs() / jp);
    }
    Ok(vec![Check::le("max |J - J*|/J over 100 bodies", worst, 1e-12), Check::le("runtime s", t.elapsed().as_secs_f64(), 60.0)])
}

fn mass() -> Result<Vec<Check>> {
    let corpus = Corpus::generate(SEED, 100)?;
    let mut worst = 0.0f64;
    for u in &corpus.bodies {
        let total = f0_polyhedral(&conjugate(u)?)?.total_mass();
        let area = u.domain().area();
        worst = worst.max((total - area).abs() / area);
    }
    Ok(vec![Check::le("max |F0(R²) - area|/area", worst, 1e-12)])
}

fn steiner() -> Result<Vec<Check>> {
    let corpus = Corpus::generate(SEED + 1, 20)?;
    let (mut gap, mut residual) = (0.0f64, 0.0f64);
    for u in &corpus.bodies {
        let w = conjugate(u)?;
        let eta: Vec<Vec2> = f0_polyhedral(&w)?.atoms.iter().map(|a| a.p).collect();
        let r = steiner_check(&w, &eta, &[0.1, 0.2, 0.4, 0.8])?;
        gap = gap.max(r.mass_gap);
        residual = residual.max(r.residual);
    }
    Ok(vec![Check::le("max |c2 - atom mass|", gap, 1e-10), Check::le("max fit residual", residual, 1e-10)])
}

fn cone_identity() -> Result<Vec<Check>> {
    let mut worst = 0.0f64;
    for m in [0.5, 1.0, 2.0, 4.0] {
        let point = SupportFn::disk(0.0, heel_front::DEFAULT_N)?;
        let j = heel_front::reduced_functional(&point, m)?.value;
        worst = worst.max((j - PI / (1.0 + m * m)).abs());
    }
    Ok(vec![Check::le("max |J(v=0) - π/(1+M²)|", worst, 1e-9)])
}

fn merge_density() -> Result<Vec<Check>> {
    let mut density_gap = 0.0f64;
    for &(rho, m) in &[(0.0, 1.0), (0.3, 2.0), (0.6, 0.8), (0.85, 1.5)] {
        let r = m / (1.0 - rho);
        let gamma = ParamCurve::closed(256, |t| Vec2::polar(t) * r, |t| Vec2::polar(t).rot90() * r);
        let f = f0_merge_curve(&PolarSupport::disk(rho), &ShiftedNorm { m }, &gamma)?;
        for d in &f.curves[0].density {
            density_gap = density_gap.max((d - 0.5 * (1.0 - rho * rho)).abs());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut route_gap = 0.0f64;
    let mut done = 0;
    while done < 10 {
        let k = rng.gen_range(3..10);
        let pts: Vec<Vec2> = (0..k).map(|_| Vec2::polar(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.1..0.7)).collect();
        let Ok(s) = SupportFn::polygon(&pts, heel_front::DEFAULT_N) else { continue };
        let m = rng.gen_range(0.5..3.0);
        let a = heel_front::reduced_functional(&s, m)?.value;
        let b = heel_front::dual_route(&s, m)?.value;
        route_gap = route_gap.max((a - b).abs());
        done += 1;
    }
    Ok(vec![
        Check::le("max |density - (1-ρ²)/2|", density_gap, 1e-8),
        Check::le("max |atom route - reduced functional| (10 polygons)", route_gap, 1e-8),
    ])
}

fn transition() -> Result<Vec<Check>> {
    let t = Instant::now();
    let tr = heel_front::sweep_transition()?;
    Ok(vec![Check::within("M_crit", tr.m_crit, 1.16, 1.19), Check::le("runtime s", t.elapsed().as_secs_f64(), 600.0)])
}

fn local_optimality() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (i, m) in [0.7, 0.9, 1.1].into_iter().enumerate() {
        let best = heel_front::best_regular(m, heel_front::MAX_SIDES)?;
        let base = SupportFn::regular(best.sides, best.r_star, heel_front::DEFAULT_N)?;
        let audit = heel_front::perturbation_audit(&base, m, 200, SEED + i as u64)?;
        checks.push(Check::le(&format!("improvements at M={m} (m*={})", best.sides), audit.improvements as f64, 0.0));
        checks.push(Check::ge(&format!("admissible trials at M={m}"), audit.admissible as f64, 200.0));
    }
    let (rho, _) = heel_front::optimize_disk(2.0)?;
    let modes = heel_front::circle_modes(rho, 2.0, &[2, 3, 4, 6, 8], 4096)?;
    let best = modes.iter().map(|t| t.delta).fold(f64::INFINITY, f64::min);
    checks.push(Check::ge("improving circle modes at M=2", modes.iter().filter(|t| t.delta < -heel_front::AUDIT_TOL).count() as f64, 1.0));
    checks.push(Check::lt("best circle-mode ΔJ", best, -heel_front::AUDIT_TOL));
    Ok(checks)
}

fn gradient_modulus() -> Result<Vec<Check>> {
    let corpus = Corpus::generate(SEED, 100)?;
    let mut worst = f64::NEG_INFINITY;
    for u in &corpus.bodies {
        let m = u.height_cap().unwrap_or(1.0);
        let w = conjugate(u)?;
        let before = dual_resistance_of(&w)?.value;
        let after = dual_resistance_of(&tilde_transform(&w, u.domain(), m)?)?.value;
        worst = worst.max((after - before) / before);
    }
    let band = band_body(2.0)?;
    let wb = conjugate(&band)?;
    let gain = dual_resistance_of(&wb)?.value - dual_resistance_of(&tilde_transform(&wb, band.domain(), 2.0)?)?.value;
    let newton = newton_radial::revolve(&newton_radial::calibrate(1.0, 1.0)?, 360)?;
    let h = gradient_histogram(&newton, &[0.0, 1.0]);
    Ok(vec![
        Check::le("max relative J* increase under tilde (100 bodies)", worst, 1e-12),
        Check::ge("band body improvement", gain, 1e-4),
        Check::le("Newton body (0,1)-band mass", h.band_mass, 0.0),
    ])
}

fn newton_radial_checks() -> Result<Vec<Check>> {
    let p = newton_radial::calibrate(1.0, 1.0)?;
    let js: Vec<f64> =
        [0.5, 1.0, 2.0, 4.0].iter().map(|&m| newton_radial::calibrate(1.0, m).map(|q| newton_radial::radial_resistance(&q).value)).collect::<Result<_>>()?;
    let decreasing = js.windows(2).all(|w| w[1] < w[0]);
    let jr = newton_radial::radial_resistance(&p).value;
    let jp = primal_resistance(&newton_radial::revolve(&p, 720)?)?.value;
    Ok(vec![
        Check::le("|u(v=1)|", p.u[0].abs(), 0.0),
        Check::le("|edge slope - 1|", (p.edge_slope() - 1.0).abs(), 0.0),
        Check::flag("J strictly decreasing over M in {0.5,1,2,4}", decreasing),
        Check::le("revolved 720x512 relative gap", (jp - jr).abs() / jr, 1e-3),
    ])
}

fn maxwell() -> Result<Vec<Check>> {
    let (m, s) = (2.0, 0.8);
    let shot = |h: f64| -> Result<f64> {
        let tr = mx::integrate_fixed(0.0, m, s, 0.8, h);
        Ok(mx::el_residual(&MaxwellCurve::new(m, tr.p, tr.v, tr.dv, End::Open, End::Open, Source::OdeShot)?))
    };
    let ratio = shot(2e-3)? / shot(1e-3)?;

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut defect, mut mismatch) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let v = rng.gen_range(0.2..4.0);
        let p = rng.gen_range(-0.95..0.95) * v;
        let w = rng.gen_range(-1.0..1.0);
        for lambda in [0.5, 2.0, 4.0] {
            let (obs, pred) = mx::homogeneity_defect(p, v, w, lambda)?;
            let scale = 1.0 + mx::el_rhs(p, v, w)?.abs() + mx::el_rhs(lambda * p, lambda * v, w)?.abs();
            defect = defect.max(obs / scale);
            mismatch = mismatch.max((obs - pred).abs() / scale);
        }
    }

    let c = mx::symmetric_extremal(m, s, mx::DEFAULT_STEP)?;
    let jd = mx::maxwell_resistance(&c)?.value;
    let jp = primal_resistance(&mx::assemble_body(&mx::stratum_from_dual(&c)?, m, 720)?)?.value;
    Ok(vec![
        Check::within("EL residual ratio h/(h/2)", ratio, 3.5, 4.5),
        Check::le("homogeneity identity defect (1000 points)", defect, 1e-12),
        Check::le("defect minus closed-form middle-term defect", mismatch, 1e-12),
        Check::le("dual vs primal hull body, relative", (jd - jp).abs() / jd, 2e-3),
    ])
}

fn continuity() -> Result<Vec<Check>> {
    let labels = [10usize, 100, 1000, 10000];

    let base = newton_radial::revolve(&newton_radial::calibrate_with(1.0, 1.0, 128)?, 180)?;
    let limit = primal_resistance(&base)?.value;
    let scaled: Vec<PolyConvexFn> = labels.iter().map(|&k| base.scaled(1.0 - 1.0 / k as f64)).collect::<Result<_>>()?;
    let seq: Vec<&dyn Body> = scaled.iter().map(|u| u as &dyn Body).collect();
    let a = convergence_harness(&seq, &labels, limit, 1e-3)?;

    let profile = newton_radial::calibrate(1.0, 1.0)?;
    let disk = Domain2::disk_approx(720, 1.0)?;
    let grids: Vec<_> = [32usize, 64, 128, 256]
        .iter()
        .map(|&n| crate::convex_core::GridConvexFn::sample(&disk, n, |x| profile.height_at(x.norm()).min(profile.m)))
        .collect::<Result<_>>()?;
    let seq: Vec<&dyn Body> = grids.iter().map(|g| g as &dyn Body).collect();
    let b = convergence_harness(&seq, &[32, 64, 128, 256], newton_radial::radial_resistance(&profile).value, 1e-3)?;

    let m = 2.0;
    let u = band_body(m)?;
    let limit = primal_resistance(&u)?.value;
    let walls: Vec<PolyConvexFn> = labels
        .iter()
        .map(|&k| {
            let delta = 1.0 / k as f64;
            let mut pieces = u.pieces().to_vec();
            for (n, h) in u.domain().edge_halfplanes() {
                pieces.push(Piece::new(n * (m / delta), m * (delta - h) / delta));
            }
            PolyConvexFn::from_pieces(pieces, u.domain().clone(), Some(m))
        })
        .collect::<Result<_>>()?;
    let seq: Vec<&dyn Body> = walls.iter().map(|w| w as &dyn Body).collect();
    let c = convergence_harness(&seq, &labels, limit, 1e-3)?;

    Ok(vec![
        Check::lt("scaling (1-1/k)u, gap at k=1e4", a.final_gap, 1e-3),
        Check::lt("grid refinement of the Newton body, gap at 256²", b.final_gap, 1e-3),
        Check::lt("boundary walls within 1/k of ∂Ω, gap at k=1e4", c.final_gap, 1e-3),
    ])
}

fn legendre() -> Result<Vec<Check>> {
    let root = 1.0 / 3f64.sqrt();
    let mut wrong = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in 0..20000 {
        let r = 3.0 * k as f64 / 20000.0;
        if (r - root).abs() < 1e-12 {
            continue;
        }
        let p = Vec2::polar(rng.gen_range(0.0..std::f64::consts::TAU)) * r;
        let (_, l2) = legendre_eigenvalues(p);
        if (l2 < 0.0) != (p.norm() > root) {
            wrong += 1;
        }
    }
    let (mut lo, mut hi) = (0.1, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if legendre_eigenvalues(Vec2::new(mid, 0.0)).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(vec![
        Check::le("sign mismatches of λ2 vs |p| > 1/√3 (20000 points)", wrong as f64, 0.0),
        Check::le("|located root - 1/√3|", (0.5 * (lo + hi) - root).abs(), 1e-12),
    ])
}

/// Used by the property tests and examples.
pub fn resistance_pair(u: &PolyConvexFn) -> Result<(f64, f64)> {
    Ok((primal_resistance(u)?.value, resistance::dual_resistance_of(&conjugate(u)?)?.value))
}
