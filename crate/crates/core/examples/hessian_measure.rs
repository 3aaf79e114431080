//! Hessian measure of a polyhedral conjugate, its Steiner polynomial, and a smooth merge-curve density.

use newton_dual::convex_core::{conjugate, pyramid};
use newton_dual::geometry::Vec2;
use newton_dual::hessian_measure::{f0_merge_curve, f0_polyhedral, steiner_check, ParamCurve, PolarSupport, ShiftedNorm};

fn main() -> newton_dual::error::Result<()> {
    let u = pyramid(0.8)?;
    let w = conjugate(&u)?;
    let f0 = f0_polyhedral(&w)?;
    println!("pyramid: {} atoms, total mass {} (domain area {})", f0.atoms.len(), f0.total_mass(), u.domain().area());
    for a in &f0.atoms {
        println!("  atom at ({:+.3}, {:+.3}) mass {:.6}", a.p.x, a.p.y, a.mass);
    }
    let eta: Vec<Vec2> = f0.atoms.iter().map(|a| a.p).collect();
    let s = steiner_check(&w, &eta, &[0.1, 0.2, 0.4, 0.8])?;
    println!("Steiner fit {:?}, residual {:.1e}, |c2 - mass| {:.1e}", s.coefficients, s.residual, s.mass_gap);

    let (rho, m) = (0.4, 2.0);
    let r = m / (1.0 - rho);
    let gamma = ParamCurve::closed(128, |t| Vec2::polar(t) * r, |t| Vec2::polar(t).rot90() * r);
    let merge = f0_merge_curve(&PolarSupport::disk(rho), &ShiftedNorm { m }, &gamma)?;
    let d = &merge.curves[0].density;
    println!("merge curve |p| = {r:.4}: density {:.12} (expected (1-ρ²)/2 = {:.12})", d[0], 0.5 * (1.0 - rho * rho));
    Ok(())
}
