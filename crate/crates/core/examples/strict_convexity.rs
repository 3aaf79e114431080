//! Legendre-condition eigenvalues and the finite-difference det D²u audit.

use newton_dual::convex_core::{Domain2, GridConvexFn};
use newton_dual::geometry::Vec2;
use newton_dual::resistance::{legendre_eigenvalues, strict_convexity_audit};

fn main() -> newton_dual::error::Result<()> {
    for r in [0.0, 0.5, 1.0 / 3f64.sqrt(), 0.7, 1.5] {
        let (l1, l2) = legendre_eigenvalues(Vec2::new(r, 0.0));
        println!("|p| = {r:.6}: λ1 = {l1:+.6}, λ2 = {l2:+.6}");
    }
    let d = Domain2::unit_square();
    for n in [41, 81, 161] {
        let cone = GridConvexFn::sample(&d, n, |x| 2.0 * x.norm())?;
        let bowl = GridConvexFn::sample(&d, n, |x| 2.0 * x.dot(x))?;
        let (a, b) = (strict_convexity_audit(&cone, (0.0, 2.0), 0.1)?, strict_convexity_audit(&bowl, (0.0, 2.0), 0.1)?);
        println!("n = {n}: nodes with det D²u > 0.1: cone {:.3}, paraboloid {:.3}", a.flagged_fraction, b.flagged_fraction);
    }
    Ok(())
}
