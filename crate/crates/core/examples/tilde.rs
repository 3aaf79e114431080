//! The gradient-modulus transform removes the band 0 < |∇u| < 1 and never raises resistance.

use newton_dual::convex_core::conjugate;
use newton_dual::corpus::band_body;
use newton_dual::resistance::{dual_resistance_of, gradient_histogram, tilde_transform};

fn main() -> newton_dual::error::Result<()> {
    let m = 2.0;
    let u = band_body(m)?;
    let w = conjugate(&u)?;
    let wt = tilde_transform(&w, u.domain(), m)?;
    let before = gradient_histogram(&u, &[0.0, 1.0]);
    let after = gradient_histogram(&conjugate(&wt)?, &[0.0, 1.0]);
    println!("band mass {:.6} -> {:.6}", before.band_mass, after.band_mass);
    println!("J* {:.10} -> {:.10}", dual_resistance_of(&w)?.value, dual_resistance_of(&wt)?.value);
    Ok(())
}
