//! Resistance along pointwise-convergent sequences on a fixed domain.

use newton_dual::convex_core::{Body, PolyConvexFn};
use newton_dual::newton_radial::{calibrate_with, revolve};
use newton_dual::resistance::{convergence_harness, primal_resistance};

fn main() -> newton_dual::error::Result<()> {
    let u = revolve(&calibrate_with(1.0, 1.0, 128)?, 180)?;
    let labels = [10, 100, 1000, 10000];
    let seq: Vec<PolyConvexFn> = labels.iter().map(|&k| u.scaled(1.0 - 1.0 / k as f64)).collect::<Result<_, _>>()?;
    let refs: Vec<&dyn Body> = seq.iter().map(|v| v as &dyn Body).collect();
    let r = convergence_harness(&refs, &labels, primal_resistance(&u)?.value, 1e-3)?;
    for (k, g) in r.labels.iter().zip(&r.gaps) {
        println!("k = {k:>5}: |J(u_k) - J(u)| = {g:.3e}");
    }
    Ok(())
}
