//! Optimal regular front polygons, the segment transition, and a local-optimality audit.

use newton_dual::heel_front::{self, SupportFn};

fn main() -> newton_dual::error::Result<()> {
    for m in [0.7, 0.9, 1.1, 1.5, 2.0] {
        let b = heel_front::best_regular(m, heel_front::MAX_SIDES)?;
        let (rho, jd) = heel_front::optimize_disk(m)?;
        println!("M = {m}: best m = {:>2}, R* = {:.6}, J* = {:.8} (disk: ρ = {rho:.6}, J = {jd:.8})", b.sides, b.r_star, b.j_star);
    }
    let t = heel_front::sweep_transition()?;
    println!("segment takes over at M = {:.8} (polygon below: m = {})", t.m_crit, t.sides_below);

    let b = heel_front::best_regular(0.9, heel_front::MAX_SIDES)?;
    let base = SupportFn::regular(b.sides, b.r_star, heel_front::DEFAULT_N)?;
    let audit = heel_front::perturbation_audit(&base, 0.9, 100, 7)?;
    println!("audit at M = 0.9: {} of {} perturbations improve; smallest ΔJ {:+.2e}", audit.improvements, audit.admissible, audit.worst_delta);
    Ok(())
}
