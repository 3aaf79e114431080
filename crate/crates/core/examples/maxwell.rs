//! Symmetric Euler-Lagrange extremal, its resistance, and the primal body built from its stratum.

use newton_dual::maxwell_stratum as mx;
use newton_dual::resistance::primal_resistance;

fn main() -> newton_dual::error::Result<()> {
    let (m, s) = (2.0, 0.8);
    let c = mx::symmetric_extremal(m, s, mx::DEFAULT_STEP)?;
    let (lo, hi) = c.range();
    println!("extremal on [{lo:.5}, {hi:.5}], {} nodes, ends {:?}, convex {}", c.p.len(), c.right, c.is_convex(1e-12));
    let jd = mx::maxwell_resistance(&c)?.value;
    let stratum = mx::stratum_from_dual(&c)?;
    let body = mx::assemble_body(&stratum, m, 360)?;
    let jp = primal_resistance(&body)?.value;
    println!("dual J = {jd:.10}, primal hull body J = {jp:.10}");
    println!("cone (point stratum) J = {:.10}", mx::maxwell_resistance(&mx::MaxwellCurve::point_stratum(m, 2)?)?.value);
    Ok(())
}
