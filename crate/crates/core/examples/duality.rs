//! Legendre conjugate of a random body and the two resistance functionals.

use newton_dual::convex_core::{check_c_m, check_c_m_star, conjugate, pyramid};
use newton_dual::corpus::Corpus;
use newton_dual::resistance::{dual_resistance_of, primal_resistance};

fn main() -> newton_dual::error::Result<()> {
    let corpus = Corpus::generate(7, 5)?;
    for (i, u) in corpus.bodies.iter().chain(std::iter::once(&pyramid(1.0)?)).enumerate() {
        let m = u.height_cap().unwrap_or(1.0);
        let w = conjugate(u)?;
        let jp = primal_resistance(u)?.value;
        let jd = dual_resistance_of(&w)?.value;
        println!(
            "body {i}: {} pieces, C_M {} / C_M* {}, J = {jp:.15}, J* = {jd:.15}, gap {:.1e}",
            u.pieces().len(),
            check_c_m(u, m).pass,
            check_c_m_star(&w, u.domain(), m).pass,
            (jp - jd).abs() / jp
        );
    }
    Ok(())
}
