//! Seeded random bodies in C_M, and deliberately broken variants.

use crate::convex_core::{Domain2, Piece, PolyConvexFn};
use crate::error::Result;
use crate::geometry::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Valid,
    /// Shifted up so the infimum is positive.
    Lifted,
    /// Stretched past the height cap.
    OverCap,
}

/// Random convex polygon around the origin.
pub fn random_domain<R: Rng>(rng: &mut R) -> Result<Domain2> {
    loop {
        let n = rng.gen_range(5..10);
        let pts: Vec<Vec2> = (0..n)
            .map(|_| Vec2::polar(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.6..1.4))
            .collect();
        if let Ok(d) = Domain2::hull_of(&pts) {
            if d.area() > 0.5 && d.gauge(Vec2::ZERO) < 0.95 {
                return Ok(d);
            }
        }
    }
}

fn std_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Random member of C_M: max of 2..8 affine pieces, shifted to infimum 0 and shrunk under the cap.
pub fn random_body<R: Rng>(rng: &mut R, domain: &Domain2, m: f64) -> Result<PolyConvexFn> {
    let n = rng.gen_range(2..=8);
    let scale = [0.3, 1.0, 2.0][rng.gen_range(0..3)];
    let pieces: Vec<Piece> = (0..n)
        .map(|_| {
            let a = Vec2::new(std_normal(rng), std_normal(rng)) * scale;
            Piece::new(a, 0.3 * std_normal(rng))
        })
        .collect();
    let u = PolyConvexFn::from_pieces(pieces, domain.clone(), None)?;
    let (lo, _) = u.min_on_domain();
    let (hi, _) = u.max_on_domain();
    let k = if hi - lo > m { m / (hi - lo) } else { 1.0 };
    let pieces = u.pieces().iter().map(|p| Piece::new(p.a * k, (p.b - lo) * k)).collect();
    PolyConvexFn::from_pieces(pieces, domain.clone(), Some(m))
}

pub fn apply_variant(u: &PolyConvexFn, variant: Variant) -> Result<PolyConvexFn> {
    let m = u.height_cap().unwrap_or(1.0);
    let pieces: Vec<Piece> = match variant {
        Variant::Valid => return Ok(u.clone()),
        Variant::Lifted => u.pieces().iter().map(|p| Piece::new(p.a, p.b + 0.05 * m)).collect(),
        Variant::OverCap => {
            let (hi, _) = u.max_on_domain();
            let k = if hi > 0.0 { 1.5 * m / hi } else { 1.0 };
            let mut ps: Vec<Piece> = u.pieces().iter().map(|p| Piece::new(p.a * k, p.b * k)).collect();
            if hi <= 0.0 {
                // Flat body: add a steep ramp to break the cap.
                let d = u.domain();
                let v = d.vertices[0];
                let n = v / v.norm();
                ps.push(Piece::new(n * (3.0 * m / v.norm()), -1.5 * m));
            }
            ps
        }
    };
    PolyConvexFn::from_pieces(pieces, u.domain().clone(), u.height_cap())
}

/// Flat center of radius 0.2, gradient modulus 1/2 out to radius 0.6, then 2, on the disk 64-gon.
/// Its whole annulus has `|∇u|` in the band (0, 1).
pub fn band_body(m: f64) -> Result<PolyConvexFn> {
    let domain = Domain2::disk_approx(64, 1.0)?;
    let mut pieces = vec![Piece::new(Vec2::ZERO, 0.0)];
    for (n, _) in domain.edge_halfplanes() {
        pieces.push(Piece::new(n * 0.5, -0.1));
        pieces.push(Piece::new(n * 2.0, -1.0));
    }
    PolyConvexFn::from_pieces(pieces, domain, Some(m))
}

/// A reproducible corpus: domains cycle through the square, a 64-gon disk and random polygons.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub seed: u64,
    pub bodies: Vec<PolyConvexFn>,
}

impl Corpus {
    pub fn generate(seed: u64, count: usize) -> Result<Corpus> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let square = Domain2::unit_square();
        let disk = Domain2::disk_approx(64, 1.0)?;
        let mut bodies = Vec::with_capacity(count);
        for i in 0..count {
            let domain = match i % 3 {
                0 => square.clone(),
                1 => disk.clone(),
                _ => random_domain(&mut rng)?,
            };
            let m = rng.gen_range(0.5..3.0);
            bodies.push(random_body(&mut rng, &domain, m)?);
        }
        Ok(Corpus { seed, bodies })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::check_c_m;

    #[test]
    fn corpus_members_are_valid_and_reproducible() {
        let a = Corpus::generate(11, 30).unwrap();
        let b = Corpus::generate(11, 30).unwrap();
        for (u, v) in a.bodies.iter().zip(&b.bodies) {
            assert_eq!(u.pieces(), v.pieces());
            let r = check_c_m(u, u.height_cap().unwrap());
            assert!(r.pass, "{:?}", r.violations);
        }
    }

    #[test]
    fn band_body_is_in_class() {
        let u = band_body(2.0).unwrap();
        assert!(check_c_m(&u, 2.0).pass);
        let h = crate::resistance::gradient_histogram(&u, &[0.0, 1.0]);
        assert!(h.band_mass > 0.5);
    }

    #[test]
    fn variants_break_the_class() {
        let c = Corpus::generate(5, 12).unwrap();
        for u in &c.bodies {
            let m = u.height_cap().unwrap();
            assert!(check_c_m(&apply_variant(u, Variant::Lifted).unwrap(), m).has("inf"));
            assert!(check_c_m(&apply_variant(u, Variant::OverCap).unwrap(), m).has("cap"));
        }
    }
}
