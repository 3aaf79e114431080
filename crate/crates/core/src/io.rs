//! JSON body files.
//!
//! Polyhedral: `{"domain": {"vertices": [[x, y], ...], "kind": {"type": "polygon"}}, "pieces": [[a1, a2, b], ...], "height_cap": M}`
//!
//! Grid: `{"grid": {"domain": ..., "points": [[x, y], ...], "values": [...], "triangles": [[i, j, k], ...]}}`

use crate::convex_core::{Domain2, GridConvexFn, Piece, PolyConvexFn};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BodyFile {
    Poly {
        domain: Domain2,
        pieces: Vec<Piece>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        height_cap: Option<f64>,
    },
    Grid { grid: GridConvexFn },
}

pub enum LoadedBody {
    Poly(PolyConvexFn),
    Grid(GridConvexFn),
}

impl BodyFile {
    pub fn from_poly(u: &PolyConvexFn) -> Self {
        BodyFile::Poly { domain: u.domain().clone(), pieces: u.pieces().to_vec(), height_cap: u.height_cap() }
    }

    pub fn from_grid(g: &GridConvexFn) -> Self {
        BodyFile::Grid { grid: g.clone() }
    }

    /// Rebuilds the body; polyhedral pieces are canonicalized.
    pub fn into_body(self) -> Result<LoadedBody> {
        Ok(match self {
            BodyFile::Poly { domain, pieces, height_cap } => {
                let d = if domain.is_dual_box() { domain } else { Domain2::polygon(domain.vertices)?.with_kind(domain.kind) };
                LoadedBody::Poly(PolyConvexFn::from_pieces(pieces, d, height_cap)?)
            }
            BodyFile::Grid { grid } => LoadedBody::Grid(grid),
        })
    }
}

pub fn to_json(u: &PolyConvexFn) -> Result<String> {
    Ok(serde_json::to_string_pretty(&BodyFile::from_poly(u))?)
}

pub fn from_json(s: &str) -> Result<LoadedBody> {
    serde_json::from_str::<BodyFile>(s)?.into_body()
}

pub fn write_body(path: &Path, u: &PolyConvexFn) -> Result<()> {
    std::fs::write(path, to_json(u)?)?;
    Ok(())
}

pub fn read_body(path: &Path) -> Result<LoadedBody> {
    from_json(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex_core::pyramid;

    #[test]
    fn poly_round_trip_is_lossless() {
        let c = crate::corpus::Corpus::generate(3, 6).unwrap();
        for u in c.bodies.iter().chain(std::iter::once(&pyramid(0.7).unwrap())) {
            let s = to_json(u).unwrap();
            let LoadedBody::Poly(v) = from_json(&s).unwrap() else { panic!("expected poly") };
            assert_eq!(u.pieces(), v.pieces());
            assert_eq!(u.domain(), v.domain());
            assert_eq!(u.height_cap(), v.height_cap());
        }
    }

    #[test]
    fn grid_round_trip_is_lossless() {
        let g = GridConvexFn::sample(&Domain2::unit_square(), 5, |x| x.norm2() / 3.0).unwrap();
        let s = serde_json::to_string(&BodyFile::from_grid(&g)).unwrap();
        let LoadedBody::Grid(h) = from_json(&s).unwrap() else { panic!("expected grid") };
        assert_eq!(g.values, h.values);
        assert_eq!(g.points, h.points);
        assert_eq!(g.triangles, h.triangles);
    }
}
