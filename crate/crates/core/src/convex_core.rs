//! Convex functions on planar domains: max-affine bodies, lattice bodies,
//! subdifferentials, Legendre-Fenchel conjugation and class checks.

use crate::error::{Error, Result};
use crate::geometry::{self, area, clip_halfplane, contains_convex, convex_hull, edge_normal, Vec2};
use crate::hull3::LowerHull;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Relative tolerance for deciding that a piece is active at a point.
pub const TOL_ACTIVE: f64 = 1e-9;
/// Cells below this area are dropped during canonicalization.
pub const MIN_CELL_AREA: f64 = 1e-14;
/// Default vertex count of the disk approximant.
pub const DISK_M: usize = 720;
/// Relative height tolerance for merging nearly coplanar hull triangles.
pub const HULL_MERGE_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DomainKind {
    Polygon,
    DiskApprox { m: usize, radius: f64 },
    /// The square [-P, P]^2 in p-space that carries conjugates.
    DualBox { half_width: f64 },
}

/// Convex compact polygon with nonempty interior, vertices counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain2 {
    pub vertices: Vec<Vec2>,
    pub kind: DomainKind,
}

impl Domain2 {
    pub fn polygon(vertices: Vec<Vec2>) -> Result<Domain2> {
        let n = vertices.len();
        if n < 3 || vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("domain needs at least three finite vertices".into()));
        }
        for i in 0..n {
            let o = geometry::orient2d(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if o <= 0.0 {
                return Err(Error::Invalid(format!(
                    "domain vertices must be strictly convex and counter-clockwise (fails at vertex {})",
                    (i + 1) % n
                )));
            }
        }
        if geometry::signed_area(&vertices) <= 0.0 {
            return Err(Error::Invalid("domain has no interior".into()));
        }
        Ok(Domain2 { vertices, kind: DomainKind::Polygon })
    }

    /// Convex hull of arbitrary points as a polygon domain.
    pub fn hull_of(points: &[Vec2]) -> Result<Domain2> {
        Domain2::polygon(convex_hull(points))
    }

    /// The square [-1, 1]^2.
    pub fn unit_square() -> Domain2 {
        Domain2::rectangle(Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0))
    }

    pub fn rectangle(lo: Vec2, hi: Vec2) -> Domain2 {
        Domain2 {
            vertices: vec![lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)],
            kind: DomainKind::Polygon,
        }
    }

    /// Regular m-gon inscribed in the circle of radius `radius`, first vertex on the positive x-axis.
    pub fn disk_approx(m: usize, radius: f64) -> Result<Domain2> {
        if m < 16 {
            return Err(Error::Invalid(format!("disk approximant needs m >= 16, got {m}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("disk radius must be positive, got {radius}")));
        }
        let vertices = (0..m)
            .map(|k| Vec2::polar(2.0 * std::f64::consts::PI * k as f64 / m as f64) * radius)
            .collect();
        Ok(Domain2 { vertices, kind: DomainKind::DiskApprox { m, radius } })
    }

    pub fn dual_box(half_width: f64) -> Domain2 {
        let p = half_width;
        let mut d = Domain2::rectangle(Vec2::new(-p, -p), Vec2::new(p, p));
        d.kind = DomainKind::DualBox { half_width: p };
        d
    }

    pub fn with_kind(mut self, kind: DomainKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn is_dual_box(&self) -> bool {
        matches!(self.kind, DomainKind::DualBox { .. })
    }

    pub fn area(&self) -> f64 {
        area(&self.vertices)
    }

    /// Diameter-like length scale used for tolerances.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = geometry::bbox(&self.vertices);
        (hi - lo).norm().max(f64::MIN_POSITIVE)
    }

    pub fn contains(&self, x: Vec2) -> bool {
        contains_convex(&self.vertices, x, 1e-12 * self.scale())
    }

    /// Support function `s(p) = max_v <v, p>`.
    pub fn support(&self, p: Vec2) -> f64 {
        self.vertices.iter().map(|v| v.dot(p)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unit outward normals and support values of the edges.
    pub fn edge_halfplanes(&self) -> Vec<(Vec2, f64)> {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let a = self.vertices[i];
                let nrm = edge_normal(a, self.vertices[(i + 1) % n]);
                let nrm = nrm / nrm.norm();
                (nrm, nrm.dot(a))
            })
            .collect()
    }

    /// Minkowski gauge; requires the origin in the interior.
    pub fn gauge(&self, x: Vec2) -> f64 {
        self.edge_halfplanes().iter().map(|(n, h)| n.dot(x) / h).fold(0.0, f64::max)
    }

    pub fn same_as(&self, other: &Domain2, tol: f64) -> bool {
        self.vertices.len() == other.vertices.len()
            && self.vertices.iter().zip(&other.vertices).all(|(a, b)| (*a - *b).norm() <= tol)
    }
}

/// Affine piece `x -> <a, x> + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Piece {
    pub a: Vec2,
    pub b: f64,
}

impl From<[f64; 3]> for Piece {
    fn from(v: [f64; 3]) -> Self {
        Piece { a: Vec2::new(v[0], v[1]), b: v[2] }
    }
}

impl From<Piece> for [f64; 3] {
    fn from(p: Piece) -> Self {
        [p.a.x, p.a.y, p.b]
    }
}

impl Piece {
    pub fn new(a: Vec2, b: f64) -> Self {
        Piece { a, b }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        self.a.dot(x) + self.b
    }
}

/// Linearity cell of one piece.
#[derive(Debug, Clone)]
pub struct Cell {
    pub piece: usize,
    pub polygon: Vec<Vec2>,
    pub area: f64,
}

/// Subdifferential as a convex polygon in p-space (one point, a segment, or a polygon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subdiff {
    pub vertices: Vec<Vec2>,
}

impl Subdiff {
    pub fn is_point(&self) -> bool {
        self.vertices.len() == 1
    }

    pub fn area(&self) -> f64 {
        area(&self.vertices)
    }

    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        contains_convex(&self.vertices, p, tol)
    }
}

/// Max-of-affine convex function, `+inf` outside its domain.
#[derive(Debug, Clone)]
pub struct PolyConvexFn {
    pieces: Vec<Piece>,
    domain: Domain2,
    height_cap: Option<f64>,
    cells: OnceLock<Vec<Cell>>,
    /// Subdivision vertices with values, when known from construction.
    vertex_hint: Option<Vec<(Vec2, f64)>>,
}

impl PolyConvexFn {
    /// Canonical body from pieces: cells are computed by clipping, empty and
    /// sub-threshold cells are dropped, and the partition of the domain is verified.
    pub fn from_pieces(pieces: Vec<Piece>, domain: Domain2, height_cap: Option<f64>) -> Result<PolyConvexFn> {
        let raw = PolyConvexFn::raw(pieces, domain, height_cap)?;
        raw.canonicalize()
    }

    /// Pieces taken as given; cells are computed on first use.
    pub fn raw(mut pieces: Vec<Piece>, domain: Domain2, height_cap: Option<f64>) -> Result<PolyConvexFn> {
        if pieces.is_empty() {
            return Err(Error::Invalid("no affine pieces".into()));
        }
        if let Some(i) = pieces.iter().position(|p| !p.a.is_finite() || !p.b.is_finite()) {
            return Err(Error::Canonicalization {
                piece: i,
                witness: Vec2::ZERO,
                reason: "non-finite piece".into(),
            });
        }
        pieces.sort_by(|p, q| p.a.x.total_cmp(&q.a.x).then(p.a.y.total_cmp(&q.a.y)).then(q.b.total_cmp(&p.b)));
        // Same slope: only the largest offset can be active.
        pieces.dedup_by(|later, earlier| later.a == earlier.a);
        Ok(PolyConvexFn { pieces, domain, height_cap, cells: OnceLock::new(), vertex_hint: None })
    }

    /// Lower convex envelope of lifted points `(x, z)`; the domain must be their planar hull.
    pub fn from_lifted_points(domain: Domain2, points: &[(Vec2, f64)], height_cap: Option<f64>) -> Result<PolyConvexFn> {
        let lifted: Vec<[f64; 3]> = points.iter().map(|(x, z)| [x.x, x.y, *z]).collect();
        let hull = LowerHull::with_merge_tol(&lifted, HULL_MERGE_TOL)?;
        let total = hull.total_area();
        let da = domain.area();
        if (total - da).abs() > 1e-9 * da.max(1.0) {
            return Err(Error::Canonicalization {
                piece: 0,
                witness: geometry::centroid(&domain.vertices),
                reason: format!("lifted points cover area {total}, domain area {da}"),
            });
        }
        let mut pieces = Vec::with_capacity(hull.faces.len());
        let mut cells = Vec::with_capacity(hull.faces.len());
        for f in &hull.faces {
            if f.area < MIN_CELL_AREA * da.max(1.0) {
                continue;
            }
            let idx = pieces.len();
            pieces.push(Piece::new(f.slope, f.offset));
            cells.push(Cell { piece: idx, polygon: f.polygon(&hull.points), area: f.area });
        }
        let hint: Vec<(Vec2, f64)> = hull
            .vertex_set()
            .into_iter()
            .map(|i| (Vec2::new(hull.points[i][0], hull.points[i][1]), hull.points[i][2]))
            .collect();
        let lock = OnceLock::new();
        let _ = lock.set(cells);
        Ok(PolyConvexFn { pieces, domain, height_cap, cells: lock, vertex_hint: Some(hint) })
    }

    /// Compute cells, drop inactive pieces and verify the partition.
    pub fn canonicalize(&self) -> Result<PolyConvexFn> {
        let cells = compute_cells(&self.pieces, &self.domain);
        let da = self.domain.area();
        let min_area = MIN_CELL_AREA * da.max(1.0);
        let mut pieces = Vec::new();
        let mut kept = Vec::new();
        for c in cells {
            if c.area >= min_area {
                let idx = pieces.len();
                pieces.push(self.pieces[c.piece]);
                kept.push(Cell { piece: idx, ..c });
            }
        }
        if pieces.is_empty() {
            return Err(Error::Canonicalization {
                piece: 0,
                witness: geometry::centroid(&self.domain.vertices),
                reason: "no piece has a cell of positive area".into(),
            });
        }
        let total = geometry::neumaier_sum(kept.iter().map(|c| c.area));
        if (total - da).abs() > 1e-9 * da.max(1.0) {
            let worst = kept.iter().max_by(|a, b| a.area.total_cmp(&b.area)).unwrap();
            return Err(Error::Canonicalization {
                piece: worst.piece,
                witness: geometry::centroid(&worst.polygon),
                reason: format!("cells cover area {total}, domain area {da}"),
            });
        }
        let lock = OnceLock::new();
        let _ = lock.set(kept);
        Ok(PolyConvexFn {
            pieces,
            domain: self.domain.clone(),
            height_cap: self.height_cap,
            cells: lock,
            vertex_hint: None,
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn domain(&self) -> &Domain2 {
        &self.domain
    }

    pub fn height_cap(&self) -> Option<f64> {
        self.height_cap
    }

    pub fn with_height_cap(mut self, m: Option<f64>) -> Self {
        self.height_cap = m;
        self
    }

    pub fn cells(&self) -> &[Cell] {
        self.cells.get_or_init(|| compute_cells(&self.pieces, &self.domain))
    }

    /// Max over pieces, ignoring the domain.
    pub fn eval_unrestricted(&self, x: Vec2) -> f64 {
        self.pieces.iter().map(|p| p.eval(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value with the indicator convention: `+inf` outside the domain.
    pub fn value(&self, x: Vec2) -> f64 {
        if self.domain.contains(x) {
            self.eval_unrestricted(x)
        } else {
            f64::INFINITY
        }
    }

    pub fn max_slope_norm(&self) -> f64 {
        self.pieces.iter().map(|p| p.a.norm()).fold(0.0, f64::max)
    }

    /// Multiply the function by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<PolyConvexFn> {
        let pieces = self.pieces.iter().map(|p| Piece::new(p.a * s, p.b * s)).collect();
        let cells: Vec<Cell> = self.cells().to_vec();
        let mut out = PolyConvexFn::raw(pieces, self.domain.clone(), self.height_cap)?;
        if out.pieces.len() == self.pieces.len() {
            // Scaling preserves the cell structure piece-by-piece; re-index by slope order.
            let mut map = vec![0; self.pieces.len()];
            for (i, p) in self.pieces.iter().enumerate() {
                let a = p.a * s;
                map[i] = out.pieces.iter().position(|q| q.a == a).unwrap_or(i);
            }
            let cells = cells.into_iter().map(|c| Cell { piece: map[c.piece], ..c }).collect();
            out.cells = OnceLock::new();
            let _ = out.cells.set(cells);
        }
        Ok(out)
    }

    /// Vertices of the linearity subdivision (including domain vertices) with values.
    pub fn subdivision_vertices(&self) -> Vec<(Vec2, f64)> {
        if let Some(h) = &self.vertex_hint {
            return h.clone();
        }
        let tol = 1e-10 * self.domain.scale();
        let mut all: Vec<Vec2> = self.cells().iter().flat_map(|c| c.polygon.iter().copied()).collect();
        all.extend(self.domain.vertices.iter().copied());
        let pts = cluster_points(all, tol);
        pts.into_iter().map(|x| (x, self.eval_unrestricted(x))).collect()
    }

    /// Minimum over the domain with its location.
    pub fn min_on_domain(&self) -> (f64, Vec2) {
        self.subdivision_vertices()
            .into_iter()
            .map(|(x, v)| (v, x))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    }

    /// Maximum over the domain (attained at a domain vertex).
    pub fn max_on_domain(&self) -> (f64, Vec2) {
        self.domain
            .vertices
            .iter()
            .map(|&x| (self.eval_unrestricted(x), x))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
    }

    /// Convex hull of slopes of pieces active at `x`.
    pub fn subdifferential(&self, x: Vec2) -> Result<Subdiff> {
        if !self.domain.contains(x) {
            return Err(Error::OutsideDomain { x });
        }
        let u = self.eval_unrestricted(x);
        let tol = TOL_ACTIVE * (1.0 + u.abs());
        let slopes: Vec<Vec2> = self.pieces.iter().filter(|p| u - p.eval(x) <= tol).map(|p| p.a).collect();
        let mut hull = convex_hull(&slopes);
        if hull.is_empty() {
            hull = slopes[..1].to_vec();
        }
        Ok(Subdiff { vertices: hull })
    }
}

/// Greedy clustering of points closer than `tol` (keeps the first of each cluster).
pub fn cluster_points(mut pts: Vec<Vec2>, tol: f64) -> Vec<Vec2> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    let mut out: Vec<Vec2> = Vec::with_capacity(pts.len());
    for p in pts {
        let mut dup = false;
        for q in out.iter().rev() {
            if p.x - q.x > tol {
                break;
            }
            if (p - *q).norm() <= tol {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(p);
        }
    }
    out
}

fn compute_cells(pieces: &[Piece], domain: &Domain2) -> Vec<Cell> {
    let mut cells = Vec::new();
    for (i, pi) in pieces.iter().enumerate() {
        let mut poly = domain.vertices.clone();
        for (j, pj) in pieces.iter().enumerate() {
            if i == j {
                continue;
            }
            // pj <= pi  <=>  <aj - ai, x> <= bi - bj
            let n = pj.a - pi.a;
            let c = pi.b - pj.b;
            if n.norm() == 0.0 {
                if c < 0.0 {
                    poly.clear();
                }
                continue;
            }
            poly = clip_halfplane(&poly, n, c);
            if poly.len() < 3 {
                poly.clear();
                break;
            }
        }
        let a = area(&poly);
        if poly.len() >= 3 && a > 0.0 {
            cells.push(Cell { piece: i, polygon: poly, area: a });
        }
    }
    cells
}

/// Legendre-Fenchel conjugate.
///
/// A body on a compact polygon maps to the max-affine function with pieces
/// `(x_v, -u(x_v))` over the subdivision vertices, carried on the dual box
/// `[-P, P]^2` with `P = max slope + M + 2`. A dual-box function maps back to
/// the lower envelope of its lifted pieces, on the hull of its slopes.
pub fn conjugate(u: &PolyConvexFn) -> Result<PolyConvexFn> {
    if u.domain.is_dual_box() {
        let pts: Vec<(Vec2, f64)> = u.pieces.iter().map(|p| (p.a, -p.b)).collect();
        let slopes: Vec<Vec2> = pts.iter().map(|p| p.0).collect();
        let dom = Domain2::hull_of(&slopes)?;
        return PolyConvexFn::from_lifted_points(dom, &pts, u.height_cap);
    }
    let verts = u.subdivision_vertices();
    let m = u.height_cap.unwrap_or_else(|| u.max_on_domain().0.max(0.0));
    let p = u.max_slope_norm() + m + 2.0;
    let pieces = verts.iter().map(|(x, val)| Piece::new(*x, -val)).collect();
    PolyConvexFn::raw(pieces, Domain2::dual_box(p), u.height_cap)
}

/// Anything that can be read as a body over a planar domain.
pub trait Body: Sync {
    fn domain(&self) -> &Domain2;
    /// (area, gradient) of each linearity cell or triangle, in a fixed order.
    fn gradient_cells(&self) -> Vec<(f64, Vec2)>;
    fn min_value(&self) -> (f64, Vec2);
    fn max_value(&self) -> (f64, Vec2);
    /// Convexity defect: 0 for exactly convex representations.
    fn convexity_defect(&self) -> (f64, Vec2) {
        (0.0, Vec2::ZERO)
    }
}

impl Body for PolyConvexFn {
    fn domain(&self) -> &Domain2 {
        &self.domain
    }

    fn gradient_cells(&self) -> Vec<(f64, Vec2)> {
        self.cells().iter().map(|c| (c.area, self.pieces[c.piece].a)).collect()
    }

    fn min_value(&self) -> (f64, Vec2) {
        self.min_on_domain()
    }

    fn max_value(&self) -> (f64, Vec2) {
        self.max_on_domain()
    }
}

/// Uniform lattice index for finite-difference stencils.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lattice {
    pub origin: Vec2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major `j * nx + i` -> point index, if the lattice node lies in the domain.
    pub index: Vec<Option<usize>>,
}

impl Lattice {
    pub fn at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || j < 0 || i as usize >= self.nx || j as usize >= self.ny {
            return None;
        }
        self.index[j as usize * self.nx + i as usize]
    }
}

/// Piecewise-linear body on a triangulated point set.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridConvexFn {
    pub domain: Domain2,
    pub points: Vec<Vec2>,
    pub values: Vec<f64>,
    pub triangles: Vec<[usize; 3]>,
    pub lattice: Option<Lattice>,
}

impl GridConvexFn {
    /// Arbitrary values on a Delaunay triangulation of the points.
    pub fn new(domain: Domain2, points: Vec<Vec2>, values: Vec<f64>) -> Result<GridConvexFn> {
        if points.len() != values.len() {
            return Err(Error::Invalid("points and values differ in length".into()));
        }
        let lifted: Vec<(Vec2, f64)> = points.iter().map(|&p| (p, p.norm2())).collect();
        let triangles = triangulate(&points, &lifted)?;
        Ok(GridConvexFn { domain, points, values, triangles, lattice: None })
    }

    /// Sample a convex function on the `n x n` lattice over the domain's bounding box
    /// (nodes inside the domain) together with the domain vertices.
    pub fn sample<F: Fn(Vec2) -> f64>(domain: &Domain2, n: usize, f: F) -> Result<GridConvexFn> {
        if n < 2 {
            return Err(Error::Invalid("lattice needs n >= 2".into()));
        }
        let (lo, hi) = geometry::bbox(&domain.vertices);
        let h = ((hi.x - lo.x).max(hi.y - lo.y)) / (n - 1) as f64;
        let nx = ((hi.x - lo.x) / h).round() as usize + 1;
        let ny = ((hi.y - lo.y) / h).round() as usize + 1;
        let mut points = Vec::new();
        let mut index = vec![None; nx * ny];
        let near = 1e-6 * h;
        for j in 0..ny {
            for i in 0..nx {
                let p = Vec2::new(lo.x + h * i as f64, lo.y + h * j as f64);
                if !contains_convex(&domain.vertices, p, 0.0) {
                    continue;
                }
                if domain.vertices.iter().any(|v| (*v - p).norm() < near) {
                    continue;
                }
                index[j * nx + i] = Some(points.len());
                points.push(p);
            }
        }
        for &v in &domain.vertices {
            points.push(v);
        }
        let values: Vec<f64> = points.iter().map(|&p| f(p)).collect();
        let triangles = regular_triangulation(&points, &values)?;
        Ok(GridConvexFn {
            domain: domain.clone(),
            points,
            values,
            triangles,
            lattice: Some(Lattice { origin: lo, h, nx, ny, index }),
        })
    }

    fn triangle_gradient(&self, t: &[usize; 3]) -> (f64, Vec2) {
        let (p0, p1, p2) = (self.points[t[0]], self.points[t[1]], self.points[t[2]]);
        let (d1, d2) = (p1 - p0, p2 - p0);
        let (z1, z2) = (self.values[t[1]] - self.values[t[0]], self.values[t[2]] - self.values[t[0]]);
        let det = d1.cross(d2);
        let g = Vec2::new((z1 * d2.y - d1.y * z2) / det, (d1.x * z2 - z1 * d2.x) / det);
        (0.5 * det.abs(), g)
    }
}

/// Triangles of the lower hull of lifted points (fan-free: pre-merge triangles).
fn triangulate(points: &[Vec2], lifted: &[(Vec2, f64)]) -> Result<Vec<[usize; 3]>> {
    let pts: Vec<[f64; 3]> = lifted.iter().map(|(x, z)| [x.x, x.y, *z]).collect();
    let hull = LowerHull::new(&pts)?;
    // Map deduplicated indices back to the first input index.
    let mut back = vec![usize::MAX; hull.points.len()];
    for (i, &k) in hull.index_map.iter().enumerate() {
        if back[k] == usize::MAX {
            back[k] = i;
        }
    }
    let _ = points;
    Ok(hull.triangles.iter().map(|t| [back[t[0]], back[t[1]], back[t[2]]]).collect())
}

/// Triangulation compatible with convex values: lower hull of the values plus a
/// tiny strictly convex term, so every point is a vertex and faces of the
/// envelope are refined rather than crossed.
fn regular_triangulation(points: &[Vec2], values: &[f64]) -> Result<Vec<[usize; 3]>> {
    let (lo, hi) = geometry::bbox(points);
    let diam2 = (hi - lo).norm2().max(f64::MIN_POSITIVE);
    let range = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c = (lo + hi) * 0.5;
    let delta = 1e-9 * (range + 1.0) / diam2;
    let lifted: Vec<(Vec2, f64)> =
        points.iter().zip(values).map(|(&p, &v)| (p, v + delta * (p - c).norm2())).collect();
    triangulate(points, &lifted)
}

impl Body for GridConvexFn {
    fn domain(&self) -> &Domain2 {
        &self.domain
    }

    fn gradient_cells(&self) -> Vec<(f64, Vec2)> {
        self.triangles.iter().map(|t| self.triangle_gradient(t)).collect()
    }

    fn min_value(&self) -> (f64, Vec2) {
        self.values
            .iter()
            .zip(&self.points)
            .map(|(&v, &p)| (v, p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((f64::NAN, Vec2::ZERO))
    }

    fn max_value(&self) -> (f64, Vec2) {
        self.values
            .iter()
            .zip(&self.points)
            .map(|(&v, &p)| (v, p))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap_or((f64::NAN, Vec2::ZERO))
    }

    fn convexity_defect(&self) -> (f64, Vec2) {
        match convexify(self) {
            Ok(c) => self
                .values
                .iter()
                .zip(&c.values)
                .zip(&self.points)
                .map(|((a, b), &p)| (a - b, p))
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .unwrap_or((0.0, Vec2::ZERO)),
            Err(_) => (f64::INFINITY, Vec2::ZERO),
        }
    }
}

/// Replace values by the lower convex envelope of the lifted points, keeping the point set.
pub fn convexify(g: &GridConvexFn) -> Result<GridConvexFn> {
    let pts: Vec<[f64; 3]> = g.points.iter().zip(&g.values).map(|(p, &v)| [p.x, p.y, v]).collect();
    let hull = LowerHull::new(&pts)?;
    let env = hull.evaluate(&g.points);
    let values: Vec<f64> = env.iter().zip(&g.values).map(|(&e, &v)| e.min(v)).collect();
    let triangles = regular_triangulation(&g.points, &values)?;
    Ok(GridConvexFn { domain: g.domain.clone(), points: g.points.clone(), values, triangles, lattice: g.lattice.clone() })
}

/// A violated class condition with its witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub condition: String,
    pub witness: Vec2,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipReport {
    pub pass: bool,
    pub violations: Vec<Violation>,
}

impl MembershipReport {
    fn from(violations: Vec<Violation>) -> Self {
        MembershipReport { pass: violations.is_empty(), violations }
    }

    pub fn has(&self, condition: &str) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

/// `dom u = Omega`, `inf u = 0`, `u <= M` on Omega (and convexity for lattice bodies).
pub fn check_c_m(u: &dyn Body, m: f64) -> MembershipReport {
    let mut v = Vec::new();
    let (lo, at_lo) = u.min_value();
    let (hi, at_hi) = u.max_value();
    let tol = 1e-9 * (1.0 + m.abs());
    if !lo.is_finite() || !hi.is_finite() {
        v.push(Violation { condition: "dom".into(), witness: at_lo, value: lo });
    }
    if lo.abs() > tol {
        v.push(Violation { condition: "inf".into(), witness: at_lo, value: lo });
    }
    if hi > m + tol {
        v.push(Violation { condition: "cap".into(), witness: at_hi, value: hi });
    }
    let (defect, at) = u.convexity_defect();
    if defect > tol {
        v.push(Violation { condition: "convex".into(), witness: at, value: defect });
    }
    MembershipReport::from(v)
}

/// [`check_c_m`] plus `dom u = omega` (vertex sets within `1e-9` of each other).
pub fn check_c_m_on(u: &dyn Body, omega: &Domain2, m: f64) -> MembershipReport {
    let mut r = check_c_m(u, m);
    if !u.domain().same_as(omega, 1e-9 * (1.0 + omega.scale())) {
        let w = u.domain().vertices.first().copied().unwrap_or(Vec2::ZERO);
        r.violations.push(Violation { condition: "dom".into(), witness: w, value: u.domain().area() - omega.area() });
        r.pass = false;
    }
    r
}

/// Conditions (i) `w(0) = 0`, (ii) `w >= s_Omega - M`, (iii) `dw ⊂ Omega`, and the bound `w <= s_Omega`.
pub fn check_c_m_star(w: &PolyConvexFn, omega: &Domain2, m: f64) -> MembershipReport {
    let mut v = Vec::new();
    let scale = 1.0 + m.abs() + omega.scale();
    let tol = 1e-9 * scale;

    let w0 = w.eval_unrestricted(Vec2::ZERO);
    if w0.abs() > 1e-12 * scale {
        v.push(Violation { condition: "i".into(), witness: Vec2::ZERO, value: w0 });
    }

    // (ii) and the remark bound: both differences are piecewise linear on the
    // common refinement of w's cells and the normal cones of Omega.
    let nv = omega.vertices.len();
    let mut worst_ii = (f64::INFINITY, Vec2::ZERO);
    let mut worst_rb = (f64::NEG_INFINITY, Vec2::ZERO);
    for cell in w.cells() {
        for k in 0..nv {
            let vk = omega.vertices[k];
            let prev = omega.vertices[(k + nv - 1) % nv];
            let next = omega.vertices[(k + 1) % nv];
            // Cone where vk is the support point: <prev - vk, p> <= 0 and <next - vk, p> <= 0.
            let mut poly = clip_halfplane(&cell.polygon, prev - vk, 0.0);
            if poly.is_empty() {
                continue;
            }
            poly = clip_halfplane(&poly, next - vk, 0.0);
            for &p in &poly {
                let wp = w.eval_unrestricted(p);
                let s = omega.support(p);
                let d_ii = wp - (s - m);
                if d_ii < worst_ii.0 {
                    worst_ii = (d_ii, p);
                }
                let d_rb = wp - s;
                if d_rb > worst_rb.0 {
                    worst_rb = (d_rb, p);
                }
            }
        }
    }
    if worst_ii.0 < -tol {
        v.push(Violation { condition: "ii".into(), witness: worst_ii.1, value: worst_ii.0 });
    }
    if worst_rb.0 > tol {
        v.push(Violation { condition: "remark".into(), witness: worst_rb.1, value: worst_rb.0 });
    }

    // (iii): every active slope lies in Omega.
    let ctol = 1e-9 * omega.scale();
    for cell in w.cells() {
        let a = w.pieces()[cell.piece].a;
        if !contains_convex(&omega.vertices, a, ctol) {
            let p = geometry::centroid(&cell.polygon);
            v.push(Violation { condition: "iii".into(), witness: p, value: a.norm() });
            break;
        }
    }
    MembershipReport::from(v)
}

/// Cone `a * |x|` over a polygonal domain with the origin inside: pieces `a n_k` over unit edge normals.
pub fn cone(a: f64, domain: &Domain2) -> Result<PolyConvexFn> {
    let pieces = domain.edge_halfplanes().into_iter().map(|(n, _)| Piece::new(n * a, 0.0)).collect();
    PolyConvexFn::from_pieces(pieces, domain.clone(), None)
}

/// Pyramid `a * max(|x1|, |x2|)` on the square [-1, 1]^2.
pub fn pyramid(a: f64) -> Result<PolyConvexFn> {
    let pieces = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
        .iter()
        .map(|&(x, y)| Piece::new(Vec2::new(a * x, a * y), 0.0))
        .collect();
    PolyConvexFn::from_pieces(pieces, Domain2::unit_square(), None)
}

/// Flat slab at height `m` over the domain.
pub fn slab(m: f64, domain: &Domain2) -> Result<PolyConvexFn> {
    PolyConvexFn::from_pieces(vec![Piece::new(Vec2::ZERO, m)], domain.clone(), None)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_on_square_conjugates_to_l1_norm() {
        let u = slab(0.0, &Domain2::unit_square()).unwrap();
        let w = conjugate(&u).unwrap();
        assert_eq!(w.pieces().len(), 4);
        for p in [Vec2::new(0.3, -0.7), Vec2::new(-2.0, 1.5)] {
            assert!((w.eval_unrestricted(p) - (p.x.abs() + p.y.abs())).abs() < 1e-15);
        }
    }

    #[test]
    fn slab_conjugate_is_shifted_support() {
        let d = Domain2::unit_square();
        let w = conjugate(&slab(0.7, &d).unwrap()).unwrap();
        let p = Vec2::new(0.4, 1.1);
        assert!((w.eval_unrestricted(p) - (d.support(p) - 0.7)).abs() < 1e-15);
    }

    #[test]
    fn pyramid_biconjugate_matches_on_grid() {
        let u = pyramid(1.5).unwrap();
        let w = conjugate(&u).unwrap();
        // Brute-force sup over a dense x-grid as the oracle for w.
        let xs: Vec<Vec2> = (0..=200)
            .flat_map(|i| (0..=200).map(move |j| Vec2::new(-1.0 + i as f64 / 100.0, -1.0 + j as f64 / 100.0)))
            .collect();
        for p in [Vec2::new(0.5, 0.2), Vec2::new(-2.0, 0.7), Vec2::new(0.0, 0.0)] {
            let brute = xs.iter().map(|&x| p.dot(x) - u.eval_unrestricted(x)).fold(f64::NEG_INFINITY, f64::max);
            assert!((w.eval_unrestricted(p) - brute).abs() < 1e-12);
        }
        let uu = conjugate(&w).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let x = Vec2::new(-1.0 + 2.0 * i as f64 / 49.0, -1.0 + 2.0 * j as f64 / 49.0);
                assert!((uu.eval_unrestricted(x) - u.eval_unrestricted(x)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn subdifferentials() {
        let d = Domain2::disk_approx(32, 1.0).unwrap();
        let c = cone(2.0, &d).unwrap();
        let s = c.subdifferential(Vec2::ZERO).unwrap();
        assert_eq!(s.vertices.len(), 32);
        assert!(s.vertices.iter().all(|v| (v.norm() - 2.0).abs() < 1e-12));
        let p = pyramid(1.0).unwrap();
        let inner = p.subdifferential(Vec2::new(0.5, 0.1)).unwrap();
        assert!(inner.is_point() && (inner.vertices[0] - Vec2::new(1.0, 0.0)).norm() < 1e-15);
        let edge = p.subdifferential(Vec2::new(0.5, 0.5)).unwrap();
        assert_eq!(edge.vertices.len(), 2);
        assert!(matches!(p.subdifferential(Vec2::new(2.0, 0.0)), Err(Error::OutsideDomain { .. })));
    }

    #[test]
    fn class_checks() {
        let d = Domain2::unit_square();
        assert!(check_c_m(&slab(0.0, &d).unwrap(), 1.0).pass);
        let disk = Domain2::disk_approx(64, 1.0).unwrap();
        let r = check_c_m(&cone(2.0, &disk).unwrap(), 1.0);
        assert!(!r.pass && r.has("cap"));
        let w = conjugate(&slab(0.0, &d).unwrap()).unwrap();
        assert!(check_c_m_star(&w, &d, 0.5).pass);
        assert!(check_c_m_on(&cone(0.5, &disk).unwrap(), &disk, 1.0).pass);
        assert!(check_c_m_on(&slab(0.0, &d).unwrap(), &disk, 1.0).has("dom"));
        let shifted: Vec<Piece> = w.pieces().iter().map(|p| Piece::new(p.a, p.b - 0.1)).collect();
        let ws = PolyConvexFn::raw(shifted, w.domain().clone(), None).unwrap();
        assert!(check_c_m_star(&ws, &d, 0.5).has("i"));
    }

    #[test]
    fn cells_partition_and_canonicalize() {
        let d = Domain2::unit_square();
        let pieces = vec![
            Piece::new(Vec2::new(1.0, 0.0), 0.0),
            Piece::new(Vec2::new(1.0, 0.0), -1.0),
            Piece::new(Vec2::new(0.0, 0.0), -5.0),
            Piece::new(Vec2::new(-1.0, 0.5), 0.1),
        ];
        let u = PolyConvexFn::from_pieces(pieces, d, None).unwrap();
        assert_eq!(u.pieces().len(), 2);
        let total: f64 = u.cells().iter().map(|c| c.area).sum();
        assert!((total - 4.0).abs() < 1e-13);
    }

    #[test]
    fn convexify_removes_spike_only() {
        let d = Domain2::unit_square();
        let g = GridConvexFn::sample(&d, 6, |x| x.norm2()).unwrap();
        let mut spiked = g.clone();
        let k = spiked.lattice.as_ref().unwrap().at(2, 3).unwrap();
        spiked.values[k] += 1.0;
        let c = convexify(&spiked).unwrap();
        for i in 0..g.values.len() {
            if i == k {
                assert!(c.values[i] < spiked.values[i]);
            } else {
                assert_eq!(c.values[i], g.values[i]);
            }
        }
        let again = convexify(&c).unwrap();
        assert_eq!(again.values, c.values);
    }
}
