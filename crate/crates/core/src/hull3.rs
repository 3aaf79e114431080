//! Lower convex hull of lifted planar points.
//!
//! Quickhull in 3D over the input plus one sentinel point placed above the
//! xy-centroid. Faces not touching the sentinel whose outward normal points
//! down are exactly the lower faces. Orientation uses exact `orient3d`, and
//! exactly coplanar adjacent triangles are merged into one polygonal face.

use crate::error::{Error, Result};
use crate::geometry::{contains_convex, orient2d, Vec2};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct HullFace {
    /// Vertex indices (into `LowerHull::points`), counter-clockwise in xy.
    pub vertices: Vec<usize>,
    /// Plane `z = <slope, x> + offset`.
    pub slope: Vec2,
    pub offset: f64,
    /// Area of the xy projection.
    pub area: f64,
}

impl HullFace {
    pub fn polygon(&self, pts: &[[f64; 3]]) -> Vec<Vec2> {
        self.vertices.iter().map(|&i| Vec2::new(pts[i][0], pts[i][1])).collect()
    }

    pub fn value(&self, x: Vec2) -> f64 {
        self.slope.dot(x) + self.offset
    }
}

#[derive(Debug, Clone)]
pub struct LowerHull {
    /// Input points after merging duplicate xy positions (lowest z kept).
    pub points: Vec<[f64; 3]>,
    /// Input index -> index into `points`.
    pub index_map: Vec<usize>,
    pub faces: Vec<HullFace>,
    /// Triangulation of the lower hull before coplanar merging (ccw in xy).
    pub triangles: Vec<[usize; 3]>,
}

fn c3(p: &[f64; 3]) -> robust::Coord3D<f64> {
    robust::Coord3D { x: p[0], y: p[1], z: p[2] }
}

fn o3(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3], d: &[f64; 3]) -> f64 {
    robust::orient3d(c3(a), c3(b), c3(c), c3(d))
}

fn xy(p: &[f64; 3]) -> Vec2 {
    Vec2::new(p[0], p[1])
}

#[derive(Clone)]
struct Face {
    v: [usize; 3],
    nb: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
}

impl LowerHull {
    pub fn new(input: &[[f64; 3]]) -> Result<LowerHull> {
        LowerHull::with_merge_tol(input, 0.0)
    }

    /// Like [`LowerHull::new`], but adjacent triangles are also merged when each
    /// lies within `tol * (1 + max |z|)` of the other's plane. Use a small positive
    /// tolerance for points whose heights carry rounding, such as evaluated
    /// max-affine functions; otherwise cells split into slivers with poor slopes.
    pub fn with_merge_tol(input: &[[f64; 3]], tol: f64) -> Result<LowerHull> {
        if input.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Invalid("non-finite lifted point".into()));
        }
        let (points, index_map) = dedupe_xy(input);
        let n = points.len();
        if n < 3 {
            return Err(Error::Invalid("lower hull needs at least three distinct xy points".into()));
        }

        // Initial non-collinear triple in xy.
        let i0 = (0..n).min_by(|&a, &b| points[a][0].total_cmp(&points[b][0])).unwrap();
        let i1 = (0..n)
            .max_by(|&a, &b| {
                let da = (xy(&points[a]) - xy(&points[i0])).norm2();
                let db = (xy(&points[b]) - xy(&points[i0])).norm2();
                da.total_cmp(&db)
            })
            .unwrap();
        let i2 = (0..n)
            .max_by(|&a, &b| {
                let oa = orient2d(xy(&points[i0]), xy(&points[i1]), xy(&points[a])).abs();
                let ob = orient2d(xy(&points[i0]), xy(&points[i1]), xy(&points[b])).abs();
                oa.total_cmp(&ob)
            })
            .unwrap();
        if orient2d(xy(&points[i0]), xy(&points[i1]), xy(&points[i2])) == 0.0 {
            return Err(Error::Invalid("lifted points are collinear in the plane".into()));
        }

        // Sentinel above the centroid, also above the plane of the seed triangle.
        let mut cx = 0.0;
        let mut cy = 0.0;
        let mut zmin = f64::INFINITY;
        let mut zmax = f64::NEG_INFINITY;
        for p in &points {
            cx += p[0];
            cy += p[1];
            zmin = zmin.min(p[2]);
            zmax = zmax.max(p[2]);
        }
        cx /= n as f64;
        cy /= n as f64;
        let seed_plane = plane_through(&points[i0], &points[i1], &points[i2]);
        let at_c = seed_plane.0.dot(Vec2::new(cx, cy)) + seed_plane.1;
        let sz = zmax.max(at_c) + (zmax - zmin) + 1.0;
        let mut pts = points.clone();
        pts.push([cx, cy, sz]);
        let s = n;

        let mut faces: Vec<Face> = Vec::new();
        let tet = [i0, i1, i2, s];
        let mut edge_owner: HashMap<(usize, usize), usize> = HashMap::new();
        for k in 0..4 {
            let opp = tet[k];
            let mut tri: Vec<usize> = tet.iter().copied().filter(|&x| x != opp).collect();
            if o3(&pts[tri[0]], &pts[tri[1]], &pts[tri[2]], &pts[opp]) < 0.0 {
                tri.swap(1, 2);
            }
            let fi = faces.len();
            for e in 0..3 {
                edge_owner.insert((tri[e], tri[(e + 1) % 3]), fi);
            }
            faces.push(Face { v: [tri[0], tri[1], tri[2]], nb: [usize::MAX; 3], outside: Vec::new(), alive: true });
        }
        for fi in 0..4 {
            for e in 0..3 {
                let (a, b) = (faces[fi].v[e], faces[fi].v[(e + 1) % 3]);
                faces[fi].nb[e] = edge_owner[&(b, a)];
            }
        }

        for p in 0..n {
            if tet.contains(&p) {
                continue;
            }
            for fi in 0..4 {
                let f = &faces[fi];
                if o3(&pts[f.v[0]], &pts[f.v[1]], &pts[f.v[2]], &pts[p]) < 0.0 {
                    faces[fi].outside.push(p);
                    break;
                }
            }
        }

        let mut stack: Vec<usize> = (0..4).filter(|&f| !faces[f].outside.is_empty()).collect();
        let mut stamp: Vec<u32> = vec![0; faces.len()];
        let mut visible_flag: Vec<i8> = vec![0; faces.len()];
        let mut round: u32 = 0;

        while let Some(fi) = stack.pop() {
            if !faces[fi].alive || faces[fi].outside.is_empty() {
                continue;
            }
            round += 1;
            let eye = {
                let f = &faces[fi];
                let (a, b, c) = (&pts[f.v[0]], &pts[f.v[1]], &pts[f.v[2]]);
                *f.outside
                    .iter()
                    .min_by(|&&p, &&q| o3(a, b, c, &pts[p]).total_cmp(&o3(a, b, c, &pts[q])))
                    .unwrap()
            };

            // Flood the visible region from fi.
            let mut visible = vec![fi];
            stamp[fi] = round;
            visible_flag[fi] = 1;
            let mut horizon: Vec<(usize, usize, usize)> = Vec::new();
            let mut qi = 0;
            while qi < visible.len() {
                let f = visible[qi];
                qi += 1;
                for e in 0..3 {
                    let g = faces[f].nb[e];
                    if stamp[g] != round {
                        stamp[g] = round;
                        let gf = &faces[g];
                        let vis = o3(&pts[gf.v[0]], &pts[gf.v[1]], &pts[gf.v[2]], &pts[eye]) < 0.0;
                        visible_flag[g] = if vis { 1 } else { -1 };
                        if vis {
                            visible.push(g);
                        }
                    }
                    if visible_flag[g] < 0 {
                        horizon.push((faces[f].v[e], faces[f].v[(e + 1) % 3], g));
                    }
                }
            }

            // Order horizon edges into a cycle.
            let mut by_start: HashMap<usize, usize> = HashMap::with_capacity(horizon.len());
            for (k, h) in horizon.iter().enumerate() {
                if by_start.insert(h.0, k).is_some() {
                    return Err(Error::Invalid("hull horizon is not a simple cycle".into()));
                }
            }
            let mut cycle = Vec::with_capacity(horizon.len());
            let mut k = 0;
            for _ in 0..horizon.len() {
                cycle.push(k);
                k = match by_start.get(&horizon[k].1) {
                    Some(&nk) => nk,
                    None => return Err(Error::Invalid("hull horizon is open".into())),
                };
            }
            if k != 0 {
                return Err(Error::Invalid("hull horizon is not a single cycle".into()));
            }

            let first_new = faces.len();
            let m = cycle.len();
            for (j, &hk) in cycle.iter().enumerate() {
                let (a, b, g) = horizon[hk];
                let nf = first_new + j;
                let next = first_new + (j + 1) % m;
                let prev = first_new + (j + m - 1) % m;
                faces.push(Face { v: [a, b, eye], nb: [g, next, prev], outside: Vec::new(), alive: true });
                for e in 0..3 {
                    if faces[g].v[e] == b && faces[g].v[(e + 1) % 3] == a {
                        faces[g].nb[e] = nf;
                    }
                }
            }
            stamp.resize(faces.len(), 0);
            visible_flag.resize(faces.len(), 0);

            let mut orphans: Vec<usize> = Vec::new();
            for &f in &visible {
                faces[f].alive = false;
                orphans.append(&mut faces[f].outside);
            }
            for p in orphans {
                if p == eye {
                    continue;
                }
                for nf in first_new..faces.len() {
                    let f = &faces[nf];
                    if o3(&pts[f.v[0]], &pts[f.v[1]], &pts[f.v[2]], &pts[p]) < 0.0 {
                        faces[nf].outside.push(p);
                        break;
                    }
                }
            }
            for nf in first_new..faces.len() {
                if !faces[nf].outside.is_empty() {
                    stack.push(nf);
                }
            }
        }

        // Lower faces: alive, no sentinel, clockwise seen from above.
        let mut lower_id: HashMap<usize, usize> = HashMap::new();
        let mut tris: Vec<[usize; 3]> = Vec::new();
        let mut src: Vec<usize> = Vec::new();
        for (fi, f) in faces.iter().enumerate() {
            if !f.alive || f.v.contains(&s) {
                continue;
            }
            if orient2d(xy(&pts[f.v[0]]), xy(&pts[f.v[1]]), xy(&pts[f.v[2]])) < 0.0 {
                lower_id.insert(fi, tris.len());
                tris.push([f.v[0], f.v[2], f.v[1]]);
                src.push(fi);
            }
        }
        if tris.is_empty() {
            return Err(Error::Invalid("lower hull is empty".into()));
        }

        let zmax = points.iter().fold(0.0f64, |m, p| m.max(p[2].abs()));
        let ztol = tol * (1.0 + zmax);
        let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); tris.len()];
        for (t, &fi) in src.iter().enumerate() {
            for &g in &faces[fi].nb {
                if let Some(&u) = lower_id.get(&g) {
                    nbrs[t].push(u);
                }
            }
        }
        // Region growing from the largest unassigned triangle: a neighbour joins
        // when all its vertices lie on the seed plane. Comparing against the seed
        // (not pairwise) keeps slivers from chaining two distinct planes together.
        let mut order: Vec<usize> = (0..tris.len()).collect();
        order.sort_by(|&a, &b| tri_area2(&pts, &tris[b]).total_cmp(&tri_area2(&pts, &tris[a])).then(a.cmp(&b)));
        let mut group = vec![usize::MAX; tris.len()];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &seed in &order {
            if group[seed] != usize::MAX {
                continue;
            }
            let gid = groups.len();
            let st = tris[seed];
            let (sa, sb) = plane_through(&pts[st[0]], &pts[st[1]], &pts[st[2]]);
            let on_plane = |v: usize| -> bool {
                if ztol == 0.0 {
                    o3(&pts[st[0]], &pts[st[1]], &pts[st[2]], &pts[v]) == 0.0
                } else {
                    (pts[v][2] - sa.dot(xy(&pts[v])) - sb).abs() <= ztol
                }
            };
            let mut members = vec![seed];
            group[seed] = gid;
            let mut k = 0;
            while k < members.len() {
                let t = members[k];
                k += 1;
                for &n in &nbrs[t] {
                    if group[n] == usize::MAX && tris[n].iter().all(|&v| on_plane(v)) {
                        group[n] = gid;
                        members.push(n);
                    }
                }
            }
            groups.push(members);
        }
        groups.sort_by_key(|m| *m.iter().min().unwrap());
        let roots: Vec<usize> = (0..groups.len()).collect();

        let mut out_faces = Vec::with_capacity(roots.len());
        for r in roots {
            let members = &groups[r];
            let best = *members
                .iter()
                .max_by(|&&a, &&b| tri_area2(&pts, &tris[a]).total_cmp(&tri_area2(&pts, &tris[b])))
                .unwrap();
            let t = tris[best];
            let (slope, _) = plane_through(&pts[t[0]], &pts[t[1]], &pts[t[2]]);
            let mut verts: Vec<usize> = members.iter().flat_map(|&m| tris[m]).collect();
            verts.sort_unstable();
            verts.dedup();
            let ring = hull_indices(&pts, &verts);
            // Offset from the mean of the ring to spread rounding evenly.
            let offset = ring.iter().map(|&i| pts[i][2] - slope.dot(xy(&pts[i]))).sum::<f64>() / ring.len() as f64;
            let area: f64 = members.iter().map(|&m| 0.5 * tri_area2(&pts, &tris[m])).sum();
            out_faces.push(HullFace { vertices: ring, slope, offset, area });
        }

        Ok(LowerHull { points, index_map, faces: out_faces, triangles: tris })
    }

    /// Indices of points that are vertices of some lower face.
    pub fn vertex_set(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.faces.iter().flat_map(|f| f.vertices.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn total_area(&self) -> f64 {
        crate::geometry::neumaier_sum(self.faces.iter().map(|f| f.area))
    }

    /// Evaluate the lower envelope at planar query points (bucketed point location).
    /// Points outside the hull's shadow get the largest plane value among nearby faces.
    pub fn evaluate(&self, queries: &[Vec2]) -> Vec<f64> {
        let polys: Vec<Vec<Vec2>> = self.faces.iter().map(|f| f.polygon(&self.points)).collect();
        let all: Vec<Vec2> = self.points.iter().map(xy).collect();
        let (lo, hi) = crate::geometry::bbox(&all);
        let g = ((self.faces.len() as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 1024);
        let wx = ((hi.x - lo.x) / g as f64).max(f64::MIN_POSITIVE);
        let wy = ((hi.y - lo.y) / g as f64).max(f64::MIN_POSITIVE);
        let cell = |p: Vec2| -> (usize, usize) {
            let i = (((p.x - lo.x) / wx) as isize).clamp(0, g as isize - 1) as usize;
            let j = (((p.y - lo.y) / wy) as isize).clamp(0, g as isize - 1) as usize;
            (i, j)
        };
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); g * g];
        for (fi, poly) in polys.iter().enumerate() {
            let (a, b) = crate::geometry::bbox(poly);
            let (i0, j0) = cell(a);
            let (i1, j1) = cell(b);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    buckets[j * g + i].push(fi);
                }
            }
        }
        let scale = (hi - lo).norm().max(1.0);
        let tol = 1e-12 * scale;
        queries
            .iter()
            .map(|&q| {
                let (i, j) = cell(q);
                let cand = &buckets[j * g + i];
                let mut best = f64::NEG_INFINITY;
                let mut found = false;
                for &fi in cand {
                    if contains_convex(&polys[fi], q, tol) {
                        best = best.max(self.faces[fi].value(q));
                        found = true;
                    }
                }
                if !found {
                    for f in &self.faces {
                        best = best.max(f.value(q));
                    }
                }
                best
            })
            .collect()
    }
}

fn tri_area2(pts: &[[f64; 3]], t: &[usize; 3]) -> f64 {
    orient2d(xy(&pts[t[0]]), xy(&pts[t[1]]), xy(&pts[t[2]])).abs()
}

/// Plane `z = <a, x> + b` through three points.
pub fn plane_through(p0: &[f64; 3], p1: &[f64; 3], p2: &[f64; 3]) -> (Vec2, f64) {
    let d1 = [p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]];
    let d2 = [p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]];
    let det = d1[0] * d2[1] - d1[1] * d2[0];
    let a1 = (d1[2] * d2[1] - d1[1] * d2[2]) / det;
    let a2 = (d1[0] * d2[2] - d1[2] * d2[0]) / det;
    let a = Vec2::new(a1, a2);
    (a, p0[2] - a.dot(xy(p0)))
}

/// Counter-clockwise xy hull of a subset of indices, collinear points dropped.
fn hull_indices(pts: &[[f64; 3]], idx: &[usize]) -> Vec<usize> {
    let mut v = idx.to_vec();
    v.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]).then(pts[a][1].total_cmp(&pts[b][1])));
    if v.len() < 3 {
        return v;
    }
    let turn = |a: usize, b: usize, c: usize| orient2d(xy(&pts[a]), xy(&pts[b]), xy(&pts[c]));
    let mut lower: Vec<usize> = Vec::new();
    for &p in &v {
        while lower.len() >= 2 && turn(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &p in v.iter().rev() {
        while upper.len() >= 2 && turn(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn dedupe_xy(input: &[[f64; 3]]) -> (Vec<[f64; 3]>, Vec<usize>) {
    let mut order: Vec<usize> = (0..input.len()).collect();
    order.sort_by(|&a, &b| {
        input[a][0]
            .total_cmp(&input[b][0])
            .then(input[a][1].total_cmp(&input[b][1]))
            .then(input[a][2].total_cmp(&input[b][2]))
    });
    let mut points: Vec<[f64; 3]> = Vec::with_capacity(input.len());
    let mut map = vec![0; input.len()];
    for &i in &order {
        let p = input[i];
        match points.last() {
            Some(l) if l[0] == p[0] && l[1] == p[1] => {}
            _ => points.push(p),
        }
        map[i] = points.len() - 1;
    }
    (points, map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_square_is_one_face() {
        let pts = [[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0], [0.5, 0.5, 1.0]];
        let h = LowerHull::new(&pts).unwrap();
        assert_eq!(h.faces.len(), 1);
        assert_eq!(h.faces[0].vertices.len(), 4);
        assert!((h.faces[0].area - 1.0).abs() < 1e-15);
        assert!(h.faces[0].slope.norm() < 1e-15);
    }

    #[test]
    fn pyramid_has_four_faces_and_skips_high_points() {
        let mut pts = vec![[-1.0, -1.0, 1.0], [1.0, -1.0, 1.0], [1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [0.0, 0.0, 0.0]];
        pts.push([0.3, 0.2, 5.0]);
        let h = LowerHull::new(&pts).unwrap();
        assert_eq!(h.faces.len(), 4);
        assert!((h.total_area() - 4.0).abs() < 1e-14);
        for f in &h.faces {
            assert!((f.slope.norm() - 1.0).abs() < 1e-14);
        }
        let v = h.evaluate(&[Vec2::new(0.3, 0.2), Vec2::new(0.0, 0.0)]);
        assert!((v[0] - 0.3).abs() < 1e-14);
        assert!(v[1].abs() < 1e-14);
    }

    #[test]
    fn duplicate_xy_keeps_lowest() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
        let h = LowerHull::new(&pts).unwrap();
        assert_eq!(h.points.len(), 3);
        assert_eq!(h.points[h.index_map[0]][2], -1.0);
    }

    #[test]
    fn collinear_input_rejected() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 1.0], [2.0, 0.0, 0.0]];
        assert!(LowerHull::new(&pts).is_err());
    }

    #[test]
    fn lattice_paraboloid_matches_brute_force() {
        let mut pts = Vec::new();
        for i in 0..12 {
            for j in 0..12 {
                let x = i as f64 / 11.0;
                let y = j as f64 / 11.0;
                pts.push([x, y, (x - 0.4).powi(2) + (y - 0.6).powi(2)]);
            }
        }
        let h = LowerHull::new(&pts).unwrap();
        assert!((h.total_area() - 1.0).abs() < 1e-13);
        // Strictly convex data: every point is on the hull.
        assert_eq!(h.vertex_set().len(), pts.len());
    }
}
