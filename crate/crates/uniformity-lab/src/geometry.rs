//! Distance statistics, convex hulls, and Delaunay triangulation for d ≤ 2.
//!
//! This module supplies the geometric quantities the rest of the crate
//! reasons about: the minimum pairwise distance h_min and per-point
//! nearest-neighbor distances ([`distance_report`]), the local cluster norm
//! √(Σ_{h_ij ≤ H} h_ij²) that controls frame lower bounds, and simplex
//! meshes ([`SimplexMesh`]) over which interpolation error is measured —
//! sorted segments in one dimension, Bowyer–Watson Delaunay triangulations in
//! two.
//!
//! Triangulation is deliberately restricted to d ∈ {1, 2}: that is enough to
//! verify the interpolation theory numerically, and it keeps the predicates
//! small enough to validate exhaustively. Inputs not in general position are
//! rejected, never perturbed; a constructed mesh is always re-validated
//! post hoc (positive volumes, manifold edges, area conservation against the
//! convex hull, and the empty-circumcircle property) so a returned mesh is a
//! certified Delaunay triangulation rather than a hopeful one.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{DistanceCtx, EmbeddedDataset, Metric};
use crate::linalg::euclidean_dist;

/// Relative tolerance for the empty-circumcircle certificate.
const CIRCUMCIRCLE_REL_TOL: f64 = 1e-9;
/// Relative tolerance for mesh-area versus hull-area conservation.
const AREA_REL_TOL: f64 = 1e-9;
/// Degeneracy threshold for general position: |det| must exceed
/// `GENERAL_POSITION_TOL · scale^d` with `scale` the bounding-box diagonal.
const GENERAL_POSITION_TOL: f64 = 1e-12;

/// Pairwise-distance summary of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    pub n: usize,
    pub metric: Metric,
    /// Minimum pairwise distance h_min = min_{i<j} h_ij.
    pub h_min: f64,
    /// Lexicographically smallest pair (i, j), i < j, achieving h_min.
    pub argmin_pair: (usize, usize),
    /// Per-point distance to its nearest neighbor.
    pub nn_dist: Vec<f64>,
}

/// A simplicial mesh: segments over sorted points (dim 1) or a triangulation
/// (dim 2). Simplex tuples are index-sorted and the simplex list is
/// lexicographically sorted, so equal meshes compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMesh {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    /// Each inner list has dim + 1 vertex indices, sorted ascending.
    pub simplices: Vec<Vec<usize>>,
    /// Max pairwise vertex distance within each simplex.
    pub per_simplex_diameter: Vec<f64>,
}

/// Exact O(N²) pairwise scan: h_min, its achieving pair, and every point's
/// nearest-neighbor distance. Rows are computed in parallel; the reduction
/// is index-ordered, so the result does not depend on scheduling.
pub fn distance_report(ds: &EmbeddedDataset, metric: Metric) -> Result<DistanceReport> {
    let n = ds.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let ctx = DistanceCtx::new(ds, metric)?;
    // Row i: nearest neighbor of i with the smallest index among ties.
    let rows: Vec<(f64, usize)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, usize::MAX);
            for j in 0..n {
                if j == i {
                    continue;
                }
                let d = ctx.dist(i, j);
                if d < best.0 || (d == best.0 && j < best.1) {
                    best = (d, j);
                }
            }
            best
        })
        .collect();
    let nn_dist: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let h_min = nn_dist.iter().copied().fold(f64::INFINITY, f64::min);
    // First row attaining h_min gives the lexicographically smallest pair:
    // its partner index cannot be smaller (that row would attain h_min too).
    let i = nn_dist
        .iter()
        .position(|&d| d == h_min)
        .expect("h_min is the min of nn_dist");
    let j = rows[i].1;
    let argmin_pair = (i.min(j), i.max(j));
    Ok(DistanceReport { n, metric, h_min, argmin_pair, nn_dist })
}

/// Local cluster norm √(Σ_{j ∈ 𝓓_{i,H}} h_ij²) with
/// 𝓓_{i,H} = {j ≠ i | h_ij ≤ H} and h_ij the euclidean distance — the
/// data-dependent quantity that bounds how much a crowded neighborhood can
/// depress the frame lower bound.
///
/// Panics if `i` is out of bounds or `H` is negative (NaN-free preconditions).
#[must_use]
pub fn local_cluster_norm(ds: &EmbeddedDataset, i: usize, h: f64) -> f64 {
    assert!(h >= 0.0, "neighborhood radius H must be nonnegative");
    let xi = ds.vector(i);
    let mut sum = 0.0;
    for j in 0..ds.len() {
        if j == i {
            continue;
        }
        let d = euclidean_dist(xi, ds.vector(j));
        if d <= h {
            sum += d * d;
        }
    }
    sum.sqrt()
}

fn bbox_diagonal(points: &[Vec<f64>], d: usize) -> f64 {
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for p in points {
        for c in 0..d {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    (0..d).map(|c| (hi[c] - lo[c]).powi(2)).sum::<f64>().sqrt()
}

fn validate_points(points: &[Vec<f64>], d: usize) -> Result<()> {
    if !(1..=2).contains(&d) {
        return Err(Error::UnsupportedDim { d });
    }
    for p in points {
        if p.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("points must have finite coordinates".into()));
        }
    }
    Ok(())
}

/// First (d+1)-tuple violating general position, if any. For d=1 this is an
/// exact full check via sorting; for d=2 it is exhaustive over triples for
/// N ≤ 64 and randomized (10⁴ fixed-seed samples) beyond that.
fn first_degenerate_tuple(points: &[Vec<f64>], d: usize) -> Option<Vec<usize>> {
    let n = points.len();
    let scale = bbox_diagonal(points, d);
    let tol = GENERAL_POSITION_TOL * scale.powi(d as i32);
    match d {
        1 => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
            for w in order.windows(2) {
                if (points[w[1]][0] - points[w[0]][0]).abs() <= tol {
                    let mut t = vec![w[0], w[1]];
                    t.sort_unstable();
                    return Some(t);
                }
            }
            None
        }
        2 => {
            let degenerate = |i: usize, j: usize, k: usize| {
                let det = orient2d(&points[i], &points[j], &points[k]);
                det.abs() <= tol
            };
            if n <= 64 {
                for i in 0..n {
                    for j in i + 1..n {
                        for k in j + 1..n {
                            if degenerate(i, j, k) {
                                return Some(vec![i, j, k]);
                            }
                        }
                    }
                }
            } else {
                use rand::Rng;
                use rand::SeedableRng;
                // Fixed internal seed: the sampled check is probabilistic but
                // reproducible.
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e37_79b9);
                for _ in 0..10_000 {
                    let i = rng.random_range(0..n);
                    let j = rng.random_range(0..n);
                    let k = rng.random_range(0..n);
                    if i == j || j == k || i == k {
                        continue;
                    }
                    if degenerate(i, j, k) {
                        let mut t = vec![i, j, k];
                        t.sort_unstable();
                        return Some(t);
                    }
                }
            }
            None
        }
        _ => unreachable!("dimension validated earlier"),
    }
}

/// True iff every (d+1)-tuple of points is affinely independent (no
/// duplicates in 1-D, no collinear triples in 2-D), up to the relative
/// tolerance documented on [`first_degenerate_tuple`].
pub fn general_position_check(points: &[Vec<f64>], d: usize) -> Result<bool> {
    validate_points(points, d)?;
    if points.len() < d + 1 {
        return Err(Error::TooFewPoints { needed: d + 1, got: points.len() });
    }
    Ok(first_degenerate_tuple(points, d).is_none())
}

/// Twice the signed area of triangle (a, b, c); positive iff counterclockwise.
fn orient2d(a: &[f64], b: &[f64], c: &[f64]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Positive iff `p` lies strictly inside the circumcircle of (a, b, c);
/// orientation-normalized so the caller need not order the triangle.
fn in_circle(a: &[f64], b: &[f64], c: &[f64], p: &[f64]) -> f64 {
    let adx = a[0] - p[0];
    let ady = a[1] - p[1];
    let bdx = b[0] - p[0];
    let bdy = b[1] - p[1];
    let cdx = c[0] - p[0];
    let cdy = c[1] - p[1];
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    let det = adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx)
        + ad * (bdx * cdy - bdy * cdx);
    if orient2d(a, b, c) < 0.0 {
        -det
    } else {
        det
    }
}

/// Circumcenter and circumradius of a triangle, computed relative to vertex
/// `a` for conditioning.
fn circumcircle(a: &[f64], b: &[f64], c: &[f64]) -> ([f64; 2], f64) {
    let bx = b[0] - a[0];
    let by = b[1] - a[1];
    let cx = c[0] - a[0];
    let cy = c[1] - a[1];
    let d = 2.0 * (bx * cy - by * cx);
    let b2 = bx * bx + by * by;
    let c2 = cx * cx + cy * cy;
    let ux = (cy * b2 - by * c2) / d;
    let uy = (bx * c2 - cx * b2) / d;
    ([a[0] + ux, a[1] + uy], (ux * ux + uy * uy).sqrt())
}

/// Indices of the convex hull in counterclockwise order (monotone chain;
/// collinear boundary points are dropped). Requires at least 3 points not
/// all collinear; fewer effective dimensions yield a degenerate (≤ 2 point)
/// hull.
#[must_use]
pub fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
    });
    order.dedup_by(|&mut a, &mut b| points[a] == points[b]);
    if order.len() < 3 {
        return order;
    }
    let build = |iter: &mut dyn Iterator<Item = usize>| {
        let mut chain: Vec<usize> = Vec::new();
        for i in iter {
            while chain.len() >= 2 {
                let a = chain[chain.len() - 2];
                let b = chain[chain.len() - 1];
                if orient2d(&points[a], &points[b], &points[i]) <= 0.0 {
                    chain.pop();
                } else {
                    break;
                }
            }
            chain.push(i);
        }
        chain
    };
    let mut lower = build(&mut order.iter().copied());
    let mut upper = build(&mut order.iter().rev().copied());
    lower.pop();
    upper.pop();
    lower.append(&mut upper);
    lower
}

/// Area of the convex hull of 2-D points (shoelace over the hull polygon).
#[must_use]
pub fn hull_area_2d(points: &[Vec<f64>]) -> f64 {
    let hull = convex_hull_2d(points);
    if hull.len() < 3 {
        return 0.0;
    }
    let mut twice = 0.0;
    for w in 0..hull.len() {
        let p = &points[hull[w]];
        let q = &points[hull[(w + 1) % hull.len()]];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    twice.abs() / 2.0
}

fn simplex_diameter(vertices: &[Vec<f64>], simplex: &[usize]) -> f64 {
    let mut d = 0.0f64;
    for (a, &i) in simplex.iter().enumerate() {
        for &j in &simplex[a + 1..] {
            d = d.max(euclidean_dist(&vertices[i], &vertices[j]));
        }
    }
    d
}

fn canonicalize(mut simplices: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for s in &mut simplices {
        s.sort_unstable();
    }
    simplices.sort();
    simplices
}

impl SimplexMesh {
    /// Builds a mesh from explicit parts, canonicalizing the simplex list and
    /// running the full certificate. For hand-built fixtures (e.g. meshes with
    /// a deliberately squeezed vertex) rather than [`delaunay`] outputs.
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        Self::assemble(dim, vertices, simplices)
    }

    fn assemble(dim: usize, vertices: Vec<Vec<f64>>, simplices: Vec<Vec<usize>>) -> Result<Self> {
        let simplices = canonicalize(simplices);
        let per_simplex_diameter = simplices
            .iter()
            .map(|s| simplex_diameter(&vertices, s))
            .collect();
        let mesh = SimplexMesh { dim, vertices, simplices, per_simplex_diameter };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Certifies the mesh invariants, returning a mesh-invalid error naming
    /// the first violation:
    /// every simplex has positive volume; every vertex is used; simplices
    /// tile the convex hull (shared endpoints and exact cover in 1-D; edge
    /// counts ≤ 2 and area conservation within 1e-9 relative in 2-D); and in
    /// 2-D every non-vertex point clears each circumcircle by a relative
    /// margin ≥ −1e-9.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::MeshInvalid(msg));
        if self.simplices.is_empty() {
            return fail("mesh has no simplices".into());
        }
        if self.simplices.len() != self.per_simplex_diameter.len() {
            return fail("diameter list length disagrees with simplex count".into());
        }
        let n = self.vertices.len();
        let mut used = vec![false; n];
        for s in &self.simplices {
            if s.len() != self.dim + 1 {
                return fail(format!("simplex {s:?} has wrong arity for dim {}", self.dim));
            }
            for &v in s {
                if v >= n {
                    return fail(format!("simplex {s:?} references missing vertex {v}"));
                }
                used[v] = true;
            }
        }
        if let Some(orphan) = used.iter().position(|&u| !u) {
            return fail(format!("vertex {orphan} belongs to no simplex"));
        }
        match self.dim {
            1 => self.validate_1d(),
            2 => self.validate_2d(),
            d => fail(format!("unsupported mesh dimension {d}")),
        }
    }

    fn validate_1d(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::MeshInvalid(msg));
        let x = |v: usize| self.vertices[v][0];
        let mut intervals: Vec<(f64, f64)> = self
            .simplices
            .iter()
            .map(|s| {
                let (a, b) = (x(s[0]), x(s[1]));
                (a.min(b), a.max(b))
            })
            .collect();
        intervals.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (lo, hi) in &intervals {
            if hi <= lo {
                return fail(format!("segment [{lo}, {hi}] has nonpositive length"));
            }
        }
        for w in intervals.windows(2) {
            if w[0].1 != w[1].0 {
                return fail(format!(
                    "segments [{}, {}] and [{}, {}] do not share an endpoint",
                    w[0].0, w[0].1, w[1].0, w[1].1
                ));
            }
        }
        let lo = self.vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
        let hi = self.vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
        if intervals.first().unwrap().0 != lo || intervals.last().unwrap().1 != hi {
            return fail("segments do not cover the full vertex range".into());
        }
        Ok(())
    }

    fn validate_2d(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::MeshInvalid(msg));
        let mut area_sum = 0.0;
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for s in &self.simplices {
            let (a, b, c) = (&self.vertices[s[0]], &self.vertices[s[1]], &self.vertices[s[2]]);
            let twice = orient2d(a, b, c);
            if twice.abs() == 0.0 {
                return fail(format!("triangle {s:?} is degenerate"));
            }
            area_sum += twice.abs() / 2.0;
            for (u, v) in [(s[0], s[1]), (s[0], s[2]), (s[1], s[2])] {
                *edge_count.entry((u.min(v), u.max(v))).or_insert(0) += 1;
            }
        }
        if let Some((edge, k)) = edge_count.iter().find(|(_, &k)| k > 2) {
            return fail(format!("edge {edge:?} is shared by {k} > 2 triangles"));
        }
        let hull_area = hull_area_2d(&self.vertices);
        if (area_sum - hull_area).abs() > AREA_REL_TOL * hull_area {
            return fail(format!(
                "triangle area {area_sum} does not match hull area {hull_area}"
            ));
        }
        // Empty-circumcircle certificate: every non-vertex point must clear
        // every circumcircle, up to a relative margin.
        for s in &self.simplices {
            let (center, r) =
                circumcircle(&self.vertices[s[0]], &self.vertices[s[1]], &self.vertices[s[2]]);
            for (q, v) in self.vertices.iter().enumerate() {
                if s.contains(&q) {
                    continue;
                }
                let margin = (euclidean_dist(v, &center) - r) / r;
                if margin < -CIRCUMCIRCLE_REL_TOL {
                    return fail(format!(
                        "point {q} invades the circumcircle of {s:?} (relative margin {margin:.3e})"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Sum of simplex volumes (segment lengths in 1-D, triangle areas in 2-D).
    #[must_use]
    pub fn total_volume(&self) -> f64 {
        match self.dim {
            1 => self
                .simplices
                .iter()
                .map(|s| (self.vertices[s[1]][0] - self.vertices[s[0]][0]).abs())
                .sum(),
            _ => self
                .simplices
                .iter()
                .map(|s| {
                    orient2d(&self.vertices[s[0]], &self.vertices[s[1]], &self.vertices[s[2]])
                        .abs()
                        / 2.0
                })
                .sum(),
        }
    }
}

/// Delaunay triangulation, d ∈ {1, 2}.
///
/// 1-D is the sorted-segment chain over distinct points. 2-D runs
/// Bowyer–Watson with a far-away enclosing triangle, inserting points in
/// input order; the result is re-validated (see [`SimplexMesh::validate`])
/// before being returned, with an enlarged enclosing triangle retried once
/// or twice if validation fails — the certified result is a pure function of
/// the input.
///
/// Inputs that cannot be certified are rejected, never perturbed. When the
/// obstruction is a degenerate tuple (duplicate points, or in 2-D an
/// unavoidable collinear triple such as an all-collinear point set), the
/// error names that tuple. Benign degeneracies that stay off the mesh — for
/// example a point collinear with two others that never needs to form a
/// triangle with them — are fine.
pub fn delaunay(points: &[Vec<f64>], d: usize) -> Result<SimplexMesh> {
    validate_points(points, d)?;
    if points.len() < d + 1 {
        return Err(Error::TooFewPoints { needed: d + 1, got: points.len() });
    }
    match d {
        1 => {
            if let Some(tuple) = first_degenerate_tuple(points, 1) {
                return Err(Error::GeneralPosition { tuple });
            }
            let mut order: Vec<usize> = (0..points.len()).collect();
            order.sort_by(|&a, &b| points[a][0].total_cmp(&points[b][0]));
            let simplices = order.windows(2).map(|w| vec![w[0], w[1]]).collect();
            SimplexMesh::assemble(1, points.to_vec(), simplices)
        }
        2 => {
            let mut last_err = None;
            for scale in [1.0, 4.0, 16.0] {
                let simplices = bowyer_watson(points, scale);
                match SimplexMesh::assemble(2, points.to_vec(), simplices) {
                    Ok(mesh) => return Ok(mesh),
                    Err(e) => last_err = Some(e),
                }
            }
            // Certification failed outright; prefer naming a degenerate
            // tuple when one explains the failure.
            if let Some(tuple) = first_degenerate_tuple(points, 2) {
                return Err(Error::GeneralPosition { tuple });
            }
            Err(last_err.expect("loop ran at least once"))
        }
        _ => unreachable!("dimension validated earlier"),
    }
}

/// One Bowyer–Watson pass. `enlarge` scales the enclosing super-triangle;
/// callers retry with a larger one if the certificate fails.
fn bowyer_watson(points: &[Vec<f64>], enlarge: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for c in 0..2 {
            lo[c] = lo[c].min(p[c]);
            hi[c] = hi[c].max(p[c]);
        }
    }
    let cx = (lo[0] + hi[0]) / 2.0;
    let cy = (lo[1] + hi[1]) / 2.0;
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let m = 2e4 * extent * enlarge;
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.push(vec![cx - 3.0 * m, cy - m]);
    pts.push(vec![cx + 3.0 * m, cy - m]);
    pts.push(vec![cx, cy + 3.0 * m]);

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for p in 0..n {
        let point = &pts[p];
        let mut bad = vec![false; tris.len()];
        for (t, tri) in tris.iter().enumerate() {
            if in_circle(&pts[tri[0]], &pts[tri[1]], &pts[tri[2]], point) > 0.0 {
                bad[t] = true;
            }
        }
        // Cavity boundary: edges of bad triangles seen exactly once, in
        // deterministic encounter order.
        let mut edge_order: Vec<(usize, usize)> = Vec::new();
        let mut edge_count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (t, tri) in tris.iter().enumerate() {
            if !bad[t] {
                continue;
            }
            for (u, v) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (u.min(v), u.max(v));
                let c = edge_count.entry(key).or_insert(0);
                if *c == 0 {
                    edge_order.push(key);
                }
                *c += 1;
            }
        }
        let mut next: Vec<[usize; 3]> = tris
            .iter()
            .zip(&bad)
            .filter(|(_, &b)| !b)
            .map(|(t, _)| *t)
            .collect();
        for (u, v) in edge_order {
            if edge_count[&(u, v)] == 1 {
                next.push([u, v, p]);
            }
        }
        tris = next;
    }
    tris.into_iter()
        .filter(|t| t.iter().all(|&v| v < n))
        .map(|t| t.to_vec())
        .collect()
}

/// Largest pairwise vertex distance within any single simplex — the h_max
/// that enters the interpolation bound.
pub fn h_max_simplex(mesh: &SimplexMesh) -> Result<f64> {
    if mesh.simplices.is_empty() {
        return Err(Error::InvalidInput("mesh has no simplices".into()));
    }
    Ok(mesh
        .simplices
        .iter()
        .map(|s| simplex_diameter(&mesh.vertices, s))
        .fold(0.0, f64::max))
}

/// Uniform partition of [a, b] into `n` segments (n + 1 vertices). Built
/// directly rather than via [`delaunay`] so callers can mesh exact grids.
pub fn interval_mesh(a: f64, b: f64, n: usize) -> Result<SimplexMesh> {
    if n == 0 || !(b - a).is_finite() || b <= a {
        return Err(Error::InvalidInput(format!(
            "interval mesh needs b > a and n ≥ 1, got [{a}, {b}] with n = {n}"
        )));
    }
    let vertices: Vec<Vec<f64>> = (0..=n)
        .map(|i| vec![a + (b - a) * i as f64 / n as f64])
        .collect();
    let simplices = (0..n).map(|i| vec![i, i + 1]).collect();
    SimplexMesh::assemble(1, vertices, simplices)
}

/// Structured n×n grid over the rectangle [a₀,b₀]×[a₁,b₁], each cell split
/// along its lower-left→upper-right diagonal: (n+1)² vertices, 2n²
/// right triangles. Grid points are not in general position (collinear
/// triples everywhere), yet the mesh satisfies the open-ball
/// empty-circumcircle property — the apex opposite a diagonal sits exactly on
/// the circle — so it passes the same certificate as a [`delaunay`] output.
pub fn grid_mesh(a: [f64; 2], b: [f64; 2], n: usize) -> Result<SimplexMesh> {
    if n == 0 || b[0] <= a[0] || b[1] <= a[1] {
        return Err(Error::InvalidInput(format!(
            "grid mesh needs b > a componentwise and n ≥ 1, got {a:?}..{b:?} with n = {n}"
        )));
    }
    let coord = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for row in 0..=n {
        for col in 0..=n {
            vertices.push(vec![coord(a[0], b[0], col), coord(a[1], b[1], row)]);
        }
    }
    let at = |row: usize, col: usize| row * (n + 1) + col;
    let mut simplices = Vec::with_capacity(2 * n * n);
    for row in 0..n {
        for col in 0..n {
            let (sw, se, nw, ne) =
                (at(row, col), at(row, col + 1), at(row + 1, col), at(row + 1, col + 1));
            simplices.push(vec![sw, se, ne]);
            simplices.push(vec![sw, ne, nw]);
        }
    }
    SimplexMesh::assemble(2, vertices, simplices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::DataPoint;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset(rows: &[Vec<f64>]) -> EmbeddedDataset {
        let points = rows
            .iter()
            .enumerate()
            .map(|(i, v)| DataPoint { id: format!("p{i}"), vector: v.clone() })
            .collect();
        EmbeddedDataset::new(rows[0].len(), points, Metric::Euclidean).unwrap()
    }

    #[test]
    fn distance_report_hand_case() {
        // Pairs: d(0,1)=5, d(0,2)=5, d(1,2)=√(9+1)=√10 — the minimum.
        let ds = dataset(&[vec![0.0, 0.0], vec![3.0, 4.0], vec![0.0, 5.0]]);
        let rep = distance_report(&ds, Metric::Euclidean).unwrap();
        assert!((rep.h_min - 10.0f64.sqrt()).abs() < 1e-15);
        assert_eq!(rep.argmin_pair, (1, 2));
        assert!((rep.nn_dist[0] - 5.0).abs() < 1e-15);
        assert!((rep.nn_dist[1] - 10.0f64.sqrt()).abs() < 1e-15);
        assert!((rep.nn_dist[2] - 10.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn distance_report_duplicates_and_pairs() {
        let dup = dataset(&[vec![1.0], vec![1.0], vec![5.0]]);
        assert_eq!(distance_report(&dup, Metric::Euclidean).unwrap().h_min, 0.0);

        let two = dataset(&[vec![0.0], vec![1.0]]);
        let rep = distance_report(&two, Metric::Euclidean).unwrap();
        assert_eq!(rep.h_min, 1.0);
        assert_eq!(rep.nn_dist, vec![1.0, 1.0]);
        assert_eq!(rep.argmin_pair, (0, 1));

        // Tie between pairs (0,1) and (1,2): lexicographic rule keeps (0,1).
        let tie = dataset(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert_eq!(distance_report(&tie, Metric::Euclidean).unwrap().argmin_pair, (0, 1));

        assert!(matches!(
            distance_report(&dataset(&[vec![0.0]]), Metric::Euclidean),
            Err(Error::TooFewPoints { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn distance_report_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|_| (0..3).map(|_| rng.random_range(0.5..2.0)).collect())
                .collect();
            let ds = dataset(&rows);
            let rep = distance_report(&ds, metric).unwrap();
            let mut h = f64::INFINITY;
            for i in 0..rows.len() {
                for j in i + 1..rows.len() {
                    h = h.min(metric.distance(&rows[i], &rows[j]));
                }
            }
            assert_eq!(rep.h_min, h, "exact equality: same arithmetic");
            assert_eq!(rep.h_min, rep.nn_dist.iter().copied().fold(f64::INFINITY, f64::min));
        }
    }

    #[test]
    fn local_cluster_norm_cases() {
        let ds = dataset(&[vec![0.0], vec![1.0], vec![2.0]]);
        assert_eq!(local_cluster_norm(&ds, 1, 0.5), 0.0);
        assert!((local_cluster_norm(&ds, 1, 1.0) - 2.0f64.sqrt()).abs() < 1e-15);
        assert!(
            (local_cluster_norm(&ds, 0, f64::INFINITY) - 5.0f64.sqrt()).abs() < 1e-15,
            "full sum √(1²+2²)"
        );
    }

    #[test]
    fn delaunay_1d_sorted_segments() {
        let mesh = delaunay(&[vec![5.0], vec![0.0], vec![2.0]], 1).unwrap();
        assert_eq!(mesh.simplices.len(), 2);
        // As coordinate intervals: [0,2] and [2,5].
        let mut intervals: Vec<(f64, f64)> = mesh
            .simplices
            .iter()
            .map(|s| {
                let (a, b) = (mesh.vertices[s[0]][0], mesh.vertices[s[1]][0]);
                (a.min(b), a.max(b))
            })
            .collect();
        intervals.sort_by(|p, q| p.0.total_cmp(&q.0));
        assert_eq!(intervals, vec![(0.0, 2.0), (2.0, 5.0)]);
        assert_eq!(h_max_simplex(&mesh).unwrap(), 3.0);
    }

    #[test]
    fn delaunay_rejects_degenerate_input() {
        match delaunay(&[vec![0.0], vec![1.0], vec![1.0]], 1).unwrap_err() {
            Error::GeneralPosition { tuple } => assert_eq!(tuple, vec![1, 2]),
            other => panic!("expected GeneralPosition, got {other:?}"),
        }
        match delaunay(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]], 2).unwrap_err() {
            Error::GeneralPosition { tuple } => assert_eq!(tuple, vec![0, 1, 2]),
            other => panic!("expected GeneralPosition, got {other:?}"),
        }
        assert!(matches!(
            delaunay(&[vec![0.0, 0.0], vec![1.0, 0.0]], 2),
            Err(Error::TooFewPoints { .. })
        ));
        let cube: Vec<Vec<f64>> = (0..4).map(|_| vec![0.0; 3]).collect();
        assert!(matches!(delaunay(&cube, 3), Err(Error::UnsupportedDim { d: 3 })));
    }

    #[test]
    fn delaunay_single_triangle() {
        let mesh = delaunay(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.3, 0.9]], 2).unwrap();
        assert_eq!(mesh.simplices, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn delaunay_square_plus_center() {
        // Brute-force oracle over all C(5,3) triangles: corner-only triangles
        // fail (the center lies strictly inside their circumcircles, which
        // all coincide with the square's), leaving exactly the 4
        // corner-corner-center triangles.
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ];
        let mesh = delaunay(&pts, 2).unwrap();
        let expected = vec![vec![0, 1, 4], vec![0, 3, 4], vec![1, 2, 4], vec![2, 3, 4]];
        assert_eq!(mesh.simplices, expected);
        // Longest edge in every triangle is a unit square side; the
        // corner-to-center spokes measure √2/2 < 1.
        assert!((h_max_simplex(&mesh).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn h_max_on_hand_meshes() {
        let seg = delaunay(&[vec![0.0], vec![5.0]], 1).unwrap();
        assert_eq!(h_max_simplex(&seg).unwrap(), 5.0);
        let s = 2.5;
        let tri = delaunay(
            &[vec![0.0, 0.0], vec![s, 0.0], vec![s / 2.0, s * 3.0f64.sqrt() / 2.0]],
            2,
        )
        .unwrap();
        assert!((h_max_simplex(&tri).unwrap() - s).abs() < 1e-12);
    }

    /// Independent hull oracle: gift wrapping plus shoelace.
    fn gift_wrap_area(points: &[Vec<f64>]) -> f64 {
        let n = points.len();
        let start = (0..n)
            .min_by(|&a, &b| {
                points[a][0]
                    .total_cmp(&points[b][0])
                    .then(points[a][1].total_cmp(&points[b][1]))
            })
            .unwrap();
        let mut hull = vec![start];
        loop {
            let cur = *hull.last().unwrap();
            let mut cand = usize::MAX;
            for next in 0..n {
                if next == cur {
                    continue;
                }
                if cand == usize::MAX {
                    cand = next;
                    continue;
                }
                let cross = orient2d(&points[cur], &points[cand], &points[next]);
                let further = cross == 0.0
                    && euclidean_dist(&points[cur], &points[next])
                        > euclidean_dist(&points[cur], &points[cand]);
                if cross < 0.0 || further {
                    cand = next;
                }
            }
            if cand == start {
                break;
            }
            hull.push(cand);
        }
        let mut twice = 0.0;
        for w in 0..hull.len() {
            let p = &points[hull[w]];
            let q = &points[hull[(w + 1) % hull.len()]];
            twice += p[0] * q[1] - q[0] * p[1];
        }
        twice.abs() / 2.0
    }

    /// Independent Delaunay oracle: every triple whose open circumdisk
    /// contains no other point.
    fn brute_force_delaunay(points: &[Vec<f64>]) -> Vec<Vec<usize>> {
        let n = points.len();
        let mut tris = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let empty = (0..n)
                        .filter(|&q| q != i && q != j && q != k)
                        .all(|q| in_circle(&points[i], &points[j], &points[k], &points[q]) <= 0.0);
                    if empty {
                        tris.push(vec![i, j, k]);
                    }
                }
            }
        }
        tris
    }

    #[test]
    fn delaunay_matches_brute_force_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(314);
        for case in 0..10 {
            let pts: Vec<Vec<f64>> = (0..8)
                .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
                .collect();
            let mesh = delaunay(&pts, 2).unwrap();
            assert_eq!(
                mesh.simplices,
                brute_force_delaunay(&pts),
                "case {case}: triangle sets differ"
            );
        }
    }

    #[test]
    fn delaunay_random_sets_conserve_area_and_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..30)
                .map(|_| vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
                .collect();
            let mesh = delaunay(&pts, 2).unwrap();
            // validate() already certified margins and area; cross-check the
            // area against the independent gift-wrapping oracle.
            let oracle = gift_wrap_area(&pts);
            assert!(
                (mesh.total_volume() - oracle).abs() <= 1e-9 * oracle,
                "mesh area {} vs gift-wrap hull area {}",
                mesh.total_volume(),
                oracle
            );
            let rep = distance_report(&dataset(&pts), Metric::Euclidean).unwrap();
            assert!(h_max_simplex(&mesh).unwrap() >= rep.h_min);
        }
    }

    #[test]
    fn general_position_cases() {
        let collinear = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(!general_position_check(&collinear, 2).unwrap());
        let square = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        assert!(general_position_check(&square, 2).unwrap());
        assert!(general_position_check(&[vec![0.0], vec![1.0]], 1).unwrap());
        assert!(!general_position_check(&[vec![0.0], vec![0.0]], 1).unwrap());
    }

    #[test]
    fn general_position_sampled_beyond_64_points() {
        // 100 points on a line: the randomized check must still notice.
        let line: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        assert!(!general_position_check(&line, 2).unwrap());
    }

    #[test]
    fn interval_mesh_partitions_exactly() {
        let mesh = interval_mesh(0.0, std::f64::consts::PI, 8).unwrap();
        assert_eq!(mesh.simplices.len(), 8);
        assert!((h_max_simplex(&mesh).unwrap() - std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert!((mesh.total_volume() - std::f64::consts::PI).abs() < 1e-12);
        assert!(interval_mesh(1.0, 1.0, 4).is_err());
    }

    #[test]
    fn grid_mesh_tiles_the_square() {
        let mesh = grid_mesh([0.0, 0.0], [1.0, 1.0], 2).unwrap();
        assert_eq!(mesh.vertices.len(), 9);
        assert_eq!(mesh.simplices.len(), 8);
        assert!((mesh.total_volume() - 1.0).abs() < 1e-12);
        // Cell diagonal: √2 / 2 for a 2×2 grid of the unit square.
        assert!((h_max_simplex(&mesh).unwrap() - 2.0f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![2.0, 0.0],
            vec![2.0, 2.0],
            vec![0.0, 2.0],
            vec![1.0, 1.0],
        ];
        let hull = convex_hull_2d(&pts);
        assert_eq!(hull.len(), 4);
        assert!(!hull.contains(&4), "interior point stays off the hull");
        assert!((hull_area_2d(&pts) - 4.0).abs() < 1e-15);
    }

    mod proptests {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(40))]

            #[test]
            fn delaunay_2d_is_always_certified(
                seed in any::<u64>(),
                n in 3usize..=25,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pts: Vec<Vec<f64>> = (0..n)
                    .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                    .collect();
                match delaunay(&pts, 2) {
                    Ok(mesh) => {
                        prop_assert!(mesh.validate().is_ok());
                        prop_assert!(
                            h_max_simplex(&mesh).unwrap()
                                <= crate::linalg::euclidean_dist(&[-1.0, -1.0], &[1.0, 1.0])
                        );
                    }
                    // Random degeneracies are legal inputs to reject.
                    Err(Error::GeneralPosition { .. }) => {}
                    Err(e) => prop_assert!(false, "unexpected error {e:?}"),
                }
            }

            #[test]
            fn hull_area_matches_gift_wrapping(
                seed in any::<u64>(),
                n in 3usize..=40,
            ) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let pts: Vec<Vec<f64>> = (0..n)
                    .map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                    .collect();
                let area = hull_area_2d(&pts);
                let oracle = gift_wrap_area(&pts);
                prop_assert!((area - oracle).abs() <= 1e-9 * oracle.max(1.0));
            }
        }
    }
}
