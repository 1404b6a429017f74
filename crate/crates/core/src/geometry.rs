//! Simple polygons and their slap maps.
//!
//! The boundary of a polygon is parametrized by arc length starting at the
//! first input vertex and running counterclockwise. The slap map sends a
//! boundary point to the first boundary point hit by the ray cast along the
//! inward normal.

use crate::pwamap::{AffineBranch, MapError, PiecewiseAffineMap};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Rays hitting a vertex within this fraction of the perimeter are ambiguous.
pub const VERTEX_TOL: f64 = 1e-9;
/// Intersections closer than this (times the perimeter) to the source are ignored.
const SELF_HIT_TOL: f64 = 1e-12;
/// Two sides count as parallel when `|sin θ|` is below this.
const PARALLEL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex coordinates must be finite")]
    NonFinite,
    #[error("edges {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    #[error("degenerate polygon at vertex {0} (repeated vertex or collinear neighbours)")]
    Degenerate(usize),
    #[error("regular polygon needs d >= 3, got {0}")]
    InvalidArity(usize),
    #[error("kite angles (alpha={alpha}, beta={beta}) violate 0 < beta < pi/4 < alpha, alpha + beta < pi/2")]
    OutOfFamily { alpha: f64, beta: f64 },
    #[error("boundary point at arc length {0} is a vertex")]
    AtVertex(f64),
    #[error("arc length {0} is outside [0, perimeter)")]
    OffBoundary(f64),
    #[error("normal ray from arc length {s} hits vertex {vertex}")]
    VertexHit { s: f64, vertex: usize },
    #[error("normal ray from arc length {0} never meets the boundary")]
    NoHit(f64),
    #[error("polygon has parallel sides facing each other; its slap map is not expanding")]
    NotExpanding,
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point2 {
    fn from(a: [f64; 2]) -> Self {
        Point2 { x: a[0], y: a[1] }
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    fn add_scaled(self, v: Point2, t: f64) -> Point2 {
        Point2::new(self.x + t * v.x, self.y + t * v.y)
    }

    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Counterclockwise rotation by a right angle.
    fn perp(self) -> Point2 {
        Point2::new(-self.y, self.x)
    }
}

/// Position on the boundary: arc length `s` and the side containing it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub s: f64,
    pub side: usize,
}

/// Simple polygon, oriented counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polygon {
    vertices: Vec<Point2>,
    side_lengths: Vec<f64>,
    cumulative_arclength: Vec<f64>,
    perimeter: f64,
    #[serde(skip)]
    directions: Vec<Point2>,
}

/// Polygon file contents: `{"vertices": [[x0, y0], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolygonFile {
    pub vertices: Vec<Point2>,
}

fn segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let orient = |p: Point2, q: Point2, r: Point2| q.sub(p).cross(r.sub(p));
    let on_segment = |p: Point2, q: Point2, r: Point2| {
        r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

impl Polygon {
    /// Validates and normalizes a vertex list. Clockwise input is reversed,
    /// keeping the first vertex as the arc-length origin.
    pub fn new(vertices: Vec<Point2>) -> Result<Polygon, GeometryError> {
        let d = vertices.len();
        if d < 3 {
            return Err(GeometryError::TooFewVertices(d));
        }
        if vertices.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let scale = vertices
            .iter()
            .map(|p| p.x.abs().max(p.y.abs()))
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for i in 0..d {
            let (p, q, r) = (vertices[i], vertices[(i + 1) % d], vertices[(i + 2) % d]);
            let (u, v) = (q.sub(p), r.sub(q));
            if u.norm() <= 1e-12 * scale || v.norm() <= 1e-12 * scale {
                return Err(GeometryError::Degenerate((i + 1) % d));
            }
            if u.cross(v).abs() <= 1e-12 * u.norm() * v.norm() {
                return Err(GeometryError::Degenerate((i + 1) % d));
            }
        }
        for i in 0..d {
            for j in (i + 2)..d {
                if i == 0 && j == d - 1 {
                    continue;
                }
                if segments_intersect(vertices[i], vertices[(i + 1) % d], vertices[j], vertices[(j + 1) % d]) {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            }
        }
        let area2: f64 = (0..d).map(|i| vertices[i].cross(vertices[(i + 1) % d])).sum();
        let vertices = if area2 < 0.0 {
            let mut v = Vec::with_capacity(d);
            v.push(vertices[0]);
            v.extend(vertices[1..].iter().rev());
            v
        } else {
            vertices
        };
        let side_lengths: Vec<f64> = (0..d)
            .map(|i| vertices[(i + 1) % d].sub(vertices[i]).norm())
            .collect();
        let directions = (0..d)
            .map(|i| {
                let e = vertices[(i + 1) % d].sub(vertices[i]);
                Point2::new(e.x / side_lengths[i], e.y / side_lengths[i])
            })
            .collect();
        let mut cumulative_arclength = Vec::with_capacity(d + 1);
        let mut acc = 0.0;
        cumulative_arclength.push(0.0);
        for &l in &side_lengths {
            acc += l;
            cumulative_arclength.push(acc);
        }
        Ok(Polygon {
            vertices,
            side_lengths,
            cumulative_arclength,
            perimeter: acc,
            directions,
        })
    }

    /// Regular `d`-gon with unit sides; first side from the origin along +x.
    pub fn regular(d: usize) -> Result<Polygon, GeometryError> {
        if d < 3 {
            return Err(GeometryError::InvalidArity(d));
        }
        let mut p = Point2::new(0.0, 0.0);
        let mut vertices = Vec::with_capacity(d);
        for k in 0..d {
            vertices.push(p);
            let theta = 2.0 * PI * k as f64 / d as f64;
            p = Point2::new(p.x + theta.cos(), p.y + theta.sin());
        }
        Polygon::new(vertices)
    }

    /// Kite with unit symmetry diagonal from `A = (0,0)` to `B = (1,0)` and
    /// half-angles `beta` at `A` and `alpha` at `B`. Vertex order is
    /// `A, C, B, C'` with `C` below the diagonal, so geometric side `k`
    /// carries the kite edge label `[0, 1, 3, 2][k]`.
    pub fn kite(alpha: f64, beta: f64) -> Result<Polygon, GeometryError> {
        if !(beta > 0.0 && beta < PI / 4.0 && alpha > PI / 4.0 && alpha + beta < PI / 2.0) {
            return Err(GeometryError::OutOfFamily { alpha, beta });
        }
        let c = alpha.sin() / (alpha + beta).sin();
        let (cb, sb) = (c * beta.cos(), c * beta.sin());
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(cb, -sb),
            Point2::new(1.0, 0.0),
            Point2::new(cb, sb),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn side_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn side_lengths(&self) -> &[f64] {
        &self.side_lengths
    }

    pub fn cumulative_arclength(&self) -> &[f64] {
        &self.cumulative_arclength
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    /// Unit direction of side `i`.
    pub fn direction(&self, i: usize) -> (f64, f64) {
        let u = self.directions[i];
        (u.x, u.y)
    }

    /// Cosine of the angle between the lines of sides `i` and `j`.
    pub fn side_cos(&self, i: usize, j: usize) -> f64 {
        self.directions[i].dot(self.directions[j])
    }

    pub fn point_at(&self, s: f64) -> Point2 {
        let side = self.side_of(s);
        self.vertices[side].add_scaled(self.directions[side], s - self.cumulative_arclength[side])
    }

    /// Side containing arc length `s` (wrapped into `[0, L)`).
    pub fn side_of(&self, s: f64) -> usize {
        let s = s.rem_euclid(self.perimeter);
        let i = self.cumulative_arclength.partition_point(|&c| c <= s);
        i.saturating_sub(1).min(self.side_count() - 1)
    }

    /// Index of the vertex within `VERTEX_TOL·L` of arc length `s`, if any.
    pub fn vertex_near(&self, s: f64) -> Option<usize> {
        let tol = VERTEX_TOL * self.perimeter;
        let d = self.side_count();
        self.cumulative_arclength
            .iter()
            .position(|&c| (c - s).abs() <= tol)
            .map(|k| k % d)
    }

    pub fn boundary_point(&self, s: f64) -> Result<BoundaryPoint, GeometryError> {
        if !(0.0..self.perimeter).contains(&s) {
            return Err(GeometryError::OffBoundary(s));
        }
        Ok(BoundaryPoint {
            s,
            side: self.side_of(s),
        })
    }

    /// First boundary hit of the inward normal ray from parameter `t` on
    /// side `i`: returns `(side j, arc length along j, distance)`.
    fn first_hit(&self, i: usize, t: f64) -> Option<(usize, f64, f64)> {
        let u = self.directions[i];
        let n = u.perp();
        let p = self.vertices[i].add_scaled(u, t);
        let min_h = SELF_HIT_TOL * self.perimeter;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.side_count() {
            if j == i {
                continue;
            }
            let uj = self.directions[j];
            let denom = u.dot(uj);
            if denom.abs() < 1e-14 {
                continue;
            }
            let a = p.sub(self.vertices[j]);
            let w = a.cross(n) / denom;
            let h = -a.cross(uj) / n.cross(uj);
            let slack = 1e-12 * self.perimeter;
            if h > min_h && w >= -slack && w <= self.side_lengths[j] + slack {
                if best.map_or(true, |(_, _, bh)| h < bh) {
                    best = Some((j, w.clamp(0.0, self.side_lengths[j]), h));
                }
            }
        }
        best
    }

    /// Affine form of the projection from side `i` onto side `j`, in global
    /// arc-length coordinates: `s' = slope·s + intercept`.
    fn projection_affine(&self, i: usize, j: usize) -> (f64, f64) {
        let u = self.directions[i];
        let n = u.perp();
        let denom = u.dot(self.directions[j]);
        let slope = 1.0 / denom;
        let w0 = self.vertices[i].sub(self.vertices[j]).cross(n) / denom;
        let intercept = self.cumulative_arclength[j] + w0 - slope * self.cumulative_arclength[i];
        (slope, intercept)
    }

    /// Exact branches of the slap map as `(from side, to side, branch)`,
    /// without any expansion check.
    fn slap_pieces(&self) -> Result<Vec<(usize, usize, AffineBranch)>, GeometryError> {
        let d = self.side_count();
        let merge_tol = 1e-12 * self.perimeter;
        let mut out = Vec::new();
        for i in 0..d {
            let len = self.side_lengths[i];
            let u = self.directions[i];
            let mut cuts = vec![0.0];
            for (k, v) in self.vertices.iter().enumerate() {
                if k == i || k == (i + 1) % d {
                    continue;
                }
                let t = v.sub(self.vertices[i]).dot(u);
                if t > merge_tol && t < len - merge_tol {
                    cuts.push(t);
                }
            }
            cuts.push(len);
            cuts.sort_by(f64::total_cmp);
            cuts.dedup_by(|a, b| (*a - *b).abs() <= merge_tol);
            let mut pieces: Vec<(usize, f64, f64)> = Vec::new();
            for w in cuts.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                let (j, _, _) = self
                    .first_hit(i, mid)
                    .ok_or(GeometryError::NoHit(self.cumulative_arclength[i] + mid))?;
                match pieces.last_mut() {
                    Some(last) if last.0 == j => last.2 = w[1],
                    _ => pieces.push((j, w[0], w[1])),
                }
            }
            let base = self.cumulative_arclength[i];
            let end = self.cumulative_arclength[i + 1];
            for (j, a, b) in pieces {
                let (slope, intercept) = self.projection_affine(i, j);
                let lo = if a == 0.0 { base } else { base + a };
                let hi = if b == len { end } else { base + b };
                out.push((i, j, AffineBranch::new(lo, hi, slope, intercept)));
            }
        }
        Ok(out)
    }

    /// True when some normal segment from one side meets a parallel side
    /// orthogonally with no boundary crossing in between.
    pub fn has_parallel_facing(&self) -> bool {
        match self.slap_pieces() {
            Ok(pieces) => pieces
                .iter()
                .any(|&(i, j, _)| self.directions[i].cross(self.directions[j]).abs() < PARALLEL_TOL),
            Err(_) => false,
        }
    }
}

/// Slap map of a polygon together with the side pair each branch connects.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlapMap {
    pub map: PiecewiseAffineMap,
    /// `(from side, to side)` per branch.
    pub links: Vec<(usize, usize)>,
}

impl SlapMap {
    /// First branch index connecting side `from` to side `to`.
    pub fn branch_for(&self, from: usize, to: usize) -> Option<usize> {
        self.links.iter().position(|&l| l == (from, to))
    }

    /// Branch indices along a chain of sides `s0 → s1 → … → sk`.
    pub fn branches_along(&self, sides: &[usize]) -> Option<Vec<usize>> {
        sides
            .windows(2)
            .map(|w| self.branch_for(w[0], w[1]))
            .collect()
    }
}

/// Slap image of a boundary point.
pub fn slap_project(poly: &Polygon, p: BoundaryPoint) -> Result<BoundaryPoint, GeometryError> {
    if poly.vertex_near(p.s).is_some() {
        return Err(GeometryError::AtVertex(p.s));
    }
    let side = poly.side_of(p.s);
    let t = p.s - poly.cumulative_arclength[side];
    let (j, w, _) = poly.first_hit(side, t).ok_or(GeometryError::NoHit(p.s))?;
    let s = poly.cumulative_arclength[j] + w;
    if let Some(vertex) = poly.vertex_near(s) {
        return Err(GeometryError::VertexHit { s: p.s, vertex });
    }
    Ok(BoundaryPoint { s, side: j })
}

/// The slap map as an exact piecewise affine map on `[0, L]`.
pub fn extract_slap_map(poly: &Polygon) -> Result<SlapMap, GeometryError> {
    if poly.has_parallel_facing() {
        return Err(GeometryError::NotExpanding);
    }
    let pieces = poly.slap_pieces()?;
    let links = pieces.iter().map(|&(i, j, _)| (i, j)).collect();
    let branches = pieces.into_iter().map(|(_, _, b)| b).collect();
    let map = PiecewiseAffineMap::new(0.0, poly.perimeter(), branches)?;
    Ok(SlapMap { map, links })
}

/// Summary written for polygon reports.
#[derive(Debug, Clone, Serialize)]
pub struct PolygonReport {
    pub vertices: Vec<Point2>,
    pub perimeter: f64,
    pub side_lengths: Vec<f64>,
    pub parallel_facing: bool,
}

impl From<&Polygon> for PolygonReport {
    fn from(p: &Polygon) -> Self {
        PolygonReport {
            vertices: p.vertices.clone(),
            perimeter: p.perimeter,
            side_lengths: p.side_lengths.clone(),
            parallel_facing: p.has_parallel_facing(),
        }
    }
}
