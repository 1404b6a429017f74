//! Convex `3n`-gons with `n` ergodic components, built by intersecting `n`
//! rotated copies of one flat obtuse isosceles triangle.
//!
//! Each copy keeps a neighbourhood of its apex and of its base midpoint on
//! the boundary of the intersection. The local attractor of a lone obtuse
//! triangle lives there, so every copy contributes its own component. The
//! construction is only accepted after the Ulam analysis confirms it.

use crate::ergodic::{analyze_with, ErgodicError, ErgodicReport, UlamConfig};
use crate::geometry::{extract_slap_map, GeometryError, Point2, Polygon, VERTEX_TOL};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NonergodicError {
    #[error("need at least one triangle")]
    ZeroCount,
    #[error("need at least two components, got {0}")]
    TooFew(usize),
    #[error("apex angle {0} is not obtuse")]
    NotObtuse(f64),
    #[error("pivot {0} must lie strictly inside (0, 1)")]
    BadPivot(f64),
    #[error("no apex angle in the schedule produced {n} components ({attempts} tried)")]
    ConstructionFailed { n: usize, attempts: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ergodic(#[from] ErgodicError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonergodicConfig {
    /// Apex angles tried in order until one passes verification.
    pub apex_schedule: Vec<f64>,
    /// Rotation centre as a fraction of the altitude, measured from the base.
    pub pivot: f64,
    /// Uniform Ulam bins per unit of perimeter.
    pub bins_per_length: f64,
    pub ulam: UlamConfig,
}

impl Default for NonergodicConfig {
    fn default() -> Self {
        NonergodicConfig {
            apex_schedule: vec![2.2, 2.5, 2.6, 2.7, 2.75, 2.8, 2.85, 2.9, 2.95],
            pivot: 0.5,
            bins_per_length: 3000.0,
            ulam: UlamConfig::default(),
        }
    }
}

/// Why a single apex angle was rejected, or `Accepted`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum AttemptOutcome {
    Accepted,
    WrongVertexCount { vertices: usize },
    NotConvex,
    ParallelFacing,
    WrongComponentCount { components: usize },
    OddPeriod { periods: Vec<usize> },
    Unstable,
    Failed { error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub apex: f64,
    #[serde(flatten)]
    pub outcome: AttemptOutcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct NonergodicPolygon {
    pub n: usize,
    pub apex: f64,
    pub pivot: f64,
    pub polygon: Polygon,
    pub report: ErgodicReport,
    pub attempts: Vec<Attempt>,
}

/// The triangle with apex angle `apex` and unit legs, base on `y = -pivot·h`
/// and apex at `(0, (1 − pivot)·h)` where `h` is the altitude.
pub fn base_triangle(apex: f64, pivot: f64) -> [Point2; 3] {
    let (half, h) = ((apex / 2.0).sin(), (apex / 2.0).cos());
    [
        Point2::new(-half, -pivot * h),
        Point2::new(half, -pivot * h),
        Point2::new(0.0, (1.0 - pivot) * h),
    ]
}

fn rotate(p: Point2, t: f64) -> Point2 {
    let (s, c) = t.sin_cos();
    Point2::new(c * p.x - s * p.y, s * p.x + c * p.y)
}

/// Part of a convex counterclockwise polygon left of the line `a → b`.
fn clip_left(poly: &[Point2], a: Point2, b: Point2) -> Vec<Point2> {
    let side = |p: Point2| b.sub(a).cross(p.sub(a));
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (sp, sq) = (side(p), side(q));
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(Point2::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)));
        }
    }
    out
}

/// Intersection of the base triangle rotated by `πk/n`, `k = 0..n`.
pub fn triangle_intersection(n: usize, apex: f64, pivot: f64) -> Result<Polygon, NonergodicError> {
    if n == 0 {
        return Err(NonergodicError::ZeroCount);
    }
    if !(apex > PI / 2.0 && apex < PI) {
        return Err(NonergodicError::NotObtuse(apex));
    }
    if !(pivot > 0.0 && pivot < 1.0) {
        return Err(NonergodicError::BadPivot(pivot));
    }
    let tri = base_triangle(apex, pivot);
    let mut poly = tri.to_vec();
    for k in 1..n {
        let t = PI * k as f64 / n as f64;
        let r: Vec<Point2> = tri.iter().map(|&p| rotate(p, t)).collect();
        for i in 0..3 {
            poly = clip_left(&poly, r[i], r[(i + 1) % 3]);
        }
    }
    let mut out: Vec<Point2> = Vec::with_capacity(poly.len());
    for p in poly {
        if out.last().map_or(true, |l: &Point2| l.sub(p).norm() > VERTEX_TOL) {
            out.push(p);
        }
    }
    while out.len() > 1 && out[0].sub(out[out.len() - 1]).norm() <= VERTEX_TOL {
        out.pop();
    }
    Ok(Polygon::new(out)?)
}

pub fn is_convex(poly: &Polygon) -> bool {
    let v = poly.vertices();
    let d = v.len();
    (0..d).all(|i| {
        let (p, q, r) = (v[i], v[(i + 1) % d], v[(i + 2) % d]);
        q.sub(p).cross(r.sub(q)) > 0.0
    })
}

fn attempt(n: usize, apex: f64, cfg: &NonergodicConfig) -> (AttemptOutcome, Option<(Polygon, ErgodicReport)>) {
    let poly = match triangle_intersection(n, apex, cfg.pivot) {
        Ok(p) => p,
        Err(e) => return (AttemptOutcome::Failed { error: e.to_string() }, None),
    };
    if poly.side_count() != 3 * n {
        return (AttemptOutcome::WrongVertexCount { vertices: poly.side_count() }, None);
    }
    if !is_convex(&poly) {
        return (AttemptOutcome::NotConvex, None);
    }
    if poly.has_parallel_facing() {
        return (AttemptOutcome::ParallelFacing, None);
    }
    let report = match extract_slap_map(&poly)
        .map_err(NonergodicError::from)
        .and_then(|s| {
            let bins = (cfg.bins_per_length * poly.perimeter()).round().max(10.0) as usize;
            Ok(analyze_with(&s.map, bins, &cfg.ulam)?)
        }) {
        Ok(r) => r,
        Err(e) => return (AttemptOutcome::Failed { error: e.to_string() }, None),
    };
    let outcome = verdict(n, &report);
    (outcome, Some((poly, report)))
}

/// Checks a report against the target: `n` classes, all of even period,
/// unchanged under bin doubling.
pub fn verdict(n: usize, report: &ErgodicReport) -> AttemptOutcome {
    let periods = report.periods();
    if periods.len() != n {
        AttemptOutcome::WrongComponentCount { components: periods.len() }
    } else if periods.iter().any(|p| p % 2 != 0) {
        AttemptOutcome::OddPeriod { periods }
    } else if report.refinement.as_ref().map_or(true, |r| !r.stable) {
        AttemptOutcome::Unstable
    } else {
        AttemptOutcome::Accepted
    }
}

/// Walks the apex schedule and returns the first verified polygon.
pub fn construct(n: usize, cfg: &NonergodicConfig) -> Result<NonergodicPolygon, NonergodicError> {
    if n < 2 {
        return Err(NonergodicError::TooFew(n));
    }
    if !(cfg.pivot > 0.0 && cfg.pivot < 1.0) {
        return Err(NonergodicError::BadPivot(cfg.pivot));
    }
    let mut attempts = Vec::new();
    for &apex in &cfg.apex_schedule {
        let (outcome, found) = attempt(n, apex, cfg);
        let accepted = outcome == AttemptOutcome::Accepted;
        attempts.push(Attempt { apex, outcome });
        if let (true, Some((polygon, report))) = (accepted, found) {
            return Ok(NonergodicPolygon {
                n,
                apex,
                pivot: cfg.pivot,
                polygon,
                report,
                attempts,
            });
        }
    }
    Err(NonergodicError::ConstructionFailed {
        n,
        attempts: attempts.len(),
    })
}
