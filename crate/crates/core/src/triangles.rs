//! Triangles: construction from angles, classification, and the invariant
//! splitting of the boundary under the second iterate of the slap map.

use crate::geometry::{extract_slap_map, GeometryError, Point2, Polygon};
use crate::pwamap::PiecewiseAffineMap;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Tolerance on the angle sum and on the right-angle test.
pub const ANGLE_TOL: f64 = 1e-10;
/// Tolerance for image containment and breakpoint landing checks.
pub const MARKOV_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriangleError {
    #[error("angles ({0}, {1}) do not form a triangle")]
    InvalidAngles(f64, f64),
    #[error("not a triangle: {0} vertices")]
    NotATriangle(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TriangleKind {
    Acute,
    Right,
    Obtuse,
}

/// Interior angles at vertices `0, 1, 2` and the index of the longest side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriangleSpec {
    pub angles: [f64; 3],
    pub longest_side_index: usize,
}

impl TriangleSpec {
    pub fn new(angles: [f64; 3]) -> Result<TriangleSpec, TriangleError> {
        let sum: f64 = angles.iter().sum();
        if angles.iter().any(|&a| !(a > 0.0 && a < PI)) || (sum - PI).abs() > ANGLE_TOL {
            return Err(TriangleError::InvalidAngles(angles[0], angles[1]));
        }
        // side i joins vertices i and i+1, opposite vertex i+2
        let largest = (0..3).max_by(|&i, &j| angles[i].total_cmp(&angles[j])).unwrap();
        Ok(TriangleSpec {
            angles,
            longest_side_index: (largest + 1) % 3,
        })
    }

    pub fn from_polygon(poly: &Polygon) -> Result<TriangleSpec, TriangleError> {
        let v = poly.vertices();
        if v.len() != 3 {
            return Err(TriangleError::NotATriangle(v.len()));
        }
        let angle = |i: usize| {
            let (p, a, b) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
            let (ux, uy, wx, wy) = (a.x - p.x, a.y - p.y, b.x - p.x, b.y - p.y);
            (ux * wy - uy * wx).abs().atan2(ux * wx + uy * wy)
        };
        let mut angles = [angle(0), angle(1), angle(2)];
        // absorb roundoff so the sum is exactly representable as π
        let excess = angles.iter().sum::<f64>() - PI;
        angles[2] -= excess;
        TriangleSpec::new(angles)
    }

    pub fn largest_angle(&self) -> f64 {
        self.angles.iter().copied().fold(0.0, f64::max)
    }
}

/// Triangle with angles `a1`, `a2` and `π − a1 − a2`. The largest angle sits
/// at the apex, opposite side 0, which runs from the origin to `(scale, 0)`.
/// The two remaining angles keep their input order at the base vertices.
pub fn triangle_from_angles(a1: f64, a2: f64, scale: f64) -> Result<Polygon, TriangleError> {
    let a3 = PI - a1 - a2;
    if !(a1 > 0.0 && a2 > 0.0 && a3 > 0.0) || !(scale > 0.0 && scale.is_finite()) {
        return Err(TriangleError::InvalidAngles(a1, a2));
    }
    let mut angles = [a1, a2, a3];
    let apex = (0..3).max_by(|&i, &j| angles[i].total_cmp(&angles[j])).unwrap();
    let apex_angle = angles[apex];
    angles.copy_within(apex + 1.., apex);
    let (at_origin, at_end) = (angles[0], angles[1]);
    let left = scale * at_end.sin() / apex_angle.sin();
    Ok(Polygon::new(vec![
        Point2::new(0.0, 0.0),
        Point2::new(scale, 0.0),
        Point2::new(left * at_origin.cos(), left * at_origin.sin()),
    ])?)
}

pub fn classify(t: &TriangleSpec) -> TriangleKind {
    let g = t.largest_angle();
    if (g - FRAC_PI_2).abs() <= ANGLE_TOL {
        TriangleKind::Right
    } else if g < FRAC_PI_2 {
        TriangleKind::Acute
    } else {
        TriangleKind::Obtuse
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixingParity {
    /// Exactly one mixing component.
    Mixing,
    /// Exactly two mixing components.
    ExactlyTwo,
    /// An even number of mixing components.
    Even,
}

impl MixingParity {
    pub fn admits(self, period: usize) -> bool {
        match self {
            MixingParity::Mixing => period == 1,
            MixingParity::ExactlyTwo => period == 2,
            MixingParity::Even => period >= 2 && period % 2 == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TrianglePrediction {
    pub ergodic_count: usize,
    pub mixing: MixingParity,
}

pub fn predict_triangle(t: &TriangleSpec) -> TrianglePrediction {
    let mixing = match classify(t) {
        TriangleKind::Acute => MixingParity::Mixing,
        TriangleKind::Right => MixingParity::ExactlyTwo,
        TriangleKind::Obtuse => MixingParity::Even,
    };
    TrianglePrediction {
        ergodic_count: 1,
        mixing,
    }
}

/// Checks that the longest side and the union of the two others are each
/// mapped into themselves by the second iterate of the slap map, using the
/// exact branch images of the composed map.
pub fn check_second_iterate_invariance(poly: &Polygon) -> Result<bool, TriangleError> {
    let spec = TriangleSpec::from_polygon(poly)?;
    let f2 = extract_slap_map(poly)?.map.power(2).map_err(GeometryError::from)?;
    let cum = poly.cumulative_arclength();
    let k = spec.longest_side_index;
    let (a, b) = (cum[k], cum[k + 1]);
    let tol = MARKOV_TOL * poly.perimeter();
    let in_longest = |x: f64| x >= a - tol && x <= b + tol;
    Ok(f2.branches().iter().all(|br| {
        let (lo, hi) = br.image();
        let mid = 0.5 * (br.lo + br.hi);
        if in_longest(mid) {
            in_longest(lo) && in_longest(hi)
        } else {
            // the complement of side k is a circular arc; its pieces avoid (a, b)
            hi <= a + tol || lo >= b - tol
        }
    }))
}

/// Whether every one-sided image of every breakpoint is again a breakpoint
/// (or a domain endpoint) within [`MARKOV_TOL`] times the domain length.
pub fn is_markov(f: &PiecewiseAffineMap) -> bool {
    let (lo, hi) = f.domain();
    let tol = MARKOV_TOL * f.len();
    let mut targets: Vec<f64> = f.breakpoints();
    targets.push(lo);
    targets.push(hi);
    f.branches().iter().all(|b| {
        [b.apply(b.lo), b.apply(b.hi)]
            .iter()
            .all(|&y| targets.iter().any(|&t| (t - y).abs() <= tol))
    })
}
