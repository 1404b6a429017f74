//! Piecewise affine interval maps.
//!
//! A [`PiecewiseAffineMap`] is an ordered list of affine branches tiling a
//! closed interval. Values at breakpoints are never defined on their own:
//! every query carries a [`Side`] and returns the one-sided limit from that
//! side. Comparisons against breakpoints use an absolute tolerance of
//! [`REL_TOL`] times the domain length.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use thiserror::Error;

/// Relative tolerance (scaled by the domain length) for breakpoint tests.
pub const REL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("point {x} is outside the domain [{lo}, {hi}] (or the requested side leaves it)")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("invalid branch layout: {0}")]
    InvalidBranches(String),
    #[error("composition along the itinerary has an empty domain at step {step}")]
    EmptyDomain { step: usize },
    #[error("interval [{lo}, {hi}] is not mapped into itself")]
    NotInvariant { lo: f64, hi: f64 },
    #[error("branch index {0} does not exist")]
    NoSuchBranch(usize),
    #[error("map is not expanding (minimum |slope| = {0})")]
    NotExpanding(f64),
}

/// Direction from which a one-sided limit is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    /// Side on which the image lies after a branch of the given slope.
    pub fn after_slope(self, slope: f64) -> Side {
        if slope < 0.0 {
            self.flip()
        } else {
            self
        }
    }
}

/// One-sided limit value together with the side from which it is approached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideLimit {
    pub value: f64,
    pub side: Side,
}

/// `x ↦ slope·x + intercept` on `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineBranch {
    pub lo: f64,
    pub hi: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl AffineBranch {
    pub fn new(lo: f64, hi: f64, slope: f64, intercept: f64) -> Self {
        AffineBranch {
            lo,
            hi,
            slope,
            intercept,
        }
    }

    /// Branch on `[lo, hi]` taking the values `y_lo` and `y_hi` at its ends.
    pub fn through(lo: f64, hi: f64, y_lo: f64, y_hi: f64) -> Self {
        let slope = (y_hi - y_lo) / (hi - lo);
        AffineBranch::new(lo, hi, slope, y_lo - slope * lo)
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }

    #[inline]
    pub fn invert(&self, y: f64) -> f64 {
        (y - self.intercept) / self.slope
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Image interval, ordered.
    pub fn image(&self) -> (f64, f64) {
        let a = self.apply(self.lo);
        let b = self.apply(self.hi);
        if a <= b {
            (a, b)
        } else {
            (b, a)
        }
    }

    /// `next ∘ self`, restricted to the largest subinterval of this branch
    /// whose image lies in the domain of `next`. Returns `None` when that
    /// subinterval is empty (beyond `tol`); a single point is kept.
    pub fn then(&self, next: &AffineBranch, tol: f64) -> Option<AffineBranch> {
        let (ya, yb) = self.image();
        let lo_y = ya.max(next.lo);
        let hi_y = yb.min(next.hi);
        if hi_y < lo_y - tol {
            return None;
        }
        let (lo_y, hi_y) = if hi_y < lo_y {
            let mid = 0.5 * (lo_y + hi_y);
            (mid, mid)
        } else {
            (lo_y, hi_y)
        };
        let (mut lo, mut hi) = if self.slope > 0.0 {
            (self.invert(lo_y), self.invert(hi_y))
        } else {
            (self.invert(hi_y), self.invert(lo_y))
        };
        lo = lo.clamp(self.lo, self.hi);
        hi = hi.clamp(self.lo, self.hi);
        Some(AffineBranch {
            lo,
            hi: hi.max(lo),
            slope: next.slope * self.slope,
            intercept: next.slope * self.intercept + next.intercept,
        })
    }
}

/// A point of an orbit, with the branch used to leave it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitPoint {
    pub x: f64,
    pub side: Side,
    pub branch: usize,
}

/// Orbit of a one-sided point. `breakpoint_hits` lists the steps at which an
/// iterate landed on an interior breakpoint; the orbit continues through
/// them using the propagated side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orbit {
    pub points: Vec<OrbitPoint>,
    pub breakpoint_hits: Vec<usize>,
}

impl Orbit {
    pub fn itinerary(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.branch).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MapRecord {
    domain: [f64; 2],
    branches: Vec<AffineBranch>,
}

/// Piecewise affine self-map of a closed interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRecord", into = "MapRecord")]
pub struct PiecewiseAffineMap {
    lo: f64,
    hi: f64,
    branches: Vec<AffineBranch>,
    min_expansion: f64,
}

impl From<PiecewiseAffineMap> for MapRecord {
    fn from(f: PiecewiseAffineMap) -> Self {
        MapRecord {
            domain: [f.lo, f.hi],
            branches: f.branches,
        }
    }
}

impl TryFrom<MapRecord> for PiecewiseAffineMap {
    type Error = MapError;

    fn try_from(r: MapRecord) -> Result<Self, MapError> {
        PiecewiseAffineMap::new(r.domain[0], r.domain[1], r.branches)
    }
}

impl PiecewiseAffineMap {
    /// Builds a map from branches tiling `[lo, hi]`. Neighbouring endpoints
    /// that agree within tolerance are snapped together.
    pub fn new(lo: f64, hi: f64, mut branches: Vec<AffineBranch>) -> Result<Self, MapError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MapError::InvalidBranches(format!("bad domain [{lo}, {hi}]")));
        }
        if branches.is_empty() {
            return Err(MapError::InvalidBranches("no branches".into()));
        }
        let tol = REL_TOL * (hi - lo);
        if (branches[0].lo - lo).abs() > tol {
            return Err(MapError::InvalidBranches(format!(
                "first branch starts at {} instead of {lo}",
                branches[0].lo
            )));
        }
        branches[0].lo = lo;
        let last = branches.len() - 1;
        if (branches[last].hi - hi).abs() > tol {
            return Err(MapError::InvalidBranches(format!(
                "last branch ends at {} instead of {hi}",
                branches[last].hi
            )));
        }
        branches[last].hi = hi;
        for i in 1..branches.len() {
            let prev_hi = branches[i - 1].hi;
            if (branches[i].lo - prev_hi).abs() > tol {
                return Err(MapError::InvalidBranches(format!(
                    "gap or overlap between branches {} and {i} ({prev_hi} vs {})",
                    i - 1,
                    branches[i].lo
                )));
            }
            branches[i].lo = prev_hi;
        }
        for (i, b) in branches.iter().enumerate() {
            if !(b.lo < b.hi) || !b.slope.is_finite() || !b.intercept.is_finite() {
                return Err(MapError::InvalidBranches(format!("degenerate branch {i}: {b:?}")));
            }
            let (ya, yb) = b.image();
            if ya < lo - tol || yb > hi + tol {
                return Err(MapError::InvalidBranches(format!(
                    "branch {i} image [{ya}, {yb}] leaves [{lo}, {hi}]"
                )));
            }
        }
        let min_expansion = branches
            .iter()
            .map(|b| b.slope.abs())
            .fold(f64::INFINITY, f64::min);
        Ok(PiecewiseAffineMap {
            lo,
            hi,
            branches,
            min_expansion,
        })
    }

    /// `x ↦ slope·(x − shift) (mod 1)` on `[0, 1]`, with the wrap resolved
    /// into explicit branches.
    pub fn mod_one(slope: f64, shift: f64) -> Result<Self, MapError> {
        let y = |x: f64| slope * (x - shift);
        let (ya, yb) = (y(0.0), y(1.0));
        let (ymin, ymax) = if ya <= yb { (ya, yb) } else { (yb, ya) };
        let mut cuts = vec![0.0];
        let mut k = ymin.floor() + 1.0;
        while k < ymax {
            cuts.push(shift + k / slope);
            k += 1.0;
        }
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        let branches = cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let n = y(0.5 * (w[0] + w[1])).floor();
                AffineBranch::new(w[0], w[1], slope, -slope * shift - n)
            })
            .collect();
        PiecewiseAffineMap::new(0.0, 1.0, branches)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn tol(&self) -> f64 {
        REL_TOL * self.len()
    }

    pub fn branches(&self) -> &[AffineBranch] {
        &self.branches
    }

    pub fn branch(&self, i: usize) -> Result<&AffineBranch, MapError> {
        self.branches.get(i).ok_or(MapError::NoSuchBranch(i))
    }

    pub fn min_expansion(&self) -> f64 {
        self.min_expansion
    }

    pub fn is_expanding(&self) -> bool {
        self.min_expansion > 1.0 + REL_TOL
    }

    /// Interior branch endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.branches[1..].iter().map(|b| b.lo).collect()
    }

    pub fn is_breakpoint(&self, x: f64) -> bool {
        let tol = self.tol();
        self.branches[1..].iter().any(|b| (b.lo - x).abs() <= tol)
    }

    /// Index of the branch that governs the limit at `x` from `side`.
    pub fn locate(&self, x: f64, side: Side) -> Result<usize, MapError> {
        let tol = self.tol();
        let out = MapError::OutOfDomain {
            x,
            lo: self.lo,
            hi: self.hi,
        };
        if !x.is_finite() || x < self.lo - tol || x > self.hi + tol {
            return Err(out);
        }
        if (side == Side::Left && x <= self.lo + tol) || (side == Side::Right && x >= self.hi - tol) {
            return Err(out);
        }
        let last = self.branches.len() - 1;
        let mut i = self
            .branches
            .partition_point(|b| b.lo <= x)
            .saturating_sub(1)
            .min(last);
        match side {
            Side::Left => {
                if i > 0 && x - self.branches[i].lo <= tol {
                    i -= 1;
                }
            }
            Side::Right => {
                if i < last && self.branches[i].hi - x <= tol {
                    i += 1;
                }
            }
        }
        Ok(i)
    }

    /// One-sided limit of the map at `x`.
    pub fn eval(&self, x: f64, side: Side) -> Result<f64, MapError> {
        let i = self.locate(x, side)?;
        Ok(self.branches[i].apply(x))
    }

    /// One-sided limit together with the side from which the image is approached.
    pub fn eval_limit(&self, x: f64, side: Side) -> Result<SideLimit, MapError> {
        let i = self.locate(x, side)?;
        let b = &self.branches[i];
        Ok(SideLimit {
            value: b.apply(x).clamp(self.lo, self.hi),
            side: side.after_slope(b.slope),
        })
    }

    /// `n` steps of the orbit of `x` approached from `side`.
    pub fn iterate(&self, x: f64, side: Side, n: usize) -> Result<Orbit, MapError> {
        let mut points = Vec::with_capacity(n + 1);
        let mut hits = Vec::new();
        let (mut x, mut side) = (x, side);
        for step in 0..=n {
            let branch = self.locate(x, side)?;
            if self.is_breakpoint(x) {
                hits.push(step);
            }
            points.push(OrbitPoint { x, side, branch });
            if step < n {
                let b = &self.branches[branch];
                x = b.apply(x).clamp(self.lo, self.hi);
                side = side.after_slope(b.slope);
            }
        }
        Ok(Orbit {
            points,
            breakpoint_hits: hits,
        })
    }

    /// Composition of the branches along `itinerary` (first index applied first).
    pub fn compose_along(&self, itinerary: &[usize]) -> Result<AffineBranch, MapError> {
        let tol = self.tol();
        let (&first, rest) = itinerary
            .split_first()
            .ok_or_else(|| MapError::InvalidBranches("empty itinerary".into()))?;
        let mut acc = *self.branch(first)?;
        for (step, &i) in rest.iter().enumerate() {
            let next = self.branch(i)?;
            acc = acc
                .then(next, tol)
                .ok_or(MapError::EmptyDomain { step: step + 1 })?;
        }
        Ok(acc)
    }

    /// `outer ∘ self` as a new map on the same domain.
    pub fn then(&self, outer: &PiecewiseAffineMap) -> Result<PiecewiseAffineMap, MapError> {
        let tol = self.tol();
        let mut pieces = Vec::new();
        for b in &self.branches {
            for o in &outer.branches {
                if let Some(c) = b.then(o, 0.0) {
                    if c.width() > tol {
                        pieces.push(c);
                    }
                }
            }
        }
        pieces.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        PiecewiseAffineMap::new(self.lo, self.hi, pieces)
    }

    /// `n`-fold iterate of the map.
    pub fn power(&self, n: usize) -> Result<PiecewiseAffineMap, MapError> {
        assert!(n >= 1, "power needs n >= 1");
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.then(self)?;
        }
        Ok(acc)
    }

    /// Restricts the map to `[lo, hi]` (which it must map into itself) and
    /// rescales affinely onto `[0, 1]`.
    pub fn restrict_and_rescale(&self, lo: f64, hi: f64) -> Result<PiecewiseAffineMap, MapError> {
        let tol = self.tol();
        if !(lo < hi) || lo < self.lo - tol || hi > self.hi + tol {
            return Err(MapError::NotInvariant { lo, hi });
        }
        let w = hi - lo;
        let mut pieces = Vec::new();
        for b in &self.branches {
            let a = b.lo.max(lo);
            let z = b.hi.min(hi);
            if z - a <= tol {
                continue;
            }
            let (ya, yz) = (b.apply(a), b.apply(z));
            if ya.min(yz) < lo - tol || ya.max(yz) > hi + tol {
                return Err(MapError::NotInvariant { lo, hi });
            }
            pieces.push(AffineBranch::new(
                (a - lo) / w,
                (z - lo) / w,
                b.slope,
                (b.slope * lo + b.intercept - lo) / w,
            ));
        }
        PiecewiseAffineMap::new(0.0, 1.0, pieces)
    }

    /// Discontinuities: interior breakpoints whose one-sided limits differ.
    pub fn discontinuities(&self) -> Vec<(f64, f64, f64)> {
        let tol = self.tol();
        self.branches
            .windows(2)
            .filter_map(|w| {
                let c = w[1].lo;
                let (l, r) = (w[0].apply(c), w[1].apply(c));
                ((l - r).abs() > tol).then_some((c, l, r))
            })
            .collect()
    }

    /// Lorenz map test: domain `[0, 1]`, increasing branches, and a single
    /// interior discontinuity `c` with `f(c⁻) = 1`, `f(c⁺) = 0`.
    pub fn is_lorenz(&self) -> bool {
        let tol = 1e-10;
        if self.lo.abs() > tol || (self.hi - 1.0).abs() > tol {
            return false;
        }
        if self.branches.iter().any(|b| b.slope <= 0.0) {
            return false;
        }
        match self.discontinuities().as_slice() {
            [(c, l, r)] => *c > tol && *c < 1.0 - tol && (l - 1.0).abs() <= tol && r.abs() <= tol,
            _ => false,
        }
    }

    /// Image of `[lo, hi]` as the list of branch images of its pieces.
    pub fn image_of_interval(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let tol = self.tol();
        self.branches
            .iter()
            .filter_map(|b| {
                let a = b.lo.max(lo);
                let z = b.hi.min(hi);
                if z - a <= tol {
                    return None;
                }
                let (ya, yz) = (b.apply(a), b.apply(z));
                Some((ya.min(yz), ya.max(yz)))
            })
            .collect()
    }

    /// Graph samples as CSV with columns `x,f_left,f_right`. One-sided values
    /// that do not exist (at the domain ends) are left empty.
    pub fn graph_csv(&self, samples: usize) -> String {
        let samples = samples.max(1);
        let mut xs: Vec<f64> = (0..=samples)
            .map(|k| self.lo + self.len() * k as f64 / samples as f64)
            .collect();
        xs.extend(self.breakpoints());
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= self.tol());
        let mut out = String::from("x,f_left,f_right\n");
        for x in xs {
            let cell = |side| {
                self.eval(x, side)
                    .map(|v| format!("{v}"))
                    .unwrap_or_default()
            };
            let _ = writeln!(out, "{x},{},{}", cell(Side::Left), cell(Side::Right));
        }
        out
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("map serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn phi3() -> PiecewiseAffineMap {
        PiecewiseAffineMap::mod_one(-2.0, 0.5).unwrap()
    }

    #[test]
    fn eval_interior_and_one_sided() {
        let f = phi3();
        assert_eq!(f.branches().len(), 2);
        assert!((f.eval(0.25, Side::Left).unwrap() - 0.5).abs() < 1e-15);
        assert!((f.eval(0.25, Side::Right).unwrap() - 0.5).abs() < 1e-15);
        assert!(f.eval(0.5, Side::Left).unwrap().abs() < 1e-15);
        assert!((f.eval(0.5, Side::Right).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eval_outside_domain() {
        let f = phi3();
        assert!(matches!(f.eval(1.5, Side::Left), Err(MapError::OutOfDomain { .. })));
        assert!(matches!(f.eval(0.0, Side::Left), Err(MapError::OutOfDomain { .. })));
        assert!(matches!(f.eval(1.0, Side::Right), Err(MapError::OutOfDomain { .. })));
        assert!(f.eval(0.0, Side::Right).is_ok());
    }

    #[test]
    fn doubling_type_iterate() {
        let f = PiecewiseAffineMap::mod_one(2.0, 0.5).unwrap();
        let orbit = f.iterate(0.75, Side::Right, 1).unwrap();
        assert!((orbit.points[1].x - 0.5).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_orbit_is_constant() {
        // branch x ↦ 3x − 1 on [0.25, 0.75] has fixed point 0.5
        let f = PiecewiseAffineMap::new(
            0.0,
            1.0,
            vec![
                AffineBranch::new(0.0, 0.25, 3.0, 0.25),
                AffineBranch::new(0.25, 0.75, 2.0, -0.5),
                AffineBranch::new(0.75, 1.0, 3.0, -2.0),
            ],
        )
        .unwrap();
        let orbit = f.iterate(0.5, Side::Right, 3).unwrap();
        assert_eq!(orbit.points.len(), 4);
        assert!(orbit.values().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn side_flips_on_decreasing_branch() {
        let f = phi3();
        let orbit = f.iterate(0.5, Side::Left, 1).unwrap();
        assert_eq!(orbit.points[1].side, Side::Right);
        assert_eq!(orbit.breakpoint_hits, vec![0]);
    }

    #[test]
    fn compose_slope_two_twice() {
        let f = PiecewiseAffineMap::new(
            0.0,
            1.0,
            vec![
                AffineBranch::new(0.0, 0.5, 2.0, 0.0),
                AffineBranch::new(0.5, 1.0, 2.0, -1.0),
            ],
        )
        .unwrap();
        let c = f.compose_along(&[0, 0]).unwrap();
        assert_eq!(c.slope, 4.0);
        assert_eq!((c.lo, c.hi), (0.0, 0.25));
    }

    #[test]
    fn compose_empty_domain() {
        // branch 0 maps [0, 0.5] onto [0.6, 1.0], which misses branch 0
        let f = PiecewiseAffineMap::new(
            0.0,
            1.0,
            vec![
                AffineBranch::through(0.0, 0.5, 0.6, 1.0),
                AffineBranch::through(0.5, 1.0, 0.0, 0.6),
            ],
        )
        .unwrap();
        assert_eq!(f.compose_along(&[0, 0]), Err(MapError::EmptyDomain { step: 1 }));
    }

    #[test]
    fn restrict_full_domain_is_identity_rescale() {
        let f = phi3();
        assert_eq!(f.restrict_and_rescale(0.0, 1.0).unwrap(), f);
    }

    #[test]
    fn restrict_not_invariant() {
        let f = phi3();
        assert!(matches!(
            f.restrict_and_rescale(0.2, 0.4),
            Err(MapError::NotInvariant { .. })
        ));
    }

    #[test]
    fn lorenz_recognition() {
        let fa = PiecewiseAffineMap::mod_one(1.5, 0.5).unwrap();
        assert!(fa.is_lorenz());
        assert!(!phi3().is_lorenz());
        let id = PiecewiseAffineMap::new(0.0, 1.0, vec![AffineBranch::new(0.0, 1.0, 1.0, 0.0)]).unwrap();
        assert!(!id.is_lorenz());
    }

    #[test]
    fn invalid_tiling_rejected() {
        let r = PiecewiseAffineMap::new(
            0.0,
            1.0,
            vec![
                AffineBranch::new(0.0, 0.4, 1.0, 0.0),
                AffineBranch::new(0.5, 1.0, 1.0, 0.0),
            ],
        );
        assert!(matches!(r, Err(MapError::InvalidBranches(_))));
    }

    #[test]
    fn json_shape() {
        let f = phi3();
        let v: serde_json::Value = serde_json::to_value(&f).unwrap();
        assert_eq!(v["domain"], serde_json::json!([0.0, 1.0]));
        assert_eq!(v["branches"].as_array().unwrap().len(), 2);
        assert!(v["branches"][0]["slope"].is_number());
        let back: PiecewiseAffineMap = serde_json::from_value(v).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn graph_csv_has_both_limits_at_jump() {
        let csv = phi3().graph_csv(4);
        assert!(csv.starts_with("x,f_left,f_right\n"));
        assert!(csv.lines().any(|l| l == "0.5,0,1"));
        assert!(csv.lines().nth(1).unwrap().starts_with("0,,"));
    }

    fn expanding_map() -> impl Strategy<Value = PiecewiseAffineMap> {
        (1.05f64..3.0, prop::bool::ANY, 0.0f64..1.0).prop_map(|(a, neg, shift)| {
            PiecewiseAffineMap::mod_one(if neg { -a } else { a }, shift).unwrap()
        })
    }

    proptest! {
        #[test]
        fn sides_agree_off_breakpoints(f in expanding_map(), x in 0.001f64..0.999) {
            prop_assume!(!f.breakpoints().iter().any(|b| (b - x).abs() < 1e-6));
            let l = f.eval(x, Side::Left).unwrap();
            let r = f.eval(x, Side::Right).unwrap();
            prop_assert!((l - r).abs() < 1e-12);
        }

        #[test]
        fn compose_matches_iterate(f in expanding_map(), x in 0.001f64..0.999, n in 1usize..6) {
            let orbit = f.iterate(x, Side::Right, n).unwrap();
            prop_assume!(orbit.breakpoint_hits.is_empty());
            let itin: Vec<usize> = orbit.points[..n].iter().map(|p| p.branch).collect();
            let c = f.compose_along(&itin).unwrap();
            let direct = orbit.points[n].x;
            prop_assert!((c.apply(x) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }

        #[test]
        fn expansion_lower_bound(f in expanding_map(), x in 0.001f64..0.999, n in 1usize..5) {
            let orbit = f.iterate(x, Side::Right, n).unwrap();
            let itin: Vec<usize> = orbit.points[..n].iter().map(|p| p.branch).collect();
            let c = f.compose_along(&itin).unwrap();
            let y = 0.5 * (c.lo + c.hi);
            prop_assume!(c.width() > 1e-9);
            let fy = c.apply(y);
            let gap = (c.apply(x) - fy).abs();
            let bound = f.min_expansion().powi(n as i32) * (x - y).abs();
            prop_assert!(gap >= bound * (1.0 - 1e-9));
        }
    }
}
