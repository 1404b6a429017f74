//! Kites with a unit symmetry diagonal: the mirror-reduced slap map, the
//! doubling orbit of type `(4, 2)` starting at the vertex `C`, and the
//! bifurcation that splits off ergodic components near that orbit and its
//! mirror image.
//!
//! Kite edge labels follow the usual convention: edges `0` (`A→C`) and `1`
//! (`C→B`) carry the reduced coordinate `[0, ℓ]`, and mirror edges share
//! parity. The polygon built by [`Polygon::kite`] lists its sides as
//! `A→C, C→B, B→C', C'→A`, so geometric side `k` has label
//! `KITE_LABELS[k]`.

use crate::ergodic::{analyze_with, ErgodicError, ErgodicReport, UlamConfig};
use crate::geometry::{extract_slap_map, GeometryError, Polygon, SlapMap};
use crate::pwamap::{AffineBranch, MapError, PiecewiseAffineMap, Side};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use thiserror::Error;

/// Kite label of geometric side `k`. The permutation is an involution.
pub const KITE_LABELS: [usize; 4] = [0, 1, 3, 2];

/// Approximate root of the doubling-orbit equations.
pub const DEFAULT_GUESS: (f64, f64) = (1.0, 0.5);

/// Coincidence tolerance for orbit verification.
pub const ORBIT_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KiteError {
    #[error("kite angles (alpha={alpha}, beta={beta}) violate 0 < beta < pi/4 < alpha, alpha + beta < pi/2")]
    OutOfFamily { alpha: f64, beta: f64 },
    #[error("{x} is outside the {domain} of branch {branch}")]
    OutOfBranch {
        branch: KiteBranch,
        x: f64,
        domain: &'static str,
    },
    #[error("composition domain inequality {index} fails")]
    OutOfPiDomain { index: usize },
    #[error("Newton iteration did not converge after {iterations} steps (|Pi| = {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Jacobian is singular (det = {0:e})")]
    SingularJacobian(f64),
    #[error("doubling orbit check failed: {0}")]
    OrbitMismatch(String),
    #[error("no sign quadrant at radius {epsilon} gave two localized components")]
    NoBifurcationFound {
        epsilon: f64,
        quadrants: Vec<QuadrantOutcome>,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Ergodic(#[from] ErgodicError),
    #[error(transparent)]
    Map(#[from] MapError),
}

pub type Result<T> = std::result::Result<T, KiteError>;

fn check_family(alpha: f64, beta: f64) -> Result<()> {
    if beta > 0.0 && beta < FRAC_PI_4 && alpha > FRAC_PI_4 && alpha + beta < FRAC_PI_2 {
        Ok(())
    } else {
        Err(KiteError::OutOfFamily { alpha, beta })
    }
}

/// Lengths along the reduced coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KiteConstants {
    pub alpha: f64,
    pub beta: f64,
    /// Half perimeter.
    pub ell: f64,
    /// Position of the vertex `C`.
    pub c: f64,
    /// Foot of the normal from edge 0 through `C'`.
    pub d: f64,
    /// Right end of the image of `ψ01`.
    pub e: f64,
    pub p: f64,
    pub q: f64,
}

pub fn kite_constants(alpha: f64, beta: f64) -> Result<KiteConstants> {
    check_family(alpha, beta)?;
    let sab = (alpha + beta).sin();
    let cmb = (alpha - beta).cos();
    let c2b = (2.0 * beta).cos();
    let c = alpha.sin() / sab;
    let k = KiteConstants {
        alpha,
        beta,
        ell: (alpha.sin() + beta.sin()) / sab,
        c,
        d: c2b * c,
        e: (1.0 + cmb - c2b) / cmb * c,
        p: (alpha + beta).cos() * c / cmb,
        q: alpha.cos() / cmb,
    };
    debug_assert!(0.0 < k.d && k.d < k.c && k.c < k.ell && k.p < k.q);
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KiteBranch {
    /// Edge 0 to edge 2, folded back onto edge 0.
    B00,
    /// Edge 0 to edge 3, folded onto edge 1.
    B01,
    /// Edge 1 to edge 2, folded onto edge 0.
    B10,
}

impl std::fmt::Display for KiteBranch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KiteBranch::B00 => "psi00",
            KiteBranch::B01 => "psi01",
            KiteBranch::B10 => "psi10",
        })
    }
}

/// The three affine branches of the reduced map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KiteBranches {
    pub constants: KiteConstants,
    pub psi00: AffineBranch,
    pub psi01: AffineBranch,
    pub psi10: AffineBranch,
}

impl KiteBranches {
    pub fn new(alpha: f64, beta: f64) -> Result<KiteBranches> {
        let k = kite_constants(alpha, beta)?;
        let c2b = (2.0 * beta).cos();
        let cmb = (alpha - beta).cos();
        Ok(KiteBranches {
            constants: k,
            psi00: AffineBranch::new(0.0, k.d, 1.0 / c2b, 0.0),
            psi01: AffineBranch::new(k.d, k.c, 1.0 / cmb, (1.0 - c2b / cmb) * k.c),
            psi10: AffineBranch::new(k.c, k.ell, 1.0 / cmb, k.p - k.c / cmb),
        })
    }

    pub fn get(&self, which: KiteBranch) -> &AffineBranch {
        match which {
            KiteBranch::B00 => &self.psi00,
            KiteBranch::B01 => &self.psi01,
            KiteBranch::B10 => &self.psi10,
        }
    }
}

/// Evaluates a branch or its inverse, rejecting points outside its domain
/// (respectively image).
pub fn branch_eval(b: &KiteBranches, which: KiteBranch, x: f64, inverse: bool) -> Result<f64> {
    let br = b.get(which);
    let tol = 1e-12 * b.constants.ell;
    let ((lo, hi), domain) = if inverse {
        (br.image(), "image")
    } else {
        ((br.lo, br.hi), "domain")
    };
    if !(x >= lo - tol && x <= hi + tol) {
        return Err(KiteError::OutOfBranch {
            branch: which,
            x,
            domain,
        });
    }
    Ok(if inverse { br.invert(x) } else { br.apply(x) })
}

/// Mirror-reduced slap map on `[0, ℓ]`.
pub fn reduced_map(alpha: f64, beta: f64) -> Result<PiecewiseAffineMap> {
    let b = KiteBranches::new(alpha, beta)?;
    Ok(PiecewiseAffineMap::new(0.0, b.constants.ell, vec![b.psi00, b.psi01, b.psi10])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiValue {
    pub plus: f64,
    pub minus: f64,
}

impl PiValue {
    pub fn norm(&self) -> f64 {
        self.plus.hypot(self.minus)
    }
}

/// Orbit data behind `Π`: both one-sided four-step images of `C` and the
/// two-step preimage of `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiTerms {
    pub plus_image: f64,
    pub minus_image: f64,
    pub eta_preimage: f64,
}

fn open_between(index: usize, lo: f64, x: f64, hi: f64) -> Result<f64> {
    if lo < x && x < hi {
        Ok(x)
    } else {
        Err(KiteError::OutOfPiDomain { index })
    }
}

/// Terms of `Π`, checking the eight composition-domain inequalities in
/// order. Inequality `0` concerns `ψ00⁻¹(c)`, `1..=3` the iterates
/// `ψ00^i ψ10(c)`, and `4..=7` the alternating `ψ01`, `ψ10` chain.
pub fn pi_terms(alpha: f64, beta: f64) -> Result<PiTerms> {
    let b = KiteBranches::new(alpha, beta)?;
    let k = b.constants;
    let inv00 = |y: f64| b.psi00.invert(y);
    let first = open_between(0, 0.0, inv00(k.c), k.c)?;
    let eta_preimage = inv00(first);

    let mut x = b.psi10.apply(k.c);
    for i in 0..3 {
        open_between(1 + i, 0.0, x, k.d)?;
        x = b.psi00.apply(x);
    }
    let plus_image = x;

    let y1 = open_between(4, k.c, b.psi01.apply(k.c), k.ell)?;
    let y2 = open_between(5, k.d, b.psi10.apply(y1), k.c)?;
    let y3 = open_between(6, k.c, b.psi01.apply(y2), k.ell)?;
    // the landing point continues along ψ00, so it must lie in (0, d)
    let minus_image = open_between(7, 0.0, b.psi10.apply(y3), k.d)?;
    Ok(PiTerms {
        plus_image,
        minus_image,
        eta_preimage,
    })
}

pub fn pi_map(alpha: f64, beta: f64) -> Result<PiValue> {
    let t = pi_terms(alpha, beta)?;
    Ok(PiValue {
        plus: t.plus_image - t.eta_preimage,
        minus: t.minus_image - t.eta_preimage,
    })
}

/// The doubling orbit of type `(k, m)` by kite labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DoublingOrbitSpec {
    pub k: usize,
    pub m: usize,
    pub gamma_plus: Vec<usize>,
    pub gamma_minus: Vec<usize>,
    pub eta: Vec<usize>,
}

impl DoublingOrbitSpec {
    /// Type `(4, 2)` orbit from `C`, by kite labels.
    pub fn kite() -> DoublingOrbitSpec {
        DoublingOrbitSpec {
            k: 4,
            m: 2,
            gamma_plus: vec![1, 2, 0, 2, 0],
            gamma_minus: vec![0, 3, 0, 3, 0],
            eta: vec![0, 2, 0],
        }
    }

    fn to_sides(labels: &[usize]) -> Vec<usize> {
        labels.iter().map(|&l| KITE_LABELS[l]).collect()
    }

    /// Itineraries as geometric side indices.
    pub fn sides(&self) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
        (
            Self::to_sides(&self.gamma_plus),
            Self::to_sides(&self.gamma_minus),
            Self::to_sides(&self.eta),
        )
    }
}

fn mirror_side(k: usize) -> usize {
    3 - k
}

fn apply_chain(slap: &SlapMap, sides: &[usize], x: f64) -> Result<f64> {
    let idx = slap
        .branches_along(sides)
        .ok_or_else(|| KiteError::OrbitMismatch(format!("no branch chain along sides {sides:?}")))?;
    Ok(idx.iter().fold(x, |x, &i| slap.map.branches()[i].apply(x)))
}

fn invert_chain(slap: &SlapMap, sides: &[usize], y: f64) -> Result<f64> {
    let idx = slap
        .branches_along(sides)
        .ok_or_else(|| KiteError::OrbitMismatch(format!("no branch chain along sides {sides:?}")))?;
    Ok(idx.iter().rev().fold(y, |y, &i| slap.map.branches()[i].invert(y)))
}

/// `Π` from the branches of the full slap map extracted from the kite
/// polygon, composed along the geometric itineraries.
pub fn pi_map_geometric(alpha: f64, beta: f64) -> Result<PiValue> {
    check_family(alpha, beta)?;
    let poly = Polygon::kite(alpha, beta)?;
    let slap = extract_slap_map(&poly)?;
    let c = poly.cumulative_arclength()[1];
    let (gp, gm, eta) = DoublingOrbitSpec::kite().sides();
    let target = invert_chain(&slap, &eta, c)?;
    Ok(PiValue {
        plus: apply_chain(&slap, &gp, c)? - target,
        minus: apply_chain(&slap, &gm, c)? - target,
    })
}

/// `DΠ` by central differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Jacobian {
    /// `matrix[i][j] = ∂Π_i / ∂x_j` with `Π_0 = Π₊`, `x = (α, β)`.
    pub matrix: [[f64; 2]; 2],
    pub det: f64,
}

impl Jacobian {
    /// `J⁻¹ v`.
    pub fn solve(&self, v: [f64; 2]) -> Result<[f64; 2]> {
        if self.det.abs() < 1e-10 {
            return Err(KiteError::SingularJacobian(self.det));
        }
        let [[a, b], [c, d]] = self.matrix;
        Ok([(d * v[0] - b * v[1]) / self.det, (a * v[1] - c * v[0]) / self.det])
    }
}

pub fn jacobian_pi(alpha: f64, beta: f64, h: f64) -> Result<Jacobian> {
    let pa = pi_map(alpha + h, beta)?;
    let ma = pi_map(alpha - h, beta)?;
    let pb = pi_map(alpha, beta + h)?;
    let mb = pi_map(alpha, beta - h)?;
    let matrix = [
        [(pa.plus - ma.plus) / (2.0 * h), (pb.plus - mb.plus) / (2.0 * h)],
        [(pa.minus - ma.minus) / (2.0 * h), (pb.minus - mb.minus) / (2.0 * h)],
    ];
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    Ok(Jacobian { matrix, det })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NewtonSolution {
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub residual: f64,
    pub det: f64,
    /// `|Π|` before each step, then at the solution.
    pub history: Vec<f64>,
}

/// Finite-difference step of the Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// Damped Newton iteration for `Π(α, β) = 0`. A step is halved while it
/// leaves the domain of `Π` or fails to decrease `|Π|`.
pub fn newton_solve(guess: (f64, f64), tol: f64, max_iter: usize) -> Result<NewtonSolution> {
    let (mut a, mut b) = guess;
    let mut value = pi_map(a, b)?;
    let mut history = vec![value.norm()];
    for it in 0..max_iter {
        if value.norm() < tol {
            let jac = jacobian_pi(a, b, JACOBIAN_STEP)?;
            return Ok(NewtonSolution {
                alpha: a,
                beta: b,
                iterations: it,
                residual: value.norm(),
                det: jac.det,
                history,
            });
        }
        let jac = jacobian_pi(a, b, JACOBIAN_STEP)?;
        let step = jac.solve([value.plus, value.minus])?;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let (na, nb) = (a - t * step[0], b - t * step[1]);
            if let Ok(v) = pi_map(na, nb) {
                if v.norm() < value.norm() {
                    accepted = Some((na, nb, v));
                    break;
                }
            }
            t *= 0.5;
        }
        match accepted {
            Some((na, nb, v)) => {
                a = na;
                b = nb;
                value = v;
                history.push(v.norm());
            }
            None => {
                // no decrease is possible at working precision
                if value.norm() < tol.max(1e-13) {
                    continue;
                }
                return Err(KiteError::NoConvergence {
                    iterations: it + 1,
                    residual: value.norm(),
                });
            }
        }
    }
    if value.norm() < tol {
        let jac = jacobian_pi(a, b, JACOBIAN_STEP)?;
        return Ok(NewtonSolution {
            alpha: a,
            beta: b,
            iterations: max_iter,
            residual: value.norm(),
            det: jac.det,
            history,
        });
    }
    Err(KiteError::NoConvergence {
        iterations: max_iter,
        residual: value.norm(),
    })
}

/// Arc-length trace of one doubling orbit on the full boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    /// Starting vertex.
    pub vertex: f64,
    /// `c⁺, ψ(c⁺), …, ψ^k(c⁺)`.
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// `p, ψ(p), …, ψ^m(p)`.
    pub eta: Vec<f64>,
    pub plus_sides: Vec<usize>,
    pub minus_sides: Vec<usize>,
    pub eta_sides: Vec<usize>,
}

impl OrbitTrace {
    /// Every distinct point of the orbit, the vertex included.
    pub fn points(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.plus.iter().chain(&self.minus).chain(&self.eta).copied().collect();
        v.sort_by(f64::total_cmp);
        v.dedup_by(|a, b| (*a - *b).abs() < ORBIT_TOL);
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingOrbitReport {
    pub alpha: f64,
    pub beta: f64,
    pub spec: DoublingOrbitSpec,
    pub orbit: OrbitTrace,
    pub mirror: OrbitTrace,
    /// `|ψ^k(c⁺) − ψ^k(c⁻)|`.
    pub landing_gap: f64,
    /// `|ψ^m(p) − c|`.
    pub return_gap: f64,
    /// Smallest distance from an intermediate iterate to a vertex.
    pub vertex_clearance: f64,
    /// Smallest distance between a point of the orbit and one of its mirror.
    pub mirror_separation: f64,
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).abs() % period;
    d.min(period - d)
}

fn trace_orbit(poly: &Polygon, slap: &SlapMap, vertex: f64, spec: &DoublingOrbitSpec, mirrored: bool) -> Result<OrbitTrace> {
    let side_of_branch = |i: usize| slap.links[i].0;
    let (sides_plus, sides_minus, sides_eta) = {
        let (gp, gm, e) = spec.sides();
        if mirrored {
            let m = |v: Vec<usize>| v.into_iter().map(mirror_side).collect::<Vec<_>>();
            // mirroring reverses orientation, so the one-sided roles swap
            (m(gp), m(gm), m(e))
        } else {
            (gp, gm, e)
        }
    };
    // c⁺ lies on the side that follows the vertex counterclockwise; for the
    // mirror orbit the "plus" side is the mirror of edge 1, which precedes C'.
    let (plus_side, minus_side) = if mirrored { (Side::Left, Side::Right) } else { (Side::Right, Side::Left) };
    let run = |side: Side, n: usize, x: f64| -> Result<(Vec<f64>, Vec<usize>, Side)> {
        let orbit = slap.map.iterate(x, side, n)?;
        let sides = orbit.points.iter().map(|p| side_of_branch(p.branch)).collect();
        let last_side = orbit.points.last().map(|p| p.side).unwrap_or(side);
        Ok((orbit.values(), sides, last_side))
    };
    let (plus, plus_sides, end_side) = run(plus_side, spec.k, vertex)?;
    let (minus, minus_sides, _) = run(minus_side, spec.k, vertex)?;
    let p = plus[spec.k];
    let (eta, mut eta_sides, _) = run(end_side, spec.m, p)?;
    // the last point of η is the vertex; report the side it is reached on
    if let Some(last) = eta_sides.last_mut() {
        *last = *sides_eta.last().unwrap_or(last);
    }
    let _ = poly;
    let check = |name: &str, got: &[usize], want: &[usize]| {
        if got == want {
            Ok(())
        } else {
            Err(KiteError::OrbitMismatch(format!("{name} itinerary {got:?} differs from {want:?}")))
        }
    };
    check("gamma_plus", &plus_sides, &sides_plus)?;
    check("gamma_minus", &minus_sides, &sides_minus)?;
    check("eta", &eta_sides[..eta_sides.len() - 1], &sides_eta[..sides_eta.len() - 1])?;
    Ok(OrbitTrace {
        vertex,
        plus,
        minus,
        eta,
        plus_sides,
        minus_sides,
        eta_sides,
    })
}

/// Checks the doubling-orbit conditions on the full slap map of the kite,
/// for the orbit from `C` and for its mirror image from `C'`.
pub fn verify_doubling_orbit(alpha: f64, beta: f64) -> Result<DoublingOrbitReport> {
    check_family(alpha, beta)?;
    let poly = Polygon::kite(alpha, beta)?;
    let slap = extract_slap_map(&poly)?;
    let spec = DoublingOrbitSpec::kite();
    let cum = poly.cumulative_arclength().to_vec();
    let perimeter = poly.perimeter();
    let vertex_gap = |x: f64| cum.iter().map(|&v| circular_distance(x, v, perimeter)).fold(f64::INFINITY, f64::min);

    let mut traces = Vec::with_capacity(2);
    let mut landing_gap: f64 = 0.0;
    let mut return_gap: f64 = 0.0;
    let mut clearance = f64::INFINITY;
    for (vertex, mirrored) in [(cum[1], false), (cum[3], true)] {
        let gap_at = |x: f64| circular_distance(x, vertex, perimeter);
        let (plus, minus) = {
            let probe = |side| slap.map.iterate(vertex, side, spec.k).map(|o| o.values()[spec.k]);
            (probe(Side::Right)?, probe(Side::Left)?)
        };
        let lg = (plus - minus).abs();
        if lg > ORBIT_TOL {
            return Err(KiteError::OrbitMismatch(format!(
                "one-sided images of the vertex at {vertex} differ by {lg:e} after {} steps",
                spec.k
            )));
        }
        let t = trace_orbit(&poly, &slap, vertex, &spec, mirrored)?;
        let rg = gap_at(t.eta[spec.m]);
        if rg > ORBIT_TOL {
            return Err(KiteError::OrbitMismatch(format!(
                "orbit of p misses the vertex at {vertex} by {rg:e} after {} steps",
                spec.m
            )));
        }
        let inner = t.plus[1..].iter().chain(&t.minus[1..]).chain(&t.eta[..spec.m]);
        for &x in inner {
            let g = vertex_gap(x);
            if g <= ORBIT_TOL {
                return Err(KiteError::OrbitMismatch(format!("iterate {x} lands on a vertex")));
            }
            clearance = clearance.min(g);
        }
        landing_gap = landing_gap.max(lg);
        return_gap = return_gap.max(rg);
        traces.push(t);
    }
    let mirror = traces.pop().expect("mirror trace");
    let orbit = traces.pop().expect("orbit trace");
    let separation = orbit
        .points()
        .iter()
        .flat_map(|&a| mirror.points().into_iter().map(move |b| circular_distance(a, b, perimeter)))
        .fold(f64::INFINITY, f64::min);
    if separation <= ORBIT_TOL {
        return Err(KiteError::OrbitMismatch("orbit meets its mirror image".into()));
    }
    // the mirror orbit is the reflection s ↦ L − s of the orbit
    for (a, b) in orbit.plus.iter().zip(&mirror.plus) {
        if circular_distance(perimeter - a, *b, perimeter) > ORBIT_TOL {
            return Err(KiteError::OrbitMismatch(format!("mirror orbit point {b} is not the reflection of {a}")));
        }
    }
    Ok(DoublingOrbitReport {
        alpha,
        beta,
        spec,
        orbit,
        mirror,
        landing_gap,
        return_gap,
        vertex_clearance: clearance,
        mirror_separation: separation,
    })
}

/// Expansion of the first return `ψ^{k+m}` to the vertex `C`, taken along
/// the orbit leaving `C` on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnSlopes {
    pub plus: f64,
    pub minus: f64,
}

impl ReturnSlopes {
    /// `1/λ₊ + 1/λ₋`. A set near `C` mapped into itself by the return map
    /// satisfies `|J| ≥ |T(J)| ≥ |J| / (1/λ₊ + 1/λ₋)`, so a localized
    /// attractor can only exist when this is at least 1.
    pub fn inverse_slope_sum(&self) -> f64 {
        1.0 / self.plus + 1.0 / self.minus
    }

    pub fn admits_trapping_set(&self) -> bool {
        self.inverse_slope_sum() >= 1.0
    }
}

pub fn return_map_slopes(alpha: f64, beta: f64) -> Result<ReturnSlopes> {
    check_family(alpha, beta)?;
    let poly = Polygon::kite(alpha, beta)?;
    let slap = extract_slap_map(&poly)?;
    let spec = DoublingOrbitSpec::kite();
    let steps = spec.k + spec.m;
    let vertex = poly.cumulative_arclength()[1];
    let slope = |side: Side| -> Result<f64> {
        let orbit = slap.map.iterate(vertex, side, steps)?;
        Ok(orbit.points[..steps]
            .iter()
            .map(|p| slap.map.branches()[p.branch].slope.abs())
            .product())
    };
    Ok(ReturnSlopes {
        plus: slope(Side::Right)?,
        minus: slope(Side::Left)?,
    })
}

/// Neighbourhood radius used to attribute a component to an orbit.
pub const LOCALIZATION_RADIUS: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadrantOutcome {
    /// Target signs of `(Π₊, Π₋)`.
    pub signs: [i8; 2],
    pub alpha: f64,
    pub beta: f64,
    pub pi: Option<PiValue>,
    pub component_count: usize,
    pub periods: Vec<usize>,
    /// Components localized near the orbit and near its mirror.
    pub near_orbit: Vec<usize>,
    pub near_mirror: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QuadrantOutcome {
    pub fn split(&self) -> bool {
        !self.near_orbit.is_empty() && !self.near_mirror.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub alpha0: f64,
    pub beta0: f64,
    pub epsilon: f64,
    pub signs: [i8; 2],
    /// `(Δα, Δβ)` applied to the base point.
    pub perturbation: [f64; 2],
    pub alpha: f64,
    pub beta: f64,
    pub near_orbit: Vec<usize>,
    pub near_mirror: Vec<usize>,
    pub quadrants: Vec<QuadrantOutcome>,
    pub report: ErgodicReport,
}

fn localized(report: &ErgodicReport, trace: &[f64], perimeter: f64) -> Vec<usize> {
    report
        .components
        .iter()
        .enumerate()
        .filter(|(_, c)| c.within(trace, LOCALIZATION_RADIUS, perimeter))
        .map(|(i, _)| i)
        .collect()
}

/// Perturbs `(α₀, β₀)` by `ε` in each of the four directions along which
/// `Π` takes a prescribed sign pattern to first order, and runs the Ulam
/// analysis of the full slap map with `n` uniform bins. Returns the first
/// quadrant (in the order `++, +−, −+, −−`) where distinct components sit
/// near the orbit of `C` and near its mirror, preferring quadrants whose
/// localized components all have period `k + m`.
pub fn bifurcation_probe(alpha0: f64, beta0: f64, epsilon: f64, n: usize) -> Result<ProbeReport> {
    bifurcation_probe_with(alpha0, beta0, epsilon, n, &UlamConfig::default())
}

pub fn bifurcation_probe_with(alpha0: f64, beta0: f64, epsilon: f64, n: usize, cfg: &UlamConfig) -> Result<ProbeReport> {
    check_family(alpha0, beta0)?;
    let base = verify_doubling_orbit(alpha0, beta0)?;
    let spec = DoublingOrbitSpec::kite();
    let period = spec.k + spec.m;
    if epsilon == 0.0 {
        let poly = Polygon::kite(alpha0, beta0)?;
        let slap = extract_slap_map(&poly)?;
        let report = analyze_with(&slap.map, n, cfg)?;
        let near_orbit = localized(&report, &base.orbit.points(), poly.perimeter());
        let near_mirror = localized(&report, &base.mirror.points(), poly.perimeter());
        return Ok(ProbeReport {
            alpha0,
            beta0,
            epsilon,
            signs: [0, 0],
            perturbation: [0.0, 0.0],
            alpha: alpha0,
            beta: beta0,
            near_orbit,
            near_mirror,
            quadrants: Vec::new(),
            report,
        });
    }
    let jac = jacobian_pi(alpha0, beta0, JACOBIAN_STEP)?;
    let quadrants: [[i8; 2]; 4] = [[1, 1], [1, -1], [-1, 1], [-1, -1]];
    let runs: Vec<(QuadrantOutcome, Option<ErgodicReport>)> = quadrants
        .par_iter()
        .map(|&signs| {
            let dir = jac.solve([signs[0] as f64, signs[1] as f64])?;
            let scale = epsilon / dir[0].hypot(dir[1]);
            let (alpha, beta) = (alpha0 + dir[0] * scale, beta0 + dir[1] * scale);
            let mut outcome = QuadrantOutcome {
                signs,
                alpha,
                beta,
                pi: pi_map(alpha, beta).ok(),
                component_count: 0,
                periods: Vec::new(),
                near_orbit: Vec::new(),
                near_mirror: Vec::new(),
                error: None,
            };
            let attempt = (|| -> Result<ErgodicReport> {
                let poly = Polygon::kite(alpha, beta)?;
                let slap = extract_slap_map(&poly)?;
                let report = analyze_with(&slap.map, n, cfg)?;
                outcome.near_orbit = localized(&report, &base.orbit.points(), poly.perimeter());
                outcome.near_mirror = localized(&report, &base.mirror.points(), poly.perimeter());
                Ok(report)
            })();
            match attempt {
                Ok(report) => {
                    outcome.component_count = report.component_count();
                    outcome.periods = report.periods();
                    Ok((outcome, Some(report)))
                }
                Err(e) => {
                    outcome.error = Some(e.to_string());
                    Ok((outcome, None))
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let has_period = |o: &QuadrantOutcome, r: &ErgodicReport| {
        o.near_orbit
            .iter()
            .chain(&o.near_mirror)
            .all(|&i| r.components[i].period == period)
    };
    let pick = runs
        .iter()
        .position(|(o, r)| o.split() && r.as_ref().map_or(false, |r| has_period(o, r)))
        .or_else(|| runs.iter().position(|(o, r)| o.split() && r.is_some()));
    let outcomes: Vec<QuadrantOutcome> = runs.iter().map(|(o, _)| o.clone()).collect();
    let Some(i) = pick else {
        return Err(KiteError::NoBifurcationFound {
            epsilon,
            quadrants: outcomes,
        });
    };
    let (chosen, report) = runs.into_iter().nth(i).expect("picked quadrant");
    Ok(ProbeReport {
        alpha0,
        beta0,
        epsilon,
        signs: chosen.signs,
        perturbation: [chosen.alpha - alpha0, chosen.beta - beta0],
        alpha: chosen.alpha,
        beta: chosen.beta,
        near_orbit: chosen.near_orbit.clone(),
        near_mirror: chosen.near_mirror.clone(),
        quadrants: outcomes,
        report: report.expect("successful quadrant"),
    })
}
