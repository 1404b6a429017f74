//! Regular polygons with an odd number of sides: the reduced slap map
//! `x ↦ −(x − 1/2)/cos(π/d) (mod 1)`, its skew-product lift over `Z_d`, and
//! the translation constants of the lift along the renormalization tower.

use crate::geometry::{extract_slap_map, GeometryError, Polygon};
use crate::lorenz::{self, LorenzError};
use crate::pwamap::{MapError, PiecewiseAffineMap, Side};
use serde::Serialize;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegularError {
    #[error("d = {0}: the reduced slap map of an even polygon is the involution 1 - x")]
    EvenArity(usize),
    #[error("regular polygon needs d >= 3, got {0}")]
    InvalidArity(usize),
    #[error("translation alpha_(2^{level}) is not constant on J_{level}+ (values {values:?})")]
    NotConstant { level: usize, values: Vec<usize> },
    #[error(transparent)]
    Lorenz(#[from] LorenzError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

fn check_odd(d: usize) -> Result<(), RegularError> {
    if d < 3 {
        Err(RegularError::InvalidArity(d))
    } else if d % 2 == 0 {
        Err(RegularError::EvenArity(d))
    } else {
        Ok(())
    }
}

/// Reduced slap map of the regular `d`-gon, `d` odd.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedSlap {
    pub d: usize,
    pub beta: f64,
    pub map: PiecewiseAffineMap,
}

/// State `(x, s)` of the skew product over `Z_d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkewState {
    pub x: f64,
    pub s: usize,
}

/// Translation constants `a_0, …, a_m` in `Z_d`, normalized to `[0, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlphaTable {
    pub d: usize,
    pub constants: Vec<usize>,
}

pub fn reduced_slap(d: usize) -> Result<ReducedSlap, RegularError> {
    check_odd(d)?;
    let beta = (PI / d as f64).cos();
    let map = PiecewiseAffineMap::mod_one(-1.0 / beta, 0.5)?;
    Ok(ReducedSlap { d, beta, map })
}

impl ReducedSlap {
    pub fn expansion(&self) -> f64 {
        1.0 / self.beta
    }

    fn delta(&self, x: f64, side: Side) -> i64 {
        let tol = self.map.tol();
        if x < 0.5 - tol || (x <= 0.5 + tol && side == Side::Left) {
            -1
        } else {
            1
        }
    }

    /// One step of `F_d(x, s) = (φ_d(x), s + ⌊d/2⌋·δ(x))`.
    pub fn step(&self, state: SkewState, side: Side) -> Result<SkewState, RegularError> {
        let x = self.map.eval(state.x, side)?;
        let shift = (self.d / 2) as i64 * self.delta(state.x, side);
        let s = (state.s as i64 + shift).rem_euclid(self.d as i64) as usize;
        Ok(SkewState { x, s })
    }

    /// `α_n(x) = ⌊d/2⌋ Σ_{i<n} δ(φ_d^i(x))` in `Z_d`.
    pub fn translation(&self, x: f64, n: usize) -> Result<usize, RegularError> {
        let orbit = self.map.iterate(x, Side::Right, n)?;
        let sum: i64 = orbit.points[..n].iter().map(|p| self.delta(p.x, p.side)).sum();
        Ok(((self.d / 2) as i64 * sum).rem_euclid(self.d as i64) as usize)
    }
}

/// `F_d` applied to a state of the regular `d`-gon.
pub fn skew_step(d: usize, state: SkewState, side: Side) -> Result<SkewState, RegularError> {
    reduced_slap(d)?.step(state, side)
}

/// `H(x, s) = x + s`.
pub fn conjugation_h(x: f64, s: usize) -> f64 {
    x + s as f64
}

/// Inverse of `H` on `[0, d]`: integer part and fractional part.
pub fn conjugation_h_inverse(y: f64, d: usize) -> SkewState {
    let s = (y.floor().max(0.0) as usize).min(d - 1);
    SkewState { x: y - s as f64, s }
}

/// Largest `|ψ(H(x, s)) − H(F_d(x, s))|` over `samples` points `x` per side
/// and every `s`, with `ψ` the slap map of the unit-sided regular `d`-gon.
/// Points within `1e-9` of the branch point `1/2` are skipped.
pub fn conjugation_error(d: usize, samples: usize) -> Result<f64, RegularError> {
    let r = reduced_slap(d)?;
    let slap = extract_slap_map(&Polygon::regular(d)?)?.map;
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let x = (i as f64 + 0.5) / samples as f64;
        if (x - 0.5).abs() < 1e-9 {
            continue;
        }
        for s in 0..d {
            let lifted = r.step(SkewState { x, s }, Side::Right)?;
            let direct = slap.eval(conjugation_h(x, s), Side::Right)?;
            let want = conjugation_h(lifted.x, lifted.s);
            // both sides of the identification 0 ~ d
            let err = (direct - want).abs();
            worst = worst.max(err.min((err - d as f64).abs()));
        }
    }
    Ok(worst)
}

/// Measures `a_k` on `J_k⁺ = J_k ∩ (1/2, 1]` for `k = 0..=m(d)`.
pub fn alpha_constants(d: usize) -> Result<AlphaTable, RegularError> {
    alpha_constants_with(d, 100)
}

pub fn alpha_constants_with(d: usize, samples: usize) -> Result<AlphaTable, RegularError> {
    let r = reduced_slap(d)?;
    let tower = lorenz::renormalization_tower(r.expansion())?;
    let mut constants = Vec::with_capacity(tower.m + 1);
    for (level, j) in tower.intervals.iter().enumerate() {
        let n = 1usize << level;
        let mut values = Vec::with_capacity(samples);
        for i in 0..samples {
            let x = 0.5 + (j[1] - 0.5) * (i as f64 + 0.5) / samples as f64;
            let plus = r.translation(x, n)?;
            let minus = r.translation(1.0 - x, n)?;
            // α_(2^k) = −α_(2^k) ∘ (1 − x)
            if (plus + minus) % d != 0 {
                values.push(plus);
                values.push(minus);
                return Err(RegularError::NotConstant { level, values });
            }
            values.push(plus);
        }
        values.dedup();
        if values.len() != 1 {
            return Err(RegularError::NotConstant { level, values });
        }
        constants.push(values[0]);
    }
    Ok(AlphaTable { d, constants })
}

/// Number of ergodic acips and mixing components per acip.
pub fn predict_acips(d: usize) -> Result<(usize, usize), RegularError> {
    check_odd(d)?;
    let m = lorenz::m_of_polygon(d)?;
    let ergodic = if d <= 5 { 1 } else { d };
    Ok((ergodic, 1 << m))
}

/// Constants of the pentagon's renormalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PentagonConstants {
    /// Left end of the renormalization interval `J = [e, 1 − e]`.
    pub e: f64,
    /// Point of `[e, 1/2)` sent to `1/2` by the square of the Lorenz lift.
    pub b: f64,
    pub j: [f64; 2],
    /// Square of the Lorenz lift evaluated at `b`; equals `1/2`.
    pub lifted_square_at_b: f64,
}

/// Computes `e` from the renormalization tower and `b` by inverting the
/// two-step branch composition of the Lorenz lift `1 − φ_5`.
pub fn pentagon_constants() -> Result<PentagonConstants, RegularError> {
    let r = reduced_slap(5)?;
    let a = r.expansion();
    let tower = lorenz::renormalization_tower(a)?;
    let e = tower.intervals[1][0];
    let lift = lorenz::centrally_symmetric(a)?;
    // left branch, then right branch
    let square = lift.compose_along(&[0, 1])?;
    let b = square.invert(0.5);
    let lifted_square_at_b = lift.power(2)?.eval(b, Side::Right)?;
    Ok(PentagonConstants {
        e,
        b,
        j: [e, 1.0 - e],
        lifted_square_at_b,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub ergodic: usize,
    pub mixing: usize,
}

/// Closed-form facts about the regular `d`-gon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularReport {
    pub d: usize,
    pub beta: f64,
    pub m: usize,
    pub alpha: Vec<usize>,
    pub predicted: Prediction,
}

pub fn regular_report(d: usize) -> Result<RegularReport, RegularError> {
    let r = reduced_slap(d)?;
    let (ergodic, mixing) = predict_acips(d)?;
    Ok(RegularReport {
        d,
        beta: r.beta,
        m: lorenz::m_of_polygon(d)?,
        alpha: alpha_constants(d)?.constants,
        predicted: Prediction { ergodic, mixing },
    })
}
