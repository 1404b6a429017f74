//! Renormalization of the centrally symmetric Lorenz family
//! `f_a(x) = a(x − 1/2) (mod 1)`, `1 < a ≤ 2`.

use crate::pwamap::{MapError, PiecewiseAffineMap};
use serde::Serialize;
use std::f64::consts::{PI, SQRT_2};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LorenzError {
    #[error("slope {0} is outside (1, 2]")]
    OutOfRange(f64),
    #[error("polygon arity {0} must be odd and at least 3")]
    InvalidArity(usize),
    #[error("renormalization interval at level {level} failed validation: {reason}")]
    TowerValidationFailed { level: usize, reason: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Renormalization depth and nested intervals `J_0 ⊇ J_1 ⊇ … ⊇ J_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LorenzAnalysis {
    pub a: f64,
    pub m: usize,
    pub intervals: Vec<[f64; 2]>,
}

fn check_slope(a: f64) -> Result<(), LorenzError> {
    if a > 1.0 && a <= 2.0 {
        Ok(())
    } else {
        Err(LorenzError::OutOfRange(a))
    }
}

/// The map `f_a` on `[0, 1]`.
pub fn centrally_symmetric(a: f64) -> Result<PiecewiseAffineMap, LorenzError> {
    check_slope(a)?;
    Ok(PiecewiseAffineMap::mod_one(a, 0.5)?)
}

/// The unique `m ≥ 0` with `2^(2^(−m−1)) < a ≤ 2^(2^(−m))`.
pub fn m_of_slope(a: f64) -> Result<usize, LorenzError> {
    check_slope(a)?;
    let mut upper = 2.0f64;
    let mut m = 0;
    loop {
        let next = upper.sqrt();
        if a > next {
            return Ok(m);
        }
        upper = next;
        m += 1;
    }
}

/// Integer part of `−log2(−log2 cos(π/d))` for odd `d ≥ 3`.
pub fn m_of_polygon(d: usize) -> Result<usize, LorenzError> {
    if d < 3 || d % 2 == 0 {
        return Err(LorenzError::InvalidArity(d));
    }
    let c = (PI / d as f64).cos();
    Ok((-(-c.log2()).log2()).floor() as usize)
}

/// `2^m(a)` mixing components of the unique acip of `f_a`.
pub fn predicted_mixing_components(a: f64) -> Result<usize, LorenzError> {
    Ok(1usize << m_of_slope(a)?)
}

/// Builds the renormalization tower of `f_a`.
///
/// At level `k` the rescaled return map is `f_{a_k}` with `a_k = a^(2^k)`.
/// While `a_k ≤ √2` the next interval, in rescaled coordinates, is
/// `[1 − a_k/2, a_k/2]`. Each level is checked: the second iterate of
/// `f_{a_k}` must map that interval into itself and rescale to the Lorenz
/// map `f_{a_k²}`.
pub fn renormalization_tower(a: f64) -> Result<LorenzAnalysis, LorenzError> {
    check_slope(a)?;
    let mut intervals = vec![[0.0, 1.0]];
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut ak = a;
    while ak <= SQRT_2 {
        let level = intervals.len();
        let (u, v) = (1.0 - ak / 2.0, ak / 2.0);
        validate_level(ak, u, v).map_err(|reason| LorenzError::TowerValidationFailed { level, reason })?;
        let w = hi - lo;
        let (nlo, nhi) = (lo + w * u, lo + w * v);
        lo = nlo;
        hi = nhi;
        intervals.push([lo, hi]);
        ak *= ak;
    }
    Ok(LorenzAnalysis {
        a,
        m: intervals.len() - 1,
        intervals,
    })
}

fn validate_level(ak: f64, u: f64, v: f64) -> Result<(), String> {
    let f = PiecewiseAffineMap::mod_one(ak, 0.5).map_err(|e| e.to_string())?;
    let g = f
        .power(2)
        .and_then(|f2| f2.restrict_and_rescale(u, v))
        .map_err(|e| e.to_string())?;
    if !g.is_lorenz() {
        return Err("return map is not a Lorenz map".into());
    }
    let expected = ak * ak;
    if g.branches().iter().any(|b| (b.slope - expected).abs() > 1e-10 * expected) {
        return Err("return map slope differs from a_k^2".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pwamap::Side;
    use proptest::prelude::*;

    #[test]
    fn m_examples() {
        assert_eq!(m_of_slope(2.0).unwrap(), 0);
        assert_eq!(m_of_slope(5f64.sqrt() - 1.0).unwrap(), 1);
        assert_eq!(m_of_slope(1.2).unwrap(), 1);
        assert_eq!(m_of_slope(SQRT_2).unwrap(), 1);
        assert_eq!(m_of_slope(1.0), Err(LorenzError::OutOfRange(1.0)));
        assert_eq!(m_of_slope(2.5), Err(LorenzError::OutOfRange(2.5)));
    }

    #[test]
    fn m_of_polygon_examples() {
        assert_eq!(m_of_polygon(3).unwrap(), 0);
        assert_eq!(m_of_polygon(5).unwrap(), 1);
        assert_eq!(m_of_polygon(7).unwrap(), 2);
        // −log2(−log2 cos(π/9)) ≈ 3.479
        let raw = -(-(PI / 9.0).cos().log2()).log2();
        assert!((raw - 3.479).abs() < 1e-3);
        assert_eq!(m_of_polygon(9).unwrap(), 3);
        assert_eq!(m_of_polygon(4), Err(LorenzError::InvalidArity(4)));
    }

    #[test]
    fn m_of_polygon_agrees_with_slope() {
        for d in (3..=99).step_by(2) {
            let a = 1.0 / (PI / d as f64).cos();
            assert_eq!(m_of_polygon(d).unwrap(), m_of_slope(a).unwrap(), "d = {d}");
        }
    }

    #[test]
    fn pentagon_tower() {
        let t = renormalization_tower(5f64.sqrt() - 1.0).unwrap();
        assert_eq!(t.m, 1);
        let e = (3.0 - 5f64.sqrt()) / 2.0;
        assert!((t.intervals[1][0] - e).abs() < 1e-12);
        assert!((t.intervals[1][1] - (1.0 - e)).abs() < 1e-12);
    }

    #[test]
    fn full_slope_tower() {
        let t = renormalization_tower(2.0).unwrap();
        assert_eq!(t.m, 0);
        assert_eq!(t.intervals, vec![[0.0, 1.0]]);
    }

    #[test]
    fn heptagon_tower_invariance() {
        let a = 1.0 / (PI / 7.0).cos();
        let t = renormalization_tower(a).unwrap();
        assert_eq!(t.m, 2);
        let f = centrally_symmetric(a).unwrap();
        for (k, j) in t.intervals.iter().enumerate() {
            assert!(((j[0] + j[1]) / 2.0 - 0.5).abs() < 1e-12);
            let steps = 1usize << k;
            for i in 0..1000 {
                let x0 = j[0] + (j[1] - j[0]) * (i as f64 + 0.5) / 1000.0;
                let orbit = f.iterate(x0, Side::Right, steps).unwrap();
                let y = orbit.points[steps].x;
                assert!(y >= j[0] - 1e-10 && y <= j[1] + 1e-10, "level {k}, x0 = {x0}");
            }
        }
    }

    #[test]
    fn mixing_components() {
        assert_eq!(predicted_mixing_components(2.0).unwrap(), 1);
        assert_eq!(predicted_mixing_components(5f64.sqrt() - 1.0).unwrap(), 2);
        assert_eq!(predicted_mixing_components(1.0 / (PI / 7.0).cos()).unwrap(), 4);
    }

    #[test]
    fn renormalized_family_is_closed() {
        // f_a² on J_1, rescaled, is f_{a²}
        let a = 1.3;
        let t = renormalization_tower(a).unwrap();
        let j = t.intervals[1];
        let g = centrally_symmetric(a)
            .unwrap()
            .power(2)
            .unwrap()
            .restrict_and_rescale(j[0], j[1])
            .unwrap();
        let expected = centrally_symmetric(a * a).unwrap();
        for x in [0.1, 0.3, 0.49, 0.51, 0.8] {
            let gx = g.eval(x, Side::Right).unwrap();
            let ex = expected.eval(x, Side::Right).unwrap();
            assert!((gx - ex).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn m_satisfies_band(a in 1.0001f64..=2.0) {
            let m = m_of_slope(a).unwrap() as i32;
            prop_assert!(2f64.powf(2f64.powi(-m - 1)) < a);
            prop_assert!(a <= 2f64.powf(2f64.powi(-m)) * (1.0 + 1e-15));
        }

        #[test]
        fn tower_levels_are_lorenz(a in 1.01f64..=2.0) {
            let t = renormalization_tower(a).unwrap();
            prop_assert_eq!(t.m, m_of_slope(a).unwrap());
            let f = centrally_symmetric(a).unwrap();
            for (k, j) in t.intervals.iter().enumerate().take(4) {
                prop_assert!(((j[0] + j[1]) / 2.0 - 0.5).abs() < 1e-12);
                let g = f.power(1 << k).unwrap().restrict_and_rescale(j[0], j[1]).unwrap();
                prop_assert!(g.is_lorenz());
                let slope = a.powi(1 << k);
                for b in g.branches() {
                    prop_assert!((b.slope - slope).abs() < 1e-10 * slope);
                }
            }
        }
    }
}
