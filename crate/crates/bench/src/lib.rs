//! Fixtures shared by the benchmarks.

use slapmap_core::geometry::{extract_slap_map, Polygon};
use slapmap_core::kite::{newton_solve, DEFAULT_GUESS};
use slapmap_core::PiecewiseAffineMap;

pub fn regular_map(d: usize) -> PiecewiseAffineMap {
    extract_slap_map(&Polygon::regular(d).expect("d >= 3")).expect("odd d expands").map
}

/// The kite carrying the doubling orbit.
pub fn root_kite() -> Polygon {
    let s = newton_solve(DEFAULT_GUESS, 1e-12, 100).expect("root converges");
    Polygon::kite(s.alpha, s.beta).expect("root lies in the family")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(regular_map(7).len(), 7.0);
        assert_eq!(root_kite().side_count(), 4);
    }
}
