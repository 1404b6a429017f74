use proptest::prelude::*;
use slapmap_core::ergodic::{build_ulam, components, terminal_classes, UlamConfig};
use slapmap_core::geometry::{extract_slap_map, Polygon};
use slapmap_core::{analyze, PiecewiseAffineMap};
use std::collections::HashSet;

#[test]
fn doubling_map_density_is_uniform() {
    let f = PiecewiseAffineMap::mod_one(2.0, 0.0).unwrap();
    let r = analyze(&f, 1000).unwrap();
    assert_eq!(r.periods(), vec![1]);
    let c = &r.components[0];
    for (b, m) in c.cell_bounds.iter().zip(&c.mass) {
        assert!((m / (b[1] - b[0]) - 1.0).abs() < 1e-9);
    }
}

#[test]
fn non_expanding_rejected() {
    let f = PiecewiseAffineMap::mod_one(1.0, 0.3).unwrap();
    assert!(build_ulam(&f, 100).is_err());
}

#[test]
fn reports_are_byte_identical() {
    let poly = Polygon::regular(7).unwrap();
    let f = extract_slap_map(&poly).unwrap().map;
    let a = serde_json::to_string(&analyze(&f, 7000).unwrap()).unwrap();
    let b = serde_json::to_string(&analyze(&f, 7000).unwrap()).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn decomposition_is_consistent(slope in 1.3f64..4.0, shift in 0.0f64..1.0, negate in any::<bool>(), n in 200usize..1500) {
        let s = if negate { -slope } else { slope };
        let f = PiecewiseAffineMap::mod_one(s, shift).unwrap();
        let model = build_ulam(&f, n).unwrap();
        prop_assert!(model.max_row_error() <= 1e-12);
        // each cell lies inside a single branch
        for i in 0..model.cell_count() {
            let (a, b) = model.cell(i);
            let mid = 0.5 * (a + b);
            let br = f.branches().iter().find(|br| br.lo <= mid && mid <= br.hi).unwrap();
            prop_assert!(br.lo <= a + 1e-12 && b <= br.hi + 1e-12);
        }
        let comps = components(&model, &UlamConfig::default()).unwrap();
        prop_assert_eq!(comps.len(), terminal_classes(&model).len());
        let mut seen = HashSet::new();
        for c in &comps {
            let mut union: Vec<usize> = c.cyclic_parts.concat();
            union.sort_unstable();
            let mut cells = c.cells.clone();
            cells.sort_unstable();
            prop_assert_eq!(&union, &cells);
            prop_assert_eq!(c.cyclic_parts.len(), c.period);
            for &i in &c.cells {
                prop_assert!(seen.insert(i), "supports overlap");
            }
            let part_of: std::collections::HashMap<usize, usize> = c
                .cyclic_parts
                .iter()
                .enumerate()
                .flat_map(|(k, p)| p.iter().map(move |&i| (i, k)))
                .collect();
            for (k, part) in c.cyclic_parts.iter().enumerate() {
                for &i in part {
                    for &j in model.successors(i) {
                        prop_assert_eq!(part_of[&j], (k + 1) % c.period);
                    }
                }
            }
            let total: f64 = c.mass.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(c.mass.iter().all(|&m| m >= 0.0));
        }
    }
}
