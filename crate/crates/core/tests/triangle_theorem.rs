use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slapmap_core::geometry::extract_slap_map;
use slapmap_core::triangles::{
    check_second_iterate_invariance, classify, predict_triangle, triangle_from_angles, TriangleKind, TriangleSpec,
};
use slapmap_core::{analyze, ErgodicReport};
use std::f64::consts::{FRAC_PI_2, PI};

const MIN_ANGLE: f64 = 0.2;

fn run(a1: f64, a2: f64) -> (TriangleSpec, ErgodicReport, bool) {
    let t = triangle_from_angles(a1, a2, 1.0).unwrap();
    let spec = TriangleSpec::from_polygon(&t).unwrap();
    let slap = extract_slap_map(&t).unwrap();
    let bins = (3000.0 * t.perimeter()).round() as usize;
    let report = analyze(&slap.map, bins).unwrap();
    let invariant = check_second_iterate_invariance(&t).unwrap();
    (spec, report, invariant)
}

fn acute(rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let a1 = rng.gen_range(MIN_ANGLE..FRAC_PI_2 - 0.01);
        let a2 = rng.gen_range(MIN_ANGLE..FRAC_PI_2 - 0.01);
        let a3 = PI - a1 - a2;
        if (MIN_ANGLE..FRAC_PI_2 - 0.01).contains(&a3) {
            return (a1, a2);
        }
    }
}

#[test]
fn acute_triangles_are_mixing_with_full_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let (a1, a2) = acute(&mut rng);
        let (spec, r, _) = run(a1, a2);
        assert_eq!(classify(&spec), TriangleKind::Acute);
        assert_eq!(r.periods(), vec![1], "angles ({a1}, {a2})");
        let c = &r.components[0];
        assert!(c.cell_count as f64 >= 0.999 * r.bin_count as f64, "angles ({a1}, {a2})");
        assert!(!r.unresolved());
    }
}

#[test]
fn right_triangles_have_two_mixing_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let a = rng.gen_range(MIN_ANGLE..FRAC_PI_2 - MIN_ANGLE);
        let (spec, r, invariant) = run(FRAC_PI_2, a);
        assert_eq!(classify(&spec), TriangleKind::Right);
        assert_eq!(r.periods(), vec![2], "angle {a}");
        assert!(invariant);
        assert!(predict_triangle(&spec).mixing.admits(2));
    }
}

#[test]
fn obtuse_triangles_have_even_period() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let g = rng.gen_range(FRAC_PI_2 + 0.05..0.8 * PI);
        let a = (PI - g) * rng.gen_range(0.25..0.75);
        let (spec, r, invariant) = run(a, g);
        assert_eq!(classify(&spec), TriangleKind::Obtuse);
        assert_eq!(r.component_count(), 1, "angles ({a}, {g})");
        assert!(r.periods()[0] % 2 == 0, "angles ({a}, {g}): {:?}", r.periods());
        assert!(invariant);
    }
}
