use hotmesh_core::{Coord, CumulativeTransform, GridSpec, MigrationFunction};
use proptest::prelude::*;
use MigrationFunction::*;

fn function() -> impl Strategy<Value = MigrationFunction> {
    prop_oneof![
        Just(Identity),
        Just(Rotation),
        Just(MirrorX),
        Just(MirrorY),
        Just(MirrorXY),
        (-10i64..10).prop_map(TranslateX),
        (-10i64..10).prop_map(TranslateY),
        ((-10i64..10), (-10i64..10)).prop_map(|(a, b)| TranslateXY(a, b)),
    ]
}

fn square_function() -> impl Strategy<Value = (usize, MigrationFunction)> {
    (1usize..=8, function())
}

proptest! {
    #[test]
    fn permutation_agrees_with_apply((n, f) in square_function()) {
        let g = GridSpec::square(n).unwrap();
        let p = f.as_permutation(&g).unwrap();
        prop_assert!(p.is_bijection());
        for c in g.cells() {
            prop_assert_eq!(p.apply(c), f.apply(c, &g).unwrap());
        }
    }

    #[test]
    fn translations_add(n in 1usize..=8, a in -20i64..20, b in -20i64..20) {
        let g = GridSpec::new(n, 3, 1.0).unwrap();
        let lhs = TranslateX(a).as_permutation(&g).unwrap().then(&TranslateX(b).as_permutation(&g).unwrap());
        let rhs = TranslateX((a + b).rem_euclid(n as i64)).as_permutation(&g).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn address_transparency(n in 1usize..=6, fs in prop::collection::vec(function(), 0..12)) {
        let g = GridSpec::square(n).unwrap();
        let mut ct = CumulativeTransform::identity(&g);
        let mut expected: Vec<Coord> = g.cells().collect();
        for f in fs {
            ct = ct.compose(f, &g).unwrap();
            for c in expected.iter_mut() {
                *c = f.apply(*c, &g).unwrap();
            }
        }
        for (logical, physical) in g.cells().zip(expected) {
            prop_assert_eq!(ct.external_address(logical).unwrap(), physical);
            prop_assert_eq!(ct.internal_address(physical).unwrap(), logical);
            prop_assert_eq!(ct.external_address(ct.internal_address(logical).unwrap()).unwrap(), logical);
        }
    }

    #[test]
    fn rectangular_meshes(nx in 1usize..=8, ny in 1usize..=8, f in function()) {
        let g = GridSpec::new(nx, ny, 1.0).unwrap();
        match f.as_permutation(&g) {
            Ok(p) => prop_assert!(p.is_bijection()),
            Err(_) => prop_assert!(f == Rotation && nx != ny),
        }
    }
}

#[test]
fn group_laws() {
    for n in 1..=8 {
        let g = GridSpec::square(n).unwrap();
        let r = Rotation.as_permutation(&g).unwrap();
        let mx = MirrorX.as_permutation(&g).unwrap();
        assert!(r.then(&r).then(&r).then(&r).is_identity());
        assert!(mx.then(&mx).is_identity());
        assert_eq!(MirrorXY.as_permutation(&g).unwrap(), r.then(&r));
        let ct = CumulativeTransform::identity(&g).compose(Rotation, &g).unwrap();
        assert!(ct.compose_permutation(&r.inverse()).unwrap().permutation().is_identity());
    }
}

#[test]
fn fixed_points_are_exactly_the_stationary_cells() {
    for n in 1..=7 {
        let g = GridSpec::square(n).unwrap();
        for f in [Rotation, MirrorX, MirrorY, MirrorXY, TranslateX(1), TranslateXY(2, 0)] {
            let fixed = f.fixed_points(&g).unwrap();
            let brute: Vec<Coord> = g.cells().filter(|&c| f.apply(c, &g).unwrap() == c).collect();
            assert_eq!(fixed, brute);
        }
    }
}
