use proptest::prelude::*;

use orbitbound::fields::{local_splitting, AbelianFieldSpec};
use orbitbound::localtori::{
    norm_image_index, norm_image_index_at, norm_image_index_exhaustive, norm_one_generators, scaling_index_closed_form,
    stabilizer_index, stabilizer_index_at, stabilizer_index_bfs, subgroup_order, unit_group_generators,
    CharacterConstraint, PrecisionPolicy,
};
use orbitbound::torus::{CharacterSpec, TorusFactor, TorusSpec};

fn quad(d: i64) -> AbelianFieldSpec {
    AbelianFieldSpec::quadratic(d).unwrap()
}

fn constraint(e: Vec<i64>, depth: u32) -> CharacterConstraint {
    CharacterConstraint { character: CharacterSpec::new(e), depth }
}

#[test]
fn split_scaling_block_matches_the_closed_form() {
    let t = TorusSpec::split(1);
    for p in [2, 3, 5, 7, 11, 13] {
        for m in 0..=4 {
            let c = [constraint(vec![1], m)];
            let expected = scaling_index_closed_form(p, m);
            assert_eq!(stabilizer_index(&t, &c, 0, p, &PrecisionPolicy::default()).unwrap().index, expected);
            assert_eq!(stabilizer_index_bfs(&t, &c, 0, p, m + 2).unwrap(), expected);
        }
    }
}

#[test]
fn unit_group_closures_have_the_expected_order() {
    for (f, p, k) in [(quad(-4), 2, 4), (quad(-3), 3, 3), (quad(5), 2, 3), (quad(-7), 7, 2), (quad(8), 3, 2)] {
        let g = unit_group_generators(&f, p, k).unwrap();
        assert_eq!(num_bigint::BigUint::from(g.closure_order().unwrap()), g.order().unwrap(), "{f} at {p}^{k}");
    }
}

#[test]
fn norm_one_groups() {
    // |T^1(Z/p^k)| for T^1 of Q(i): split at 5, inert at 3
    let g = norm_one_generators(&quad(-4), 5, 2).unwrap();
    assert_eq!(g.closure_order().unwrap(), 20);
    let g = norm_one_generators(&quad(-4), 3, 2).unwrap();
    assert_eq!(g.closure_order().unwrap(), 12);
    assert!(norm_one_generators(&AbelianFieldSpec::cyclotomic(5).unwrap(), 5, 2).is_err());
}

#[test]
fn subgroup_orders() {
    assert_eq!(subgroup_order(&[2], 5, 2).unwrap(), 20);
    assert_eq!(subgroup_order(&[4], 5, 1).unwrap(), 2);
    assert_eq!(subgroup_order(&[3], 2, 4).unwrap(), 4);
    assert_eq!(subgroup_order(&[15, 5], 2, 4).unwrap(), 8);
}

#[test]
fn norm_index_bounded_by_local_degree() {
    for d in [-4, 8, -8, 12, -3, 5, -7, 13, -20] {
        let f = quad(d);
        for p in [2, 3, 5, 7, 11, 13] {
            let i = norm_image_index(&f, p, &PrecisionPolicy::default()).unwrap();
            let s = local_splitting(&f, p);
            assert!(i <= s.local_degree(), "Q(sqrt {d}) at {p}");
            if s.e == 1 {
                assert_eq!(i, 1);
            }
            assert_eq!(i, norm_image_index_exhaustive(&f, p, 3).unwrap(), "Q(sqrt {d}) at {p}");
        }
    }
}

fn tori() -> Vec<TorusSpec> {
    vec![
        TorusSpec::split(1),
        TorusSpec::split(2),
        TorusSpec::weil(quad(-4)),
        TorusSpec::weil(quad(5)),
        TorusSpec::new(vec![TorusFactor::Split(1), TorusFactor::WeilRestriction(quad(-3))]).unwrap(),
        TorusSpec::new(vec![TorusFactor::Split(1), TorusFactor::NormOne(quad(-8))]).unwrap(),
    ]
}

proptest! {
    /// Stabilized indices do not move when the precision is raised further,
    /// and agree with the joint-orbit enumeration.
    #[test]
    fn indices_are_stable_in_the_precision(
        t in prop::sample::select(tori()),
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
        exps in prop::collection::vec(-2i64..=2, 2),
        depth in 0u32..=3,
        level in 0u32..=2,
    ) {
        let e: Vec<i64> = exps[..t.character_slots()].to_vec();
        let c = [constraint(e, depth)];
        let s = stabilizer_index(&t, &c, level, p, &PrecisionPolicy::default()).unwrap();
        let k = s.precision.max(depth.max(level));
        prop_assume!(k > 0);
        prop_assert_eq!(stabilizer_index_at(&t, &c, level, p, k + 1).unwrap(), s.index);
        prop_assert_eq!(stabilizer_index_bfs(&t, &c, level, p, k + 1).unwrap(), s.index);
    }

    #[test]
    fn norm_index_stable_in_the_precision(d in prop::sample::select(vec![-4i64, 8, -3, 5, -7, 12]), p in prop::sample::select(vec![2u64, 3, 5, 7])) {
        let f = quad(d);
        let i = norm_image_index(&f, p, &PrecisionPolicy::default()).unwrap();
        for k in 4..=6 {
            prop_assert_eq!(norm_image_index_at(&f, p, k).unwrap(), i);
        }
    }

    /// On a split scaling block the index is at least (1 − 1/p)·p^{max depth}.
    #[test]
    fn split_scaling_lower_bound(
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11]),
        d1 in 0u32..=3,
        d2 in 0u32..=3,
    ) {
        let t = TorusSpec::split(2);
        let c = [constraint(vec![1, 0], d1), constraint(vec![0, -1], d2)];
        let i = stabilizer_index(&t, &c, 0, p, &PrecisionPolicy::default()).unwrap().index;
        let m = d1.max(d2);
        prop_assert!(i * p >= (p - 1) * p.pow(m));
        prop_assert_eq!(i, scaling_index_closed_form(p, d1) * scaling_index_closed_form(p, d2));
    }
}
