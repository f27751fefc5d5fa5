use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use orbitbound::exactalg::{
    hnf, lattice_index, order_in_lattice, p_order_in_lattice, snf, IntegerMatrix, LocalLattices, QLattice, QVector,
};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-9i64..=9, cols), rows)
}

fn shaped() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| matrix(r, c))
}

fn square(n: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    matrix(n, n)
}

/// Whether `target` is an integer combination of the columns of `m`, decided
/// through the Smith form: `m·x = t` is solvable iff `d_i | (u·t)_i` and the
/// rows beyond the rank vanish.
fn in_column_span(m: &IntegerMatrix, target: &[BigInt]) -> bool {
    let s = snf(m);
    let t = IntegerMatrix::from_rows(&target.iter().map(|x| vec![x.clone()]).collect::<Vec<_>>()).unwrap();
    let ut = s.u.mul(&t).unwrap().column(0);
    ut.iter().enumerate().all(|(i, x)| match s.diagonal.get(i) {
        Some(d) if !d.is_zero() => x.is_multiple_of(d),
        _ => x.is_zero(),
    })
}

fn columns(m: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    (0..m.cols()).map(|j| m.column(j)).collect()
}

proptest! {
    #[test]
    fn hnf_preserves_the_column_span(rows in shaped()) {
        let m = IntegerMatrix::from_rows(&rows).unwrap();
        let h = hnf(&m);
        for c in columns(&m) {
            prop_assert!(in_column_span(&h, &c));
        }
        for c in columns(&h) {
            prop_assert!(in_column_span(&m, &c));
        }
        prop_assert_eq!(hnf(&h), h);
    }

    #[test]
    fn snf_is_a_unimodular_diagonalization(rows in shaped()) {
        let m = IntegerMatrix::from_rows(&rows).unwrap();
        let s = snf(&m);
        let d = s.u.mul(&m).unwrap().mul(&s.v).unwrap().to_rows();
        for (i, row) in d.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let expected = if i == j { s.diagonal[i].clone() } else { BigInt::zero() };
                prop_assert_eq!(x, &expected);
            }
        }
        prop_assert_eq!(s.u.det().unwrap().abs(), BigInt::one());
        prop_assert_eq!(s.v.det().unwrap().abs(), BigInt::one());
        for w in s.diagonal.windows(2) {
            prop_assert!(!w[0].is_negative());
            prop_assert!(w[1].is_zero() || (!w[0].is_zero() && w[1].is_multiple_of(&w[0])));
        }
    }

    #[test]
    fn snf_product_is_the_determinant(rows in (1usize..=4).prop_flat_map(square)) {
        let m = IntegerMatrix::from_rows(&rows).unwrap();
        let det = m.det().unwrap();
        prop_assume!(!det.is_zero());
        let prod: BigInt = snf(&m).diagonal.iter().product();
        prop_assert_eq!(prod, det.abs());
    }
}

fn lattice_from(rows: &[Vec<i64>], den: i64) -> Option<QLattice> {
    let n = rows.len();
    let basis: Vec<QVector> =
        (0..n).map(|j| (0..n).map(|i| BigRational::new(rows[i][j].into(), den.into())).collect()).collect();
    QLattice::new(basis).ok()
}

/// Columns of `l·a` for an integer matrix `a`.
fn sublattice(l: &QLattice, a: &[Vec<i64>]) -> Option<QLattice> {
    let n = l.dim();
    let basis: Vec<QVector> = (0..n)
        .map(|j| {
            let coords: Vec<BigRational> = (0..n).map(|i| BigRational::from_integer(a[i][j].into())).collect();
            l.from_coordinates(&coords)
        })
        .collect();
    QLattice::new(basis).ok()
}

fn vector(n: usize) -> impl Strategy<Value = Vec<(i64, i64)>> {
    prop::collection::vec((-30i64..=30, 1i64..=36), n)
}

fn rationals(v: &[(i64, i64)]) -> QVector {
    v.iter().map(|&(a, b)| BigRational::new(a.into(), b.into())).collect()
}

proptest! {
    #[test]
    fn lattice_index_is_multiplicative(
        (base, a, b, den) in (1usize..=3).prop_flat_map(|n| (square(n), square(n), square(n), 1i64..=6))
    ) {
        let Some(l1) = lattice_from(&base, den) else { return Ok(()) };
        let Some(l2) = sublattice(&l1, &a) else { return Ok(()) };
        let Some(l3) = sublattice(&l2, &b) else { return Ok(()) };
        let i12 = lattice_index(&l1, &l2).unwrap();
        let i23 = lattice_index(&l2, &l3).unwrap();
        let i13 = lattice_index(&l1, &l3).unwrap();
        prop_assert_eq!(i12 * i23, i13);
    }

    #[test]
    fn p_order_is_invariant_under_lattice_translation(
        (base, den, w, shift) in (1usize..=3).prop_flat_map(|n| (square(n), 1i64..=6, vector(n), prop::collection::vec(-20i64..=20, n))),
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
    ) {
        let Some(l) = lattice_from(&base, den) else { return Ok(()) };
        let w = rationals(&w);
        let lambda = l.from_coordinates(&shift.iter().map(|&x| BigRational::from_integer(x.into())).collect::<Vec<_>>());
        let moved: QVector = w.iter().zip(&lambda).map(|(a, b)| a + b).collect();
        prop_assert!(l.contains(&lambda).unwrap());
        prop_assert_eq!(p_order_in_lattice(&w, &l, p).unwrap(), p_order_in_lattice(&moved, &l, p).unwrap());
    }

    #[test]
    fn order_in_lattice_matches_direct_search(
        (base, den, w) in (1usize..=2).prop_flat_map(|n| (square(n), 1i64..=4, vector(n))),
    ) {
        let Some(l) = lattice_from(&base, den) else { return Ok(()) };
        let w = rationals(&w);
        let lattices = LocalLattices { default: l.clone(), exceptions: Default::default() };
        let order = order_in_lattice(&w, &lattices).unwrap();
        prop_assume!(order <= BigUint::from(100_000u32));
        let found = (1u64..).find(|&n| {
            let nw: QVector = w.iter().map(|x| x * BigRational::from_integer(n.into())).collect();
            l.contains(&nw).unwrap()
        });
        prop_assert_eq!(BigUint::from(found.unwrap()), order);
    }
}

#[test]
fn small_frozen_forms() {
    let m = IntegerMatrix::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]).unwrap();
    let d: Vec<i64> = snf(&m).diagonal.iter().map(|x| i64::try_from(x.clone()).unwrap()).collect();
    assert_eq!(d, vec![2, 6, 12]);
    let h = hnf(&IntegerMatrix::from_rows(&[vec![4, 6], vec![0, 3]]).unwrap());
    assert_eq!(h.to_rows(), vec![vec![BigInt::from(2), BigInt::zero()], vec![BigInt::from(3), BigInt::from(6)]]);
}
