use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use orbitbound::error::Error;
use orbitbound::exactalg::{p_order_in_lattice, QLattice};
use orbitbound::heisenberg::{hinv, hmul, hpow, HeisenbergElement, PolarizationForm};

fn q() -> impl Strategy<Value = BigRational> {
    (-40i64..=40, 1i64..=30).prop_map(|(a, b)| BigRational::new(a.into(), b.into()))
}

fn form(du: usize, dv: usize) -> impl Strategy<Value = PolarizationForm> {
    prop::collection::vec(q(), du * dv * dv).prop_map(move |xs| {
        let mut t = vec![vec![vec![BigRational::zero(); dv]; dv]; du];
        for (k, m) in t.iter_mut().enumerate() {
            for i in 0..dv {
                for j in i + 1..dv {
                    let x = xs[(k * dv + i) * dv + j].clone();
                    m[i][j] = x.clone();
                    m[j][i] = -x;
                }
            }
        }
        PolarizationForm::new(du, dv, t).unwrap()
    })
}

fn element(du: usize, dv: usize) -> impl Strategy<Value = HeisenbergElement> {
    (prop::collection::vec(q(), du), prop::collection::vec(q(), dv)).prop_map(|(u, v)| HeisenbergElement::new(u, v))
}

fn setup() -> impl Strategy<Value = (PolarizationForm, HeisenbergElement, HeisenbergElement, HeisenbergElement)> {
    (0usize..=3, 0usize..=4).prop_flat_map(|(du, dv)| (form(du, dv), element(du, dv), element(du, dv), element(du, dv)))
}

proptest! {
    #[test]
    fn associative((psi, a, b, c) in setup()) {
        let left = hmul(&hmul(&a, &b, &psi).unwrap(), &c, &psi).unwrap();
        let right = hmul(&a, &hmul(&b, &c, &psi).unwrap(), &psi).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_and_identity((psi, a, _, _) in setup()) {
        let e = HeisenbergElement::identity(psi.dim_u(), psi.dim_v());
        prop_assert_eq!(hmul(&a, &hinv(&a, &psi).unwrap(), &psi).unwrap(), e.clone());
        prop_assert_eq!(hmul(&e, &a, &psi).unwrap(), a);
    }

    #[test]
    fn power_law((psi, a, _, _) in setup(), n in -8i64..=8) {
        let p = hpow(&a, n, &psi).unwrap();
        let scale = BigRational::from_integer(n.into());
        prop_assert_eq!(&p.u, &a.u.iter().map(|x| x * &scale).collect::<Vec<_>>());
        prop_assert_eq!(&p.v, &a.v.iter().map(|x| x * &scale).collect::<Vec<_>>());
        let mut acc = HeisenbergElement::identity(psi.dim_u(), psi.dim_v());
        let step = if n >= 0 { a.clone() } else { hinv(&a, &psi).unwrap() };
        for _ in 0..n.unsigned_abs() {
            acc = hmul(&acc, &step, &psi).unwrap();
        }
        prop_assert_eq!(acc, p);
    }

    /// Raising to `p·n` with `n` prime to `p` lowers the p-order by one.
    #[test]
    fn p_order_drops_under_p_powers(
        (psi, a, _, _) in setup(),
        p in prop::sample::select(vec![2u64, 3, 5]),
        n in prop::sample::select(vec![1i64, -1, 7, -11, 13]),
    ) {
        let dim = psi.dim_w();
        prop_assume!(dim > 0);
        let l = QLattice::standard(dim);
        let m = p_order_in_lattice(&a.flat(), &l, p).unwrap();
        prop_assume!(m >= 1 && n.rem_euclid(p as i64) != 0);
        let w = hpow(&a, p as i64 * n, &psi).unwrap();
        prop_assert_eq!(p_order_in_lattice(&w.flat(), &l, p).unwrap(), m - 1);
    }

    #[test]
    fn non_alternating_forms_are_rejected(dv in 1usize..=4, i in 0usize..4, j in 0usize..4, x in q()) {
        prop_assume!(i < dv && j < dv && !x.is_zero());
        let mut t = vec![vec![vec![BigRational::zero(); dv]; dv]];
        t[0][i][j] = x;
        prop_assert!(matches!(PolarizationForm::new(1, dv, t), Err(Error::NonAlternatingForm { .. })), "accepted");
    }
}
