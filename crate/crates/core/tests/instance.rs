use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

use orbitbound::fields::AbelianFieldSpec;
use orbitbound::heisenberg::{HeisenbergElement, PolarizationForm};
use orbitbound::instance::Instance;
use orbitbound::invariants::{ActionBlock, BoundConstants, LevelSpec, SubvarietyDatum};
use orbitbound::torus::{CharacterSpec, TorusSpec};
use orbitbound::Error;

fn q() -> impl Strategy<Value = BigRational> {
    (-30i64..=30, 1i64..=16).prop_map(|(a, b)| BigRational::new(a.into(), b.into()))
}

fn instance() -> impl Strategy<Value = Instance> {
    let tori = vec![
        TorusSpec::split(1),
        TorusSpec::split(2),
        TorusSpec::weil(AbelianFieldSpec::quadratic(-7).unwrap()),
        TorusSpec::weil(AbelianFieldSpec::cyclotomic(5).unwrap()),
    ];
    (prop::sample::select(tori), 1usize..=3).prop_flat_map(|(t, n)| {
        let slots = t.character_slots();
        let chi = prop::collection::vec(-3i64..=3, slots)
            .prop_filter("nontrivial", |e| e.iter().any(|&x| x != 0))
            .prop_map(CharacterSpec::new);
        (
            Just(t),
            prop::collection::vec(chi, n),
            prop::collection::vec(q(), n),
            prop::option::of(0..n),
            prop::option::of((prop::sample::select(vec![2u64, 3, 5]), 1u32..=3)),
            (q(), 1u32..=4),
        )
            .prop_map(|(t, chars, w, wp, level, (b, nn))| {
                let n = chars.len();
                let action =
                    chars.into_iter().enumerate().map(|(i, c)| ActionBlock { coords: vec![i], character: c }).collect();
                let w_prime = wp.map(|i| {
                    let mut e = vec![BigRational::zero(); n];
                    e[i] = BigRational::one();
                    vec![e]
                });
                let datum = SubvarietyDatum::new(
                    t,
                    PolarizationForm::zero(n, 0),
                    action,
                    HeisenbergElement::new(w, vec![]),
                    w_prime,
                )
                .unwrap();
                let mut lv = LevelSpec::maximal(n);
                if let Some((p, d)) = level {
                    lv = lv.with_exception(p, None, d).unwrap();
                }
                let b = if b.is_zero() { BigRational::one() } else { b.abs() };
                let constants = BoundConstants { b, n: nn, ..BoundConstants::default() };
                Instance { datum, level: lv, constants }
            })
    })
}

proptest! {
    #[test]
    fn canonical_text_round_trips(inst in instance()) {
        let text = inst.to_text();
        let back = Instance::parse(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(back.to_text(), text);
    }
}

#[test]
fn heisenberg_instance_parses() {
    let text = "\
[torus]
factor split 1
[psi]
dim_u 1
dim_v 2
alt 0 0 1 1
[action]
block 0 : 2
block 1,2 : 1
[w]
u 1/3
v 1/4 0
";
    let inst = Instance::parse(text).unwrap();
    assert_eq!(inst.datum.dim_w(), 3);
    assert_eq!(Instance::parse(&inst.to_text()).unwrap(), inst);
}

#[test]
fn errors_carry_line_numbers() {
    for (text, line) in [
        ("[torus]\nfactor split 1\n[psi]\ndim_u x\n", 4),
        ("[torus]\nfactor split 1\n[torus]\n", 3),
        ("[torus]\nfactor banana\n", 2),
        ("[nope]\n", 1),
    ] {
        match Instance::parse(text) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}
