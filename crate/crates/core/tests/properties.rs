//! Property tests for the algebraic invariants that hold on all inputs, not
//! just seeded samples.

use proptest::prelude::*;

use charp_core::fields::PBasisField;
use charp_core::finab::lattice::{self, Mat};
use charp_core::finab::QZ;
use charp_core::poly::MPoly;
use charp_core::ratfn::RatFn;

fn small_field() -> PBasisField {
    PBasisField::rational(3, 1).unwrap()
}

/// A rational function from integer-coefficient polynomial data.
fn ratfn_strategy() -> impl Strategy<Value = RatFn> {
    let coeffs = proptest::collection::vec(-4i64..5, 1..4);
    (coeffs.clone(), coeffs).prop_map(|(num, den)| {
        let k = small_field();
        let fq = k.fq();
        let poly = |cs: &[i64]| {
            let mut acc = MPoly::zero();
            for (e, &c) in cs.iter().enumerate() {
                let term = MPoly::monomial(fq, vec![e as u32], fq.from_int(c));
                acc = acc.add(fq, &term);
            }
            acc
        };
        let d = {
            let cand = poly(&den);
            if cand.is_zero() {
                MPoly::one(fq, 1)
            } else {
                cand
            }
        };
        RatFn::new(fq, poly(&num), d).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(a in ratfn_strategy(), b in ratfn_strategy(), c in ratfn_strategy()) {
        let k = small_field();
        // associativity and commutativity
        prop_assert_eq!(k.add(&k.add(&a, &b), &c), k.add(&a, &k.add(&b, &c)));
        prop_assert_eq!(k.mul(&a, &b), k.mul(&b, &a));
        // distributivity
        prop_assert_eq!(
            k.mul(&a, &k.add(&b, &c)),
            k.add(&k.mul(&a, &b), &k.mul(&a, &c))
        );
        // inverse law
        if !a.is_zero() {
            prop_assert_eq!(k.mul(&a, &k.inv(&a).unwrap()), k.one());
        }
    }

    #[test]
    fn frobenius_and_decomposition(a in ratfn_strategy(), b in ratfn_strategy()) {
        let k = small_field();
        prop_assert_eq!(
            k.frobenius(&k.add(&a, &b)),
            k.add(&k.frobenius(&a), &k.frobenius(&b))
        );
        prop_assert_eq!(k.pth_root(&k.frobenius(&a)).unwrap(), a.clone());
        // reconstruction identity
        let dec = k.p_monomial_decompose(&a);
        prop_assert_eq!(dec.reconstruct(&k), a);
    }

    #[test]
    fn poly_gcd_divides_both(
        a in proptest::collection::vec(-3i64..4, 1..4),
        b in proptest::collection::vec(-3i64..4, 1..4),
    ) {
        let k = small_field();
        let fq = k.fq();
        let poly = |cs: &[i64]| {
            let mut acc = MPoly::zero();
            for (e, &c) in cs.iter().enumerate() {
                acc = acc.add(fq, &MPoly::monomial(fq, vec![e as u32], fq.from_int(c)));
            }
            acc
        };
        let (pa, pb) = (poly(&a), poly(&b));
        let g = MPoly::gcd(fq, &pa, &pb);
        if !pa.is_zero() {
            prop_assert!(pa.try_div(fq, &g).is_some());
        }
        if !pb.is_zero() {
            prop_assert!(pb.try_div(fq, &g).is_some());
        }
    }

    #[test]
    fn snf_transforms_are_exact(
        rows in 1usize..4,
        cols in 1usize..4,
        entries in proptest::collection::vec(-9i128..10, 16),
    ) {
        let m: Mat = (0..rows)
            .map(|i| (0..cols).map(|j| entries[i * cols + j]).collect())
            .collect();
        let s = lattice::snf(&m);
        prop_assert_eq!(
            lattice::mat_mul(&lattice::mat_mul(&s.u, &m), &s.v),
            s.d.clone()
        );
        prop_assert_eq!(lattice::mat_mul(&s.u, &s.u_inv), lattice::identity(rows));
        prop_assert_eq!(lattice::mat_mul(&s.v, &s.v_inv), lattice::identity(cols));
        let diag = s.diag();
        for w in diag.windows(2) {
            if w[0] != 0 {
                prop_assert_eq!(w[1] % w[0], 0);
            } else {
                prop_assert_eq!(w[1], 0);
            }
        }
    }

    #[test]
    fn qz_is_a_torsion_group(a in 0i128..60, b in 1i128..60, c in 0i128..60, d in 1i128..60) {
        let x = QZ::new(a, b);
        let y = QZ::new(c, d);
        prop_assert_eq!(x.add(&y), y.add(&x));
        prop_assert_eq!(x.add(&x.neg()), QZ::zero());
        // canonical form: reduced with 0 <= num < den
        prop_assert!(x.num() >= 0 && x.num() < x.den());
        prop_assert_eq!(x.scale(b), QZ::zero());
        // parse . text is the identity
        prop_assert_eq!(QZ::parse(&x.text()), Some(x));
    }

    #[test]
    fn element_text_roundtrip(a in ratfn_strategy()) {
        let k = small_field();
        let text = k.format(&a);
        prop_assert_eq!(k.parse(&text).unwrap(), a);
    }
}
