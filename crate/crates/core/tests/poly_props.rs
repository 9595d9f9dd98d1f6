//! Ring laws, evaluation and parser invariants on random small polynomials.

use holonoid::poly::{ratio, PolyVector, Polynomial, QMatrix, Rational};
use num_traits::Zero;
use proptest::prelude::*;

const NVARS: usize = 3;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn small_poly() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..=2, NVARS), small_rational()), 0..5)
        .prop_map(|terms| Polynomial::from_terms(NVARS, terms).unwrap())
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(small_rational(), NVARS)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distributive_and_commutative(p in small_poly(), q in small_poly(), r in small_poly()) {
        prop_assert_eq!(&(&p + &q) * &r, &(&p * &r) + &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert!((&(&p - &q) + &q - p.clone()).is_zero());
    }

    #[test]
    fn evaluation_is_a_ring_morphism(p in small_poly(), q in small_poly(), x in point()) {
        let pq = (&p * &q).eval(&x).unwrap();
        prop_assert_eq!(pq, p.eval(&x).unwrap() * q.eval(&x).unwrap());
        let sum = (&p + &q).eval(&x).unwrap();
        prop_assert_eq!(sum, p.eval(&x).unwrap() + q.eval(&x).unwrap());
    }

    #[test]
    fn print_parse_fixpoint(p in small_poly()) {
        let text = p.to_string();
        let back = Polynomial::parse(&text, NVARS).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn nullspace_vectors_annihilate(entries in prop::collection::vec(-3i64..=3, 12)) {
        let m = QMatrix::from_entries(3, 4, entries.iter().map(|&v| ratio(v, 1)).collect()).unwrap();
        let basis = m.nullspace();
        prop_assert_eq!(basis.len(), 4 - m.rank());
        for v in &basis {
            prop_assert!(m.mul_vec(v).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn derivative_obeys_product_rule(p in small_poly(), q in small_poly(), var in 0usize..NVARS) {
        let lhs = (&p * &q).diff(var).unwrap();
        let rhs = &(&p.diff(var).unwrap() * &q) + &(&p * &q.diff(var).unwrap());
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn poly_vector_shapes_are_checked() {
    let a = PolyVector::parse(&["x0", "1"], 2).unwrap();
    let b = PolyVector::parse(&["x1"], 2).unwrap();
    assert!(a.add(&b).is_err());
    assert!(PolyVector::new(2, vec![Polynomial::zero(3)]).is_err());
    assert_eq!(a.to_string(), "(x0, 1)");
}
