use std::collections::HashMap;

use cuspform::ratpoly::{ratio, Monomial, Poly, Rational, Var};
use proptest::prelude::*;

const VARS: [Var; 4] = [Var::X1, Var::X2, Var::T1, Var::Q];

fn poly() -> impl Strategy<Value = Poly> {
    prop::collection::vec((prop::array::uniform4(0i32..3), -9i64..=9, 1i64..=9), 0..5).prop_map(
        |terms| {
            Poly::from_terms(terms.into_iter().map(|(e, n, d)| {
                // q may carry negative powers
                let m = Monomial::from_pairs([
                    (VARS[0], e[0]),
                    (VARS[1], e[1]),
                    (VARS[2], e[2]),
                    (VARS[3], e[3] - 1),
                ]);
                (m, ratio(n, d))
            }))
        },
    )
}

fn rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_axioms(p in poly(), q in poly(), r in poly()) {
        prop_assert_eq!(&(&p + &q) + &r, &p + &(&q + &r));
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        prop_assert_eq!(&p * &q, &q * &p);
        prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
        prop_assert!((&p - &p).is_zero());
        prop_assert_eq!(&p * &Poly::one(), p.clone());
    }

    #[test]
    fn leibniz(p in poly(), q in poly()) {
        for v in VARS {
            prop_assert_eq!((&p * &q).derivative(v), &(&p.derivative(v) * &q) + &(&p * &q.derivative(v)));
            prop_assert_eq!((&p * &q).log_derivative(v), &(&p.log_derivative(v) * &q) + &(&p * &q.log_derivative(v)));
        }
    }

    #[test]
    fn substitution_is_a_homomorphism(p in poly(), q in poly(), r in poly()) {
        let bind: HashMap<Var, Poly> = [(Var::X1, r), (Var::T1, Poly::var(Var::X2) + Poly::int(1))].into_iter().collect();
        let lhs = (&p * &q).substitute(&bind).unwrap();
        let rhs = &p.substitute(&bind).unwrap() * &q.substitute(&bind).unwrap();
        prop_assert_eq!(lhs, rhs);
        let sum = (&p + &q).substitute(&bind).unwrap();
        prop_assert_eq!(sum, &p.substitute(&bind).unwrap() + &q.substitute(&bind).unwrap());
    }

    #[test]
    fn evaluation_is_a_homomorphism(p in poly(), q in poly(), a in rational(), b in rational(), c in rational(), d in rational()) {
        prop_assume!(d != ratio(0, 1));
        let pt: HashMap<Var, Rational> = [(Var::X1, a), (Var::X2, b), (Var::T1, c), (Var::Q, d)].into_iter().collect();
        prop_assert_eq!((&p * &q).eval(&pt).unwrap(), p.eval(&pt).unwrap() * q.eval(&pt).unwrap());
    }

    #[test]
    fn print_parse_fixpoint(p in poly()) {
        let text = p.to_string();
        let back: Poly = text.parse().unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(back.to_string(), text);
    }
}

#[test]
fn parse_errors() {
    assert!("x4".parse::<Poly>().is_err());
    assert!("x1^-1".parse::<Poly>().is_err());
    assert!("1/0".parse::<Poly>().is_err());
    assert!("x1 +".parse::<Poly>().is_err());
    assert_eq!("q^-2*x1".parse::<Poly>().unwrap().min_exp(Var::Q), -2);
}
