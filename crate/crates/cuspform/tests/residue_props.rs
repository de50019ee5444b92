use cuspform::ideal::MonomialOrder;
use cuspform::linalg;
use cuspform::ratpoly::{rat, ratio, Poly, Rational, Var};
use cuspform::residue::{self, xyz, ResidueFunctional, ResiduePoint};
use cuspform::unfolding::{self, Point, TripletA};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rr(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let n: i64 = rng.gen_range(-9..=9);
        if !(nonzero && n == 0) {
            return ratio(n, rng.gen_range(1..=9));
        }
    }
}

fn random_point(a: &TripletA, rng: &mut ChaCha8Rng) -> Point {
    let mut p: Point = a
        .s_vars()
        .into_iter()
        .map(|v| (v, rr(rng, false)))
        .collect();
    p.insert(Var::SM, rr(rng, true));
    p
}

fn random_x_poly(rng: &mut ChaCha8Rng) -> Poly {
    (0..5)
        .map(|_| {
            let m = cuspform::ratpoly::Monomial::from_pairs(
                (1..=3).map(|i| (Var::x(i), rng.gen_range(0..4))),
            );
            Poly::term(rr(rng, false), m)
        })
        .sum()
}

fn triplets() -> Vec<TripletA> {
    vec![
        TripletA::new(2, 3, 3).unwrap(),
        TripletA::new(2, 3, 4).unwrap(),
        TripletA::new(2, 3, 5).unwrap(),
    ]
}

/// Lagrange interpolation evaluated at `x`.
fn interpolate(xs: &[Rational], ys: &[Rational], x: &Rational) -> Rational {
    let mut total = rat(0);
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut term = yi.clone();
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                term = term * (x - xj) / (xi - xj);
            }
        }
        total += term;
    }
    total
}

#[test]
fn gram_is_symmetric_and_invertible() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for a in triplets() {
        for _ in 0..10 {
            let jr = unfolding::jacobi_ring(
                &unfolding::universal_unfolding(&a),
                Var::SM,
                &random_point(&a, &mut rng),
            )
            .unwrap();
            let g = ResidueFunctional::for_jacobi(&jr).unwrap().gram();
            assert!(linalg::is_symmetric(&g));
            assert_ne!(linalg::determinant(&g), rat(0));
        }
    }
}

#[test]
fn residue_of_jacobian_multiple_is_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for a in triplets() {
        let rp = ResiduePoint::unfolding(&a, &random_point(&a, &mut rng)).unwrap();
        let (l, r) = rp.trace_oracle(&Poly::one()).unwrap();
        assert_eq!(l, r);
        assert_eq!(r, rat(a.mu() as i64));
        for _ in 0..20 {
            let (l, r) = rp.trace_oracle(&random_x_poly(&mut rng)).unwrap();
            assert_eq!(l, r);
        }
    }
}

#[test]
fn top_residue_interpolates_to_cube() {
    for a in triplets() {
        let sms: Vec<Rational> = [1, 2, -3, 5, 7].iter().map(|&n| ratio(n, 2)).collect();
        let ys: Vec<Rational> = sms
            .iter()
            .map(|sm| {
                residue::grothendieck_residue(
                    &xyz(),
                    &a,
                    &unfolding::origin_with_sm(&a, sm.clone()),
                )
                .unwrap()
            })
            .collect();
        for x in [rat(0), rat(4), ratio(-7, 3), rat(10)] {
            assert_eq!(interpolate(&sms, &ys, &x), &x * &x * &x);
        }
    }
}

#[test]
fn residue_does_not_depend_on_monomial_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let permuted = MonomialOrder::grevlex(&[Var::X2, Var::X3, Var::X1]).unwrap();
    for a in triplets() {
        let p = random_point(&a, &mut rng);
        let f = unfolding::universal_unfolding(&a);
        let r1 = ResiduePoint::new(&f, Var::SM, &p).unwrap();
        let r2 = ResiduePoint::with_order(&f, Var::SM, &p, &permuted).unwrap();
        assert_ne!(r1.jacobi.ring.basis(), r2.jacobi.ring.basis());
        for _ in 0..10 {
            let h = random_x_poly(&mut rng);
            assert_eq!(r1.residue(&h).unwrap(), r2.residue(&h).unwrap());
        }
    }
}

#[test]
fn pairing_is_symmetric_and_k0_is_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for a in triplets() {
        let f = unfolding::universal_unfolding(&a);
        for _ in 0..5 {
            let rp = ResiduePoint::unfolding(&a, &random_point(&a, &mut rng)).unwrap();
            let (u, v) = (random_x_poly(&mut rng), random_x_poly(&mut rng));
            assert_eq!(rp.pairing_j(&u, &v).unwrap(), rp.pairing_j(&v, &u).unwrap());
            assert_eq!(rp.k0(&f.log_derivative(Var::SM)).unwrap(), rat(1));
        }
    }
}
