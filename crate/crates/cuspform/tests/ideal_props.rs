use cuspform::ideal::{self, MonomialOrder};
use cuspform::ratpoly::{ratio, Poly, Rational, Var};
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
    (0..4)
        .map(|_| {
            let m = cuspform::ratpoly::Monomial::from_pairs(
                (1..=3).map(|i| (Var::x(i), rng.gen_range(0..4))),
            );
            Poly::term(rr(rng, false), m)
        })
        .sum()
}

#[test]
fn cusp_ring_has_rank_mu_for_random_q() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for a in [
        TripletA::new(2, 3, 3).unwrap(),
        TripletA::new(2, 3, 4).unwrap(),
        TripletA::new(2, 3, 5).unwrap(),
    ] {
        for _ in 0..10 {
            let q = rr(&mut rng, true);
            let jr = unfolding::jacobi_ring(
                &unfolding::universal_unfolding(&a),
                Var::SM,
                &unfolding::origin_with_sm(&a, q),
            )
            .unwrap();
            assert_eq!(jr.dim(), a.mu());
        }
    }
}

#[test]
fn normal_form_is_idempotent_and_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let a = TripletA::new(2, 3, 4).unwrap();
    let jr = unfolding::jacobi_ring(
        &unfolding::universal_unfolding(&a),
        Var::SM,
        &random_point(&a, &mut rng),
    )
    .unwrap();
    for _ in 0..30 {
        let (f, g) = (random_x_poly(&mut rng), random_x_poly(&mut rng));
        let nf = jr.ring.normal_form(&f).unwrap();
        assert_eq!(jr.ring.normal_form(&nf).unwrap(), nf);
        let lhs = jr.ring.normal_form(&(&f * &g)).unwrap();
        let rhs = jr
            .ring
            .normal_form(&(&nf * &jr.ring.normal_form(&g).unwrap()))
            .unwrap();
        assert_eq!(lhs, rhs);
        assert!(jr.ring.gb().contains(&(&f - &nf)).unwrap());
    }
    jr.ring.check_tables().unwrap();
}

#[test]
fn specializing_before_or_after_reduction_agrees() {
    // Generators with s kept symbolic reduce to the same class once s is fixed.
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let a = TripletA::new(2, 3, 3).unwrap();
    let f = unfolding::universal_unfolding(&a);
    for _ in 0..5 {
        let p = random_point(&a, &mut rng);
        let jr = unfolding::jacobi_ring(&f, Var::SM, &p).unwrap();
        let h = &f.derivative(Var::S1) * &f.log_derivative(Var::SM);
        let direct = jr.coords_at(&h, &p).unwrap();
        let staged = jr
            .ring
            .coords(
                &(&f.derivative(Var::S1).specialize(&p).unwrap()
                    * &f.log_derivative(Var::SM).specialize(&p).unwrap()),
            )
            .unwrap();
        assert_eq!(direct, staged);
        assert_eq!(jr.dim(), a.mu());
    }
}

#[test]
fn reduced_basis_is_order_specific_but_rank_is_not() {
    let a = TripletA::new(2, 3, 5).unwrap();
    let p = unfolding::origin_with_sm(&a, ratio(3, 2));
    let f = unfolding::universal_unfolding(&a);
    let permuted = MonomialOrder::grevlex(&[Var::X3, Var::X1, Var::X2]).unwrap();
    let j1 = unfolding::jacobi_ring(&f, Var::SM, &p).unwrap();
    let j2 = unfolding::jacobi_ring_with_order(&f, Var::SM, &p, &permuted).unwrap();
    assert_eq!(j1.dim(), j2.dim());
    assert!(j2.ring.gb().is_groebner());
    for g in j1.ring.gb().generators() {
        assert!(j2.ring.gb().contains(&g).unwrap());
    }
}

#[test]
fn positive_dimensional_ideal_is_rejected() {
    let gb = ideal::buchberger(
        &["x1*x2".parse().unwrap(), "x1*x3".parse().unwrap()],
        &MonomialOrder::x(),
    )
    .unwrap();
    assert!(ideal::quotient_ring(&gb).is_err());
}
