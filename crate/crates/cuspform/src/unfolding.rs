//! Cusp polynomials, their universal unfoldings, Euler grading, Jacobi rings
//! at parameter points and the limit algebra.

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::ideal::{self, IdealError, MonomialOrder, QuotientRing};
use crate::linalg;
use crate::ratpoly::{rat, rat_pow, ratio, Monomial, Poly, PolyError, Rational, Registry, Var};

/// Rational values for parameter variables.
pub type Point = HashMap<Var, Rational>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnfoldingError {
    #[error("invalid triplet: {0}")]
    InvalidTriplet(String),
    #[error("parameter `{0}` must be nonzero")]
    ZeroParameter(String),
    #[error("parameter `{0}` is unbound")]
    UnboundParameter(String),
    #[error("Kodaira-Spencer images are linearly dependent at this point")]
    KodairaSpencerDegenerate,
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Exponent triple `(a1, a2, a3)` with `a1 <= a2 <= a3`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct TripletA {
    a: [u32; 3],
}

impl TripletA {
    pub fn new(a1: u32, a2: u32, a3: u32) -> Result<Self, UnfoldingError> {
        let a = [a1, a2, a3];
        if a.iter().any(|&x| x == 0 || x > 10) {
            return Err(UnfoldingError::InvalidTriplet(format!(
                "{a1},{a2},{a3}: entries must lie in 1..=10"
            )));
        }
        if !(a1 <= a2 && a2 <= a3) {
            return Err(UnfoldingError::InvalidTriplet(format!(
                "{a1},{a2},{a3}: entries must be non-decreasing"
            )));
        }
        Ok(TripletA { a })
    }

    /// Parses `"a1,a2,a3"`.
    pub fn parse(text: &str) -> Result<Self, UnfoldingError> {
        let parts: Vec<u32> = text
            .split(',')
            .map(|s| s.trim().parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|_| UnfoldingError::InvalidTriplet(text.to_string()))?;
        match parts.as_slice() {
            [a1, a2, a3] => TripletA::new(*a1, *a2, *a3),
            _ => Err(UnfoldingError::InvalidTriplet(text.to_string())),
        }
    }

    pub fn a(&self) -> [u32; 3] {
        self.a
    }

    pub fn ai(&self, i: usize) -> u32 {
        self.a[i - 1]
    }

    pub fn mu(&self) -> usize {
        (self.a[0] + self.a[1] + self.a[2] - 1) as usize
    }

    pub fn chi(&self) -> Rational {
        self.a.iter().map(|&x| ratio(1, x as i64)).sum::<Rational>() - rat(1)
    }

    pub fn is_affine(&self) -> bool {
        self.chi().is_positive()
    }

    pub fn registry(&self) -> Registry {
        Registry::for_exponents(self.a)
    }

    /// `(i, j)` pairs of the middle directions in flat order.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        (1..=3)
            .flat_map(|i| (1..self.ai(i) as usize).map(move |j| (i, j)))
            .collect()
    }

    /// `s1, s11, ..., s3(a3-1), sm`.
    pub fn s_vars(&self) -> Vec<Var> {
        let mut v = vec![Var::S1];
        v.extend(self.blocks().into_iter().map(|(i, j)| Var::s(i, j)));
        v.push(Var::SM);
        v
    }

    /// `t1, t11, ..., t3(a3-1), tm`.
    pub fn t_vars(&self) -> Vec<Var> {
        let mut v = vec![Var::T1];
        v.extend(self.blocks().into_iter().map(|(i, j)| Var::t(i, j)));
        v.push(Var::TM);
        v
    }

    pub fn euler_degrees(&self) -> EulerDegrees {
        let mut deg = HashMap::new();
        deg.insert(Var::S1, rat(1));
        deg.insert(Var::T1, rat(1));
        for (i, j) in self.blocks() {
            let ai = self.ai(i) as i64;
            let d = ratio(ai - j as i64, ai);
            deg.insert(Var::s(i, j), d.clone());
            deg.insert(Var::t(i, j), d);
        }
        deg.insert(Var::SM, self.chi());
        deg.insert(Var::Q, self.chi());
        for i in 1..=3 {
            deg.insert(Var::x(i), ratio(1, self.ai(i) as i64));
        }
        EulerDegrees {
            deg,
            chi: self.chi(),
        }
    }

    /// Affine triplets with `a3 <= 5`.
    pub fn affine_list() -> Vec<TripletA> {
        let mut out = Vec::new();
        for a1 in 1..=5 {
            for a2 in a1..=5 {
                for a3 in a2..=5 {
                    let t = TripletA::new(a1, a2, a3).expect("in range");
                    if t.is_affine() {
                        out.push(t);
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for TripletA {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a[0], self.a[1], self.a[2])
    }
}

/// Weights of the Euler field on deformation variables and on `x`.
#[derive(Clone, Debug)]
pub struct EulerDegrees {
    deg: HashMap<Var, Rational>,
    chi: Rational,
}

impl EulerDegrees {
    pub fn of(&self, v: Var) -> Option<&Rational> {
        self.deg.get(&v)
    }

    /// Weighted degree of a monomial; `x` counted only if `with_x`, `tm` never.
    pub fn monomial_degree(&self, m: &Monomial, with_x: bool) -> Rational {
        let mut d = Rational::zero();
        for &(v, e) in m.pairs() {
            if v.is_x() && !with_x {
                continue;
            }
            if let Some(w) = self.deg.get(&v) {
                d += w * rat(e as i64);
            }
        }
        d
    }

    /// `E p` with `E = sum deg(v) v d/dv + chi d/dtm` over deformation variables.
    pub fn apply(&self, p: &Poly) -> Poly {
        self.apply_with(p, false)
    }

    /// As `apply`, also weighting `x_i` by `1/a_i`.
    pub fn apply_with(&self, p: &Poly, with_x: bool) -> Poly {
        let graded = Poly::from_terms(
            p.terms()
                .iter()
                .map(|(m, c)| (m.clone(), c * self.monomial_degree(m, with_x))),
        );
        &graded + &p.derivative(Var::TM).scale(&self.chi)
    }

    /// `Some(l)` when every monomial has degree `l` (ignoring `x`).
    pub fn degree_of(&self, p: &Poly) -> Degree {
        let per: Vec<(Monomial, Rational)> = p
            .terms()
            .iter()
            .map(|(m, _)| (m.clone(), self.monomial_degree(m, false)))
            .collect();
        match per.first() {
            None => Degree::Homogeneous(Rational::zero()),
            Some((_, d0)) if per.iter().all(|(m, d)| d == d0 && m.exp(Var::TM) == 0) => {
                Degree::Homogeneous(d0.clone())
            }
            _ => Degree::Mixed(per),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Degree {
    Homogeneous(Rational),
    Mixed(Vec<(Monomial, Rational)>),
}

/// `q` either symbolic or fixed to a nonzero rational.
#[derive(Clone, Debug)]
pub enum QValue {
    Symbolic,
    Value(Rational),
}

/// `x1^a1 + x2^a2 + x3^a3 - q^-1 x1 x2 x3`.
pub fn cusp_polynomial(a: &TripletA, q: &QValue) -> Result<Poly, UnfoldingError> {
    let qinv = match q {
        QValue::Symbolic => Poly::var_pow(Var::Q, -1),
        QValue::Value(v) if v.is_zero() => return Err(UnfoldingError::ZeroParameter("q".into())),
        QValue::Value(v) => Poly::constant(v.recip()),
    };
    Ok(leading_part(a) - qinv * xyz())
}

fn xyz() -> Poly {
    Poly::term(
        rat(1),
        Monomial::from_pairs([(Var::X1, 1), (Var::X2, 1), (Var::X3, 1)]),
    )
}

fn leading_part(a: &TripletA) -> Poly {
    (1..=3)
        .map(|i| Poly::var_pow(Var::x(i), a.ai(i) as i32))
        .sum()
}

/// `F_A = x1^a1 + x2^a2 + x3^a3 - sm^-1 x1x2x3 + s1 + sum s_ij x_i^j`.
pub fn universal_unfolding(a: &TripletA) -> Poly {
    let mut parts = vec![
        leading_part(a),
        -(Poly::var_pow(Var::SM, -1) * xyz()),
        Poly::var(Var::S1),
    ];
    for (i, j) in a.blocks() {
        parts.push(Poly::term(
            rat(1),
            Monomial::from_pairs([(Var::s(i, j), 1), (Var::x(i), j as i32)]),
        ));
    }
    parts.into_iter().sum()
}

/// `sum_i (1/a_i) x_i dF/dx_i`.
pub fn x_euler_part(a: &TripletA, f: &Poly) -> Poly {
    (1..=3)
        .map(|i| (Poly::var(Var::x(i)) * f.derivative(Var::x(i))).scale(&ratio(1, a.ai(i) as i64)))
        .sum()
}

/// `F - E F - sum (1/a_i) x_i dF/dx_i`; zero exactly when the Euler identity holds.
pub fn euler_identity_residual(a: &TripletA, f: &Poly) -> Poly {
    let ef = a.euler_degrees().apply(f);
    f - &ef - x_euler_part(a, f)
}

/// Generators of the limit ideal `(x2x3, x3x1, x1x2, a1x1^a1 - a2x2^a2, a2x2^a2 - a3x3^a3)`.
pub fn limit_ideal_generators(a: &TripletA) -> Vec<Poly> {
    let pw = |i: usize| Poly::var_pow(Var::x(i), a.ai(i) as i32).scale(&rat(a.ai(i) as i64));
    let m = |i: usize, j: usize| {
        Poly::term(
            rat(1),
            Monomial::from_pairs([(Var::x(i), 1), (Var::x(j), 1)]),
        )
    };
    vec![m(2, 3), m(3, 1), m(1, 2), pw(1) - pw(2), pw(2) - pw(3)]
}

pub fn limit_algebra(a: &TripletA) -> Result<QuotientRing, UnfoldingError> {
    let gb = ideal::buchberger(&limit_ideal_generators(a), &MonomialOrder::x())?;
    Ok(ideal::quotient_ring(&gb)?)
}

/// `sm * dF/dx_a` for `a = 1, 2, 3` followed by `H_1`, `H_2`.
pub fn extended_relations(a: &TripletA) -> Vec<Poly> {
    let f = universal_unfolding(a);
    let mut out: Vec<Poly> = (1..=3)
        .map(|i| f.derivative(Var::x(i)).clear_laurent(Var::SM).0)
        .collect();
    for i in 1..=2 {
        let side = |k: usize| -> Poly {
            let ak = a.ai(k) as i64;
            let mut p = Poly::var_pow(Var::x(k), ak as i32).scale(&rat(ak));
            for j in 1..ak as usize {
                p = p + Poly::term(
                    rat(j as i64),
                    Monomial::from_pairs([(Var::s(k, j), 1), (Var::x(k), j as i32)]),
                );
            }
            p
        };
        out.push(side(i) - side(i + 1));
    }
    out
}

/// Whether `{sm dF/dx_a, H_1, H_2}` at `s = 0, sm = 0` generates the limit ideal.
pub fn extended_relations_match_limit(a: &TripletA) -> Result<bool, UnfoldingError> {
    let zero: Point = a
        .s_vars()
        .into_iter()
        .map(|v| (v, Rational::zero()))
        .collect();
    let rels = extended_relations(a)
        .iter()
        .map(|p| p.specialize(&zero))
        .collect::<Result<Vec<_>, _>>()?;
    let order = MonomialOrder::x();
    let g1 = ideal::buchberger(&rels, &order)?;
    let g2 = ideal::buchberger(&limit_ideal_generators(a), &order)?;
    Ok(g1.generators() == g2.generators())
}

/// Jacobi ring of `f` at a parameter point.
#[derive(Clone, Debug)]
pub struct JacobiRing {
    /// `v^k dF/dx_a` specialized, with `v` the Laurent variable.
    pub generators: [Poly; 3],
    /// Unspecialized partials `dF/dx_a`.
    pub partials: [Poly; 3],
    pub ring: QuotientRing,
    /// `value(v)^(k1+k2+k3)`: residues against `dF/dx` equal this times those against `generators`.
    pub compensation: Rational,
    pub laurent_value: Rational,
}

/// Builds the Jacobi ring of `f` (in `x` and parameters), clearing powers of
/// `laurent` from each partial before specializing at `values`.
pub fn jacobi_ring(f: &Poly, laurent: Var, values: &Point) -> Result<JacobiRing, UnfoldingError> {
    jacobi_ring_with_order(f, laurent, values, &MonomialOrder::x())
}

pub fn jacobi_ring_with_order(
    f: &Poly,
    laurent: Var,
    values: &Point,
    order: &MonomialOrder,
) -> Result<JacobiRing, UnfoldingError> {
    let lv = values
        .get(&laurent)
        .ok_or_else(|| UnfoldingError::UnboundParameter(laurent.name()))?
        .clone();
    if lv.is_zero() {
        return Err(UnfoldingError::ZeroParameter(laurent.name()));
    }
    let mut gens = Vec::with_capacity(3);
    let mut partials = Vec::with_capacity(3);
    let mut k_total = 0;
    for i in 1..=3 {
        let d = f.derivative(Var::x(i));
        let (cleared, k) = d.clear_laurent(laurent);
        k_total += k;
        let g = cleared.specialize(values)?;
        if let Some(v) = g.vars().into_iter().find(|v| !v.is_x()) {
            return Err(UnfoldingError::UnboundParameter(v.name()));
        }
        gens.push(g);
        partials.push(d);
    }
    let gb = ideal::buchberger(&gens, order)?;
    let ring = ideal::quotient_ring(&gb)?;
    let generators: [Poly; 3] = gens.try_into().expect("three generators");
    let partials: [Poly; 3] = partials.try_into().expect("three partials");
    Ok(JacobiRing {
        generators,
        partials,
        ring,
        compensation: rat_pow(&lv, k_total),
        laurent_value: lv,
    })
}

impl JacobiRing {
    pub fn dim(&self) -> usize {
        self.ring.dim()
    }

    /// Coordinates of `p`, which may still mention parameters bound in `values`.
    pub fn coords_at(&self, p: &Poly, values: &Point) -> Result<Vec<Rational>, UnfoldingError> {
        Ok(self.ring.coords(&p.specialize(values)?)?)
    }
}

/// Structure constants `c[i][j][k]` of the product induced by the images `delta_i F`.
pub type Tensor3 = Vec<Vec<Vec<Rational>>>;

/// Solves `NF(img_i * img_j) = sum_k c_ij^k NF(img_k)`.
pub fn product_from_images(
    jr: &JacobiRing,
    images: &[Vec<Rational>],
) -> Result<Tensor3, UnfoldingError> {
    let n = images.len();
    let columns = linalg::transpose(&images.to_vec());
    let inv = linalg::inverse(&columns).ok_or(UnfoldingError::KodairaSpencerDegenerate)?;
    let mut c = vec![vec![Vec::new(); n]; n];
    for i in 0..n {
        for j in i..n {
            let prod = jr.ring.mul_coords(&images[i], &images[j]);
            let sol = linalg::mul_vec(&inv, &prod);
            c[i][j] = sol.clone();
            c[j][i] = sol;
        }
    }
    Ok(c)
}

/// Images `dF/ds_v` of the deformation frame `s1, s_ij, sm`.
pub fn s_frame_images(a: &TripletA) -> Vec<Poly> {
    let f = universal_unfolding(a);
    a.s_vars().into_iter().map(|v| f.derivative(v)).collect()
}

/// Kodaira-Spencer structure constants in the `s` frame at `values` (all `s` and `sm` bound).
pub fn kodaira_spencer_product(a: &TripletA, values: &Point) -> Result<Tensor3, UnfoldingError> {
    let jr = jacobi_ring(&universal_unfolding(a), Var::SM, values)?;
    let images = s_frame_images(a)
        .iter()
        .map(|p| jr.coords_at(p, values))
        .collect::<Result<Vec<_>, _>>()?;
    product_from_images(&jr, &images)
}

/// Images of `e` and `E` under the Kodaira-Spencer map at a point, with `NF(F)`.
pub struct FrameImages {
    pub unit: Vec<Rational>,
    pub euler: Vec<Rational>,
    pub f: Vec<Rational>,
}

pub fn frame_images(a: &TripletA, values: &Point) -> Result<FrameImages, UnfoldingError> {
    let f = universal_unfolding(a);
    let jr = jacobi_ring(&f, Var::SM, values)?;
    let deg = a.euler_degrees();
    let unit = jr.coords_at(&f.derivative(Var::S1), values)?;
    let euler = jr.coords_at(&deg.apply(&f), values)?;
    let fc = jr.coords_at(&f, values)?;
    Ok(FrameImages { unit, euler, f: fc })
}

/// Point with every `s` variable zero and `sm` set.
pub fn origin_with_sm(a: &TripletA, sm: Rational) -> Point {
    let mut p: Point = a
        .s_vars()
        .into_iter()
        .map(|v| (v, Rational::zero()))
        .collect();
    p.insert(Var::SM, sm);
    p
}

pub fn unit_vector(n: usize, k: usize) -> Vec<Rational> {
    (0..n)
        .map(|i| {
            if i == k {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: &str) -> TripletA {
        TripletA::parse(a).unwrap()
    }

    #[test]
    fn triplet_data() {
        let a = t("2,3,3");
        assert_eq!(a.mu(), 7);
        assert_eq!(a.chi(), ratio(1, 6));
        assert_eq!(a.s_vars().len(), 7);
        assert!(TripletA::parse("3,2,2").is_err());
        assert!(TripletA::parse("2,3").is_err());
        assert!(!t("3,3,3").is_affine());
        assert_eq!(TripletA::affine_list().len(), 22);
    }

    #[test]
    fn cusp_polynomials() {
        let f = cusp_polynomial(&t("1,1,1"), &QValue::Value(rat(1))).unwrap();
        assert_eq!(f, "x1+x2+x3-x1*x2*x3".parse().unwrap());
        let f = cusp_polynomial(&t("2,3,3"), &QValue::Symbolic).unwrap();
        assert_eq!(f, "x1^2+x2^3+x3^3-q^-1*x1*x2*x3".parse().unwrap());
        let f = cusp_polynomial(&t("2,3,5"), &QValue::Value(ratio(1, 2))).unwrap();
        assert_eq!(f, "x1^2+x2^3+x3^5-2*x1*x2*x3".parse().unwrap());
        assert!(cusp_polynomial(&t("2,3,5"), &QValue::Value(rat(0))).is_err());
    }

    #[test]
    fn unfolding_233() {
        let a = t("2,3,3");
        let f = universal_unfolding(&a);
        let expect: Poly =
            "x1^2+x2^3+x3^3-sm^-1*x1*x2*x3+s1+s11*x1+s21*x2+s22*x2^2+s31*x3+s32*x3^2"
                .parse()
                .unwrap();
        assert_eq!(f, expect);
        assert_eq!(f.derivative(Var::S1), Poly::one());
        let mut b = HashMap::new();
        for v in a.s_vars() {
            b.insert(v, Poly::zero());
        }
        b.insert(Var::SM, Poly::var(Var::Q));
        assert_eq!(
            f.substitute(&b).unwrap(),
            cusp_polynomial(&a, &QValue::Symbolic).unwrap()
        );
        assert_eq!(f.clear_laurent(Var::SM).1, 1);
    }

    #[test]
    fn euler_degrees() {
        let a = t("2,3,3");
        let d = a.euler_degrees();
        assert_eq!(
            d.degree_of(&Poly::var(Var::s(1, 1))),
            Degree::Homogeneous(ratio(1, 2))
        );
        assert_eq!(
            d.degree_of(&"q^3".parse().unwrap()),
            Degree::Homogeneous(ratio(1, 2))
        );
        assert_eq!(d.degree_of(&Poly::one()), Degree::Homogeneous(rat(0)));
        assert!(matches!(
            d.degree_of(&"t11 + q".parse().unwrap()),
            Degree::Mixed(_)
        ));
    }

    #[test]
    fn euler_identity() {
        for (a, extra) in [(t("2,3,3"), "x1"), (t("1,1,1"), "x1^2")] {
            let f = universal_unfolding(&a);
            assert!(euler_identity_residual(&a, &f).is_zero());
            let bad = &f + &extra.parse::<Poly>().unwrap();
            assert!(!euler_identity_residual(&a, &bad).is_zero());
        }
    }

    #[test]
    fn limit_algebras() {
        assert_eq!(limit_algebra(&t("2,3,3")).unwrap().dim(), 7);
        assert_eq!(limit_algebra(&t("2,3,5")).unwrap().dim(), 9);
        assert_eq!(limit_algebra(&t("1,1,1")).unwrap().dim(), 2);
        let r = limit_algebra(&t("2,3,3")).unwrap();
        assert!(r.normal_form(&"x2*x3".parse().unwrap()).unwrap().is_zero());
    }

    #[test]
    fn extended_relation_values() {
        let a = t("2,3,3");
        let rels = extended_relations(&a);
        let zero: Point = a.s_vars().into_iter().map(|v| (v, rat(0))).collect();
        assert_eq!(
            rels[3].specialize(&zero).unwrap(),
            "2*x1^2-3*x2^3".parse().unwrap()
        );
        assert_eq!(
            rels[0].specialize(&zero).unwrap(),
            "-x2*x3".parse().unwrap()
        );
        let b = t("2,3,4");
        let zb: Point = b.s_vars().into_iter().map(|v| (v, rat(0))).collect();
        assert_eq!(
            extended_relations(&b)[4].specialize(&zb).unwrap(),
            "3*x2^3-4*x3^4".parse().unwrap()
        );
        assert!(extended_relations_match_limit(&a).unwrap());
    }

    #[test]
    fn extended_relations_give_limit_ideal_for_all_affine() {
        for a in TripletA::affine_list() {
            assert!(extended_relations_match_limit(&a).unwrap(), "{a}");
        }
    }

    #[test]
    fn jacobi_dimension_and_degenerate() {
        let a = t("2,3,4");
        let jr = jacobi_ring(
            &universal_unfolding(&a),
            Var::SM,
            &origin_with_sm(&a, ratio(3, 7)),
        )
        .unwrap();
        assert_eq!(jr.dim(), 8);
        assert_eq!(jr.compensation, num_traits::pow(ratio(3, 7), 3));
        let err = jacobi_ring(
            &universal_unfolding(&a),
            Var::SM,
            &origin_with_sm(&a, rat(0)),
        );
        assert_eq!(err.unwrap_err(), UnfoldingError::ZeroParameter("sm".into()));
    }

    #[test]
    fn kodaira_spencer_unit_and_symmetry() {
        let a = t("1,1,1");
        let c = kodaira_spencer_product(&a, &origin_with_sm(&a, rat(1))).unwrap();
        assert_eq!(c.len(), 2);
        for j in 0..2 {
            assert_eq!(c[0][j], unit_vector(2, j));
        }
        let a = t("2,3,3");
        let mut pt = origin_with_sm(&a, ratio(2, 3));
        pt.insert(Var::s(2, 1), ratio(1, 5));
        let c = kodaira_spencer_product(&a, &pt).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(c[i][j], c[j][i]);
            }
            assert_eq!(c[0][i], unit_vector(7, i));
        }
    }

    #[test]
    fn euler_image_is_f() {
        let a = t("2,3,3");
        let mut pt = origin_with_sm(&a, ratio(-2, 5));
        pt.insert(Var::s(1, 1), ratio(1, 3));
        pt.insert(Var::S1, ratio(4, 9));
        let im = frame_images(&a, &pt).unwrap();
        assert_eq!(im.unit, unit_vector(7, 0));
        assert_eq!(im.euler, im.f);
    }
}
