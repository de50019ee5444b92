//! Global Grothendieck residues on Jacobi rings via Bezoutian dual bases.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ideal::{self, IdealError, MonomialOrder, QuotientRing};
use crate::linalg::{self, Matrix};
use crate::ratpoly::{rat, rat_pow, Monomial, Poly, PolyError, Rational, Var};
use crate::unfolding::{self, JacobiRing, Point, TripletA, UnfoldingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResidueError {
    #[error("Bezoutian coefficient matrix is singular")]
    SingularBezoutian,
    #[error("calibration reference has residue {got}, expected +/-{expected}")]
    CalibrationMismatch { got: String, expected: String },
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// `(h(.., x_j, ..) - h(.., y_j, ..)) / (x_j - y_j)`.
fn divided_difference(h: &Poly, j: usize) -> Poly {
    let (xv, yv) = (Var::x(j), Var::y(j));
    let mut terms = Vec::new();
    for (m, c) in h.terms() {
        let (rest, e) = m.take(xv);
        for k in 0..e {
            terms.push((
                rest.mul(&Monomial::from_pairs([(xv, k), (yv, e - 1 - k)])),
                c.clone(),
            ));
        }
    }
    Poly::from_terms(terms)
}

/// Determinant of the difference-quotient matrix of `g` in `(x, y)`.
pub fn bezoutian(g: &[Poly; 3]) -> Poly {
    let mut a: Vec<Vec<Poly>> = Vec::with_capacity(3);
    for gi in g {
        let mut row = Vec::with_capacity(3);
        let mut u = gi.clone();
        for j in 1..=3 {
            row.push(divided_difference(&u, j));
            let swap = [(Var::x(j), Poly::var(Var::y(j)))].into_iter().collect();
            u = u.substitute(&swap).expect("polynomial substitution");
        }
        a.push(row);
    }
    let m = |i: usize, j: usize| &a[i][j];
    let t1 = m(0, 0) * &(m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1));
    let t2 = m(0, 1) * &(m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0));
    let t3 = m(0, 2) * &(m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    t1 - t2 + t3
}

/// Jacobian determinant `det(dg_i/dx_j)`.
pub fn jacobian_det(g: &[Poly; 3]) -> Poly {
    let d = |i: usize, j: usize| g[i].derivative(Var::x(j + 1));
    let t1 = d(0, 0) * (d(1, 1) * d(2, 2) - d(1, 2) * d(2, 1));
    let t2 = d(0, 1) * (d(1, 0) * d(2, 2) - d(1, 2) * d(2, 0));
    let t3 = d(0, 2) * (d(1, 0) * d(2, 1) - d(1, 1) * d(2, 0));
    t1 - t2 + t3
}

fn y_to_x(m: &Monomial) -> Monomial {
    Monomial::from_pairs(m.pairs().iter().map(|&(v, e)| {
        if v.is_y() {
            (Var::x(v.index() - 2), e)
        } else {
            (v, e)
        }
    }))
}

fn split_xy(m: &Monomial) -> (Monomial, Monomial) {
    let xs = Monomial::from_pairs(m.pairs().iter().copied().filter(|p| p.0.is_x()));
    let ys = Monomial::from_pairs(m.pairs().iter().copied().filter(|p| p.0.is_y()));
    (xs, y_to_x(&ys))
}

/// Residue functional of a zero-dimensional complete intersection `(g1, g2, g3)`.
#[derive(Clone, Debug)]
pub struct ResidueFunctional {
    ring: QuotientRing,
    /// Gram matrix `Res_g(b_k b_l)` for the generators the ring was built from.
    gram: Matrix,
    compensation: Rational,
    calibration_sign: i32,
}

impl ResidueFunctional {
    /// `compensation` rescales residues to generators `g_a / c_a` with `prod c_a = compensation`.
    pub fn new(
        ring: &QuotientRing,
        g: &[Poly; 3],
        compensation: Rational,
    ) -> Result<Self, ResidueError> {
        let xs = ring.gb().order().vars().to_vec();
        let ys: Vec<Var> = xs.iter().map(|v| Var::y(v.index() + 1)).collect();
        let order = MonomialOrder::grevlex(&[xs, ys].concat())?;
        let mut gens: Vec<Poly> = g.to_vec();
        for gi in g {
            let ren = (1..=3).map(|j| (Var::x(j), Poly::var(Var::y(j)))).collect();
            gens.push(gi.substitute(&ren)?);
        }
        let gb = ideal::buchberger(&gens, &order)?;
        let reduced = gb.normal_form(&bezoutian(g))?;
        let n = ring.dim();
        let mut d = linalg::zeros(n, n);
        for (m, c) in reduced.terms() {
            let (mx, my) = split_xy(m);
            let k = ring.index_of(&mx).ok_or(ResidueError::SingularBezoutian)?;
            let l = ring.index_of(&my).ok_or(ResidueError::SingularBezoutian)?;
            d[k][l] = c.clone();
        }
        let gram = linalg::inverse(&d).ok_or(ResidueError::SingularBezoutian)?;
        Ok(ResidueFunctional {
            ring: ring.clone(),
            gram,
            compensation,
            calibration_sign: 1,
        })
    }

    pub fn for_jacobi(jr: &JacobiRing) -> Result<Self, ResidueError> {
        Self::new(&jr.ring, &jr.generators, jr.compensation.clone())
    }

    pub fn ring(&self) -> &QuotientRing {
        &self.ring
    }

    pub fn calibration_sign(&self) -> i32 {
        self.calibration_sign
    }

    /// Values of the residue against the ring's own generators on basis monomials.
    pub fn raw_values(&self) -> Vec<Rational> {
        self.gram[self.ring.unit_index()].clone()
    }

    /// Residue against the ring's own generators, no compensation or sign.
    pub fn raw(&self, h: &Poly) -> Result<Rational, ResidueError> {
        let c = self.ring.coords(h)?;
        Ok(c.iter()
            .zip(self.raw_values())
            .fold(Rational::zero(), |acc, (a, b)| acc + a * b))
    }

    /// Compensated residue in the standard orientation (`Res(Jdet) = dim`).
    pub fn standard(&self, h: &Poly) -> Result<Rational, ResidueError> {
        Ok(self.raw(h)? * &self.compensation)
    }

    /// Calibrated residue.
    pub fn residue(&self, h: &Poly) -> Result<Rational, ResidueError> {
        Ok(self.standard(h)? * rat(self.calibration_sign as i64))
    }

    /// Calibrated values on the basis monomials.
    pub fn values(&self) -> Vec<Rational> {
        let f = &self.compensation * rat(self.calibration_sign as i64);
        self.raw_values().into_iter().map(|v| v * &f).collect()
    }

    /// Calibrated Gram matrix `Res(b_k b_l)`.
    pub fn gram(&self) -> Matrix {
        let f = &self.compensation * rat(self.calibration_sign as i64);
        self.gram
            .iter()
            .map(|r| r.iter().map(|v| v * &f).collect())
            .collect()
    }

    /// Fixes the sign so that `residue(reference) == expected`.
    pub fn calibrate(
        &mut self,
        reference: &Poly,
        expected: &Rational,
    ) -> Result<i32, ResidueError> {
        let got = self.standard(reference)?;
        self.calibration_sign = if &got == expected && !expected.is_zero() {
            1
        } else if got == -expected && !expected.is_zero() {
            -1
        } else {
            return Err(ResidueError::CalibrationMismatch {
                got: got.to_string(),
                expected: expected.abs().to_string(),
            });
        };
        Ok(self.calibration_sign)
    }
}

/// `(L_raw(h * Jdet), Tr(M_h))`; the two agree for a correct functional.
pub fn trace_oracle(
    rf: &ResidueFunctional,
    g: &[Poly; 3],
    h: &Poly,
) -> Result<(Rational, Rational), ResidueError> {
    let jdet = jacobian_det(g);
    let lhs = rf.raw(&(h * &jdet))?;
    let rhs = rf.ring().trace(h)?;
    Ok((lhs, rhs))
}

/// `x1 x2 x3`, the calibration reference.
pub fn xyz() -> Poly {
    Poly::term(
        rat(1),
        Monomial::from_pairs([(Var::X1, 1), (Var::X2, 1), (Var::X3, 1)]),
    )
}

/// Jacobi ring of an unfolding-type function at a point, with calibrated residue.
#[derive(Clone, Debug)]
pub struct ResiduePoint {
    pub jacobi: JacobiRing,
    pub functional: ResidueFunctional,
    pub point: Point,
}

impl ResiduePoint {
    /// Builds the ring of `f` at `point` and calibrates `Res(x1x2x3) = v^3` for the
    /// Laurent variable `v`.
    pub fn new(f: &Poly, laurent: Var, point: &Point) -> Result<Self, ResidueError> {
        Self::with_order(f, laurent, point, &MonomialOrder::x())
    }

    pub fn with_order(
        f: &Poly,
        laurent: Var,
        point: &Point,
        order: &MonomialOrder,
    ) -> Result<Self, ResidueError> {
        let jacobi = unfolding::jacobi_ring_with_order(f, laurent, point, order)?;
        let mut functional = ResidueFunctional::for_jacobi(&jacobi)?;
        functional.calibrate(&xyz(), &rat_pow(&jacobi.laurent_value, 3))?;
        Ok(ResiduePoint {
            jacobi,
            functional,
            point: point.clone(),
        })
    }

    /// Unfolding `F_A` at `s` values (with `sm`).
    pub fn unfolding(a: &TripletA, s_values: &Point) -> Result<Self, ResidueError> {
        Self::new(&unfolding::universal_unfolding(a), Var::SM, s_values)
    }

    pub fn calibration_sign(&self) -> i32 {
        self.functional.calibration_sign()
    }

    /// Calibrated residue of `h`, which may mention bound parameters.
    pub fn residue(&self, h: &Poly) -> Result<Rational, ResidueError> {
        self.functional.residue(&h.specialize(&self.point)?)
    }

    /// `J(phi1, phi2) = sign * (-1) * Res(phi1 phi2)`.
    pub fn pairing_j(&self, phi1: &Poly, phi2: &Poly) -> Result<Rational, ResidueError> {
        let r = self.residue(&(phi1 * phi2))?;
        Ok(-r * rat(self.calibration_sign() as i64))
    }

    /// `K0(zeta, u nabla_delta zeta)` for `zeta = [sm^-1 dx]`: `J(sm^-1, sm^-1 delta F)`.
    pub fn k0(&self, delta_f: &Poly) -> Result<Rational, ResidueError> {
        let inv = Poly::constant(self.jacobi.laurent_value.recip());
        self.pairing_j(&inv, &(&inv * delta_f))
    }

    /// `-v^-2 * sign * Res(p1 p2 p3)` with `v` the Laurent value.
    pub fn three_point(&self, p1: &Poly, p2: &Poly, p3: &Poly) -> Result<Rational, ResidueError> {
        let r = self.residue(&(&(p1 * p2) * p3))?;
        let v = &self.jacobi.laurent_value;
        Ok(-r * rat(self.calibration_sign() as i64) * rat_pow(v, -2))
    }

    /// Trace oracle against the Jacobian of the ring's own generators.
    pub fn trace_oracle(&self, h: &Poly) -> Result<(Rational, Rational), ResidueError> {
        trace_oracle(
            &self.functional,
            &self.jacobi.generators,
            &h.specialize(&self.point)?,
        )
    }
}

/// Calibrated `Res[h dx / (dF/dx1 dF/dx2 dF/dx3)]` for `F_A` at `s_values`.
pub fn grothendieck_residue(
    h: &Poly,
    a: &TripletA,
    s_values: &Point,
) -> Result<Rational, ResidueError> {
    ResiduePoint::unfolding(a, s_values)?.residue(h)
}

/// `J(phi1, phi2)` for `F_A` at `s_values`.
pub fn pairing_j(
    phi1: &Poly,
    phi2: &Poly,
    a: &TripletA,
    s_values: &Point,
) -> Result<Rational, ResidueError> {
    ResiduePoint::unfolding(a, s_values)?.pairing_j(phi1, phi2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::quotient_ring;
    use crate::ratpoly::ratio;
    use crate::unfolding::origin_with_sm;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn bezoutian_examples() {
        assert_eq!(bezoutian(&[p("x1"), p("x2"), p("x3")]), Poly::one());
        assert_eq!(
            bezoutian(&[p("x1^2"), p("x2^2"), p("x3^2")]),
            p("x1+y1") * p("x2+y2") * p("x3+y3")
        );
    }

    #[test]
    fn monomial_complete_intersection() {
        // Res[x1 x2 x3 / (x1^2, x2^2, x3^2)] = 1, everything else 0.
        let g = [p("x1^2"), p("x2^2"), p("x3^2")];
        let gb = ideal::buchberger(&g, &MonomialOrder::x()).unwrap();
        let ring = quotient_ring(&gb).unwrap();
        let rf = ResidueFunctional::new(&ring, &g, rat(1)).unwrap();
        assert_eq!(rf.raw(&p("x1*x2*x3")).unwrap(), rat(1));
        assert_eq!(rf.raw(&p("x1*x2")).unwrap(), rat(0));
        assert_eq!(rf.raw(&Poly::one()).unwrap(), rat(0));
        assert_eq!(rf.raw(&jacobian_det(&g)).unwrap(), rat(8));
    }

    #[test]
    fn basis_values_233() {
        let a = TripletA::parse("2,3,3").unwrap();
        let rp = ResiduePoint::unfolding(&a, &origin_with_sm(&a, rat(1))).unwrap();
        assert_eq!(rp.calibration_sign(), -1);
        assert_eq!(rp.residue(&xyz()).unwrap(), rat(1));
        for h in ["1", "x1", "x2", "x2^2", "x3", "x3^2"] {
            assert_eq!(rp.residue(&p(h)).unwrap(), rat(0), "{h}");
        }
        let rp = ResiduePoint::unfolding(
            &TripletA::parse("2,3,4").unwrap(),
            &origin_with_sm(&TripletA::parse("2,3,4").unwrap(), rat(2)),
        )
        .unwrap();
        assert_eq!(rp.residue(&xyz()).unwrap(), rat(8));
    }

    #[test]
    fn k0_and_trace() {
        let a = TripletA::parse("2,3,3").unwrap();
        let mut pt = origin_with_sm(&a, ratio(-3, 2));
        pt.insert(Var::s(2, 2), ratio(1, 4));
        let rp = ResiduePoint::unfolding(&a, &pt).unwrap();
        let f = unfolding::universal_unfolding(&a);
        let d_sm = f
            .derivative(Var::SM)
            .mul_monomial(&Monomial::var(Var::SM, 1));
        assert_eq!(rp.k0(&d_sm).unwrap(), rat(1));
        assert_eq!(rp.k0(&f.derivative(Var::S1)).unwrap(), rat(0));
        let (l, t) = rp.trace_oracle(&Poly::one()).unwrap();
        assert_eq!((l, t), (rat(7), rat(7)));
        let (l, t) = rp.trace_oracle(&p("x1*x2 + 3*x3^2 - x2")).unwrap();
        assert_eq!(l, t);
    }

    #[test]
    fn pairing_symmetric() {
        let a = TripletA::parse("2,3,3").unwrap();
        let pt = origin_with_sm(&a, ratio(2, 5));
        let (u, v) = (p("x1 + x2^2"), p("x3 - 2*x1*x2"));
        assert_eq!(
            pairing_j(&u, &v, &a, &pt).unwrap(),
            pairing_j(&v, &u, &a, &pt).unwrap()
        );
    }
}
