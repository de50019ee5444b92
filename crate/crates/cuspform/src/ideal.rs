//! Buchberger Gröbner bases, normal forms and zero-dimensional quotient rings.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::ratpoly::{Monomial, Poly, Rational, Var};

const SLOTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("generator has a negative exponent on `{0}`")]
    NotPolynomial(String),
    #[error("variable `{0}` is not in the monomial order")]
    ForeignVariable(String),
    #[error("ideal is not zero-dimensional: no pure power of `{0}` among leading terms")]
    NotZeroDimensional(String),
    #[error("too many variables for the monomial order (max {SLOTS})")]
    TooManyVariables,
}

/// Graded reverse lexicographic order with an explicit variable precedence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    precedence: Vec<Var>,
    slot: HashMap<Var, usize>,
}

impl MonomialOrder {
    /// `vars[0]` has the highest precedence.
    pub fn grevlex(vars: &[Var]) -> Result<Self, IdealError> {
        if vars.len() > SLOTS {
            return Err(IdealError::TooManyVariables);
        }
        let slot = vars.iter().enumerate().map(|(k, v)| (*v, k)).collect();
        Ok(MonomialOrder {
            precedence: vars.to_vec(),
            slot,
        })
    }

    /// `x1 > x2 > x3`.
    pub fn x() -> Self {
        Self::grevlex(&[Var::X1, Var::X2, Var::X3]).expect("three variables")
    }

    /// `x1 > x2 > x3 > y1 > y2 > y3`.
    pub fn xy() -> Self {
        Self::grevlex(&[Var::X1, Var::X2, Var::X3, Var::Y1, Var::Y2, Var::Y3])
            .expect("six variables")
    }

    pub fn vars(&self) -> &[Var] {
        &self.precedence
    }

    fn encode(&self, m: &Monomial) -> Result<Exps, IdealError> {
        let mut e = [0u16; SLOTS];
        for &(v, k) in m.pairs() {
            let s = *self
                .slot
                .get(&v)
                .ok_or_else(|| IdealError::ForeignVariable(v.name()))?;
            if k < 0 {
                return Err(IdealError::NotPolynomial(v.name()));
            }
            e[s] = k as u16;
        }
        Ok(Exps(e))
    }

    fn decode(&self, e: &Exps) -> Monomial {
        Monomial::from_pairs(
            self.precedence
                .iter()
                .enumerate()
                .map(|(k, v)| (*v, e.0[k] as i32)),
        )
    }

    fn to_ipoly(&self, p: &Poly) -> Result<IPoly, IdealError> {
        let mut terms = p
            .terms()
            .iter()
            .map(|(m, c)| Ok((self.encode(m)?, c.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        terms.sort_by_key(|t| std::cmp::Reverse(t.0));
        Ok(IPoly(terms))
    }

    fn to_poly(&self, p: &IPoly) -> Poly {
        Poly::from_terms(p.0.iter().map(|(e, c)| (self.decode(e), c.clone())))
    }
}

/// Dense exponent vector in precedence slots; `Ord` is grevlex.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
struct Exps([u16; SLOTS]);

impl Exps {
    fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn divides(&self, other: &Exps) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    fn lcm(&self, other: &Exps) -> Exps {
        let mut e = self.0;
        for (x, y) in e.iter_mut().zip(&other.0) {
            *x = (*x).max(*y);
        }
        Exps(e)
    }

    fn coprime(&self, other: &Exps) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    fn mul(&self, other: &Exps) -> Exps {
        let mut e = self.0;
        for (x, y) in e.iter_mut().zip(&other.0) {
            *x += *y;
        }
        Exps(e)
    }

    fn div(&self, other: &Exps) -> Exps {
        let mut e = self.0;
        for (x, y) in e.iter_mut().zip(&other.0) {
            *x -= *y;
        }
        Exps(e)
    }

    fn pure_power_slot(&self) -> Option<usize> {
        let nz: Vec<usize> = (0..SLOTS).filter(|&k| self.0[k] > 0).collect();
        (nz.len() == 1).then(|| nz[0])
    }
}

impl Ord for Exps {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for k in (0..SLOTS).rev() {
            if self.0[k] != other.0[k] {
                return other.0[k].cmp(&self.0[k]);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Exps {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Terms sorted descending.
#[derive(Clone, Debug, PartialEq, Eq)]
struct IPoly(Vec<(Exps, Rational)>);

impl IPoly {
    fn lm(&self) -> &Exps {
        &self.0[0].0
    }

    fn monic(mut self) -> IPoly {
        if let Some(lc) = self.0.first().map(|t| t.1.clone()) {
            if !lc.is_one() {
                let inv = lc.recip();
                for t in self.0.iter_mut() {
                    t.1 *= &inv;
                }
            }
        }
        self
    }
}

fn reduce(p: &IPoly, gens: &[IPoly]) -> IPoly {
    let mut work: BTreeMap<Exps, Rational> = p.0.iter().cloned().collect();
    let mut rem = Vec::new();
    while let Some((m, c)) = work.pop_last() {
        match gens.iter().find(|g| g.lm().divides(&m)) {
            Some(g) => {
                let shift = m.div(g.lm());
                for (gm, gc) in &g.0[1..] {
                    let key = gm.mul(&shift);
                    let entry = work.entry(key).or_insert_with(Rational::zero);
                    *entry -= &c * gc;
                    if entry.is_zero() {
                        work.remove(&key);
                    }
                }
            }
            None => rem.push((m, c)),
        }
    }
    IPoly(rem)
}

fn spoly(f: &IPoly, g: &IPoly) -> IPoly {
    let l = f.lm().lcm(g.lm());
    let (sf, sg) = (l.div(f.lm()), l.div(g.lm()));
    let mut map: BTreeMap<Exps, Rational> = BTreeMap::new();
    for (m, c) in &f.0[1..] {
        *map.entry(m.mul(&sf)).or_insert_with(Rational::zero) += c;
    }
    for (m, c) in &g.0[1..] {
        *map.entry(m.mul(&sg)).or_insert_with(Rational::zero) -= c;
    }
    IPoly(
        map.into_iter()
            .rev()
            .filter(|(_, c)| !c.is_zero())
            .collect(),
    )
}

/// Reduced Gröbner basis.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    order: MonomialOrder,
    gens: Vec<IPoly>,
}

/// Reduced Gröbner basis of `gens` under `order` (Buchberger, normal selection,
/// product and chain criteria).
pub fn buchberger(gens: &[Poly], order: &MonomialOrder) -> Result<GroebnerBasis, IdealError> {
    let mut basis: Vec<IPoly> = Vec::new();
    for g in gens {
        let ip = order.to_ipoly(g)?;
        if !ip.0.is_empty() {
            basis.push(ip.monic());
        }
    }
    let mut pending: HashSet<(usize, usize)> = HashSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pending.insert((i, j));
        }
    }
    while !pending.is_empty() {
        let &(i, j) = pending
            .iter()
            .min_by(|a, b| {
                let la = basis[a.0].lm().lcm(basis[a.1].lm());
                let lb = basis[b.0].lm().lcm(basis[b.1].lm());
                la.cmp(&lb).then(a.cmp(b))
            })
            .expect("nonempty");
        pending.remove(&(i, j));
        let (li, lj) = (*basis[i].lm(), *basis[j].lm());
        if li.coprime(&lj) {
            continue;
        }
        let l = li.lcm(&lj);
        let key = |a: usize, b: usize| (a.min(b), a.max(b));
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].lm().divides(&l)
                && !pending.contains(&key(i, k))
                && !pending.contains(&key(j, k))
        });
        if chain {
            continue;
        }
        let r = reduce(&spoly(&basis[i], &basis[j]), &basis);
        if !r.0.is_empty() {
            let n = basis.len();
            basis.push(r.monic());
            for k in 0..n {
                pending.insert((k, n));
            }
        }
    }
    // minimalize then inter-reduce
    let mut minimal: Vec<IPoly> = Vec::new();
    for (k, g) in basis.iter().enumerate() {
        let redundant = basis
            .iter()
            .enumerate()
            .any(|(l, h)| l != k && h.lm().divides(g.lm()) && (h.lm() != g.lm() || l < k));
        if !redundant {
            minimal.push(g.clone());
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<IPoly> = minimal
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, g)| g.clone())
            .collect();
        let head = IPoly(vec![minimal[k].0[0].clone()]);
        let tail = reduce(&IPoly(minimal[k].0[1..].to_vec()), &others);
        let mut terms = head.0;
        terms.extend(tail.0);
        reduced.push(IPoly(terms).monic());
    }
    reduced.sort_by(|a, b| a.lm().cmp(b.lm()));
    Ok(GroebnerBasis {
        order: order.clone(),
        gens: reduced,
    })
}

impl GroebnerBasis {
    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn generators(&self) -> Vec<Poly> {
        self.gens.iter().map(|g| self.order.to_poly(g)).collect()
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.gens
            .iter()
            .map(|g| self.order.decode(g.lm()))
            .collect()
    }

    pub fn normal_form(&self, p: &Poly) -> Result<Poly, IdealError> {
        let ip = self.order.to_ipoly(p)?;
        Ok(self.order.to_poly(&reduce(&ip, &self.gens)))
    }

    pub fn contains(&self, p: &Poly) -> Result<bool, IdealError> {
        Ok(self.normal_form(p)?.is_zero())
    }

    /// Every S-polynomial reduces to zero.
    pub fn is_groebner(&self) -> bool {
        (0..self.gens.len()).all(|j| {
            (0..j).all(|i| {
                reduce(&spoly(&self.gens[i], &self.gens[j]), &self.gens)
                    .0
                    .is_empty()
            })
        })
    }
}

/// Finite-dimensional quotient `k[vars]/I` with its standard monomial basis.
#[derive(Clone, Debug)]
pub struct QuotientRing {
    gb: GroebnerBasis,
    basis: Vec<Exps>,
    index: HashMap<Exps, usize>,
    mult: Vec<Matrix>,
}

pub fn quotient_ring(gb: &GroebnerBasis) -> Result<QuotientRing, IdealError> {
    let n = gb.order.precedence.len();
    let mut bounds = vec![None; n];
    for g in &gb.gens {
        if let Some(s) = g.lm().pure_power_slot() {
            let e = g.lm().0[s];
            bounds[s] = Some(bounds[s].map_or(e, |b: u16| b.min(e)));
        }
    }
    if let Some(k) = bounds.iter().position(Option::is_none) {
        return Err(IdealError::NotZeroDimensional(
            gb.order.precedence[k].name(),
        ));
    }
    let bounds: Vec<u16> = bounds.into_iter().map(Option::unwrap).collect();
    let mut basis = Vec::new();
    let mut cur = [0u16; SLOTS];
    loop {
        let e = Exps(cur);
        if !gb.gens.iter().any(|g| g.lm().divides(&e)) {
            basis.push(e);
        }
        let mut k = 0;
        loop {
            if k == n {
                basis.sort();
                return Ok(build_ring(gb.clone(), basis));
            }
            cur[k] += 1;
            if cur[k] < bounds[k] {
                break;
            }
            cur[k] = 0;
            k += 1;
        }
    }
}

fn build_ring(gb: GroebnerBasis, basis: Vec<Exps>) -> QuotientRing {
    let index: HashMap<Exps, usize> = basis.iter().enumerate().map(|(k, e)| (*e, k)).collect();
    let dim = basis.len();
    let mut ring = QuotientRing {
        gb,
        basis,
        index,
        mult: Vec::new(),
    };
    let mut mult = Vec::with_capacity(dim);
    for i in 0..dim {
        let mut m = linalg::zeros(dim, dim);
        for c in 0..dim {
            let prod = IPoly(vec![(ring.basis[i].mul(&ring.basis[c]), Rational::one())]);
            let col = ring.icoords(&reduce(&prod, &ring.gb.gens));
            for (r, v) in col.into_iter().enumerate() {
                m[r][c] = v;
            }
        }
        mult.push(m);
    }
    ring.mult = mult;
    ring
}

impl QuotientRing {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn gb(&self) -> &GroebnerBasis {
        &self.gb
    }

    /// Standard monomials, ascending in the monomial order.
    pub fn basis(&self) -> Vec<Monomial> {
        self.basis.iter().map(|e| self.gb.order.decode(e)).collect()
    }

    /// Position of the monomial `1` in the basis.
    pub fn unit_index(&self) -> usize {
        self.index[&Exps([0; SLOTS])]
    }

    pub fn index_of(&self, m: &Monomial) -> Option<usize> {
        self.gb
            .order
            .encode(m)
            .ok()
            .and_then(|e| self.index.get(&e).copied())
    }

    fn icoords(&self, nf: &IPoly) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        for (e, c) in &nf.0 {
            v[self.index[e]] = c.clone();
        }
        v
    }

    pub fn normal_form(&self, p: &Poly) -> Result<Poly, IdealError> {
        self.gb.normal_form(p)
    }

    /// Coordinates of the normal form of `p` in the standard basis.
    pub fn coords(&self, p: &Poly) -> Result<Vec<Rational>, IdealError> {
        let ip = self.gb.order.to_ipoly(p)?;
        Ok(self.icoords(&reduce(&ip, &self.gb.gens)))
    }

    pub fn from_coords(&self, v: &[Rational]) -> Poly {
        Poly::from_terms(self.basis().into_iter().zip(v.iter().cloned()))
    }

    /// Multiplication matrix of basis element `i`; column `c` holds `b_i * b_c`.
    pub fn mult_table(&self, i: usize) -> &Matrix {
        &self.mult[i]
    }

    pub fn mult_matrix_of_coords(&self, v: &[Rational]) -> Matrix {
        let dim = self.dim();
        let mut m = linalg::zeros(dim, dim);
        for (k, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for r in 0..dim {
                for s in 0..dim {
                    if !self.mult[k][r][s].is_zero() {
                        m[r][s] += c * &self.mult[k][r][s];
                    }
                }
            }
        }
        m
    }

    pub fn mult_matrix(&self, p: &Poly) -> Result<Matrix, IdealError> {
        Ok(self.mult_matrix_of_coords(&self.coords(p)?))
    }

    /// Product of two elements given by coordinates.
    pub fn mul_coords(&self, a: &[Rational], b: &[Rational]) -> Vec<Rational> {
        linalg::mul_vec(&self.mult_matrix_of_coords(a), b)
    }

    pub fn trace(&self, p: &Poly) -> Result<Rational, IdealError> {
        let m = self.mult_matrix(p)?;
        Ok((0..self.dim()).fold(Rational::zero(), |acc, k| acc + &m[k][k]))
    }

    /// Replaces one multiplication table; used to exercise consistency checks.
    pub fn with_mult_table(mut self, i: usize, m: Matrix) -> Self {
        self.mult[i] = m;
        self
    }

    /// First failing pair for commutativity or table consistency, if any.
    pub fn check_tables(&self) -> Result<(), String> {
        let dim = self.dim();
        for i in 0..dim {
            for j in 0..dim {
                let ab = linalg::mul(&self.mult[i], &self.mult[j]);
                let ba = linalg::mul(&self.mult[j], &self.mult[i]);
                if ab != ba {
                    return Err(format!("mult({i})*mult({j}) not commutative"));
                }
                let prod = IPoly(vec![(self.basis[i].mul(&self.basis[j]), Rational::one())]);
                let nf = self.icoords(&reduce(&prod, &self.gb.gens));
                if self.mult_matrix_of_coords(&nf) != ab {
                    return Err(format!("mult(NF(b{i}*b{j})) != mult(b{i})*mult(b{j})"));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn coordinate_ideal() {
        let gb = buchberger(&[p("x1"), p("x2"), p("x3")], &MonomialOrder::x()).unwrap();
        assert_eq!(gb.generators(), vec![p("x3"), p("x2"), p("x1")]);
        let r = quotient_ring(&gb).unwrap();
        assert_eq!(r.dim(), 1);
        assert_eq!(r.basis(), vec![Monomial::one()]);
    }

    #[test]
    fn staircase() {
        let order = MonomialOrder::grevlex(&[Var::X1, Var::X2]).unwrap();
        let gb = buchberger(&[p("x1^2"), p("x1*x2"), p("x2^2")], &order).unwrap();
        let r = quotient_ring(&gb).unwrap();
        assert_eq!(
            r.basis(),
            vec![
                Monomial::one(),
                Monomial::var(Var::X2, 1),
                Monomial::var(Var::X1, 1)
            ]
        );
        r.check_tables().unwrap();
    }

    #[test]
    fn not_zero_dimensional() {
        let gb = buchberger(&[p("x1*x2"), p("x3")], &MonomialOrder::x()).unwrap();
        assert!(matches!(
            quotient_ring(&gb),
            Err(IdealError::NotZeroDimensional(_))
        ));
    }

    #[test]
    fn rejects_laurent_and_foreign() {
        assert!(matches!(
            buchberger(&[p("q^-1*x1")], &MonomialOrder::x()),
            Err(IdealError::ForeignVariable(_))
        ));
        let order = MonomialOrder::grevlex(&[Var::X1, Var::Q]).unwrap();
        assert!(matches!(
            buchberger(&[p("q^-1*x1")], &order),
            Err(IdealError::NotPolynomial(_))
        ));
    }

    #[test]
    fn cusp_jacobian_rank() {
        let g = [p("2*x1 - x2*x3"), p("3*x2^2 - x1*x3"), p("3*x3^2 - x1*x2")];
        let gb = buchberger(&g, &MonomialOrder::x()).unwrap();
        assert!(gb.is_groebner());
        for gi in &g {
            assert!(gb.contains(gi).unwrap());
        }
        let r = quotient_ring(&gb).unwrap();
        assert_eq!(r.dim(), 7);
        r.check_tables().unwrap();
        let h = p("x1^3*x2 + x3^4 - 5*x2*x3");
        let nf = r.normal_form(&h).unwrap();
        assert_eq!(r.normal_form(&nf).unwrap(), nf);
        assert!(r.gb().contains(&(h - nf)).unwrap());
    }
}
