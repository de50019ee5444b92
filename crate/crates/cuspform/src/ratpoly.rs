//! Exact rational coefficients and sparse multivariate Laurent polynomials.
//!
//! Variables come from a fixed registry (`x1..x3`, `y1..y3`, `s1`, `s<i><j>`,
//! `sm`, `t1`, `t<i><j>`, `tm`, `q`). Only `sm` and `q` may carry negative
//! exponents. Terms are kept sorted in descending graded reverse
//! lexicographic order, with the registry order as variable precedence.

use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use thiserror::Error;

pub type Rational = BigRational;

/// Shorthand for the integer `n` as a rational.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `n/d`. Panics on `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `r^e` for any integer `e`; `r` must be nonzero when `e < 0`.
pub fn rat_pow(r: &Rational, e: i32) -> Rational {
    if e >= 0 {
        num_traits::pow(r.clone(), e as usize)
    } else {
        num_traits::pow(r.recip(), (-e) as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("malformed exponent near `{0}`")]
    MalformedExponent(String),
    #[error("division by zero in coefficient")]
    ZeroDenominator,
    #[error("negative exponent on non-Laurent variable `{0}`")]
    NegativeExponent(String),
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("zero bound to Laurent variable `{0}` with negative exponent")]
    ZeroLaurentBinding(String),
    #[error("binding for `{0}` is not invertible")]
    NonInvertibleBinding(String),
}

const NUM_VARS: usize = 65;

/// A registry variable.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Var(u8);

impl Var {
    pub const X1: Var = Var(0);
    pub const X2: Var = Var(1);
    pub const X3: Var = Var(2);
    pub const Y1: Var = Var(3);
    pub const Y2: Var = Var(4);
    pub const Y3: Var = Var(5);
    pub const S1: Var = Var(6);
    pub const SM: Var = Var(34);
    pub const T1: Var = Var(35);
    pub const TM: Var = Var(63);
    pub const Q: Var = Var(64);

    /// `x_i`, 1-based.
    pub fn x(i: usize) -> Var {
        assert!((1..=3).contains(&i));
        Var((i - 1) as u8)
    }

    /// `y_i`, 1-based.
    pub fn y(i: usize) -> Var {
        assert!((1..=3).contains(&i));
        Var((i + 2) as u8)
    }

    /// `s_{i,j}` with `i in 1..=3`, `j in 1..=9`.
    pub fn s(i: usize, j: usize) -> Var {
        assert!((1..=3).contains(&i) && (1..=9).contains(&j));
        Var((7 + (i - 1) * 9 + (j - 1)) as u8)
    }

    /// `t_{i,j}` with `i in 1..=3`, `j in 1..=9`.
    pub fn t(i: usize, j: usize) -> Var {
        assert!((1..=3).contains(&i) && (1..=9).contains(&j));
        Var((36 + (i - 1) * 9 + (j - 1)) as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn is_laurent(self) -> bool {
        self == Var::SM || self == Var::Q
    }

    /// `(i, j)` for `s_{i,j}` or `t_{i,j}`.
    pub fn block(self) -> Option<(usize, usize)> {
        let k = self.0 as usize;
        match k {
            7..=33 => Some(((k - 7) / 9 + 1, (k - 7) % 9 + 1)),
            36..=62 => Some(((k - 36) / 9 + 1, (k - 36) % 9 + 1)),
            _ => None,
        }
    }

    pub fn is_x(self) -> bool {
        self.0 <= 2
    }

    pub fn is_y(self) -> bool {
        (3..=5).contains(&self.0)
    }

    pub fn name(self) -> String {
        let k = self.0 as usize;
        match k {
            0..=2 => format!("x{}", k + 1),
            3..=5 => format!("y{}", k - 2),
            6 => "s1".into(),
            7..=33 => format!("s{}{}", (k - 7) / 9 + 1, (k - 7) % 9 + 1),
            34 => "sm".into(),
            35 => "t1".into(),
            36..=62 => format!("t{}{}", (k - 36) / 9 + 1, (k - 36) % 9 + 1),
            63 => "tm".into(),
            _ => "q".into(),
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        let b = name.as_bytes();
        let digit = |c: u8| (b'1'..=b'9').contains(&c).then(|| (c - b'0') as usize);
        match name {
            "s1" => return Some(Var::S1),
            "sm" => return Some(Var::SM),
            "t1" => return Some(Var::T1),
            "tm" => return Some(Var::TM),
            "q" => return Some(Var::Q),
            _ => {}
        }
        match (b.first(), b.len()) {
            (Some(b'x'), 2) => digit(b[1]).filter(|&i| i <= 3).map(Var::x),
            (Some(b'y'), 2) => digit(b[1]).filter(|&i| i <= 3).map(Var::y),
            (Some(b's'), 3) => match (digit(b[1]), digit(b[2])) {
                (Some(i), Some(j)) if i <= 3 => Some(Var::s(i, j)),
                _ => None,
            },
            (Some(b't'), 3) => match (digit(b[1]), digit(b[2])) {
                (Some(i), Some(j)) if i <= 3 => Some(Var::t(i, j)),
                _ => None,
            },
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Set of variables admitted by the parser.
#[derive(Clone, Debug)]
pub struct Registry {
    allowed: [bool; NUM_VARS],
}

impl Registry {
    /// Every registry variable, for any exponent triple.
    pub fn all() -> Self {
        Registry {
            allowed: [true; NUM_VARS],
        }
    }

    /// Variables meaningful for the exponent triple `a`.
    pub fn for_exponents(a: [u32; 3]) -> Self {
        let mut allowed = [false; NUM_VARS];
        for v in [
            Var::X1,
            Var::X2,
            Var::X3,
            Var::Y1,
            Var::Y2,
            Var::Y3,
            Var::S1,
            Var::SM,
            Var::T1,
            Var::TM,
            Var::Q,
        ] {
            allowed[v.index()] = true;
        }
        for (i, &ai) in a.iter().enumerate() {
            for j in 1..ai as usize {
                allowed[Var::s(i + 1, j).index()] = true;
                allowed[Var::t(i + 1, j).index()] = true;
            }
        }
        Registry { allowed }
    }

    pub fn contains(&self, v: Var) -> bool {
        self.allowed[v.index()]
    }
}

/// Sparse exponent vector, sorted by variable, no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Monomial(SmallVec<[(Var, i32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(v: Var, e: i32) -> Self {
        let mut m = Monomial::one();
        if e != 0 {
            m.0.push((v, e));
        }
        m
    }

    /// Builds from arbitrary `(var, exp)` pairs, merging repeats.
    pub fn from_pairs<I: IntoIterator<Item = (Var, i32)>>(pairs: I) -> Self {
        let mut v: SmallVec<[(Var, i32); 4]> = pairs.into_iter().collect();
        v.sort_by_key(|p| p.0);
        let mut out: SmallVec<[(Var, i32); 4]> = SmallVec::new();
        for (var, e) in v {
            match out.last_mut() {
                Some(last) if last.0 == var => last.1 += e,
                _ => out.push((var, e)),
            }
        }
        out.retain(|p| p.1 != 0);
        Monomial(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|p| p.1 as i64).sum()
    }

    pub fn exp(&self, v: Var) -> i32 {
        self.0.iter().find(|p| p.0 == v).map_or(0, |p| p.1)
    }

    pub fn pairs(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.0.iter().map(|p| p.0)
    }

    /// `self * other^sign`.
    fn combine(&self, other: &Monomial, sign: i32) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, sign * b[j].1));
                j += 1;
            } else {
                let e = a[i].1 + sign * b[j].1;
                if e != 0 {
                    out.push((a[i].0, e));
                }
                i += 1;
                j += 1;
            }
        }
        Monomial(out)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        self.combine(other, 1)
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.combine(other, -1)
    }

    /// Drops variable `v`, returning its exponent.
    pub fn take(&self, v: Var) -> (Monomial, i32) {
        let e = self.exp(v);
        let rest = Monomial(self.0.iter().copied().filter(|p| p.0 != v).collect());
        (rest, e)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (a.len(), b.len());
        loop {
            match (i > 0, j > 0) {
                (false, false) => return Ordering::Equal,
                (true, false) => return 0.cmp(&a[i - 1].1),
                (false, true) => return b[j - 1].1.cmp(&0),
                (true, true) => {
                    let (va, ea) = a[i - 1];
                    let (vb, eb) = b[j - 1];
                    if va == vb {
                        if ea != eb {
                            return eb.cmp(&ea);
                        }
                        i -= 1;
                        j -= 1;
                    } else if va > vb {
                        return 0.cmp(&ea);
                    } else {
                        return eb.cmp(&0);
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (v, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{v}")?;
            } else {
                write!(f, "{v}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Canonical sparse polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Poly {
    terms: Vec<(Monomial, Rational)>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn int(n: i64) -> Self {
        Poly::constant(rat(n))
    }

    pub fn var(v: Var) -> Self {
        Poly::term(Rational::one(), Monomial::var(v, 1))
    }

    pub fn var_pow(v: Var, e: i32) -> Self {
        Poly::term(Rational::one(), Monomial::var(v, e))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly {
                terms: vec![(m, c)],
            }
        }
    }

    /// Canonicalizes an arbitrary list of terms.
    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(it: I) -> Self {
        let mut map: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in it {
            *map.entry(m).or_insert_with(Rational::zero) += c;
        }
        Poly::from_map(map)
    }

    fn from_map(map: HashMap<Monomial, Rational>) -> Self {
        let mut terms: Vec<_> = map.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }

    pub fn into_terms(self) -> Vec<(Monomial, Rational)> {
        self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Monomial, Rational)> {
        self.terms.first()
    }

    /// The value if this polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.as_slice() {
            [] => Some(Rational::zero()),
            [(m, c)] if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms
            .binary_search_by(|t| m.cmp(&t.0))
            .map(|k| self.terms[k].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.terms.iter().flat_map(|t| t.0.vars()).collect()
    }

    pub fn min_exp(&self, v: Var) -> i32 {
        self.terms.iter().map(|t| t.0.exp(v)).min().unwrap_or(0)
    }

    pub fn max_exp(&self, v: Var) -> i32 {
        self.terms.iter().map(|t| t.0.exp(v)).max().unwrap_or(0)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(n, c)| (n.mul(m), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let terms = self.terms.iter().filter_map(|(m, c)| {
            let e = m.exp(v);
            (e != 0).then(|| (m.div(&Monomial::var(v, 1)), c * rat(e as i64)))
        });
        Poly::from_terms(terms)
    }

    /// `v * d/dv`, which keeps monomials and scales by the exponent.
    pub fn log_derivative(&self, v: Var) -> Poly {
        let terms: Vec<_> = self
            .terms
            .iter()
            .filter_map(|(m, c)| {
                let e = m.exp(v);
                (e != 0).then(|| (m.clone(), c * rat(e as i64)))
            })
            .collect();
        Poly { terms }
    }

    /// Partial evaluation at rational values; unbound variables stay symbolic.
    pub fn specialize(&self, values: &HashMap<Var, Rational>) -> Result<Poly, PolyError> {
        let mut cache: HashMap<(Var, i32), Rational> = HashMap::new();
        let mut out: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest: SmallVec<[(Var, i32); 4]> = SmallVec::new();
            for &(v, e) in m.pairs() {
                match values.get(&v) {
                    Some(val) => {
                        if e < 0 && val.is_zero() {
                            return Err(PolyError::ZeroLaurentBinding(v.name()));
                        }
                        let p = cache.entry((v, e)).or_insert_with(|| rat_pow(val, e));
                        coef *= &*p;
                    }
                    None => rest.push((v, e)),
                }
            }
            if !coef.is_zero() {
                *out.entry(Monomial(rest)).or_insert_with(Rational::zero) += coef;
            }
        }
        Ok(Poly::from_map(out))
    }

    /// Evaluates to a rational; every variable must be bound.
    pub fn eval(&self, values: &HashMap<Var, Rational>) -> Result<Rational, PolyError> {
        let p = self.specialize(values)?;
        p.as_constant().ok_or_else(|| {
            PolyError::UnknownVariable(
                p.vars()
                    .iter()
                    .map(|v| v.name())
                    .collect::<Vec<_>>()
                    .join(","),
            )
        })
    }

    /// Replaces variables by polynomials.
    pub fn substitute(&self, bindings: &HashMap<Var, Poly>) -> Result<Poly, PolyError> {
        let mut cache: HashMap<(Var, i32), Poly> = HashMap::new();
        let mut acc: HashMap<Monomial, Rational> = HashMap::new();
        for (m, c) in &self.terms {
            let mut piece = Poly::constant(c.clone());
            let mut rest: SmallVec<[(Var, i32); 4]> = SmallVec::new();
            for &(v, e) in m.pairs() {
                match bindings.get(&v) {
                    None => rest.push((v, e)),
                    Some(b) => {
                        let p = match cache.entry((v, e)) {
                            Entry::Occupied(o) => o.into_mut(),
                            Entry::Vacant(slot) => slot.insert(if e >= 0 {
                                b.pow(e as u32)
                            } else {
                                b.inverse_monomial(v)?.pow((-e) as u32)
                            }),
                        };
                        piece = &piece * &*p;
                    }
                }
            }
            let rest = Monomial(rest);
            for (pm, pc) in piece.terms {
                *acc.entry(pm.mul(&rest)).or_insert_with(Rational::zero) += pc;
            }
        }
        Ok(Poly::from_map(acc))
    }

    fn inverse_monomial(&self, v: Var) -> Result<Poly, PolyError> {
        match self.terms.as_slice() {
            [] => Err(PolyError::ZeroLaurentBinding(v.name())),
            [(m, c)] if m.vars().all(Var::is_laurent) => {
                Ok(Poly::term(c.recip(), Monomial::one().div(m)))
            }
            _ => Err(PolyError::NonInvertibleBinding(v.name())),
        }
    }

    /// Multiplies by `v^k` with the least `k >= 0` that removes negative powers of `v`.
    pub fn clear_laurent(&self, v: Var) -> (Poly, i32) {
        let k = (-self.min_exp(v)).max(0);
        (self.mul_monomial(&Monomial::var(v, k)), k)
    }

    /// Parses the text grammar, admitting only variables in `registry`.
    pub fn parse(text: &str, registry: &Registry) -> Result<Poly, PolyError> {
        Parser::new(text, registry).poly()
    }
}

impl FromStr for Poly {
    type Err = PolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Poly::parse(s, &Registry::all())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            match (k, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            if m.is_one() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{a}*{m}")?;
            }
        }
        Ok(())
    }
}

fn merge_add(a: &[(Monomial, Rational)], b: &[(Monomial, Rational)], negate_b: bool) -> Poly {
    let mut terms = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let nb = |c: &Rational| if negate_b { -c } else { c.clone() };
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Greater => {
                terms.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                terms.push((b[j].0.clone(), nb(&b[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let c = &a[i].1 + nb(&b[j].1);
                if !c.is_zero() {
                    terms.push((a[i].0.clone(), c));
                }
                i += 1;
                j += 1;
            }
        }
    }
    terms.extend(a[i..].iter().cloned());
    terms.extend(b[j..].iter().map(|t| (t.0.clone(), nb(&t.1))));
    Poly { terms }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        merge_add(&self.terms, &rhs.terms, false)
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        merge_add(&self.terms, &rhs.terms, true)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut map: HashMap<Monomial, Rational> = HashMap::with_capacity(self.len() * rhs.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                *map.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        Poly::from_map(map)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $f(self, rhs: &Poly) -> Poly {
                (&self).$f(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $f(self, rhs: Poly) -> Poly {
                self.$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl std::iter::Sum for Poly {
    fn sum<I: Iterator<Item = Poly>>(iter: I) -> Poly {
        let mut map: HashMap<Monomial, Rational> = HashMap::new();
        for p in iter {
            for (m, c) in p.terms {
                *map.entry(m).or_insert_with(Rational::zero) += c;
            }
        }
        Poly::from_map(map)
    }
}

struct Parser<'a> {
    s: Vec<u8>,
    pos: usize,
    registry: &'a Registry,
}

impl<'a> Parser<'a> {
    fn new(text: &str, registry: &'a Registry) -> Self {
        let s = text.bytes().filter(|b| !b.is_ascii_whitespace()).collect();
        Parser {
            s,
            pos: 0,
            registry,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> PolyError {
        PolyError::Syntax {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn poly(&mut self) -> Result<Poly, PolyError> {
        let mut terms = Vec::new();
        let mut neg = false;
        if self.peek() == Some(b'-') {
            neg = true;
            self.pos += 1;
        }
        loop {
            let (mut c, m) = self.term()?;
            if neg {
                c = -c;
            }
            terms.push((m, c));
            match self.peek() {
                None => break,
                Some(b'+') => neg = false,
                Some(b'-') => neg = true,
                Some(_) => return Err(self.err("expected `+` or `-`")),
            }
            self.pos += 1;
        }
        Ok(Poly::from_terms(terms))
    }

    fn integer(&mut self) -> Result<BigInt, PolyError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digits parse"))
    }

    fn term(&mut self) -> Result<(Rational, Monomial), PolyError> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                let mut coef = Rational::from_integer(n);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    let d = self.integer()?;
                    if d.is_zero() {
                        return Err(PolyError::ZeroDenominator);
                    }
                    coef /= Rational::from_integer(d);
                }
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    Ok((coef, self.factors()?))
                } else {
                    Ok((coef, Monomial::one()))
                }
            }
            Some(c) if c.is_ascii_lowercase() => Ok((Rational::one(), self.factors()?)),
            _ => Err(self.err("expected term")),
        }
    }

    fn factors(&mut self) -> Result<Monomial, PolyError> {
        let mut pairs = vec![self.factor()?];
        while self.peek() == Some(b'*') {
            self.pos += 1;
            pairs.push(self.factor()?);
        }
        Ok(Monomial::from_pairs(pairs))
    }

    fn factor(&mut self) -> Result<(Var, i32), PolyError> {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii ident");
        if name.is_empty() {
            return Err(self.err("expected variable"));
        }
        let var = Var::from_name(name)
            .filter(|v| self.registry.contains(*v))
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        let mut e = 1i32;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let estart = self.pos;
            let neg = self.peek() == Some(b'-');
            if neg {
                self.pos += 1;
            }
            let dstart = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.s[dstart..self.pos]).expect("ascii");
            let bad = || {
                PolyError::MalformedExponent(
                    String::from_utf8_lossy(&self.s[start..self.pos.max(estart)]).into_owned(),
                )
            };
            let mag: i32 = digits.parse().map_err(|_| bad())?;
            e = if neg { -mag } else { mag };
        }
        if e < 0 && !var.is_laurent() {
            return Err(PolyError::NegativeExponent(var.name()));
        }
        Ok((var, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Poly {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_print() {
        assert_eq!(p("x1^2 + 1/2*x2").to_string(), "x1^2 + 1/2*x2");
        assert!(p("x1^2*x2 - x1^2*x2").is_zero());
        assert_eq!(
            p("-1*q^-1*x1*x2*x3 + x1^2").to_string(),
            "-x1*x2*x3*q^-1 + x1^2"
        );
        assert_eq!(p("  - 3 ").to_string(), "-3");
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            "x4".parse::<Poly>(),
            Err(PolyError::UnknownVariable("x4".into()))
        );
        assert_eq!("1/0*x1".parse::<Poly>(), Err(PolyError::ZeroDenominator));
        assert!(matches!(
            "x1^".parse::<Poly>(),
            Err(PolyError::MalformedExponent(_))
        ));
        assert_eq!(
            "x1^-1".parse::<Poly>(),
            Err(PolyError::NegativeExponent("x1".into()))
        );
        assert!(matches!(
            "x1 x2".parse::<Poly>(),
            Err(PolyError::UnknownVariable(_))
        ));
        assert!(matches!(
            "x1 +".parse::<Poly>(),
            Err(PolyError::Syntax { .. })
        ));
        let reg = Registry::for_exponents([2, 3, 3]);
        assert!(Poly::parse("s22 + t32", &reg).is_ok());
        assert_eq!(
            Poly::parse("s13", &reg),
            Err(PolyError::UnknownVariable("s13".into()))
        );
    }

    #[test]
    fn grevlex_order() {
        let x1 = Monomial::var(Var::X1, 1);
        let x2 = Monomial::var(Var::X2, 1);
        let x3 = Monomial::var(Var::X3, 1);
        assert!(x1 > x2 && x2 > x3);
        // x1*x3 vs x2^2: same degree, x3 exponent decides
        assert!(x1.mul(&x3) < x2.mul(&x2));
        assert!(x1.mul(&x1) > x1.mul(&x2));
        assert!(Monomial::var(Var::Q, -1) < Monomial::one());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(p("x1+x2") * p("x1-x2"), p("x1^2-x2^2"));
        assert_eq!(p("x1+1").pow(3), p("x1^3+3*x1^2+3*x1+1"));
        assert_eq!(&p("x1+x2") + &Poly::zero(), p("x1+x2"));
        assert_eq!(p("q^-1") * p("q"), Poly::one());
    }

    #[test]
    fn derivatives() {
        assert_eq!(p("x1^2").derivative(Var::X1), p("2*x1"));
        let f = p("x1^2+x2^3+x3^3-q^-1*x1*x2*x3");
        assert_eq!(f.derivative(Var::X1), p("2*x1-q^-1*x2*x3"));
        assert_eq!(p("q^-1").derivative(Var::Q), p("-q^-2"));
        assert_eq!(p("3*q^2*t11").log_derivative(Var::Q), p("6*q^2*t11"));
    }

    #[test]
    fn substitution() {
        let mut vals = HashMap::new();
        vals.insert(Var::Q, rat(2));
        assert_eq!(p("x1^2+q^-1").specialize(&vals).unwrap(), p("x1^2+1/2"));
        let f = p("x1^2+x2^3+x3^3-q^-1*x1*x2*x3");
        let all: HashMap<Var, Rational> = [Var::X1, Var::X2, Var::X3, Var::Q]
            .into_iter()
            .map(|v| (v, rat(1)))
            .collect();
        assert_eq!(f.eval(&all).unwrap(), rat(2));
        vals.insert(Var::Q, rat(0));
        assert_eq!(
            p("q^-1").specialize(&vals),
            Err(PolyError::ZeroLaurentBinding("q".into()))
        );
        let mut b = HashMap::new();
        b.insert(Var::SM, p("2*q"));
        assert_eq!(p("sm^-1*x1").substitute(&b).unwrap(), p("1/2*q^-1*x1"));
        b.insert(Var::SM, p("q+1"));
        assert!(matches!(
            p("sm^-1").substitute(&b),
            Err(PolyError::NonInvertibleBinding(_))
        ));
    }

    #[test]
    fn laurent_clearing() {
        assert_eq!(p("q^-1*x1*x2*x3").clear_laurent(Var::Q), (p("x1*x2*x3"), 1));
        assert_eq!(p("x1^2").clear_laurent(Var::Q), (p("x1^2"), 0));
    }

    #[test]
    fn coefficient_lookup() {
        let f = p("1/2*t1^2*tm + 1/12*q^12 - 1/96*t11^4");
        let m = Monomial::from_pairs([(Var::Q, 12)]);
        assert_eq!(f.coefficient(&m), ratio(1, 12));
        assert_eq!(f.coefficient(&Monomial::one()), rat(0));
    }
}
