//! Potential calculus and the verification battery for a [`FrobeniusCase`]:
//! flat metric, structure constants, associativity, grading and limit
//! conditions, coordinate changes, the `phi`/`psi` equations and the
//! residue three-point comparison.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::cases::FrobeniusCase;
use crate::ideal::{self, IdealError, MonomialOrder};
use crate::linalg::{self, Matrix};
use crate::ratpoly::{rat, ratio, Poly, PolyError, Rational, Var};
use crate::report::{Check, Report};
use crate::residue::{ResidueError, ResiduePoint};
use crate::unfolding::{self, Point, Tensor3, TripletA, UnfoldingError};

pub const DEFAULT_SEED: u64 = 20231;
pub const DEFAULT_TRIALS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrobeniusError {
    #[error("eta entry ({i},{j}) is not constant: {entry}")]
    NonConstantEta { i: usize, j: usize, entry: String },
    #[error("eta is singular")]
    SingularEta,
    #[error("structure constant C^{k}_({i},{j}) has a pole at q = 0")]
    QLimitSingular { i: usize, j: usize, k: usize },
    #[error("x{0} has no flat direction t{0}1")]
    NoLinearDirection(usize),
    #[error(transparent)]
    Residue(#[from] ResidueError),
    #[error(transparent)]
    Unfolding(#[from] UnfoldingError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Symbolic,
    Randomized,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "symbolic" => Ok(Mode::Symbolic),
            "randomized" => Ok(Mode::Randomized),
            _ => Err(format!(
                "unknown mode `{s}` (expected symbolic or randomized)"
            )),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Symbolic => "symbolic",
            Mode::Randomized => "randomized",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    Eta,
    Wdvv,
    Phipsi,
    Conditions,
    Limit,
    Mirror,
    Coordchange,
}

impl CheckKind {
    pub const ALL: [CheckKind; 7] = [
        CheckKind::Eta,
        CheckKind::Conditions,
        CheckKind::Limit,
        CheckKind::Wdvv,
        CheckKind::Coordchange,
        CheckKind::Phipsi,
        CheckKind::Mirror,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Eta => "eta",
            CheckKind::Wdvv => "wdvv",
            CheckKind::Phipsi => "phipsi",
            CheckKind::Conditions => "conditions",
            CheckKind::Limit => "limit",
            CheckKind::Mirror => "mirror",
            CheckKind::Coordchange => "coordchange",
        }
    }

    /// Parses `all` or a comma-separated list, returned in canonical order.
    pub fn parse_list(text: &str) -> Result<Vec<CheckKind>, String> {
        if text.trim() == "all" {
            return Ok(Self::ALL.to_vec());
        }
        let mut set = BTreeSet::new();
        for part in text.split(',') {
            let k = Self::ALL
                .into_iter()
                .find(|k| k.name() == part.trim())
                .ok_or_else(|| format!("unknown check `{}`", part.trim()))?;
            set.insert(k);
        }
        Ok(Self::ALL.into_iter().filter(|k| set.contains(k)).collect())
    }

    fn stream(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyOptions {
    pub mode: Mode,
    pub trials: usize,
    pub seed: u64,
    pub checks: Vec<CheckKind>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            mode: Mode::Randomized,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            checks: CheckKind::ALL.to_vec(),
        }
    }
}

/// `d/dv` in flat coordinates; along `tm` this is `d/dtm + q d/dq`.
pub fn flat_derivative(p: &Poly, v: Var) -> Poly {
    if v == Var::TM {
        &p.derivative(Var::TM) + &p.log_derivative(Var::Q)
    } else {
        p.derivative(v)
    }
}

/// 1-based flat index with its variable name, e.g. `4:t21`.
fn label(flat: &[Var], i: usize) -> String {
    format!("{}:{}", i + 1, flat[i].name())
}

/// Third flat derivatives of the potential, stored on sorted index triples.
#[derive(Clone, Debug)]
pub struct ThirdDerivatives {
    n: usize,
    data: HashMap<(usize, usize, usize), Poly>,
}

impl ThirdDerivatives {
    pub fn of(potential: &Poly, flat: &[Var]) -> Self {
        let n = flat.len();
        let d1: Vec<Poly> = flat
            .iter()
            .map(|&v| flat_derivative(potential, v))
            .collect();
        let triples: Vec<(usize, usize, usize)> = (0..n)
            .flat_map(|i| (i..n).flat_map(move |j| (j..n).map(move |k| (i, j, k))))
            .collect();
        let data = triples
            .into_par_iter()
            .map(|(i, j, k)| {
                let p = flat_derivative(&flat_derivative(&d1[i], flat[j]), flat[k]);
                ((i, j, k), p)
            })
            .collect();
        ThirdDerivatives { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> &Poly {
        let mut s = [i, j, k];
        s.sort_unstable();
        &self.data[&(s[0], s[1], s[2])]
    }

    /// Evaluates every entry at a point, as a full tensor.
    pub fn at(&self, point: &Point) -> Result<Tensor3, PolyError> {
        let n = self.n;
        let mut vals = HashMap::new();
        for (key, p) in &self.data {
            vals.insert(*key, p.eval(point)?);
        }
        let mut t = vec![vec![vec![Rational::zero(); n]; n]; n];
        for (i, ti) in t.iter_mut().enumerate() {
            for (j, tij) in ti.iter_mut().enumerate() {
                for (k, v) in tij.iter_mut().enumerate() {
                    let mut s = [i, j, k];
                    s.sort_unstable();
                    *v = vals[&(s[0], s[1], s[2])].clone();
                }
            }
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EtaMatrix {
    pub eta: Matrix,
    pub inverse: Matrix,
}

/// `eta_ij = d^3 F / dt1 dt_i dt_j`, which must be constant.
pub fn eta_from_third(d3: &ThirdDerivatives) -> Result<EtaMatrix, FrobeniusError> {
    let n = d3.dim();
    let mut eta = linalg::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let p = d3.get(0, i, j);
            eta[i][j] = p
                .as_constant()
                .ok_or_else(|| FrobeniusError::NonConstantEta {
                    i: i + 1,
                    j: j + 1,
                    entry: p.to_string(),
                })?;
        }
    }
    let inverse = linalg::inverse(&eta).ok_or(FrobeniusError::SingularEta)?;
    Ok(EtaMatrix { eta, inverse })
}

pub fn eta_from_potential(case: &FrobeniusCase) -> Result<EtaMatrix, FrobeniusError> {
    let flat = case.triplet.t_vars();
    eta_from_third(&ThirdDerivatives::of(&case.full_potential(), &flat))
}

/// `eta(t1, tm) = 1`, `eta(t_ij, t_i(a_i - j)) = 1/a_i`, zero otherwise.
pub fn closed_form_eta(a: &TripletA) -> Matrix {
    let flat = a.t_vars();
    let n = flat.len();
    let mut m = linalg::zeros(n, n);
    m[0][n - 1] = rat(1);
    m[n - 1][0] = rat(1);
    for (p, &u) in flat.iter().enumerate() {
        for (r, &w) in flat.iter().enumerate() {
            if let (Some((i, j)), Some((k, l))) = (u.block(), w.block()) {
                if i == k && (j + l) as u32 == a.ai(i) {
                    m[p][r] = ratio(1, a.ai(i) as i64);
                }
            }
        }
    }
    m
}

/// `C[i][j][k] = C^k_ij = sum_l eta^lk T[l][i][j]`.
pub fn contract(eta_inv: &Matrix, t: &Tensor3) -> Tensor3 {
    let n = t.len();
    let mut c = vec![vec![vec![Rational::zero(); n]; n]; n];
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let mut s = Rational::zero();
                for (l, row) in eta_inv.iter().enumerate() {
                    if !row[k].is_zero() && !t[l][i][j].is_zero() {
                        s += &row[k] * &t[l][i][j];
                    }
                }
                c[j][i][k] = s.clone();
                c[i][j][k] = s;
            }
        }
    }
    c
}

/// Symbolic `C^k_ij` as polynomials in `t` and `q`.
pub fn structure_constants_symbolic(d3: &ThirdDerivatives, eta: &EtaMatrix) -> Vec<Vec<Vec<Poly>>> {
    let n = d3.dim();
    let mut c = vec![vec![vec![Poly::zero(); n]; n]; n];
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let p: Poly = (0..n)
                    .filter(|&l| !eta.inverse[l][k].is_zero())
                    .map(|l| d3.get(l, i, j).scale(&eta.inverse[l][k]))
                    .sum();
                c[j][i][k] = p.clone();
                c[i][j][k] = p;
            }
        }
    }
    c
}

/// `C^k_ij` at a point binding every `t` except `tm`, and `q`.
pub fn structure_constants(case: &FrobeniusCase, point: &Point) -> Result<Tensor3, FrobeniusError> {
    let flat = case.triplet.t_vars();
    let d3 = ThirdDerivatives::of(&case.full_potential(), &flat);
    let eta = eta_from_third(&d3)?;
    Ok(contract(&eta.inverse, &d3.at(point)?))
}

/// `F_A(x; s(t, q), sm = q)`.
pub fn composite_unfolding(case: &FrobeniusCase) -> Result<Poly, FrobeniusError> {
    let mut bind: HashMap<Var, Poly> = case.coord_change.iter().cloned().collect();
    bind.insert(Var::SM, Poly::var(Var::Q));
    Ok(unfolding::universal_unfolding(&case.triplet).substitute(&bind)?)
}

fn random_rational(rng: &mut ChaCha8Rng, nonzero: bool) -> Rational {
    loop {
        let n: i64 = rng.gen_range(-9..=9);
        let d: i64 = rng.gen_range(1..=9);
        if !(nonzero && n == 0) {
            return ratio(n, d);
        }
    }
}

/// Random point binding `t1, t_ij` and a nonzero `q`.
pub fn random_point(a: &TripletA, rng: &mut ChaCha8Rng) -> Point {
    let mut p = Point::new();
    for v in a.t_vars() {
        if v != Var::TM {
            p.insert(v, random_rational(rng, false));
        }
    }
    p.insert(Var::Q, random_rational(rng, true));
    p
}

pub fn seeded_points(a: &TripletA, seed: u64, stream: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| random_point(a, &mut rng)).collect()
}

/// `t = 0` with the given `q`.
pub fn origin_point(a: &TripletA, q: Rational) -> Point {
    let mut p: Point = a
        .t_vars()
        .into_iter()
        .filter(|&v| v != Var::TM)
        .map(|v| (v, Rational::zero()))
        .collect();
    p.insert(Var::Q, q);
    p
}

fn describe_point(p: &Point) -> String {
    let mut entries: Vec<(Var, &Rational)> = p.iter().map(|(v, r)| (*v, r)).collect();
    entries.sort_by_key(|(v, _)| v.index());
    entries
        .iter()
        .map(|(v, r)| format!("{}={}", v.name(), r))
        .collect::<Vec<_>>()
        .join(",")
}

/// The potential's η against the closed form.
pub fn eta_checks(case: &FrobeniusCase) -> Vec<Check> {
    let flat = case.triplet.t_vars();
    let eta = match eta_from_potential(case) {
        Ok(e) => e,
        Err(FrobeniusError::NonConstantEta { i, j, entry }) => {
            return vec![Check::fail(
                "eta/constant",
                Some(format!("({},{})", label(&flat, i - 1), label(&flat, j - 1))),
                entry,
            )]
        }
        Err(e) => return vec![Check::fail("eta/constant", None, e.to_string())],
    };
    let closed = closed_form_eta(&case.triplet);
    let mut out = vec![Check::pass("eta/constant")];
    let mismatch = (0..flat.len())
        .flat_map(|i| (0..flat.len()).map(move |j| (i, j)))
        .find(|&(i, j)| eta.eta[i][j] != closed[i][j]);
    out.push(match mismatch {
        None => Check::pass("eta/closed-form").with_detail(format_matrix(&eta.eta)),
        Some((i, j)) => Check::fail(
            "eta/closed-form",
            Some(format!("({},{})", label(&flat, i), label(&flat, j))),
            (&eta.eta[i][j] - &closed[i][j]).to_string(),
        )
        .with_detail(format!(
            "expected {}, potential gives {}",
            closed[i][j], eta.eta[i][j]
        )),
    });
    out
}

pub fn format_matrix(m: &Matrix) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| {
            format!(
                "[{}]",
                r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        })
        .collect();
    format!("[{}]", rows.join(","))
}

/// First `(i, j, k, l)` where `(e_i e_j) e_k` and `e_i (e_j e_k)` differ in the `l` component.
pub fn wdvv_violation(c: &Tensor3) -> Option<((usize, usize, usize, usize), Rational)> {
    let n = c.len();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut lhs = Rational::zero();
                    let mut rhs = Rational::zero();
                    for m in 0..n {
                        if !c[i][j][m].is_zero() && !c[m][k][l].is_zero() {
                            lhs += &c[i][j][m] * &c[m][k][l];
                        }
                        if !c[j][k][m].is_zero() && !c[i][m][l].is_zero() {
                            rhs += &c[j][k][m] * &c[i][m][l];
                        }
                    }
                    if lhs != rhs {
                        return Some(((i, j, k, l), lhs - rhs));
                    }
                }
            }
        }
    }
    None
}

/// Associativity at each point.
pub fn wdvv_check(case: &FrobeniusCase, points: &[Point]) -> Vec<Check> {
    let flat = case.triplet.t_vars();
    let d3 = ThirdDerivatives::of(&case.full_potential(), &flat);
    let eta = match eta_from_third(&d3) {
        Ok(e) => e,
        Err(e) => return vec![Check::fail("wdvv", None, e.to_string())],
    };
    let results: Vec<Result<Option<_>, PolyError>> = points
        .par_iter()
        .map(|p| Ok(wdvv_violation(&contract(&eta.inverse, &d3.at(p)?)).map(|v| (v, p))))
        .collect();
    for r in results {
        match r {
            Err(e) => return vec![Check::fail("wdvv", None, e.to_string())],
            Ok(Some((((i, j, k, l), res), p))) => {
                let loc = format!(
                    "({},{},{},{})",
                    label(&flat, i),
                    label(&flat, j),
                    label(&flat, k),
                    label(&flat, l)
                );
                return vec![
                    Check::fail("wdvv", Some(loc), res.to_string()).with_detail(describe_point(p))
                ];
            }
            Ok(None) => {}
        }
    }
    vec![Check::pass("wdvv").with_detail(format!("{} points", points.len()))]
}

/// The printed Euler field `t1 d/dt1 + sum (a_i - j)/a_i t_ij d/dt_ij + chi d/dtm`.
fn printed_euler(a: &TripletA) -> Vec<(Var, Poly)> {
    let mut e = vec![(Var::T1, Poly::var(Var::T1))];
    for (i, j) in a.blocks() {
        let ai = a.ai(i) as i64;
        e.push((
            Var::t(i, j),
            Poly::var(Var::t(i, j)).scale(&ratio(ai - j as i64, ai)),
        ));
    }
    e.push((Var::TM, Poly::constant(a.chi())));
    e
}

/// Conditions on unit, Euler field, grading, splitting and the designated monomial.
pub fn condition_checks(case: &FrobeniusCase) -> Vec<Check> {
    let a = &case.triplet;
    let deg = a.euler_degrees();
    let mut out = Vec::new();

    // (i) unit and Euler field
    let mut unit_fail = None;
    let mut images: Vec<(Var, Poly)> = case.coord_change.clone();
    images.push((Var::SM, Poly::var(Var::Q)));
    for (v, img) in &images {
        let d = flat_derivative(img, Var::T1);
        let expected = if *v == Var::S1 {
            Poly::one()
        } else {
            Poly::zero()
        };
        if d != expected && unit_fail.is_none() {
            unit_fail = Some(Check::fail(
                "conditions/i/unit",
                Some(v.name()),
                (&d - &expected).to_string(),
            ));
        }
    }
    out.push(unit_fail.unwrap_or_else(|| Check::pass("conditions/i/unit")));

    let printed = printed_euler(a);
    let mut euler_fail = None;
    for (v, coeff) in &printed {
        let from_degrees = if *v == Var::TM {
            Poly::constant(deg.of(Var::Q).cloned().unwrap_or_default())
        } else {
            Poly::var(*v).scale(deg.of(*v).unwrap_or(&Rational::zero()))
        };
        if &from_degrees != coeff {
            euler_fail = Some(Check::fail(
                "conditions/i/euler",
                Some(v.name()),
                (&from_degrees - coeff).to_string(),
            ));
            break;
        }
    }
    if euler_fail.is_none() {
        for (v, img) in &images {
            let pushed: Poly = printed
                .iter()
                .map(|(w, c)| c * &flat_derivative(img, *w))
                .sum();
            let target = img.scale(deg.of(*v).unwrap_or(&Rational::zero()));
            if pushed != target {
                euler_fail = Some(Check::fail(
                    "conditions/i/euler",
                    Some(v.name()),
                    (&pushed - &target).to_string(),
                ));
                break;
            }
        }
    }
    out.push(euler_fail.unwrap_or_else(|| Check::pass("conditions/i/euler")));

    // (iii) homogeneity of F at t1 = 0 and polynomiality in (t_ij, q)
    let f = case.full_potential();
    let zero_t1: Point = [(Var::T1, Rational::zero())].into_iter().collect();
    match f.specialize(&zero_t1) {
        Err(e) => out.push(Check::fail("conditions/iii", None, e.to_string())),
        Ok(f0) => {
            let bad_var = f0
                .terms()
                .iter()
                .find(|(m, _)| m.exp(Var::TM) != 0 || m.pairs().iter().any(|&(_, e)| e < 0));
            out.push(match bad_var {
                Some((m, c)) => Check::fail(
                    "conditions/iii/polynomial",
                    Some(m.to_string()),
                    c.to_string(),
                ),
                None => Check::pass("conditions/iii/polynomial"),
            });
            let r = &deg.apply(&f0) - &f0.scale(&rat(2));
            out.push(if r.is_zero() {
                Check::pass("conditions/iii/euler")
            } else {
                let loc = r.terms()[0].0.to_string();
                Check::fail("conditions/iii/euler", Some(loc), r.to_string())
            });
        }
    }
    let bad_deg = case
        .potential
        .terms()
        .iter()
        .find(|(m, _)| deg.monomial_degree(m, false) != rat(2) || m.exp(Var::TM) != 0);
    out.push(match bad_deg {
        Some((m, c)) => Check::fail(
            "conditions/iii/termwise-degree",
            Some(m.to_string()),
            c.to_string(),
        )
        .with_detail(format!("degree {}", deg.monomial_degree(m, false))),
        None => Check::pass("conditions/iii/termwise-degree"),
    });

    // (iv) splitting at t1 = q = 0
    let zero_t1q: Point = [(Var::T1, Rational::zero()), (Var::Q, Rational::zero())]
        .into_iter()
        .collect();
    match f.specialize(&zero_t1q) {
        Err(e) => out.push(Check::fail("conditions/iv", None, e.to_string())),
        Ok(f00) => {
            let mixed = f00.terms().iter().find(|(m, _)| {
                let blocks: BTreeSet<usize> =
                    m.vars().filter_map(|v| v.block().map(|b| b.0)).collect();
                blocks.len() > 1 || m.exp(Var::TM) != 0
            });
            out.push(match mixed {
                Some((m, c)) => Check::fail("conditions/iv", Some(m.to_string()), c.to_string()),
                None => {
                    let parts: Vec<String> = (1..=3)
                        .map(|i| {
                            let g = Poly::from_terms(
                                f00.terms()
                                    .iter()
                                    .filter(|(m, _)| {
                                        m.vars().any(|v| v.block().map(|b| b.0) == Some(i))
                                    })
                                    .cloned(),
                            );
                            format!("G{i} = {g}")
                        })
                        .collect();
                    Check::pass("conditions/iv").with_detail(parts.join("; "))
                }
            });
        }
    }

    // (vi) designated monomial
    let (m, expected) = designated_monomial(a);
    let got = f.coefficient(&m);
    out.push(if got == expected {
        Check::pass("conditions/vi").with_detail(format!("coefficient of {m} is {got}"))
    } else {
        Check::fail(
            "conditions/vi",
            Some(m.to_string()),
            (&got - &expected).to_string(),
        )
        .with_detail(format!("coefficient of {m} is {got}"))
    });
    out
}

/// Monomial whose coefficient must be 1, by the value of `a1`.
pub fn designated_monomial(a: &TripletA) -> (crate::ratpoly::Monomial, Rational) {
    use crate::ratpoly::Monomial;
    let m = match a.ai(1) {
        1 => Monomial::from_pairs([(Var::t(2, 1), 1), (Var::t(3, 1), 1), (Var::Q, 1)]),
        _ => Monomial::from_pairs([
            (Var::t(1, 1), 1),
            (Var::t(2, 1), 1),
            (Var::t(3, 1), 1),
            (Var::Q, 1),
        ]),
    };
    (m, rat(1))
}

/// Structure constants at `t = 0` in the limit `q -> 0`.
pub fn limit_structure_constants(case: &FrobeniusCase) -> Result<Tensor3, FrobeniusError> {
    let a = &case.triplet;
    let flat = a.t_vars();
    let d3 = ThirdDerivatives::of(&case.full_potential(), &flat);
    let eta = eta_from_third(&d3)?;
    let zero_t: Point = flat
        .iter()
        .filter(|&&v| v != Var::TM)
        .map(|&v| (v, Rational::zero()))
        .collect();
    let c = structure_constants_symbolic(&d3, &eta);
    let n = flat.len();
    let zero_q: Point = [(Var::Q, Rational::zero())].into_iter().collect();
    let mut out = vec![vec![vec![Rational::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = c[i][j][k].specialize(&zero_t)?;
                if p.min_exp(Var::Q) < 0 {
                    return Err(FrobeniusError::QLimitSingular {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                    });
                }
                out[i][j][k] = p.eval(&zero_q)?;
            }
        }
    }
    Ok(out)
}

/// Left multiplication by `e_i` under `c`.
fn mult_by(c: &Tensor3, i: usize, v: &[Rational]) -> Vec<Rational> {
    let n = c.len();
    (0..n)
        .map(|k| {
            (0..n)
                .filter(|&j| !v[j].is_zero())
                .map(|j| &c[i][j][k] * &v[j])
                .sum()
        })
        .collect()
}

fn product(c: &Tensor3, u: &[Rational], v: &[Rational]) -> Vec<Rational> {
    let n = c.len();
    let mut out = vec![Rational::zero(); n];
    for i in 0..n {
        if u[i].is_zero() {
            continue;
        }
        for (k, x) in mult_by(c, i, v).into_iter().enumerate() {
            out[k] += &u[i] * x;
        }
    }
    out
}

/// Image of a polynomial in `x` under `x_i -> e_{t_i1}`, starting from the unit.
fn limit_image(c: &Tensor3, dir: &[usize; 3], p: &Poly) -> Vec<Rational> {
    let n = c.len();
    let mut out = vec![Rational::zero(); n];
    for (m, coef) in p.terms() {
        let mut v = unfolding::unit_vector(n, 0);
        for i in 1..=3 {
            for _ in 0..m.exp(Var::x(i)) {
                v = mult_by(c, dir[i - 1], &v);
            }
        }
        for (k, x) in v.into_iter().enumerate() {
            out[k] += coef * x;
        }
    }
    out
}

/// Compares the `q -> 0` product at `t = 0` with the limit algebra under `d/dt_i1 -> x_i`.
pub fn limit_product_check(case: &FrobeniusCase) -> Vec<Check> {
    match limit_product_inner(case) {
        Ok(v) => v,
        Err(FrobeniusError::QLimitSingular { i, j, k }) => {
            vec![Check::fail(
                "limit/no-pole",
                Some(format!("({i},{j},{k})")),
                "q-pole",
            )]
        }
        Err(e) => vec![Check::fail("limit", None, e.to_string())],
    }
}

fn limit_product_inner(case: &FrobeniusCase) -> Result<Vec<Check>, FrobeniusError> {
    let a = &case.triplet;
    let flat = a.t_vars();
    let c0 = limit_structure_constants(case)?;
    let mut out = vec![Check::pass("limit/no-pole")];
    let mut dir = [0usize; 3];
    for i in 1..=3 {
        dir[i - 1] = flat
            .iter()
            .position(|&v| v == Var::t(i, 1))
            .ok_or(FrobeniusError::NoLinearDirection(i))?;
    }
    let mut rel_fail = None;
    for g in unfolding::limit_ideal_generators(a) {
        let img = limit_image(&c0, &dir, &g);
        if let Some((k, x)) = img.iter().enumerate().find(|(_, x)| !x.is_zero()) {
            rel_fail = Some(Check::fail(
                "limit/relations",
                Some(format!("{g} @ {}", label(&flat, k))),
                x.to_string(),
            ));
            break;
        }
    }
    out.push(rel_fail.unwrap_or_else(|| Check::pass("limit/relations")));

    let ring = unfolding::limit_algebra(a)?;
    let basis = ring.basis();
    let images: Vec<Vec<Rational>> = basis
        .iter()
        .map(|m| limit_image(&c0, &dir, &Poly::term(rat(1), m.clone())))
        .collect();
    let r = linalg::rank(&images);
    out.push(if r == flat.len() && basis.len() == flat.len() {
        Check::pass("limit/bijective")
    } else {
        Check::fail(
            "limit/bijective",
            None,
            format!("rank {r} of {}", flat.len()),
        )
    });

    let unit = limit_image(&c0, &dir, &Poly::one());
    out.push(if unit == unfolding::unit_vector(flat.len(), 0) {
        Check::pass("limit/unit")
    } else {
        Check::fail("limit/unit", None, format!("{unit:?}"))
    });

    let mut tab_fail = None;
    'outer: for (p, bp) in basis.iter().enumerate() {
        for (q, bq) in basis.iter().enumerate().skip(p) {
            let prod = product(&c0, &images[p], &images[q]);
            let coords = ring.coords(&Poly::term(rat(1), bp.mul(bq)))?;
            let mut expected = vec![Rational::zero(); flat.len()];
            for (r, x) in coords.iter().enumerate() {
                for (k, y) in images[r].iter().enumerate() {
                    expected[k] += x * y;
                }
            }
            if let Some(k) = (0..flat.len()).find(|&k| prod[k] != expected[k]) {
                tab_fail = Some(Check::fail(
                    "limit/multiplication",
                    Some(format!("{bp}*{bq} @ {}", label(&flat, k))),
                    (&prod[k] - &expected[k]).to_string(),
                ));
                break 'outer;
            }
        }
    }
    out.push(tab_fail.unwrap_or_else(|| Check::pass("limit/multiplication")));
    Ok(out)
}

/// Homogeneity, origin normalization and block structure of `s(t, q)`.
pub fn coordinate_change_checks(case: &FrobeniusCase) -> Vec<Check> {
    let a = &case.triplet;
    let deg = a.euler_degrees();
    let flat = a.t_vars();
    let mut out = Vec::new();

    let mut hom = None;
    for (v, img) in &case.coord_change {
        let want = deg.of(*v).cloned().unwrap_or_default();
        if let Some((m, c)) = img
            .terms()
            .iter()
            .find(|(m, _)| deg.monomial_degree(m, false) != want || m.exp(Var::TM) != 0)
        {
            hom = Some(
                Check::fail(
                    "coordchange/homogeneous",
                    Some(format!("{} term {m}", v.name())),
                    c.to_string(),
                )
                .with_detail(format!(
                    "degree {} expected {want}",
                    deg.monomial_degree(m, false)
                )),
            );
            break;
        }
    }
    out.push(hom.unwrap_or_else(|| Check::pass("coordchange/homogeneous")));

    let origin = origin_point(a, Rational::zero());
    let mut consts = None;
    let mut jac = None;
    for (p, (v, img)) in case.coord_change.iter().enumerate() {
        match img.eval(&origin) {
            Ok(c0) if !c0.is_zero() => {
                consts.get_or_insert_with(|| {
                    Check::fail("coordchange/constant", Some(v.name()), c0.to_string())
                });
            }
            Err(e) => {
                consts.get_or_insert_with(|| {
                    Check::fail("coordchange/constant", Some(v.name()), e.to_string())
                });
            }
            _ => {}
        }
        for (r, &w) in flat.iter().enumerate() {
            if w == Var::TM {
                continue;
            }
            let d = flat_derivative(img, w)
                .eval(&origin)
                .unwrap_or_else(|_| rat(0));
            let want = if p == r { rat(1) } else { rat(0) };
            if d != want && jac.is_none() {
                jac = Some(Check::fail(
                    "coordchange/jacobian",
                    Some(format!("d{}/d{}", v.name(), w.name())),
                    (&d - &want).to_string(),
                ));
            }
        }
    }
    out.push(consts.unwrap_or_else(|| Check::pass("coordchange/constant")));
    out.push(jac.unwrap_or_else(|| Check::pass("coordchange/jacobian")));

    // s_ij(t, 0) depends only on t1 and the t variables of block i.
    let zero_q: Point = [(Var::Q, Rational::zero())].into_iter().collect();
    let mut block = None;
    for (v, img) in &case.coord_change {
        let Some((i, _)) = v.block() else { continue };
        if let Ok(p) = img.specialize(&zero_q) {
            if let Some(w) = p
                .vars()
                .into_iter()
                .find(|w| w.block().is_some_and(|b| b.0 != i))
            {
                block = Some(Check::fail(
                    "coordchange/block-vanishing",
                    Some(format!("d{}/d{}", v.name(), w.name())),
                    flat_derivative(&p, w).to_string(),
                ));
                break;
            }
        }
    }
    out.push(block.unwrap_or_else(|| Check::pass("coordchange/block-vanishing")));
    out
}

/// Everything the `phi`/`psi` equations need, before specialization.
struct PhiPsiData {
    flat: Vec<Var>,
    d1: Vec<Poly>,
    d2: HashMap<(usize, usize), Poly>,
    fx: [Poly; 3],
    c: Vec<Vec<Vec<Poly>>>,
    eta: Matrix,
}

impl PhiPsiData {
    fn new(case: &FrobeniusCase) -> Result<Self, FrobeniusError> {
        let flat = case.triplet.t_vars();
        let n = flat.len();
        let f = composite_unfolding(case)?;
        let d1: Vec<Poly> = flat.iter().map(|&v| flat_derivative(&f, v)).collect();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let d2 = pairs
            .into_par_iter()
            .map(|(i, j)| ((i, j), flat_derivative(&d1[i], flat[j])))
            .collect();
        let fx = [
            f.derivative(Var::X1),
            f.derivative(Var::X2),
            f.derivative(Var::X3),
        ];
        let d3 = ThirdDerivatives::of(&case.full_potential(), &flat);
        let eta = eta_from_third(&d3)?;
        let c = structure_constants_symbolic(&d3, &eta);
        Ok(PhiPsiData {
            flat,
            d1,
            d2,
            fx,
            c,
            eta: eta.eta,
        })
    }
}

/// Inputs specialized at one point, or kept symbolic.
struct Specialized {
    d1: Vec<Poly>,
    d2: HashMap<(usize, usize), Poly>,
    fx: [Poly; 3],
    c: Vec<Vec<Vec<Poly>>>,
    phi: HashMap<(usize, usize, usize), Poly>,
    psi: [Poly; 3],
}

fn specialize_all(
    data: &PhiPsiData,
    case: &FrobeniusCase,
    point: Option<&Point>,
) -> Result<Specialized, PolyError> {
    let sp = |p: &Poly| -> Result<Poly, PolyError> {
        match point {
            Some(pt) => p.specialize(pt),
            None => Ok(p.clone()),
        }
    };
    let n = data.flat.len();
    let d1 = data.d1.iter().map(sp).collect::<Result<Vec<_>, _>>()?;
    let mut d2 = HashMap::new();
    for (k, p) in &data.d2 {
        d2.insert(*k, sp(p)?);
    }
    let fx = [sp(&data.fx[0])?, sp(&data.fx[1])?, sp(&data.fx[2])?];
    let mut c = vec![vec![vec![Poly::zero(); n]; n]; n];
    for i in 0..n {
        for j in i..n {
            for k in 0..n {
                let p = sp(&data.c[i][j][k])?;
                c[j][i][k] = p.clone();
                c[i][j][k] = p;
            }
        }
    }
    let mut phi = HashMap::new();
    for i in 0..n {
        for j in i..n {
            for a in 1..=3 {
                phi.insert((a, i, j), sp(&case.phi(a, i + 1, j + 1))?);
            }
        }
    }
    let psi = [sp(&case.psi[0])?, sp(&case.psi[1])?, sp(&case.psi[2])?];
    Ok(Specialized {
        d1,
        d2,
        fx,
        c,
        phi,
        psi,
    })
}

/// Residuals of (a) and (b) at flat pair `(i, j)`, 0-based.
fn residuals_ab(s: &Specialized, eta: &Matrix, n: usize, i: usize, j: usize) -> (Poly, Poly) {
    let mu = n - 1;
    let mut ra = &s.d1[i] * &s.d1[j];
    for k in 0..n {
        if !s.c[i][j][k].is_zero() {
            ra = &ra - &(&s.c[i][j][k] * &s.d1[k]);
        }
    }
    for a in 1..=3 {
        let phi = &s.phi[&(a, i, j)];
        if !phi.is_zero() {
            ra = &ra - &(phi * &s.fx[a - 1]);
        }
    }
    let mut rb = &s.d2[&(i, j)] + &Poly::constant(eta[i][j].clone());
    if i == mu {
        rb = &rb - &s.d1[j];
    }
    if j == mu {
        rb = &rb - &s.d1[i];
    }
    for a in 1..=3 {
        rb = &rb - &s.phi[&(a, i, j)].derivative(Var::x(a));
    }
    if i == mu && j == mu {
        for a in 1..=3 {
            rb = &rb - &(&s.psi[a - 1] * &s.fx[a - 1]);
        }
    }
    (ra, rb)
}

/// The single `a` with `r` in the ideal generated by `dF/dx_a`, if any.
fn localize_slot(r: &Poly, fx: &[Poly; 3]) -> Option<usize> {
    let order = MonomialOrder::x();
    (1..=3).find(|&a| {
        let g = &fx[a - 1];
        !g.is_zero()
            && ideal::buchberger(std::slice::from_ref(g), &order)
                .and_then(|gb| gb.normal_form(r))
                .map(|nf| nf.is_zero())
                .unwrap_or(false)
    })
}

/// The `phi`/`psi` equations at every flat pair.
pub fn verify_phipsi(case: &FrobeniusCase, mode: Mode, trials: usize, seed: u64) -> Vec<Check> {
    let data = match PhiPsiData::new(case) {
        Ok(d) => d,
        Err(e) => return vec![Check::fail("phipsi", None, e.to_string())],
    };
    let n = data.flat.len();
    let a = &case.triplet;
    let points = seeded_points(a, seed, CheckKind::Phipsi.stream(), trials.max(1));
    let specs: Vec<(Option<Point>, Specialized)> = match mode {
        Mode::Symbolic => match specialize_all(&data, case, None) {
            Ok(s) => vec![(None, s)],
            Err(e) => return vec![Check::fail("phipsi", None, e.to_string())],
        },
        Mode::Randomized => {
            let mut v = Vec::new();
            for p in points.iter().take(trials) {
                match specialize_all(&data, case, Some(p)) {
                    Ok(s) => v.push((Some(p.clone()), s)),
                    Err(e) => return vec![Check::fail("phipsi", None, e.to_string())],
                }
            }
            v
        }
    };
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();

    let mut fails_a = Vec::new();
    let mut fails_b = Vec::new();
    for (point, s) in &specs {
        let res: Vec<((usize, usize), Poly, Poly)> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let (ra, rb) = residuals_ab(s, &data.eta, n, i, j);
                ((i, j), ra, rb)
            })
            .collect();
        for ((i, j), ra, rb) in res {
            if !ra.is_zero()
                && !fails_a
                    .iter()
                    .any(|&(p, _): &((usize, usize), Check)| p == (i, j))
            {
                let (slot, witness_note) = locate(&ra, s, point.as_ref(), &data, case, &points[0]);
                let loc = format!(
                    "({},{},{})",
                    i + 1,
                    j + 1,
                    slot.map(|a| a.to_string()).unwrap_or_else(|| "*".into())
                );
                let mut chk =
                    Check::fail("phipsi/a", Some(loc), ra.to_string()).with_detail(format!(
                        "{},{}{}",
                        data.flat[i].name(),
                        data.flat[j].name(),
                        witness_note
                    ));
                if let Some(p) = point {
                    chk.detail = Some(format!(
                        "{}; at {}",
                        chk.detail.unwrap_or_default(),
                        describe_point(p)
                    ));
                }
                fails_a.push(((i, j), chk));
            }
            if !rb.is_zero()
                && !fails_b
                    .iter()
                    .any(|&(p, _): &((usize, usize), Check)| p == (i, j))
            {
                let loc = format!("({},{},*)", i + 1, j + 1);
                let mut chk = Check::fail("phipsi/b", Some(loc), rb.to_string())
                    .with_detail(format!("{},{}", data.flat[i].name(), data.flat[j].name()));
                if let Some(p) = point {
                    chk.detail = Some(format!(
                        "{}; at {}",
                        chk.detail.unwrap_or_default(),
                        describe_point(p)
                    ));
                }
                fails_b.push(((i, j), chk));
            }
        }
    }
    fails_a.sort_by_key(|(p, _)| *p);
    fails_b.sort_by_key(|(p, _)| *p);
    let mut out = Vec::new();
    let detail = match mode {
        Mode::Symbolic => format!("{} pairs, symbolic", pairs.len()),
        Mode::Randomized => format!("{} pairs, {} trials", pairs.len(), specs.len()),
    };
    if fails_a.is_empty() {
        out.push(Check::pass("phipsi/a").with_detail(detail.clone()));
    }
    out.extend(fails_a.into_iter().map(|(_, c)| c));
    if fails_b.is_empty() {
        out.push(Check::pass("phipsi/b").with_detail(detail));
    }
    out.extend(fails_b.into_iter().map(|(_, c)| c));

    let div: Poly = (1..=3).map(|a| case.psi[a - 1].derivative(Var::x(a))).sum();
    let rc = &div - &Poly::one();
    out.push(if rc.is_zero() {
        Check::pass("phipsi/c")
    } else {
        Check::fail("phipsi/c", Some(format!("({n},{n},*)")), rc.to_string())
    });
    out
}

/// Slot `a` for a nonzero residual of (a); symbolic residuals are localized at `fallback`.
fn locate(
    r: &Poly,
    s: &Specialized,
    point: Option<&Point>,
    data: &PhiPsiData,
    case: &FrobeniusCase,
    fallback: &Point,
) -> (Option<usize>, String) {
    match point {
        Some(_) => (localize_slot(r, &s.fx), String::new()),
        None => {
            let _ = case;
            let (Ok(rr), Ok(f1), Ok(f2), Ok(f3)) = (
                r.specialize(fallback),
                data.fx[0].specialize(fallback),
                data.fx[1].specialize(fallback),
                data.fx[2].specialize(fallback),
            ) else {
                return (None, String::new());
            };
            if rr.is_zero() {
                return (None, String::new());
            }
            (
                localize_slot(&rr, &[f1, f2, f3]),
                "; slot localized at a seeded point".into(),
            )
        }
    }
}

/// Potential third derivatives against residue three-point functions at each point.
pub fn mirror_crosscheck(case: &FrobeniusCase, points: &[Point]) -> Vec<Check> {
    match mirror_inner(case, points) {
        Ok(c) => c,
        Err(e) => vec![Check::fail("mirror", None, e.to_string())],
    }
}

/// Index triple with potential and residue values.
type Mismatch = ((usize, usize, usize), Rational, Rational);

fn mirror_inner(case: &FrobeniusCase, points: &[Point]) -> Result<Vec<Check>, FrobeniusError> {
    let flat = case.triplet.t_vars();
    let n = flat.len();
    let f = composite_unfolding(case)?;
    let d1: Vec<Poly> = flat.iter().map(|&v| flat_derivative(&f, v)).collect();
    let d3 = ThirdDerivatives::of(&case.full_potential(), &flat);
    let triples: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (i..n).flat_map(move |j| (j..n).map(move |k| (i, j, k))))
        .collect();
    for p in points {
        let rp = ResiduePoint::new(&f, Var::Q, p)?;
        let d1p = d1
            .iter()
            .map(|g| g.specialize(p))
            .collect::<Result<Vec<_>, _>>()?;
        let pot = d3.at(p)?;
        let results: Vec<Result<Option<Mismatch>, FrobeniusError>> = triples
            .par_iter()
            .map(|&(i, j, k)| {
                let res = rp.three_point(&d1p[i], &d1p[j], &d1p[k])?;
                Ok((res != pot[i][j][k]).then(|| ((i, j, k), pot[i][j][k].clone(), res)))
            })
            .collect();
        for r in results {
            if let Some(((i, j, k), lhs, rhs)) = r? {
                let loc = format!(
                    "({},{},{})",
                    label(&flat, i),
                    label(&flat, j),
                    label(&flat, k)
                );
                return Ok(vec![Check::fail(
                    "mirror",
                    Some(loc),
                    (&lhs - &rhs).to_string(),
                )
                .with_detail(format!(
                    "potential {lhs}, residue {rhs}; at {}",
                    describe_point(p)
                ))]);
            }
        }
    }
    Ok(vec![Check::pass("mirror").with_detail(format!(
        "{} points, {} entries each",
        points.len(),
        triples.len()
    ))])
}

/// Runs the selected checks and collects a report.
pub fn verify(case: &FrobeniusCase, opts: &VerifyOptions) -> Report {
    let a = &case.triplet;
    let mut report = Report::new(case.name.clone(), opts.seed, opts.trials);
    let pts = |kind: CheckKind, count: usize| seeded_points(a, opts.seed, kind.stream(), count);
    for kind in &opts.checks {
        let checks = match kind {
            CheckKind::Eta => eta_checks(case),
            CheckKind::Conditions => condition_checks(case),
            CheckKind::Limit => limit_product_check(case),
            CheckKind::Coordchange => coordinate_change_checks(case),
            CheckKind::Wdvv => wdvv_check(case, &pts(CheckKind::Wdvv, opts.trials.max(1))),
            CheckKind::Phipsi => verify_phipsi(case, opts.mode, opts.trials, opts.seed),
            CheckKind::Mirror => {
                mirror_crosscheck(case, &pts(CheckKind::Mirror, opts.trials.clamp(1, 3)))
            }
        };
        report.extend(checks);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::load_case;

    #[test]
    fn flat_tm_derivative() {
        let p: Poly = "1/2*t1^2*tm + q^3*t11".parse().unwrap();
        assert_eq!(
            flat_derivative(&p, Var::TM),
            "1/2*t1^2 + 3*q^3*t11".parse().unwrap()
        );
    }

    #[test]
    fn eta_233() {
        let case = load_case("233").unwrap();
        let eta = eta_from_potential(&case).unwrap();
        assert_eq!(eta.eta[0][6], rat(1));
        assert_eq!(eta.eta[2][3], ratio(1, 3));
        assert_eq!(eta.eta[1][2], rat(0));
        assert_eq!(eta.eta, closed_form_eta(&case.triplet));
    }

    #[test]
    fn unit_constants() {
        let case = load_case("233").unwrap();
        let p = seeded_points(&case.triplet, 3, 0, 1).remove(0);
        let c = structure_constants(&case, &p).unwrap();
        for j in 0..7 {
            for k in 0..7 {
                assert_eq!(c[0][j][k], if j == k { rat(1) } else { rat(0) });
            }
        }
    }

    #[test]
    fn wdvv_origin_233() {
        let case = load_case("233").unwrap();
        let checks = wdvv_check(&case, &[origin_point(&case.triplet, rat(1))]);
        assert!(checks.iter().all(Check::passed), "{checks:?}");
    }

    #[test]
    fn mode_and_checks_parse() {
        assert_eq!("symbolic".parse::<Mode>().unwrap(), Mode::Symbolic);
        assert!("fast".parse::<Mode>().is_err());
        assert_eq!(
            CheckKind::parse_list("wdvv,eta").unwrap(),
            vec![CheckKind::Eta, CheckKind::Wdvv]
        );
        assert_eq!(CheckKind::parse_list("all").unwrap().len(), 7);
        assert!(CheckKind::parse_list("eta,nope").is_err());
    }
}
