//! Case files: potential, flat coordinates, `phi` and `psi` data for one triplet.
//!
//! ```text
//! # comment
//! checksum = sha256:<hex>        (optional)
//! triplet = 2,3,3
//! [potential] 9                  (line count optional)
//! <poly, may span lines>
//! [tmu_term]
//! 1/2*t1^2*tm
//! [coordinate_change]
//! s11 = t11 - 8*q^3
//! [phi]
//! 1 2 2 = 1/2*x1
//! [psi]
//! 1 = x1 + 18*q^3
//! ```
//!
//! Slot entries may continue on following lines that contain no `=`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ratpoly::{Poly, PolyError, Var};
use crate::unfolding::{TripletA, UnfoldingError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {err}")]
    Poly { line: usize, err: PolyError },
    #[error("duplicate slot {0}")]
    DuplicateSlot(String),
    #[error("missing coordinate-change entry for {0}")]
    MissingCoordinateChange(String),
    #[error("section [{section}] declares {declared} lines, found {found}")]
    LineCount {
        section: String,
        declared: usize,
        found: usize,
    },
    #[error("checksum mismatch: file says {declared}, content hashes to {actual}")]
    Checksum { declared: String, actual: String },
    #[error("missing `triplet = a1,a2,a3` header")]
    MissingTriplet,
    #[error(transparent)]
    Triplet(#[from] UnfoldingError),
    #[error("no case named `{0}`")]
    NotFound(String),
}

/// One dataset: potential, coordinate change `s(t, q)`, `phi`, `psi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobeniusCase {
    pub name: String,
    pub triplet: TripletA,
    /// Part of the potential polynomial in `t` and `q`.
    pub potential: Poly,
    /// The `tm`-linear part of the potential.
    pub tmu_term: Poly,
    /// `s1, s_ij` images in flat order.
    pub coord_change: Vec<(Var, Poly)>,
    /// `(a, i, j)` with `i <= j`, 1-based flat indices.
    pub phi: BTreeMap<(usize, usize, usize), Poly>,
    pub psi: [Poly; 3],
}

impl FrobeniusCase {
    pub fn mu(&self) -> usize {
        self.triplet.mu()
    }

    /// Full potential including the `tm` term.
    pub fn full_potential(&self) -> Poly {
        &self.potential + &self.tmu_term
    }

    /// `phi^a_{ij}`, read symmetrically; absent slots are zero.
    pub fn phi(&self, a: usize, i: usize, j: usize) -> Poly {
        let key = (a, i.min(j), i.max(j));
        self.phi.get(&key).cloned().unwrap_or_default()
    }

    pub fn coord(&self, v: Var) -> Option<&Poly> {
        self.coord_change
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, p)| p)
    }
}

pub const CASE_NAMES: [&str; 3] = ["233", "234", "235"];

const EMBEDDED: [(&str, &str); 3] = [
    ("233", include_str!("../data/233.case")),
    ("234", include_str!("../data/234.case")),
    ("235", include_str!("../data/235.case")),
];

pub fn list_cases() -> Vec<&'static str> {
    CASE_NAMES.to_vec()
}

/// Embedded source text of a case.
pub fn case_text(name: &str) -> Result<&'static str, CaseError> {
    EMBEDDED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CaseError::NotFound(name.to_string()))
}

pub fn lookup_triplet(name: &str) -> Result<TripletA, CaseError> {
    match name {
        "233" => Ok(TripletA::new(2, 3, 3)?),
        "234" => Ok(TripletA::new(2, 3, 4)?),
        "235" => Ok(TripletA::new(2, 3, 5)?),
        _ => Err(CaseError::NotFound(name.to_string())),
    }
}

pub fn load_case(name: &str) -> Result<FrobeniusCase, CaseError> {
    let mut c = parse_case_file(case_text(name)?)?;
    c.name = name.to_string();
    Ok(c)
}

const SECTIONS: [&str; 5] = ["potential", "tmu_term", "coordinate_change", "phi", "psi"];

/// Lines that enter the checksum.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim_end()))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        })
}

pub fn checksum(text: &str) -> String {
    let body: Vec<&str> = content_lines(text)
        .map(|(_, l)| l)
        .filter(|l| !l.trim_start().starts_with("checksum"))
        .collect();
    let digest = Sha256::digest(body.join("\n").as_bytes());
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    format!("sha256:{hex}")
}

struct Entry {
    line: usize,
    lhs: Option<String>,
    rhs: String,
}

/// Header line, declared line count, entries, content line count.
type Section = (usize, Option<usize>, Vec<Entry>, usize);

pub fn parse_case_file(text: &str) -> Result<FrobeniusCase, CaseError> {
    let mut triplet = None;
    let mut declared_sum = None;
    let mut sections: BTreeMap<&str, Section> = BTreeMap::new();
    let mut current: Option<&str> = None;
    for (ln, line) in content_lines(text) {
        let t = line.trim();
        if let Some(rest) = t.strip_prefix('[') {
            let (name, count) = rest.split_once(']').ok_or(CaseError::Syntax {
                line: ln,
                msg: "unterminated section header".into(),
            })?;
            let name = SECTIONS
                .iter()
                .find(|s| **s == name.trim())
                .ok_or_else(|| CaseError::Syntax {
                    line: ln,
                    msg: format!("unknown section [{name}]"),
                })?;
            if sections.contains_key(name) {
                return Err(CaseError::Syntax {
                    line: ln,
                    msg: format!("repeated section [{name}]"),
                });
            }
            let count = count.trim();
            let declared = if count.is_empty() {
                None
            } else {
                Some(count.parse().map_err(|_| CaseError::Syntax {
                    line: ln,
                    msg: "bad line count".into(),
                })?)
            };
            sections.insert(name, (ln, declared, Vec::new(), 0));
            current = Some(name);
            continue;
        }
        let Some(sec) = current else {
            let (k, v) = t.split_once('=').ok_or(CaseError::Syntax {
                line: ln,
                msg: "expected `key = value`".into(),
            })?;
            match k.trim() {
                "triplet" => triplet = Some(TripletA::parse(v.trim())?),
                "checksum" => declared_sum = Some(v.trim().to_string()),
                other => {
                    return Err(CaseError::Syntax {
                        line: ln,
                        msg: format!("unknown header `{other}`"),
                    })
                }
            }
            continue;
        };
        let entry = sections.get_mut(sec).expect("current section");
        entry.3 += 1;
        let slot = matches!(sec, "coordinate_change" | "phi" | "psi");
        if slot {
            if let Some((l, r)) = t.split_once('=') {
                entry.2.push(Entry {
                    line: ln,
                    lhs: Some(l.trim().to_string()),
                    rhs: r.to_string(),
                });
                continue;
            }
        }
        match entry.2.last_mut() {
            Some(e) => {
                e.rhs.push(' ');
                e.rhs.push_str(t);
            }
            None if !slot => entry.2.push(Entry {
                line: ln,
                lhs: None,
                rhs: t.to_string(),
            }),
            None => {
                return Err(CaseError::Syntax {
                    line: ln,
                    msg: "continuation line before any entry".into(),
                })
            }
        }
    }
    if let Some(d) = declared_sum {
        let actual = checksum(text);
        if d != actual {
            return Err(CaseError::Checksum {
                declared: d,
                actual,
            });
        }
    }
    let triplet = triplet.ok_or(CaseError::MissingTriplet)?;
    for (name, (_, declared, _, found)) in &sections {
        if let Some(d) = declared {
            if d != found {
                return Err(CaseError::LineCount {
                    section: name.to_string(),
                    declared: *d,
                    found: *found,
                });
            }
        }
    }
    let reg = triplet.registry();
    let parse = |e: &Entry, allow: &dyn Fn(Var) -> bool| -> Result<Poly, CaseError> {
        let p = Poly::parse(&e.rhs, &reg).map_err(|err| CaseError::Poly { line: e.line, err })?;
        if let Some(v) = p.vars().into_iter().find(|v| !allow(*v)) {
            return Err(CaseError::Poly {
                line: e.line,
                err: PolyError::UnknownVariable(v.name()),
            });
        }
        Ok(p)
    };
    let is_t =
        |v: Var| v == Var::T1 || v == Var::Q || (v.block().is_some() && v.name().starts_with('t'));
    let body = |name: &str| sections.get(name).map(|s| &s.2);

    let mut potential = Poly::zero();
    for e in body("potential").into_iter().flatten() {
        potential = potential + parse(e, &is_t)?;
    }
    let mut tmu_term = Poly::zero();
    for e in body("tmu_term").into_iter().flatten() {
        tmu_term = tmu_term + parse(e, &|v| is_t(v) || v == Var::TM)?;
    }
    if tmu_term.max_exp(Var::TM) > 1 || tmu_term.terms().iter().any(|(m, _)| m.exp(Var::TM) != 1) {
        let line = sections.get("tmu_term").map_or(0, |s| s.0);
        return Err(CaseError::Syntax {
            line,
            msg: "tmu_term must be linear in tm".into(),
        });
    }

    let svars: Vec<Var> = triplet
        .s_vars()
        .into_iter()
        .filter(|v| *v != Var::SM)
        .collect();
    let mut cc: BTreeMap<Var, Poly> = BTreeMap::new();
    for e in body("coordinate_change").into_iter().flatten() {
        let lhs = e.lhs.as_deref().unwrap_or("");
        let v = Var::from_name(lhs)
            .filter(|v| svars.contains(v))
            .ok_or_else(|| CaseError::Poly {
                line: e.line,
                err: PolyError::UnknownVariable(lhs.to_string()),
            })?;
        if cc.insert(v, parse(e, &is_t)?).is_some() {
            return Err(CaseError::DuplicateSlot(lhs.to_string()));
        }
    }
    let mut coord_change = Vec::new();
    for v in svars {
        let p = cc
            .remove(&v)
            .ok_or_else(|| CaseError::MissingCoordinateChange(v.name()))?;
        coord_change.push((v, p));
    }

    let is_xt = |v: Var| v.is_x() || is_t(v);
    let mu = triplet.mu();
    let mut phi = BTreeMap::new();
    for e in body("phi").into_iter().flatten() {
        let lhs = e.lhs.as_deref().unwrap_or("");
        let idx: Vec<usize> = lhs
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| bad_slot(e.line, lhs))?;
        let &[a, i, j] = idx.as_slice() else {
            return Err(bad_slot(e.line, lhs));
        };
        if !(1..=3).contains(&a) || i < 1 || i > j || j > mu {
            return Err(bad_slot(e.line, lhs));
        }
        if phi.insert((a, i, j), parse(e, &is_xt)?).is_some() {
            return Err(CaseError::DuplicateSlot(format!("phi {a} {i} {j}")));
        }
    }
    let mut psi: [Option<Poly>; 3] = [None, None, None];
    for e in body("psi").into_iter().flatten() {
        let lhs = e.lhs.as_deref().unwrap_or("");
        let a: usize = lhs.trim().parse().map_err(|_| bad_slot(e.line, lhs))?;
        if !(1..=3).contains(&a) {
            return Err(bad_slot(e.line, lhs));
        }
        if psi[a - 1].replace(parse(e, &is_xt)?).is_some() {
            return Err(CaseError::DuplicateSlot(format!("psi {a}")));
        }
    }
    let psi = psi.map(Option::unwrap_or_default);
    let name = triplet
        .a()
        .iter()
        .map(|x| x.to_string())
        .collect::<String>();
    Ok(FrobeniusCase {
        name,
        triplet,
        potential,
        tmu_term,
        coord_change,
        phi,
        psi,
    })
}

fn bad_slot(line: usize, lhs: &str) -> CaseError {
    CaseError::Syntax {
        line,
        msg: format!("bad slot `{lhs}`"),
    }
}

/// Canonical text of a case, with line counts and checksum.
pub fn format_case_file(c: &FrobeniusCase) -> String {
    let mut body = format!("triplet = {}\n", c.triplet);
    let mut section = |name: &str, lines: Vec<String>| {
        let _ = writeln!(body, "[{name}] {}", lines.len());
        for l in lines {
            body.push_str(&l);
            body.push('\n');
        }
    };
    section("potential", vec![c.potential.to_string()]);
    section("tmu_term", vec![c.tmu_term.to_string()]);
    section(
        "coordinate_change",
        c.coord_change
            .iter()
            .map(|(v, p)| format!("{v} = {p}"))
            .collect(),
    );
    section(
        "phi",
        c.phi
            .iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|((a, i, j), p)| format!("{a} {i} {j} = {p}"))
            .collect(),
    );
    section(
        "psi",
        c.psi
            .iter()
            .enumerate()
            .map(|(a, p)| format!("{} = {p}", a + 1))
            .collect(),
    );
    let sum = checksum(&body);
    format!("checksum = {sum}\n{body}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoly::{ratio, Monomial};

    #[test]
    fn embedded_233() {
        let c = load_case("233").unwrap();
        assert_eq!(c.mu(), 7);
        assert_eq!(c.phi(1, 2, 2), "1/2*x1".parse().unwrap());
        let pot = c.full_potential();
        let m = |pairs: &[(Var, i32)]| Monomial::from_pairs(pairs.iter().copied());
        assert_eq!(
            pot.coefficient(&m(&[(Var::T1, 2), (Var::TM, 1)])),
            ratio(1, 2)
        );
        assert_eq!(pot.coefficient(&m(&[(Var::t(2, 1), 3)])), ratio(1, 18));
        assert_eq!(pot.coefficient(&m(&[(Var::Q, 12)])), ratio(1, 12));
        let m4 = m(&[
            (Var::t(1, 1), 1),
            (Var::t(2, 1), 1),
            (Var::t(3, 1), 1),
            (Var::Q, 1),
        ]);
        assert_eq!(pot.coefficient(&m4), ratio(1, 1));
        assert!(c.phi.keys().all(|&(a, i, j)| a <= 3 && i <= j && j <= 7));
        assert!(c.phi.len() <= 3 * 28);
    }

    #[test]
    fn registry() {
        assert_eq!(list_cases(), vec!["233", "234", "235"]);
        assert_eq!(
            lookup_triplet("233").unwrap(),
            TripletA::new(2, 3, 3).unwrap()
        );
        assert_eq!(
            lookup_triplet("999"),
            Err(CaseError::NotFound("999".into()))
        );
    }

    #[test]
    fn minimal_file_and_errors() {
        let base = "triplet = 1,1,2\n[potential]\n1/2*t1*t31^2\n[tmu_term]\n1/2*t1^2*tm\n[coordinate_change]\ns1 = t1\ns31 = t31\n[phi]\n1 2 2 = 1/2*x1\n[psi]\n1 = x1\n";
        let c = parse_case_file(base).unwrap();
        assert_eq!(c.phi(1, 2, 2), "1/2*x1".parse().unwrap());
        assert!(c.psi[1].is_zero());
        let missing = base.replace("s31 = t31\n", "");
        assert_eq!(
            parse_case_file(&missing),
            Err(CaseError::MissingCoordinateChange("s31".into()))
        );
        let dup = base.replace("[psi]\n1 = x1", "[psi]\n1 = x1\n1 = x2");
        assert!(matches!(
            parse_case_file(&dup),
            Err(CaseError::DuplicateSlot(_))
        ));
        let unknown = base.replace("s31 = t31", "s31 = t32");
        assert!(matches!(
            parse_case_file(&unknown),
            Err(CaseError::Poly { .. })
        ));
        let counted = base.replace("[phi]", "[phi] 2");
        assert!(matches!(
            parse_case_file(&counted),
            Err(CaseError::LineCount { .. })
        ));
    }

    #[test]
    fn checksum_detects_edit() {
        let text = case_text("233").unwrap();
        let edited = text.replacen("1/96*t11^4", "1/95*t11^4", 1);
        assert!(matches!(
            parse_case_file(&edited),
            Err(CaseError::Checksum { .. })
        ));
    }

    #[test]
    fn round_trip() {
        for name in CASE_NAMES {
            let c = load_case(name).unwrap();
            let again = parse_case_file(&format_case_file(&c)).unwrap();
            assert_eq!(again, c);
        }
    }
}
