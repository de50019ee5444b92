//! Randomized self-checks of the polynomial, ideal and residue layers.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg;
use crate::ratpoly::{rat, ratio, Monomial, Poly, Rational, Var};
use crate::report::{Check, Report};
use crate::residue::{self, ResidueFunctional};
use crate::unfolding::{self, Point, TripletA};

#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    pub trials: usize,
    /// Perturbs one multiplication table before the ring checks run.
    pub corrupt_table: bool,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: crate::frobenius::DEFAULT_SEED,
            trials: crate::frobenius::DEFAULT_TRIALS,
            corrupt_table: false,
        }
    }
}

pub fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    ratio(rng.gen_range(-9..=9), rng.gen_range(1..=9))
}

/// Random polynomial over `vars`; Laurent variables may get negative exponents.
pub fn random_poly(rng: &mut ChaCha8Rng, vars: &[Var], max_terms: usize, max_exp: i32) -> Poly {
    let n = rng.gen_range(0..=max_terms);
    Poly::from_terms((0..n).map(|_| {
        let m = Monomial::from_pairs(vars.iter().map(|&v| {
            let lo = if v.is_laurent() { -max_exp } else { 0 };
            (v, rng.gen_range(lo..=max_exp))
        }));
        (m, random_rational(rng))
    }))
}

/// Random `s` values with nonzero `sm`.
pub fn random_s_point(a: &TripletA, rng: &mut ChaCha8Rng) -> Point {
    let mut p: Point = a
        .s_vars()
        .into_iter()
        .map(|v| (v, random_rational(rng)))
        .collect();
    let mut sm = random_rational(rng);
    while sm.is_zero() {
        sm = random_rational(rng);
    }
    p.insert(Var::SM, sm);
    p
}

fn first_failure<T>(
    name: &str,
    items: impl IntoIterator<Item = T>,
    mut f: impl FnMut(T) -> Option<(String, String)>,
) -> Check {
    for item in items {
        if let Some((loc, res)) = f(item) {
            return Check::fail(name, Some(loc), res);
        }
    }
    Check::pass(name)
}

pub fn selftest(opts: &SelftestOptions) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut report = Report::new("selftest", opts.seed, opts.trials);
    let vars = [Var::X1, Var::X2, Var::T1, Var::Q];
    let rounds = 40 * opts.trials.max(1);

    let triples: Vec<[Poly; 3]> = (0..rounds)
        .map(|_| std::array::from_fn(|_| random_poly(&mut rng, &vars, 4, 2)))
        .collect();
    report.checks.push(first_failure(
        "ratpoly/ring-axioms",
        triples.iter().enumerate(),
        |(k, [p, q, r])| {
            let checks = [
                (&(p + q) + r) - (p + &(q + r)),
                (&(p * q) * r) - (p * &(q * r)),
                (p * q) - (q * p),
                (p * &(q + r)) - (&(p * q) + &(p * r)),
                (p * &Poly::one()) - p.clone(),
                (p + &(-p)),
            ];
            checks
                .into_iter()
                .find(|d| !d.is_zero())
                .map(|d| (format!("sample {k}"), d.to_string()))
        },
    ));
    report.checks.push(first_failure(
        "ratpoly/leibniz",
        triples.iter().enumerate(),
        |(k, [p, q, _])| {
            vars.iter().find_map(|&v| {
                let d = (p * q).derivative(v) - (&(&p.derivative(v) * q) + &(p * &q.derivative(v)));
                (!d.is_zero()).then(|| (format!("sample {k} d/d{}", v.name()), d.to_string()))
            })
        },
    ));
    report.checks.push(first_failure(
        "ratpoly/print-parse",
        triples.iter().enumerate(),
        |(k, [p, _, _])| match p.to_string().parse::<Poly>() {
            Ok(back) if &back == p => None,
            Ok(back) => Some((format!("sample {k}"), (&back - p).to_string())),
            Err(e) => Some((format!("sample {k}"), e.to_string())),
        },
    ));
    report.checks.push(first_failure(
        "ratpoly/substitution",
        triples.iter().enumerate(),
        |(k, [p, q, r])| {
            let bind = [
                (Var::X1, r.clone()),
                (Var::T1, Poly::var(Var::X2) + Poly::int(1)),
            ]
            .into_iter()
            .collect();
            let lhs = (p * q).substitute(&bind).ok()?;
            let rhs = &p.substitute(&bind).ok()? * &q.substitute(&bind).ok()?;
            let d = lhs - rhs;
            (!d.is_zero()).then(|| (format!("sample {k}"), d.to_string()))
        },
    ));

    let mut rank_fail = None;
    for a in TripletA::affine_list() {
        let p = random_s_point(&a, &mut rng);
        match unfolding::jacobi_ring(&unfolding::universal_unfolding(&a), Var::SM, &p) {
            Ok(jr) if jr.dim() == a.mu() => {}
            Ok(jr) => {
                rank_fail = Some(Check::fail(
                    "ideal/milnor-rank",
                    Some(a.to_string()),
                    format!("dim {} vs {}", jr.dim(), a.mu()),
                ));
                break;
            }
            Err(e) => {
                rank_fail = Some(Check::fail(
                    "ideal/milnor-rank",
                    Some(a.to_string()),
                    e.to_string(),
                ));
                break;
            }
        }
    }
    report
        .checks
        .push(rank_fail.unwrap_or_else(|| Check::pass("ideal/milnor-rank")));

    let mut tables = Vec::new();
    let mut nf = Vec::new();
    let mut trace = Vec::new();
    let mut gram = Vec::new();
    let mut basis_values = Vec::new();
    for a in [
        TripletA::new(2, 3, 3),
        TripletA::new(2, 3, 4),
        TripletA::new(2, 3, 5),
    ]
    .into_iter()
    .flatten()
    {
        let p = random_s_point(&a, &mut rng);
        let mut jr = match unfolding::jacobi_ring(&unfolding::universal_unfolding(&a), Var::SM, &p)
        {
            Ok(jr) => jr,
            Err(e) => {
                tables.push(Check::fail(
                    "ideal/tables",
                    Some(a.to_string()),
                    e.to_string(),
                ));
                continue;
            }
        };
        if opts.corrupt_table {
            let k = 1.min(jr.dim() - 1);
            let mut m = jr.ring.mult_table(k).clone();
            m[0][0] += rat(1);
            jr.ring = jr.ring.clone().with_mult_table(k, m);
        }
        tables.push(match jr.ring.check_tables() {
            Ok(()) => Check::pass("ideal/tables"),
            Err(msg) => Check::fail("ideal/tables", Some(a.to_string()), msg),
        });

        let hs: Vec<Poly> = (0..20 * opts.trials.max(1))
            .map(|_| random_poly(&mut rng, &[Var::X1, Var::X2, Var::X3], 4, 4))
            .collect();
        nf.push(first_failure("ideal/normal-form", hs.iter(), |h| {
            let once = jr.ring.normal_form(h).ok()?;
            let twice = jr.ring.normal_form(&once).ok()?;
            (once != twice).then(|| (a.to_string(), (&twice - &once).to_string()))
        }));

        let rf = match ResidueFunctional::for_jacobi(&jr) {
            Ok(rf) => rf,
            Err(e) => {
                trace.push(Check::fail(
                    "residue/trace-oracle",
                    Some(a.to_string()),
                    e.to_string(),
                ));
                continue;
            }
        };
        trace.push(first_failure(
            "residue/trace-oracle",
            hs.iter(),
            |h| match residue::trace_oracle(&rf, &jr.generators, h) {
                Ok((l, r)) if l == r => None,
                Ok((l, r)) => Some((format!("{a} h={h}"), (l - r).to_string())),
                Err(e) => Some((a.to_string(), e.to_string())),
            },
        ));
        let g = rf.gram();
        gram.push(
            if linalg::is_symmetric(&g) && linalg::inverse(&g).is_some() {
                Check::pass("residue/gram")
            } else {
                Check::fail(
                    "residue/gram",
                    Some(a.to_string()),
                    "gram matrix not symmetric or singular",
                )
            },
        );

        let origin = unfolding::origin_with_sm(&a, p[&Var::SM].clone());
        let sm = p[&Var::SM].clone();
        let check = residue::ResiduePoint::unfolding(&a, &origin)
            .map_err(|e| e.to_string())
            .and_then(|rp| {
                let mut zeros = vec![Poly::one()];
                for i in 1..=3 {
                    for j in 1..a.ai(i) as i32 {
                        zeros.push(Poly::var_pow(Var::x(i), j));
                    }
                }
                for h in zeros {
                    let r = rp.residue(&h).map_err(|e| e.to_string())?;
                    if !r.is_zero() {
                        return Err(format!("Res({h}) = {r}"));
                    }
                }
                let r = rp.residue(&residue::xyz()).map_err(|e| e.to_string())?;
                let want = &sm * &sm * &sm;
                if r != want {
                    return Err(format!("Res(x1*x2*x3) = {r}, expected {want}"));
                }
                Ok(())
            });
        basis_values.push(match check {
            Ok(()) => Check::pass("residue/basis-values"),
            Err(msg) => Check::fail("residue/basis-values", Some(a.to_string()), msg),
        });
    }
    for group in [tables, nf, trace, gram, basis_values] {
        report.checks.push(merge(group));
    }
    report
}

/// One check per name: the first failure, else a pass.
fn merge(group: Vec<Check>) -> Check {
    let name = group.first().map(|c| c.name.clone()).unwrap_or_default();
    group
        .iter()
        .find(|c| !c.passed())
        .cloned()
        .unwrap_or_else(|| Check::pass(name))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_and_detects_corruption() {
        let ok = selftest(&SelftestOptions {
            seed: 1,
            trials: 1,
            corrupt_table: false,
        });
        assert!(ok.all_pass(), "{}", ok.to_json());
        let bad = selftest(&SelftestOptions {
            seed: 1,
            trials: 1,
            corrupt_table: true,
        });
        assert!(!bad.all_pass());
    }
}
