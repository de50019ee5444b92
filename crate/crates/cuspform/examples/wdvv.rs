//! Associativity of the product from the potential, and a perturbed potential that breaks it.

use cuspform::cases::load_case;
use cuspform::frobenius;
use cuspform::ratpoly::{ratio, Poly, Var};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["233", "234", "235"] {
        let case = load_case(name)?;
        let points = frobenius::seeded_points(&case.triplet, frobenius::DEFAULT_SEED, 0, 5);
        let c = frobenius::wdvv_check(&case, &points);
        println!("{name}: {:?}", c[0].status);
    }
    let mut case = load_case("233")?;
    case.potential = &case.potential + &Poly::var_pow(Var::t(2, 1), 3);
    let c = frobenius::wdvv_check(
        &case,
        &[frobenius::origin_point(&case.triplet, ratio(1, 1))],
    );
    println!(
        "233 + t21^3: {:?} at {:?}, residual {:?}",
        c[0].status, c[0].location, c[0].residual
    );
    Ok(())
}
