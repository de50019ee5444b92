//! The `phi`/`psi` equations: symbolic for 233, seeded random points for 234 and 235.

use cuspform::cases::load_case;
use cuspform::frobenius::{self, Mode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, mode) in [
        ("233", Mode::Symbolic),
        ("234", Mode::Randomized),
        ("235", Mode::Randomized),
    ] {
        let case = load_case(name)?;
        for c in frobenius::verify_phipsi(&case, mode, 5, frobenius::DEFAULT_SEED) {
            println!(
                "{name} {mode:<10} {:<10} {:?} {}",
                c.name,
                c.status,
                c.detail.unwrap_or_default()
            );
        }
    }
    let case = load_case("233")?;
    println!(
        "psi for 233: {}",
        case.psi
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" | ")
    );
    Ok(())
}
