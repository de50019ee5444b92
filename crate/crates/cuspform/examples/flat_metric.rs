//! The metric from third derivatives of the potential, against the closed form.

use cuspform::cases::load_case;
use cuspform::frobenius::{self, format_matrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["233", "234", "235"] {
        let case = load_case(name)?;
        let eta = frobenius::eta_from_potential(&case)?;
        let closed = frobenius::closed_form_eta(&case.triplet);
        println!("{name}: eta = {}", format_matrix(&eta.eta));
        println!("{name}: matches closed form: {}", eta.eta == closed);
    }
    Ok(())
}
