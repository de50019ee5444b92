//! The full battery for one case as a JSON report.

use cuspform::cases::load_case;
use cuspform::frobenius::{verify, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "234".into());
    let case = load_case(&name)?;
    let report = verify(&case, &VerifyOptions::default());
    println!("{}", report.to_json());
    if !report.all_pass() {
        std::process::exit(1);
    }
    Ok(())
}
