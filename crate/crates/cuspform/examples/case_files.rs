//! Reading, printing and re-reading case files.

use cuspform::cases;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in cases::list_cases() {
        let case = cases::load_case(name)?;
        let text = cases::format_case_file(&case);
        let back = cases::parse_case_file(&text)?;
        println!(
            "{name}: triplet {}, {} potential terms, {} phi slots, round trip {}, {}",
            case.triplet,
            case.potential.len(),
            case.phi.len(),
            back.potential == case.potential && back.phi == case.phi,
            cases::checksum(&text),
        );
    }
    Ok(())
}
