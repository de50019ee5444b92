//! Third derivatives of the potential against residue three-point functions.

use cuspform::cases::load_case;
use cuspform::frobenius;
use cuspform::ratpoly::ratio;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for name in ["233", "234"] {
        let case = load_case(name)?;
        let mut points = vec![frobenius::origin_point(&case.triplet, ratio(1, 1))];
        points.extend(frobenius::seeded_points(
            &case.triplet,
            frobenius::DEFAULT_SEED,
            0,
            2,
        ));
        for c in frobenius::mirror_crosscheck(&case, &points) {
            println!("{name}: {:?} {}", c.status, c.detail.unwrap_or_default());
        }
    }
    Ok(())
}
