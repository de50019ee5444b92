//! The limit algebra and the product at `t = 0`, `q -> 0` of each dataset.

use cuspform::cases::load_case;
use cuspform::frobenius;
use cuspform::unfolding::{self, TripletA};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for a in [
        TripletA::new(2, 3, 3)?,
        TripletA::new(2, 3, 4)?,
        TripletA::new(2, 3, 5)?,
    ] {
        let ring = unfolding::limit_algebra(&a)?;
        let gens: Vec<String> = unfolding::limit_ideal_generators(&a)
            .iter()
            .map(|g| g.to_string())
            .collect();
        println!("{a}: ideal ({}), dim {}", gens.join(", "), ring.dim());
        println!(
            "  extended relations reproduce it: {}",
            unfolding::extended_relations_match_limit(&a)?
        );
    }
    for name in ["233", "234", "235"] {
        let case = load_case(name)?;
        for c in frobenius::limit_product_check(&case) {
            println!("{name} {:<22} {:?}", c.name, c.status);
        }
    }
    Ok(())
}
