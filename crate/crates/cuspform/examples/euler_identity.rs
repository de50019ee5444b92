//! `F = E F + sum (1/a_i) x_i dF/dx_i` for the universal unfolding.

use cuspform::unfolding::{self, TripletA};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for a in TripletA::affine_list() {
        let f = unfolding::universal_unfolding(&a);
        let r = unfolding::euler_identity_residual(&a, &f);
        println!("{a}: chi = {}, residual = {r}", a.chi());
    }
    let a = TripletA::new(2, 3, 4)?;
    let f = unfolding::universal_unfolding(&a);
    println!("E F_A for {a}: {}", a.euler_degrees().apply(&f));
    Ok(())
}
