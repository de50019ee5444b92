//! Jacobi rings of the universal unfolding: rank equals `a1 + a2 + a3 - 1`.

use cuspform::ratpoly::{ratio, Var};
use cuspform::unfolding::{self, TripletA};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for a in TripletA::affine_list() {
        let mut p = unfolding::origin_with_sm(&a, ratio(2, 3));
        p.insert(Var::S1, ratio(1, 5));
        let jr = unfolding::jacobi_ring(&unfolding::universal_unfolding(&a), Var::SM, &p)?;
        println!("{a}: mu = {}, dim = {}", a.mu(), jr.dim());
    }

    let a = TripletA::new(2, 3, 3)?;
    let jr = unfolding::jacobi_ring(
        &unfolding::universal_unfolding(&a),
        Var::SM,
        &unfolding::origin_with_sm(&a, ratio(1, 1)),
    )?;
    let basis: Vec<String> = jr.ring.basis().iter().map(|m| m.to_string()).collect();
    println!("basis for {a} at sm = 1: {}", basis.join(", "));
    let x1 = jr
        .ring
        .index_of(&cuspform::ratpoly::Monomial::var(Var::X1, 1))
        .expect("x1 is standard");
    println!("multiplication by x1:");
    for row in jr.ring.mult_table(x1) {
        println!(
            "  {}",
            row.iter().map(|x| format!("{x:>4}")).collect::<String>()
        );
    }
    Ok(())
}
