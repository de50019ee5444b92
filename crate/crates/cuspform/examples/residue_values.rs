//! Residues at `s = 0`: they vanish on `1` and `x_i^j`, and `Res(x1 x2 x3) = sm^3`.

use cuspform::ratpoly::{ratio, Poly, Var};
use cuspform::residue::{xyz, ResiduePoint};
use cuspform::unfolding::{self, TripletA};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for a in [
        TripletA::new(2, 3, 3)?,
        TripletA::new(2, 3, 4)?,
        TripletA::new(2, 3, 5)?,
    ] {
        for sm in [ratio(1, 1), ratio(2, 1), ratio(-1, 3)] {
            let rp = ResiduePoint::unfolding(&a, &unfolding::origin_with_sm(&a, sm.clone()))?;
            let mut zero = vec![rp.residue(&Poly::one())?];
            for i in 1..=3 {
                for j in 1..a.ai(i) as i32 {
                    zero.push(rp.residue(&Poly::var_pow(Var::x(i), j))?);
                }
            }
            let f = unfolding::universal_unfolding(&a);
            println!(
                "{a} sm={sm}: Res(xyz) = {}, other residues zero: {}, K0 = {}, calibration sign {}",
                rp.residue(&xyz())?,
                zero.iter().all(|r| *r == ratio(0, 1)),
                rp.k0(&f.log_derivative(Var::SM))?,
                rp.calibration_sign(),
            );
        }
    }
    Ok(())
}
