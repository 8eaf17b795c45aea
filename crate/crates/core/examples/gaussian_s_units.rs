//! Q(i) in SL_2: anisotropic at inf, split at 5, so {inf, 5}-ample with
//! generators over Z[1/5].

use cma_core::arith::ZPoly;
use cma_core::etale::{AlgebraElement, EtaleAlgebra};
use cma_core::galois::Place;
use cma_core::torus::{is_s_ample, Ambient, PlaceSet, TorusDatum};
use cma_core::units::{norm_one_subgroup, verify_unit_system, TorsionUnit, UnitSystem};

fn main() -> cma_core::Result<()> {
    let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, 0, 1])])?;
    let t = TorusDatum::build(&e, Ambient::SL)?;
    println!("rank at inf: {}", t.local_rank(Place::Infinity)?);
    println!("rank at 5:   {}", t.local_rank(Place::Prime(5))?);
    for s in ["inf", "inf,5"] {
        println!("{{{s}}}: {}", is_s_ample(&t, &PlaceSet::parse(s)?)?.verdict);
    }
    let sys = UnitSystem {
        torsion: TorsionUnit { element: AlgebraElement::from_i64s(&[0, 1]), order: 4 },
        free: vec![AlgebraElement::from_i64s(&[2, 1]), AlgebraElement::from_i64s(&[2, -1])],
        s_primes: vec![5],
    };
    println!("S-units certified: {}", verify_unit_system(&e, &sys, 256)?.certified);
    let one = norm_one_subgroup(&e, &sys)?;
    println!("torsion:\n{}", e.regular_rep(&one.torsion.element));
    for u in &one.free {
        println!("free:\n{}", e.regular_rep(u));
    }
    Ok(())
}
