//! Galois groups of small degree and decomposition data at places.

use cma_core::arith::ZPoly;
use cma_core::galois::{decomposition_profile, galois_group_small, signature, Place};

fn main() -> cma_core::Result<()> {
    let fields: [(&str, &[i64]); 5] = [
        ("x^3+x-1", &[-1, 1, 0, 1]),
        ("x^4-8x^3+20x^2-16x+1", &[1, -16, 20, -8, 1]),
        ("x^4+x^3+x^2+x+1", &[1, 1, 1, 1, 1]),
        ("x^4-2", &[-2, 0, 0, 0, 1]),
        ("x^2+1", &[1, 0, 1]),
    ];
    for (name, c) in fields {
        let f = ZPoly::from_i64s(c);
        let tag = galois_group_small(&f)?;
        let sig = signature(&f)?;
        println!("{name}: {:?}, signature ({}, {})", tag.group, sig.r1, sig.r2);
        for place in [Place::Infinity, Place::Prime(5), Place::Prime(7)] {
            match decomposition_profile(&f, &tag, place) {
                Ok(p) => println!("  {place}: cycle type {:?}, {} places above", p.cycle_type, p.num_places_over),
                Err(e) => println!("  {place}: {e}"),
            }
        }
    }
    Ok(())
}
