//! Box search for units, torsion and a dependent system caught by an exact
//! relation.

use cma_core::arith::ZPoly;
use cma_core::etale::EtaleAlgebra;
use cma_core::units::{
    search_unit_system, torsion_units, verify_unit_system, UnitSystem, DEFAULT_BUDGET,
};

fn main() -> cma_core::Result<()> {
    for (name, c) in [("x^2-2", &[-2, 0, 1][..]), ("x^2+x+1", &[1, 1, 1]), ("x^3+x-1", &[-1, 1, 0, 1])] {
        let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(c)])?;
        let t = torsion_units(&e, DEFAULT_BUDGET)?;
        let sys = search_unit_system(&e, 3, &[], DEFAULT_BUDGET, 256)?;
        let free: Vec<Vec<String>> = sys.free.iter().map(|u| u.to_strings()).collect();
        println!("{name}: torsion {:?} of order {}, units {free:?}", t.element.to_strings(), t.order);
        if let Some(u) = sys.free.first() {
            let bad = UnitSystem { free: vec![u.clone(), e.pow(u, 3)?], ..sys.clone() };
            let cert = verify_unit_system(&e, &bad, 128)?;
            println!("  with its cube added: certified {}, {:?}", cert.certified, cert.failure);
        }
    }
    Ok(())
}
