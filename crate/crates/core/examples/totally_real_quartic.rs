//! A totally real V4 quartic: unit search, automorphism matrices and a
//! change of basis onto externally given generators.

use cma_core::arith::ZPoly;
use cma_core::etale::EtaleAlgebra;
use cma_core::groups::{automorphism_matrix, enumerate_automorphisms, find_conjugator};
use cma_core::linalg::MatQ;
use cma_core::units::{norm_one_subgroup, search_unit_system, verify_unit_system, DEFAULT_BUDGET};

fn main() -> cma_core::Result<()> {
    let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, -16, 20, -8, 1])])?;
    let sys = search_unit_system(&e, 3, &[], DEFAULT_BUDGET, 256)?;
    let one = norm_one_subgroup(&e, &sys)?;
    let cert = verify_unit_system(&e, &one, 256)?;
    println!("norm-one units (certified independent: {}):", cert.certified);
    for u in &one.free {
        println!("  {:?}\n{}", u.to_strings(), e.regular_rep(u));
    }
    for (i, s) in enumerate_automorphisms(&e, 50)?.iter().enumerate() {
        println!("automorphism {i}:\n{}", automorphism_matrix(&e, s)?);
    }
    let given = vec![
        MatQ::from_i64(&[&[0, -1, -2, -4], &[8, 16, 31, 62], &[-6, -12, -24, -49], &[1, 2, 4, 8]]),
        MatQ::from_i64(&[&[-4, -1, -1, -1], &[13, 12, 15, 15], &[-7, -7, -8, -5], &[1, 1, 1, 0]]),
    ];
    match find_conjugator(&e, &given, 20)? {
        Some(c) => println!("conjugator into the power basis:\n{}", c.matrix),
        None => println!("no conjugator in the box"),
    }
    Ok(())
}
