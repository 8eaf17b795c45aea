//! Ampleness certificates, their replay and the undecidable case.

use cma_core::arith::rational::rat;
use cma_core::arith::ZPoly;
use cma_core::etale::EtaleAlgebra;
use cma_core::torus::{is_s_ample, replay_certificate, Ambient, PlaceSet, TorusDatum};

fn main() -> cma_core::Result<()> {
    let cases: [(&[i64], Ambient, &str); 4] = [
        (&[-1, 1, 0, 1], Ambient::SL, "inf"),
        (&[1, 0, 1], Ambient::SL, "inf"),
        (&[1, 0, 1], Ambient::SL, "inf,5"),
        (&[-2, 0, 0, 0, 1], Ambient::GL, "inf,7"),
    ];
    for (c, amb, s) in cases {
        let f = ZPoly::from_i64s(c);
        let t = TorusDatum::build(&EtaleAlgebra::power_basis(vec![f.clone()])?, amb)?;
        let cert = is_s_ample(&t, &PlaceSet::parse(s)?)?;
        println!("{f} in {amb}, S = {{{s}}}: {} (replayed: {})", cert.verdict, replay_certificate(&cert)?);
    }
    // Q(i) x Q(i) acting on a module with two isomorphic sign pieces
    let g = ZPoly::from_i64s(&[1, 0, 1]);
    let e = EtaleAlgebra::power_basis(vec![g.clone(), g])?;
    let m = vec![
        vec![rat(1), rat(-1), rat(0), rat(0)],
        vec![rat(0), rat(0), rat(1), rat(-1)],
    ];
    let t = TorusDatum::with_module(&e, Ambient::SL, m)?;
    let cert = is_s_ample(&t, &PlaceSet::parse("inf,5")?)?;
    println!("non multiplicity-free module: {}", cert.verdict);
    Ok(())
}
