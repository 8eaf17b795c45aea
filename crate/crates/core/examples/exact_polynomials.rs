//! Exact polynomial toolkit: factoring mod p, discriminants, real roots.

use cma_core::arith::{factor_z_mod_p, ZPoly};
use cma_core::arith::rational::{fmt_rat, frac};

fn main() -> cma_core::Result<()> {
    let f = ZPoly::from_i64s(&[1, -16, 20, -8, 1]);
    println!("f = {f}");
    println!("disc(f) = {}", f.discriminant()?);
    for p in [5u64, 7, 11, 13] {
        let parts: Vec<String> = factor_z_mod_p(&f, p)?
            .iter()
            .map(|(g, e)| if *e == 1 { format!("({})", g.to_z()) } else { format!("({})^{e}", g.to_z()) })
            .collect();
        println!("mod {p:>2}: {}", parts.join(" "));
    }
    let q = f.to_q();
    println!("real roots: {}", q.count_real_roots()?);
    for (a, b) in q.isolate_real_roots(&frac(1, 1000))? {
        println!("  in [{}, {}]", fmt_rat(&a), fmt_rat(&b));
    }
    Ok(())
}
