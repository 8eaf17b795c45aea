//! The cubic torus as a Levi factor of SL_4 with the last-column unipotent
//! radical.

use cma_core::groups::{block_embed, elementary_matrix, verify_semidirect};
use cma_core::linalg::MatQ;
use cma_core::pipeline::{default_corpus, read_json, run_pipeline, GoldenFile, PipelineOptions};

fn main() -> cma_core::Result<()> {
    let golden: GoldenFile = read_json(&default_corpus().join("unipotent_block.json"))?;
    let report = run_pipeline(&golden.cases[0].request, &PipelineOptions::default())?;
    let gs = report.generators.expect("ample");
    for (name, m) in gs.all() {
        println!("{name}:\n{m}");
    }
    println!("sanity passed: {}", report.sanity.map(|s| s.passed).unwrap_or(false));

    // conjugating E_{i,4} by diag(g, 1) moves the column g·e_i into place
    let g = MatQ::from_i64(&[&[0, 0, 1], &[1, 0, -1], &[0, 1, 0]]);
    let gh = block_embed(&g, 4)?;
    let e14 = elementary_matrix(4, 1, 4)?;
    println!("g E_14 g^-1:\n{}", gh.mul(&e14).mul(&gh.inverse()?));
    let radical = (1..=3).map(|i| elementary_matrix(4, i, 4)).collect::<cma_core::Result<Vec<_>>>()?;
    let check = verify_semidirect(&[gh], &radical)?;
    println!("normalizes the radical: {}", check.holds);
    Ok(())
}
