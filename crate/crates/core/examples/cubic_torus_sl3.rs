//! Torus of x^3+x-1 in SL_3 with S = {inf}: one unit, one generator matrix.

use cma_core::pipeline::{default_corpus, read_json, run_pipeline, GoldenFile, PipelineOptions};

fn main() -> cma_core::Result<()> {
    let golden: GoldenFile = read_json(&default_corpus().join("cubic_sl3.json"))?;
    let report = run_pipeline(&golden.cases[0].request, &PipelineOptions::default())?;
    println!("verdict: {}", report.verdict());
    println!("unit rank: {:?}", report.unit_rank());
    if let Some(gs) = &report.generators {
        for (name, m) in gs.all() {
            println!("{name} ({}):\n{m}", gs.provenance[&name]);
        }
    }
    Ok(())
}
