//! One line per acceptance criterion, with its wall time against the limit.

mod common;

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use cma_core::arith::rational::rat;
use cma_core::arith::{QPoly, ZPoly};
use cma_core::etale::EtaleAlgebra;
use cma_core::galois::{GaloisGroup, Place, Signature};
use cma_core::groups::{
    algebra_span, elementary_matrix, find_conjugator, group_sanity, verify_normalization_of_span,
    verify_semidirect, GeneratorSet, Ring, DEFAULT_CONJUGATOR_BOX,
};
use cma_core::linalg::MatQ;
use cma_core::pipeline::{
    default_corpus, read_json, run_pipeline, verify_paper_examples, GoldenFile, PipelineOptions,
    PipelineRequest, GOLDEN_FILES,
};
use cma_core::torus::{is_s_ample, Ambient, PlaceSet, TorusDatum, Verdict};
use cma_core::Error;

type Outcome = std::result::Result<String, String>;

macro_rules! require {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn opts() -> PipelineOptions {
    PipelineOptions::default()
}

fn golden(name: &str) -> GoldenFile {
    read_json(&default_corpus().join(name)).unwrap()
}

fn request(json: &str) -> PipelineRequest {
    serde_json::from_str(json).unwrap()
}

fn mat(rows: &[&[i64]]) -> MatQ {
    MatQ::from_i64(rows)
}

fn cubic() -> Outcome {
    let req = request(
        r#"{"algebra": {"factors": [["-1", "1", "0", "1"]],
                        "order_basis": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]},
            "ambient": "SL", "places": ["inf"], "unit_source": {"search": {"bound": 3}}}"#,
    );
    let report = run_pipeline(&req, &opts()).map_err(|e| e.to_string())?;
    require!(report.verdict() == Verdict::SAmple, "verdict {}", report.verdict());
    require!(report.unit_rank() == Some(1), "unit rank {:?}", report.unit_rank());
    let gs = report.generators.ok_or("no generators")?;
    let all: Vec<&MatQ> = gs.all().into_iter().map(|(_, m)| m).collect();
    let g = mat(&[&[0, 0, 1], &[1, 0, -1], &[0, 1, 0]]);
    require!(all == [&g], "emitted {}", serde_json::to_string(&all).unwrap());
    Ok("single matrix [[0,0,1],[1,0,-1],[0,1,0]], unit rank 1".into())
}

fn gaussian() -> Outcome {
    let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, 0, 1])]).unwrap();
    let t = TorusDatum::build(&e, Ambient::SL).unwrap();
    let r_inf = t.local_rank(Place::Infinity).unwrap();
    let r_5 = t.local_rank(Place::Prime(5)).unwrap();
    require!((r_inf, r_5) == (0, 1), "local ranks {r_inf}, {r_5}");
    let v_inf = is_s_ample(&t, &PlaceSet::infinity()).unwrap().verdict;
    let v_5 = is_s_ample(&t, &PlaceSet::with_primes(&[5])).unwrap().verdict;
    require!(v_inf == Verdict::NotSAmple && v_5 == Verdict::SAmple, "verdicts {v_inf}, {v_5}");

    let base = r#"{"algebra": {"factors": [["1", "0", "1"]], "order_basis": [["1", "0"], ["0", "1"]]},
                   "ambient": "SL", "unit_source": {"provided": {"torsion": {"element": ["0", "1"], "order": 4},
                   "free": [["2", "1"], ["2", "-1"]], "s_primes": [5]}}, "places": "#;
    let no = run_pipeline(&request(&format!(r#"{base}["inf"]}}"#)), &opts()).map_err(|e| e.to_string())?;
    require!(no.verdict() == Verdict::NotSAmple && no.generators.is_none(), "S = {{inf}} emitted generators");
    let yes = run_pipeline(&request(&format!(r#"{base}["inf", "5"]}}"#)), &opts()).map_err(|e| e.to_string())?;
    let gs = yes.generators.ok_or("no generators for S = {inf, 5}")?;
    let rot = MatQ::from_rows(vec![
        vec![rat(4) / rat(5), rat(-3) / rat(5)],
        vec![rat(3) / rat(5), rat(4) / rat(5)],
    ])
    .unwrap();
    let quarter = mat(&[&[0, -1], &[1, 0]]);
    require!(gs.torsion == [quarter] && gs.torus == [rot], "emitted {}", serde_json::to_string(&gs).unwrap());
    require!(gs.ring == Ring::localized(&[5]), "ring {}", gs.ring);
    Ok("ranks 0 and 1; not ample at {inf}, ample at {inf,5}; [[0,-1],[1,0]] and [[4/5,-3/5],[3/5,4/5]]".into())
}

fn unipotent() -> Outcome {
    let case = golden("unipotent_block.json").cases.remove(0);
    let report = run_pipeline(&case.request, &opts()).map_err(|e| e.to_string())?;
    let gs = report.generators.ok_or("no generators")?;
    let ghat = mat(&[&[0, 0, 1, 0], &[1, 0, -1, 0], &[0, 1, 0, 0], &[0, 0, 0, 1]]);
    let minus = MatQ::scalar(4, rat(-1));
    let es: Vec<MatQ> = (1..=3).map(|i| elementary_matrix(4, i, 4).unwrap()).collect();
    require!(gs.torus == [ghat.clone()], "torus {}", serde_json::to_string(&gs.torus).unwrap());
    require!(gs.torsion == [minus.clone()], "torsion {}", serde_json::to_string(&gs.torsion).unwrap());
    require!(gs.unipotent == es, "unipotent {}", serde_json::to_string(&gs.unipotent).unwrap());
    let semi = verify_semidirect(&[ghat, minus], &es).map_err(|e| e.to_string())?;
    require!(semi.holds, "semidirect fails at {:?}", semi.offending);
    let sanity = group_sanity(&gs);
    require!(sanity.passed, "sanity {:?}", sanity.checks);
    Ok("diag(g,1), -1, E14, E24, E34 exact; semidirect and sanity pass".into())
}

fn quartic() -> Outcome {
    let case = golden("totally_real_quartic.json").cases.remove(0);
    let report = run_pipeline(&case.request, &opts()).map_err(|e| e.to_string())?;
    let groups: Vec<GaloisGroup> = report.factors.iter().map(|f| f.galois_group).collect();
    require!(groups == [GaloisGroup::V4], "Galois group {groups:?}");
    let sigs: Vec<Signature> = report.factors.iter().map(|f| f.signature).collect();
    require!(sigs == [Signature { r1: 4, r2: 0 }], "signature {sigs:?}");
    let units = report.units.as_ref().ok_or("no units")?;
    require!(units.emitted.free.len() == 3, "unit rank {}", units.emitted.free.len());
    require!(
        units.emitted_certificate.certified && units.emitted_certificate.independence.is_some(),
        "norm-one triple not certified: {:?}",
        units.emitted_certificate.failure
    );
    for u in &units.emitted.free {
        let e = EtaleAlgebra::from_json(&case.request.algebra).unwrap();
        require!(e.norm(u) == rat(1), "unit {:?} has norm {}", u.to_strings(), e.norm(u));
    }

    let imp: GeneratorSet = case.expect.imported_generators.clone().ok_or("corpus lacks imported generators")?;
    let g1_charpoly = QPoly::new(vec![rat(1), rat(0), rat(-4), rat(0), rat(1)]);
    require!(imp.torus[0].charpoly() == g1_charpoly, "transcribed g1 has the wrong characteristic polynomial");
    let sanity = group_sanity(&imp);
    require!(sanity.passed, "imported sanity {:?}", sanity.checks);
    let span = algebra_span(&imp.torus, imp.n);
    for (i, w) in imp.normalizer.iter().enumerate() {
        let chk = verify_normalization_of_span(&span, w).map_err(|e| e.to_string())?;
        require!(chk.normalizes, "imported normalizer[{i}] fails at {:?}", chk.failing_index);
    }

    let e = EtaleAlgebra::from_json(&case.request.algebra).unwrap();
    let conj = find_conjugator(&e, &imp.torus, DEFAULT_CONJUGATOR_BOX).map_err(|e| e.to_string())?;
    let rows = verify_paper_examples(&default_corpus(), &opts());
    let row = rows.iter().find(|r| r.name == "totally_real_quartic").ok_or("no quartic row")?;
    require!(row.passed, "golden diffs {:?}", row.diffs);
    match conj {
        Some(c) => Ok(format!(
            "V4, (4,0), certified norm-one triple; imported set sane; conjugator {}",
            serde_json::to_string(&c.matrix).unwrap()
        )),
        None => {
            require!(
                row.caveats.iter().any(|c| c.starts_with("basis-ambiguity")),
                "no conjugator and no caveat row"
            );
            Ok("V4, (4,0), certified norm-one triple; imported set sane; no conjugator (caveat recorded)".into())
        }
    }
}

fn properties() -> Outcome {
    let tallies = common::battery();
    let total: u32 = tallies.iter().map(|t| t.cases).sum();
    let failed: Vec<String> = tallies
        .iter()
        .filter_map(|t| t.result.as_ref().err().map(|e| format!("{}: {e}", t.name)))
        .collect();
    require!(failed.is_empty(), "{}", failed.join("; "));
    require!(total >= 500, "only {total} cases");
    Ok(format!("{total} randomized cases over {} properties, 0 failures", tallies.len()))
}

fn negative_controls() -> Outcome {
    let e = EtaleAlgebra::power_basis(vec![ZPoly::from_i64s(&[1, 0, 1])]).unwrap();
    let t = TorusDatum::build(&e, Ambient::SL).unwrap();
    match is_s_ample(&t, &PlaceSet::with_primes(&[2])) {
        Err(Error::RamifiedPlace { p: 2, .. }) => {}
        other => return Err(format!("ramified place gave {other:?}")),
    }

    let g = ZPoly::from_i64s(&[1, 0, 1]);
    let e2 = EtaleAlgebra::power_basis(vec![g.clone(), g]).unwrap();
    let module = vec![vec![rat(1), rat(-1), rat(0), rat(0)], vec![rat(0), rat(0), rat(1), rat(-1)]];
    let t2 = TorusDatum::with_module(&e2, Ambient::SL, module).unwrap();
    let v = is_s_ample(&t2, &PlaceSet::with_primes(&[5])).unwrap().verdict;
    require!(v == Verdict::Undecidable, "repeated isotypic module gave {v}");

    let mut gs = GeneratorSet::new(Ring::integers(), Ambient::SL, 2);
    gs.torus.push(mat(&[&[2, 0], &[0, 1]]));
    let sanity = group_sanity(&gs);
    require!(!sanity.passed, "det 2 matrix passed sanity");

    let dir = tempfile::TempDir::new().unwrap();
    for f in GOLDEN_FILES {
        std::fs::copy(default_corpus().join(f), dir.path().join(f)).unwrap();
    }
    let path = dir.path().join("cubic_sl3.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let corrupted = text.replacen(r#"[["-1", "1", "0", "1"]]"#, r#"[["-1", "2", "0", "1"]]"#, 1);
    require!(corrupted != text, "corruption did not apply");
    std::fs::write(&path, corrupted).unwrap();
    let rows = verify_paper_examples(dir.path(), &opts());
    let row = rows.iter().find(|r| r.name == "cubic_sl3").unwrap();
    require!(!row.passed && !row.diffs.is_empty(), "corrupted cubic row passed");
    require!(rows.iter().filter(|r| r.passed).count() == 3, "other rows changed");
    Ok(format!("ramified errors, undecidable, det 2 rejected, corrupted row fails ({})", row.diffs[0]))
}

#[test]
fn acceptance() {
    let criteria: [(&str, u64, fn() -> Outcome); 6] = [
        ("cubic SL3 reproduction", 5, cubic),
        ("Gaussian S-unit reproduction", 5, gaussian),
        ("unipotent block reproduction", 5, unipotent),
        ("totally real quartic reproduction", 60, quartic),
        ("property suite", 120, properties),
        ("negative controls", 5, negative_controls),
    ];
    let mut failures = 0;
    let mut out = std::io::stdout().lock();
    for (k, (name, limit, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let slow = took > Duration::from_secs(limit);
        let pass = result.is_ok() && !slow;
        failures += usize::from(!pass);
        let detail = match &result {
            Ok(d) => d.clone(),
            Err(e) => e.clone(),
        };
        writeln!(
            out,
            "criterion {}: {} {name} [{:.2}s / {limit}s] {detail}{}",
            k + 1,
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            if slow { " (over time limit)" } else { "" }
        )
        .unwrap();
    }
    assert_eq!(failures, 0, "{failures} acceptance criteria failed");
}
