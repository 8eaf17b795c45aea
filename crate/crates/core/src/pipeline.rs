//! End to end: algebra and places in, ampleness certificate and generator
//! matrices out.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arith::poly::ZPoly;
use crate::arith::rational::fmt_rat;
use crate::error::{Error, Result};
use crate::etale::{AlgebraElement, EtaleAlgebra, EtaleAlgebraJson};
use crate::galois::{signature, GaloisGroup, Place, Signature};
use crate::groups::{
    algebra_span, automorphism_matrix, elementary_matrix, enumerate_automorphisms, find_conjugator,
    group_sanity, verify_normalization, verify_normalization_of_span, GeneratorSet, Ring, SanityReport,
    DEFAULT_AUTOMORPHISM_BOX, DEFAULT_CONJUGATOR_BOX,
};
use crate::linalg::MatQ;
use crate::torus::{is_s_ample, AmpleCertificate, Ambient, PlaceSet, TorusDatum, Verdict};
use crate::units::{
    algebra_dirichlet_rank, norm_one_subgroup, precision_cap_from_env, reduce_against, search_unit_system,
    verify_unit_system, TorsionUnit, UnitCertificate, UnitSystem, DEFAULT_BUDGET,
};

pub const SCHEMA: &str = "cma/1";

fn schema() -> String {
    SCHEMA.into()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadicalPattern {
    #[default]
    LastColumn,
    None,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnipotentBlock {
    pub dimension: usize,
    #[serde(default)]
    pub pattern: RadicalPattern,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum UnitSource {
    Search { bound: u32 },
    Provided(UnitSystem),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineRequest {
    #[serde(default = "schema")]
    pub schema: String,
    pub algebra: EtaleAlgebraJson,
    pub ambient: Ambient,
    pub places: Vec<Place>,
    #[serde(default)]
    pub unipotent_block: Option<UnipotentBlock>,
    pub unit_source: UnitSource,
}

impl PipelineRequest {
    pub fn place_set(&self) -> PlaceSet {
        let parts: Vec<String> = self.places.iter().map(|p| p.to_string()).collect();
        PlaceSet::parse(&parts.join(",")).expect("places were parsed already")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PipelineOptions {
    pub precision_cap: u32,
    pub budget: u128,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self { precision_cap: precision_cap_from_env(), budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorSummary {
    pub polynomial: ZPoly,
    pub galois_group: GaloisGroup,
    pub signature: Signature,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitReport {
    pub dirichlet_rank: usize,
    pub system: UnitSystem,
    pub certificate: UnitCertificate,
    /// The system whose matrices are emitted (norm one for SL).
    pub emitted: UnitSystem,
    pub emitted_certificate: UnitCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmaReport {
    pub schema: String,
    pub factors: Vec<FactorSummary>,
    pub certificate: AmpleCertificate,
    pub units: Option<UnitReport>,
    pub generators: Option<GeneratorSet>,
    pub sanity: Option<SanityReport>,
    pub caveats: Vec<String>,
}

impl CmaReport {
    pub fn verdict(&self) -> Verdict {
        self.certificate.verdict
    }

    /// Number of free torus generators emitted.
    pub fn unit_rank(&self) -> Option<usize> {
        self.units.as_ref().map(|u| u.emitted.free.len())
    }
}

const CAVEAT_FUNDAMENTAL: &str =
    "fundamentality-unproven: the units are certified independent of full rank; that they generate the whole unit group is not certified";
const CAVEAT_WITNESS: &str =
    "commensurable-witness: the generators span a group commensurable with the maximal amenable subgroup; exact equality is not certified";

fn coords_text(a: &AlgebraElement) -> String {
    let parts: Vec<String> = a.coords.iter().map(fmt_rat).collect();
    format!("({})", parts.join(", "))
}

pub fn run_pipeline(req: &PipelineRequest, opts: &PipelineOptions) -> Result<CmaReport> {
    if req.schema != SCHEMA {
        return Err(Error::InvalidInput(format!("unknown schema {:?}, expected {SCHEMA}", req.schema)));
    }
    let e = EtaleAlgebra::from_json(&req.algebra)?;
    let n = e.degree();
    let places = req.place_set();
    let t = TorusDatum::build(&e, req.ambient)?;
    let certificate = is_s_ample(&t, &places)?;
    let factors = e
        .factors()
        .iter()
        .zip(t.tags())
        .map(|(f, tag)| Ok(FactorSummary { polynomial: f.clone(), galois_group: tag.group, signature: signature(f)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut report = CmaReport {
        schema: schema(),
        factors,
        certificate,
        units: None,
        generators: None,
        sanity: None,
        caveats: vec![],
    };
    match report.certificate.verdict {
        Verdict::SAmple => {}
        Verdict::NotSAmple => return Ok(report),
        Verdict::Undecidable => {
            let why = report.certificate.condition_iii.reason.clone().unwrap_or_default();
            report.caveats.push(format!("undecidable: {why}"));
            return Ok(report);
        }
    }

    let block = match &req.unipotent_block {
        None => None,
        Some(b) => {
            if req.ambient != Ambient::GL {
                return Err(Error::Unsupported("a unipotent block embeds a GL torus into SL of one size up".into()));
            }
            if b.dimension != n + 1 {
                return Err(Error::Unsupported(format!(
                    "block embedding of a degree {n} torus supports dimension {} only, got {}",
                    n + 1,
                    b.dimension
                )));
            }
            Some(b.clone())
        }
    };

    let s_primes = places.finite_primes.clone();
    let sys = match &req.unit_source {
        UnitSource::Search { bound } => search_unit_system(&e, *bound, &s_primes, opts.budget, opts.precision_cap)?,
        UnitSource::Provided(s) => {
            let mut given = s.s_primes.clone();
            given.sort_unstable();
            given.dedup();
            if given != s_primes {
                return Err(Error::InvalidUnitSystem(format!(
                    "unit system inverts {given:?} but the finite places are {s_primes:?}"
                )));
            }
            s.clone()
        }
    };
    let ucert = verify_unit_system(&e, &sys, opts.precision_cap)?;
    if !ucert.certified {
        return Err(Error::InvalidUnitSystem(format!("{:?}", ucert.failure)));
    }
    let drank = algebra_dirichlet_rank(&e, &s_primes)?;
    if sys.free.len() != drank {
        return Err(Error::InvalidUnitSystem(format!(
            "{} independent units found, the Dirichlet rank is {drank}",
            sys.free.len()
        )));
    }
    let emitted = match req.ambient {
        Ambient::SL => norm_one_subgroup(&e, &sys)?,
        Ambient::GL => sys.clone(),
    };
    let ecert = verify_unit_system(&e, &emitted, opts.precision_cap)?;
    if !ecert.certified {
        return Err(Error::InvalidUnitSystem(format!("emitted system: {:?}", ecert.failure)));
    }

    let size = if block.is_some() { n + 1 } else { n };
    let embed = |m: MatQ| -> Result<MatQ> {
        if block.is_none() {
            return Ok(m);
        }
        let d = m.det();
        let mut b = m.block_embed(n + 1)?;
        b[(n, n)] = num_traits::Inv::inv(d);
        Ok(b)
    };
    let gs_ambient = if block.is_some() { Ambient::SL } else { req.ambient };
    let mut gs = GeneratorSet::new(Ring::localized(&s_primes), gs_ambient, size);
    for (i, u) in emitted.free.iter().enumerate() {
        gs.torus.push(embed(e.regular_rep(u))?);
        gs.provenance.insert(format!("torus[{i}]"), format!("unit {}", coords_text(u)));
    }
    if emitted.torsion.order > 1 {
        gs.torsion.push(embed(e.regular_rep(&emitted.torsion.element))?);
        gs.provenance.insert(
            "torsion[0]".into(),
            format!("root of unity of order {} {}", emitted.torsion.order, coords_text(&emitted.torsion.element)),
        );
    }
    if e.num_factors() == 1 && n <= 4 {
        let mut dropped = 0;
        for sigma in enumerate_automorphisms(&e, DEFAULT_AUTOMORPHISM_BOX)?.into_iter().skip(1) {
            let m = embed(automorphism_matrix(&e, &sigma)?)?;
            if gs_ambient == Ambient::SL && !num_traits::One::is_one(&m.det()) {
                dropped += 1;
                continue;
            }
            let imgs: Vec<String> = sigma.images.iter().map(coords_text).collect();
            gs.provenance.insert(
                format!("normalizer[{}]", gs.normalizer.len()),
                format!("automorphism with basis images {}", imgs.join(" ")),
            );
            gs.normalizer.push(m);
        }
        if dropped > 0 {
            report.caveats.push(format!(
                "normalizer-partial: {dropped} automorphism matrices have determinant -1 and are not in the special linear group"
            ));
        }
    } else {
        report.caveats.push("normalizer-omitted: automorphisms are enumerated for single fields of degree at most 4".into());
    }
    if let Some(UnipotentBlock { pattern: RadicalPattern::LastColumn, .. }) = block {
        for i in 1..=n {
            gs.unipotent.push(elementary_matrix(n + 1, i, n + 1)?);
            gs.provenance.insert(format!("unipotent[{}]", i - 1), format!("elementary matrix E_{{{i},{}}}", n + 1));
        }
    }
    let sanity = group_sanity(&gs);
    if !sanity.passed {
        let bad: Vec<String> = sanity.checks.iter().filter(|c| !c.passed).map(|c| c.detail.clone()).collect();
        return Err(Error::SanityFailed(bad.join("; ")));
    }
    report.caveats.push(CAVEAT_FUNDAMENTAL.into());
    report.caveats.push(CAVEAT_WITNESS.into());
    report.units = Some(UnitReport {
        dirichlet_rank: drank,
        system: sys,
        certificate: ucert,
        emitted,
        emitted_certificate: ecert,
    });
    report.generators = Some(gs);
    report.sanity = Some(sanity);
    Ok(report)
}

// ---------------------------------------------------------------- golden corpus

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedGenerators {
    #[serde(default)]
    pub ring: Option<Ring>,
    #[serde(default)]
    pub torus: Option<Vec<MatQ>>,
    #[serde(default)]
    pub torsion: Option<Vec<MatQ>>,
    #[serde(default)]
    pub normalizer: Option<Vec<MatQ>>,
    #[serde(default)]
    pub unipotent: Option<Vec<MatQ>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default)]
    pub verdict: Option<Verdict>,
    #[serde(default)]
    pub unit_rank: Option<usize>,
    #[serde(default)]
    pub dirichlet_rank: Option<usize>,
    #[serde(default)]
    pub local_ranks: Option<Vec<(Place, usize)>>,
    #[serde(default)]
    pub galois_group: Option<GaloisGroup>,
    #[serde(default)]
    pub signature: Option<Signature>,
    #[serde(default)]
    pub generators: Option<ExpectedGenerators>,
    /// Generators in an unknown basis, matched up to GL_n(Z) conjugation.
    #[serde(default)]
    pub imported_generators: Option<GeneratorSet>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenCase {
    pub request: PipelineRequest,
    pub expect: Expectation,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenFile {
    #[serde(default = "schema")]
    pub schema: String,
    pub name: String,
    pub cases: Vec<GoldenCase>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRow {
    pub name: String,
    pub passed: bool,
    pub diffs: Vec<String>,
    pub caveats: Vec<String>,
}

/// Reads JSON with the failing path in the error.
pub fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| Error::Json {
        path: err.path().to_string(),
        message: err.inner().to_string(),
    })
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_json(&text)
}

fn show(ms: &[MatQ]) -> String {
    serde_json::to_string(ms).unwrap_or_default()
}

fn compare_list(diffs: &mut Vec<String>, what: &str, expected: &Option<Vec<MatQ>>, got: &[MatQ]) {
    if let Some(exp) = expected {
        if exp.as_slice() != got {
            diffs.push(format!("{what}: expected {} got {}", show(exp), show(got)));
        }
    }
}

fn check_case(case: &GoldenCase, opts: &PipelineOptions, diffs: &mut Vec<String>, caveats: &mut Vec<String>) -> Result<()> {
    let report = run_pipeline(&case.request, opts)?;
    let x = &case.expect;
    if let Some(v) = x.verdict {
        if report.verdict() != v {
            diffs.push(format!("verdict: expected {v} got {}", report.verdict()));
        }
        if v != Verdict::SAmple && report.generators.is_some() {
            diffs.push("generators emitted for a non-ample torus".into());
        }
    }
    if let Some(r) = x.unit_rank {
        if report.unit_rank() != Some(r) {
            diffs.push(format!("unit rank: expected {r} got {:?}", report.unit_rank()));
        }
    }
    if let Some(r) = x.dirichlet_rank {
        let got = report.units.as_ref().map(|u| u.dirichlet_rank);
        if got != Some(r) {
            diffs.push(format!("Dirichlet rank: expected {r} got {got:?}"));
        }
    }
    if let Some(g) = x.galois_group {
        let got: Vec<GaloisGroup> = report.factors.iter().map(|f| f.galois_group).collect();
        if got != [g] {
            diffs.push(format!("Galois group: expected {g:?} got {got:?}"));
        }
    }
    if let Some(s) = x.signature {
        let got: Vec<Signature> = report.factors.iter().map(|f| f.signature).collect();
        if got != [s] {
            diffs.push(format!("signature: expected {s:?} got {got:?}"));
        }
    }
    if let Some(lr) = &x.local_ranks {
        let e = EtaleAlgebra::from_json(&case.request.algebra)?;
        let t = TorusDatum::build(&e, case.request.ambient)?;
        for (place, want) in lr {
            let got = t.local_rank(*place)?;
            if got != *want {
                diffs.push(format!("local rank at {place}: expected {want} got {got}"));
            }
        }
    }
    if let Some(g) = &x.generators {
        match &report.generators {
            None => diffs.push("no generators emitted".into()),
            Some(gs) => {
                if let Some(r) = &g.ring {
                    if *r != gs.ring {
                        diffs.push(format!("ring: expected {r} got {}", gs.ring));
                    }
                }
                compare_list(diffs, "torus", &g.torus, &gs.torus);
                compare_list(diffs, "torsion", &g.torsion, &gs.torsion);
                compare_list(diffs, "normalizer", &g.normalizer, &gs.normalizer);
                compare_list(diffs, "unipotent", &g.unipotent, &gs.unipotent);
            }
        }
    }
    if let Some(imp) = &x.imported_generators {
        check_imported(&case.request, &report, imp, diffs, caveats)?;
    }
    Ok(())
}

/// Imported generators must pass the sanity checks as given; then a bounded
/// search tries to conjugate them onto the pipeline's own output.
fn check_imported(
    req: &PipelineRequest,
    report: &CmaReport,
    imp: &GeneratorSet,
    diffs: &mut Vec<String>,
    caveats: &mut Vec<String>,
) -> Result<()> {
    let sanity = group_sanity(imp);
    for c in sanity.checks.iter().filter(|c| !c.passed) {
        diffs.push(format!("imported {}: {}", c.name, c.detail));
    }
    let span = algebra_span(&imp.torus, imp.n);
    for (i, w) in imp.normalizer.iter().enumerate() {
        if !verify_normalization_of_span(&span, w)?.normalizes {
            diffs.push(format!("imported normalizer[{i}] does not normalize the imported torus"));
        }
    }
    let e = EtaleAlgebra::from_json(&req.algebra)?;
    let (Some(gs), Some(units)) = (&report.generators, &report.units) else {
        diffs.push("pipeline emitted no generators to compare against".into());
        return Ok(());
    };
    let Some(conj) = find_conjugator(&e, &imp.torus, DEFAULT_CONJUGATOR_BOX)? else {
        caveats.push(format!(
            "basis-ambiguity: no GL_{}(Z) conjugator within coordinate box {DEFAULT_CONJUGATOR_BOX}; only sanity, normalization and ranks were compared",
            imp.n
        ));
        return Ok(());
    };
    let c = &conj.matrix;
    let cinv = c.inverse()?;
    let moved = |m: &MatQ| e.element_of_matrix(&c.mul(m).mul(&cinv));
    let imported_units: Vec<AlgebraElement> = imp.torus.iter().filter_map(moved).collect();
    if imported_units.len() != imp.torus.len() {
        diffs.push("conjugated imported torus leaves the algebra".into());
        return Ok(());
    }
    let ours = &units.emitted;
    for (i, u) in imported_units.iter().enumerate() {
        if reduce_against(&e, &ours.free, &ours.torsion, &ours.s_primes, u)?.is_none() {
            diffs.push(format!("imported torus[{i}] is not in the group generated by the pipeline's units"));
        }
    }
    let imported_torsion = TorsionUnit { element: e.scale(&e.one(), &crate::arith::rational::rat(-1)), order: 2 };
    for (i, u) in ours.free.iter().enumerate() {
        if reduce_against(&e, &imported_units, &imported_torsion, &ours.s_primes, u)?.is_none() {
            diffs.push(format!("pipeline torus[{i}] is not in the group generated by the imported units"));
        }
    }
    let mut induced = Vec::new();
    for (i, w) in imp.normalizer.iter().enumerate() {
        let chk = verify_normalization(&e, &c.mul(w).mul(&cinv))?;
        match chk.automorphism {
            Some(a) => induced.push(a),
            None => diffs.push(format!("conjugated imported normalizer[{i}] does not normalize the algebra")),
        }
    }
    let ours_auts: Vec<MatQ> = gs.normalizer.clone();
    for (i, a) in induced.iter().enumerate() {
        let m = automorphism_matrix(&e, a)?;
        if !ours_auts.contains(&m) {
            diffs.push(format!("imported normalizer[{i}] induces an automorphism the pipeline did not emit"));
        }
    }
    caveats.push(format!(
        "conjugated: imported generators match the pipeline output after conjugation by {}",
        serde_json::to_string(c).unwrap_or_default()
    ));
    Ok(())
}

fn check_file(path: &Path, opts: &PipelineOptions) -> ExampleRow {
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let mut diffs = Vec::new();
    let mut caveats = Vec::new();
    match read_json::<GoldenFile>(path) {
        Err(e) => diffs.push(format!("unreadable: {e}")),
        Ok(g) => {
            for (k, case) in g.cases.iter().enumerate() {
                let before = diffs.len();
                if let Err(e) = check_case(case, opts, &mut diffs, &mut caveats) {
                    diffs.push(format!("error: {e}"));
                }
                for d in diffs.iter_mut().skip(before) {
                    *d = format!("case {k}: {d}");
                }
            }
        }
    }
    ExampleRow { name, passed: diffs.is_empty(), diffs, caveats }
}

pub const GOLDEN_FILES: [&str; 4] =
    ["cubic_sl3.json", "totally_real_quartic.json", "unipotent_block.json", "gaussian_s_units.json"];

/// Runs the golden requests in `corpus`; missing files become failed rows.
pub fn verify_paper_examples(corpus: &Path, opts: &PipelineOptions) -> Vec<ExampleRow> {
    GOLDEN_FILES.iter().map(|f| check_file(&corpus.join(f), opts)).collect()
}

/// The corpus shipped with the crate.
pub fn default_corpus() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}
