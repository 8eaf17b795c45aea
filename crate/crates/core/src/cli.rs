//! Command-line front end. Exit codes: 0 success or S-ample, 2 not S-ample,
//! 3 undecidable, 1 error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::etale::{EtaleAlgebra, EtaleAlgebraJson};
use crate::galois::Place;
use crate::pipeline::{
    default_corpus, read_json, run_pipeline, verify_paper_examples, PipelineOptions, PipelineRequest,
};
use crate::torus::{is_s_ample, Ambient, PlaceSet, TorusDatum, Verdict};
use crate::units::{
    norm_one_subgroup, search_unit_system, verify_unit_system, UnitSystem, DEFAULT_BUDGET,
};

#[derive(Parser, Debug)]
#[command(name = "cma", version, about = "Ample tori and maximal amenable subgroups of arithmetic groups")]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    /// Highest interval precision in bits (overrides CMA_PRECISION_CAP).
    #[arg(long, global = true)]
    pub precision_cap: Option<u32>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the full pipeline on a request file.
    Construct {
        request: PathBuf,
    },
    /// Decide S-ampleness of the torus of an algebra.
    CheckAmple {
        #[command(flatten)]
        torus: TorusArgs,
        /// Comma separated places, e.g. inf,5.
        #[arg(long)]
        places: String,
    },
    /// Search for or verify a system of (S-)units.
    Units {
        #[arg(long)]
        algebra: PathBuf,
        /// Coordinate bound of the search box.
        #[arg(long, conflicts_with = "verify")]
        search_bound: Option<u32>,
        /// Comma separated primes to invert.
        #[arg(long, default_value = "")]
        s_primes: String,
        /// Unit system file to verify.
        #[arg(long)]
        verify: Option<PathBuf>,
        /// Report the norm-one subgroup instead.
        #[arg(long)]
        norm_one: bool,
    },
    /// Local rank of the torus at one place.
    LocalRank {
        #[command(flatten)]
        torus: TorusArgs,
        #[arg(long)]
        place: String,
    },
    /// Reproduce the golden examples.
    VerifyPaper {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct TorusArgs {
    #[arg(long)]
    pub algebra: PathBuf,
    #[arg(long, default_value = "SL")]
    pub ambient: String,
}

impl TorusArgs {
    fn build(&self) -> Result<TorusDatum> {
        let ambient: Ambient = self.ambient.parse()?;
        TorusDatum::build(&load_algebra(&self.algebra)?, ambient)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn load_algebra(path: &std::path::Path) -> Result<EtaleAlgebra> {
    EtaleAlgebra::from_json(&read_json::<EtaleAlgebraJson>(path)?)
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::SAmple => 0,
        Verdict::NotSAmple => 2,
        Verdict::Undecidable => 3,
    }
}

pub fn error_json(e: &Error) -> serde_json::Value {
    let mut obj = json!({ "module": e.module(), "kind": e.kind(), "message": e.to_string() });
    if let Error::Json { path, .. } = e {
        obj["path"] = json!(path);
    }
    json!({ "error": obj })
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn primes_list(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for t in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match t.parse::<Place>()? {
            Place::Prime(p) => out.push(p),
            Place::Infinity => return Err(Error::InvalidInput("S-primes must be finite".into())),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn execute(cli: &Cli) -> Result<(i32, String)> {
    let opts = PipelineOptions {
        precision_cap: cli.precision_cap.unwrap_or_else(crate::units::precision_cap_from_env),
        budget: DEFAULT_BUDGET,
    };
    match &cli.command {
        Command::Construct { request } => {
            let req: PipelineRequest = read_json(request)?;
            let report = run_pipeline(&req, &opts)?;
            let text = if cli.json {
                pretty(&report)
            } else {
                let mut s = format!("verdict: {}\n", report.verdict());
                if let Some(gs) = &report.generators {
                    s += &format!("ring: {}\n", gs.ring);
                    for (name, m) in gs.all() {
                        s += &format!("{name}:\n{m}\n");
                    }
                }
                for c in &report.caveats {
                    s += &format!("caveat: {c}\n");
                }
                s
            };
            Ok((verdict_code(report.verdict()), text))
        }
        Command::CheckAmple { torus, places } => {
            let t = torus.build()?;
            let cert = is_s_ample(&t, &PlaceSet::parse(places)?)?;
            let text = if cli.json { pretty(&cert) } else { format!("{}\n", cert.verdict) };
            Ok((verdict_code(cert.verdict), text))
        }
        Command::Units { algebra, search_bound, s_primes, verify, norm_one } => {
            let e = load_algebra(algebra)?;
            let primes = primes_list(s_primes)?;
            let sys: UnitSystem = match (verify, search_bound) {
                (Some(path), _) => read_json(path)?,
                (None, Some(b)) => search_unit_system(&e, *b, &primes, opts.budget, opts.precision_cap)?,
                (None, None) => return Err(Error::InvalidInput("give --search-bound or --verify".into())),
            };
            let sys = if *norm_one { norm_one_subgroup(&e, &sys)? } else { sys };
            let cert = verify_unit_system(&e, &sys, opts.precision_cap)?;
            let code = if cert.certified { 0 } else { 1 };
            let text = if cli.json {
                pretty(&json!({ "system": sys, "certificate": cert }))
            } else {
                let mut s = format!(
                    "torsion: {:?} of order {}\n",
                    sys.torsion.element.to_strings(),
                    sys.torsion.order
                );
                for u in &sys.free {
                    s += &format!("unit: {:?}\n", u.to_strings());
                }
                s += &format!("certified: {}\n", cert.certified);
                if let Some(f) = &cert.failure {
                    s += &format!("failure: {f:?}\n");
                }
                s
            };
            Ok((code, text))
        }
        Command::LocalRank { torus, place } => {
            let t = torus.build()?;
            let r = t.local_rank(place.parse()?)?;
            let text = if cli.json { pretty(&json!({ "place": place, "local_rank": r })) } else { format!("{r}\n") };
            Ok((0, text))
        }
        Command::VerifyPaper { corpus } => {
            let dir = corpus.clone().unwrap_or_else(default_corpus);
            let rows = verify_paper_examples(&dir, &opts);
            let ok = rows.iter().all(|r| r.passed);
            let text = if cli.json {
                pretty(&rows)
            } else {
                let mut s = String::new();
                for r in &rows {
                    s += &format!("{} {}\n", if r.passed { "PASS" } else { "FAIL" }, r.name);
                    for d in &r.diffs {
                        s += &format!("  diff: {d}\n");
                    }
                    for c in &r.caveats {
                        s += &format!("  caveat: {c}\n");
                    }
                }
                s
            };
            Ok((if ok { 0 } else { 1 }, text))
        }
    }
}

/// Parses arguments and runs one subcommand.
pub fn dispatch<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match execute(&cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) if cli.json => Outcome { code: 1, stdout: pretty(&error_json(&e)), stderr: String::new() },
        Err(e) => Outcome { code: 1, stdout: String::new(), stderr: format!("error[{}/{}]: {e}\n", e.module(), e.kind()) },
    }
}
