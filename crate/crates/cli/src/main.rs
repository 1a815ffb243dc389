//! `crr`: compute common-randomness partitions, rate-region frontiers,
//! solved-case classifications, pruning reports, and the discontinuity
//! demonstration from pmf JSON documents.
//!
//! Exit codes: 0 success, 2 parse failure, 3 degenerate input, 4 infeasible
//! distortion target, 5 precondition violation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crr_core::error::Error;
use crr_core::gk::gk_partition;
use crr_core::json::{parse_distortion_json, parse_pmf_json};
use crr_core::prune::{prune_a, prune_b, AuxEvent, MarkovFiveTuple};
use crr_core::region::{
    binary_region, classify_source, discontinuity_demo, eval_star_candidate,
    eval_triple_candidate, fmt_sig9, identity_lift, optimize_star_region, qb_region, round_sig9,
    RateCorner, RegionFrontier, SearchConfig, SourceSpec,
};
use crr_core::sampling::{random_triple_channels, stream};

#[derive(Parser)]
#[command(name = "crr", version, about = "Rate regions for successive refinement with common receiver reconstructions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Star,
    Qb,
    Binary,
    TripleEval,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum PruneMethod {
    A,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Common-randomness partition of a pmf between two variable groups
    Gk {
        /// pmf JSON document
        #[arg(long)]
        input: PathBuf,
        /// left variable group (comma separated)
        #[arg(long, value_delimiter = ',')]
        left: Vec<String>,
        /// right variable group (comma separated)
        #[arg(long, value_delimiter = ',')]
        right: Vec<String>,
    },
    /// Rate-region frontier, written as CSV
    Region {
        #[arg(long)]
        method: Method,
        /// source pmf over (S, U, V); Hamming distortion on the S alphabet
        #[arg(long)]
        input: Option<PathBuf>,
        /// binary chain source parameter (generates the source when --input is absent)
        #[arg(long)]
        rho: Option<f64>,
        /// binary chain source parameter
        #[arg(long)]
        delta: Option<f64>,
        /// distortion target
        #[arg(long = "D")]
        d: f64,
        /// distortion matrix JSON; Hamming on the S alphabet when absent
        #[arg(long)]
        distortion: Option<PathBuf>,
        /// auxiliary alphabet size (defaults to |S| + 2)
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.05)]
        grid: f64,
        #[arg(long, default_value_t = 64)]
        restarts: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// output CSV path; a manifest is written alongside
        #[arg(long)]
        out: PathBuf,
    },
    /// Solved-case classification of a source, as JSON on stdout
    Classify {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Pruning transform over a five-variable Markov tuple, report as JSON
    Prune {
        /// pmf JSON document over (A1, A2, S, B1, B2)
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        method: PruneMethod,
        #[arg(long)]
        eta: f64,
        /// conditional threshold (method b)
        #[arg(long)]
        delta: Option<f64>,
        /// kept auxiliary pairs "a:b,a:b" by symbol label (method a)
        #[arg(long)]
        event: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discontinuity of the binary region at vanishing crossover
    DemoDiscontinuity {
        #[arg(long)]
        rho: f64,
        #[arg(long = "D")]
        d: f64,
        /// crossover values (comma separated)
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        /// output CSV path; the JSON report goes to stdout
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    params: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    version: String,
    input_digest: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::EmptySupport | Error::DegenerateResult(_) => 3,
        Error::InfeasibleDistortion { .. } => 4,
        _ => 5,
    }
}

fn read_input(path: &Path) -> Result<(String, String), Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(text.as_bytes());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((text, hex))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    fs::write(path, bytes)
        .map_err(|e| Error::ArgOutOfRange(format!("cannot write {}: {e}", path.display())))
}

/// Rounds every float in a JSON value to 9 significant digits.
fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if n.is_f64() {
                let rounded = round_sig9(n.as_f64().unwrap());
                if let Some(num) = serde_json::Number::from_f64(rounded) {
                    *v = serde_json::Value::Number(num);
                }
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

fn stable_json<T: Serialize>(value: &T) -> Result<String, Error> {
    let mut v = serde_json::to_value(value)
        .map_err(|e| Error::ArgOutOfRange(format!("serialization failed: {e}")))?;
    round_json(&mut v);
    serde_json::to_string_pretty(&v)
        .map_err(|e| Error::ArgOutOfRange(format!("serialization failed: {e}")))
}

fn write_manifest(
    out: &Path,
    command: &str,
    params: BTreeMap<String, serde_json::Value>,
    seed: Option<u64>,
    input_digest: Option<String>,
) -> Result<(), Error> {
    let manifest = RunManifest {
        command: command.into(),
        params,
        seed,
        version: env!("CARGO_PKG_VERSION").into(),
        input_digest,
    };
    let path = out.with_file_name(format!(
        "{}.manifest.json",
        out.file_name().map(|s| s.to_string_lossy()).unwrap_or_default()
    ));
    write_file(&path, stable_json(&manifest)?.as_bytes())
}

fn load_source(
    input: Option<&PathBuf>,
    rho: Option<f64>,
    delta: Option<f64>,
    d: f64,
    distortion: Option<&PathBuf>,
) -> Result<(SourceSpec, Option<String>, Option<String>), Error> {
    let (pmf, digest) = match (input, rho, delta) {
        (Some(path), _, _) => {
            let (text, digest) = read_input(path)?;
            (parse_pmf_json(&text)?, Some(digest))
        }
        (None, Some(r), Some(dl)) => (crr_core::region::binary_source_pmf(r, dl)?, None),
        _ => {
            return Err(Error::PreconditionViolated(
                "provide --input, or --rho and --delta to generate the binary chain source"
                    .into(),
            ))
        }
    };
    match distortion {
        None => Ok((SourceSpec::with_hamming(pmf, d)?, digest, None)),
        Some(path) => {
            let (text, dd) = read_input(path)?;
            let measure = parse_distortion_json(&text, pmf.alphabet("S")?)?;
            Ok((SourceSpec::new(pmf, measure, d)?, digest, Some(dd)))
        }
    }
}

#[derive(Serialize)]
struct GkOutput {
    classes: usize,
    class_masses: Vec<f64>,
    entropy_bits: f64,
    mapping_choices: u64,
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gk { input, left, right } => {
            let (text, _) = read_input(&input)?;
            let pmf = parse_pmf_json(&text)?;
            let left: Vec<&str> = left.iter().map(|s| s.as_str()).collect();
            let right: Vec<&str> = right.iter().map(|s| s.as_str()).collect();
            let part = gk_partition(&pmf, &left, &right)?;
            let out = GkOutput {
                classes: part.num_classes(),
                class_masses: part.class_mass().to_vec(),
                entropy_bits: part.entropy(),
                mapping_choices: part.mapping_choices()?,
            };
            println!("{}", stable_json(&out)?);
            Ok(())
        }
        Command::Region {
            method,
            input,
            rho,
            delta,
            d,
            distortion,
            k,
            grid,
            restarts,
            seed,
            out,
        } => {
            let mut params = BTreeMap::new();
            params.insert("method".into(), method_name(method).into());
            params.insert("D".into(), serde_json::json!(d));
            params.insert("grid".into(), serde_json::json!(grid));
            params.insert("restarts".into(), serde_json::json!(restarts));
            if let Some(path) = &input {
                params.insert("input".into(), path.display().to_string().into());
            }
            if let Some(path) = &distortion {
                params.insert("distortion".into(), path.display().to_string().into());
            }
            if let Some(r) = rho {
                params.insert("rho".into(), serde_json::json!(r));
            }
            if let Some(dl) = delta {
                params.insert("delta".into(), serde_json::json!(dl));
            }
            let cfg = SearchConfig { grid, restarts, seed, refine: true };

            let (frontier, digest) = match method {
                Method::Binary => {
                    let (rho, delta) = match (rho, delta) {
                        (Some(r), Some(dl)) => (r, dl),
                        _ => {
                            return Err(Error::PreconditionViolated(
                                "the binary method needs --rho and --delta".into(),
                            ))
                        }
                    };
                    (binary_region(rho, delta, d)?, None)
                }
                Method::Star => {
                    let (src, digest, dd) =
                        load_source(input.as_ref(), rho, delta, d, distortion.as_ref())?;
                    if let Some(dd) = dd {
                        params.insert("distortion_digest".into(), dd.into());
                    }
                    let k = k.unwrap_or(src.pmf().alphabet("S")?.len() + 2);
                    params.insert("k".into(), serde_json::json!(k));
                    (optimize_star_region(&src, k, &cfg)?, digest)
                }
                Method::Qb => {
                    let (src, digest, dd) =
                        load_source(input.as_ref(), rho, delta, d, distortion.as_ref())?;
                    if let Some(dd) = dd {
                        params.insert("distortion_digest".into(), dd.into());
                    }
                    (qb_region(&src, &cfg)?, digest)
                }
                Method::TripleEval => {
                    let (src, digest, dd) =
                        load_source(input.as_ref(), rho, delta, d, distortion.as_ref())?;
                    if let Some(dd) = dd {
                        params.insert("distortion_digest".into(), dd.into());
                    }
                    (triple_eval_region(&src, restarts, seed)?, digest)
                }
            };

            let mut csv = Vec::new();
            frontier
                .write_csv(&mut csv, d)
                .map_err(|e| Error::ArgOutOfRange(format!("csv: {e}")))?;
            write_file(&out, &csv)?;
            params.insert("out".into(), out.display().to_string().into());
            write_manifest(&out, "region", params, Some(seed), digest)?;
            print_summary(&frontier);
            Ok(())
        }
        Command::Classify { input, rho, delta, tol } => {
            // the distortion target is irrelevant for classification
            let (src, _, _) = load_source(input.as_ref(), rho, delta, 0.0, None)?;
            let report = classify_source(&src, tol)?;
            println!("{}", stable_json(&report)?);
            Ok(())
        }
        Command::Prune { input, method, eta, delta, event, out } => {
            let (text, digest) = read_input(&input)?;
            let pmf = parse_pmf_json(&text)?;
            let tuple = MarkovFiveTuple::new(pmf)?;
            let mut params = BTreeMap::new();
            params.insert("input".into(), input.display().to_string().into());
            params.insert("eta".into(), serde_json::json!(eta));
            let report = match method {
                PruneMethod::A => {
                    params.insert("method".into(), "a".into());
                    let keep = parse_event(&tuple, event.as_deref())?;
                    if let Some(ev) = &event {
                        params.insert("event".into(), ev.clone().into());
                    }
                    let (_pruned, report) = prune_a(&tuple, &keep, eta)?;
                    report
                }
                PruneMethod::B => {
                    params.insert("method".into(), "b".into());
                    let delta = delta.ok_or_else(|| {
                        Error::PreconditionViolated("method b needs --delta".into())
                    })?;
                    params.insert("delta".into(), serde_json::json!(delta));
                    let (_pruned, report) = prune_b(&tuple, delta, eta)?;
                    report
                }
            };
            write_file(&out, stable_json(&report)?.as_bytes())?;
            params.insert("out".into(), out.display().to_string().into());
            write_manifest(&out, "prune", params, None, Some(digest))?;
            println!(
                "l1={} kl={} bounds_hold={}",
                fmt_sig9(report.achieved_l1),
                fmt_sig9(report.achieved_kl),
                report.all_bounds_hold()
            );
            Ok(())
        }
        Command::DemoDiscontinuity { rho, d, delta, out } => {
            let report = discontinuity_demo(rho, d, &delta)?;
            let mut csv = String::from("delta,r_uv_min,sum_rate_min\n");
            for row in &report.rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_sig9(row.delta),
                    fmt_sig9(row.r_uv),
                    fmt_sig9(row.sum_rate)
                ));
            }
            csv.push_str(&format!(
                "{},{},{}\n",
                fmt_sig9(0.0),
                fmt_sig9(report.zero_delta_r_uv),
                fmt_sig9(report.zero_delta_sum_rate)
            ));
            write_file(&out, csv.as_bytes())?;
            let mut params = BTreeMap::new();
            params.insert("rho".into(), serde_json::json!(rho));
            params.insert("D".into(), serde_json::json!(d));
            params.insert(
                "delta".into(),
                serde_json::Value::Array(delta.iter().map(|x| serde_json::json!(x)).collect()),
            );
            params.insert("out".into(), out.display().to_string().into());
            write_manifest(&out, "demo-discontinuity", params, None, None)?;
            println!("{}", stable_json(&report)?);
            Ok(())
        }
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::Star => "star",
        Method::Qb => "qb",
        Method::Binary => "binary",
        Method::TripleEval => "triple-eval",
    }
}

fn print_summary(frontier: &RegionFrontier) {
    let min_a = frontier
        .corners()
        .iter()
        .map(|c| c.r_uv)
        .fold(f64::INFINITY, f64::min);
    let min_b = frontier
        .corners()
        .iter()
        .map(|c| c.sum_rate)
        .fold(f64::INFINITY, f64::min);
    println!(
        "corners={} min_r_uv={} min_sum_rate={}",
        frontier.corners().len(),
        fmt_sig9(min_a),
        fmt_sig9(min_b)
    );
}

/// Small randomized sweep of the triple space: seeded conditionally
/// independent triples plus copy-lifts of deterministic quantizers, reduced
/// to the Pareto set of feasible outer-form corners.
fn triple_eval_region(
    src: &SourceSpec,
    restarts: u32,
    seed: u64,
) -> Result<RegionFrontier, Error> {
    let mut corners: Vec<RateCorner> = Vec::new();
    // deterministic seed candidates keep the sweep non-empty at feasible targets
    let s = src.pmf().alphabet("S")?.clone();
    let shat = src.distortion().recon().clone();
    let nshat = shat.len();
    let mut rows = vec![0.0; s.len() * nshat];
    for (si, row) in rows.chunks_mut(nshat).enumerate() {
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for sh in 0..nshat {
            if src.distortion().d(si, sh) < best_val {
                best_val = src.distortion().d(si, sh);
                best = sh;
            }
        }
        row[best] = 1.0;
    }
    let bayes = crr_core::probability::Channel::new(
        vec![s.clone()],
        crr_core::probability::Alphabet::new("A", shat.symbols().to_vec())?,
        rows,
    )?;
    let lift_b = identity_lift(bayes.to_alphabet(), &s, "B")?;
    let lift_c = identity_lift(bayes.to_alphabet(), &s, "C")?;
    let t = eval_triple_candidate(src, &bayes, &lift_b, &lift_c)?;
    if t.candidate.is_feasible(src.d()) {
        corners.push(t.corner_ddag);
    }
    for r in 0..restarts {
        let mut rng = stream(seed, r as u64 + 1);
        let (qa, qb, qc) = random_triple_channels(&mut rng, src, 2, 2, 2)?;
        let t = eval_triple_candidate(src, &qa, &qb, &qc)?;
        if t.candidate.is_feasible(src.d()) {
            corners.push(t.corner_ddag);
        }
        // copy-lift of the same single-auxiliary channel
        let lb = identity_lift(qa.to_alphabet(), &s, "B")?;
        let lc = identity_lift(qa.to_alphabet(), &s, "C")?;
        let star = eval_star_candidate(src, &qa)?;
        if star.is_feasible(src.d()) {
            let t = eval_triple_candidate(src, &qa, &lb, &lc)?;
            corners.push(t.corner_ddag);
        }
    }
    if corners.is_empty() {
        let dl = src.underline_distortion();
        if src.d() < dl {
            return Err(Error::InfeasibleDistortion { d: src.d(), underline_d: dl });
        }
    }
    Ok(RegionFrontier::from_corners(corners))
}

/// Parses "--event a:b,c:d" as kept auxiliary pairs by symbol label; an
/// absent flag keeps everything.
fn parse_event(tuple: &MarkovFiveTuple, spec: Option<&str>) -> Result<AuxEvent, Error> {
    let a1 = tuple.joint().alphabet("A1")?;
    let a2 = tuple.joint().alphabet("A2")?;
    let spec = match spec {
        None => return Ok(AuxEvent::full(a1.len(), a2.len())),
        Some(s) => s,
    };
    let mut pairs = Vec::new();
    for part in spec.split(',') {
        let (l, r) = part.split_once(':').ok_or_else(|| {
            Error::PreconditionViolated(format!("event pair `{part}` is not `a1:a2`"))
        })?;
        let i = a1.index_of(l.trim()).ok_or_else(|| {
            Error::PreconditionViolated(format!("`{l}` is not an A1 symbol"))
        })?;
        let j = a2.index_of(r.trim()).ok_or_else(|| {
            Error::PreconditionViolated(format!("`{r}` is not an A2 symbol"))
        })?;
        pairs.push((i, j));
    }
    AuxEvent::from_kept_pairs(a1.len(), a2.len(), &pairs)
}
