//! Command-line front end: analyze one covering, sweep a parameter, or run
//! the verification suite.  All output is JSON with complex numbers as
//! `[re, im]` pairs; identical inputs and seeds produce byte-identical bytes.

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::path::PathBuf;

use hurwitz::descriptor::{c_to_pair, pair_to_c, parse_with_phi, CoveringDescriptor, FrobeniusDataJson};
use hurwitz::frobenius::{Covering, Frobenius};
use hurwitz::verify::{suite_all, suite_genus0, suite_genus1, FDConfig};
use hurwitz::Error;

#[derive(Parser)]
#[command(name = "hurwitz", about = "Frobenius-manifold data on Hurwitz spaces", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the full Frobenius data of one covering descriptor.
    Analyze(AnalyzeArgs),
    /// Evaluate selected quantities along a one-parameter sweep (JSON lines).
    Sweep(SweepArgs),
    /// Run the identity verification suite.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Covering descriptor JSON file (see schemas/covering.schema.json).
    descriptor: PathBuf,
    /// Primary differential: dz, dz_over_z or omega (default: the family's).
    #[arg(long)]
    phi: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep specification JSON file (see schemas/sweep.schema.json).
    spec: PathBuf,
    /// Number of worker threads for grid evaluation.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Which identities to run: genus0, genus1 or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// RNG seed for covering sampling.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Centered finite-difference step (relative).
    #[arg(long, default_value_t = 1e-5)]
    fd_step: f64,
    /// Multiplies every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSpec {
    covering: CoveringDescriptor,
    parameter: String,
    start: [f64; 2],
    end: [f64; 2],
    steps: usize,
    outputs: Vec<String>,
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Analyze(args) => cmd_analyze(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Verify(args) => cmd_verify(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let kind = match &e {
                Error::Descriptor(_) | Error::Domain(_) => "parse",
                Error::NonSimpleStratum(_) | Error::SearchFailure(_) => "non_simple",
                Error::IncompatiblePhi(_) => "incompatible_phi",
                _ => "internal",
            };
            eprintln!("{}", json!({ "kind": kind, "message": e.to_string() }));
            match kind {
                "parse" => 2,
                "non_simple" => 3,
                "incompatible_phi" => 4,
                _ => 1,
            }
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Descriptor(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Descriptor(format!("invalid JSON: {e}")))
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<i32, Error> {
    let descriptor: CoveringDescriptor = read_json(&args.descriptor)?;
    let (covering, phi) = parse_with_phi(&descriptor, args.phi.as_deref())?;
    let frob = Frobenius::new(covering)?;
    let data = frob.assemble(phi)?;
    let out = FrobeniusDataJson::from(&data);
    println!("{}", serde_json::to_string(&out).expect("serialization cannot fail"));
    Ok(0)
}

/// Index of a named parameter in the coefficient chart of the covering.
fn parameter_index(covering: &Covering, name: &str) -> Result<usize, Error> {
    let bad = || Error::Descriptor(format!("unknown parameter '{name}' for this covering"));
    match covering {
        Covering::G0(cov) => {
            let n = cov.degree();
            match cov {
                hurwitz::genus0::CoveringG0::Polynomial { .. } => {
                    let j: usize =
                        name.strip_prefix('a').and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                    if (2..=n).contains(&j) {
                        Ok(j - 2)
                    } else {
                        Err(bad())
                    }
                }
                hurwitz::genus0::CoveringG0::Laurent { .. } => {
                    let j: usize =
                        name.strip_prefix('b').and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                    if (1..=n).contains(&j) {
                        Ok(j - 1)
                    } else {
                        Err(bad())
                    }
                }
                hurwitz::genus0::CoveringG0::Rational { .. } => Err(bad()),
            }
        }
        Covering::G1(cov) => match name {
            "sigma" => Ok(0),
            "c0" => Ok(1),
            _ => {
                let j: usize =
                    name.strip_prefix('c').and_then(|s| s.parse().ok()).ok_or_else(bad)?;
                if (2..=cov.degree()).contains(&j) {
                    Ok(j)
                } else {
                    Err(bad())
                }
            }
        },
    }
}

const SWEEP_OUTPUTS: [&str; 5] = ["G", "log_tau_B", "log_tau_I", "flat_coords", "lambdas"];

fn cmd_sweep(args: SweepArgs) -> Result<i32, Error> {
    let spec: SweepSpec = read_json(&args.spec)?;
    if spec.steps < 2 {
        return Err(Error::Descriptor("sweep needs steps >= 2".into()));
    }
    for o in &spec.outputs {
        if !SWEEP_OUTPUTS.contains(&o.as_str()) {
            return Err(Error::Descriptor(format!(
                "unknown output '{o}'; available: {SWEEP_OUTPUTS:?}"
            )));
        }
    }
    let (covering, phi) = parse_with_phi(&spec.covering, None)?;
    let base_params = match &covering {
        Covering::G0(c) => c.params()?,
        Covering::G1(c) => c.params(),
    };
    let index = parameter_index(&covering, &spec.parameter)?;
    let start = pair_to_c(spec.start);
    let end = pair_to_c(spec.end);

    let eval_point = |i: usize| -> serde_json::Value {
        let t = i as f64 / (spec.steps - 1) as f64;
        let value = start + (end - start) * t;
        let mut params = base_params.clone();
        params[index] = value;
        let outcome = (|| -> Result<serde_json::Value, Error> {
            let cov = match &covering {
                Covering::G0(c) => Covering::G0(c.with_params(&params)?),
                Covering::G1(c) => Covering::G1(c.with_params(&params)?),
            };
            let frob = Frobenius::new(cov)?;
            let mut record = serde_json::Map::new();
            record.insert("index".into(), json!(i));
            record.insert("value".into(), json!(c_to_pair(value)));
            for o in &spec.outputs {
                match o.as_str() {
                    "G" => {
                        let (g, _) = frob.g_function(phi)?;
                        record.insert("G".into(), json!(c_to_pair(g)));
                    }
                    "log_tau_B" => {
                        record.insert(
                            "log_tau_B".into(),
                            json!(c_to_pair(frob.log_tau_bergmann()?)),
                        );
                    }
                    "log_tau_I" => {
                        record.insert("log_tau_I".into(), json!(c_to_pair(frob.log_tau_iso()?)));
                    }
                    "flat_coords" => {
                        let t: Vec<[f64; 2]> =
                            frob.flat_coordinates()?.iter().map(|z| c_to_pair(*z)).collect();
                        record.insert("flat_coords".into(), json!(t));
                    }
                    "lambdas" => {
                        let l: Vec<[f64; 2]> =
                            frob.lambdas().iter().map(|z| c_to_pair(*z)).collect();
                        record.insert("lambdas".into(), json!(l));
                    }
                    _ => unreachable!(),
                }
            }
            Ok(serde_json::Value::Object(record))
        })();
        match outcome {
            Ok(v) => v,
            Err(e) => json!({ "index": i, "skip": true, "reason": e.to_string() }),
        }
    };

    let records: Vec<serde_json::Value> = if args.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
        pool.install(|| (0..spec.steps).into_par_iter().map(eval_point).collect())
    } else {
        (0..spec.steps).map(eval_point).collect()
    };
    for r in records {
        println!("{r}");
    }
    Ok(0)
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Error> {
    let cfg = {
        let mut cfg = FDConfig::with_step(args.fd_step)?;
        cfg.tol_scale = args.tol_scale;
        cfg
    };
    let report = match args.suite.as_str() {
        "genus0" => suite_genus0(args.seed, &cfg)?,
        "genus1" => suite_genus1(args.seed, &cfg)?,
        "all" => suite_all(args.seed, &cfg)?,
        other => return Err(Error::Descriptor(format!("unknown suite '{other}'"))),
    };
    println!("{}", serde_json::to_string(&report).expect("serialization cannot fail"));
    Ok(if report.pass { 0 } else { 1 })
}
