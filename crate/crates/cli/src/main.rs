//! `lattice-ppt`: exact PPT-distinguishability of lattice states from the
//! shell.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors.

mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lattice_ppt::census::{
    self, CensusCache, CensusError, CensusRecord, TheoremName, TheoremOptions, DEFAULT_SUBSET_LIMIT,
};
use lattice_ppt::oracle::verify_reduction;
use lattice_ppt::ppt::{self, AlphaMode, Certificate};
use lattice_ppt::StateSet;
use rand::{seq::index::sample, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use render::{render, Format};

const DEFAULT_CACHE_DIR: &str = ".lattice-ppt-cache";

#[derive(Debug, Parser)]
#[command(name = "lattice-ppt", version, about = "Exact PPT-distinguishability of lattice maximally entangled states")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write results here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for census runs (default: all cores).
    #[arg(long, global = true)]
    parallel: Option<usize>,
    /// Directory of the JSONL record cache.
    #[arg(long, global = true, env = "LATTICE_PPT_CACHE_DIR", default_value = DEFAULT_CACHE_DIR)]
    cache_dir: PathBuf,
    /// Leave record timestamps null so identical runs give identical output.
    #[arg(long, global = true)]
    no_timestamp: bool,
    /// How LP values are obtained.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Screen)]
    mode: Mode,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Screen,
}

impl From<Mode> for AlphaMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Exact => AlphaMode::Exact,
            Mode::Screen => AlphaMode::Screen,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal PPT success probability of one set, with a certificate.
    Check {
        #[arg(long)]
        set: Option<StateSet>,
        /// Write the certificate JSON here.
        #[arg(long)]
        certificate: Option<PathBuf>,
        /// Verify an existing certificate file instead of solving.
        #[arg(long, conflicts_with_all = ["set", "certificate"])]
        verify: Option<PathBuf>,
    },
    /// All 1820 quadruples at t = 2, by criterion and LP.
    Census {
        /// Include every record in the output.
        #[arg(long)]
        records: bool,
    },
    /// Common-negative family of every column.
    Families {
        #[arg(long, default_value_t = 2)]
        t: u32,
    },
    /// Common-negative row counts over column m-subsets.
    Lemmas {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        m: usize,
        /// Enumerate every subset instead of those containing column 0.
        #[arg(long)]
        full: bool,
        /// Refuse enumerations larger than this.
        #[arg(long, default_value_t = DEFAULT_SUBSET_LIMIT)]
        limit: u64,
        /// Lift the size guard.
        #[arg(long)]
        force: bool,
    },
    /// Machine check of thm3, thm4 or thm5.
    VerifyTheorem {
        #[arg(long)]
        name: TheoremName,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Run the t = 4 LP checks (hours).
        #[arg(long)]
        long: bool,
    },
    /// Exact dense verification of the partial-transpose identities.
    Oracle {
        #[arg(long, default_value_t = 2)]
        t: u32,
    },
    /// The β′ upper bound, closed form and LP.
    Bound {
        #[arg(long)]
        set: StateSet,
    },
    /// Reduced costs of the standard-form basis (random t = 2 quadruple by default).
    ReducedCosts {
        #[arg(long)]
        set: Option<StateSet>,
    },
    /// Random k-subsets evaluated and persisted.
    Sample {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<CensusError> for Failure {
    fn from(e: CensusError) -> Self {
        match e {
            CensusError::Io { .. } => Failure::Runtime(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// A JSON result and whether every claim in it verified.
struct Outcome {
    value: Value,
    pass: bool,
}

fn ok(value: Value) -> Outcome {
    Outcome { value, pass: true }
}

fn open_cache(common: &Common) -> Result<CensusCache, Failure> {
    let cache = CensusCache::open(&common.cache_dir)?;
    for bad in cache.corrupt_lines() {
        eprintln!("cache: skipped corrupt line {}: {}", bad.line, bad.reason);
    }
    Ok(cache)
}

fn records_json<'a>(records: impl IntoIterator<Item = &'a CensusRecord>) -> Value {
    serde_json::to_value(records.into_iter().collect::<Vec<_>>()).expect("records serialize")
}

fn check(common: &Common, set: Option<StateSet>, certificate: Option<PathBuf>, verify: Option<PathBuf>) -> Result<Outcome, Failure> {
    if let Some(path) = verify {
        let text = std::fs::read_to_string(&path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        let (set, cert) = Certificate::from_json(&text).map_err(|e| Failure::Usage(e.to_string()))?;
        let verified = ppt::verify_certificate(&set, &cert).map_err(|e| Failure::Usage(e.to_string()))?;
        return Ok(Outcome {
            value: json!({
                "set": set.to_string(),
                "type": cert.kind(),
                "value": cert.value().to_string(),
                "verified": verified,
            }),
            pass: verified,
        });
    }
    let set = set.ok_or_else(|| Failure::Usage("check needs --set or --verify".into()))?;
    let result = ppt::alpha(&set, common.mode.into());
    let verified = ppt::verify_certificate(&set, &result.certificate).unwrap_or(false);
    if let Some(path) = &certificate {
        std::fs::write(path, result.certificate.to_json(&set)).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(Outcome {
        value: json!({
            "set": set.to_string(),
            "t": set.t(),
            "k": set.k(),
            "alpha": result.alpha.to_string(),
            "distinguishable": result.distinguishable,
            "verdict": if result.distinguishable { "distinguishable" } else { "indistinguishable" },
            "method": result.method.as_str(),
            "primal_value": result.primal_value.to_string(),
            "dual_value": result.dual_value.to_string(),
            "beta_prime": ppt::beta_prime(&set).to_string(),
            "certificate_type": result.certificate.kind(),
            "certificate_verified": verified,
            "certificate_path": certificate.map(|p| p.display().to_string()),
        }),
        pass: verified,
    })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let common = &cli.common;
    let stamp = !common.no_timestamp;
    let mode: AlphaMode = common.mode.into();
    match cli.command {
        Command::Check { set, certificate, verify } => check(common, set, certificate, verify),
        Command::Census { records } => {
            let mut cache = open_cache(common)?;
            let run = census::enumerate_quadruples_t2(mode, &mut cache, stamp)?;
            eprintln!("census: {} LP solves, {} cached", run.lp_solves, run.summary.total - run.lp_solves);
            let s = &run.summary;
            let pass = s.disagreements.is_empty();
            let mut value = json!({ "summary": s });
            if records || common.format == Format::Csv {
                value["records"] = records_json(run.evaluations.iter().map(|e| &e.record));
            }
            Ok(Outcome { value, pass })
        }
        Command::Families { t } => {
            let families = census::maximal_families(t)?;
            let list: Vec<Value> = families
                .iter()
                .map(|(c, f)| json!({"column": c.to_string(), "members": f.to_string()}))
                .collect();
            Ok(ok(json!({"t": t, "families": list})))
        }
        Command::Lemmas { t, m, full, limit, force } => {
            let limit = if force { u64::MAX } else { limit };
            let stats = census::intersection_stats(t, m, !full, limit)?;
            Ok(ok(serde_json::to_value(stats).expect("stats serialize")))
        }
        Command::VerifyTheorem { name, samples, long } => {
            let mut cache = open_cache(common)?;
            let opts = TheoremOptions {
                samples,
                seed: common.seed,
                mode,
                long,
                stamp,
                limit: DEFAULT_SUBSET_LIMIT,
            };
            let report = census::verify_theorem(name, &opts, &mut cache)?;
            let pass = report.overall_pass;
            Ok(Outcome {
                value: serde_json::to_value(report).expect("report serializes"),
                pass,
            })
        }
        Command::Oracle { t } => {
            let report = verify_reduction(t).map_err(|e| Failure::Usage(e.to_string()))?;
            let pass = report.passed();
            let mut value = serde_json::to_value(&report).expect("report serializes");
            value["pass"] = json!(pass);
            Ok(Outcome { value, pass })
        }
        Command::Bound { set } => {
            let closed = ppt::beta_prime(&set);
            let lp = ppt::beta_prime_lp(&set);
            Ok(Outcome {
                value: json!({
                    "set": set.to_string(),
                    "beta_prime": closed.to_string(),
                    "beta_prime_lp": lp.to_string(),
                    "trivial_bound": "1",
                }),
                pass: closed == lp,
            })
        }
        Command::ReducedCosts { set } => {
            let set = match set {
                Some(s) => s,
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
                    let picks: Vec<u32> = sample(&mut rng, 16, 4).into_iter().map(|i| i as u32).collect();
                    StateSet::from_linear(2, &picks).expect("valid quadruple")
                }
            };
            let report = ppt::reduced_costs(&set);
            let pass = report.pass;
            Ok(Outcome {
                value: serde_json::to_value(report).expect("report serializes"),
                pass,
            })
        }
        Command::Sample { t, k, n } => {
            let mut cache = open_cache(common)?;
            let run = census::random_sample_census(t, k, n, common.seed, mode, &mut cache, stamp)?;
            eprintln!("sample: {} LP solves, {} cached", run.lp_solves, n - run.lp_solves);
            let records: Vec<&CensusRecord> = run.evaluations.iter().map(|e| &e.record).collect();
            let violations = census::downward_closure_violations(cache.records())?;
            let indistinguishable = records.iter().filter(|r| !r.distinguishable).count();
            Ok(Outcome {
                value: json!({
                    "t": t,
                    "k": k,
                    "n": n,
                    "seed": common.seed,
                    "indistinguishable": indistinguishable,
                    "downward_closure_violations": violations,
                    "records": records_json(records),
                }),
                pass: violations.is_empty(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.common.parallel {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let format = cli.common.format;
    let output = cli.common.output.clone();
    match run(cli) {
        Ok(outcome) => {
            let text = render(&outcome.value, format);
            match output {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(1)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
