//! `tfm` — command-line front end: evaluate mechanisms, check axioms, search
//! for side contracts, reduce witnesses, and decide circuit instances.
//!
//! Exit code 0 means the run completed, whatever the game-theoretic verdict;
//! nonzero means the tool itself failed (bad config, unreadable file, ...),
//! with a machine-readable error object on stderr. `tfm suite` is the
//! exception: a failing acceptance criterion exits nonzero.

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tfm_core::circuit::{
    decide_2scpdp, tautology_to_scpdp, BoolCircuit, CircuitAuction, CircuitAuctionFile,
    ScpdpDecision,
};
use tfm_core::contract::WitnessFile;
use tfm_core::reduce::{reduce_to_2sc, LocalizeMode};
use tfm_core::report::{canonical_json, to_csv};
use tfm_core::suite::run_suite;
use tfm_core::tabulated::load_tabulated;
use tfm_core::{
    axioms, find_c_sc, zoo, BidVector, MechRef, MinerModel, Money, SearchLimits, SearchOutcome,
};

#[derive(Parser)]
#[command(name = "tfm", about = "Transaction fee mechanism collusion analysis")]
struct Cli {
    /// Worker threads; TFM_WORKERS overrides the default, this flag
    /// overrides both.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct MechArgs {
    /// Zoo mechanism name or path to a tabulated JSON file.
    #[arg(long)]
    mech: String,

    /// Mechanism parameters as key=value (repeatable or comma-separated).
    #[arg(long, value_delimiter = ',')]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a zoo mechanism on a bid vector and print the outcome.
    Zoo {
        /// Zoo mechanism name.
        name: String,
        #[arg(long, value_delimiter = ',')]
        params: Vec<String>,
        /// Comma-separated bids, e.g. 2,3/2,0.5
        #[arg(long, value_delimiter = ',', required = true)]
        bids: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the five axiom checkers over a finite grid.
    CheckAxioms {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a beneficial side contract of the miner and at most c bidders.
    FindSc {
        #[command(flatten)]
        mech: MechArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        grid: Vec<String>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        c: usize,
        #[arg(long, default_value = "passive")]
        model: String,
        /// Maximum fake bids per contract in the active model.
        #[arg(long, default_value_t = 2)]
        fake_limit: usize,
        /// Refuse searches with more candidates than this.
        #[arg(long)]
        max_candidates: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a witness to a collusion of the miner and at most 2 bidders.
    Reduce {
        #[command(flatten)]
        mech: MechArgs,
        /// Witness JSON produced by find-sc.
        #[arg(long)]
        witness: PathBuf,
        /// grid | bisect
        #[arg(long, default_value = "grid")]
        mode: String,
        #[arg(long, default_value_t = 64)]
        max_iters: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decide whether a circuit-represented auction resists order-2 contracts.
    Scpdp {
        /// Circuit auction JSON file.
        #[arg(long)]
        circuits: PathBuf,
        #[arg(long, default_value = "active")]
        model: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the auction whose order-2 robustness decides a tautology instance.
    TautReduce {
        /// Circuit JSON file ({"inputs":n,"gates":[...],"outputs":[...]}).
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance battery and print one line per criterion.
    Suite {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl ToString) -> Self {
        CliError {
            code,
            message: message.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_money_list(items: &[String], what: &str) -> CliResult<Vec<Money>> {
    items
        .iter()
        .map(|s| {
            s.parse::<Money>()
                .map_err(|e| CliError::new("config", format!("bad {what} entry: {e}")))
        })
        .collect()
}

fn parse_grid(items: &[String]) -> CliResult<Vec<Money>> {
    let mut grid = parse_money_list(items, "grid")?;
    grid.sort();
    grid.dedup();
    if grid.is_empty() {
        return Err(CliError::new("config", "empty grid"));
    }
    Ok(grid)
}

fn parse_params(items: &[String]) -> CliResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::new("config", format!("parameter {item:?} is not key=value")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_model(s: &str) -> CliResult<MinerModel> {
    match s {
        "passive" => Ok(MinerModel::Passive),
        "active" => Ok(MinerModel::Active),
        other => Err(CliError::new(
            "config",
            format!("model must be passive or active, got {other:?}"),
        )),
    }
}

fn resolve_mechanism(spec: &MechArgs) -> CliResult<MechRef> {
    let path = Path::new(&spec.mech);
    if path.is_file() {
        return load_tabulated(path).map_err(|e| CliError::new("mech", e));
    }
    let params = parse_params(&spec.params)?;
    zoo::by_name(&spec.mech, &params).map_err(|e| CliError::new("mech", e))
}

fn emit(out: &Option<PathBuf>, value: &serde_json::Value) -> CliResult<()> {
    let text = canonical_json(value);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::new("io", e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> CliResult<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("io", format!("cannot read {what} {path:?}: {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::new("config", format!("cannot parse {what} {path:?}: {e}")))
}

fn run(cli: Cli) -> CliResult<ExitCode> {
    let workers = cli
        .workers
        .or_else(|| {
            std::env::var("TFM_WORKERS")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or_else(num_threads);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .ok();

    match cli.command {
        Command::Zoo {
            name,
            params,
            bids,
            out,
        } => {
            let params = parse_params(&params)?;
            let mech = zoo::by_name(&name, &params).map_err(|e| CliError::new("mech", e))?;
            let bids = BidVector::new(parse_money_list(&bids, "bids")?);
            let outcome = mech
                .evaluate(&bids)
                .map_err(|e| CliError::new("mech", e))?;
            emit(
                &out,
                &json!({
                    "mechanism": mech.name(),
                    "params": mech.params(),
                    "bids": bids.bids(),
                    "outcome": outcome,
                }),
            )?;
        }
        Command::CheckAxioms { mech, grid, n, out } => {
            let grid = parse_grid(&grid)?;
            let m = resolve_mechanism(&mech)?;
            let reports =
                axioms::check_all(m.as_ref(), &grid, n).map_err(|e| CliError::new("mech", e))?;
            emit(
                &out,
                &json!({
                    "mechanism": m.name(),
                    "grid": grid,
                    "n": n,
                    "scope": "grid certificate only",
                    "reports": reports,
                }),
            )?;
        }
        Command::FindSc {
            mech,
            grid,
            n,
            c,
            model,
            fake_limit,
            max_candidates,
            out,
        } => {
            let grid = parse_grid(&grid)?;
            let m = resolve_mechanism(&mech)?;
            let model = parse_model(&model)?;
            let limits = SearchLimits {
                fake_limit,
                max_candidates,
                min_coalition: 0,
            };
            let outcome = find_c_sc(m.as_ref(), &grid, n, c, model, &limits)
                .map_err(|e| CliError::new("search", e))?;
            let (status, witness) = match &outcome {
                SearchOutcome::Found(w) => ("refuted", Some(WitnessFile::from_witness(w))),
                SearchOutcome::NoneFound => ("holds", None),
                SearchOutcome::Truncated(_) => ("truncated", None),
            };
            emit(
                &out,
                &json!({
                    "mechanism": m.name(),
                    "grid": grid,
                    "n": n,
                    "c": c,
                    "model": model.to_string(),
                    "status": status,
                    "scope": "grid certificate only: a holds verdict covers exactly the checked grid",
                    "witness": witness,
                    "truncated": match &outcome {
                        SearchOutcome::Truncated(why) => Some(why.clone()),
                        _ => None,
                    },
                }),
            )?;
        }
        Command::Reduce {
            mech,
            witness,
            mode,
            max_iters,
            out,
        } => {
            let m = resolve_mechanism(&mech)?;
            let file: WitnessFile = read_json(&witness, "witness")?;
            let w = file
                .into_witness(m.as_ref())
                .map_err(|e| CliError::new("config", e))?;
            let mode = match mode.as_str() {
                "grid" => LocalizeMode::Grid,
                "bisect" => LocalizeMode::Bisect { max_iters },
                other => {
                    return Err(CliError::new(
                        "config",
                        format!("mode must be grid or bisect, got {other:?}"),
                    ))
                }
            };
            let trace =
                reduce_to_2sc(m.as_ref(), &w, mode).map_err(|e| CliError::new("reduce", e))?;
            emit(&out, &serde_json::to_value(&trace).unwrap())?;
        }
        Command::Scpdp {
            circuits,
            model,
            out,
        } => {
            let file: CircuitAuctionFile = read_json(&circuits, "circuit auction")?;
            let auction: CircuitAuction = file.into();
            let model = parse_model(&model)?;
            let decision =
                decide_2scpdp(&auction, model).map_err(|e| CliError::new("circuit", e))?;
            let (answer, witness) = match &decision {
                ScpdpDecision::Yes => ("yes", None),
                ScpdpDecision::No(w) => ("no", Some(WitnessFile::from_witness(w))),
            };
            emit(
                &out,
                &json!({
                    "model": model.to_string(),
                    "answer": answer,
                    "witness": witness,
                }),
            )?;
        }
        Command::TautReduce { circuit, out } => {
            let c: BoolCircuit = read_json(&circuit, "circuit")?;
            let auction = tautology_to_scpdp(&c).map_err(|e| CliError::new("circuit", e))?;
            let file: CircuitAuctionFile = auction.into();
            emit(&out, &serde_json::to_value(&file).unwrap())?;
        }
        Command::Suite { out } => {
            let report = run_suite();
            for c in &report.criteria {
                println!("{}", c.line());
            }
            println!(
                "suite: {}",
                if report.pass { "PASS" } else { "FAIL" }
            );
            if let Some(path) = &out {
                std::fs::write(path, canonical_json(&report))
                    .map_err(|e| CliError::new("io", e))?;
                let csv = to_csv(
                    &["id", "name", "pass", "elapsed_ms", "detail"],
                    &report
                        .criteria
                        .iter()
                        .map(|c| {
                            vec![
                                c.id.to_string(),
                                c.name.clone(),
                                c.pass.to_string(),
                                c.elapsed_ms.to_string(),
                                c.detail.clone(),
                            ]
                        })
                        .collect::<Vec<_>>(),
                );
                std::fs::write(path.with_extension("csv"), csv)
                    .map_err(|e| CliError::new("io", e))?;
            }
            if !report.pass {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn num_threads() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!(
                "{}",
                json!({ "error": e.code, "message": e.message })
            );
            ExitCode::FAILURE
        }
    }
}
