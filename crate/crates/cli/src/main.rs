//! `sandglass`: command-line front end for the pair-analysis toolkit.
//!
//! Exit codes: 0 on success, 1 when a predicate or certification check
//! comes out negative (the payload is still printed), 2 on usage errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use sandglass_core::bounds::{self, consts, BoundParams};
use sandglass_core::certify::{self, GridFunction, GridSpec};
use sandglass_core::f2code;
use sandglass_core::search::{self, PairKind, SearchResult};
use sandglass_core::setfam::{pair_to_json, parse_pair, serialize_pair, PairOfFamilies, Side};
use serde_json::{json, Map, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sandglass",
    version,
    about = "Recovering/cancellative pair toolkit"
)]
struct Cli {
    /// Output format; csv applies to `bounds --table` only
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for the parallel kernels (default: all cores)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Seed for randomized subcommands
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file whose keys mirror the long flags; explicit flags win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Recovering,
    Cancellative,
    #[value(name = "left-cancellative")]
    LeftCancellative,
}

impl From<KindArg> for PairKind {
    fn from(k: KindArg) -> PairKind {
        match k {
            KindArg::Recovering => PairKind::Recovering,
            KindArg::Cancellative => PairKind::Cancellative,
            KindArg::LeftCancellative => PairKind::LeftCancellative,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a pair file against a pair predicate
    Verify(VerifyArgs),
    /// Evaluate bound functions, rates and per-pair conditions
    Bounds(BoundsArgs),
    /// Certified grid upper bounds and Lipschitz estimation
    Certify(CertifyArgs),
    /// Random linear-code construction of left-cancellative pairs
    Tolhuizen(TolhuizenArgs),
    /// Exact maximum-product search at small n
    Search(SearchArgs),
    /// Dump the named numeric constants
    Constants,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    kind: Option<KindArg>,
    /// Pair file (text or JSON form)
    #[arg(long)]
    pair: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Compute the rate max{2.2499, theta^alpha mu_can^(1-alpha)} and its side conditions
    #[arg(long, conflicts_with_all = ["eval", "table", "check_filtered", "rhs"])]
    rate: bool,
    /// Evaluate one function at a point: h, h-star, f, f-star, g, g-star, entropy
    #[arg(long)]
    eval: Option<String>,
    /// Emit a value table over the unit square: g or g-star
    #[arg(long, conflicts_with_all = ["eval", "check_filtered", "rhs"])]
    table: Option<String>,
    /// Check the filtered-ratio condition of a pair file at --theta
    #[arg(long, conflicts_with_all = ["eval", "rhs"])]
    check_filtered: bool,
    /// Compare log2 family sizes of a pair file against the density sums
    #[arg(long)]
    rhs: bool,
    #[arg(long)]
    pair: Option<PathBuf>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    mu_can: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    y: Option<f64>,
    /// Comma-separated probabilities for --eval entropy
    #[arg(long)]
    p: Option<String>,
    /// Subdivisions per axis for --table
    #[arg(long)]
    steps: Option<u32>,
    /// Use the symmetric (two-sided) sum for --rhs
    #[arg(long)]
    symmetric: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    func: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    lipschitz: Option<f64>,
    /// Threshold given as log2 of this value
    #[arg(long, conflicts_with = "threshold")]
    threshold_log2: Option<f64>,
    /// Threshold given directly
    #[arg(long)]
    threshold: Option<f64>,
    /// Estimate the Lipschitz constant by finite differences instead of certifying
    #[arg(long)]
    estimate_lipschitz: bool,
    #[arg(long)]
    samples: Option<u64>,
    /// Report evaluation progress on stderr
    #[arg(long)]
    progress: bool,
}

#[derive(Args)]
struct TolhuizenArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    trials: Option<u64>,
    /// Write the best pair to this file in the pair format
    #[arg(long)]
    emit_pair: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    kind: Option<KindArg>,
    /// Node budget; forces the branch-and-bound engine
    #[arg(long)]
    budget: Option<u64>,
    /// Restrict both families to k-element members
    #[arg(long)]
    uniform: Option<u32>,
    /// Write the witness to this file in the pair format
    #[arg(long)]
    emit_witness: Option<PathBuf>,
}

/// Failure modes that map to exit code 2.
struct Usage(String);

impl<T: std::fmt::Display> From<T> for Usage {
    fn from(e: T) -> Self {
        Usage(e.to_string())
    }
}

/// Config-file values keyed by normalized flag name.
struct Config(Map<String, Value>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self, Usage> {
        let Some(path) = path else {
            return Ok(Config(Map::new()));
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        match value {
            Value::Object(map) => Ok(Config(map)),
            _ => Err(Usage(format!(
                "config {} must be a JSON object",
                path.display()
            ))),
        }
    }

    fn get(&self, key: &str) -> Option<&Value> {
        self.0
            .get(key)
            .or_else(|| self.0.get(&key.replace('_', "-")))
            .or_else(|| self.0.get(&key.replace('-', "_")))
    }

    fn f64(&self, key: &str) -> Option<f64> {
        self.get(key).and_then(Value::as_f64)
    }

    fn u64(&self, key: &str) -> Option<u64> {
        self.get(key).and_then(Value::as_u64)
    }

    fn u32(&self, key: &str) -> Option<u32> {
        self.u64(key).map(|v| v as u32)
    }

    fn string(&self, key: &str) -> Option<String> {
        self.get(key).and_then(Value::as_str).map(str::to_string)
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, Usage> {
    value.ok_or_else(|| Usage(format!("missing required flag --{flag}")))
}

fn read_pair(path: &Path) -> Result<PairOfFamilies, Usage> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Usage(format!("cannot read pair file {}: {e}", path.display())))?;
    parse_pair(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

/// Prints the payload in the requested format. Returns the chosen exit code.
fn emit(format: Format, payload: &Value, failed_check: bool) -> Result<u8, Usage> {
    match format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(payload).expect("valid json")
        ),
        Format::Text => match payload {
            Value::Object(map) => {
                for (key, value) in map {
                    println!("{key}: {value}");
                }
            }
            other => println!("{other}"),
        },
        Format::Csv => {
            return Err(Usage(
                "csv output is only available for `bounds --table`".into(),
            ))
        }
    }
    Ok(if failed_check { 1 } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Usage> {
    let config = Config::load(cli.config.as_deref())?;
    if let Some(workers) = cli.workers.or(config.u64("workers").map(|w| w as usize)) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| Usage(format!("cannot configure {workers} workers: {e}")))?;
    }
    let seed = cli.seed.or(config.u64("seed")).unwrap_or(0);
    match cli.cmd {
        Cmd::Verify(args) => cmd_verify(args, cli.format, &config),
        Cmd::Bounds(args) => cmd_bounds(args, cli.format, &config),
        Cmd::Certify(args) => cmd_certify(args, cli.format, &config, seed),
        Cmd::Tolhuizen(args) => cmd_tolhuizen(args, cli.format, &config, seed),
        Cmd::Search(args) => cmd_search(args, cli.format, &config),
        Cmd::Constants => cmd_constants(cli.format),
    }
}

fn kind_from_config(config: &Config, key: &str) -> Result<Option<KindArg>, Usage> {
    match config.string(key) {
        None => Ok(None),
        Some(name) => KindArg::from_str(&name, true)
            .map(Some)
            .map_err(|_| Usage(format!("config {key} = {name} is not a pair kind"))),
    }
}

fn cmd_verify(args: VerifyArgs, format: Format, config: &Config) -> Result<u8, Usage> {
    let kind: PairKind = require(args.kind.or(kind_from_config(config, "kind")?), "kind")?.into();
    let path = require(
        args.pair.or(config.string("pair").map(PathBuf::from)),
        "pair",
    )?;
    let pair = read_pair(&path)?;
    let holds = kind.holds(&pair);
    let payload = json!({
        kind.name(): holds,
        "n": pair.ground_size(),
        "a_size": pair.a().len(),
        "b_size": pair.b().len(),
        "product": pair.product_size() as u64,
    });
    emit(format, &payload, !holds)
}

fn parse_eval_func(name: &str) -> Result<&'static str, Usage> {
    match name {
        "h" => Ok("h"),
        "h-star" | "h_star" => Ok("h_star"),
        "f" => Ok("f"),
        "f-star" | "f_star" => Ok("f_star"),
        "g" => Ok("g"),
        "g-star" | "g_star" => Ok("g_star"),
        "entropy" => Ok("entropy"),
        other => Err(Usage(format!(
            "unknown --eval function `{other}` (h, h-star, f, f-star, g, g-star, entropy)"
        ))),
    }
}

fn cmd_bounds(args: BoundsArgs, format: Format, config: &Config) -> Result<u8, Usage> {
    let theta = args.theta.or(config.f64("theta"));
    let pair_path = args.pair.or(config.string("pair").map(PathBuf::from));

    if args.rate {
        let theta = theta.unwrap_or(consts::THETA);
        let alpha = args.alpha.or(config.f64("alpha")).unwrap_or(consts::ALPHA);
        let mu_can = require(args.mu_can.or(config.f64("mu-can")), "mu-can")?;
        let params = BoundParams::new(theta, alpha, mu_can)?;
        let rate = bounds::theorem_rate(&params);
        let conditions = bounds::recursion_conditions(&params);
        let payload = json!({
            "theta": theta,
            "alpha": alpha,
            "mu_can": mu_can,
            "rate": rate,
            "conditions": serde_json::to_value(conditions).expect("serializable"),
        });
        return emit(format, &payload, false);
    }

    if let Some(table) = args.table {
        let theta = theta.unwrap_or(consts::THETA);
        let steps = args.steps.or(config.u32("steps")).unwrap_or(100);
        if steps == 0 {
            return Err(Usage("--steps must be >= 1".into()));
        }
        let starred = match table.as_str() {
            "g" => false,
            "g-star" | "g_star" => true,
            other => return Err(Usage(format!("unknown --table function `{other}`"))),
        };
        let mut rows = Vec::new();
        for i in 0..=steps {
            for j in 0..=steps {
                let x = i as f64 / steps as f64;
                let y = j as f64 / steps as f64;
                let value = bounds::g_value(x, y, theta, starred)?;
                rows.push((x, y, value));
            }
        }
        match format {
            Format::Csv => {
                println!("x,y,value");
                for (x, y, value) in rows {
                    println!("{x},{y},{value}");
                }
            }
            Format::Json => {
                let values: Vec<Value> = rows
                    .iter()
                    .map(|&(x, y, v)| json!({"x": x, "y": y, "value": v}))
                    .collect();
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({
                        "func": if starred { "g-star" } else { "g" },
                        "theta": theta,
                        "steps": steps,
                        "rows": values,
                    }))
                    .expect("valid json")
                );
            }
            Format::Text => {
                for (x, y, value) in rows {
                    println!("{x}\t{y}\t{value}");
                }
            }
        }
        return Ok(0);
    }

    if args.check_filtered {
        let path = require(pair_path, "pair")?;
        let theta = theta.unwrap_or(consts::THETA);
        let pair = read_pair(&path)?;
        let report = bounds::filtered_condition_check(&pair, theta)?;
        let holds = report.holds;
        let payload = serde_json::to_value(report).expect("serializable");
        return emit(format, &payload, !holds);
    }

    if args.rhs {
        let path = require(pair_path, "pair")?;
        let theta = theta.unwrap_or(consts::THETA);
        let pair = read_pair(&path)?;
        let rhs = bounds::rhs_bound(&pair, theta, args.symmetric)?;
        let lhs = if args.symmetric {
            (pair.product_size() as f64).log2()
        } else {
            (pair.a().len() as f64).log2()
        };
        let holds = lhs <= rhs + 1e-9;
        let payload = json!({
            "theta": theta,
            "symmetric": args.symmetric,
            "rhs": rhs,
            "lhs_log2": lhs,
            "holds": holds,
        });
        return emit(format, &payload, !holds);
    }

    if let Some(func) = args.eval.or(config.string("eval")) {
        let func = parse_eval_func(&func)?;
        let value = match func {
            "entropy" => {
                let list = require(args.p.or(config.string("p")), "p")?;
                let probs: Result<Vec<f64>, _> =
                    list.split(',').map(|s| s.trim().parse::<f64>()).collect();
                let probs = probs.map_err(|e| Usage(format!("bad --p list: {e}")))?;
                bounds::entropy_of(&probs)?
            }
            _ => {
                let x = require(args.x.or(config.f64("x")), "x")?;
                match func {
                    "h" => bounds::binary_entropy(x, false)?,
                    "h_star" => bounds::binary_entropy(x, true)?,
                    _ => {
                        let y = require(args.y.or(config.f64("y")), "y")?;
                        let theta = theta.unwrap_or(consts::THETA);
                        match func {
                            "f" => bounds::f_value(x, y, theta, false)?,
                            "f_star" => bounds::f_value(x, y, theta, true)?,
                            "g" => bounds::g_value(x, y, theta, false)?,
                            "g_star" => bounds::g_value(x, y, theta, true)?,
                            _ => unreachable!(),
                        }
                    }
                }
            }
        };
        return emit(format, &json!({ "func": func, "value": value }), false);
    }

    Err(Usage(
        "bounds requires one of --rate, --eval, --table, --check-filtered, --rhs".into(),
    ))
}

fn cmd_certify(args: CertifyArgs, format: Format, config: &Config, seed: u64) -> Result<u8, Usage> {
    let func_name = args
        .func
        .or(config.string("func"))
        .unwrap_or_else(|| "g_star".into());
    let theta = args.theta.or(config.f64("theta")).unwrap_or(consts::THETA);
    let func = GridFunction::from_name(&func_name, &[theta])?;

    if args.estimate_lipschitz {
        let samples = args.samples.or(config.u64("samples")).unwrap_or(1_000_000);
        let observed = certify::empirical_lipschitz(&func, samples, seed);
        let payload = json!({
            "func": func.name(),
            "params": func.params(),
            "samples": samples,
            "seed": seed,
            "delta": 1e-5,
            "observed": observed,
        });
        return emit(format, &payload, false);
    }

    let k = require(args.k.or(config.u32("k")), "k")?;
    let lipschitz = require(args.lipschitz.or(config.f64("lipschitz")), "lipschitz")?;
    let threshold = match (
        args.threshold_log2.or(config.f64("threshold-log2")),
        args.threshold.or(config.f64("threshold")),
    ) {
        (Some(t), None) => t.log2(),
        (None, Some(t)) => t,
        (None, None) => return Err(Usage("missing --threshold-log2 or --threshold".into())),
        (Some(_), Some(_)) => {
            return Err(Usage(
                "--threshold-log2 and --threshold are mutually exclusive".into(),
            ))
        }
    };
    let spec = GridSpec::new(func, k, lipschitz, threshold)?;
    let progress = |done: u64| {
        eprintln!("certify: {done} evaluations");
    };
    let cert = certify::grid_certify_with_progress(
        &spec,
        if args.progress { Some(&progress) } else { None },
    )?;
    let pass = cert.pass;
    let payload = serde_json::to_value(&cert).expect("serializable");
    emit(format, &payload, !pass)
}

fn cmd_tolhuizen(
    args: TolhuizenArgs,
    format: Format,
    config: &Config,
    seed: u64,
) -> Result<u8, Usage> {
    let n = require(args.n.or(config.u32("n")), "n")?;
    let k = require(args.k.or(config.u32("k")), "k")?;
    let trials = args.trials.or(config.u64("trials")).unwrap_or(200);
    let best = f2code::best_construction(n, k, trials, seed)?;
    if let Some(path) = args.emit_pair {
        std::fs::write(&path, serialize_pair(&best.pair))
            .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let left_cancellative = best.pair.is_cancellative(Side::Left);
    let mut payload = serde_json::to_value(&best.report).expect("serializable");
    payload["left_cancellative"] = json!(left_cancellative);
    emit(format, &payload, !left_cancellative)
}

fn cmd_search(args: SearchArgs, format: Format, config: &Config) -> Result<u8, Usage> {
    let n = require(args.n.or(config.u32("n")), "n")?;
    let kind: PairKind = require(args.kind.or(kind_from_config(config, "kind")?), "kind")?.into();
    let budget = args.budget.or(config.u64("budget"));
    let uniform = args.uniform.or(config.u32("uniform"));
    let result: SearchResult =
        if budget.is_none() && uniform.is_none() && n <= search::EXHAUSTIVE_MAX_N {
            search::exhaustive_max_product(n, kind)?
        } else {
            search::bnb_max_product(n, kind, budget.unwrap_or(10_000_000), uniform)?
        };
    if let Some(path) = args.emit_witness {
        std::fs::write(&path, serialize_pair(&result.witness))
            .map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let payload = json!({
        "n": result.n,
        "kind": kind.name(),
        "best_product": result.best_product,
        "exhaustive": result.exhaustive,
        "nodes_explored": result.nodes_explored,
        "verified": search::verify_witness(&result),
        "witness": pair_to_json(&result.witness),
    });
    emit(format, &payload, false)
}

fn cmd_constants(format: Format) -> Result<u8, Usage> {
    let payload = json!({
        "theta": consts::THETA,
        "alpha": consts::ALPHA,
        "rate_floor": consts::RATE_FLOOR,
        "recovering_rate": consts::RECOVERING_RATE,
        "mu_can_lower": consts::MU_CAN_LOWER,
        "mu_can_upper": consts::MU_CAN_UPPER,
        "mu_rec_upper": consts::MU_REC_UPPER,
        "invertible_fraction_limit": f2code::invertible_fraction_limit(),
    });
    emit(format, &payload, false)
}
