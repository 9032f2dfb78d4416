use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use icdmt::experiment::{compare_dimensions, outage_curve, sweep, Comparison, SimResult};
use icdmt::io::{out_dir, read_json, save_run, write_json, write_text, LatticeJson};
use icdmt::presets::{preset, resolve, Mode, SimulateConfig};
use icdmt::runner::Runner;
use icdmt::tables::{bound_table, dmt_table, parse_grid, scheme_json, scheme_text};
use icdmt::verify::{all_pairs, ineq29, lemma1, lemma3, lp_oracle, Lemma3Options, LpOracleOptions, SuiteReport};
use icdmt::{Error, Result};
use icdmt_core::config::DimensionSplit;
use icdmt_core::lattice::{carve, cubic_lattice};
use icdmt_core::rng::{stream_rng, Stream};
use icdmt_core::sim::candidate_lattice;
use icdmt_core::{parse_rational, SystemConfig};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "icdmt",
    version,
    about = "DMT bounds, transmission schemes and lattice-decoding simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate d*_K(r), the optimal DMT and the scheme's achievable DMT.
    Dmt(DmtArgs),
    /// Show the transmission pattern of segment L.
    Scheme(SchemeArgs),
    /// Run verification suites (all of them when none is selected).
    Verify(VerifyArgs),
    /// Monte Carlo error-probability, outage or comparison runs.
    Simulate(Box<SimulateArgs>),
    /// Tabulate the sphere-packing lower bound.
    Bound(BoundArgs),
    /// Find a lattice translate with many points in a ball.
    Carve(CarveArgs),
}

#[derive(Args)]
struct DmtArgs {
    m: usize,
    n: usize,
    /// Dimensions per channel use, e.g. `4/3` or `2.5`.
    #[arg(long, conflicts_with = "all_segments")]
    k: Option<String>,
    /// One block of rows per K_l (the default).
    #[arg(long)]
    all_segments: bool,
    /// Spacing of the r grid, decimal or `p/q`.
    #[arg(long, default_value = "0.05")]
    r_grid: String,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SchemeArgs {
    m: usize,
    n: usize,
    l: usize,
    #[arg(long, conflicts_with = "json")]
    print: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    lemma1: bool,
    #[arg(long)]
    ineq29: bool,
    #[arg(long)]
    lemma3: bool,
    #[arg(long)]
    lp_oracle: bool,
    /// Largest M and N to check (defaults: 6 for the combinatorial suites,
    /// 4 for the others).
    #[arg(long)]
    max_antennas: Option<usize>,
    /// Random exponent matrices per (M, N).
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Plant a negative exponent to check that failures are reported.
    #[arg(long)]
    inject_negative_xi: bool,
    /// Also write the reports as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Sweep,
    Compare,
    Outage,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON configuration file (see docs/config.md).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Scheme segment.
    #[arg(long, conflicts_with = "full_dimension")]
    l: Option<usize>,
    /// Transmit all M dimensions every channel use.
    #[arg(long)]
    full_dimension: bool,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated SNR grid in dB, or lo:hi:step.
    #[arg(long)]
    rho_db: Option<String>,
    /// Minimum trials per point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    /// Best of K random lattices instead of the cubic one.
    #[arg(long, conflicts_with = "cubic")]
    best_of: Option<usize>,
    #[arg(long)]
    cubic: bool,
    #[arg(long)]
    pilot_trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0: one per core). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory (default: $ICDMT_OUT_DIR, else `results`).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct BoundArgs {
    /// Complex dimension KT.
    #[arg(long)]
    n: usize,
    /// lo:hi:step
    #[arg(long, default_value = "0.5:10:0.5")]
    mu_grid: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CarveArgs {
    /// Real dimension.
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Unit-covolume random lattice instead of the integer lattice.
    #[arg(long)]
    random: bool,
    #[arg(long, default_value_t = 50)]
    max_tries: usize,
    /// Include the carved points in the output.
    #[arg(long)]
    points: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Ok,
    Failed,
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_dmt(a: DmtArgs) -> Result<Outcome> {
    let cfg = SystemConfig::new(a.m, a.n)?;
    let split =
        a.k.as_deref()
            .map(|k| DimensionSplit::new(parse_rational(k)?))
            .transpose()?;
    emit(
        &dmt_table(&cfg, split.as_ref(), parse_rational(&a.r_grid)?)?,
        a.out.as_deref(),
    )?;
    Ok(Outcome::Ok)
}

fn cmd_scheme(a: SchemeArgs) -> Result<Outcome> {
    let cfg = SystemConfig::new(a.m, a.n)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&scheme_json(&cfg, a.l)?)?);
    } else {
        print!("{}", scheme_text(&cfg, a.l)?);
    }
    Ok(Outcome::Ok)
}

fn cmd_verify(a: VerifyArgs) -> Result<Outcome> {
    let all = !(a.lemma1 || a.ineq29 || a.lemma3 || a.lp_oracle);
    let max = |default: usize| a.max_antennas.unwrap_or(default);
    let mut reports: Vec<SuiteReport> = Vec::new();
    if all || a.lemma1 {
        reports.push(lemma1(max(6))?);
    }
    if all || a.ineq29 {
        reports.push(ineq29(max(6))?);
    }
    if all || a.lemma3 {
        let opts = Lemma3Options {
            samples: a.samples,
            seed: a.seed,
            inject_negative: a.inject_negative_xi,
        };
        reports.push(lemma3(&all_pairs(max(4)), opts)?);
    }
    if all || a.lp_oracle {
        reports.push(lp_oracle(max(4), LpOracleOptions::default())?);
    }
    for r in &reports {
        let verdict = if r.passed() { "PASS" } else { "FAIL" };
        print!("{verdict} {}: {} checked, {} failed", r.name, r.checked, r.failures);
        if let (Some(dev), Some(tol)) = (r.max_deviation, r.tolerance) {
            print!(", max deviation {dev:.4} (tolerance {tol})");
        }
        println!();
        for c in &r.counterexamples {
            println!("  {c}");
        }
    }
    if let Some(path) = &a.json {
        write_json(path, &reports)?;
    }
    Ok(if reports.iter().all(SuiteReport::passed) {
        Outcome::Ok
    } else {
        Outcome::Failed
    })
}

fn parse_db_list(s: &str) -> Result<Vec<f64>> {
    if s.contains(':') {
        return parse_grid(s);
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad SNR value {v:?}")))
        })
        .collect()
}

/// Command-line overrides as a JSON layer.
fn flag_layer(a: &SimulateArgs) -> Result<Value> {
    let mut layer = json!({});
    let mut exp = serde_json::Map::new();
    if let Some(mode) = a.mode {
        let mode = match mode {
            ModeArg::Sweep => Mode::Sweep,
            ModeArg::Compare => Mode::Compare,
            ModeArg::Outage => Mode::Outage,
        };
        layer["mode"] = serde_json::to_value(mode)?;
    }
    if let Some(name) = &a.name {
        exp.insert("name".into(), json!(name));
    }
    let mut system = serde_json::Map::new();
    if let Some(m) = a.m {
        system.insert("m".into(), json!(m));
    }
    if let Some(n) = a.n {
        system.insert("n".into(), json!(n));
    }
    if !system.is_empty() {
        exp.insert("system".into(), Value::Object(system));
    }
    if let Some(l) = a.l {
        exp.insert("scenario".into(), json!({"kind": "scheme", "l": l}));
    }
    if a.full_dimension {
        exp.insert("scenario".into(), json!({"kind": "full-dimension"}));
    }
    if let Some(r) = a.r {
        exp.insert("r".into(), json!(r));
    }
    if let Some(db) = &a.rho_db {
        exp.insert("rho_db".into(), json!(parse_db_list(db)?));
    }
    let mut budget = serde_json::Map::new();
    if let Some(t) = a.trials {
        budget.insert("min_trials".into(), json!(t));
    }
    if let Some(e) = a.min_errors {
        budget.insert("min_errors".into(), json!(e));
    }
    if let Some(t) = a.max_trials {
        budget.insert("max_trials".into(), json!(t));
    }
    if !budget.is_empty() {
        exp.insert("budget".into(), Value::Object(budget));
    }
    if let Some(k) = a.best_of {
        exp.insert("lattice".into(), json!({"kind": "random-best-of", "k": k}));
    }
    if a.cubic {
        exp.insert("lattice".into(), json!({"kind": "cubic"}));
    }
    if let Some(p) = a.pilot_trials {
        exp.insert("pilot_trials".into(), json!(p));
    }
    if let Some(s) = a.seed {
        exp.insert("seed".into(), json!(s));
    }
    layer["experiment"] = Value::Object(exp);
    Ok(layer)
}

/// Resolves the layered configuration. A lone `--trials` also raises
/// `max_trials` to at least that value.
fn resolve_simulate(a: &SimulateArgs) -> Result<SimulateConfig> {
    let mut layers = Vec::new();
    if let Some(name) = &a.preset {
        layers.push(serde_json::to_value(preset(name)?)?);
    }
    if let Some(path) = &a.config {
        layers.push(read_json::<Value>(path)?);
    }
    layers.push(flag_layer(a)?);
    let mut cfg = resolve(layers)?;
    if let (Some(t), None) = (a.trials, a.max_trials) {
        cfg.experiment.budget.max_trials = cfg.experiment.budget.max_trials.max(t);
    }
    cfg.experiment.validate()?;
    Ok(cfg)
}

fn report_result(dir: &Path, r: &SimResult) -> Result<()> {
    let e = &r.experiment;
    let (csv, json) = save_run(dir, &e.name, e.seed, &r.points, r)?;
    let fmt = |s: Option<icdmt_core::sim::SlopeFit>| match s {
        Some(f) => format!(
            "{:.3} ± {:.3} over {}-{} dB ({} points)",
            f.slope, f.stderr, f.window_db.0, f.window_db.1, f.used
        ),
        None => "undefined (fewer than 2 points above the error floor)".to_owned(),
    };
    println!("{} (K={}, T={}, cap {:.3}):", e.name, r.k, r.t, r.diversity_cap);
    println!("  error slope:  {}", fmt(r.slope));
    println!("  outage slope: {}", fmt(r.outage_slope));
    println!("  wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn report_comparison(dir: &Path, cfg: &SimulateConfig, c: &Comparison) -> Result<()> {
    for branch in c.branches() {
        report_result(dir, branch)?;
    }
    let summary = json!({
        "config": cfg,
        "coincide": c.coincide,
        "gap": c.gap,
        "slopes": c.branches().map(|b| json!({"name": b.experiment.name, "slope": b.slope})).collect::<Vec<_>>(),
    });
    let path = dir.join(format!("{}.{}.json", cfg.experiment.name, cfg.experiment.seed));
    write_json(&path, &summary)?;
    match c.gap {
        Some(gap) => {
            println!("ordering margin (reduced minus best full-dimension slope): {gap:.3}")
        }
        None => println!("ordering margin undefined: a slope could not be fitted"),
    }
    println!("  wrote {}", path.display());
    Ok(())
}

fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome> {
    let cfg = resolve_simulate(a)?;
    let runner = Runner::new(a.threads)?.verbose(!a.quiet);
    let dir = out_dir(a.out_dir.as_deref());
    match cfg.mode {
        Mode::Sweep => report_result(&dir, &sweep(&runner, &cfg.experiment)?)?,
        Mode::Outage => report_result(&dir, &outage_curve(&runner, &cfg.experiment)?)?,
        Mode::Compare => report_comparison(&dir, &cfg, &compare_dimensions(&runner, &cfg.experiment)?)?,
    }
    Ok(Outcome::Ok)
}

fn cmd_bound(a: BoundArgs) -> Result<Outcome> {
    let mus = parse_grid(&a.mu_grid)?;
    emit(&bound_table(a.n, &mus)?, a.out.as_deref())?;
    Ok(Outcome::Ok)
}

fn cmd_carve(a: CarveArgs) -> Result<Outcome> {
    let lattice = if a.random {
        candidate_lattice(a.seed, a.dim, 0)?
    } else {
        cubic_lattice(a.dim)?
    };
    let result = carve(
        &lattice,
        a.radius,
        &mut stream_rng(a.seed, Stream::Carve, 0, 0),
        a.max_tries,
    )?;
    let mut out = json!({
        "lattice": LatticeJson::from(&lattice),
        "radius": a.radius,
        "translate": result.translate,
        "count": result.count,
        "target": result.target,
        "tries": result.tries,
        "unmet": result.unmet,
    });
    if a.points {
        out["points"] = json!(result.points);
    }
    emit(&(serde_json::to_string_pretty(&out)? + "\n"), a.out.as_deref())?;
    Ok(if result.unmet { Outcome::Failed } else { Outcome::Ok })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Dmt(a) => cmd_dmt(a),
        Command::Scheme(a) => cmd_scheme(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Bound(a) => cmd_bound(a),
        Command::Carve(a) => cmd_carve(a),
    };
    match outcome {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
