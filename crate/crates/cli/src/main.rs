//! `pennies`: every capability of the workspace as a subcommand.
//!
//! Data commands write their artifacts and a `manifest.json` into the
//! output directory (`--out` or `PENNIES_OUT_DIR`) and print a JSON
//! summary. Without a directory the main artifact goes to stdout and the
//! summary with its manifest to stderr.
//!
//! Exit codes: 0 success, 1 failed check (golden mismatch, digest
//! mismatch), 2 usage or invalid input.

mod manifest;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use manifest::{digest, Artifact, RunManifest};
use pennies_core::certified::{self, LatticeValue, Rounding};
use pennies_core::dynamics::{dabmn_evolve, local_maxima, TerminalCondition, TerminalPreset};
use pennies_core::engine::{simulate_batch, simulate_series, GameConfig, GameRecord, Player, Strategy, Terminal, Trail};
use pennies_core::margin::{big_theta, curve, find_level_set, MapSelector};
use pennies_core::solution::{default_solution, finite_standard_solution, standard_solution, Quadruple};
use pennies_core::{BoundaryData, Window};

#[derive(Parser, Debug)]
#[command(name = "pennies", version, about = "Equilibria, margin maps, certificates and simulation")]
struct Cli {
    /// Output directory for artifacts and the run manifest.
    #[arg(long, global = true, env = "PENNIES_OUT_DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Windowed default or standard solution as CSV `i,a,b,m,n,phi`.
    Solve(SolveArgs),
    /// Samples and level sets of the Mina margin maps.
    Margin(MarginArgs),
    /// Rebuilds the certified lattice tables and the bound on λ.
    Certify(CertifyArgs),
    /// Plays a batch of games and writes one CSV row per game.
    PlayBatch(PlayBatchArgs),
    /// Backward evolution of the time-dependent system.
    Dabmn(DabmnArgs),
    /// Runs the HTTP play service.
    #[serde(skip)]
    Serve(ServeArgs),
    /// Re-runs a manifest and checks the output digest.
    #[serde(skip)]
    Replay { manifest: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum FormArg {
    Default,
    Standard,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    /// Central ratio.
    #[arg(long)]
    x: f64,
    /// Open-play window `lo:hi`.
    #[arg(long, default_value = "-10:10", allow_hyphen_values = true)]
    window: String,
    #[arg(long, value_enum, default_value = "standard")]
    form: FormArg,
    /// Finite trail `lo:hi`; selects the finite-trail standard solution.
    #[arg(long, allow_hyphen_values = true)]
    trail: Option<String>,
    /// Read `--x` as a `Θ` coordinate: the central ratio is `Θ(x)`.
    #[arg(long)]
    theta: bool,
}

#[derive(Args, Debug, Serialize)]
struct MarginArgs {
    /// Finite map `ℓ,k` on the trail ⟦−ℓ, k⟧.
    #[arg(long, conflicts_with_all = ["infinite", "psi"])]
    finite: Option<String>,
    /// The infinite-trail map.
    #[arg(long)]
    infinite: bool,
    /// `ψ = M ∘ θ⁻¹` over a real range.
    #[arg(long, conflicts_with = "infinite")]
    psi: bool,
    /// Compose a finite map with `Θ`.
    #[arg(long, value_parser = ["theta"])]
    transform: Option<String>,
    /// Argument range `lo:hi`.
    #[arg(long, allow_hyphen_values = true)]
    range: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    mesh: f64,
    /// Truncation tolerance of the infinite map.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Also solve `map(x) = target`.
    #[arg(long)]
    roots: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct CertifyArgs {
    #[arg(long, value_enum, default_value = "nearest")]
    rounding: RoundingArg,
    /// Tabulated argument on the 1e−10 lattice.
    #[arg(long, default_value = "0.5800000000")]
    z: String,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RoundingArg {
    Nearest,
    Directed,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum RecordFormat {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct PlayBatchArgs {
    /// JSON file with `config`, `mina`, `maxine`, `games` and optional
    /// `series`; flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Finite trail `lo:hi`.
    #[arg(long, default_value = "-4:4", allow_hyphen_values = true)]
    trail: String,
    /// Play on ℤ with an escape window instead of a finite trail.
    #[arg(long)]
    infinite: bool,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    start: i64,
    /// Terminal receipts `m₋,m₊,n₋,n₊`.
    #[arg(long, default_value = "0,1,1,0")]
    boundary: String,
    /// `MINA:MAXINE`, e.g. `nash:bully(epsilon=0.001)`.
    #[arg(long, default_value = "nash:nash")]
    strategies: String,
    #[arg(long, default_value_t = 1000)]
    games: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_turns: u64,
    /// Play games in order, carrying tit-for-tat memory.
    #[arg(long)]
    series: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: RecordFormat,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PresetArg {
    Plateau,
    Static,
    Penny,
}

#[derive(Args, Debug, Serialize)]
struct DabmnArgs {
    #[arg(long, value_enum, default_value = "plateau")]
    preset: PresetArg,
    /// Half-width of the trail ⟦−K, K⟧.
    #[arg(long = "K", default_value_t = 8)]
    half_width: i64,
    /// Number of backward steps.
    #[arg(long = "T", default_value_t = 4200)]
    horizon: u64,
    #[arg(long, default_value_t = 140)]
    stride: u64,
    /// Share of the unit rise spread over the middle edges (plateau).
    #[arg(long, default_value_t = 1e-9)]
    delta: f64,
    /// Central ratio (static).
    #[arg(long, default_value_t = 0.58)]
    x: f64,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, env = "PENNIES_PORT", default_value_t = 8080)]
    port: u16,
    #[arg(long, env = "PENNIES_HOST", default_value = "127.0.0.1")]
    host: String,
    /// Keep one JSON file per session here.
    #[arg(long, env = "PENNIES_SESSION_DIR")]
    persist_dir: Option<PathBuf>,
    /// Browser origin allowed by CORS; any if unset.
    #[arg(long, env = "PENNIES_ALLOWED_ORIGIN")]
    allowed_origin: Option<String>,
    #[arg(long, default_value_t = pennies_service::DEFAULT_STAKE_CAP)]
    stake_cap: f64,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl std::fmt::Display) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

impl From<pennies_core::Error> for Failure {
    fn from(e: pennies_core::Error) -> Self {
        usage(e)
    }
}

/// Artifacts, a summary and an exit code.
struct Output {
    artifacts: Vec<Artifact>,
    summary: Value,
    seed: Option<u64>,
    code: u8,
}

fn artifact(name: &str, content: String) -> Artifact {
    Artifact { name: name.to_string(), content }
}

fn parse_window(text: &str) -> Result<Window, Failure> {
    text.parse::<Window>().map_err(usage)
}

fn parse_range(text: &str) -> Result<(f64, f64), Failure> {
    let (lo, hi) = text.split_once(':').ok_or_else(|| usage(format!("expected lo:hi, got {text:?}")))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| usage(format!("bad number {t:?} in {text:?}")));
    let (lo, hi) = (num(lo)?, num(hi)?);
    if !(lo < hi) {
        return Err(usage(format!("empty range {text:?}")));
    }
    Ok((lo, hi))
}

fn solution_csv(q: &Quadruple) -> Result<String, Failure> {
    let mut out = String::from("i,a,b,m,n,phi\n");
    for i in q.window.indices() {
        let phi = q.ratio_at(i).unwrap();
        out.push_str(&format!("{i},{:?},{:?},{:?},{:?},{:?}\n", q.a_at(i), q.b_at(i), q.m_at(i), q.n_at(i), phi));
    }
    Ok(out)
}

fn run_solve(args: &SolveArgs) -> Result<Output, Failure> {
    let x = if args.theta { big_theta(args.x)? } else { args.x };
    let q = match &args.trail {
        Some(t) => finite_standard_solution(x, parse_window(t)?)?,
        None => {
            let window = parse_window(&args.window)?;
            match args.form {
                FormArg::Default => default_solution(x, window)?,
                FormArg::Standard => standard_solution(x, window)?,
            }
        }
    };
    let view = q.phi_view().ok();
    let summary = json!({
        "cen_ratio": x,
        "form": q.form,
        "window": [q.window.lo, q.window.hi],
        "battlefield": view.as_ref().map(|v| v.battlefield),
        "saturated": view.map(|v| v.saturated).unwrap_or_default(),
        "residual_max": q.max_residual(),
        "mina_margin": q.mina_margin(),
        "boundary": q.boundary,
    });
    Ok(Output {
        artifacts: vec![artifact("solution.csv", solution_csv(&q)?), artifact("solution.json", summary.to_string())],
        summary,
        seed: None,
        code: 0,
    })
}

fn run_margin(args: &MarginArgs) -> Result<Output, Failure> {
    let (map, default_range) = if let Some(spec) = &args.finite {
        let (ell, k) = spec.split_once(',').ok_or_else(|| usage(format!("expected ℓ,k, got {spec:?}")))?;
        let int = |t: &str| t.trim().parse::<u32>().map_err(|_| usage(format!("bad integer {t:?}")));
        let (ell, k) = (int(ell)?, int(k)?);
        match args.transform.as_deref() {
            Some("theta") => (MapSelector::FiniteTheta { ell, k }, (-1.0, 2.0)),
            _ => (MapSelector::Finite { ell, k }, (0.5, 10.0)),
        }
    } else if args.psi {
        (MapSelector::Psi { tol: args.tol }, (0.0, 3.0))
    } else if args.infinite {
        (MapSelector::Infinite { tol: args.tol }, (1.0 / 3.0, 3.0))
    } else {
        return Err(usage("choose one of --finite ℓ,k, --infinite or --psi"));
    };
    let (lo, hi) = match &args.range {
        Some(r) => parse_range(r)?,
        None => default_range,
    };
    let samples = curve(map, lo, hi, args.mesh)?;
    let mut csv = String::from("x,value\n");
    for (x, v) in &samples {
        csv.push_str(&format!("{x:?},{v:?}\n"));
    }
    let finite: Vec<&(f64, f64)> = samples.iter().filter(|(_, v)| v.is_finite()).collect();
    let min = finite.iter().min_by(|a, b| a.1.total_cmp(&b.1));
    let max = finite.iter().max_by(|a, b| a.1.total_cmp(&b.1));
    let mut summary = json!({
        "map": map,
        "range": [lo, hi],
        "mesh": args.mesh,
        "samples": samples.len(),
        "min": min.map(|p| json!({"x": p.0, "value": p.1})),
        "max": max.map(|p| json!({"x": p.0, "value": p.1})),
    });
    let mut artifacts = vec![artifact("margin.csv", csv)];
    if let Some(target) = args.roots {
        let set = find_level_set(map, target, lo, hi, args.mesh)?;
        summary["roots"] = serde_json::to_value(&set).map_err(usage)?;
        summary["confirmed_roots"] = json!(set.confirmed());
        artifacts.push(artifact("roots.json", serde_json::to_string(&set).map_err(usage)?));
    }
    Ok(Output { artifacts, summary, seed: None, code: 0 })
}

fn run_certify(args: &CertifyArgs) -> Result<Output, Failure> {
    let z: LatticeValue = args.z.parse().map_err(usage)?;
    let rounding = match args.rounding {
        RoundingArg::Nearest => Rounding::Nearest,
        RoundingArg::Directed => Rounding::Directed,
    };
    let tables = certified::build_tables(z, rounding)?;
    let interval = certified::margin54_interval(&tables)?;
    let pqst = certified::pqst_bounds(&tables)?;
    let cert = certified::lambda_upper_certificate(&tables)?;
    let golden = if z == certified::Z058 { Some(certified::verify_golden(&tables)) } else { None };
    let mut report = tables.render();
    report.push_str(&format!(
        "\nP4 [{}, {}]\nQ5 [{}, {}]\nS4 [{}, {}]\nT5 [{}, {}]\n",
        pqst.p4.lo, pqst.p4.hi, pqst.q5.lo, pqst.q5.hi, pqst.s4.lo, pqst.s4.hi, pqst.t5.lo, pqst.t5.hi
    ));
    report.push_str(&format!("M54 [{}, {}]\n", interval.lo, interval.hi));
    report.push_str(&format!(
        "truncation bound {} ≈ {:e}\nM ≤ {} ≈ {:?} ≤ {}: {}\nλ ≤ {}: {}\n",
        cert.truncation_bound,
        cert.truncation_bound_f64,
        cert.margin_upper,
        cert.margin_upper_f64,
        cert.margin_bound,
        cert.margin_bound_holds,
        cert.lambda_bound,
        cert.lambda_bound_holds
    ));
    let mismatch = golden.clone().and_then(|g| g.err());
    let code = if mismatch.is_some() || !cert.holds() { 1 } else { 0 };
    match &golden {
        Some(Ok(())) => report.push_str("golden values: all 48 cells and the interval match\n"),
        Some(Err(m)) => report.push_str(&format!("golden mismatch at {}: expected {}, found {}\n", m.cell, m.expected, m.found)),
        None => report.push_str("golden values: not applicable for this argument\n"),
    }
    let summary = json!({
        "z": z,
        "rounding": rounding,
        "interval": interval,
        "pqst": pqst,
        "certificate": cert,
        "golden_match": golden.as_ref().map(|g| g.is_ok()),
        "first_mismatch": mismatch,
    });
    Ok(Output {
        artifacts: vec![artifact("certify.txt", report), artifact("certify.json", summary.to_string())],
        summary,
        seed: None,
        code,
    })
}

/// Contents of a `play-batch --config` file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct BatchFile {
    config: GameConfig,
    mina: Strategy,
    maxine: Strategy,
    games: usize,
    #[serde(default)]
    series: bool,
}

fn batch_from_flags(args: &PlayBatchArgs) -> Result<BatchFile, Failure> {
    let nums: Vec<f64> = args
        .boundary
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| usage(format!("bad boundary value {t:?}"))))
        .collect::<Result<_, _>>()?;
    let [m_lo, m_hi, n_lo, n_hi] = nums[..] else {
        return Err(usage("boundary needs four values m₋,m₊,n₋,n₊"));
    };
    let boundary = BoundaryData::new(m_lo, m_hi, n_lo, n_hi)?;
    let (mina, maxine) =
        args.strategies.split_once(':').ok_or_else(|| usage(format!("expected MINA:MAXINE, got {:?}", args.strategies)))?;
    let mut config = if args.infinite {
        GameConfig { trail: Trail::Infinite, ..GameConfig::finite(-1, 1, boundary, 0, args.seed)? }
    } else {
        let w = parse_window(&args.trail)?;
        GameConfig::finite(w.lo, w.hi, boundary, args.start, args.seed)?
    };
    config.start = args.start;
    config.centre = if args.infinite { args.start } else { 0 };
    config.max_turns = args.max_turns;
    config.validate()?;
    Ok(BatchFile { config, mina: mina.parse()?, maxine: maxine.parse()?, games: args.games, series: args.series })
}

fn run_play_batch(args: &PlayBatchArgs) -> Result<Output, Failure> {
    let batch = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<BatchFile>(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None => batch_from_flags(args)?,
    };
    batch.config.validate()?;
    let records: Vec<GameRecord> = if batch.series {
        simulate_series(&batch.config, &batch.mina, &batch.maxine, batch.games)?
    } else {
        let mina = batch.mina.bind(Player::Mina, &batch.config, false)?;
        let maxine = batch.maxine.bind(Player::Maxine, &batch.config, false)?;
        simulate_batch(&batch.config, &mina, &maxine, batch.games)?
    };
    let body = match args.format {
        RecordFormat::Csv => {
            let mut csv = format!("{}\n", GameRecord::CSV_HEADER);
            for (g, r) in records.iter().enumerate() {
                csv.push_str(&r.csv_row(g));
                csv.push('\n');
            }
            artifact("games.csv", csv)
        }
        RecordFormat::Json => artifact("games.json", serde_json::to_string(&records).map_err(usage)?),
    };
    let n = records.len().max(1) as f64;
    let stats = |pick: fn(&GameRecord) -> f64| {
        let mean = records.iter().map(pick).sum::<f64>() / n;
        let var = records.iter().map(|r| (pick(r) - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        json!({"mean": mean, "std_error": (var / n).sqrt()})
    };
    let count = |t: Terminal| records.iter().filter(|r| r.terminal == t).count();
    let summary = json!({
        "games": records.len(),
        "config": batch.config,
        "mina": batch.mina,
        "maxine": batch.maxine,
        "payoff_maxine": stats(|r| r.payoffs.0),
        "payoff_mina": stats(|r| r.payoffs.1),
        "mean_turns": records.iter().map(|r| r.turns() as f64).sum::<f64>() / n,
        "terminals": {
            "mina_win": count(Terminal::MinaWin),
            "maxine_win": count(Terminal::MaxineWin),
            "cutoff": count(Terminal::Cutoff),
        },
        "accounting_holds": records.iter().all(GameRecord::accounting_holds),
    });
    Ok(Output { artifacts: vec![body], summary, seed: Some(batch.config.seed), code: 0 })
}

fn run_dabmn(args: &DabmnArgs) -> Result<Output, Failure> {
    let preset = match args.preset {
        PresetArg::Plateau => TerminalPreset::Plateau { delta: args.delta },
        PresetArg::Static => TerminalPreset::Static { x: args.x },
        PresetArg::Penny => TerminalPreset::Penny,
    };
    let terminal = TerminalCondition::preset(preset, args.half_width)?;
    let sheet = dabmn_evolve(&terminal, args.horizon, args.stride)?;
    let phases = sheet.maxima_phases();
    let counts: Vec<usize> = phases.iter().map(|p| p.0).collect();
    let final_row = sheet.rows.last().unwrap();
    let first_vertex = sheet.trail.lo + 1;
    let summary = json!({
        "trail": [sheet.trail.lo, sheet.trail.hi],
        "horizon": sheet.horizon,
        "stride": sheet.stride,
        "strided_rows": sheet.rows.len() - 1,
        "maxima_phases": phases.iter().map(|(c, a, b)| json!({"maxima": c, "first_step": a, "last_step": b})).collect::<Vec<_>>(),
        "collapse_2_to_1": counts.windows(2).any(|w| w == [2, 1]) && counts.last() == Some(&1),
        "final_a_maxima": local_maxima(&final_row.a).into_iter().map(|j| first_vertex + j as i64).collect::<Vec<_>>(),
        "final_change": sheet.convergence.last(),
    });
    Ok(Output { artifacts: vec![artifact("dabmn.csv", sheet.to_csv())], summary, seed: None, code: 0 })
}

fn execute(command: &Command) -> Result<Output, Failure> {
    match command {
        Command::Solve(a) => run_solve(a),
        Command::Margin(a) => run_margin(a),
        Command::Certify(a) => run_certify(a),
        Command::PlayBatch(a) => run_play_batch(a),
        Command::Dabmn(a) => run_dabmn(a),
        Command::Serve(_) | Command::Replay { .. } => unreachable!("handled in main"),
    }
}

fn subcommand_name(command: &Command) -> String {
    serde_json::to_value(command)
        .ok()
        .and_then(|v| v["subcommand"].as_str().map(str::to_string))
        .unwrap_or_default()
}

fn emit(out_dir: Option<&Path>, output: &Output, manifest: &RunManifest) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure { code: 2, message: e.to_string() };
    let manifest_text = serde_json::to_string_pretty(manifest).map_err(usage)?;
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(io)?;
            for a in &output.artifacts {
                std::fs::write(dir.join(&a.name), &a.content).map_err(io)?;
            }
            std::fs::write(dir.join("manifest.json"), manifest_text).map_err(io)?;
            println!("{}", serde_json::to_string_pretty(&output.summary).map_err(usage)?);
        }
        None => {
            print!("{}", output.artifacts[0].content);
            eprintln!("{}", serde_json::to_string_pretty(&output.summary).map_err(usage)?);
            eprintln!("{manifest_text}");
        }
    }
    Ok(())
}

/// The command line without `--out DIR` or `--out=DIR`.
fn without_out_dir(argv: &[String]) -> Vec<String> {
    let mut kept = Vec::new();
    let mut skip_next = false;
    for a in argv {
        if skip_next {
            skip_next = false;
        } else if a == "--out" {
            skip_next = true;
        } else if !a.starts_with("--out=") {
            kept.push(a.clone());
        }
    }
    kept
}

fn replay(path: &Path) -> Result<u8, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let cli = Cli::try_parse_from(&manifest.argv).map_err(|e| usage(e.to_string()))?;
    let output = execute(&cli.command)?;
    let found = digest(&output.artifacts);
    let same = found == manifest.output_digest;
    println!("{}", json!({"expected": manifest.output_digest, "found": found, "reproduced": same}));
    Ok(if same { 0 } else { 1 })
}

fn run() -> Result<u8, Failure> {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Ok(code);
        }
    };
    match &cli.command {
        Command::Serve(args) => {
            let addr: SocketAddr =
                format!("{}:{}", args.host, args.port).parse().map_err(|e| usage(format!("bad address: {e}")))?;
            let config = pennies_service::ServiceConfig {
                stake_cap: args.stake_cap,
                persist_dir: args.persist_dir.clone(),
                allowed_origin: args.allowed_origin.clone(),
            };
            let runtime = tokio::runtime::Runtime::new().map_err(|e| usage(e.to_string()))?;
            runtime
                .block_on(pennies_service::serve(addr, config))
                .map_err(|e| Failure { code: 1, message: e.to_string() })?;
            Ok(0)
        }
        Command::Replay { manifest } => replay(manifest),
        command => {
            let output = execute(command)?;
            let mut parameters = serde_json::to_value(command).map_err(usage)?;
            if let Some(map) = parameters.as_object_mut() {
                map.remove("subcommand");
            }
            let manifest = RunManifest {
                subcommand: subcommand_name(command),
                argv: without_out_dir(&argv),
                parameters,
                seed: output.seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                output_digest: digest(&output.artifacts),
            };
            emit(cli.out.as_deref(), &output, &manifest)?;
            Ok(output.code)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
