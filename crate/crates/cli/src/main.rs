mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use quenchlab::eigen::{LanczosOptions, DEFAULT_SEED};
use quenchlab::sweep::{
    detect_jumps, evaluate_single, run_sweep_streaming, CsvWriter, Grid, Model, PointReport, StreamError, SweepError,
    SweepPlan, SweepRow, DEFAULT_THRESHOLD_FACTOR,
};
use quenchlab::verify::{Level, Suite};
use quenchlab::{Boundary, ChainSpec, LzParams, QuenchParam};

use config::{parse_seed, resolve_seed, FileConfig, Resolver};

/// Sudden-quench work statistics for the Landau–Zener model and XYZ spin chains.
///
/// Energies and couplings share one arbitrary energy unit; the quench step
/// `--dlam` and grid values carry the unit of the quenched parameter.
/// Exit status: 0 on success, 1 on invalid input (no output written),
/// 2 on a failure after output started (the CSV ends with `# INCOMPLETE`).
#[derive(Debug, Parser)]
#[command(name = "quenchlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Two-level model H = (−Δ/2 + aλ)σz + εσx, swept over λ.
    Lz(LzCmd),
    /// Exact diagonalization of an XXZ, XX or XYZ chain.
    Chain(ChainCmd),
    /// XX chain in a field via free fermions, swept over h.
    XxFf(FfCmd),
    /// Run the built-in verification checks.
    Verify(VerifyCmd),
}

#[derive(Debug, Args)]
struct SweepOpts {
    /// Grid start:stop:steps in units of the quenched parameter, both ends
    /// included [default: lz 0.5:1.5:101; chain -3:3:121 for lambda_z,
    /// 0:3:61 for field_h; xx-ff 0:3:301]
    #[arg(long, value_name = "START:STOP:STEPS", allow_hyphen_values = true)]
    grid: Option<String>,
    /// Evaluate a single control value instead of a grid (no degeneracy nudge)
    #[arg(long, value_name = "X", conflicts_with = "grid", allow_hyphen_values = true)]
    at: Option<f64>,
    /// Quench step δλ in units of the quenched parameter [default: 1e-5; 1e-3 for xx-ff]
    #[arg(long, value_name = "STEP", allow_hyphen_values = true)]
    dlam: Option<f64>,
    /// Output CSV path [default: standard output]
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Lanczos start-vector seed, decimal or 0x-hex; QUENCHLAB_SEED overrides
    /// config files but not this flag [default: 0x5EED]
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    /// Lanczos residual tolerance in energy units [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum total Lanczos iterations per ground state [default: 500]
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    /// Krylov dimension before a Lanczos restart [default: 100]
    #[arg(long, value_name = "N")]
    krylov: Option<usize>,
    /// Worker threads for grid points [default: available parallelism]
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Jump-report threshold as a multiple of the median adjacent difference [default: 20]
    #[arg(long, value_name = "FACTOR")]
    threshold: Option<f64>,
    /// TOML or JSON (by .json extension) file of flag values; explicit flags win
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Stop at the first grid point whose solver fails (exit 2) [default: off]
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Args)]
struct LzCmd {
    /// Bare splitting Δ in energy units [default: 2]
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Field coupling a in energy units, nonzero [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Off-diagonal coupling ε ≥ 0 in energy units; 0 gives a level crossing [default: 0]
    #[arg(long)]
    eps: Option<f64>,
    #[command(flatten)]
    sweep: SweepOpts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ChainModel {
    Xxz,
    Xx,
    Xyz,
}

impl ChainModel {
    fn label(self) -> &'static str {
        match self {
            ChainModel::Xxz => "xxz",
            ChainModel::Xx => "xx",
            ChainModel::Xyz => "xyz",
        }
    }
}

#[derive(Debug, Args)]
struct ChainCmd {
    /// Chain family [default: xxz]
    #[arg(long, value_enum)]
    model: Option<ChainModel>,
    /// Number of sites [default: 12]
    #[arg(long)]
    n: Option<usize>,
    /// In-plane coupling J in energy units, used for jx and jy when those are unset [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    /// X coupling in energy units [default: J]
    #[arg(long, allow_hyphen_values = true)]
    jx: Option<f64>,
    /// Y coupling in energy units [default: J]
    #[arg(long, allow_hyphen_values = true)]
    jy: Option<f64>,
    /// Z coupling λ in energy units, entering as λ/2 σzσz per bond [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<f64>,
    /// Uniform field h in energy units [default: 0]
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    /// Pinning field on one site in energy units [default: -1e-3; 0 for xx]
    #[arg(long, allow_hyphen_values = true)]
    pin: Option<f64>,
    /// Site carrying the pinning field [default: 0]
    #[arg(long)]
    pin_site: Option<usize>,
    /// Boundary condition: open or periodic [default: open]
    #[arg(long)]
    boundary: Option<String>,
    /// Quenched parameter: lambda_z or field_h [default: lambda_z; field_h for xx]
    #[arg(long)]
    param: Option<String>,
    #[command(flatten)]
    sweep: SweepOpts,
}

#[derive(Debug, Args)]
struct FfCmd {
    /// Number of sites [default: 512]
    #[arg(long)]
    n: Option<usize>,
    /// Hopping coupling J in energy units [default: 1]
    #[arg(long, allow_hyphen_values = true)]
    j: Option<f64>,
    /// Boundary condition: open or periodic [default: open]
    #[arg(long)]
    boundary: Option<String>,
    #[command(flatten)]
    sweep: SweepOpts,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VerifyLevel {
    Quick,
    Full,
}

#[derive(Debug, Args)]
struct VerifyCmd {
    /// quick: closed-form and n ≤ 8 checks (seconds); full: every check (minutes)
    #[arg(value_enum, default_value = "quick")]
    level: VerifyLevel,
}

/// Invalid input maps to exit 1, everything after output starts to exit 2.
enum Failure {
    Invalid(anyhow::Error),
    Runtime(anyhow::Error),
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Lz(cmd) => run_lz(cmd),
        Command::Chain(cmd) => run_chain(cmd),
        Command::XxFf(cmd) => run_ff(cmd),
        Command::Verify(cmd) => return run_verify(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Values shared by every sweep subcommand after precedence is applied.
struct Common {
    grid: Grid,
    at: Option<f64>,
    delta: f64,
    out: Option<PathBuf>,
    solver: LanczosOptions,
    workers: Option<usize>,
    threshold: f64,
    strict: bool,
    config_path: Option<PathBuf>,
}

fn load_config(opts: &SweepOpts) -> Result<FileConfig, Failure> {
    match &opts.config {
        Some(path) => FileConfig::load(path).map_err(invalid),
        None => Ok(FileConfig::default()),
    }
}

fn resolve_common(
    opts: &SweepOpts,
    cfg: &FileConfig,
    res: &mut Resolver,
    default_grid: &str,
    default_delta: f64,
) -> Result<Common> {
    let at = res.pick_opt("at", opts.at, cfg.at);
    let grid_text = res.pick("grid", opts.grid.clone(), cfg.grid.clone(), default_grid.to_string());
    let grid: Grid = grid_text.parse().context("--grid")?;
    let delta = res.pick("dlam", opts.dlam, cfg.dlam, default_delta);
    let out = res.pick_opt(
        "out",
        opts.out.as_ref().map(|p| p.display().to_string()),
        cfg.out.clone(),
    );
    let defaults = LanczosOptions::default();
    let seed = resolve_seed(
        res,
        opts.seed,
        std::env::var("QUENCHLAB_SEED").ok(),
        cfg.seed.as_ref(),
        DEFAULT_SEED,
    )?;
    let tol = res.pick("tol", opts.tol, cfg.tol, defaults.tol);
    let max_iter = res.pick("max-iter", opts.max_iter, cfg.max_iter, defaults.max_iter);
    let krylov = res.pick("krylov", opts.krylov, cfg.krylov, defaults.krylov_dim);
    let workers = res.pick_opt("workers", opts.workers, cfg.workers);
    let threshold = res.pick("threshold", opts.threshold, cfg.threshold, DEFAULT_THRESHOLD_FACTOR);
    let strict = res.pick("strict", opts.strict.then_some(true), cfg.strict, false);

    if !(tol.is_finite() && tol > 0.0) {
        bail!("--tol must be a positive number (tol > 0), got {tol}");
    }
    if max_iter == 0 {
        bail!("--max-iter must be at least 1");
    }
    if krylov < 2 {
        bail!("--krylov must be at least 2, got {krylov}");
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        bail!("--threshold must be a positive number (threshold > 0), got {threshold}");
    }
    Ok(Common {
        grid,
        at,
        delta,
        out: out.map(PathBuf::from),
        solver: LanczosOptions {
            seed,
            tol,
            max_iter,
            krylov_dim: krylov,
        },
        workers,
        threshold,
        strict,
        config_path: opts.config.clone(),
    })
}

fn finish_plan(mut plan: SweepPlan, common: &Common) -> Result<SweepPlan, Failure> {
    plan.solver = common.solver;
    plan.workers = common.workers;
    plan.output = common.out.clone();
    let checked = if common.at.is_some() {
        plan.validate_model()
    } else {
        plan.validate()
    };
    checked.map_err(invalid)?;
    Ok(plan)
}

fn run_lz(cmd: LzCmd) -> Result<(), Failure> {
    let cfg = load_config(&cmd.sweep)?;
    let mut res = Resolver::default();
    let delta = res.pick("delta", cmd.delta, cfg.delta, 2.0);
    let a = res.pick("a", cmd.a, cfg.a, 1.0);
    let eps = res.pick("eps", cmd.eps, cfg.eps, 0.0);
    let common =
        resolve_common(&cmd.sweep, &cfg, &mut res, "0.5:1.5:101", Model::Lz.default_delta()).map_err(invalid)?;
    let params = LzParams::new(delta, a, eps).map_err(invalid)?;
    let plan = finish_plan(SweepPlan::lz(params, common.grid, common.delta), &common)?;
    execute(&plan, &common, "lz", &res)
}

fn parse_boundary(text: &str) -> Result<Boundary> {
    Boundary::from_label(text).ok_or_else(|| anyhow!("--boundary must be open or periodic, got {text:?}"))
}

fn run_chain(cmd: ChainCmd) -> Result<(), Failure> {
    let cfg = load_config(&cmd.sweep)?;
    let mut res = Resolver::default();
    let model = match (cmd.model, &cfg.model) {
        (Some(m), _) => m,
        (None, Some(text)) => ChainModel::from_str(text, true)
            .map_err(|_| invalid(anyhow!("model must be xxz, xx or xyz, got {text:?}")))?,
        (None, None) => ChainModel::Xxz,
    };
    res.record(
        "model",
        &model.label(),
        if cmd.model.is_some() {
            config::Source::Flag
        } else if cfg.model.is_some() {
            config::Source::Config
        } else {
            config::Source::Default
        },
    );
    let n = res.pick("n", cmd.n, cfg.n, 12);
    let j = res.pick("j", cmd.j, cfg.j, 1.0);
    let jx = res.pick("jx", cmd.jx, cfg.jx, j);
    let jy = res.pick("jy", cmd.jy, cfg.jy, j);
    let lambda_z = res.pick("lambda", cmd.lambda, cfg.lambda, 0.0);
    let field_h = res.pick("h", cmd.h, cfg.h, 0.0);
    let default_pin = if model == ChainModel::Xx { 0.0 } else { -1e-3 };
    let pin_strength = res.pick("pin", cmd.pin, cfg.pin, default_pin);
    let pin_site = res.pick("pin-site", cmd.pin_site, cfg.pin_site, 0);
    let boundary = res.pick("boundary", cmd.boundary.clone(), cfg.boundary.clone(), "open".into());
    let boundary = parse_boundary(&boundary).map_err(invalid)?;
    let default_param = if model == ChainModel::Xx { "field_h" } else { "lambda_z" };
    let param_text = res.pick("param", cmd.param.clone(), cfg.param.clone(), default_param.into());
    let param = QuenchParam::from_label(&param_text)
        .ok_or_else(|| invalid(anyhow!("--param must be lambda_z or field_h, got {param_text:?}")))?;
    if model == ChainModel::Xxz && jx != jy {
        return Err(invalid(anyhow!(
            "model xxz requires jx = jy (got {jx} and {jy}); use --model xyz"
        )));
    }
    let default_grid = match param {
        QuenchParam::LambdaZ => "-3:3:121",
        QuenchParam::FieldH => "0:3:61",
    };
    let sweep_model = if model == ChainModel::Xx {
        Model::XxEd
    } else {
        Model::XxzEd
    };
    let common =
        resolve_common(&cmd.sweep, &cfg, &mut res, default_grid, sweep_model.default_delta()).map_err(invalid)?;
    let spec = ChainSpec {
        n_sites: n,
        jx,
        jy,
        lambda_z,
        field_h,
        pin_strength,
        pin_site,
        boundary,
    };
    let plan = finish_plan(
        SweepPlan::chain(sweep_model, spec, param, common.grid, common.delta),
        &common,
    )?;
    execute(&plan, &common, "chain", &res)
}

fn run_ff(cmd: FfCmd) -> Result<(), Failure> {
    let cfg = load_config(&cmd.sweep)?;
    let mut res = Resolver::default();
    let n = res.pick("n", cmd.n, cfg.n, 512);
    let j = res.pick("j", cmd.j, cfg.j, 1.0);
    let boundary = res.pick("boundary", cmd.boundary.clone(), cfg.boundary.clone(), "open".into());
    let boundary = parse_boundary(&boundary).map_err(invalid)?;
    let common = resolve_common(&cmd.sweep, &cfg, &mut res, "0:3:301", Model::XxFf.default_delta()).map_err(invalid)?;
    let spec = ChainSpec {
        boundary,
        ..ChainSpec::xx(n, j, 0.0)
    };
    let plan = finish_plan(
        SweepPlan::chain(Model::XxFf, spec, QuenchParam::FieldH, common.grid, common.delta),
        &common,
    )?;
    execute(&plan, &common, "xx-ff", &res)
}

fn provenance(subcommand: &str, common: &Common, res: &Resolver) -> Vec<String> {
    let argv: Vec<String> = std::env::args().collect();
    vec![
        format!("quenchlab {} {subcommand}", env!("CARGO_PKG_VERSION")),
        format!("command: {}", argv.join(" ")),
        format!(
            "config: {}",
            common
                .config_path
                .as_deref()
                .map_or("none".into(), |p: &Path| p.display().to_string())
        ),
        format!("resolved: {}", res.summary()),
    ]
}

enum Halt {
    Io(SweepError),
    Strict(String),
}

fn execute(plan: &SweepPlan, common: &Common, subcommand: &str, res: &Resolver) -> Result<(), Failure> {
    let comments = provenance(subcommand, common, res);
    let sink: Box<dyn Write> = match &common.out {
        Some(path) => {
            let file = File::create(path)
                .with_context(|| format!("creating {}", path.display()))
                .map_err(invalid)?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(io::stdout().lock()),
    };
    let label = common
        .out
        .as_ref()
        .map_or("standard output".into(), |p| p.display().to_string());
    let mut writer = CsvWriter::from_writer(sink, &label, &comments).map_err(|e| Failure::Runtime(e.into()))?;

    let mut rows: Vec<SweepRow> = Vec::new();
    let mut accept = |report: PointReport| -> Result<(), Halt> {
        writer.write_row(&report.row).map_err(Halt::Io)?;
        let row_failed = report.row.has_flag("solver_failed");
        let x = report.row.grid_value;
        rows.push(report.row);
        if common.strict && row_failed {
            let reason = report.diagnostics.error.unwrap_or_default();
            return Err(Halt::Strict(format!(
                "solver failed at {} = {x}: {reason}",
                plan.param_label()
            )));
        }
        Ok(())
    };
    let outcome = match common.at {
        Some(x) => match evaluate_single(plan, x) {
            Ok(report) => accept(report).map_err(StreamError::Sink),
            Err(e) => Err(StreamError::Sweep(e)),
        },
        None => run_sweep_streaming(plan, accept),
    };

    if let Err(e) = outcome {
        let reason = match e {
            StreamError::Sweep(e) => anyhow::Error::from(e),
            StreamError::Sink(Halt::Io(e)) => anyhow::Error::from(e),
            StreamError::Sink(Halt::Strict(msg)) => anyhow!(msg),
        };
        return Err(Failure::Runtime(match writer.finish_incomplete() {
            Ok(()) => reason,
            Err(e) => reason.context(format!("also failed to mark output incomplete: {e}")),
        }));
    }
    writer.finish().map_err(|e| Failure::Runtime(e.into()))?;

    let report = jump_report(&rows, common.threshold);
    if common.out.is_some() {
        print!("{report}");
    } else {
        eprint!("{report}");
    }
    Ok(())
}

fn jump_report(rows: &[SweepRow], threshold: f64) -> String {
    let mut out = String::new();
    let failed = rows.iter().filter(|r| !r.irr_work.is_finite()).count();
    let nudged = rows.iter().filter(|r| r.has_flag("nudged")).count();
    out.push_str(&format!(
        "rows: {} ({failed} unevaluated, {nudged} nudged)\n",
        rows.len()
    ));
    if rows.len() < 4 {
        return out;
    }
    for column in ["avg_work_per_delta", "irr_per_delta2"] {
        match detect_jumps(rows, column, threshold) {
            Ok(jumps) if jumps.is_empty() => out.push_str(&format!("jumps in {column}: none\n")),
            Ok(jumps) => {
                out.push_str(&format!("jumps in {column}: {}\n", jumps.len()));
                for j in jumps {
                    out.push_str(&format!(
                        "  interval [{}, {}]  difference {:.6e}  steepest at {}\n",
                        j.lo, j.hi, j.difference, j.location
                    ));
                }
            }
            Err(e) => out.push_str(&format!("jumps in {column}: {e}\n")),
        }
    }
    out
}

fn run_verify(cmd: VerifyCmd) -> ExitCode {
    let level = match cmd.level {
        VerifyLevel::Quick => Level::Quick,
        VerifyLevel::Full => Level::Full,
    };
    let outcomes = Suite::new().run(level);
    let passed = outcomes.iter().filter(|o| o.passed).count();
    for o in &outcomes {
        println!("{o}");
    }
    println!("{passed}/{} checks passed", outcomes.len());
    if passed == outcomes.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
