//! `fpd`: command-line front end for the toolkit.
//!
//! Five subcommands: `simulate-chain` (one rescaled urn trajectory),
//! `simulate-ctrw` (a marginal ensemble of the composite walk), `density`
//! (spectral transition density or cdf tables), `study` (a declarative
//! TOML experiment producing a gated result table), and `selftest` (the
//! built-in acceptance criteria).
//!
//! Exit codes: 0 when everything requested passed, 2 for configuration or
//! usage errors, 3 when a statistical gate failed. Failures also emit a
//! one-line JSON record `{"error":{"code":...,"message":...}}` on stderr
//! so calling scripts never have to parse human-oriented text.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use fpd_core::chains::{initial_state, RescaledChainView};
use fpd_core::harness::{
    normalization_window, run_all, run_criterion, run_study, write_outputs, ExperimentConfig,
    ResultTable, CRITERION_COUNT,
};
use fpd_core::pearson::derive_params;
use fpd_core::{
    run_ensemble, ChainParams, CtrwSpec, DiffusionKind, EigenSystem, Error, SpectralDensity,
    StabilityIndex, WaitingTimeModel,
};

const EXIT_CONFIG: u8 = 2;
const EXIT_GATE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fpd",
    version,
    about = "Urn-chain walks with heavy-tailed clocks and their fractional Pearson limit densities"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one rescaled urn-chain trajectory as CSV (step,state,value)
    SimulateChain(SimulateChainArgs),
    /// Simulate a composite-walk ensemble at one time as CSV (path,value)
    SimulateCtrw(SimulateCtrwArgs),
    /// Tabulate a transition density or cdf as CSV (x,density | x,cdf)
    Density(DensityArgs),
    /// Run a declarative TOML study and write its gated result table
    Study(StudyArgs),
    /// Run built-in acceptance criteria (statistics against frozen gates)
    Selftest(SelftestArgs),
}

/// Chain parameters shared by every subcommand that builds an urn chain.
/// Omitted values fall back to the kind's reference parameter set:
/// ou (theta 2, a 1, b 0), jacobi (theta 1, a 1, b 1),
/// cir (theta 1, a 2, b 4, d 0.5).
#[derive(Args)]
struct ParamOpts {
    /// Diffusion kind: ou, jacobi, or cir
    #[arg(long)]
    kind: DiffusionKind,
    /// Time-scale factor theta > 0
    #[arg(long)]
    theta: Option<f64>,
    /// First urn parameter (see --kind for its role)
    #[arg(long)]
    a: Option<f64>,
    /// Second urn parameter
    #[arg(long)]
    b: Option<f64>,
    /// Lattice exponent d in (0, 1]; cir only
    #[arg(long)]
    d: Option<f64>,
}

impl ParamOpts {
    fn chain_params(&self) -> Result<ChainParams, Error> {
        let (theta, a, b, d) = match self.kind {
            DiffusionKind::Ou => (2.0, 1.0, 0.0, None),
            DiffusionKind::Jacobi => (1.0, 1.0, 1.0, None),
            DiffusionKind::Cir => (1.0, 2.0, 4.0, Some(0.5)),
        };
        let cp = ChainParams {
            theta: self.theta.unwrap_or(theta),
            a: self.a.unwrap_or(a),
            b: self.b.unwrap_or(b),
            d: self.d.map(Some).unwrap_or(d),
        };
        cp.validate(self.kind)?;
        Ok(cp)
    }

    /// Natural start when none is given: 0 (ou), 1/2 (jacobi), b/a (cir).
    fn default_x0(&self, cp: &ChainParams) -> f64 {
        match self.kind {
            DiffusionKind::Ou => 0.0,
            DiffusionKind::Jacobi => 0.5,
            DiffusionKind::Cir => cp.b / cp.a,
        }
    }
}

#[derive(Args)]
struct SimulateChainArgs {
    #[command(flatten)]
    params: ParamOpts,
    /// Chain size (number of urn balls)
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Process-time horizon; transitions = floor(c_n t)
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Explicit transition count, overriding --t
    #[arg(long)]
    steps: Option<u64>,
    /// Start in diffusion coordinates (embedded to the nearest lattice state)
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateCtrwArgs {
    #[command(flatten)]
    params: ParamOpts,
    /// Tail index of the waiting-time law, in (0, 1); exactly 1 with --law unit
    #[arg(long)]
    beta: f64,
    /// Waiting-time law: pareto, positive_stable, or unit
    #[arg(long, default_value = "positive_stable")]
    law: String,
    /// Chain size
    #[arg(long, default_value_t = 1000)]
    n: u64,
    /// Number of independent walk values to draw
    #[arg(long, default_value_t = 1000)]
    paths: u64,
    /// Observation time
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Start in diffusion coordinates
    #[arg(long)]
    x0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    params: ParamOpts,
    /// Tail index of the time change, in (0, 1]
    #[arg(long)]
    beta: f64,
    /// Transition time, > 0
    #[arg(long)]
    t: f64,
    /// Conditioning point X_0 = y; defaults to the kind's natural start
    #[arg(long)]
    y: Option<f64>,
    /// Spectral truncation order; default 60 (jacobi) or 100
    #[arg(long)]
    order: Option<usize>,
    /// Number of evaluation points (panel midpoints of the window)
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Lower window edge; defaults to the mass-carrying region
    #[arg(long)]
    lo: Option<f64>,
    /// Upper window edge
    #[arg(long)]
    hi: Option<f64>,
    /// Tabulate the cumulative distribution instead of the density
    #[arg(long)]
    cdf: bool,
    /// Output file; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    /// TOML experiment description
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run a single criterion (1 through 10) instead of all of them
    #[arg(long)]
    only: Option<u32>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail("config", &clap_message(&e), EXIT_CONFIG);
        }
    };
    let outcome = match cli.command {
        Command::SimulateChain(args) => simulate_chain(args),
        Command::SimulateCtrw(args) => simulate_ctrw(args),
        Command::Density(args) => density(args),
        Command::Study(args) => study(args),
        Command::Selftest(args) => selftest(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => fail(e.code(), &e.to_string(), EXIT_CONFIG),
    }
}

/// First line of a clap error ("error: unexpected argument '--x' found"),
/// stripped of its prefix; names the offending flag or value.
fn clap_message(e: &clap::Error) -> String {
    let rendered = e.render().to_string();
    let line = rendered.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid invocation");
    line.trim_start_matches("error:").trim().to_string()
}

fn fail(code: &str, message: &str, exit: u8) -> ExitCode {
    let record = serde_json::json!({ "error": { "code": code, "message": message } });
    eprintln!("{record}");
    ExitCode::from(exit)
}

/// Open `--out` (or stdout) behind one buffered writer.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn config_error(message: String) -> Error {
    Error::Config { message }
}

fn simulate_chain(args: SimulateChainArgs) -> Result<ExitCode, Error> {
    let cp = args.params.chain_params()?;
    let view = RescaledChainView::new(args.params.kind, cp, args.n)?;
    let steps = match args.steps {
        Some(s) => s,
        None => {
            if !(args.t >= 0.0 && args.t.is_finite()) {
                return Err(config_error(format!("need a finite t >= 0, got {}", args.t)));
            }
            let budget = (view.steps_per_unit_time() * args.t).floor();
            if budget > 4.0e18 {
                return Err(config_error(format!("step budget {budget} overflows")));
            }
            budget as u64
        }
    };
    let x0 = args.x0.unwrap_or_else(|| args.params.default_x0(&cp));
    let mut state = initial_state(args.params.kind, &cp, args.n, x0)?;
    let mut rng = fpd_core::rng::path_rng(args.seed, 0);

    let mut w = sink(args.out.as_deref())?;
    writeln!(w, "step,state,value")?;
    writeln!(w, "0,{state},{}", view.rescale(state))?;
    for step in 1..=steps {
        state = view.step(state, &mut rng)?;
        writeln!(w, "{step},{state},{}", view.rescale(state))?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Build the waiting-time model, enforcing the same beta/law coupling the
/// study configs use: `unit` is exactly the beta = 1 clock.
fn waiting_model(beta: f64, law: &str) -> Result<WaitingTimeModel, Error> {
    match law {
        "unit" => {
            if beta != 1.0 {
                return Err(config_error(format!(
                    "--law unit is the beta = 1 clock; got --beta {beta}"
                )));
            }
            Ok(WaitingTimeModel::unit())
        }
        "pareto" | "positive_stable" => {
            if beta == 1.0 {
                return Err(config_error(
                    "--beta 1 requires --law unit (the classical clock)".into(),
                ));
            }
            let index = StabilityIndex::new(beta)?;
            Ok(match law {
                "pareto" => WaitingTimeModel::pareto(index),
                _ => WaitingTimeModel::positive_stable(index),
            })
        }
        other => Err(config_error(format!(
            "unknown waiting law `{other}`; expected pareto, positive_stable, or unit"
        ))),
    }
}

fn simulate_ctrw(args: SimulateCtrwArgs) -> Result<ExitCode, Error> {
    let cp = args.params.chain_params()?;
    let waiting = waiting_model(args.beta, &args.law)?;
    let x0 = args.x0.unwrap_or_else(|| args.params.default_x0(&cp));
    let spec = CtrwSpec { kind: args.params.kind, cp, n: args.n, x0, waiting };
    let ens = run_ensemble(&spec, args.t, args.paths, args.seed)?;

    let mut w = sink(args.out.as_deref())?;
    writeln!(w, "path,value")?;
    for (idx, value) in ens.samples.iter().enumerate() {
        writeln!(w, "{idx},{value}")?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn density(args: DensityArgs) -> Result<ExitCode, Error> {
    let cp = args.params.chain_params()?;
    let dp = derive_params(args.params.kind, &cp)?;
    let y = args.y.unwrap_or_else(|| args.params.default_x0(&cp));
    let order = args.order.unwrap_or(match args.params.kind {
        DiffusionKind::Jacobi => 60,
        _ => 100,
    });
    if args.points < 2 {
        return Err(config_error(format!("need at least 2 points, got {}", args.points)));
    }
    let eigen = Arc::new(EigenSystem::new(args.params.kind, dp, order)?);
    let sd = SpectralDensity::new(eigen, args.beta, args.t, y)?;

    let (auto_lo, auto_hi) = normalization_window(args.params.kind, &dp, y);
    let lo = args.lo.unwrap_or(auto_lo);
    let hi = args.hi.unwrap_or(auto_hi);
    if !(lo < hi) {
        return Err(config_error(format!("need lo < hi, got [{lo}, {hi}]")));
    }

    let mut w = sink(args.out.as_deref())?;
    writeln!(w, "x,{}", if args.cdf { "cdf" } else { "density" })?;
    let width = (hi - lo) / args.points as f64;
    for i in 0..args.points {
        // Panel midpoints: stays off state-space endpoints, where some
        // parameter sets have an unbounded stationary weight.
        let x = lo + (i as f64 + 0.5) * width;
        let value = if args.cdf { sd.cdf(x)? } else { sd.density(x)? };
        writeln!(w, "{x},{value}")?;
    }
    w.flush()?;
    Ok(ExitCode::SUCCESS)
}

/// Print one human-oriented line per gate; the files carry the full table.
fn print_table(table: &ResultTable) {
    for row in &table.rows {
        println!(
            "[{}] {}: {} = {} (tolerance {})",
            if row.pass { "pass" } else { "FAIL" },
            row.label,
            row.statistic,
            row.value,
            row.tolerance
        );
    }
}

fn study(args: StudyArgs) -> Result<ExitCode, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        config_error(format!("cannot read {}: {e}", args.config.display()))
    })?;
    let config = ExperimentConfig::from_toml_str(&text)?;
    let out = run_study(&config)?;
    let dir = write_outputs(
        Path::new(&config.output_dir),
        config.study,
        &config.canonical_toml()?,
        &out,
    )?;
    print_table(&out.table);
    let passed = out.table.rows.iter().filter(|r| r.pass).count();
    println!("{passed}/{} gates passed; results in {}", out.table.rows.len(), dir.display());
    if out.table.all_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(fail(
            "gate_failure",
            &format!(
                "{} of {} gates failed; results in {}",
                out.table.rows.len() - passed,
                out.table.rows.len(),
                dir.display()
            ),
            EXIT_GATE,
        ))
    }
}

fn selftest(args: SelftestArgs) -> Result<ExitCode, Error> {
    let reports = match args.only {
        Some(index) => vec![run_criterion(index)?],
        None => run_all()?,
    };
    let mut failed = Vec::new();
    for report in &reports {
        println!(
            "criterion {:02} {}: {} ({:.1}s) {}",
            report.index,
            report.name,
            if report.pass { "PASS" } else { "FAIL" },
            report.seconds,
            report.detail
        );
        if !report.pass {
            failed.push(report.index);
        }
    }
    println!("{}/{} criteria passed", reports.len() - failed.len(), reports.len());
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(fail(
            "gate_failure",
            &format!("criteria failed: {failed:?} of {CRITERION_COUNT}"),
            EXIT_GATE,
        ))
    }
}
