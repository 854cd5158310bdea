use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use splitmor_cli::config::{BasisSpec, HorizonSpec, InputSpec, ModelSource, OrderSpec};
use splitmor_cli::report::summary;
use splitmor_cli::{emit_report, msd_cases, run_experiment, ExperimentConfig, MethodName, ReductionReport};
use splitmor_core::simulation::write_csv;
use splitmor_core::{l2_norm, linf_norm, simulate, MsdParams, Realization};

/// Model reduction for LTI systems with nonzero initial conditions.
///
/// Exit status: 0 on success, 2 if a measured error exceeds its bound, 1 on error.
#[derive(Parser)]
#[command(name = "mor", version)]
struct Cli {
    /// Log verbosity (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a model with every configured method and write the report files.
    Reduce(Overrides),
    /// Simulate the full-order model only and write `trace_full.csv`.
    Simulate(Overrides),
    /// Built-in benchmark scenarios.
    Bench {
        #[command(subcommand)]
        which: Bench,
    },
    /// Print the summary table of an existing report directory.
    Report {
        /// Directory containing `report.json`.
        dir: PathBuf,
    },
}

#[derive(Subcommand)]
enum Bench {
    /// Mass-spring-damper chain, initial condition on the last state and on state 30.
    Msd {
        /// Number of masses (states = 2 × masses).
        #[arg(long, default_value_t = MsdParams::default().n_masses)]
        masses: usize,
        /// Output directory; each case is written to a subdirectory.
        #[arg(long, default_value = "mor-out")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run the methods of each case concurrently.
        #[arg(long)]
        parallel: bool,
    },
}

/// Settings applied on top of `--config` (or of the defaults when it is absent).
#[derive(Args)]
struct Overrides {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `msd`, `msd:<masses>` or a directory with A.mtx, B.mtx, C.mtx [default: msd].
    #[arg(long)]
    model: Option<String>,
    /// Truncation tolerance on σ_{r+1}/σ₁ [default: 1e-2].
    #[arg(long)]
    tol: Option<f64>,
    /// Fixed order for the input-to-output map.
    #[arg(long)]
    order_u: Option<usize>,
    /// Fixed order for the initial-condition-to-output map.
    #[arg(long)]
    order_x0: Option<usize>,
    /// Fixed order for augmented BT.
    #[arg(long)]
    order_aug: Option<usize>,
    /// Methods to run: augbt, bt-bt, bt-irka [default: all].
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,
    /// 1-based state indices spanning X₀; `none` for an empty basis [default: last state].
    #[arg(long, value_delimiter = ',')]
    x0_indices: Vec<String>,
    /// `zero` or `decaying` [default: decaying, rate 0.05].
    #[arg(long)]
    input: Option<String>,
    /// Simulation horizon [default: decay of the slowest mode to 1e-8].
    #[arg(long)]
    t_final: Option<f64>,
    /// Simulation step [default: horizon / 4000].
    #[arg(long)]
    dt: Option<f64>,
    /// Seed for IRKA's initial directions [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: mor-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run the methods concurrently.
    #[arg(long)]
    parallel: bool,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::new(ModelSource::msd(&MsdParams::default())),
        };
        if let Some(spec) = &self.model {
            cfg.model = parse_model(spec)?;
        }
        if let Some(tol) = self.tol {
            cfg.orders.tol = tol;
        }
        let orders = OrderSpec {
            order_u: self.order_u.or(cfg.orders.order_u),
            order_x0: self.order_x0.or(cfg.orders.order_x0),
            order_aug: self.order_aug.or(cfg.orders.order_aug),
            ..cfg.orders
        };
        cfg.orders = orders;
        if !self.method.is_empty() {
            cfg.methods = self
                .method
                .iter()
                .map(|m| MethodName::parse(m).with_context(|| format!("unknown method `{m}`")))
                .collect::<Result<_>>()?;
        }
        match self.x0_indices.as_slice() {
            [] => {}
            [none] if none == "none" => cfg.basis = BasisSpec::Unit { indices: Vec::new() },
            list => {
                let indices = list
                    .iter()
                    .map(|s| s.parse().with_context(|| format!("bad --x0-indices entry `{s}`")))
                    .collect::<Result<_>>()?;
                cfg.basis = BasisSpec::Unit { indices };
            }
        }
        match self.input.as_deref() {
            None => {}
            Some("zero") => cfg.input = InputSpec::Zero,
            Some("decaying") => cfg.input = InputSpec::default(),
            Some(other) => bail!("unknown input `{other}` (expected zero or decaying)"),
        }
        cfg.horizon = HorizonSpec {
            t_final: self.t_final.or(cfg.horizon.t_final),
            dt: self.dt.or(cfg.horizon.dt),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = Some(out.clone());
        }
        cfg.parallel |= self.parallel;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_model(spec: &str) -> Result<ModelSource> {
    if spec == "msd" {
        return Ok(ModelSource::msd(&MsdParams::default()));
    }
    if let Some(n) = spec.strip_prefix("msd:") {
        let masses = n.parse().with_context(|| format!("bad mass count in `{spec}`"))?;
        return Ok(ModelSource::msd(&MsdParams::with_masses(masses)));
    }
    Ok(ModelSource::Path {
        dir: spec.into(),
        outputs: None,
    })
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| PathBuf::from("mor-out"))
}

fn reduce(cfg: &ExperimentConfig, dir: &Path) -> Result<ReductionReport> {
    let rep = run_experiment(cfg)?;
    emit_report(&rep, dir)?;
    print!("{}", summary(&rep));
    println!("files written to {}", dir.display());
    Ok(rep)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Reduce(o) => {
            let cfg = o.resolve()?;
            Ok(reduce(&cfg, &out_dir(&cfg))?.passed())
        }
        Command::Simulate(o) => {
            let cfg = o.resolve()?;
            let s = splitmor_cli::experiment::setup(&cfg)?;
            let tr = simulate(&s.model, &s.input, &s.x0, s.grid.t_f(), s.grid.dt)?;
            let dir = out_dir(&cfg);
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("trace_full.csv");
            write_csv(&tr, &path)?;
            println!(
                "n={} steps={} dt={:.4e}  |y|_L2={:.6e}  |y|_Linf={:.6e}  -> {}",
                s.model.order(),
                s.grid.steps,
                s.grid.dt,
                l2_norm(&tr),
                linf_norm(&tr),
                path.display()
            );
            Ok(true)
        }
        Command::Bench {
            which:
                Bench::Msd {
                    masses,
                    out,
                    seed,
                    parallel,
                },
        } => {
            let mut ok = true;
            for (name, mut cfg) in msd_cases(masses) {
                cfg.seed = seed;
                cfg.parallel = parallel;
                println!("== {name}");
                ok &= reduce(&cfg, &out.join(name))?.passed();
            }
            Ok(ok)
        }
        Command::Report { dir } => {
            let path = dir.join("report.json");
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let rep = ReductionReport::from_json(&text)?;
            print!("{}", summary(&rep));
            Ok(rep.passed())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error bound violated");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
