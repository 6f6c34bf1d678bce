use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crn_markov::model::{self, Model};
use crn_markov::solver::{self, Method};
use crn_markov::sweep::{self, SweepSpec};
use crn_markov::{complexity, metrics, Error, ReservationOptions, SimConfig, SystemParams};

#[derive(Parser)]
#[command(
    name = "crnmodel",
    version,
    about = "Prioritized cognitive-radio channel access models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a parameter file and print the derived pool sizes.
    Validate(Common),
    /// List the state space of each model.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Also write the labelled generator as `src dst rate label` lines.
        #[arg(long)]
        generator: bool,
    },
    /// Solve for the stationary distribution and write it as CSV.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = SolveMethod::Direct)]
        method: SolveMethod,
        #[arg(long, default_value_t = solver::DEFAULT_MAX_ITERS)]
        max_iters: usize,
    },
    /// Solve and print one metrics CSV row per model.
    Metrics(Common),
    /// Run the discrete-event simulator.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Sweep the SU arrival or service rate and write CSV files.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = AxisArg::LambdaS)]
        axis: AxisArg,
        #[arg(long)]
        start: Option<f64>,
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Also simulate every grid point.
        #[arg(long)]
        simulate: bool,
        #[command(flatten)]
        sim: SimArgs,
        /// Concurrent grid points; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Compare closed-form state counts with the enumerators.
    Complexity {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        min_m: usize,
        #[arg(long, default_value_t = 12)]
        max_m: usize,
    },
}

#[derive(Args)]
struct Common {
    /// JSON parameter file; defaults to the reference operating point.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModelArg::Both)]
    model: ModelArg,
    /// Output directory; stdout when omitted (required by `sweep`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Solver tolerance: residual bound for the direct solve, iterate
    /// delta for uniformization.
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Block SU-2 arrivals that cannot get m channels instead of admitting
    /// them at width n.
    #[arg(long)]
    no_su2_min_width: bool,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e6)]
    horizon: f64,
    #[arg(long, default_value_t = 1e3)]
    warmup: f64,
    #[arg(long, default_value_t = 10)]
    replications: usize,
    /// Compare every visited state's moves with the generator row.
    #[arg(long)]
    cross_check: bool,
}

impl SimArgs {
    fn config(&self) -> SimConfig {
        SimConfig {
            horizon: self.horizon,
            warmup: self.warmup,
            replications: self.replications,
            seed: self.seed,
            cross_check: self.cross_check,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Basic,
    Reservation,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    Direct,
    Uniformization,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    LambdaS,
    MuS,
}

impl Common {
    fn params(&self) -> Result<SystemParams, Error> {
        match &self.params {
            None => Ok(SystemParams::reference()),
            Some(path) => Ok(SystemParams::from_json(&std::fs::read_to_string(path)?)?),
        }
    }

    fn direct_tol(&self) -> f64 {
        self.tol.unwrap_or(solver::DEFAULT_DIRECT_TOL)
    }

    fn models(&self) -> Vec<Model> {
        let res = Model::Reservation(ReservationOptions {
            su2_min_width_admission: !self.no_su2_min_width,
        });
        match self.model {
            ModelArg::Basic => vec![Model::Basic],
            ModelArg::Reservation => vec![res],
            ModelArg::Both => vec![Model::Basic, res],
        }
    }

    /// Writes `text` to `<out>/<name>`, or prints it.
    fn emit(&self, name: &str, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(dir) => write_file(dir, name, text),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), Error> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Validate(c) => {
            let p = c.params()?;
            println!("valid: M1={} M2={}", p.su1_pool(), p.su2_pool());
        }
        Command::Enumerate { common, generator } => {
            let p = common.params()?;
            for m in common.models() {
                let space = model::enumerate(&p, &m);
                let kind = m.kind();
                let mut text = String::new();
                for t in space.tuples() {
                    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
                    text.push_str(&format!("({})\n", parts.join(",")));
                }
                eprintln!("{kind}: {} states", space.len());
                common.emit(&format!("states_{kind}.txt"), &text)?;
                if generator {
                    let g = model::build(&p, &m, &space)?;
                    common.emit(&format!("generator_{kind}.txt"), &g.export_triples())?;
                }
            }
        }
        Command::Solve {
            common,
            method,
            max_iters,
        } => {
            let p = common.params()?;
            for m in common.models() {
                let space = model::enumerate(&p, &m);
                let g = model::build(&p, &m, &space)?;
                let dist = match method {
                    SolveMethod::Direct => solver::solve_direct(&g, common.direct_tol()),
                    SolveMethod::Uniformization => solver::solve_uniformization(
                        &g,
                        common.tol.unwrap_or(solver::DEFAULT_ITERATE_TOL),
                        max_iters,
                    ),
                }
                .map_err(|source| Error::Solve {
                    context: format!("{} model", m.kind()),
                    source,
                })?;
                let label = match dist.method {
                    Method::DirectLinear => "direct",
                    Method::Uniformization => "uniformization",
                };
                eprintln!(
                    "{}: {} states, {label} residual {:e}",
                    m.kind(),
                    space.len(),
                    dist.residual_inf
                );
                common.emit(
                    &format!("pi_{}.csv", m.kind()),
                    &model::pi_csv(&space, &dist),
                )?;
            }
        }
        Command::Metrics(c) => {
            let p = c.params()?;
            let mut text = metrics::csv_header() + "\n";
            for m in c.models() {
                let a = model::analyze(&p, &m, c.direct_tol())?;
                for class in &a.report.degenerate {
                    eprintln!("{}: class {} always blocked", m.kind(), class.label());
                }
                text.push_str(&a.report.csv_row(&p));
                text.push('\n');
            }
            c.emit("metrics.csv", &text)?;
        }
        Command::Simulate { common, sim } => {
            let p = common.params()?;
            let cfg = sim.config();
            let mut csv = crn_markov::SimEstimate::csv_header() + "\n";
            for m in common.models() {
                let est = crn_markov::simulate(&p, &m, &cfg)?;
                csv.push_str(&est.csv_row());
                csv.push('\n');
                if let Some(dir) = &common.out {
                    let json = serde_json::to_string_pretty(&est)? + "\n";
                    write_file(dir, &format!("simulate_{}.json", m.kind()), &json)?;
                }
            }
            common.emit("sim_metrics.csv", &csv)?;
        }
        Command::Sweep {
            common,
            axis,
            start,
            stop,
            steps,
            simulate,
            sim,
            workers,
        } => {
            let p = common.params()?;
            let mut spec = match axis {
                AxisArg::LambdaS => SweepSpec::arrival_reference(common.models()),
                AxisArg::MuS => SweepSpec::service_reference(common.models()),
            };
            spec.start = start.unwrap_or(spec.start);
            spec.stop = stop.unwrap_or(spec.stop);
            spec.steps = steps.unwrap_or(spec.steps);
            spec.tol = common.direct_tol();
            spec.simulation = simulate.then(|| sim.config());
            let out = common
                .out
                .as_deref()
                .ok_or_else(|| Error::Sweep("--out is required".into()))?;
            for path in sweep::run_sweep(&p, &spec, out, workers)? {
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Complexity {
            common,
            min_m,
            max_m,
        } => {
            let p = common.params()?;
            let opts = match common.models().last() {
                Some(Model::Reservation(o)) => *o,
                _ => ReservationOptions::default(),
            };
            let rows = complexity::report(&p, &opts, min_m..=max_m);
            common.emit("complexity.csv", &complexity::report_csv(&rows))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
