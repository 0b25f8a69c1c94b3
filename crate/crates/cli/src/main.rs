use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairtomo::network::{apply_filter, build_multiplex, calibrate_filter, ExportFormat, FilterCalibration};
use pairtomo::pipeline::{run_pipeline, RunConfig, StateSpec};
use pairtomo::sampler::{exact_counts, sample, CountsRecord, DEFAULT_SHOTS};
use pairtomo::scheduler::{generate_plan, naive_setting_counts, MeasurementPlan};
use pairtomo::{reconstruct, Error, TomographyNetwork};

#[derive(Parser)]
#[command(name = "pairtomo", version, about = "Pairwise tomography networks from logarithmically many measurement settings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the measurement plan for N qubits.
    Plan {
        #[arg(long)]
        n: usize,
        /// Write the plan JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate readout of every setting on a prepared state.
    Sample {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        shots: ShotArgs,
        /// Use this plan instead of generating one.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value = "counts.json")]
        out: PathBuf,
        /// Also write the statevector as a JSON array of [re, im] pairs.
        #[arg(long)]
        dump_state: Option<PathBuf>,
    },
    /// Rebuild every two-qubit state from a counts file.
    Reconstruct {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value = "network.json")]
        out: PathBuf,
    },
    /// Derive filter thresholds from the |0...0> baseline.
    Calibrate {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        shots: ShotArgs,
        #[arg(long, default_value = "calibration.json")]
        out: PathBuf,
    },
    /// Build (and optionally filter) the multiplex from a network file.
    Network {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "json")]
        format: Vec<Format>,
    },
    /// Prepare, sample, reconstruct, calibrate, filter and export in one run.
    Pipeline {
        #[command(flatten)]
        state: StateArgs,
        #[command(flatten)]
        shots: ShotArgs,
        /// Output directory.
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Extra per-layer exports; multiplex.json is always written.
        #[arg(long, value_enum, value_delimiter = ',', default_value = "json")]
        format: Vec<Format>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StateKind {
    W,
    Product,
    Xx,
    Collision,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Graphml,
    Dot,
}

impl From<Format> for ExportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ExportFormat::Json,
            Format::Graphml => ExportFormat::GraphMl,
            Format::Dot => ExportFormat::Dot,
        }
    }
}

#[derive(Args)]
struct StateArgs {
    #[arg(long, value_enum)]
    state: StateKind,
    /// Qubits (w) or spins (xx).
    #[arg(long)]
    n: Option<usize>,
    /// Magnetic field of the XX chain.
    #[arg(long)]
    b: Option<f64>,
    /// Emitter-ancilla pairs of the collision model.
    #[arg(long)]
    pairs: Option<usize>,
    /// Collision-model decay, λt.
    #[arg(long = "lambda-t")]
    lambda_t: Option<f64>,
    /// Collision angle in radians; 2π/3 = 2.094395102393.
    #[arg(long, default_value_t = 2.0 * std::f64::consts::FRAC_PI_3)]
    theta: f64,
    /// Product state, one of 0 1 + - per qubit.
    #[arg(long)]
    bits: Option<String>,
}

impl StateArgs {
    fn spec(&self) -> Result<StateSpec, Error> {
        let need = |name: &str| Error::InvalidArgument(format!("--state needs --{name}"));
        Ok(match self.state {
            StateKind::W => StateSpec::W {
                n_qubits: self.n.ok_or_else(|| need("n"))?,
            },
            StateKind::Product => StateSpec::Product {
                bits: self.bits.clone().ok_or_else(|| need("bits"))?,
            },
            StateKind::Xx => StateSpec::Xx {
                n_spins: self.n.ok_or_else(|| need("n"))?,
                field: self.b.ok_or_else(|| need("b"))?,
            },
            StateKind::Collision => StateSpec::Collision {
                pairs: self.pairs.ok_or_else(|| need("pairs"))?,
                lambda_t: self.lambda_t.ok_or_else(|| need("lambda-t"))?,
                theta: self.theta,
            },
        })
    }
}

#[derive(Args)]
struct ShotArgs {
    /// Shots per setting.
    #[arg(long, default_value_t = DEFAULT_SHOTS, conflicts_with = "exact")]
    shots: u64,
    /// Use exact outcome probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ShotArgs {
    fn shots(&self) -> Result<Option<u64>, Error> {
        match (self.exact, self.shots) {
            (true, _) => Ok(None),
            (false, 0) => Err(Error::InvalidArgument("--shots must be at least 1".into())),
            (false, s) => Ok(Some(s)),
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::InvalidArgument(_) | Error::Capacity { .. } | Error::UnknownLayer(_) => 2,
        Error::NonHermitian(_) | Error::Consistency(_) | Error::DegenerateGroundState { .. } => 4,
        _ => 3,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write(path: &Path, body: String) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(std::fs::write(path, body)?)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Plan { n, out } => {
            let plan = generate_plan(n)?;
            let naive = naive_setting_counts(n)?;
            println!("{} settings (naive parallel: {})", plan.len(), naive.parallel);
            if let Some(out) = out {
                write(&out, plan.to_json()?)?;
            }
        }
        Command::Sample {
            state,
            shots,
            plan,
            out,
            dump_state,
        } => {
            let spec = state.spec()?;
            let n_shots = shots.shots()?;
            let psi = spec.prepare()?;
            let plan = match plan {
                Some(p) => MeasurementPlan::from_json(&read(&p)?)?,
                None => generate_plan(psi.n_qubits())?,
            };
            if let Some(path) = dump_state {
                write(&path, psi.to_dump_json()?)?;
            }
            let counts = match n_shots {
                Some(s) => sample(&psi, &plan, s, shots.seed)?,
                None => exact_counts(&psi, &plan)?,
            };
            write(&out, counts.to_json()?)?;
            println!("{}: {} settings sampled", spec, counts.settings.len());
        }
        Command::Reconstruct { counts, plan, out } => {
            let counts = CountsRecord::from_json(&read(&counts)?)?;
            let plan = MeasurementPlan::from_json(&read(&plan)?)?;
            let net = reconstruct(&counts, &plan)?;
            write(&out, net.to_json()?)?;
            println!("{} pairs reconstructed", net.pairs.len());
        }
        Command::Calibrate { n, shots, out } => {
            let plan = generate_plan(n)?;
            let cal = calibrate_filter(n, &plan, shots.shots()?, shots.seed)?;
            write(&out, cal.to_json()?)?;
            for (layer, stats) in &cal.layers {
                println!("{layer}: threshold {:.6}", stats.threshold);
            }
        }
        Command::Network {
            network,
            calibration,
            out,
            format,
        } => {
            let net = TomographyNetwork::from_json(&read(&network)?)?;
            let mut mux = build_multiplex(&net)?;
            if let Some(path) = calibration {
                mux = apply_filter(&mux, &FilterCalibration::from_json(&read(&path)?)?)?;
            }
            for f in format {
                for path in mux.export(f.into(), &out)? {
                    println!("{}", path.display());
                }
            }
        }
        Command::Pipeline {
            state,
            shots,
            out,
            format,
        } => {
            let cfg = RunConfig {
                state: state.spec()?,
                shots: shots.shots()?,
                seed: shots.seed,
                formats: format.into_iter().map(Into::into).collect(),
            };
            cfg.validate()?;
            let artifacts = run_pipeline(&cfg)?;
            for path in artifacts.write(&cfg, &out)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
