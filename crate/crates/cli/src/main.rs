use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use respert::check::{run_oracle_check, OracleCheckConfig};
use respert::experiment::{run_experiment, ExperimentConfig, ExperimentKind};
use respert::models::{sample_er, sample_sbm};
use respert::{rd_distance, rp_distance, DistanceParams, Error, Graph};

const EXIT_INPUT: u8 = 1;
const EXIT_CHECK: u8 = 2;

#[derive(Parser)]
#[command(name = "respert", version, about = "Resistance distances and community-merge detection on growing graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random graph and write it as an edge list.
    Simulate {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: usize,
        /// Edge probability (within-community for sbm).
        #[arg(long)]
        p: f64,
        /// Cross-community probability, required for sbm.
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Resistance distances between two edge-list files.
    Distance {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        /// Also report the element-wise p-norm distance (`inf` for max).
        #[arg(long)]
        p_norm: Option<f64>,
    },
    /// Run an experiment described by a JSON config.
    Experiment {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compare the numerical resistance code with exact references.
    OracleCheck {
        /// Largest graph size used by both suites.
        #[arg(long)]
        n_max: Option<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Er,
    Sbm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Timeseries,
    Separation,
    Power,
}

impl From<Kind> for ExperimentKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Timeseries => ExperimentKind::Timeseries,
            Kind::Separation => ExperimentKind::Separation,
            Kind::Power => ExperimentKind::Power,
        }
    }
}

fn read_graph(path: &Path) -> respert::Result<Graph> {
    let file = File::open(path)
        .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
    Graph::read_edge_list(BufReader::new(file))
}

/// Loads the config file; `kind` may be omitted there, the subcommand
/// argument decides it. Flags override file values.
fn load_config(
    kind: Kind,
    path: &Path,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
) -> respert::Result<ExperimentConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
    obj.insert("kind".into(), serde_json::to_value(ExperimentKind::from(kind))?);
    let mut cfg: ExperimentConfig = serde_json::from_value(value)?;
    if let Some(dir) = out_dir {
        cfg.out_dir = dir;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> respert::Result<ExitCode> {
    match cli.command {
        Command::Simulate { model, n, p, q, seed, out } => {
            let g = match (model, q) {
                (Model::Er, None) => sample_er(n, p, seed)?,
                (Model::Er, Some(_)) => {
                    return Err(Error::InvalidParameter("--q applies only to --model sbm".into()))
                }
                (Model::Sbm, Some(q)) => sample_sbm(n, p, q, seed)?,
                (Model::Sbm, None) => {
                    return Err(Error::InvalidParameter("--model sbm requires --q".into()))
                }
            };
            let mut w = BufWriter::new(File::create(&out)?);
            g.write_edge_list(&mut w)?;
            w.flush()?;
            eprintln!("wrote {} vertices, {} edges to {}", n, g.edge_count(), out.display());
        }
        Command::Distance { a, b, beta, p_norm } => {
            let params = DistanceParams::new(beta)?;
            let (ga, gb) = (read_graph(&a)?, read_graph(&b)?);
            println!("rd\t{}", rd_distance(&ga, &gb, params));
            if let Some(p) = p_norm {
                println!("rp\t{}", rp_distance(&ga, &gb, p)?);
            }
        }
        Command::Experiment { kind, config, out_dir, seed, workers } => {
            let cfg = load_config(kind, &config, out_dir, seed, workers)?;
            let (_, files) = run_experiment(&cfg)?;
            for f in files {
                println!("{}", f.display());
            }
        }
        Command::OracleCheck { n_max, trials, seed, corrupt } => {
            let mut cfg = OracleCheckConfig { trials, seed, corrupt, ..Default::default() };
            if let Some(k) = n_max {
                if k < 2 {
                    return Err(Error::InvalidParameter(format!("--n-max must be >= 2, got {k}")));
                }
                cfg.oracle_n_max = k;
                cfg.update_n_max = k;
            }
            let report = run_oracle_check(&cfg);
            println!("{}", report.summary());
            for f in report.failures.iter().take(10) {
                eprintln!("{f}");
            }
            if !report.passed() {
                return Ok(ExitCode::from(EXIT_CHECK));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
