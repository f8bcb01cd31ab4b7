use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use almost_greedy::basis::{psi_spectrum, BlockPlan, PlanSpec};
use almost_greedy::experiments::{run_experiment, write_records, write_trace, ExperimentConfig, ExperimentKind};
use almost_greedy::greedy::{greedy_approximant_in, CoefficientList, OrthonormalSystem, PsiSystem, TraceOptions};
use almost_greedy::norms::NormEngine;
use almost_greedy::walsh::WalshSpectrum;
use almost_greedy::{Error, Result};

/// Explore the almost-greedy rotated Walsh basis.
#[derive(Debug, Parser)]
#[command(name = "agb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Block plans and basis elements.
    Basis {
        #[command(subcommand)]
        command: BasisCommand,
    },
    /// L_p norm of a Walsh series read from JSON.
    Norm {
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
        engine: EngineArg,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Greedy approximation of a coefficient list.
    Greedy {
        #[command(subcommand)]
        command: GreedyCommand,
    },
    /// Run one experiment from a config file and write results CSV.
    Experiment {
        #[arg(value_enum)]
        kind: KindArg,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum BasisCommand {
    /// Print block sizes, offsets and which growth conditions hold.
    Info {
        /// `desk`, `paper`, or a JSON plan file.
        #[arg(long)]
        plan: String,
    },
    /// Write the Walsh spectrum of element `i` of block `k`.
    Element {
        #[arg(long)]
        plan: String,
        #[arg(short = 'k')]
        block: usize,
        #[arg(short = 'i')]
        row: u128,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum GreedyCommand {
    /// Trace `‖f - G_m f‖_p` for `m = 0..=m-max`.
    Run {
        #[arg(long)]
        plan: String,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        m_max: usize,
        /// Repeat for several exponents.
        #[arg(long, default_values_t = [2.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 20_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EngineArg {
    Dense,
    Even,
    Mc,
    Auto,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Democracy,
    Quasigreedy,
    Partialsum,
    Khintchine,
    Almostgreedy,
    WalshBaseline,
}

impl From<KindArg> for ExperimentKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Democracy => ExperimentKind::Democracy,
            KindArg::Quasigreedy => ExperimentKind::QuasiGreedy,
            KindArg::Partialsum => ExperimentKind::PartialSum,
            KindArg::Khintchine => ExperimentKind::Khintchine,
            KindArg::Almostgreedy => ExperimentKind::AlmostGreedy,
            KindArg::WalshBaseline => ExperimentKind::WalshBaseline,
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load_plan(arg: &str) -> Result<BlockPlan> {
    PlanSpec::load(arg)
}

fn plan_info(plan: &BlockPlan) -> serde_json::Value {
    let blocks: Vec<_> = (1..=plan.horizon())
        .map(|k| {
            json!({
                "k": k,
                "g": plan.exponent(k),
                "N": plan.block_size(k).to_string(),
                "F": plan.offset(k).to_string(),
                "first_index": (plan.block_start(k) + 1).to_string(),
            })
        })
        .collect();
    json!({
        "plan": plan.label(),
        "blocks": blocks,
        "dimension": plan.dimension().to_string(),
        "depth": plan.offset(plan.horizon()).to_string(),
        "democracy_condition": plan.democracy_condition(),
        "lambda_separation": plan.lambda_separation(),
    })
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Basis { command } => match command {
            BasisCommand::Info { plan } => print_json(&plan_info(&load_plan(&plan)?)),
            BasisCommand::Element { plan, block, row, out } => {
                let plan = load_plan(&plan)?;
                let f = psi_spectrum(&plan, block, row)?;
                let mut w = create(&out)?;
                serde_json::to_writer_pretty(&mut w, &f)?;
                writeln!(w)?;
                w.flush()?;
                Ok(())
            }
        },
        Command::Norm {
            p,
            engine,
            samples,
            seed,
            input,
        } => {
            let f: WalshSpectrum = read_json(&input)?;
            let engine = match engine {
                EngineArg::Dense => NormEngine::Dense,
                EngineArg::Even => NormEngine::EvenSpectral,
                EngineArg::Mc => NormEngine::MonteCarlo { samples, seed },
                EngineArg::Auto => NormEngine::Auto { samples, seed },
            };
            print_json(&engine.lp(&f, p)?)
        }
        Command::Greedy {
            command:
                GreedyCommand::Run {
                    plan,
                    input,
                    m_max,
                    p,
                    samples,
                    seed,
                    out,
                },
        } => {
            let plan = load_plan(&plan)?;
            let coeffs: CoefficientList = read_json(&input)?;
            let system = PsiSystem::new(&plan);
            let f = system.synthesize(coeffs.entries())?;
            let opts = TraceOptions {
                p,
                engine: NormEngine::Auto { samples, seed },
            };
            let (_, trace) = greedy_approximant_in(&system, &f, m_max, &opts)?;
            let mut w = create(&out)?;
            write_trace(&mut w, &trace)?;
            w.flush()?;
            Ok(())
        }
        Command::Experiment { kind, config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(kind.into(), &cfg)?;
            let mut w = create(&out)?;
            write_records(&mut w, &report.records)?;
            w.flush()?;
            print_json(&report)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_resource_limit() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
