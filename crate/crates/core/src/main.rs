//! `hmt` command-line entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hmt::analysis::{NoiseMode, QuadraticConstants};
use hmt::cli::{run_figure, ExperimentConfig, Figure};
use hmt::montecarlo::Executor;
use hmt::selftest::{run_selftest, SelftestHooks};
use hmt::HmtError;

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_FLAGS: u8 = 3;
const EXIT_SELFTEST: u8 = 4;

#[derive(Parser)]
#[command(name = "hmt", version, about = "HMT Max-SINR receiver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Configuration file; a CSV written by this tool also works.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Noise normalisation (overrides the config).
    #[arg(long, global = true)]
    mode: Option<Mode>,

    /// Constants of the closed-form delay (overrides the config).
    #[arg(long, global = true)]
    eq26: Option<Eq26>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Selftest,
    Sweep,
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    Paper,
    Physical,
}

#[derive(ValueEnum, Clone, Copy)]
enum Eq26 {
    Printed,
    Derived,
}

fn load_config(cli: &Cli, figure: Figure) -> Result<ExperimentConfig, HmtError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HmtError::Config {
                line: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.figure = figure;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(mode) = cli.mode {
        cfg.noise_mode = match mode {
            Mode::Paper => NoiseMode::Paper,
            Mode::Physical => NoiseMode::Physical,
        };
    }
    if let Some(c) = cli.eq26 {
        cfg.eq26 = match c {
            Eq26::Printed => QuadraticConstants::Printed,
            Eq26::Derived => QuadraticConstants::Derived,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exit_for(err: &HmtError) -> u8 {
    match err {
        HmtError::Config { .. } => EXIT_CONFIG,
        _ => EXIT_OTHER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = match Executor::new(cli.workers) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_OTHER);
        }
    };

    let figure = match cli.command {
        Command::Selftest => {
            let report = run_selftest(&SelftestHooks::default(), &exec);
            if let Err(e) = emit(&cli.out, &report.to_string()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_OTHER);
            }
            if report.passed() {
                return ExitCode::SUCCESS;
            }
            eprintln!("selftest failed: {}", report.failed_ids().join(", "));
            return ExitCode::from(EXIT_SELFTEST);
        }
        Command::Fig2 => Figure::Fig2,
        Command::Fig3 => Figure::Fig3,
        Command::Fig4 => Figure::Fig4,
        Command::Fig5 => Figure::Fig5,
        Command::Sweep => Figure::Sweep,
    };

    let cfg = match load_config(&cli, figure) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    let table = match run_figure(&cfg, &exec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_for(&e));
        }
    };
    if let Err(e) = emit(&cli.out, &table.render(&cfg)) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_OTHER);
    }
    if table.has_failures {
        eprintln!("warning: some points carry failure flags; see the status column");
        return ExitCode::from(EXIT_FLAGS);
    }
    ExitCode::SUCCESS
}
