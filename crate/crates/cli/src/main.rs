use assocfam_cli::config::{parse_grid, parse_theta_list, Angle};
use assocfam_cli::{run_pipeline, select_actions, Mode, Overrides, PipelineConfig};
use clap::{Parser, Subcommand};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "assocfam", version, about = "Higher fundamental forms and associated families of elliptic surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Grid size NxM.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,
    /// Comma-separated angles, e.g. "pi/6,pi/3".
    #[arg(long, global = true, value_parser = thetas)]
    theta: Option<Thetas>,
    #[arg(long, global = true)]
    ell: Option<usize>,
    /// Output directory for report.json and CSV side files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long = "tol-circle", global = true)]
    tol_circle: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Clone)]
struct Thetas(Vec<Angle>);

fn thetas(text: &str) -> Result<Thetas, String> {
    parse_theta_list(text).map(Thetas)
}

#[derive(Subcommand)]
enum Command {
    /// Run every action in the config.
    Run { config: PathBuf },
    Analyze { config: PathBuf },
    Family { config: PathBuf },
    Ranktwo { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, path) = match &cli.command {
        Command::Run { config } => (Mode::Run, config),
        Command::Analyze { config } => (Mode::Analyze, config),
        Command::Family { config } => (Mode::Family, config),
        Command::Ranktwo { config } => (Mode::Ranktwo, config),
    };
    let overrides = Overrides {
        grid: cli.grid,
        theta: cli.theta.clone().map(|t| t.0),
        ell: cli.ell,
        out: cli.out.clone(),
        tol_circle: cli.tol_circle,
        seed: cli.seed,
    };
    let cfg = PipelineConfig::load(path).and_then(|mut cfg| {
        select_actions(&mut cfg, mode, &overrides)?;
        cfg.apply(&overrides);
        cfg.validate()?;
        Ok(cfg)
    });
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let (report, outcome) = run_pipeline(&cfg);
    let json = report.to_json();
    match &cfg.output.dir {
        Some(dir) => {
            let path = dir.join("report.json");
            if let Err(e) = std::fs::write(&path, json + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(1);
            }
            eprintln!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = writeln!(out, "{json}") {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
        }
    }
    if let assocfam_cli::Outcome::Io(msg) = &outcome {
        eprintln!("error: {msg}");
    }
    if let Some(g) = &report.failed_gate {
        eprintln!("gate failed: {} ({})", g.gate, g.message);
    }
    ExitCode::from(outcome.exit_code() as u8)
}
