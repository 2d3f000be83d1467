use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use gordon_kit::config::{Format, Mode, OutputSpec};
use gordon_kit::{parse_config, run, KitError};

/// Desk-scale certificates of eigenvalue-free disks for one-dimensional
/// operators with nearly periodic coefficients.
#[derive(Parser, Debug)]
#[command(name = "gordon-kit", version, about)]
struct Cli {
    /// What to compute.
    #[arg(value_enum)]
    mode: Mode,

    /// Configuration document (JSON canonical, TOML accepted).
    #[arg(long)]
    config: PathBuf,

    /// Output path (defaults to the config's output.path, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format (defaults to the config's output.format, else csv).
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Worker threads for spectral-grid scans.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(certified) => {
            if certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("gordon-kit: {e}");
            ExitCode::from(1)
        }
    }
}

fn main_inner() -> Result<bool, KitError> {
    let cli = Cli::parse();
    let text = std::fs::read_to_string(&cli.config)?;
    let config = parse_config(&text)?;
    if let Some(mode_in_config) = config.mode {
        if mode_in_config != cli.mode {
            return Err(KitError::Semantic {
                field: "mode".into(),
                msg: format!(
                    "config says {} but the command line says {}",
                    mode_in_config.as_str(),
                    cli.mode.as_str()
                ),
            });
        }
    }
    let base_dir = cli
        .config
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));

    let threads = cli.threads.or(config.threads);
    let outcome = match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| KitError::Run(e.to_string()))?
            .install(|| run(cli.mode, &config, &base_dir)),
        _ => run(cli.mode, &config, &base_dir),
    }?;

    let defaults = OutputSpec { path: None, format: Format::Csv };
    let spec = config.output.as_ref().unwrap_or(&defaults);
    let path = cli
        .out
        .clone()
        .or_else(|| spec.path.as_ref().map(|p| base_dir.join(p)));
    let format = cli.format.unwrap_or(spec.format);

    let body = match format {
        Format::Csv => outcome.report.to_csv(),
        Format::Json => outcome.report.to_json(),
    };

    match (&outcome.artifact, &path) {
        (Some(artifact), Some(p)) => {
            // generator modes: the artifact is the file product, the report
            // goes to stdout
            std::fs::write(p, artifact)?;
            print!("{body}");
        }
        (Some(artifact), None) => {
            print!("{artifact}");
        }
        (None, Some(p)) => {
            std::fs::write(p, body)?;
        }
        (None, None) => {
            print!("{body}");
        }
    }
    std::io::stdout().flush()?;
    Ok(outcome.certified)
}
