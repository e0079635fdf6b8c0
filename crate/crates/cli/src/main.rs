mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use commands::CommandError;
use config::{ConfigError, RunConfig, Settings};
use output::{emit, Metadata};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "paraxial", version, about = "Paraxial boundary-integral diffraction by elongated bodies of revolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Plain `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Output directory for CSV and JSON artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Relative tolerance of the quadratures (same as `--set tolerance=`).
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Relative absorption Im k / Re k (same as `--set eta=`).
    #[arg(long, global = true)]
    eta: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the paraxial small parameters; nonzero exit on a hard failure.
    Validate,
    /// Modal kernel in closed form against angular quadrature.
    Kernel,
    /// Surface field by the configured solver.
    Solve,
    /// Closed-form cone surface field.
    Analytic,
    /// Scattered and total field over the target (x, r) grid.
    Reconstruct,
    /// Far-field amplitude T over the configured observation angles.
    Directivity,
    /// Scattered power on transverse planes against −2 Re T.
    OpticalTheorem,
    /// A named experiment.
    Preset { name: Preset },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Preset {
    Fig4,
    ConeVsAnalytic,
    Penumbra,
}

impl Preset {
    fn key(self) -> &'static str {
        match self {
            Preset::Fig4 => "fig4",
            Preset::ConeVsAnalytic => "cone-vs-analytic",
            Preset::Penumbra => "penumbra",
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("writing output: {0}")]
    Io(#[from] std::io::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Command(CommandError::Usage(_)) => 2,
            _ => 1,
        }
    }
}

fn settings(cli: &Cli) -> Result<Settings, ConfigError> {
    let mut s = Settings::default();
    if let Command::Preset { name } = &cli.command {
        for (k, v) in commands::preset_base(name.key()).unwrap_or(&[]) {
            s.set(k, v)?;
        }
    }
    if let Some(p) = &cli.config {
        let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
            path: p.display().to_string(),
            source,
        })?;
        s.apply_text(&text)?;
    }
    for (i, o) in cli.set.iter().enumerate() {
        let (k, v) = o.split_once('=').ok_or_else(|| ConfigError::Syntax { line: i + 1, text: o.clone() })?;
        s.set(k.trim(), v.trim())?;
    }
    if let Some(t) = cli.tolerance {
        s.set("tolerance", &t.to_string())?;
    }
    if let Some(e) = cli.eta {
        s.set("eta", &e.to_string())?;
    }
    Ok(s)
}

fn run(cli: &Cli) -> Result<u8, AppError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| AppError::Threads(e.to_string()))?;
    }
    let cfg = RunConfig::from_settings(settings(cli)?)?;
    let command = match &cli.command {
        Command::Validate => "validate".to_string(),
        Command::Kernel => "kernel".to_string(),
        Command::Solve => "solve".to_string(),
        Command::Analytic => "analytic".to_string(),
        Command::Reconstruct => "reconstruct".to_string(),
        Command::Directivity => "directivity".to_string(),
        Command::OpticalTheorem => "optical-theorem".to_string(),
        Command::Preset { name } => format!("preset {}", name.key()),
    };
    let mut meta = Metadata {
        program: "paraxial".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config_sha256: cfg.settings.hash(),
        tolerance: cfg.tolerance,
        eta: cfg.wave.eta(),
        extrapolated_etas: cfg.extrapolate.clone(),
        notes: Vec::new(),
    };
    let mut status = 0;
    let tables = match &cli.command {
        Command::Validate => {
            let (report, table) = commands::validate(&cfg);
            for c in &report.checks {
                println!("{:<16} {:>12.6e}  threshold {:.3}  {:?}", c.name, c.value, c.threshold, c.verdict);
            }
            println!("fock length {:.6e}", report.fock_length);
            meta.notes.push("condition 0 = incidence angle, 1 = surface slope, 2 = fock angle; verdict 0 pass, 1 warn, 2 fail".into());
            std::fs::create_dir_all(&cli.out)?;
            std::fs::write(cli.out.join("validate_report.json"), serde_json::to_vec_pretty(&report).map_err(std::io::Error::other)?)?;
            status = match report.worst() {
                paraxial::geometry::Verdict::Fail => 1,
                _ => 0,
            };
            vec![("validate".to_string(), table)]
        }
        Command::Kernel => commands::kernel(&cfg)?,
        Command::Solve => commands::solve(&cfg)?,
        Command::Analytic => commands::analytic(&cfg)?,
        Command::Reconstruct => commands::reconstruct(&cfg)?,
        Command::Directivity => commands::directivity(&cfg)?,
        Command::OpticalTheorem => commands::optical(&cfg)?,
        Command::Preset { name } => match name {
            Preset::Fig4 => commands::fig4(&cfg)?,
            Preset::ConeVsAnalytic => commands::cone_vs_analytic(&cfg)?,
            Preset::Penumbra => commands::penumbra(&cfg)?,
        },
    };
    for (name, table) in &tables {
        let path = emit(&cli.out, name, &meta, table)?;
        println!("wrote {} ({} rows)", path.display(), table.rows.len());
    }
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
