use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use foldray_cli::commands::{
    format_report, load_config, load_scene_arg, reach, run_trace, summary_line, ReportFormat,
};
use foldray_cli::serve::{serve, ServeOptions};

/// Folding-ray selection engine.
#[derive(Parser)]
#[command(name = "foldray", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay an input trace and print the event log.
    Run {
        /// Scene file, or the name of a bundled scene.
        #[arg(long)]
        scene: String,
        #[arg(long)]
        trace: PathBuf,
        /// Write the event log here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON session config; omitted fields keep their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Minimum folds needed to select each target, by grid search.
    Reach {
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 2)]
        max_folds: usize,
        /// Grid spacing in meters.
        #[arg(long, default_value_t = 0.25)]
        grid: f64,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Print the SHA-256 digest of the scene's canonical form.
    Digest {
        #[arg(long)]
        scene: String,
    },
    /// Serve sessions over WebSocket.
    Serve {
        #[arg(long)]
        scene: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Static files answered for plain HTTP requests.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scene,
            trace,
            out,
            config,
        } => {
            let scene = load_scene_arg(&scene)?;
            let config = load_config(config.as_deref())?;
            let text = std::fs::read_to_string(&trace)
                .with_context(|| format!("reading trace {}", trace.display()))?;
            let mut sink: Box<dyn Write> = match &out {
                Some(p) => Box::new(BufWriter::new(
                    File::create(p).with_context(|| format!("creating {}", p.display()))?,
                )),
                None => Box::new(io::stdout().lock()),
            };
            let summary = run_trace(scene, config, &text, &mut sink)?;
            eprintln!("{}", summary_line(&summary));
        }
        Command::Reach {
            scene,
            max_folds,
            grid,
            format,
        } => {
            let scene = load_scene_arg(&scene)?;
            let report = reach(&scene, max_folds, grid)?;
            print!("{}", format_report(&scene, &report, format));
        }
        Command::Digest { scene } => {
            println!("{}", load_scene_arg(&scene)?.digest());
        }
        Command::Serve {
            scene,
            port,
            host,
            ui_dir,
            config,
        } => {
            let opts = ServeOptions {
                scene: Arc::new(load_scene_arg(&scene)?),
                config: load_config(config.as_deref())?,
                ui_dir,
            };
            let listener = TcpListener::bind((host.as_str(), port))
                .with_context(|| format!("binding {host}:{port}"))?;
            eprintln!("serving on ws://{}", listener.local_addr()?);
            serve(listener, opts)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
