//! `cbass`: score videos, aggregate annotations, select events, sweep and
//! evaluate, or serve the annotation API.

use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbass_core::pipeline::{
    cmd_aggregate, cmd_evaluate, cmd_score, cmd_select, cmd_sweep, AnnotatorReportChoice,
};
use cbass_core::sweep::SweepResult;
use cbass_core::{Dataset, Exec, Method, ModelId, SelectionParams, SplitId};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cbass", version, about = "Event extraction and multi-annotator evaluation")]
struct Cli {
    /// Dataset root (videos/, scores/, annotations/, splits/).
    #[arg(long, global = true, default_value = ".")]
    dataset: PathBuf,

    /// Output directory; defaults to the dataset root.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Run every loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the background baseline on a split's training videos and score every video.
    Score {
        #[arg(long)]
        split: SplitId,
        #[arg(long, default_value = "baseline")]
        model: String,
    },
    /// Write soft labels, consensus intervals and the kappa matrix.
    Aggregate,
    /// Select one event per video with a fixed method and parameter.
    Select {
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        method: Method,
        #[arg(long, value_parser = unit_interval)]
        param: f64,
    },
    /// Sweep selection parameters against the consensus labels.
    Sweep {
        /// Repeatable; both methods when omitted.
        #[arg(long)]
        method: Vec<Method>,
    },
    /// Write all reports and plot grids.
    Evaluate {
        /// Split of the predictions used for the per-annotator report.
        #[arg(long)]
        split: Option<SplitId>,
        /// Model used for the per-annotator report.
        #[arg(long)]
        model: Option<String>,
        /// Method used for the per-annotator report, at its best swept parameter.
        #[arg(long)]
        method: Option<Method>,
    },
    /// Serve the annotation API and, optionally, a static UI bundle.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory with the built UI, served at `/`.
        #[arg(long)]
        ui: Option<PathBuf>,
    },
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

struct Failure {
    kind: &'static str,
    msg: String,
}

impl From<cbass_core::Error> for Failure {
    fn from(e: cbass_core::Error) -> Self {
        Failure {
            kind: e.kind(),
            msg: e.to_string(),
        }
    }
}

fn print_sweeps(results: &[SweepResult]) {
    for r in results {
        println!(
            "{} {} {} {} best_param={:.2} tiou={}",
            r.split_id, r.model_id, r.method, r.scene, r.best_param, r.best_mean_tiou
        );
    }
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn serve(dataset: &Path, host: IpAddr, port: u16, ui: Option<PathBuf>) -> Result<(), Failure> {
    let state = cbass_server::AppState::open(dataset, ui);
    if let Some((kind, msg)) = state.load_error() {
        return Err(Failure {
            kind,
            msg: msg.to_string(),
        });
    }
    let addr = SocketAddr::new(host, port);
    let io = |e: std::io::Error| Failure {
        kind: "Io",
        msg: format!("{addr}: {e}"),
    };
    let runtime = tokio::runtime::Runtime::new().map_err(io)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.map_err(io)?;
        println!("listening on http://{}", listener.local_addr().map_err(io)?);
        cbass_server::serve(state, listener).await.map_err(io)
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exec = if cli.sequential { Exec::Sequential } else { Exec::default() };
    let out = cli.out.clone().unwrap_or_else(|| cli.dataset.clone());
    let load = || Dataset::load(&cli.dataset);
    match cli.command {
        Command::Score { split, model } => {
            print_written(&cmd_score(&load()?, &out, split, &model, exec)?);
        }
        Command::Aggregate => print_written(&cmd_aggregate(&load()?, &out, exec)?),
        Command::Select { model, method, param } => {
            let params = SelectionParams { method, param };
            print_written(&[cmd_select(&load()?, &out, &model, params)?]);
        }
        Command::Sweep { method } => {
            let methods = if method.is_empty() { Method::ALL.to_vec() } else { method };
            print_sweeps(&cmd_sweep(&load()?, &out, &methods, exec)?);
        }
        Command::Evaluate { split, model, method } => {
            let choice = AnnotatorReportChoice { split, model, method };
            print_sweeps(&cmd_evaluate(&load()?, &out, &choice, exec)?.sweeps);
        }
        Command::Serve { port, host, ui } => serve(&cli.dataset, host, port, ui)?,
    }
    Ok(())
}

/// Keeps the diagnostic on one line.
fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string();
            let first = first.lines().next().unwrap_or("");
            eprintln!("error kind=Usage msg={}", one_line(first.trim_start_matches("error: ")));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error kind={} msg={}", f.kind, one_line(&f.msg));
            ExitCode::FAILURE
        }
    }
}
