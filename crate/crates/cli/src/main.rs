//! `mcflab`: run scenario configs, whole suites, and aggregate verdicts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mcflab::lab::{emit_report, parse_config, run_scenario, Expectations, Report, ScenarioConfig};
use mcflab::{Error, Verdict};
use rayon::prelude::*;
use serde_json::json;
use walkdir::WalkDir;

/// Environment variable naming the output root.
const LAB_OUT: &str = "LAB_OUT";
const DEFAULT_OUT: &str = "lab_out";

#[derive(Parser)]
#[command(name = "mcflab", version, about = "Mean curvature flow intersection laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Run every `*.json` config in a directory and report on the verdicts.
    Suite {
        dir: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Aggregate every `verdict.json` below a directory.
    Report {
        dir: PathBuf,
        /// Expectations table to use instead of the bundled one.
        #[arg(long)]
        expectations: Option<PathBuf>,
    },
}

#[derive(clap::Args, Clone)]
struct RunOpts {
    /// Output root; defaults to $LAB_OUT, then the config's output_dir, then ./lab_out.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write SVG frames.
    #[arg(long)]
    frames: bool,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
}

/// A failure that ends the command with a structured error document.
struct Failure {
    error: Error,
    config: Option<PathBuf>,
}

impl Failure {
    fn new(error: Error, config: Option<&Path>) -> Self {
        Failure { error, config: config.map(Path::to_path_buf) }
    }

    fn json(&self) -> serde_json::Value {
        json!({
            "schema": mcflab::verdict::SCHEMA,
            "error": {
                "code": self.error.code(),
                "message": self.error.to_string(),
            },
            "config": self.config.as_ref().map(|p| p.display().to_string()),
        })
    }

    fn exit_code(&self) -> u8 {
        match self.error {
            Error::Config(_) => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}

fn output_root(opts: &RunOpts, config: Option<&ScenarioConfig>) -> PathBuf {
    if let Some(p) = &opts.out {
        return p.clone();
    }
    if let Some(p) = std::env::var_os(LAB_OUT).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    config.and_then(|c| c.output_dir.as_ref()).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn run_name(path: &Path) -> String {
    path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned())
}

fn load(path: &Path, frames: bool) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(e.into(), Some(path)))?;
    let mut cfg = parse_config(&text).map_err(|e| Failure::new(e, Some(path)))?;
    cfg.emit_frames |= frames;
    Ok(cfg)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Failure::new(Error::Config(format!("workers: {e}")), None))
}

/// Run one config into `root/<name>`; on failure also leave `error.json` there.
fn run_one(path: &Path, cfg: &ScenarioConfig, root: &Path) -> Result<Verdict, Failure> {
    let dir = root.join(run_name(path));
    match run_scenario(cfg, &dir) {
        Ok(out) => Ok(out.verdict),
        Err(e) => {
            let f = Failure::new(e, Some(path));
            let _ = fs::create_dir_all(&dir);
            let _ = fs::write(dir.join("error.json"), serde_json::to_string_pretty(&f.json()).unwrap_or_default());
            Err(f)
        }
    }
}

fn cmd_run(config: &Path, opts: &RunOpts) -> Result<(), Failure> {
    let cfg = load(config, opts.frames)?;
    let root = output_root(opts, Some(&cfg));
    let verdict = pool(opts.workers)?.install(|| run_one(config, &cfg, &root))?;
    println!("{}", verdict.to_json_pretty());
    Ok(())
}

fn write_report(report: &Report, dir: &Path) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::new(e.into(), None);
    fs::create_dir_all(dir).map_err(io)?;
    fs::write(dir.join("report.json"), report.to_json_pretty()).map_err(io)?;
    fs::write(dir.join("report.txt"), report.table()).map_err(io)?;
    print!("{}", report.table());
    Ok(())
}

fn cmd_suite(dir: &Path, opts: &RunOpts) -> Result<(), Failure> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::new(e.into(), Some(dir)))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Failure::new(Error::EmptyVerdictList, Some(dir)));
    }
    let root = output_root(opts, None);
    let results: Vec<(PathBuf, Result<Verdict, Failure>)> = pool(opts.workers)?.install(|| {
        paths.par_iter().map(|p| (p.clone(), load(p, opts.frames).and_then(|cfg| run_one(p, &cfg, &root)))).collect()
    });
    let mut verdicts = Vec::new();
    let mut first_failure = None;
    for (p, r) in results {
        match r {
            Ok(v) => verdicts.push((run_name(&p), v)),
            // the first failure is reported by main
            Err(f) if first_failure.is_none() => first_failure = Some(f),
            Err(f) => eprintln!("{}", f.json()),
        }
    }
    if !verdicts.is_empty() {
        let report = emit_report(&verdicts, &Expectations::bundled()).map_err(|e| Failure::new(e, None))?;
        write_report(&report, &root)?;
    }
    first_failure.map_or(Ok(()), Err)
}

fn cmd_report(dir: &Path, expectations: Option<&Path>) -> Result<(), Failure> {
    let table = match expectations {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::new(e.into(), Some(p)))?;
            serde_json::from_str(&text).map_err(|e| Failure::new(Error::Config(e.to_string()), Some(p)))?
        }
        None => Expectations::bundled(),
    };
    let mut verdicts = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| Failure::new(Error::Io(e.to_string()), Some(dir)))?;
        if entry.file_name() != "verdict.json" {
            continue;
        }
        let path = entry.path();
        let text = fs::read_to_string(path).map_err(|e| Failure::new(e.into(), Some(path)))?;
        let v: Verdict = serde_json::from_str(&text)
            .map_err(|e| Failure::new(Error::Config(format!("verdict: {e}")), Some(path)))?;
        let label = path
            .parent()
            .and_then(|p| p.strip_prefix(dir).ok())
            .map(|p| p.display().to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| ".".to_string());
        verdicts.push((label, v));
    }
    let report = emit_report(&verdicts, &table).map_err(|e| Failure::new(e, Some(dir)))?;
    write_report(&report, dir)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { config, opts } => cmd_run(config, opts),
        Command::Suite { dir, opts } => cmd_suite(dir, opts),
        Command::Report { dir, expectations } => cmd_report(dir, expectations.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.json());
            ExitCode::from(f.exit_code())
        }
    }
}
