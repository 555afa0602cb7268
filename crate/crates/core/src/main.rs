use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crt_records::experiment::{self, ExperimentConfig, ExperimentKind};
use crt_records::fmt::g17;
use crt_records::Result;

/// Run one verification experiment and write its CSV artifacts.
#[derive(Debug, Parser)]
#[command(name = "crt-records", version)]
struct Cli {
    /// densities | lineartest | martingale | lgn | fluctuation | discrete
    experiment: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Comma-separated sizes
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "m-ref")]
    m_ref: Option<usize>,
    /// Comma-separated growth checkpoints
    #[arg(long)]
    checkpoints: Option<String>,
    /// Worker threads; 0 uses all cores
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of `key = value` lines, applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` settings (thresholds, q, t, families, ...)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let mut c = ExperimentConfig::new(kind);
    if let Some(path) = &cli.config {
        c.apply_text(&std::fs::read_to_string(path)?)?;
        c.experiment = kind;
    }
    let flags = [
        ("seed", cli.seed.map(|v| v.to_string())),
        ("replicates", cli.replicates.map(|v| v.to_string())),
        ("n", cli.n.clone()),
        ("m_ref", cli.m_ref.map(|v| v.to_string())),
        ("checkpoints", cli.checkpoints.clone()),
        ("threads", cli.threads.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            c.set(k, &v)?;
        }
    }
    if let Some(out) = &cli.out {
        c.out_dir = out.clone();
    }
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| crt_records::Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        c.set(k, v)?;
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("crt-records: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match experiment::run(&config).and_then(|o| o.write(&config.out_dir).map(|_| o)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("crt-records: {e}");
            return ExitCode::from(2);
        }
    };
    // a closed pipe on stdout is not an error worth failing the run over
    let mut out = std::io::stdout().lock();
    for r in &outcome.reports {
        let _ = writeln!(
            out,
            "{} {:<44} estimate={} stderr={} statistic={} p={}",
            match (r.is_informational(), r.pass) {
                (true, _) => "INFO",
                (false, true) => "PASS",
                (false, false) => "FAIL",
            },
            r.name,
            g17(r.estimate),
            g17(r.stderr),
            g17(r.statistic),
            g17(r.p_value)
        );
    }
    for a in &outcome.artifacts {
        let _ = writeln!(out, "wrote {}", config.out_dir.join(&a.file_name).display());
    }
    if outcome.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
