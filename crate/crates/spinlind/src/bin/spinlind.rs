use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spinlind::config::{Mode, RunConfig};
use spinlind::Error;

/// Continuous-wave magnetic resonance of multispin systems.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overridden by SPINLIND_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured mode: spectrum, propagate, qubit, acp, verify.
    #[arg(long)]
    mode: Option<String>,
    /// Reserved; every mode is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    // clap would exit with 2 on usage errors, which is reserved for accuracy failures
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> spinlind::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(m) = &args.mode {
        cfg.mode = m.parse::<Mode>()?;
        cfg.validate()?;
    }
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    let out = std::env::var_os("SPINLIND_OUT")
        .map(PathBuf::from)
        .or_else(|| args.out.clone())
        .unwrap_or_else(|| cfg.output.dir.clone());
    if args.verbose {
        eprintln!("mode {:?}, output {}", cfg.mode, out.display());
        if let Some(w) = cfg.field.as_ref().and_then(|f| f.weak_field_warning()) {
            eprintln!("warning: {w}");
        }
    }
    let summary = spinlind::run::run(&cfg, &out).map_err(|e| {
        if let Error::Accuracy(_) = e {
            eprintln!("artifacts written to {}", out.display());
        }
        e
    })?;
    println!("{}", summary.message);
    if args.verbose {
        for p in &summary.artifacts {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}
