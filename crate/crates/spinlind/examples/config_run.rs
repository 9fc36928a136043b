//! Parse a run configuration and execute it, as the command-line tool does.
//!
//!     cargo run --example config_run -- configs/two_spin.conf

use spinlind::config::RunConfig;

fn main() -> spinlind::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/configs/naphthalene.conf").into());
    let cfg = RunConfig::parse(&std::fs::read_to_string(&path)?)?;
    let out = std::env::temp_dir().join("spinlind-example");
    let summary = spinlind::run::run(&cfg, &out)?;
    println!("{:?}: {}", summary.mode, summary.message);
    for a in summary.artifacts {
        println!("  {}", a.display());
    }
    Ok(())
}
