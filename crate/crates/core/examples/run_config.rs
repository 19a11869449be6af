//! Drives a subcommand from a TOML file, the same way the `jcqoc` binary does.
//!
//! cargo run --release --example run_config -- [subcommand] [config.toml]

use std::path::PathBuf;

use jcqoc::app::{run, Subcommand};
use jcqoc::config::RunConfig;

fn main() -> jcqoc::Result<()> {
    let mut args = std::env::args().skip(1);
    let subcommand: Subcommand = args.next().as_deref().unwrap_or("ground").parse()?;
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/config.toml")));
    let mut config = RunConfig::load(&path)?;
    config.output_dir = std::env::temp_dir().join("jcqoc-example");
    let summary = run(subcommand, &config)?;
    println!("{}", summary.headline);
    for f in &summary.files {
        println!("  {}", f.display());
    }
    Ok(())
}
