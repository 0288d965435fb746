//! `explore`: run one configuration on one model and print a stats record.

use crate::common::{input, load_system, CliError, EngineOpts};
use clap::{Args, ValueEnum};
use porex_core::explorer::{
    count_full_paths, explore, explore_tree, export_dot, export_stats, LimitKind, StatsFormat,
};
use std::fs;
use std::path::PathBuf;

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum StatsArg {
    Csv,
    Json,
}

#[derive(Args)]
pub struct ExploreArgs {
    /// Model file in the .csys format
    pub model: PathBuf,
    #[command(flatten)]
    pub engine: EngineOpts,
    /// Explore a tree instead of a graph (no subsumption)
    #[arg(long)]
    pub tree: bool,
    /// Add the exact full-path count (big integer) to the record
    #[arg(long)]
    pub paths: bool,
    /// Also write the result in DOT format
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Output format for the stats record
    #[arg(long, value_enum, default_value_t = StatsArg::Csv)]
    pub stats: StatsArg,
}

pub fn run(args: &ExploreArgs) -> Result<(), CliError> {
    let sys = load_system(&args.model)?;
    let cfg = args.engine.config(&sys)?;
    let mut ex = if args.tree {
        explore_tree(&sys, &cfg)
    } else {
        explore(&sys, &cfg)
    };
    // a partial graph has no meaningful path count
    if args.paths && ex.interrupted.is_none() {
        let paths = count_full_paths(&ex.ts)
            .map_err(|e| input(format!("{}: {e}", args.model.display())))?;
        ex.stats.full_paths = Some(paths);
    }
    if let Some(path) = &args.dot {
        fs::write(path, export_dot(&sys, &ex.ts))
            .map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
    }
    let format = match args.stats {
        StatsArg::Csv => StatsFormat::Csv,
        StatsArg::Json => StatsFormat::Json,
    };
    print!("{}", export_stats(&ex.stats, format));
    match ex.interrupted {
        None => Ok(()),
        Some(kind) => Err(CliError::Limit(format!(
            "{} limit hit after {} nodes; the record above is partial",
            limit_name(kind),
            ex.stats.nodes
        ))),
    }
}

pub fn limit_name(kind: LimitKind) -> &'static str {
    match kind {
        LimitKind::Nodes => "node",
        LimitKind::Time => "time",
    }
}
