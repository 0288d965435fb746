//! `debug`: print the heuristic fixpoints round by round, for studying why
//! an exploration keeps or prunes an action.

use crate::common::{fmt_set, input, load_system, CliError};
use clap::{Args, Subcommand};
use porex_core::heuristics::{build_index, closure_trace, pifs_trace};
use porex_core::{ActionSet, System};
use std::path::PathBuf;

#[derive(Args)]
pub struct DebugArgs {
    #[command(subcommand)]
    what: What,
}

#[derive(Subcommand)]
enum What {
    /// Test whether some maximal run from the initial state begins entirely
    /// inside a candidate set, growing the set round by round
    Pifs {
        /// Model file in the .csys format
        model: PathBuf,
        /// Comma-separated action names forming the candidate set
        #[arg(long)]
        set: String,
    },
    /// Grow the covering closure of one action at the initial state
    Closure {
        /// Model file in the .csys format
        model: PathBuf,
        /// Action seeding the closure
        #[arg(long)]
        action: String,
    },
}

pub fn run(args: &DebugArgs) -> Result<(), CliError> {
    match &args.what {
        What::Pifs { model, set } => {
            let sys = load_system(model)?;
            let idx = build_index(&sys);
            let s = sys.initial_state();
            let b = parse_set(&sys, set)?;
            let (ok, grown, rounds) = pifs_trace(&sys, &idx, &s, &b);
            println!("pifs {} at the initial state of {}", fmt_set(&sys, &b), sys.name);
            for (i, r) in rounds.iter().enumerate() {
                println!(
                    "round {}: start={} wraps={} added={}",
                    i + 1,
                    fmt_set(&sys, &r.start),
                    if r.wraps { "yes" } else { "no" },
                    fmt_set(&sys, &r.added)
                );
            }
            if ok {
                println!("accepted with {}", fmt_set(&sys, &grown));
            } else {
                println!("rejected after growing to {}", fmt_set(&sys, &grown));
            }
            Ok(())
        }
        What::Closure { model, action } => {
            let sys = load_system(model)?;
            let idx = build_index(&sys);
            let s = sys.initial_state();
            let a = sys
                .action_by_name(action)
                .ok_or_else(|| input(format!("unknown action {action:?}")))?;
            let (result, rounds) = closure_trace(&sys, &idx, &s, a);
            println!("closure({action}) at the initial state of {}", sys.name);
            let mut it = rounds.iter();
            if let Some(seed) = it.next() {
                println!("seed {}", fmt_set(&sys, seed));
            }
            for (i, added) in it.enumerate() {
                println!("round {}: added {}", i + 1, fmt_set(&sys, added));
            }
            println!("closure = {}", fmt_set(&sys, &result));
            Ok(())
        }
    }
}

fn parse_set(sys: &System, names: &str) -> Result<ActionSet, CliError> {
    let mut set = ActionSet::empty(sys.n_actions());
    for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let a = sys
            .action_by_name(name)
            .ok_or_else(|| input(format!("unknown action {name:?}")))?;
        set.insert(a);
    }
    Ok(set)
}
