//! `gen`: write benchmark families, worked examples, and SAT gadgets as
//! `.csys` documents.

use crate::common::{emit, input, CliError};
use clap::{Args, Subcommand};
use porex_core::generators as g;
use porex_core::parse::write_system;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    family: Family,
}

#[derive(Subcommand)]
enum Family {
    /// Dining philosophers: n seats, each eating `meals` times
    Dp {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        meals: usize,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clients that each take k of the locks in a seeded random order
    Multilocks {
        #[arg(long)]
        clients: usize,
        #[arg(long)]
        locks: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        seed: u64,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Satisfiability gadget plus a sidecar .query file naming the query set
    Satifs {
        /// Formula in DIMACS CNF, at most three literals per clause
        #[arg(long)]
        dimacs: PathBuf,
        /// Model file (default: the formula path with extension .csys); the
        /// query set goes next to it with extension .query
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run lower-bound gadget for a formula (interesting when unsatisfiable)
    Lowerbound {
        /// Formula in DIMACS CNF, at most three literals per clause
        #[arg(long)]
        dimacs: PathBuf,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complete binary tree of two-input boolean gates
    Gates {
        #[arg(long)]
        height: usize,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// n independent two-branch diamonds; reduction size is order-sensitive
    Fig6 {
        #[arg(long)]
        n: usize,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A built-in worked example: fig1, fig3, fig4, fig5, or fig6
    Fig {
        name: String,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Seeded random system (always a valid model)
    Random {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        clients: usize,
        #[arg(long, default_value_t = 2)]
        servers: usize,
        #[arg(long, default_value_t = 6)]
        actions: usize,
        #[arg(long, default_value_t = 4)]
        states: usize,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(args: &GenArgs) -> Result<(), CliError> {
    match &args.family {
        Family::Dp { n, meals, out } => {
            emit(out.as_deref(), &write_system(&g::gen_philosophers(*n, *meals)))
        }
        Family::Multilocks {
            clients,
            locks,
            k,
            seed,
            out,
        } => emit(
            out.as_deref(),
            &write_system(&g::gen_multilocks(*clients, *locks, *k, *seed)),
        ),
        Family::Satifs { dimacs, out } => satifs(dimacs, out.as_deref()),
        Family::Lowerbound { dimacs, out } => {
            let cnf = read_cnf(dimacs)?;
            emit(out.as_deref(), &write_system(&g::gen_lowerbound(&cnf)))
        }
        Family::Gates { height, out } => {
            emit(out.as_deref(), &write_system(&g::gen_boolean_gates(*height)))
        }
        Family::Fig6 { n, out } => emit(out.as_deref(), &write_system(&g::gen_fig6(*n))),
        Family::Fig { name, out } => {
            let sys = g::builtin_figures().remove(name.as_str()).ok_or_else(|| {
                input(format!(
                    "unknown figure {name:?}; expected fig1, fig3, fig4, fig5, or fig6"
                ))
            })?;
            emit(out.as_deref(), &write_system(&sys))
        }
        Family::Random {
            seed,
            clients,
            servers,
            actions,
            states,
            out,
        } => {
            let cfg = g::RandomConfig {
                max_clients: *clients,
                max_servers: *servers,
                max_actions: *actions,
                max_states: *states,
            };
            emit(out.as_deref(), &write_system(&g::gen_random_system(cfg, *seed)))
        }
    }
}

fn read_cnf(path: &Path) -> Result<g::Cnf, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    g::parse_dimacs(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// The gadget is a model plus a query set. The model goes to `out` and the
/// query next to it with the extension `.query`, one action name per line.
fn satifs(dimacs: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cnf = read_cnf(dimacs)?;
    let (sys, query) = g::gen_sat_ifs(&cnf);
    let model_path = match out {
        Some(p) => p.to_path_buf(),
        None => dimacs.with_extension("csys"),
    };
    let query_path = model_path.with_extension("query");
    if query_path == model_path {
        return Err(input(format!(
            "cannot derive a distinct query path from {}",
            model_path.display()
        )));
    }
    let mut names: Vec<&str> = query.iter().map(|a| sys.action_name(a)).collect();
    names.sort_unstable();
    let mut query_text = String::from(
        "# actions allowed to start a run; the formula is satisfiable iff some\n\
         # maximal run from the initial state has its whole first set in this list\n",
    );
    for name in &names {
        query_text.push_str(name);
        query_text.push('\n');
    }
    fs::write(&model_path, write_system(&sys))
        .map_err(|e| input(format!("cannot write {}: {e}", model_path.display())))?;
    fs::write(&query_path, query_text)
        .map_err(|e| input(format!("cannot write {}: {e}", query_path.display())))?;
    eprintln!("wrote {} and {}", model_path.display(), query_path.display());
    Ok(())
}
