//! `verify`: explore, then audit the result with the brute-force soundness,
//! completeness, and (for trees) trace-optimality checks.

use crate::common::{input, load_system, CliError, EngineOpts};
use crate::explore::limit_name;
use clap::Args;
use porex_core::explorer::{explore, explore_tree, ExploreStats};
use porex_core::verifier::{
    check_trace_optimality, verify_graphs, TraceOptimality, Verdict, VerifyLimits,
};
use porex_core::ActionId;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Args)]
pub struct VerifyArgs {
    /// Model file in the .csys format
    pub model: PathBuf,
    #[command(flatten)]
    pub engine: EngineOpts,
    /// Explore a tree and additionally check trace optimality
    #[arg(long)]
    pub tree: bool,
    /// Test hook: relabel edge INDEX of the result before checking
    #[arg(long, hide = true, value_name = "INDEX")]
    pub corrupt_edge: Option<usize>,
}

/// One verification report: the exploration record plus one verdict per
/// check. The schema is fixed; tree mode adds `trace_optimality`.
#[derive(Serialize)]
struct Report<'a> {
    stats: &'a ExploreStats,
    soundness: &'a Verdict,
    completeness: &'a Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace_optimality: Option<&'a TraceOptimality>,
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let sys = load_system(&args.model)?;
    let cfg = args.engine.config(&sys)?;
    let mut ex = if args.tree {
        explore_tree(&sys, &cfg)
    } else {
        explore(&sys, &cfg)
    };

    if let Some(i) = args.corrupt_edge {
        if i >= ex.ts.edges.len() {
            return Err(input(format!(
                "corrupt-edge {i} is out of range; the exploration has {} edges",
                ex.ts.edges.len()
            )));
        }
        let e = &mut ex.ts.edges[i];
        e.action = ActionId((e.action.0 + 1) % sys.n_actions() as u16);
    }

    // checking a partial graph would report misleading definite failures
    let (soundness, completeness, optimality) = match ex.interrupted {
        Some(kind) => {
            let msg = format!("exploration stopped by the {} limit", limit_name(kind));
            (
                Verdict::Inconclusive(msg.clone()),
                Verdict::Inconclusive(msg),
                None,
            )
        }
        None => {
            let limits = VerifyLimits {
                full_ts_nodes: args.engine.node_limit,
                ..VerifyLimits::default()
            };
            let gv = verify_graphs(&sys, &[&ex.ts], &limits)
                .pop()
                .expect("one verdict per graph");
            let opt = args
                .tree
                .then(|| check_trace_optimality(&sys, &ex.ts, &limits));
            (gv.soundness, gv.completeness, opt)
        }
    };

    let report = Report {
        stats: &ex.stats,
        soundness: &soundness,
        completeness: &completeness,
        trace_optimality: optimality.as_ref(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    print!("{text}");

    let mut verdicts = vec![("soundness", &soundness), ("completeness", &completeness)];
    if let Some(t) = &optimality {
        verdicts.push(("trace optimality", &t.verdict));
    }
    for (name, v) in &verdicts {
        if let Verdict::Fail(detail) = v {
            return Err(CliError::VerifyFail(format!("{name}: {detail}")));
        }
    }
    for (name, v) in &verdicts {
        if let Verdict::Inconclusive(detail) = v {
            return Err(CliError::Limit(format!("{name} inconclusive: {detail}")));
        }
    }
    Ok(())
}
