//! Independent correctness oracles for reduced explorations.
//!
//! Everything here is deliberately redundant with the explorer: the full
//! product is rebuilt by plain BFS, first-set families are computed
//! bottom-up over it, and reduced graphs are judged against those, so a bug
//! in the reduction machinery cannot vouch for itself.

use crate::explorer::ReducedTs;
use crate::generators::Cnf;
use crate::model::{GlobalState, StateTable, System};
use crate::sets::{ActionId, ActionSet};
use crate::traces::{enumerate_maximal_runs, lex_normal_form};
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use smallvec::SmallVec;
use std::collections::VecDeque;
use std::ops::ControlFlow;
use thiserror::Error;

/// Three-valued check outcome. Resource exhaustion surfaces as
/// `Inconclusive`, never as `Pass`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    pub fn is_fail(&self) -> bool {
        matches!(self, Verdict::Fail(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive(_))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyLimits {
    /// Cap on full-product states; `None` is unbounded.
    pub full_ts_nodes: Option<usize>,
    /// Cap on first-set family size per state.
    pub family_cap: usize,
    /// Cap on enumerated maximal runs (trace optimality).
    pub max_runs: usize,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits {
            full_ts_nodes: None,
            family_cap: 100_000,
            max_runs: 100_000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FullEdge {
    pub from: u32,
    pub action: ActionId,
    pub to: u32,
}

/// The unreduced product, built by breadth-first search. State ids are
/// dense in discovery order; the root is state 0.
pub struct FullTs {
    pub table: StateTable,
    pub edges: Vec<FullEdge>,
    out_start: Vec<u32>,
    pub root: u32,
}

impl FullTs {
    pub fn n_states(&self) -> usize {
        self.table.len()
    }

    pub fn out(&self, state: u32) -> &[FullEdge] {
        let (s, e) = (
            self.out_start[state as usize] as usize,
            self.out_start[state as usize + 1] as usize,
        );
        &self.edges[s..e]
    }

    pub fn is_terminal(&self, state: u32) -> bool {
        self.out(state).is_empty()
    }

    pub fn state(&self, state: u32) -> GlobalState {
        self.table.get(state)
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum TsError {
    #[error("full transition system exceeds {limit} states")]
    LimitExceeded { limit: usize },
}

pub fn build_full_ts(sys: &System, node_limit: Option<usize>) -> Result<FullTs, TsError> {
    let mut table = StateTable::new(sys);
    let init = sys.initial_state();
    let (root, _) = table.intern(init.locals());
    let mut edges = Vec::new();
    let mut out_start = vec![0u32];
    let mut queue = VecDeque::from([root]);
    let mut locals = init.locals().to_vec();
    let mut next = locals.clone();
    let mut enabled = ActionSet::empty(sys.n_actions());
    while let Some(s) = queue.pop_front() {
        table.unpack_into(s, &mut locals);
        sys.enabled_into(&locals, &mut enabled);
        for a in enabled.iter() {
            next.copy_from_slice(&locals);
            sys.apply(&mut next, a);
            let (t, fresh) = table.intern(&next);
            edges.push(FullEdge { from: s, action: a, to: t });
            if fresh {
                if let Some(limit) = node_limit {
                    if table.len() > limit {
                        return Err(TsError::LimitExceeded { limit });
                    }
                }
                queue.push_back(t);
            }
        }
        out_start.push(edges.len() as u32);
    }
    // BFS pops states in id order, so edges are already grouped by source
    Ok(FullTs {
        table,
        edges,
        out_start,
        root,
    })
}

/// First-set families for every state, interned: `universe` holds each
/// distinct set once and `by_state` refers into it.
pub struct FirstFamilies {
    pub universe: Vec<ActionSet>,
    by_state: Vec<Vec<u32>>,
}

impl FirstFamilies {
    pub fn family(&self, state: u32) -> impl Iterator<Item = &ActionSet> + '_ {
        self.by_state[state as usize]
            .iter()
            .map(|&i| &self.universe[i as usize])
    }

    pub fn family_len(&self, state: u32) -> usize {
        self.by_state[state as usize].len()
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum FirstSetsError {
    #[error("state {state} has more than {cap} first sets")]
    FamilyCapExceeded { state: u32, cap: usize },
    #[error("product graph is cyclic; the system is not a valid client/server network")]
    Cyclic,
}

struct Interner {
    ids: FxHashMap<ActionSet, u32>,
    sets: Vec<ActionSet>,
    /// Sorted ranks per set, for canonical family ordering.
    keys: Vec<Vec<u16>>,
}

impl Interner {
    fn new() -> Self {
        Interner {
            ids: FxHashMap::default(),
            sets: Vec::new(),
            keys: Vec::new(),
        }
    }

    fn intern(&mut self, sys: &System, set: ActionSet) -> u32 {
        if let Some(&id) = self.ids.get(&set) {
            return id;
        }
        let id = self.sets.len() as u32;
        let mut key: Vec<u16> = set.iter().map(|a| sys.rank(a)).collect();
        key.sort_unstable();
        self.ids.insert(set.clone(), id);
        self.sets.push(set);
        self.keys.push(key);
        id
    }
}

/// Reverse-topological sweep computing First(s) per state. Families are
/// handed to `visit` exactly once and freed as soon as no unprocessed
/// predecessor needs them, so peak memory follows the DAG frontier.
///
/// `visit` receives the state id, its family as indices into the returned
/// universe of distinct sets, and a snapshot of that universe (an entry
/// never changes once allocated). Returning `Break` stops the sweep early.
pub fn bottom_up_first_sets<V>(
    sys: &System,
    ts: &FullTs,
    cap: usize,
    mut visit: V,
) -> Result<Vec<ActionSet>, FirstSetsError>
where
    V: FnMut(u32, &[u32], &[ActionSet]) -> ControlFlow<()>,
{
    let n = ts.n_states();
    // predecessor adjacency
    let mut in_start = vec![0u32; n + 1];
    for e in &ts.edges {
        in_start[e.to as usize + 1] += 1;
    }
    for i in 0..n {
        in_start[i + 1] += in_start[i];
    }
    let mut preds = vec![0u32; ts.edges.len()];
    let mut fill = in_start.clone();
    for e in &ts.edges {
        preds[fill[e.to as usize] as usize] = e.from;
        fill[e.to as usize] += 1;
    }

    let mut pending_out: Vec<u32> = (0..n).map(|s| ts.out(s as u32).len() as u32).collect();
    let mut pending_in: Vec<u32> = (0..n).map(|s| in_start[s + 1] - in_start[s]).collect();
    let mut ready: Vec<u32> = (0..n as u32).filter(|&s| pending_out[s as usize] == 0).collect();
    let mut families: Vec<Option<Vec<u32>>> = vec![None; n];
    let mut interner = Interner::new();
    let empty_id = interner.intern(sys, ActionSet::empty(sys.n_actions()));
    let mut processed = 0usize;

    while let Some(s) = ready.pop() {
        processed += 1;
        let mut ids: FxHashSet<u32> = FxHashSet::default();
        if ts.is_terminal(s) {
            ids.insert(empty_id);
        } else {
            for e in ts.out(s) {
                let deps = sys.dependents_of(e.action);
                let succ = families[e.to as usize]
                    .as_ref()
                    .expect("successor processed before predecessor");
                for &fid in succ {
                    let mut g = interner.sets[fid as usize].clone();
                    g.subtract(deps);
                    g.insert(e.action);
                    ids.insert(interner.intern(sys, g));
                    if ids.len() > cap {
                        return Err(FirstSetsError::FamilyCapExceeded { state: s, cap });
                    }
                }
            }
        }
        let mut fam: Vec<u32> = ids.into_iter().collect();
        fam.sort_unstable_by(|&x, &y| {
            let (kx, ky) = (&interner.keys[x as usize], &interner.keys[y as usize]);
            kx.len().cmp(&ky.len()).then_with(|| kx.cmp(ky))
        });
        if let ControlFlow::Break(()) = visit(s, &fam, &interner.sets) {
            return Ok(interner.sets);
        }
        families[s as usize] = Some(fam);

        for &p in &preds[in_start[s as usize] as usize..in_start[s as usize + 1] as usize] {
            pending_out[p as usize] -= 1;
            if pending_out[p as usize] == 0 {
                ready.push(p);
            }
        }
        for e in ts.out(s) {
            pending_in[e.to as usize] -= 1;
            if pending_in[e.to as usize] == 0 {
                families[e.to as usize] = None;
            }
        }
    }
    if processed != n {
        return Err(FirstSetsError::Cyclic);
    }
    Ok(interner.sets)
}

/// Materializes every state's family. Meant for desk-scale systems; the
/// checks below stream instead of calling this.
pub fn first_sets_bottom_up(
    sys: &System,
    ts: &FullTs,
    family_cap: usize,
) -> Result<FirstFamilies, FirstSetsError> {
    let mut by_state: Vec<Vec<u32>> = vec![Vec::new(); ts.n_states()];
    let universe = bottom_up_first_sets(sys, ts, family_cap, |s, fam, _| {
        by_state[s as usize] = fam.to_vec();
        ControlFlow::Continue(())
    })?;
    Ok(FirstFamilies { universe, by_state })
}

fn set_names(sys: &System, set: &ActionSet) -> String {
    let names: Vec<&str> = set.iter().map(|a| sys.action_name(a)).collect();
    format!("{{{}}}", names.join(","))
}

/// Maps each reduced node onto its state in the full product; `None` when
/// the node's state is not reachable at all.
fn nodes_by_state(rts: &ReducedTs, full: &FullTs) -> Result<FxHashMap<u32, SmallVec<[u32; 2]>>, u32> {
    let mut map: FxHashMap<u32, SmallVec<[u32; 2]>> = FxHashMap::default();
    for node in 0..rts.n_nodes() as u32 {
        let state = rts.state_of(node);
        match full.table.lookup(state.locals()) {
            Some(sid) => map.entry(sid).or_default().push(node),
            None => return Err(node),
        }
    }
    Ok(map)
}

/// Soundness and completeness verdicts for one reduced graph.
#[derive(Clone, Debug, Serialize)]
pub struct GraphVerdicts {
    pub soundness: Verdict,
    pub completeness: Verdict,
}

pub fn check_completeness(sys: &System, rts: &ReducedTs, limits: &VerifyLimits) -> Verdict {
    let mut v = batch_verify(sys, &[rts], limits, true, true, false);
    v.pop().unwrap().completeness
}

/// The raw covering criterion with no sleep exemption. Expected to fail on
/// sleep-pruned graphs; kept for diagnostics.
pub fn check_completeness_unfiltered(
    sys: &System,
    rts: &ReducedTs,
    limits: &VerifyLimits,
) -> Verdict {
    let mut v = batch_verify(sys, &[rts], limits, false, true, false);
    v.pop().unwrap().completeness
}

pub fn check_soundness(sys: &System, rts: &ReducedTs) -> Verdict {
    check_soundness_with(sys, rts, &VerifyLimits::default())
}

pub fn check_soundness_with(sys: &System, rts: &ReducedTs, limits: &VerifyLimits) -> Verdict {
    let mut v = batch_verify(sys, &[rts], limits, true, false, true);
    v.pop().unwrap().soundness
}

/// Runs soundness and completeness on several reduced graphs of the same
/// system at once. The full product and its first-set families are computed
/// a single time and shared across all graphs, which is what keeps checking
/// every preset on a large model affordable.
pub fn verify_graphs(
    sys: &System,
    graphs: &[&ReducedTs],
    limits: &VerifyLimits,
) -> Vec<GraphVerdicts> {
    batch_verify(sys, graphs, limits, true, true, true)
}

/// Root, edge replay and sink classification; everything soundness can decide
/// without the full product. Returns the sleep-blocked sinks that still need
/// their first sets inspected.
fn structural_soundness(sys: &System, rts: &ReducedTs) -> Result<Vec<u32>, Verdict> {
    if rts.n_nodes() == 0 {
        return Err(Verdict::Fail("graph has no nodes".into()));
    }
    if rts.state_of(rts.root).locals() != sys.initial_state().locals() {
        return Err(Verdict::Fail("root is not the initial state".into()));
    }
    // every edge must replay in the real system
    let mut has_out = vec![false; rts.n_nodes()];
    for (i, e) in rts.edges.iter().enumerate() {
        has_out[e.from as usize] = true;
        let from = rts.state_of(e.from);
        match sys.step(&from, e.action) {
            Ok(next) => {
                if next.locals() != rts.state_of(e.to).locals() {
                    return Err(Verdict::Fail(format!(
                        "edge {i} ({} from state {}) lands on the wrong state",
                        sys.action_name(e.action),
                        sys.format_state(&from)
                    )));
                }
            }
            Err(_) => {
                return Err(Verdict::Fail(format!(
                    "edge {i}: {} is not enabled in state {}",
                    sys.action_name(e.action),
                    sys.format_state(&from)
                )));
            }
        }
    }

    // sinks must be terminal, or have every first set asleep
    let mut blocked_sinks: Vec<u32> = Vec::new();
    let mut enabled = ActionSet::empty(sys.n_actions());
    for node in 0..rts.n_nodes() as u32 {
        if has_out[node as usize] {
            continue;
        }
        let state = rts.state_of(node);
        sys.enabled_into(state.locals(), &mut enabled);
        if enabled.is_empty() {
            continue;
        }
        if rts.sleep(node).is_empty() {
            return Err(Verdict::Fail(format!(
                "node {node} (state {}) is a sink with empty sleep but enabled actions {}",
                sys.format_state(&state),
                set_names(sys, &enabled)
            )));
        }
        blocked_sinks.push(node);
    }
    Ok(blocked_sinks)
}

fn unreachable_node(sys: &System, rts: &ReducedTs, node: u32) -> Verdict {
    Verdict::Fail(format!(
        "node {node} carries state {} which is not reachable",
        sys.format_state(&rts.state_of(node))
    ))
}

fn batch_verify(
    sys: &System,
    graphs: &[&ReducedTs],
    limits: &VerifyLimits,
    sleep_filter: bool,
    want_completeness: bool,
    want_soundness: bool,
) -> Vec<GraphVerdicts> {
    let n = graphs.len();
    // None means the verdict is still open; completeness stays open until the
    // whole bottom-up pass finishes without a counterexample.
    let mut sound: Vec<Option<Verdict>> = vec![None; n];
    let mut comp: Vec<Option<Verdict>> = vec![None; n];
    let mut blocked: Vec<Vec<u32>> = vec![Vec::new(); n];

    for (i, g) in graphs.iter().enumerate() {
        if want_soundness {
            match structural_soundness(sys, g) {
                Ok(sinks) if sinks.is_empty() => sound[i] = Some(Verdict::Pass),
                Ok(sinks) => blocked[i] = sinks,
                Err(v) => sound[i] = Some(v),
            }
        } else {
            sound[i] = Some(Verdict::Pass);
        }
        if !want_completeness {
            comp[i] = Some(Verdict::Pass);
        }
    }

    let collect = |sound: Vec<Option<Verdict>>, comp: Vec<Option<Verdict>>, open: Verdict| {
        sound
            .into_iter()
            .zip(comp)
            .map(|(s, c)| GraphVerdicts {
                soundness: s.unwrap_or_else(|| open.clone()),
                completeness: c.unwrap_or_else(|| open.clone()),
            })
            .collect()
    };

    let needs_full = want_completeness || blocked.iter().any(|b| !b.is_empty());
    if !needs_full {
        return collect(sound, comp, Verdict::Pass);
    }

    let full = match build_full_ts(sys, limits.full_ts_nodes) {
        Ok(ts) => ts,
        Err(e) => return collect(sound, comp, Verdict::Inconclusive(e.to_string())),
    };

    // per-graph lookup structures for the shared walk
    let mut by_state: Vec<FxHashMap<u32, SmallVec<[u32; 2]>>> = Vec::with_capacity(n);
    let mut labels: Vec<Vec<ActionSet>> = Vec::with_capacity(n);
    for (i, g) in graphs.iter().enumerate() {
        if want_completeness && comp[i].is_none() {
            match nodes_by_state(g, &full) {
                Ok(m) => {
                    by_state.push(m);
                    let mut l = vec![ActionSet::empty(sys.n_actions()); g.n_nodes()];
                    for e in &g.edges {
                        l[e.from as usize].insert(e.action);
                    }
                    labels.push(l);
                    continue;
                }
                Err(node) => comp[i] = Some(unreachable_node(sys, g, node)),
            }
        }
        by_state.push(FxHashMap::default());
        labels.push(Vec::new());
    }
    let mut sink_states: Vec<FxHashMap<u32, SmallVec<[u32; 2]>>> =
        vec![FxHashMap::default(); n];
    let mut sink_pending: Vec<usize> = vec![0; n];
    for i in 0..n {
        if sound[i].is_some() {
            continue;
        }
        for &node in &blocked[i] {
            match full.table.lookup(graphs[i].state_of(node).locals()) {
                Some(sid) => {
                    sink_states[i].entry(sid).or_default().push(node);
                }
                None => {
                    sound[i] = Some(unreachable_node(sys, graphs[i], node));
                    sink_states[i].clear();
                    break;
                }
            }
        }
        if sound[i].is_none() {
            sink_pending[i] = sink_states[i].len();
        }
    }

    let walked = bottom_up_first_sets(sys, &full, limits.family_cap, |s, fam, sets| {
        let mut all_decided = true;
        for i in 0..n {
            let g = graphs[i];
            if comp[i].is_none() {
                if let Some(nodes) = by_state[i].get(&s) {
                    'nodes: for &node in nodes {
                        for &fid in fam {
                            let f = &sets[fid as usize];
                            if f.is_empty() {
                                continue;
                            }
                            if sleep_filter && f.intersects(g.sleep(node)) {
                                continue;
                            }
                            if !f.intersects(&labels[i][node as usize]) {
                                comp[i] = Some(Verdict::Fail(format!(
                                    "node {node} (state {}) explores no action of first set {}",
                                    sys.format_state(&g.state_of(node)),
                                    set_names(sys, f)
                                )));
                                break 'nodes;
                            }
                        }
                    }
                }
            }
            if sound[i].is_none() {
                if let Some(nodes) = sink_states[i].get(&s) {
                    'sinks: for &node in nodes {
                        for &fid in fam {
                            let f = &sets[fid as usize];
                            if !f.intersects(g.sleep(node)) {
                                sound[i] = Some(Verdict::Fail(format!(
                                    "node {node} (state {}) stops although first set {} is not asleep",
                                    sys.format_state(&g.state_of(node)),
                                    set_names(sys, f)
                                )));
                                break 'sinks;
                            }
                        }
                    }
                    if sound[i].is_none() {
                        sink_pending[i] -= 1;
                        if sink_pending[i] == 0 {
                            sound[i] = Some(Verdict::Pass);
                        }
                    }
                }
            }
            all_decided &= sound[i].is_some() && comp[i].is_some();
        }
        if all_decided {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match walked {
        Ok(_) => collect(sound, comp, Verdict::Pass),
        Err(e) => collect(sound, comp, Verdict::Inconclusive(e.to_string())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceOptimality {
    pub tree_runs: Option<u64>,
    pub classes: Option<u64>,
    pub verdict: Verdict,
}

fn fmt_word(sys: &System, word: &[ActionId]) -> String {
    word.iter()
        .map(|&a| sys.action_name(a))
        .collect::<Vec<_>>()
        .join(".")
}

pub fn check_trace_optimality(
    sys: &System,
    tree: &ReducedTs,
    limits: &VerifyLimits,
) -> TraceOptimality {
    let fail = |msg: String| TraceOptimality {
        tree_runs: None,
        classes: None,
        verdict: Verdict::Fail(msg),
    };
    if tree.edges.iter().any(|e| e.kind == crate::explorer::EdgeKind::Subsumption) {
        return fail("input has subsumption edges; expected a tree".into());
    }

    // enumerate the tree's full runs root-to-sink
    let adj = tree.out_edges();
    let mut runs: Vec<Vec<ActionId>> = Vec::new();
    let mut stack: Vec<(u32, Vec<ActionId>)> = vec![(tree.root, Vec::new())];
    while let Some((v, word)) = stack.pop() {
        if runs.len() > limits.max_runs {
            return TraceOptimality {
                tree_runs: None,
                classes: None,
                verdict: Verdict::Inconclusive(format!(
                    "tree has more than {} full runs",
                    limits.max_runs
                )),
            };
        }
        if adj[v as usize].is_empty() {
            runs.push(word);
            continue;
        }
        for &ei in &adj[v as usize] {
            let e = &tree.edges[ei];
            let mut w = word.clone();
            w.push(e.action);
            stack.push((e.to, w));
        }
    }

    let mut seen: FxHashSet<Vec<ActionId>> = FxHashSet::default();
    for run in &runs {
        let nf = lex_normal_form(sys, run);
        if &nf != run {
            return fail(format!(
                "tree run {} is not its class normal form {}",
                fmt_word(sys, run),
                fmt_word(sys, &nf)
            ));
        }
        if !seen.insert(nf) {
            return fail(format!(
                "tree contains two runs of the class of {}",
                fmt_word(sys, run)
            ));
        }
    }
    let tree_runs = runs.len() as u64;

    // count the real classes by normalizing every full run of the product
    let mut classes: FxHashSet<Vec<ActionId>> = FxHashSet::default();
    let init = sys.initial_state();
    for (count, run) in enumerate_maximal_runs(sys, &init).enumerate() {
        if count >= limits.max_runs {
            return TraceOptimality {
                tree_runs: Some(tree_runs),
                classes: None,
                verdict: Verdict::Inconclusive(format!(
                    "system has more than {} full runs",
                    limits.max_runs
                )),
            };
        }
        classes.insert(lex_normal_form(sys, &run));
    }
    let n_classes = classes.len() as u64;
    let verdict = if tree_runs == n_classes {
        Verdict::Pass
    } else {
        Verdict::Fail(format!(
            "tree has {tree_runs} runs but the system has {n_classes} trace classes"
        ))
    };
    TraceOptimality {
        tree_runs: Some(tree_runs),
        classes: Some(n_classes),
        verdict,
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("truth table evaluation is limited to 20 variables, got {0}")]
pub struct TooManyVars(pub u32);

/// Exhaustive satisfiability by truth table; the reference oracle for the
/// SAT gadget tests.
pub fn sat_truth_table(cnf: &Cnf) -> Result<bool, TooManyVars> {
    if cnf.n_vars > 20 {
        return Err(TooManyVars(cnf.n_vars));
    }
    for m in 0u32..1u32 << cnf.n_vars {
        let ok = cnf.clauses.iter().all(|cl| {
            cl.iter().any(|&lit| {
                let bit = (m >> (lit.unsigned_abs() - 1)) & 1 == 1;
                if lit > 0 {
                    bit
                } else {
                    !bit
                }
            })
        });
        if ok {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explorer::{
        explore, explore_tree, Edge, EdgeKind, ExploreConfig, Oracle, Preset,
    };
    use crate::generators::{
        builtin_figures, gen_multilocks, gen_philosophers, gen_random_system, RandomConfig,
    };
    use crate::traces::first_family;

    fn fig(name: &str) -> System {
        builtin_figures().remove(name).unwrap()
    }

    fn exact_tree(sys: &System) -> ReducedTs {
        let config = ExploreConfig {
            oracle: Oracle::ExactIfs { memo_limit: 100_000 },
            sleep_enabled: true,
            ..ExploreConfig::default()
        };
        explore_tree(sys, &config).ts
    }

    #[test]
    fn full_ts_matches_figures_and_reach() {
        let sys = fig("fig1");
        let ts = build_full_ts(&sys, None).unwrap();
        assert_eq!(ts.n_states(), 8);
        assert_eq!(ts.edges.len(), 9);

        let sys = fig("fig4");
        assert_eq!(build_full_ts(&sys, None).unwrap().n_states(), 5);

        // BFS agrees with the depth-first explorer on independent models
        for sys in [gen_philosophers(2, 1), gen_multilocks(3, 5, 2, 11)] {
            let ts = build_full_ts(&sys, None).unwrap();
            let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
            assert_eq!(ts.n_states() as u64, ex.stats.nodes, "{}", sys.name);
        }
        assert_eq!(build_full_ts(&gen_philosophers(2, 1), None).unwrap().n_states(), 24);
    }

    #[test]
    fn full_ts_respects_node_limit() {
        let sys = gen_philosophers(3, 1);
        match build_full_ts(&sys, Some(10)) {
            Err(TsError::LimitExceeded { limit: 10 }) => {}
            Err(other) => panic!("wrong error {other:?}"),
            Ok(ts) => panic!("expected limit error, built {} states", ts.n_states()),
        }
    }

    fn family_as_sets(ff: &FirstFamilies, s: u32) -> FxHashSet<ActionSet> {
        ff.family(s).cloned().collect()
    }

    fn named(sys: &System, names: &[&str]) -> ActionSet {
        let mut out = ActionSet::empty(sys.n_actions());
        for n in names {
            out.insert(sys.action_by_name(n).unwrap());
        }
        out
    }

    #[test]
    fn first_sets_figures() {
        let sys = fig("fig1");
        let ts = build_full_ts(&sys, None).unwrap();
        let ff = first_sets_bottom_up(&sys, &ts, 1000).unwrap();
        let expect: FxHashSet<ActionSet> = [
            named(&sys, &["e"]),
            named(&sys, &["b", "e"]),
            named(&sys, &["b", "c"]),
        ]
        .into_iter()
        .collect();
        assert_eq!(family_as_sets(&ff, ts.root), expect);

        let sys = fig("fig4");
        let ts = build_full_ts(&sys, None).unwrap();
        let ff = first_sets_bottom_up(&sys, &ts, 1000).unwrap();
        let expect: FxHashSet<ActionSet> =
            [named(&sys, &["a", "c"]), named(&sys, &["b"])].into_iter().collect();
        assert_eq!(family_as_sets(&ff, ts.root), expect);

        // terminal states carry exactly the empty set
        let sys = fig("fig1");
        let ts = build_full_ts(&sys, None).unwrap();
        let ff = first_sets_bottom_up(&sys, &ts, 1000).unwrap();
        for s in 0..ts.n_states() as u32 {
            if ts.is_terminal(s) {
                assert_eq!(ff.family_len(s), 1);
                assert!(ff.family(s).next().unwrap().is_empty());
            }
        }
    }

    #[test]
    fn first_sets_match_brute_force_enumeration() {
        for seed in 0..25 {
            let sys = gen_random_system(RandomConfig::default(), seed);
            let ts = build_full_ts(&sys, None).unwrap();
            let ff = first_sets_bottom_up(&sys, &ts, 100_000).unwrap();
            for s in 0..ts.n_states() as u32 {
                let brute = first_family(&sys, &ts.state(s), 100_000).unwrap();
                let brute: FxHashSet<ActionSet> = brute.into_iter().collect();
                assert_eq!(family_as_sets(&ff, s), brute, "seed {seed} state {s}");
            }
        }
    }

    #[test]
    fn family_cap_reports_the_state() {
        let sys = gen_philosophers(4, 1);
        let ts = build_full_ts(&sys, None).unwrap();
        match first_sets_bottom_up(&sys, &ts, 2) {
            Err(FirstSetsError::FamilyCapExceeded { cap: 2, .. }) => {}
            other => panic!("expected cap overflow, got {:?}", other.map(|f| f.universe.len())),
        }
    }

    #[test]
    fn completeness_passes_every_preset_on_figures() {
        let limits = VerifyLimits::default();
        for name in ["fig1", "fig4", "fig5", "fig6"] {
            let sys = fig(name);
            for preset in Preset::ALL {
                let ex = explore(&sys, &ExploreConfig::preset(preset));
                let v = check_completeness(&sys, &ex.ts, &limits);
                assert_eq!(v, Verdict::Pass, "{name} {}", preset.name());
            }
        }
    }

    #[test]
    fn completeness_fails_when_root_keeps_only_c() {
        let sys = fig("fig1");
        // a three-node chain: init -c-> s -b-> terminal
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        let c = sys.action_by_name("c").unwrap();
        let b = sys.action_by_name("b").unwrap();
        let root_c = ex.ts.edges.iter().find(|e| e.from == ex.ts.root && e.action == c).unwrap();
        let after_c = ex.ts.edges.iter().find(|e| e.from == root_c.to && e.action == b).unwrap();
        let node_state = vec![
            ex.ts.node_state[ex.ts.root as usize],
            ex.ts.node_state[root_c.to as usize],
            ex.ts.node_state[after_c.to as usize],
        ];
        let edges = vec![
            Edge { from: 0, to: 1, action: c, kind: EdgeKind::Tree },
            Edge { from: 1, to: 2, action: b, kind: EdgeKind::Tree },
        ];
        let rts = ReducedTs::from_parts(ex.ts.table, node_state, None, edges, 0, sys.n_actions());
        match check_completeness(&sys, &rts, &VerifyLimits::default()) {
            Verdict::Fail(w) => {
                assert!(w.contains("node 0"), "{w}");
                assert!(w.contains("{e}"), "{w}");
            }
            other => panic!("expected fail, got {other:?}"),
        }
    }

    #[test]
    fn unfiltered_completeness_rejects_sleep_pruning() {
        // fig5's exact tree drops the ba interleaving; without honoring
        // sleep sets the b node looks like it misses first set {a}
        let sys = fig("fig5");
        let tree = exact_tree(&sys);
        assert_eq!(
            check_completeness(&sys, &tree, &VerifyLimits::default()),
            Verdict::Pass
        );
        assert!(check_completeness_unfiltered(&sys, &tree, &VerifyLimits::default()).is_fail());
    }

    #[test]
    fn soundness_passes_every_preset_on_figures() {
        for name in ["fig1", "fig4", "fig5", "fig6"] {
            let sys = fig(name);
            for preset in Preset::ALL {
                let ex = explore(&sys, &ExploreConfig::preset(preset));
                let v = check_soundness(&sys, &ex.ts);
                assert_eq!(v, Verdict::Pass, "{name} {}", preset.name());
            }
            let v = check_soundness(&sys, &exact_tree(&sys));
            assert_eq!(v, Verdict::Pass, "{name} exact tree");
        }
    }

    #[test]
    fn batch_verdicts_match_single_graph_checks() {
        let sys = fig("fig5");
        let limits = VerifyLimits::default();
        let explorations: Vec<_> = Preset::ALL
            .iter()
            .map(|&p| explore(&sys, &ExploreConfig::preset(p)))
            .collect();
        let mut graphs: Vec<&ReducedTs> = explorations.iter().map(|e| &e.ts).collect();
        // a corrupted graph in the same batch must not disturb the others
        let mut table = StateTable::new(&sys);
        table.intern(sys.initial_state().locals());
        let broken =
            ReducedTs::from_parts(table, vec![0], None, Vec::new(), 0, sys.n_actions());
        graphs.push(&broken);
        let batch = verify_graphs(&sys, &graphs, &limits);
        for (i, g) in graphs.iter().enumerate() {
            assert_eq!(batch[i].soundness, check_soundness_with(&sys, g, &limits), "graph {i}");
            assert_eq!(batch[i].completeness, check_completeness(&sys, g, &limits), "graph {i}");
        }
        assert!(batch.last().unwrap().soundness.is_fail());
    }

    #[test]
    fn soundness_catches_relabeled_edge() {
        let sys = fig("fig1");
        let mut ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        let e = sys.action_by_name("e").unwrap();
        let c = sys.action_by_name("c").unwrap();
        let victim = ex.ts.edges.iter_mut().find(|ed| ed.action == c).unwrap();
        victim.action = e; // e leads elsewhere, so the target no longer matches
        let v = check_soundness(&sys, &ex.ts);
        assert!(v.is_fail(), "{v:?}");
    }

    #[test]
    fn soundness_catches_unjustified_sink() {
        let sys = fig("fig1");
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        // cut everything below the root: a non-terminal sink with no sleep
        let rts = ReducedTs::from_parts(
            ex.ts.table,
            vec![ex.ts.node_state[ex.ts.root as usize]],
            None,
            Vec::new(),
            0,
            sys.n_actions(),
        );
        match check_soundness(&sys, &rts) {
            Verdict::Fail(w) => assert!(w.contains("sink"), "{w}"),
            other => panic!("expected fail, got {other:?}"),
        }
    }

    #[test]
    fn sleep_blocked_sink_is_accepted_only_when_fully_asleep() {
        // one client, two independent actions via separate servers: a node
        // that slept on the whole alphabet may stop early
        let sys = fig("fig5");
        let tree = exact_tree(&sys);
        assert!(check_soundness(&sys, &tree).is_pass());

        // force a bogus sleep-blocked sink: keep only the root
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        let half_asleep = named(&sys, &["a"]);
        let rts = ReducedTs::from_parts(
            ex.ts.table,
            vec![ex.ts.node_state[ex.ts.root as usize]],
            Some(vec![half_asleep]),
            Vec::new(),
            0,
            sys.n_actions(),
        );
        match check_soundness(&sys, &rts) {
            Verdict::Fail(w) => assert!(w.contains("not asleep"), "{w}"),
            other => panic!("expected fail, got {other:?}"),
        }
    }

    #[test]
    fn trace_optimality_on_exact_trees() {
        let sys = fig("fig1");
        let r = check_trace_optimality(&sys, &exact_tree(&sys), &VerifyLimits::default());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!((r.tree_runs, r.classes), (Some(3), Some(3)));

        let sys = fig("fig5");
        let r = check_trace_optimality(&sys, &exact_tree(&sys), &VerifyLimits::default());
        assert_eq!(r.verdict, Verdict::Pass);
        assert_eq!((r.tree_runs, r.classes), (Some(2), Some(2)));
    }

    #[test]
    fn trace_optimality_rejects_plain_tree() {
        // the unreduced tree of fig1 has 5 runs over 3 classes; cb is the
        // first run that is not its own normal form
        let sys = fig("fig1");
        let tree = explore_tree(&sys, &ExploreConfig::default()).ts;
        let r = check_trace_optimality(&sys, &tree, &VerifyLimits::default());
        match r.verdict {
            Verdict::Fail(w) => assert!(w.contains("normal form"), "{w}"),
            other => panic!("expected fail, got {other:?}"),
        }
    }

    #[test]
    fn trace_optimality_inconclusive_on_tiny_run_cap() {
        let sys = fig("fig1");
        let limits = VerifyLimits {
            max_runs: 2,
            ..Default::default()
        };
        let r = check_trace_optimality(&sys, &exact_tree(&sys), &limits);
        assert!(r.verdict.is_inconclusive());
    }

    #[test]
    fn completeness_inconclusive_when_full_ts_capped() {
        let sys = gen_philosophers(3, 1);
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        let limits = VerifyLimits {
            full_ts_nodes: Some(10),
            ..Default::default()
        };
        assert!(check_completeness(&sys, &ex.ts, &limits).is_inconclusive());
    }

    #[test]
    fn truth_table_basics_and_limit() {
        let tauto = Cnf { n_vars: 1, clauses: vec![[1, 1, 1]] };
        assert_eq!(sat_truth_table(&tauto), Ok(true));
        let contra = Cnf { n_vars: 1, clauses: vec![[1, 1, 1], [-1, -1, -1]] };
        assert_eq!(sat_truth_table(&contra), Ok(false));
        let empty = Cnf { n_vars: 0, clauses: vec![] };
        assert_eq!(sat_truth_table(&empty), Ok(true));
        let big = Cnf { n_vars: 21, clauses: vec![] };
        assert_eq!(sat_truth_table(&big), Err(TooManyVars(21)));
    }

    /// Second, structurally different evaluator: recursive splitting on the
    /// first unassigned variable.
    fn sat_by_splitting(cnf: &Cnf, assign: &mut Vec<Option<bool>>) -> bool {
        let clause_state = |cl: &[i32; 3], assign: &Vec<Option<bool>>| {
            let mut open = false;
            for &lit in cl {
                match assign[(lit.unsigned_abs() - 1) as usize] {
                    Some(v) if v == (lit > 0) => return Some(true),
                    Some(_) => {}
                    None => open = true,
                }
            }
            if open {
                None
            } else {
                Some(false)
            }
        };
        let mut all_true = true;
        for cl in &cnf.clauses {
            match clause_state(cl, assign) {
                Some(false) => return false,
                None => all_true = false,
                Some(true) => {}
            }
        }
        if all_true {
            return true;
        }
        let var = assign.iter().position(|v| v.is_none()).unwrap();
        for v in [false, true] {
            assign[var] = Some(v);
            if sat_by_splitting(cnf, assign) {
                assign[var] = None;
                return true;
            }
        }
        assign[var] = None;
        false
    }

    #[test]
    fn truth_table_matches_independent_solver() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..200 {
            let n_vars = rng.gen_range(1..=3u32);
            let n_clauses = rng.gen_range(0..=4usize);
            let clauses: Vec<[i32; 3]> = (0..n_clauses)
                .map(|_| {
                    [0; 3].map(|_| {
                        let v = rng.gen_range(1..=n_vars) as i32;
                        if rng.gen_bool(0.5) {
                            v
                        } else {
                            -v
                        }
                    })
                })
                .collect();
            let cnf = Cnf { n_vars, clauses };
            let mut assign = vec![None; n_vars as usize];
            assert_eq!(
                sat_truth_table(&cnf).unwrap(),
                sat_by_splitting(&cnf, &mut assign)
            );
        }
    }
}
