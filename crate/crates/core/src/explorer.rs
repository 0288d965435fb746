//! Reduced exploration of the global transition system.
//!
//! One engine covers the whole family: depth-first search where each node
//! carries a sleep set, children are admitted by an oracle ("could a run
//! from here still start outside the sleep set?"), the actions tried at a
//! node come from a pluggable source set, and already-completed nodes can
//! subsume new states. Tree exploration is the same engine with subsumption
//! switched off.

use crate::heuristics::{
    self, build_index, choose_action, lex_closure, min_closure, p_set, HeuristicIndex,
};
use crate::model::{GlobalState, StateTable, System};
use crate::sets::{ActionId, ActionSet};
use crate::traces::ifs_exact;
use num_bigint::BigUint;
use rustc_hash::FxHashMap;
use serde::Serialize;
use smallvec::SmallVec;
use std::fmt::Write as _;
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Oracle {
    /// Admit every child (plain reachability).
    AlwaysTrue,
    /// Exact decision with a memo budget; budget exhaustion admits the
    /// child, never prunes it.
    ExactIfs { memo_limit: usize },
    Pifs,
    Rpifs,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SourceFn {
    Enabled,
    MinClosure,
    LexClosure,
    /// Persistent set seeded with the order-least non-sleeping enabled
    /// action.
    PSet,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Chooser {
    Lex,
    Apifs,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Subsumption {
    Off,
    StateEquality,
    SleepSubset,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Preset {
    Reach,
    PsetSleep,
    MinClosureSleep,
    ApifsSleep,
    FullNoSleep,
    FullSleep,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Reach,
        Preset::PsetSleep,
        Preset::MinClosureSleep,
        Preset::ApifsSleep,
        Preset::FullNoSleep,
        Preset::FullSleep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Reach => "reach",
            Preset::PsetSleep => "pset+sleep",
            Preset::MinClosureSleep => "minclosure+sleep",
            Preset::ApifsSleep => "apifs+sleep",
            Preset::FullNoSleep => "full-sleep",
            Preset::FullSleep => "full+sleep",
        }
    }

    pub fn by_name(name: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == name)
    }
}

#[derive(Clone, Debug)]
pub struct ExploreConfig {
    pub oracle: Oracle,
    pub source: SourceFn,
    pub chooser: Chooser,
    pub sleep_enabled: bool,
    pub subsumption: Subsumption,
    /// Overrides the system's action order for this exploration.
    pub order: Option<Vec<ActionId>>,
    pub node_limit: Option<usize>,
    pub time_limit: Option<Duration>,
    /// Reported in stats; presets set their own name.
    pub label: String,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        ExploreConfig {
            oracle: Oracle::AlwaysTrue,
            source: SourceFn::Enabled,
            chooser: Chooser::Lex,
            sleep_enabled: false,
            subsumption: Subsumption::StateEquality,
            order: None,
            node_limit: None,
            time_limit: None,
            label: "custom".to_string(),
        }
    }
}

impl ExploreConfig {
    pub fn preset(p: Preset) -> ExploreConfig {
        let (oracle, source, chooser, sleep, subsumption) = match p {
            Preset::Reach => (
                Oracle::AlwaysTrue,
                SourceFn::Enabled,
                Chooser::Lex,
                false,
                Subsumption::StateEquality,
            ),
            Preset::PsetSleep => (
                Oracle::AlwaysTrue,
                SourceFn::PSet,
                Chooser::Lex,
                true,
                Subsumption::SleepSubset,
            ),
            Preset::MinClosureSleep => (
                Oracle::AlwaysTrue,
                SourceFn::MinClosure,
                Chooser::Lex,
                true,
                Subsumption::SleepSubset,
            ),
            Preset::ApifsSleep => (
                Oracle::Pifs,
                SourceFn::Enabled,
                Chooser::Apifs,
                true,
                Subsumption::SleepSubset,
            ),
            Preset::FullNoSleep => (
                Oracle::Pifs,
                SourceFn::MinClosure,
                Chooser::Apifs,
                false,
                Subsumption::StateEquality,
            ),
            Preset::FullSleep => (
                Oracle::Pifs,
                SourceFn::MinClosure,
                Chooser::Apifs,
                true,
                Subsumption::SleepSubset,
            ),
        };
        ExploreConfig {
            oracle,
            source,
            chooser,
            sleep_enabled: sleep,
            subsumption,
            order: None,
            node_limit: None,
            time_limit: None,
            label: p.name().to_string(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum EdgeKind {
    Tree,
    Subsumption,
}

#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub action: ActionId,
    pub kind: EdgeKind,
}

/// The produced reduction: nodes are (interned state, sleep set) pairs,
/// edges carry the action and whether they enter a fresh node or jump to a
/// subsuming completed one.
pub struct ReducedTs {
    pub table: StateTable,
    pub node_state: Vec<u32>,
    sleeps: Option<Vec<ActionSet>>,
    empty_sleep: ActionSet,
    pub edges: Vec<Edge>,
    pub root: u32,
}

impl ReducedTs {
    /// Assembles a graph from raw parts; used by tests and corruption
    /// hooks, not by the engine.
    pub fn from_parts(
        table: StateTable,
        node_state: Vec<u32>,
        sleeps: Option<Vec<ActionSet>>,
        edges: Vec<Edge>,
        root: u32,
        n_actions: usize,
    ) -> ReducedTs {
        ReducedTs {
            table,
            node_state,
            sleeps,
            empty_sleep: ActionSet::empty(n_actions),
            edges,
            root,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.node_state.len()
    }

    pub fn sleep(&self, node: u32) -> &ActionSet {
        match &self.sleeps {
            Some(v) => &v[node as usize],
            None => &self.empty_sleep,
        }
    }

    pub fn state_of(&self, node: u32) -> GlobalState {
        self.table.get(self.node_state[node as usize])
    }

    /// Edge indices grouped by source node.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_nodes()];
        for (i, e) in self.edges.iter().enumerate() {
            out[e.from as usize].push(i);
        }
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExploreStats {
    pub model: String,
    pub algo: String,
    pub order_digest: String,
    pub nodes: u64,
    pub edges: u64,
    pub subsumption_edges: u64,
    pub oracle_calls: u64,
    pub oracle_true: u64,
    #[serde(serialize_with = "ser_millis")]
    pub wall_time: Duration,
    #[serde(serialize_with = "ser_paths")]
    pub full_paths: Option<BigUint>,
}

fn ser_millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(d.as_millis() as u64)
}

fn ser_paths<S: serde::Serializer>(p: &Option<BigUint>, s: S) -> Result<S::Ok, S::Error> {
    match p {
        Some(v) => s.serialize_some(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LimitKind {
    Nodes,
    Time,
}

pub struct Exploration {
    pub ts: ReducedTs,
    pub stats: ExploreStats,
    pub interrupted: Option<LimitKind>,
}

/// FNV-1a over the ordered action names; identifies an action order in
/// stats output.
pub fn order_digest(sys: &System) -> String {
    let mut h: u64 = 0xcbf29ce484222325;
    for &a in &sys.order {
        for byte in sys.action_name(a).bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x100000001b3);
    }
    format!("{h:016x}")
}

enum Store {
    Off,
    StateEq(FxHashMap<u32, u32>),
    SleepSubset(FxHashMap<u32, SmallVec<[(ActionSet, u32); 1]>>),
}

impl Store {
    fn lookup(&self, state: u32, sleep: &ActionSet) -> Option<u32> {
        match self {
            Store::Off => None,
            Store::StateEq(map) => map.get(&state).copied(),
            Store::SleepSubset(map) => map.get(&state).and_then(|chain| {
                chain
                    .iter()
                    .find(|(sl, _)| sl.is_subset_of(sleep))
                    .map(|&(_, id)| id)
            }),
        }
    }

    fn insert(&mut self, state: u32, sleep: &ActionSet, node: u32) {
        match self {
            Store::Off => {}
            Store::StateEq(map) => {
                map.entry(state).or_insert(node);
            }
            Store::SleepSubset(map) => {
                let chain = map.entry(state).or_default();
                if chain.iter().any(|(sl, _)| sl.is_subset_of(sleep)) {
                    return;
                }
                chain.retain(|(sl, _)| !sleep.is_subset_of(sl));
                chain.push((sleep.clone(), node));
            }
        }
    }
}

struct Frame {
    node: u32,
    locals: Vec<u16>,
    /// The node's sleep set at creation (stored on completion).
    sleep0: ActionSet,
    /// Running set: sleep0 plus every action already handled here.
    running: ActionSet,
    /// Source actions minus sleep0, by order rank (lex chooser walks the
    /// cursor; the apifs chooser consults `remaining`).
    cands: Vec<ActionId>,
    cursor: usize,
    remaining: ActionSet,
}

struct Engine<'a> {
    sys: &'a System,
    idx: Option<HeuristicIndex>,
    config: &'a ExploreConfig,
    table: StateTable,
    node_state: Vec<u32>,
    sleeps: Option<Vec<ActionSet>>,
    edges: Vec<Edge>,
    store: Store,
    oracle_calls: u64,
    oracle_true: u64,
    ops: u64,
    deadline: Option<Instant>,
    enabled_buf: ActionSet,
}

impl<'a> Engine<'a> {
    fn source_set(&mut self, s: &GlobalState, sleep: &ActionSet) -> ActionSet {
        self.sys.enabled_into(s.locals(), &mut self.enabled_buf);
        let mut candidates = self.enabled_buf.clone();
        candidates.subtract(sleep);
        match self.config.source {
            SourceFn::Enabled => self.enabled_buf.clone(),
            SourceFn::MinClosure => {
                min_closure(self.sys, self.idx.as_ref().unwrap(), s, &candidates)
            }
            SourceFn::LexClosure => {
                lex_closure(self.sys, self.idx.as_ref().unwrap(), s, &candidates)
            }
            SourceFn::PSet => match self.sys.least(&candidates) {
                None => ActionSet::empty(self.sys.n_actions()),
                Some(b) => p_set(self.sys, self.idx.as_ref().unwrap(), s, b),
            },
        }
    }

    fn oracle_admits(&mut self, s: &GlobalState, blocked: &ActionSet) -> bool {
        if matches!(self.config.oracle, Oracle::AlwaysTrue) {
            return true;
        }
        self.sys.enabled_into(s.locals(), &mut self.enabled_buf);
        let mut b = self.enabled_buf.clone();
        b.subtract(blocked);
        self.oracle_calls += 1;
        let verdict = match self.config.oracle {
            Oracle::AlwaysTrue => unreachable!(),
            // a blown memo budget admits the child: exploring more is safe
            Oracle::ExactIfs { memo_limit } => {
                ifs_exact(self.sys, s, &b, memo_limit).unwrap_or(true)
            }
            Oracle::Pifs => heuristics::pifs(self.sys, self.idx.as_ref().unwrap(), s, &b),
            Oracle::Rpifs => heuristics::rpifs(self.sys, self.idx.as_ref().unwrap(), s, &b),
        };
        if verdict {
            self.oracle_true += 1;
        }
        verdict
    }

    fn new_node(&mut self, state_id: u32, sleep: &ActionSet) -> u32 {
        let id = self.node_state.len() as u32;
        self.node_state.push(state_id);
        if let Some(sleeps) = self.sleeps.as_mut() {
            sleeps.push(sleep.clone());
        }
        id
    }

    fn make_frame(&mut self, node: u32, locals: Vec<u16>, sleep: ActionSet) -> Frame {
        let state = GlobalState::new(locals.clone());
        let source = self.source_set(&state, &sleep);
        let mut remaining = source;
        remaining.subtract(&sleep);
        let mut cands: Vec<ActionId> = remaining.iter().collect();
        cands.sort_unstable_by_key(|&a| self.sys.rank(a));
        Frame {
            node,
            locals,
            running: sleep.clone(),
            sleep0: sleep,
            cands,
            cursor: 0,
            remaining,
        }
    }

    fn pick(&self, frame: &mut Frame) -> Option<ActionId> {
        match self.config.chooser {
            Chooser::Lex => {
                let a = frame.cands.get(frame.cursor).copied()?;
                frame.cursor += 1;
                frame.remaining.remove(a);
                Some(a)
            }
            Chooser::Apifs => {
                if frame.remaining.is_empty() {
                    return None;
                }
                let state = GlobalState::new(frame.locals.clone());
                let a = choose_action(
                    self.sys,
                    self.idx.as_ref().unwrap(),
                    &state,
                    &frame.remaining,
                );
                frame.remaining.remove(a);
                Some(a)
            }
        }
    }

    fn over_limit(&mut self) -> Option<LimitKind> {
        if let Some(limit) = self.config.node_limit {
            if self.node_state.len() >= limit {
                return Some(LimitKind::Nodes);
            }
        }
        self.ops += 1;
        if self.ops & 0xfff == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    return Some(LimitKind::Time);
                }
            }
        }
        None
    }
}

pub fn explore(sys: &System, config: &ExploreConfig) -> Exploration {
    let reordered;
    let sys = match &config.order {
        Some(order) => {
            reordered = sys
                .with_order(order.clone())
                .expect("config order must be a permutation of the alphabet");
            &reordered
        }
        None => sys,
    };

    let needs_index = !matches!(
        (config.oracle, config.source, config.chooser),
        (
            Oracle::AlwaysTrue | Oracle::ExactIfs { .. },
            SourceFn::Enabled,
            Chooser::Lex
        )
    );
    let start = Instant::now();
    let mut engine = Engine {
        sys,
        idx: needs_index.then(|| build_index(sys)),
        config,
        table: StateTable::new(sys),
        node_state: Vec::new(),
        sleeps: config.sleep_enabled.then(Vec::new),
        edges: Vec::new(),
        store: match config.subsumption {
            Subsumption::Off => Store::Off,
            Subsumption::StateEquality => Store::StateEq(FxHashMap::default()),
            Subsumption::SleepSubset => Store::SleepSubset(FxHashMap::default()),
        },
        oracle_calls: 0,
        oracle_true: 0,
        ops: 0,
        deadline: config.time_limit.map(|d| start + d),
        enabled_buf: ActionSet::empty(sys.n_actions()),
    };

    let root_state = sys.initial_state();
    let (root_sid, _) = engine.table.intern(root_state.locals());
    let no_sleep = ActionSet::empty(sys.n_actions());
    let root = engine.new_node(root_sid, &no_sleep);
    let mut stack = vec![engine.make_frame(root, root_state.locals().to_vec(), no_sleep.clone())];
    let mut interrupted = None;

    'outer: while let Some(frame) = stack.last_mut() {
        let Some(a) = engine.pick(frame) else {
            let done = stack.pop().expect("frame checked present");
            engine
                .store
                .insert(engine.node_state[done.node as usize], &done.sleep0, done.node);
            continue;
        };
        let parent = frame.node;
        let mut child_sleep = frame.running.clone();
        child_sleep.subtract(sys.dependents_of(a));
        frame.running.insert(a);

        let mut child_locals = frame.locals.clone();
        sys.apply(&mut child_locals, a);
        let (sid, _) = engine.table.intern(&child_locals);

        if let Some(target) = engine.store.lookup(sid, &child_sleep) {
            engine.edges.push(Edge {
                from: parent,
                to: target,
                action: a,
                kind: EdgeKind::Subsumption,
            });
            if let Some(kind) = engine.over_limit() {
                interrupted = Some(kind);
                break 'outer;
            }
            continue;
        }

        let child_state = GlobalState::new(child_locals.clone());
        if !engine.oracle_admits(&child_state, &child_sleep) {
            continue;
        }
        if !config.sleep_enabled {
            child_sleep = no_sleep.clone();
        }
        let child = engine.new_node(sid, &child_sleep);
        engine.edges.push(Edge {
            from: parent,
            to: child,
            action: a,
            kind: EdgeKind::Tree,
        });
        if let Some(kind) = engine.over_limit() {
            interrupted = Some(kind);
            break 'outer;
        }
        let child_frame = engine.make_frame(child, child_locals, child_sleep);
        stack.push(child_frame);
    }

    let subs = engine
        .edges
        .iter()
        .filter(|e| e.kind == EdgeKind::Subsumption)
        .count() as u64;
    let stats = ExploreStats {
        model: sys.name.clone(),
        algo: config.label.clone(),
        order_digest: order_digest(sys),
        nodes: engine.node_state.len() as u64,
        edges: engine.edges.len() as u64 - subs,
        subsumption_edges: subs,
        oracle_calls: engine.oracle_calls,
        oracle_true: engine.oracle_true,
        wall_time: start.elapsed(),
        full_paths: None,
    };
    Exploration {
        ts: ReducedTs {
            table: engine.table,
            node_state: engine.node_state,
            sleeps: engine.sleeps,
            empty_sleep: ActionSet::empty(sys.n_actions()),
            edges: engine.edges,
            root,
        },
        stats,
        interrupted,
    }
}

/// Tree exploration: [`explore`] with subsumption forced off.
pub fn explore_tree(sys: &System, config: &ExploreConfig) -> Exploration {
    let mut config = config.clone();
    config.subsumption = Subsumption::Off;
    explore(sys, &config)
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("graph has a cycle; path counting needs an acyclic input")]
pub struct CyclicGraph;

/// Exact number of root-to-sink paths, by dynamic programming in
/// topological order.
pub fn count_full_paths(ts: &ReducedTs) -> Result<BigUint, CyclicGraph> {
    let n = ts.n_nodes();
    let mut out_start = vec![0u32; n + 1];
    for e in &ts.edges {
        out_start[e.from as usize + 1] += 1;
    }
    for i in 0..n {
        out_start[i + 1] += out_start[i];
    }
    let mut targets = vec![0u32; ts.edges.len()];
    let mut fill = out_start.clone();
    for e in &ts.edges {
        targets[fill[e.from as usize] as usize] = e.to;
        fill[e.from as usize] += 1;
    }

    let mut in_deg = vec![0u32; n];
    for &t in &targets {
        in_deg[t as usize] += 1;
    }
    let mut queue: Vec<u32> = (0..n as u32).filter(|&v| in_deg[v as usize] == 0).collect();
    let mut counts: Vec<BigUint> = vec![BigUint::ZERO; n];
    counts[ts.root as usize] = BigUint::from(1u32);
    let mut seen = 0usize;
    let mut total = BigUint::ZERO;
    while let Some(v) = queue.pop() {
        seen += 1;
        let (s, e) = (out_start[v as usize] as usize, out_start[v as usize + 1] as usize);
        if s == e {
            total += &counts[v as usize];
        }
        for &t in &targets[s..e] {
            let c = counts[v as usize].clone();
            counts[t as usize] += c;
            in_deg[t as usize] -= 1;
            if in_deg[t as usize] == 0 {
                queue.push(t);
            }
        }
    }
    if seen != n {
        return Err(CyclicGraph);
    }
    Ok(total)
}

/// Deterministic DOT rendering; subsumption edges are dashed.
pub fn export_dot(sys: &System, ts: &ReducedTs) -> String {
    let mut out = String::from("digraph reduced {\n  node [shape=box];\n");
    for (i, &sid) in ts.node_state.iter().enumerate() {
        let sleep = ts.sleep(i as u32);
        if sleep.is_empty() {
            let _ = writeln!(out, "  n{i} [label=\"n{i} s{sid}\"];");
        } else {
            let names: Vec<&str> = sleep.iter().map(|a| sys.action_name(a)).collect();
            let _ = writeln!(
                out,
                "  n{i} [label=\"n{i} s{sid} sleep={{{}}}\"];",
                names.join(",")
            );
        }
    }
    for e in &ts.edges {
        let style = match e.kind {
            EdgeKind::Tree => "",
            EdgeKind::Subsumption => " style=dashed",
        };
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"{}];",
            e.from,
            e.to,
            sys.action_name(e.action),
            style
        );
    }
    out.push_str("}\n");
    out
}

pub const STATS_CSV_HEADER: &str =
    "model,algo,order,nodes,edges,subs_edges,paths,oracle_calls,time_ms";

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StatsFormat {
    Csv,
    Json,
}

/// One CSV row matching [`STATS_CSV_HEADER`], without a trailing newline.
pub fn stats_csv_row(stats: &ExploreStats) -> String {
    let paths = stats
        .full_paths
        .as_ref()
        .map(|p| p.to_string())
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{}",
        stats.model,
        stats.algo,
        stats.order_digest,
        stats.nodes,
        stats.edges,
        stats.subsumption_edges,
        paths,
        stats.oracle_calls,
        stats.wall_time.as_millis()
    )
}

pub fn export_stats(stats: &ExploreStats, format: StatsFormat) -> String {
    match format {
        StatsFormat::Csv => format!("{}\n{}\n", STATS_CSV_HEADER, stats_csv_row(stats)),
        StatsFormat::Json => {
            let mut s = serde_json::to_string_pretty(stats).expect("stats serialize");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_figures, gen_fig6, gen_philosophers};
    use crate::model::ProcKind;
    use crate::model::SystemBuilder;
    use crate::traces::lex_normal_form;

    fn fig(name: &str) -> System {
        builtin_figures().remove(name).unwrap()
    }

    /// All runs of the reduction, following every edge kind.
    fn runs(ts: &ReducedTs, sys: &System) -> Vec<String> {
        let adj = ts.out_edges();
        let mut out = Vec::new();
        let mut stack = vec![(ts.root, String::new())];
        while let Some((v, word)) = stack.pop() {
            if adj[v as usize].is_empty() {
                out.push(word);
                continue;
            }
            for &ei in &adj[v as usize] {
                let e = &ts.edges[ei];
                let mut w = word.clone();
                w.push_str(sys.action_name(e.action));
                stack.push((e.to, w));
            }
        }
        out.sort();
        out
    }

    #[test]
    fn reach_on_fig1_is_the_full_ts() {
        let sys = fig("fig1");
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        assert!(ex.interrupted.is_none());
        assert_eq!(ex.stats.nodes, 8);
        assert_eq!(ex.stats.edges + ex.stats.subsumption_edges, 9);
        assert_eq!(ex.stats.oracle_calls, 0);
        let paths = count_full_paths(&ex.ts).unwrap();
        assert_eq!(paths, BigUint::from(5u32));
        assert_eq!(runs(&ex.ts, &sys), vec!["bc", "be", "cb", "eab", "eb"]);
    }

    #[test]
    fn tree_with_exact_oracle_on_fig5() {
        let sys = fig("fig5");
        let config = ExploreConfig {
            oracle: Oracle::ExactIfs { memo_limit: 10_000 },
            sleep_enabled: true,
            ..ExploreConfig::default()
        };
        let ex = explore_tree(&sys, &config);
        assert_eq!(runs(&ex.ts, &sys), vec!["ab", "bc"]);
        // the node reached by b alone sleeps on a
        let b_edge = ex
            .ts
            .edges
            .iter()
            .find(|e| e.from == ex.ts.root && sys.action_name(e.action) == "b")
            .unwrap();
        let sleep = ex.ts.sleep(b_edge.to);
        let names: Vec<&str> = sleep.iter().map(|x| sys.action_name(x)).collect();
        assert_eq!(names, vec!["a"]);
    }

    #[test]
    fn tree_with_exact_oracle_is_class_optimal_on_fig1() {
        let sys = fig("fig1");
        let config = ExploreConfig {
            oracle: Oracle::ExactIfs { memo_limit: 10_000 },
            sleep_enabled: true,
            ..ExploreConfig::default()
        };
        let ex = explore_tree(&sys, &config);
        let tree_runs = runs(&ex.ts, &sys);
        assert_eq!(tree_runs.len(), 3);
        // each run is its own canonical form
        for r in &tree_runs {
            let word: Vec<ActionId> = r
                .chars()
                .map(|c| sys.action_by_name(&c.to_string()).unwrap())
                .collect();
            assert_eq!(lex_normal_form(&sys, &word), word);
        }
    }

    #[test]
    fn all_terminal_system_is_one_node() {
        let mut b = SystemBuilder::new("still");
        let c = b.process("C", ProcKind::Client).unwrap();
        b.init(c, "0");
        let s = b.process("S", ProcKind::Server).unwrap();
        b.init(s, "0");
        b.transition(s, "1", "a", "1"); // action exists, forever disabled
        b.transition(c, "1", "a", "2");
        let sys = b.build().unwrap();
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        assert_eq!(ex.stats.nodes, 1);
        assert_eq!(ex.ts.edges.len(), 0);
        assert_eq!(count_full_paths(&ex.ts).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn two_diamonds_have_four_paths() {
        let mut b = SystemBuilder::new("dd");
        let c = b.process("C", ProcKind::Client).unwrap();
        b.init(c, "0");
        b.transition(c, "0", "a", "1");
        b.transition(c, "0", "b", "1");
        b.transition(c, "1", "c", "2");
        b.transition(c, "1", "d", "2");
        for act in ["a", "b", "c", "d"] {
            let s = b.process(&format!("S_{act}"), ProcKind::Server).unwrap();
            b.init(s, "0");
            b.transition(s, "0", act, "0");
        }
        let sys = b.build().unwrap();
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        assert_eq!(count_full_paths(&ex.ts).unwrap(), BigUint::from(4u32));
    }

    #[test]
    fn exploration_is_deterministic() {
        let sys = fig("fig1");
        for preset in Preset::ALL {
            let a = explore(&sys, &ExploreConfig::preset(preset));
            let b = explore(&sys, &ExploreConfig::preset(preset));
            assert_eq!(export_dot(&sys, &a.ts), export_dot(&sys, &b.ts), "{preset:?}");
        }
    }

    fn exact_graph_config() -> ExploreConfig {
        ExploreConfig {
            oracle: Oracle::ExactIfs {
                memo_limit: 1_000_000,
            },
            source: SourceFn::Enabled,
            chooser: Chooser::Lex,
            sleep_enabled: true,
            subsumption: Subsumption::SleepSubset,
            label: "exact-graph".to_string(),
            ..ExploreConfig::default()
        }
    }

    /// Actions sorted by name: a1 a2 a3 b1 ... (interleaves the clients).
    fn alphabetic_order(sys: &System) -> Vec<ActionId> {
        let mut names: Vec<String> = sys.actions.iter().map(|a| a.name.clone()).collect();
        names.sort();
        names
            .iter()
            .map(|n| sys.action_by_name(n).unwrap())
            .collect()
    }

    #[test]
    fn order_override_changes_reduction() {
        let sys = gen_fig6(3);
        // process-major (declaration order): a1 b1 c1 d1 a2 ...
        let major = explore(&sys, &exact_graph_config());
        let mut config = exact_graph_config();
        config.order = Some(alphabetic_order(&sys));
        let alpha = explore(&sys, &config);
        assert!(
            alpha.stats.nodes > major.stats.nodes,
            "alphabetic {} vs process-major {}",
            alpha.stats.nodes,
            major.stats.nodes
        );
        assert_ne!(major.stats.order_digest, alpha.stats.order_digest);
    }

    #[test]
    fn node_limit_interrupts() {
        let sys = gen_philosophers(3, 1);
        let mut config = ExploreConfig::preset(Preset::Reach);
        config.node_limit = Some(5);
        let ex = explore(&sys, &config);
        assert_eq!(ex.interrupted, Some(LimitKind::Nodes));
        assert_eq!(ex.stats.nodes, 5);
    }

    #[test]
    fn stats_csv_and_json() {
        let sys = fig("fig1");
        let mut ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        ex.stats.full_paths = Some(count_full_paths(&ex.ts).unwrap());
        let csv = export_stats(&ex.stats, StatsFormat::Csv);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(STATS_CSV_HEADER));
        let row = lines.next().unwrap();
        assert!(row.starts_with("fig1,reach,"));
        assert!(row.contains(",8,"));
        assert!(row.contains(",5,"));

        let json = export_stats(&ex.stats, StatsFormat::Json);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["nodes"], 8);
        assert_eq!(v["full_paths"], "5");
        assert_eq!(v["model"], "fig1");
    }

    #[test]
    fn dot_export_shape() {
        let sys = fig("fig1");
        let ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        let dot = export_dot(&sys, &ex.ts);
        assert_eq!(dot.matches(" -> ").count(), 9);
        assert_eq!(dot.matches("label=\"n").count(), 8);
        assert_eq!(
            dot.matches("style=dashed").count(),
            ex.stats.subsumption_edges as usize
        );
    }

    #[test]
    fn cyclic_input_to_path_count_errors() {
        let sys = fig("fig1");
        let mut ex = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        // corrupt: close a cycle back to the root
        ex.ts.edges.push(Edge {
            from: (ex.ts.n_nodes() - 1) as u32,
            to: ex.ts.root,
            action: ActionId(0),
            kind: EdgeKind::Tree,
        });
        assert_eq!(count_full_paths(&ex.ts), Err(CyclicGraph));
    }

    #[test]
    fn presets_reduce_fig6_below_reach() {
        let sys = gen_fig6(3);
        let reach = explore(&sys, &ExploreConfig::preset(Preset::Reach));
        for preset in [Preset::PsetSleep, Preset::MinClosureSleep, Preset::FullSleep] {
            let ex = explore(&sys, &ExploreConfig::preset(preset));
            assert!(
                ex.stats.nodes < reach.stats.nodes,
                "{preset:?}: {} !< {}",
                ex.stats.nodes,
                reach.stats.nodes
            );
        }
    }
}
