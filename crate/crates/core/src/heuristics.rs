//! Polynomial heuristics steering reduced exploration: the PIFS family of
//! "could some maximal run start inside this set" tests, closures that build
//! covering source sets, and persistent-set construction.
//!
//! Everything is answered from a [`HeuristicIndex`] precomputed per process:
//! local action footprints, first actions of local paths reaching a target
//! action, and minimal process footprints guarding such paths.

use crate::model::{GlobalState, System};
use crate::sets::{ActionId, ActionSet, ProcId, ProcessSet};
use rustc_hash::FxHashMap;
use thiserror::Error;

/// Construction budget for the guarded-path tables, whose worst case is
/// exponential in the process count. With `fallback` set, exceeding
/// `max_triples` silently switches guarded queries to an on-the-fly search
/// of the local graph instead of failing.
#[derive(Clone, Copy, Debug)]
pub struct TripleBudget {
    pub max_triples: usize,
    pub fallback: bool,
}

impl Default for TripleBudget {
    fn default() -> Self {
        TripleBudget {
            max_triples: 1 << 20,
            fallback: true,
        }
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum IndexError {
    #[error("guarded-path table needs more than {budget} entries")]
    TripleBudgetExceeded { budget: usize },
}

#[derive(Debug)]
pub struct HeuristicIndex {
    /// Per process, per local state: every action labeling a transition on
    /// some local path from that state.
    reach_any: Vec<Vec<ActionSet>>,
    /// Per process: the process alphabet as a dense list, and id → position.
    local_actions: Vec<Vec<ActionId>>,
    local_pos: Vec<FxHashMap<ActionId, usize>>,
    /// Per process, per state, per local action `b`: actions that begin a
    /// local path performing `b` strictly later.
    first_to: Vec<Vec<Vec<ActionSet>>>,
    /// Per process, per state, per local action `b`: the ⊆-minimal process
    /// sets `R` such that a local path `x·b` exists with `dom(x) ⊆ R`.
    /// `None` when construction blew the budget and queries fall back to
    /// searching the local graph.
    triples: Option<Vec<Vec<Vec<Vec<ProcessSet>>>>>,
}

/// Inserts into a ⊆-minimal antichain; true when the candidate survived.
fn antichain_insert(chain: &mut Vec<ProcessSet>, cand: ProcessSet) -> bool {
    if chain.iter().any(|r| r.is_subset_of(&cand)) {
        return false;
    }
    chain.retain(|r| !cand.is_subset_of(r));
    chain.push(cand);
    true
}

pub fn build_index(sys: &System) -> HeuristicIndex {
    build_index_with(sys, TripleBudget::default())
        .expect("default budget falls back instead of failing")
}

pub fn build_index_with(sys: &System, budget: TripleBudget) -> Result<HeuristicIndex, IndexError> {
    let n_actions = sys.n_actions();
    let mut reach_any = Vec::with_capacity(sys.n_processes());
    let mut local_actions = Vec::with_capacity(sys.n_processes());
    let mut local_pos = Vec::with_capacity(sys.n_processes());

    for proc in &sys.processes {
        let n_states = proc.state_names.len();
        let mut reach = vec![ActionSet::empty(n_actions); n_states];
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n_states {
                for &(a, t) in &proc.steps[s] {
                    let before = reach[s].len();
                    let target = reach[t as usize].clone();
                    reach[s].insert(a);
                    reach[s].union_with(&target);
                    if reach[s].len() != before {
                        changed = true;
                    }
                }
            }
        }
        let acts: Vec<ActionId> = proc.alphabet.iter().collect();
        let pos: FxHashMap<ActionId, usize> =
            acts.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        reach_any.push(reach);
        local_actions.push(acts);
        local_pos.push(pos);
    }

    let mut first_to = Vec::with_capacity(sys.n_processes());
    for (pi, proc) in sys.processes.iter().enumerate() {
        let acts = &local_actions[pi];
        let mut table = vec![vec![ActionSet::empty(n_actions); acts.len()]; proc.state_names.len()];
        for (s, row) in table.iter_mut().enumerate() {
            for (bi, &b) in acts.iter().enumerate() {
                for &(c, t) in &proc.steps[s] {
                    if reach_any[pi][t as usize].contains(b) {
                        row[bi].insert(c);
                    }
                }
            }
        }
        first_to.push(table);
    }

    let mut stored = 0usize;
    let mut triples = Some(Vec::with_capacity(sys.n_processes()));
    'build: for (pi, proc) in sys.processes.iter().enumerate() {
        let acts = &local_actions[pi];
        let n_states = proc.state_names.len();
        let mut table: Vec<Vec<Vec<ProcessSet>>> = vec![vec![Vec::new(); acts.len()]; n_states];
        for (s, steps) in proc.steps.iter().enumerate() {
            for &(b, _) in steps {
                let bi = local_pos[pi][&b];
                if antichain_insert(&mut table[s][bi], ProcessSet::empty(sys.n_processes())) {
                    stored += 1;
                }
            }
        }
        let mut changed = true;
        while changed {
            changed = false;
            for s in 0..n_states {
                for &(a, t) in &proc.steps[s] {
                    // indices, not iterators: reads table[t] while writing
                    // table[s], and self-loops make t == s possible
                    #[allow(clippy::needless_range_loop)]
                    for bi in 0..acts.len() {
                        let cands: Vec<ProcessSet> = table[t as usize][bi].clone();
                        for mut cand in cands {
                            cand.union_with(sys.dom(a));
                            let before = table[s][bi].len();
                            if antichain_insert(&mut table[s][bi], cand) {
                                stored += 1 + table[s][bi].len();
                                stored -= 1 + before; // net change after evictions
                                changed = true;
                            }
                        }
                    }
                }
            }
            if stored > budget.max_triples {
                if budget.fallback {
                    triples = None;
                    break 'build;
                }
                return Err(IndexError::TripleBudgetExceeded {
                    budget: budget.max_triples,
                });
            }
        }
        if let Some(all) = triples.as_mut() {
            all.push(table);
        }
    }

    Ok(HeuristicIndex {
        reach_any,
        local_actions,
        local_pos,
        first_to,
        triples,
    })
}

impl HeuristicIndex {
    pub fn reach_any(&self, p: ProcId, state: u16) -> &ActionSet {
        &self.reach_any[p.index()][state as usize]
    }

    /// Actions beginning a local path of `p` from `state` that performs `b`
    /// strictly later; empty when `b` is not in `p`'s alphabet.
    pub fn first_to(&self, p: ProcId, state: u16, b: ActionId) -> Option<&ActionSet> {
        let bi = *self.local_pos[p.index()].get(&b)?;
        Some(&self.first_to[p.index()][state as usize][bi])
    }

    /// Is there a local path `x·b` of `p` from `state` with `dom(x) ⊆ r`?
    pub fn guarded(&self, sys: &System, p: ProcId, state: u16, r: &ProcessSet, b: ActionId) -> bool {
        let Some(&bi) = self.local_pos[p.index()].get(&b) else {
            return false;
        };
        if let Some(triples) = &self.triples {
            return triples[p.index()][state as usize][bi]
                .iter()
                .any(|m| m.is_subset_of(r));
        }
        // fallback: search the local graph using only transitions whose
        // action domain stays inside r
        let proc = &sys.processes[p.index()];
        let mut seen = vec![false; proc.state_names.len()];
        let mut stack = vec![state as usize];
        seen[state as usize] = true;
        while let Some(s) = stack.pop() {
            if proc.steps[s].iter().any(|&(a, _)| a == b) {
                return true;
            }
            for &(a, t) in &proc.steps[s] {
                if !seen[t as usize] && sys.dom(a).is_subset_of(r) {
                    seen[t as usize] = true;
                    stack.push(t as usize);
                }
            }
        }
        false
    }
}

/// Does every enabled action's domain meet `r`? Vacuously true at terminal
/// states.
pub fn wraps(sys: &System, r: &ProcessSet, s: &GlobalState) -> bool {
    sys.enabled(s).iter().all(|a| sys.dom(a).intersects(r))
}

/// One fixpoint round as shown by the debug CLI.
#[derive(Clone, Debug)]
pub struct PifsRound {
    pub start: ActionSet,
    pub wraps: bool,
    pub added: ActionSet,
}

fn pifs_core(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    b0: &ActionSet,
    guarded: bool,
    mut trace: Option<&mut Vec<PifsRound>>,
) -> (bool, ActionSet) {
    let n_actions = sys.n_actions();
    let mut b = b0.clone();
    loop {
        let d = sys.dom_of_set(&b);
        let wrapped = wraps(sys, &d, s);
        let mut added = ActionSet::empty(n_actions);
        if !wrapped {
            let snapshot = b.clone();
            for (pi, proc) in sys.processes.iter().enumerate() {
                let p = ProcId(pi as u16);
                let sp = s.local(p);
                let mut starts = snapshot.clone();
                starts.intersect_with(sys.locally_enabled(p, sp));
                for b_act in starts.iter() {
                    let t = proc.local_target(sp, b_act).expect("locally enabled");
                    for &c in &idx.local_actions[pi] {
                        if snapshot.contains(c) || added.contains(c) {
                            continue;
                        }
                        let dom = sys.dom_procs(c);
                        if dom.len() != 2 {
                            continue;
                        }
                        let q = if dom[0] == p { dom[1] } else { dom[0] };
                        if !sys.processes[q.index()].enables(s.local(q), c) {
                            continue;
                        }
                        let reachable = if guarded {
                            idx.guarded(sys, p, t, &d, c)
                        } else {
                            idx.first_to(p, sp, c)
                                .is_some_and(|f| f.contains(b_act))
                        };
                        if reachable {
                            added.insert(c);
                        }
                    }
                }
            }
        }
        if let Some(rounds) = trace.as_deref_mut() {
            rounds.push(PifsRound {
                start: b.clone(),
                wraps: wrapped,
                added: added.clone(),
            });
        }
        if wrapped {
            return (true, b);
        }
        if added.is_empty() {
            return (false, b);
        }
        b.union_with(&added);
    }
}

/// Could some maximal run from `s` have its first set inside `b`? One-sided:
/// `false` is definitive, `true` may overapproximate. Grows `b` with actions
/// that stick out of the covered processes and are locally reachable through
/// covered territory, until the covered domain wraps every enabled action or
/// nothing more can be added.
pub fn pifs(sys: &System, idx: &HeuristicIndex, s: &GlobalState, b: &ActionSet) -> bool {
    pifs_core(sys, idx, s, b, true, None).0
}

/// Like [`pifs`] but without the covered-domain guard on the local path, so
/// it accepts at least as often.
pub fn rpifs(sys: &System, idx: &HeuristicIndex, s: &GlobalState, b: &ActionSet) -> bool {
    pifs_core(sys, idx, s, b, false, None).0
}

/// [`pifs`] returning the grown action set along with the verdict.
pub fn apifs(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    b: &ActionSet,
) -> (bool, ActionSet) {
    pifs_core(sys, idx, s, b, true, None)
}

pub fn pifs_trace(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    b: &ActionSet,
) -> (bool, ActionSet, Vec<PifsRound>) {
    let mut rounds = Vec::new();
    let (verdict, final_b) = pifs_core(sys, idx, s, b, true, Some(&mut rounds));
    (verdict, final_b, rounds)
}

fn closure_core(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    b: ActionId,
    mut trace: Option<&mut Vec<ActionSet>>,
) -> ActionSet {
    let mut c_set = ActionSet::empty(sys.n_actions());
    for &p in sys.dom_procs(b) {
        c_set.union_with(sys.locally_enabled(p, s.local(p)));
    }
    if let Some(rounds) = trace.as_deref_mut() {
        rounds.push(c_set.clone());
    }
    loop {
        let mut added = ActionSet::empty(sys.n_actions());
        for b2 in c_set.iter() {
            let dom = sys.dom_procs(b2);
            if dom.len() != 2 {
                continue;
            }
            for (p, q) in [(dom[0], dom[1]), (dom[1], dom[0])] {
                if sys.processes[p.index()].enables(s.local(p), b2) {
                    if let Some(f) = idx.first_to(q, s.local(q), b2) {
                        added.union_with(f);
                    }
                }
            }
        }
        added.subtract(&c_set);
        if added.is_empty() {
            return c_set;
        }
        if let Some(rounds) = trace.as_deref_mut() {
            rounds.push(added.clone());
        }
        c_set.union_with(&added);
    }
}

/// Least action set containing everything locally enabled at `b`'s
/// processes and closed under: whenever one side of a member is locally
/// enabled, the other side's ways of first moving toward it are included.
/// Intersected with `enabled(s)` this is a covering source set.
pub fn closure(sys: &System, idx: &HeuristicIndex, s: &GlobalState, b: ActionId) -> ActionSet {
    closure_core(sys, idx, s, b, None)
}

/// Seed followed by each round's additions, for the debug CLI.
pub fn closure_trace(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    b: ActionId,
) -> (ActionSet, Vec<ActionSet>) {
    let mut rounds = Vec::new();
    let result = closure_core(sys, idx, s, b, Some(&mut rounds));
    (result, rounds)
}

/// Least process set containing `dom(b)` and closed under taking the
/// domains of every action in a member's local footprint.
pub fn p_closure(sys: &System, idx: &HeuristicIndex, s: &GlobalState, b: ActionId) -> ProcessSet {
    let mut r = sys.dom(b).clone();
    let mut frontier: Vec<ProcId> = r.iter().collect();
    while let Some(p) = frontier.pop() {
        for a in idx.reach_any(p, s.local(p)).iter() {
            for &q in sys.dom_procs(a) {
                if !r.contains(q) {
                    r.insert(q);
                    frontier.push(q);
                }
            }
        }
    }
    r
}

/// Enabled actions whose domain stays inside [`p_closure`]; a persistent
/// set at `s`.
pub fn p_set(sys: &System, idx: &HeuristicIndex, s: &GlobalState, b: ActionId) -> ActionSet {
    let r = p_closure(sys, idx, s, b);
    let mut out = ActionSet::empty(sys.n_actions());
    for a in sys.enabled(s).iter() {
        if sys.dom(a).is_subset_of(&r) {
            out.insert(a);
        }
    }
    out
}

/// Cardinality-least `closure(s,b) ∩ candidates` over `b ∈ candidates`,
/// seeded with `candidates` itself; ties go to the order-least `b`.
/// `candidates` is the enabled set minus the caller's sleep set.
pub fn min_closure(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    candidates: &ActionSet,
) -> ActionSet {
    let mut best = candidates.clone();
    let mut order: Vec<ActionId> = candidates.iter().collect();
    order.sort_unstable_by_key(|&a| sys.rank(a));
    for b in order {
        let mut cand = closure(sys, idx, s, b);
        cand.intersect_with(candidates);
        if cand.len() < best.len() {
            best = cand;
        }
    }
    best
}

/// `closure` of the order-least member of `candidates`, intersected with
/// `candidates`; empty when there are none.
pub fn lex_closure(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    candidates: &ActionSet,
) -> ActionSet {
    match sys.least(candidates) {
        None => ActionSet::empty(sys.n_actions()),
        Some(b) => {
            let mut out = closure(sys, idx, s, b);
            out.intersect_with(candidates);
            out
        }
    }
}

/// First `b ∈ candidates` (in action order) whose [`apifs`] verdict is true;
/// otherwise the one growing the largest set, ties to the order-least.
pub fn choose_action(
    sys: &System,
    idx: &HeuristicIndex,
    s: &GlobalState,
    candidates: &ActionSet,
) -> ActionId {
    assert!(!candidates.is_empty(), "choose_action needs candidates");
    let mut order: Vec<ActionId> = candidates.iter().collect();
    order.sort_unstable_by_key(|&a| sys.rank(a));
    let mut best = order[0];
    let mut best_size = 0usize;
    for b in order {
        let single = ActionSet::singleton(sys.n_actions(), b);
        let (ok, grown) = apifs(sys, idx, s, &single);
        if ok {
            return b;
        }
        if grown.len() > best_size {
            best = b;
            best_size = grown.len();
        }
    }
    best
}
