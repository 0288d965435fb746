//! Commutation equivalence of runs. Two runs are equivalent when one can be
//! turned into the other by repeatedly swapping adjacent actions with
//! disjoint domains. The module computes the canonical (lex least) member of
//! a run's class, the set of actions that can start some equivalent run
//! (its first set), and an exact decision for whether a state admits a
//! maximal run whose first set stays inside a given action set.

use crate::model::{GlobalState, System};
use crate::sets::{ActionId, ActionSet, ProcessSet};
use rustc_hash::FxHashMap;

/// Labels at the dependence-minimal positions of `word`: position `i` is
/// minimal when no earlier position holds a dependent action. These are
/// exactly the actions some equivalent word can start with.
pub fn first_set(sys: &System, word: &[ActionId]) -> ActionSet {
    let mut out = ActionSet::empty(sys.n_actions());
    let mut prefix_dom = ProcessSet::empty(sys.n_processes());
    for &a in word {
        if !sys.dom(a).intersects(&prefix_dom) {
            out.insert(a);
        }
        prefix_dom.union_with(sys.dom(a));
    }
    out
}

/// Indices of the dependence-minimal positions of `word`, ascending.
fn minimal_positions(sys: &System, word: &[ActionId]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut prefix_dom = ProcessSet::empty(sys.n_processes());
    for (i, &a) in word.iter().enumerate() {
        if !sys.dom(a).intersects(&prefix_dom) {
            out.push(i);
        }
        prefix_dom.union_with(sys.dom(a));
    }
    out
}

/// Canonical representative of the equivalence class of `word`: repeatedly
/// extract the least minimal action under the system's action order.
/// Distinct minimal positions always carry distinct actions, so the choice
/// is unambiguous.
pub fn lex_normal_form(sys: &System, word: &[ActionId]) -> Vec<ActionId> {
    let mut rest = word.to_vec();
    let mut out = Vec::with_capacity(rest.len());
    while !rest.is_empty() {
        let pos = minimal_positions(sys, &rest);
        let best = pos
            .into_iter()
            .min_by_key(|&i| sys.rank(rest[i]))
            .expect("non-empty word has a minimal position");
        out.push(rest.remove(best));
    }
    out
}

pub fn trace_equivalent(sys: &System, u: &[ActionId], v: &[ActionId]) -> bool {
    if u.len() != v.len() {
        return false;
    }
    lex_normal_form(sys, u) == lex_normal_form(sys, v)
}

struct Frame {
    locals: Vec<u16>,
    via: Option<ActionId>,
    acts: Vec<ActionId>,
    next: usize,
}

/// Depth-first enumeration of the maximal runs from a state, branching in
/// the system's action order. Lazy: memory is bounded by the run length.
pub struct MaximalRuns<'a> {
    sys: &'a System,
    frames: Vec<Frame>,
    word: Vec<ActionId>,
    started: bool,
}

impl<'a> MaximalRuns<'a> {
    fn make_frame(&self, locals: Vec<u16>, via: Option<ActionId>) -> Frame {
        let mut enabled = ActionSet::empty(self.sys.n_actions());
        self.sys.enabled_into(&locals, &mut enabled);
        let mut acts: Vec<ActionId> = enabled.iter().collect();
        acts.sort_unstable_by_key(|&a| self.sys.rank(a));
        Frame {
            locals,
            via,
            acts,
            next: 0,
        }
    }
}

impl<'a> Iterator for MaximalRuns<'a> {
    type Item = Vec<ActionId>;

    fn next(&mut self) -> Option<Vec<ActionId>> {
        if !self.started {
            self.started = true;
            let root = self.make_frame(self.frames[0].locals.clone(), None);
            let leaf = root.acts.is_empty();
            self.frames[0] = root;
            if leaf {
                return Some(Vec::new());
            }
        }
        loop {
            let top = self.frames.last_mut()?;
            if top.next >= top.acts.len() {
                let done = self.frames.pop().expect("stack checked non-empty");
                if done.via.is_some() {
                    self.word.pop();
                }
                continue;
            }
            let a = top.acts[top.next];
            top.next += 1;
            let mut locals = top.locals.clone();
            self.sys.apply(&mut locals, a);
            let frame = self.make_frame(locals, Some(a));
            let leaf = frame.acts.is_empty();
            self.frames.push(frame);
            self.word.push(a);
            if leaf {
                return Some(self.word.clone());
            }
        }
    }
}

pub fn enumerate_maximal_runs<'a>(sys: &'a System, from: &GlobalState) -> MaximalRuns<'a> {
    MaximalRuns {
        sys,
        frames: vec![Frame {
            locals: from.locals().to_vec(),
            via: None,
            acts: Vec::new(),
            next: 0,
        }],
        word: Vec::new(),
        started: false,
    }
}

/// Distinct first sets over all maximal runs from `from`, or `None` when
/// more than `max_runs` runs were seen. A terminal state yields the family
/// whose only member is the empty set.
pub fn first_family(sys: &System, from: &GlobalState, max_runs: usize) -> Option<Vec<ActionSet>> {
    let mut out: Vec<ActionSet> = Vec::new();
    for (count, run) in enumerate_maximal_runs(sys, from).enumerate() {
        if count >= max_runs {
            return None;
        }
        let f = first_set(sys, &run);
        if !out.contains(&f) {
            out.push(f);
        }
    }
    Some(out)
}

/// Does every non-empty member of `family` intersect `b`?
pub fn is_covering(family: &[ActionSet], b: &ActionSet) -> bool {
    family.iter().all(|f| f.is_empty() || f.intersects(b))
}

/// Exact decision of "some maximal run from `from` has its first set inside
/// `b`". A run qualifies iff each of its actions is in `b` or depends on an
/// earlier action, so the search only needs the current state plus the
/// processes touched so far that can still matter (those in the domain of
/// some action outside `b`). Memoized on that pair; returns `None` when the
/// memo table would exceed `max_memo` entries (never a silent pass).
pub fn ifs_exact(
    sys: &System,
    from: &GlobalState,
    b: &ActionSet,
    max_memo: usize,
) -> Option<bool> {
    let mut relevant = ProcessSet::empty(sys.n_processes());
    for i in 0..sys.n_actions() {
        let a = ActionId(i as u16);
        if !b.contains(a) {
            relevant.union_with(sys.dom(a));
        }
    }
    let mut memo: FxHashMap<(Vec<u16>, ProcessSet), bool> = FxHashMap::default();
    let mut enabled_buf = ActionSet::empty(sys.n_actions());
    search(
        sys,
        from.locals().to_vec(),
        ProcessSet::empty(sys.n_processes()),
        b,
        &relevant,
        &mut memo,
        &mut enabled_buf,
        max_memo,
    )
}

#[allow(clippy::too_many_arguments)]
fn search(
    sys: &System,
    locals: Vec<u16>,
    touched: ProcessSet,
    b: &ActionSet,
    relevant: &ProcessSet,
    memo: &mut FxHashMap<(Vec<u16>, ProcessSet), bool>,
    enabled_buf: &mut ActionSet,
    max_memo: usize,
) -> Option<bool> {
    let key = (locals, touched);
    if let Some(&hit) = memo.get(&key) {
        return Some(hit);
    }
    if memo.len() >= max_memo {
        return None;
    }
    let (locals, touched) = key;
    sys.enabled_into(&locals, enabled_buf);
    if enabled_buf.is_empty() {
        memo.insert((locals, touched), true);
        return Some(true);
    }
    let acts: Vec<ActionId> = enabled_buf.iter().collect();
    let mut found = false;
    for a in acts {
        if !b.contains(a) && !sys.dom(a).intersects(&touched) {
            continue;
        }
        let mut next_locals = locals.clone();
        sys.apply(&mut next_locals, a);
        let mut next_touched = touched.clone();
        let mut add = sys.dom(a).clone();
        add.intersect_with(relevant);
        next_touched.union_with(&add);
        match search(
            sys,
            next_locals,
            next_touched,
            b,
            relevant,
            memo,
            enabled_buf,
            max_memo,
        ) {
            Some(true) => {
                found = true;
                break;
            }
            Some(false) => {}
            None => return None,
        }
    }
    memo.insert((locals, touched), found);
    Some(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{builtin_figures, gen_random_system, RandomConfig};
    use std::collections::BTreeSet;

    fn fig1() -> System {
        builtin_figures().remove("fig1").unwrap()
    }

    fn word(sys: &System, s: &str) -> Vec<ActionId> {
        s.chars()
            .map(|c| sys.action_by_name(&c.to_string()).unwrap())
            .collect()
    }

    fn spell(sys: &System, w: &[ActionId]) -> String {
        w.iter().map(|&a| sys.action_name(a)).collect()
    }

    /// All words equivalent to `w`, by closing under adjacent swaps of
    /// independent actions. Definitional, for cross-checking.
    fn swap_closure(sys: &System, w: &[ActionId]) -> BTreeSet<Vec<ActionId>> {
        let mut seen = BTreeSet::new();
        let mut queue = vec![w.to_vec()];
        seen.insert(w.to_vec());
        while let Some(u) = queue.pop() {
            for i in 0..u.len().saturating_sub(1) {
                if !sys.dependent(u[i], u[i + 1]) {
                    let mut v = u.clone();
                    v.swap(i, i + 1);
                    if seen.insert(v.clone()) {
                        queue.push(v);
                    }
                }
            }
        }
        seen
    }

    #[test]
    fn fig1_runs_in_order() {
        let sys = fig1();
        let runs: Vec<String> = enumerate_maximal_runs(&sys, &sys.initial_state())
            .map(|r| spell(&sys, &r))
            .collect();
        assert_eq!(runs, vec!["bc", "be", "cb", "eab", "eb"]);
    }

    #[test]
    fn terminal_state_has_one_empty_run() {
        let sys = fig1();
        let b = sys.action_by_name("b").unwrap();
        let c = sys.action_by_name("c").unwrap();
        let mut s = sys.initial_state();
        s = sys.step(&s, b).unwrap();
        s = sys.step(&s, c).unwrap();
        let runs: Vec<_> = enumerate_maximal_runs(&sys, &s).collect();
        assert_eq!(runs, vec![Vec::new()]);
        assert_eq!(first_family(&sys, &s, 10), Some(vec![ActionSet::empty(4)]));
    }

    #[test]
    fn fig1_first_sets() {
        let sys = fig1();
        let f = |s: &str| {
            first_set(&sys, &word(&sys, s))
                .iter()
                .map(|a| sys.action_name(a).to_string())
                .collect::<Vec<_>>()
        };
        assert_eq!(f("eab"), vec!["e"]);
        assert_eq!(f("eb"), vec!["b", "e"]);
        assert_eq!(f("bc"), vec!["b", "c"]);
        assert_eq!(f("cb"), vec!["b", "c"]);
        assert_eq!(f(""), Vec::<String>::new());
    }

    #[test]
    fn fig1_first_family_and_covering() {
        let sys = fig1();
        let family = first_family(&sys, &sys.initial_state(), 100).unwrap();
        assert_eq!(family.len(), 3);
        let to_set = |names: &[&str]| {
            let mut s = ActionSet::empty(sys.n_actions());
            for n in names {
                s.insert(sys.action_by_name(n).unwrap());
            }
            s
        };
        assert!(family.contains(&to_set(&["e"])));
        assert!(family.contains(&to_set(&["b", "e"])));
        assert!(family.contains(&to_set(&["b", "c"])));
        assert!(is_covering(&family, &to_set(&["b", "c", "e"])));
        assert!(is_covering(&family, &to_set(&["b", "e"])));
        assert!(!is_covering(&family, &to_set(&["b"])));
        assert!(!is_covering(&family, &to_set(&["b", "c"])));
    }

    #[test]
    fn first_family_cap_reports_overflow() {
        let sys = fig1();
        assert_eq!(first_family(&sys, &sys.initial_state(), 3), None);
    }

    #[test]
    fn fig1_normal_forms() {
        let sys = fig1();
        let nf = |s: &str| spell(&sys, &lex_normal_form(&sys, &word(&sys, s)));
        assert_eq!(nf("eb"), "be");
        assert_eq!(nf("be"), "be");
        assert_eq!(nf("cb"), "bc");
        assert_eq!(nf("eab"), "eab");
        assert!(trace_equivalent(&sys, &word(&sys, "eb"), &word(&sys, "be")));
        assert!(!trace_equivalent(&sys, &word(&sys, "eb"), &word(&sys, "bc")));
        assert!(!trace_equivalent(&sys, &word(&sys, "eb"), &word(&sys, "eab")));
    }

    #[test]
    fn fig1_exact_initial_fragments() {
        let sys = fig1();
        let s0 = sys.initial_state();
        let q = |names: &[&str]| {
            let mut s = ActionSet::empty(sys.n_actions());
            for n in names {
                s.insert(sys.action_by_name(n).unwrap());
            }
            ifs_exact(&sys, &s0, &s, 10_000).unwrap()
        };
        assert!(q(&["e"]));
        assert!(q(&["b", "c"]));
        assert!(q(&["b", "e"]));
        assert!(q(&["a", "b", "c", "e"]));
        assert!(!q(&["b"]));
        assert!(!q(&["c"]));
        assert!(!q(&["a"]));
        assert!(!q(&[]));
    }

    #[test]
    fn ifs_memo_cap_is_inconclusive_not_false() {
        let sys = fig1();
        let s0 = sys.initial_state();
        let mut b = ActionSet::empty(sys.n_actions());
        b.insert(sys.action_by_name("e").unwrap());
        assert_eq!(ifs_exact(&sys, &s0, &b, 0), None);
    }

    #[test]
    fn first_set_matches_swap_closure_heads() {
        let sys = fig1();
        for run in enumerate_maximal_runs(&sys, &sys.initial_state()) {
            let closure = swap_closure(&sys, &run);
            let heads: BTreeSet<ActionId> =
                closure.iter().filter_map(|v| v.first().copied()).collect();
            let first: BTreeSet<ActionId> = first_set(&sys, &run).iter().collect();
            assert_eq!(first, heads, "run {}", spell(&sys, &run));
        }
    }

    #[test]
    fn random_systems_against_definitional_oracles() {
        let cfg = RandomConfig::default();
        for seed in 0..25 {
            let sys = gen_random_system(cfg, seed);
            let runs: Vec<Vec<ActionId>> = enumerate_maximal_runs(&sys, &sys.initial_state())
                .take(200)
                .collect();
            for run in runs.iter().filter(|r| r.len() <= 8) {
                let closure = swap_closure(&sys, run);

                let heads: BTreeSet<ActionId> =
                    closure.iter().filter_map(|v| v.first().copied()).collect();
                let first: BTreeSet<ActionId> = first_set(&sys, run).iter().collect();
                assert_eq!(first, heads, "seed {seed}");

                // normal form is the rank-lex least member of the class
                let nf = lex_normal_form(&sys, run);
                let least = closure
                    .iter()
                    .min_by_key(|v| v.iter().map(|&a| sys.rank(a)).collect::<Vec<_>>())
                    .unwrap();
                assert_eq!(&nf, least, "seed {seed}");
                assert!(closure.contains(&nf));

                for other in runs.iter().filter(|r| r.len() <= 8) {
                    assert_eq!(
                        trace_equivalent(&sys, run, other),
                        closure.contains(other),
                        "seed {seed}"
                    );
                }
            }
        }
    }

    #[test]
    fn ifs_exact_matches_run_enumeration() {
        let cfg = RandomConfig::default();
        for seed in 0..40 {
            let sys = gen_random_system(cfg, seed);
            let s0 = sys.initial_state();
            let n = sys.n_actions();
            let mut candidates: Vec<ActionSet> = vec![
                ActionSet::empty(n),
                ActionSet::full(n),
                sys.enabled(&s0),
            ];
            for k in 0..n {
                candidates.push(ActionSet::singleton(n, ActionId(k as u16)));
            }
            // a couple of pseudo-random subsets, seed-determined
            for salt in [3u64, 5] {
                let mut s = ActionSet::empty(n);
                for k in 0..n {
                    if (seed.wrapping_mul(salt).wrapping_add(k as u64 * 7)) % 3 == 0 {
                        s.insert(ActionId(k as u16));
                    }
                }
                candidates.push(s);
            }
            for b in candidates {
                let brute = enumerate_maximal_runs(&sys, &s0)
                    .take(5_000)
                    .any(|run| first_set(&sys, &run).is_subset_of(&b));
                assert_eq!(
                    ifs_exact(&sys, &s0, &b, 100_000),
                    Some(brute),
                    "seed {seed}, b {b:?}"
                );
            }
        }
    }
}
