//! Client/server systems: finite local transition systems that synchronize
//! pairwise, one client with one server per action.
//!
//! A [`System`] owns the processes, the action alphabet, and the linear order
//! on actions used by exploration. Global semantics (`enabled`, `step`) are
//! derived from the local transition tables; a global state is the tuple of
//! local states. Clients are required to be acyclic, which makes the product
//! acyclic, so every run eventually reaches a terminal state.

use crate::sets::{ActionId, ActionSet, Bits, ProcId, ProcessSet};
use indexmap::IndexSet;
use rustc_hash::{FxBuildHasher, FxHashMap};
use smallvec::SmallVec;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProcKind {
    Client,
    Server,
}

#[derive(Clone, Debug)]
pub struct Process {
    pub name: String,
    pub kind: ProcKind,
    pub state_names: Vec<String>,
    pub init: u16,
    /// Outgoing transitions per local state, in declaration order.
    pub steps: Vec<Vec<(ActionId, u16)>>,
    pub alphabet: ActionSet,
}

impl Process {
    pub fn local_target(&self, state: u16, action: ActionId) -> Option<u16> {
        self.steps[state as usize]
            .iter()
            .find(|(a, _)| *a == action)
            .map(|(_, t)| *t)
    }

    pub fn enables(&self, state: u16, action: ActionId) -> bool {
        self.local_target(state, action).is_some()
    }
}

#[derive(Clone, Debug)]
pub struct ActionInfo {
    pub name: String,
    /// Processes whose alphabet contains the action, in process order.
    /// Exactly one client and one server for a valid system.
    pub dom: SmallVec<[ProcId; 2]>,
}

/// Tuple of local states, one per process.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GlobalState {
    locals: Box<[u16]>,
}

impl GlobalState {
    pub fn new(locals: Vec<u16>) -> Self {
        GlobalState {
            locals: locals.into_boxed_slice(),
        }
    }

    pub fn local(&self, p: ProcId) -> u16 {
        self.locals[p.index()]
    }

    pub fn locals(&self) -> &[u16] {
        &self.locals
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("action {action} not enabled")]
pub struct NotEnabled {
    pub action: String,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Violation {
    Nondeterministic {
        process: String,
        state: String,
        action: String,
    },
    BadDomain {
        action: String,
        clients: usize,
        servers: usize,
    },
    CyclicClient {
        process: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Nondeterministic {
                process,
                state,
                action,
            } => write!(
                f,
                "process {process} has two {action}-transitions from state {state}"
            ),
            Violation::BadDomain {
                action,
                clients,
                servers,
            } => write!(
                f,
                "action {action} belongs to {clients} client(s) and {servers} server(s), expected one of each"
            ),
            Violation::CyclicClient { process } => {
                write!(f, "client {process} not acyclic")
            }
        }
    }
}

#[derive(Clone)]
pub struct System {
    pub name: String,
    pub processes: Vec<Process>,
    pub actions: Vec<ActionInfo>,
    /// Linear order on actions: `order[0]` is the least action.
    pub order: Vec<ActionId>,
    rank: Vec<u16>,
    dom_sets: Vec<ProcessSet>,
    deps: Vec<ActionSet>,
    /// Per process, per local state: actions of the process enabled there.
    locally_enabled: Vec<Vec<ActionSet>>,
    /// Per process, per local state: complement(alphabet) | locally_enabled,
    /// so that global enabledness is the conjunction over all processes.
    ok_masks: Vec<Vec<ActionSet>>,
    action_index: FxHashMap<String, ActionId>,
    proc_index: FxHashMap<String, ProcId>,
}

impl System {
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn n_processes(&self) -> usize {
        self.processes.len()
    }

    pub fn action_name(&self, a: ActionId) -> &str {
        &self.actions[a.index()].name
    }

    pub fn action_by_name(&self, name: &str) -> Option<ActionId> {
        self.action_index.get(name).copied()
    }

    pub fn proc_by_name(&self, name: &str) -> Option<ProcId> {
        self.proc_index.get(name).copied()
    }

    pub fn rank(&self, a: ActionId) -> u16 {
        self.rank[a.index()]
    }

    /// Least action of a non-empty set under the system order.
    pub fn least(&self, set: &ActionSet) -> Option<ActionId> {
        set.iter().min_by_key(|a| self.rank(*a))
    }

    pub fn dom(&self, a: ActionId) -> &ProcessSet {
        &self.dom_sets[a.index()]
    }

    pub fn dom_procs(&self, a: ActionId) -> &[ProcId] {
        &self.actions[a.index()].dom
    }

    pub fn dependent(&self, a: ActionId, b: ActionId) -> bool {
        self.dom_sets[a.index()].intersects(&self.dom_sets[b.index()])
    }

    /// All actions dependent on `a`, including `a` itself.
    pub fn dependents_of(&self, a: ActionId) -> &ActionSet {
        &self.deps[a.index()]
    }

    pub fn dom_of_word(&self, word: &[ActionId]) -> ProcessSet {
        let mut r = ProcessSet::empty(self.n_processes());
        for &a in word {
            r.union_with(self.dom(a));
        }
        r
    }

    pub fn dom_of_set(&self, set: &ActionSet) -> ProcessSet {
        let mut r = ProcessSet::empty(self.n_processes());
        for a in set.iter() {
            r.union_with(self.dom(a));
        }
        r
    }

    pub fn initial_state(&self) -> GlobalState {
        GlobalState::new(self.processes.iter().map(|p| p.init).collect())
    }

    pub fn locally_enabled(&self, p: ProcId, state: u16) -> &ActionSet {
        &self.locally_enabled[p.index()][state as usize]
    }

    pub fn enabled(&self, s: &GlobalState) -> ActionSet {
        let mut out = ActionSet::full(self.n_actions());
        self.enabled_into(s.locals(), &mut out);
        out
    }

    /// Writes the enabled set of the state given by `locals` into `out`
    /// (which is overwritten).
    pub fn enabled_into(&self, locals: &[u16], out: &mut ActionSet) {
        debug_assert_eq!(locals.len(), self.n_processes());
        *out = ActionSet::full(self.n_actions());
        for (p, &ls) in locals.iter().enumerate() {
            out.intersect_with(&self.ok_masks[p][ls as usize]);
        }
    }

    pub fn is_terminal(&self, s: &GlobalState) -> bool {
        self.enabled(s).is_empty()
    }

    pub fn step(&self, s: &GlobalState, a: ActionId) -> Result<GlobalState, NotEnabled> {
        let mut locals = s.locals().to_vec();
        for &p in self.dom_procs(a) {
            match self.processes[p.index()].local_target(locals[p.index()], a) {
                Some(t) => locals[p.index()] = t,
                None => {
                    return Err(NotEnabled {
                        action: self.action_name(a).to_string(),
                    })
                }
            }
        }
        Ok(GlobalState::new(locals))
    }

    /// In-place step for exploration loops; the action must be enabled.
    pub fn apply(&self, locals: &mut [u16], a: ActionId) {
        for &p in self.dom_procs(a) {
            let t = self.processes[p.index()]
                .local_target(locals[p.index()], a)
                .expect("apply called with a disabled action");
            locals[p.index()] = t;
        }
    }

    /// Actions `c` with `dom(c) = {p, q}`, `p` in `R`, `q` outside `R`, and
    /// `c` locally enabled at `q` in `s`.
    pub fn sticks_from(&self, s: &GlobalState, r: &ProcessSet) -> ActionSet {
        let mut out = ActionSet::empty(self.n_actions());
        for (i, info) in self.actions.iter().enumerate() {
            let c = ActionId(i as u16);
            if info.dom.len() != 2 {
                continue;
            }
            let (p0, p1) = (info.dom[0], info.dom[1]);
            for (p, q) in [(p0, p1), (p1, p0)] {
                if r.contains(p)
                    && !r.contains(q)
                    && self.processes[q.index()].enables(s.local(q), c)
                {
                    out.insert(c);
                }
            }
        }
        out
    }

    /// Same system under a different action order; `order` must be a
    /// permutation of all actions.
    pub fn with_order(&self, order: Vec<ActionId>) -> Result<System, BuildError> {
        if order.len() != self.n_actions() {
            return Err(BuildError::BadOrder);
        }
        let mut seen = Bits::empty(self.n_actions().max(1));
        for a in &order {
            if a.index() >= self.n_actions() || seen.contains(a.index()) {
                return Err(BuildError::BadOrder);
            }
            seen.insert(a.index());
        }
        let mut out = self.clone();
        let mut rank = vec![0u16; order.len()];
        for (r, a) in order.iter().enumerate() {
            rank[a.index()] = r as u16;
        }
        out.order = order;
        out.rank = rank;
        Ok(out)
    }

    pub fn format_state(&self, s: &GlobalState) -> String {
        let parts: Vec<String> = self
            .processes
            .iter()
            .zip(s.locals())
            .map(|(p, &ls)| format!("{}={}", p.name, p.state_names[ls as usize]))
            .collect();
        format!("({})", parts.join(", "))
    }

    /// Reports every violation of action determinism, binary client/server
    /// domains, and client acyclicity.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for proc in &self.processes {
            for (si, steps) in proc.steps.iter().enumerate() {
                for (k, (a, _)) in steps.iter().enumerate() {
                    if steps[..k].iter().any(|(b, _)| b == a) {
                        out.push(Violation::Nondeterministic {
                            process: proc.name.clone(),
                            state: proc.state_names[si].clone(),
                            action: self.action_name(*a).to_string(),
                        });
                    }
                }
            }
        }
        for info in &self.actions {
            let clients = info
                .dom
                .iter()
                .filter(|p| self.processes[p.index()].kind == ProcKind::Client)
                .count();
            let servers = info.dom.len() - clients;
            if clients != 1 || servers != 1 {
                out.push(Violation::BadDomain {
                    action: info.name.clone(),
                    clients,
                    servers,
                });
            }
        }
        for proc in &self.processes {
            if proc.kind == ProcKind::Client && Self::has_cycle(proc) {
                out.push(Violation::CyclicClient {
                    process: proc.name.clone(),
                });
            }
        }
        out
    }

    fn has_cycle(proc: &Process) -> bool {
        // Colors: 0 unvisited, 1 on stack, 2 done.
        let n = proc.state_names.len();
        let mut color = vec![0u8; n];
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = 1;
            while let Some(&mut (s, ref mut k)) = stack.last_mut() {
                if *k < proc.steps[s].len() {
                    let t = proc.steps[s][*k].1 as usize;
                    *k += 1;
                    match color[t] {
                        0 => {
                            color[t] = 1;
                            stack.push((t, 0));
                        }
                        1 => return true,
                        _ => {}
                    }
                } else {
                    color[s] = 2;
                    stack.pop();
                }
            }
        }
        false
    }
}

impl fmt::Debug for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("System")
            .field("name", &self.name)
            .field("processes", &self.processes.len())
            .field("actions", &self.actions.len())
            .finish()
    }
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("duplicate process name {0}")]
    DuplicateProcess(String),
    #[error("process {0} has no init state")]
    MissingInit(String),
    #[error("order names unknown action {0}")]
    UnknownOrderAction(String),
    #[error("order must list every action exactly once")]
    BadOrder,
}

/// Name-based assembly of a [`System`]; used by the parser and generators.
pub struct SystemBuilder {
    name: String,
    procs: Vec<BuilderProc>,
    proc_index: FxHashMap<String, usize>,
    actions: Vec<String>,
    action_index: FxHashMap<String, u16>,
    order: Option<Vec<String>>,
}

struct BuilderProc {
    name: String,
    kind: ProcKind,
    states: Vec<String>,
    state_index: FxHashMap<String, u16>,
    init: Option<u16>,
    trans: Vec<(u16, u16, u16)>, // (src, action, dst)
}

impl SystemBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        SystemBuilder {
            name: name.into(),
            procs: Vec::new(),
            proc_index: FxHashMap::default(),
            actions: Vec::new(),
            action_index: FxHashMap::default(),
            order: None,
        }
    }

    pub fn process(&mut self, name: &str, kind: ProcKind) -> Result<usize, BuildError> {
        if self.proc_index.contains_key(name) {
            return Err(BuildError::DuplicateProcess(name.to_string()));
        }
        let id = self.procs.len();
        self.proc_index.insert(name.to_string(), id);
        self.procs.push(BuilderProc {
            name: name.to_string(),
            kind,
            states: Vec::new(),
            state_index: FxHashMap::default(),
            init: None,
            trans: Vec::new(),
        });
        Ok(id)
    }

    fn state_id(&mut self, proc: usize, name: &str) -> u16 {
        let p = &mut self.procs[proc];
        if let Some(&id) = p.state_index.get(name) {
            return id;
        }
        let id = p.states.len() as u16;
        p.states.push(name.to_string());
        p.state_index.insert(name.to_string(), id);
        id
    }

    fn action_id(&mut self, name: &str) -> u16 {
        if let Some(&id) = self.action_index.get(name) {
            return id;
        }
        let id = self.actions.len() as u16;
        self.actions.push(name.to_string());
        self.action_index.insert(name.to_string(), id);
        id
    }

    /// Registers an action before any transition uses it, pinning its
    /// position in the default order.
    pub fn declare_action(&mut self, name: &str) -> u16 {
        self.action_id(name)
    }

    pub fn init(&mut self, proc: usize, state: &str) {
        let s = self.state_id(proc, state);
        self.procs[proc].init = Some(s);
    }

    pub fn transition(&mut self, proc: usize, src: &str, action: &str, dst: &str) {
        let s = self.state_id(proc, src);
        let a = self.action_id(action);
        let d = self.state_id(proc, dst);
        self.procs[proc].trans.push((s, a, d));
    }

    pub fn set_order(&mut self, names: Vec<String>) {
        self.order = Some(names);
    }

    pub fn build(self) -> Result<System, BuildError> {
        let n_actions = self.actions.len();
        let mut processes = Vec::with_capacity(self.procs.len());
        for bp in &self.procs {
            let init = bp
                .init
                .ok_or_else(|| BuildError::MissingInit(bp.name.clone()))?;
            let mut steps = vec![Vec::new(); bp.states.len()];
            let mut alphabet = ActionSet::empty(n_actions);
            for &(s, a, d) in &bp.trans {
                steps[s as usize].push((ActionId(a), d));
                alphabet.insert(ActionId(a));
            }
            processes.push(Process {
                name: bp.name.clone(),
                kind: bp.kind,
                state_names: bp.states.clone(),
                init,
                steps,
                alphabet,
            });
        }

        let n_procs = processes.len();
        let mut actions = Vec::with_capacity(n_actions);
        let mut dom_sets = Vec::with_capacity(n_actions);
        for (i, name) in self.actions.iter().enumerate() {
            let mut dom = SmallVec::new();
            let mut dom_set = ProcessSet::empty(n_procs);
            for (pi, proc) in processes.iter().enumerate() {
                if proc.alphabet.contains(ActionId(i as u16)) {
                    dom.push(ProcId(pi as u16));
                    dom_set.insert(ProcId(pi as u16));
                }
            }
            actions.push(ActionInfo {
                name: name.clone(),
                dom,
            });
            dom_sets.push(dom_set);
        }

        let mut deps = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            let mut d = ActionSet::empty(n_actions);
            for b in 0..n_actions {
                if dom_sets[a].intersects(&dom_sets[b]) {
                    d.insert(ActionId(b as u16));
                }
            }
            deps.push(d);
        }

        let mut locally_enabled = Vec::with_capacity(n_procs);
        let mut ok_masks = Vec::with_capacity(n_procs);
        for proc in &processes {
            let mut le = Vec::with_capacity(proc.state_names.len());
            let mut ok = Vec::with_capacity(proc.state_names.len());
            for steps in &proc.steps {
                let mut here = ActionSet::empty(n_actions);
                for (a, _) in steps {
                    here.insert(*a);
                }
                let mut mask = ActionSet::full(n_actions);
                mask.subtract(&proc.alphabet);
                mask.union_with(&here);
                le.push(here);
                ok.push(mask);
            }
            locally_enabled.push(le);
            ok_masks.push(ok);
        }

        let order: Vec<ActionId> = match &self.order {
            None => (0..n_actions).map(|i| ActionId(i as u16)).collect(),
            Some(names) => {
                if names.len() != n_actions {
                    return Err(BuildError::BadOrder);
                }
                let mut seen = Bits::empty(n_actions.max(1));
                let mut order = Vec::with_capacity(n_actions);
                for name in names {
                    let id = self
                        .action_index
                        .get(name)
                        .ok_or_else(|| BuildError::UnknownOrderAction(name.clone()))?;
                    if seen.contains(*id as usize) {
                        return Err(BuildError::BadOrder);
                    }
                    seen.insert(*id as usize);
                    order.push(ActionId(*id));
                }
                order
            }
        };
        let mut rank = vec![0u16; n_actions];
        for (r, a) in order.iter().enumerate() {
            rank[a.index()] = r as u16;
        }

        let action_index = self
            .action_index
            .iter()
            .map(|(k, v)| (k.clone(), ActionId(*v)))
            .collect();
        let proc_index = self
            .proc_index
            .iter()
            .map(|(k, v)| (k.clone(), ProcId(*v as u16)))
            .collect();

        Ok(System {
            name: self.name,
            processes,
            actions,
            order,
            rank,
            dom_sets,
            deps,
            locally_enabled,
            ok_masks,
            action_index,
            proc_index,
        })
    }
}

/// Interns global states as densely packed bit tuples and hands out dense ids.
pub struct StateTable {
    widths: Vec<u8>,
    total_bits: usize,
    set: IndexSet<SmallVec<[u64; 2]>, FxBuildHasher>,
}

impl StateTable {
    pub fn new(sys: &System) -> Self {
        let widths: Vec<u8> = sys
            .processes
            .iter()
            .map(|p| {
                let n = p.state_names.len().max(2);
                (usize::BITS - (n - 1).leading_zeros()) as u8
            })
            .collect();
        let total_bits = widths.iter().map(|&w| w as usize).sum();
        StateTable {
            widths,
            total_bits,
            set: IndexSet::with_hasher(FxBuildHasher),
        }
    }

    fn pack(&self, locals: &[u16]) -> SmallVec<[u64; 2]> {
        let mut out: SmallVec<[u64; 2]> = SmallVec::new();
        out.resize(self.total_bits.div_ceil(64).max(1), 0);
        let mut pos = 0usize;
        for (i, &ls) in locals.iter().enumerate() {
            let w = self.widths[i] as usize;
            let block = pos / 64;
            let off = pos % 64;
            out[block] |= (ls as u64) << off;
            if off + w > 64 {
                out[block + 1] |= (ls as u64) >> (64 - off);
            }
            pos += w;
        }
        out
    }

    pub fn unpack_into(&self, id: u32, locals: &mut [u16]) {
        let packed = self.set.get_index(id as usize).expect("unknown state id");
        let mut pos = 0usize;
        for (i, w) in self.widths.iter().enumerate() {
            let w = *w as usize;
            let block = pos / 64;
            let off = pos % 64;
            let mut v = packed[block] >> off;
            if off + w > 64 {
                v |= packed[block + 1] << (64 - off);
            }
            locals[i] = (v & ((1u64 << w) - 1)) as u16;
            pos += w;
        }
    }

    pub fn get(&self, id: u32) -> GlobalState {
        let mut locals = vec![0u16; self.widths.len()];
        self.unpack_into(id, &mut locals);
        GlobalState::new(locals)
    }

    pub fn intern(&mut self, locals: &[u16]) -> (u32, bool) {
        let (idx, fresh) = self.set.insert_full(self.pack(locals));
        (idx as u32, fresh)
    }

    pub fn lookup(&self, locals: &[u16]) -> Option<u32> {
        self.set.get_index_of(&self.pack(locals)).map(|i| i as u32)
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}
