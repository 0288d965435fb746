//! Model generators: benchmark families, the worked examples used across the
//! test suite, SAT-reduction gadgets, and seeded random systems.

use crate::model::{ProcKind, System, SystemBuilder};
use crate::sets::ActionSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use thiserror::Error;

/// CNF with exactly three literals per clause (clauses may repeat literals).
/// Literals are 1-based, negative for negated variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Cnf {
    pub n_vars: u32,
    pub clauses: Vec<[i32; 3]>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("clause {0} has more than three literals")]
    ClauseTooLong(usize),
    #[error("literal {0} out of range")]
    LiteralRange(i32),
    #[error("missing p cnf header")]
    MissingHeader,
}

pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut n_vars: Option<u32> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let mut it = rest.split_whitespace();
            if it.next() != Some("cnf") {
                return Err(DimacsError::Syntax(ln + 1, "expected p cnf".into()));
            }
            let v = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| DimacsError::Syntax(ln + 1, "bad variable count".into()))?;
            n_vars = Some(v);
            continue;
        }
        let n_vars = n_vars.ok_or(DimacsError::MissingHeader)?;
        for tok in line.split_whitespace() {
            let lit: i32 = tok
                .parse()
                .map_err(|_| DimacsError::Syntax(ln + 1, format!("bad literal {tok}")))?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(DimacsError::Syntax(ln + 1, "empty clause".into()));
                }
                if current.len() > 3 {
                    return Err(DimacsError::ClauseTooLong(clauses.len() + 1));
                }
                while current.len() < 3 {
                    current.push(current[0]);
                }
                clauses.push([current[0], current[1], current[2]]);
                current.clear();
            } else {
                if lit.unsigned_abs() > n_vars {
                    return Err(DimacsError::LiteralRange(lit));
                }
                current.push(lit);
            }
        }
    }
    let n_vars = n_vars.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        if current.len() > 3 {
            return Err(DimacsError::ClauseTooLong(clauses.len() + 1));
        }
        while current.len() < 3 {
            current.push(current[0]);
        }
        clauses.push([current[0], current[1], current[2]]);
    }
    Ok(Cnf { n_vars, clauses })
}

/// Dining philosophers. Each philosopher may pick up its two forks in either
/// order, then puts them back left fork first; forks are two-state locks.
/// The whole cycle is unfolded `meals` times.
pub fn gen_philosophers(n: usize, meals: usize) -> System {
    assert!(n >= 2, "need at least two philosophers");
    assert!(meals >= 1);
    let mut b = SystemBuilder::new(format!("dp{n}m{meals}"));
    let take = |i: usize, j: usize| format!("p{i}.t.f{j}");
    let rel = |i: usize, j: usize| format!("p{i}.r.f{j}");
    for i in 0..n {
        let (l, r) = (i, (i + 1) % n);
        b.declare_action(&take(i, l));
        b.declare_action(&take(i, r));
        b.declare_action(&rel(i, l));
        b.declare_action(&rel(i, r));
    }
    for i in 0..n {
        let p = b.process(&format!("p{i}"), ProcKind::Client).unwrap();
        b.init(p, "0");
        let (l, r) = (i, (i + 1) % n);
        for m in 0..meals {
            let s = |k: usize| (5 * m + k).to_string();
            b.transition(p, &s(0), &take(i, l), &s(1));
            b.transition(p, &s(1), &take(i, r), &s(3));
            b.transition(p, &s(0), &take(i, r), &s(2));
            b.transition(p, &s(2), &take(i, l), &s(3));
            b.transition(p, &s(3), &rel(i, l), &s(4));
            b.transition(p, &s(4), &rel(i, r), &s(5));
        }
    }
    for j in 0..n {
        let f = b.process(&format!("f{j}"), ProcKind::Server).unwrap();
        b.init(f, "free");
        // fork j is the left fork of philosopher j and the right fork of j-1
        for i in [j, (j + n - 1) % n] {
            b.transition(f, "free", &take(i, j), "busy");
            b.transition(f, "busy", &rel(i, j), "free");
        }
    }
    b.build().unwrap()
}

/// Each client acquires `k` distinct locks in ascending index order and
/// releases them in reverse. Lock choice is drawn from a seeded generator,
/// so equal seeds give byte-identical systems.
pub fn gen_multilocks(n_clients: usize, n_locks: usize, k: usize, seed: u64) -> System {
    assert!(k <= n_locks);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = SystemBuilder::new(format!("ml{n_clients}x{n_locks}k{k}s{seed}"));
    let mut picks = Vec::new();
    for _ in 0..n_clients {
        let mut all: Vec<usize> = (0..n_locks).collect();
        all.shuffle(&mut rng);
        let mut chosen: Vec<usize> = all[..k].to_vec();
        chosen.sort_unstable();
        picks.push(chosen);
    }
    let mut lock_users: Vec<Vec<usize>> = vec![Vec::new(); n_locks];
    for (i, chosen) in picks.iter().enumerate() {
        let c = b.process(&format!("c{i}"), ProcKind::Client).unwrap();
        b.init(c, "0");
        let mut state = 0usize;
        for &l in chosen {
            b.transition(
                c,
                &state.to_string(),
                &format!("c{i}.t.l{l}"),
                &(state + 1).to_string(),
            );
            state += 1;
        }
        for &l in chosen.iter().rev() {
            b.transition(
                c,
                &state.to_string(),
                &format!("c{i}.r.l{l}"),
                &(state + 1).to_string(),
            );
            state += 1;
        }
        for &l in chosen {
            lock_users[l].push(i);
        }
    }
    for (l, users) in lock_users.iter().enumerate() {
        let s = b.process(&format!("l{l}"), ProcKind::Server).unwrap();
        b.init(s, "free");
        for &i in users {
            b.transition(s, "free", &format!("c{i}.t.l{l}"), "busy");
            b.transition(s, "busy", &format!("c{i}.r.l{l}"), "free");
        }
    }
    b.build().unwrap()
}

/// Gates wired as a complete binary tree of depth `height` (so
/// `2^(height+1) - 1` gate clients and one fewer wire servers). Every gate
/// reads the wires of its two children, then writes the wire to its parent;
/// leaves only write, the root only reads.
pub fn gen_boolean_gates(height: usize) -> System {
    let n_gates = (1usize << (height + 1)) - 1;
    let mut b = SystemBuilder::new(format!("bg{height}"));
    let wr = |i: usize| format!("w{i}.wr");
    let rd = |i: usize| format!("w{i}.rd");
    for i in 1..=n_gates {
        if 2 * i <= n_gates {
            b.declare_action(&rd(2 * i));
            b.declare_action(&rd(2 * i + 1));
        }
        if i > 1 {
            b.declare_action(&wr(i));
        }
    }
    for i in 1..=n_gates {
        let g = b.process(&format!("g{i}"), ProcKind::Client).unwrap();
        b.init(g, "0");
        let mut state = 0usize;
        if 2 * i <= n_gates {
            b.transition(g, "0", &rd(2 * i), "1");
            b.transition(g, "1", &rd(2 * i + 1), "2");
            state = 2;
        }
        if i > 1 {
            b.transition(g, &state.to_string(), &wr(i), &(state + 1).to_string());
        }
    }
    for i in 2..=n_gates {
        let w = b.process(&format!("w{i}"), ProcKind::Server).unwrap();
        b.init(w, "0");
        b.transition(w, "0", &wr(i), "1");
        b.transition(w, "1", &rd(i), "2");
    }
    b.build().unwrap()
}

fn lit_lock(lit: i32) -> String {
    if lit > 0 {
        format!("x{lit}")
    } else {
        format!("nx{}", -lit)
    }
}

/// Lock-based satisfiability gadget. The returned query set `B` is the whole
/// alphabet minus client F's acquisition of lock `f`; a maximal run from the
/// initial state with its first set inside `B` exists iff the formula is
/// satisfiable.
pub fn gen_sat_ifs(cnf: &Cnf) -> (System, ActionSet) {
    let n = cnf.n_vars as usize;
    let m = cnf.clauses.len();
    let mut b = SystemBuilder::new(format!("satifs{n}v{m}c"));
    let up = |lock: &str, client: &str| format!("{lock}.up.{client}");
    let dn = |lock: &str, client: &str| format!("{lock}.dn.{client}");

    // lock -> (takers, releasers) as (client name, action name) pairs
    let mut takers: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut releasers: BTreeMap<String, Vec<String>> = BTreeMap::new();

    for i in 1..=n {
        for (client, lock) in [(format!("P0_{i}"), format!("nx{i}")), (format!("P1_{i}"), format!("x{i}"))] {
            let p = b.process(&client, ProcKind::Client).unwrap();
            b.init(p, "0");
            let e = format!("e{i}");
            b.transition(p, "0", &up(&e, &client), "1");
            b.transition(p, "1", &dn(&lock, &client), "2");
            takers.entry(e).or_default().push(up(&format!("e{i}"), &client));
            releasers.entry(lock.clone()).or_default().push(dn(&lock, &client));
        }
    }
    for (j, clause) in cnf.clauses.iter().enumerate() {
        let j = j + 1;
        for (k, &lit) in clause.iter().enumerate() {
            let client = format!("C{j}_{}", k + 1);
            let p = b.process(&client, ProcKind::Client).unwrap();
            b.init(p, "0");
            let lock = lit_lock(lit);
            let cj = format!("c{j}");
            b.transition(p, "0", &up(&lock, &client), "1");
            b.transition(p, "1", &dn(&lock, &client), "2");
            b.transition(p, "2", &dn(&cj, &client), "3");
            takers.entry(lock.clone()).or_default().push(up(&lock, &client));
            releasers.entry(lock).or_default().push(dn(&lit_lock(lit), &client));
            releasers.entry(cj.clone()).or_default().push(dn(&cj, &client));
        }
    }
    {
        let d = b.process("D", ProcKind::Client).unwrap();
        b.init(d, "0");
        for j in 1..=m {
            let cj = format!("c{j}");
            b.transition(d, &(j - 1).to_string(), &up(&cj, "D"), &j.to_string());
            takers.entry(cj).or_default().push(up(&format!("c{j}"), "D"));
        }
        b.transition(d, &m.to_string(), &up("f", "D"), &(m + 1).to_string());
        takers.entry("f".into()).or_default().push(up("f", "D"));
    }
    {
        let f = b.process("F", ProcKind::Client).unwrap();
        b.init(f, "0");
        b.transition(f, "0", &up("f", "F"), "1");
        takers.entry("f".into()).or_default().push(up("f", "F"));
    }

    // lock servers; x, nx and c locks start taken, e and f start free
    let mut locks: Vec<(String, bool)> = Vec::new();
    for i in 1..=n {
        locks.push((format!("x{i}"), true));
        locks.push((format!("nx{i}"), true));
    }
    for j in 1..=m {
        locks.push((format!("c{j}"), true));
    }
    for i in 1..=n {
        locks.push((format!("e{i}"), false));
    }
    locks.push(("f".into(), false));
    for (lock, busy) in locks {
        let s = b.process(&lock, ProcKind::Server).unwrap();
        b.init(s, if busy { "busy" } else { "free" });
        for act in takers.get(&lock).into_iter().flatten() {
            b.transition(s, "free", act, "busy");
        }
        for act in releasers.get(&lock).into_iter().flatten() {
            b.transition(s, "busy", act, "free");
        }
    }

    let sys = b.build().unwrap();
    let mut query = ActionSet::full(sys.n_actions());
    query.remove(sys.action_by_name("f.up.F").unwrap());
    (sys, query)
}

/// Chain gadget whose reduced exploration is small although the number of
/// covering-set queries needed to see that is large. Variable clients choose
/// between `th`/`la`, then may perform their literal action once per clause
/// (the literal loop is unfolded `m` times to keep clients acyclic). Server
/// `Sr` walks all `th` choices, one literal per clause, then `b`; server `Sl`
/// walks `e`/`ne` then all `la` choices.
pub fn gen_lowerbound(cnf: &Cnf) -> System {
    let n = cnf.n_vars as usize;
    let m = cnf.clauses.len();
    let mut b = SystemBuilder::new(format!("lb{n}v{m}c"));
    // number of clauses containing each literal; a literal the formula never
    // uses gets no client transitions (there would be no server to pair with)
    let occurrences = |lit: i32| {
        cnf.clauses
            .iter()
            .filter(|cl| cl.contains(&lit))
            .count()
    };
    for i in 1..=n {
        for (client, th, la, lit, occ) in [
            (format!("C{i}"), format!("th{i}"), format!("la{i}"), format!("x{i}"), occurrences(i as i32)),
            (format!("Cn{i}"), format!("thn{i}"), format!("lan{i}"), format!("nx{i}"), occurrences(-(i as i32))),
        ] {
            let p = b.process(&client, ProcKind::Client).unwrap();
            b.init(p, "0");
            b.transition(p, "0", &th, "1");
            b.transition(p, "0", &la, "1");
            for j in 0..occ {
                b.transition(p, &(j + 1).to_string(), &lit, &(j + 2).to_string());
            }
        }
    }
    {
        let p = b.process("Cs", ProcKind::Client).unwrap();
        b.init(p, "0");
        b.transition(p, "0", "e", "1");
    }
    {
        let p = b.process("Cns", ProcKind::Client).unwrap();
        b.init(p, "0");
        b.transition(p, "0", "b", "1");
        b.transition(p, "1", "ne", "2");
    }
    {
        let sl = b.process("Sl", ProcKind::Server).unwrap();
        b.init(sl, "0");
        b.transition(sl, "0", "e", "1");
        b.transition(sl, "0", "ne", "1");
        for i in 1..=n {
            b.transition(sl, &i.to_string(), &format!("la{i}"), &(i + 1).to_string());
            b.transition(sl, &i.to_string(), &format!("lan{i}"), &(i + 1).to_string());
        }
    }
    {
        let sr = b.process("Sr", ProcKind::Server).unwrap();
        b.init(sr, "0");
        for i in 1..=n {
            b.transition(sr, &(i - 1).to_string(), &format!("th{i}"), &i.to_string());
            b.transition(sr, &(i - 1).to_string(), &format!("thn{i}"), &i.to_string());
        }
        for (j, clause) in cnf.clauses.iter().enumerate() {
            let src = (n + j).to_string();
            let dst = (n + j + 1).to_string();
            let mut seen = Vec::new();
            for &lit in clause {
                let act = lit_lock(lit);
                if !seen.contains(&act) {
                    b.transition(sr, &src, &act, &dst);
                    seen.push(act);
                }
            }
        }
        b.transition(sr, &(n + m).to_string(), "b", &(n + m + 1).to_string());
    }
    b.build().unwrap()
}

pub fn gen_fig6(n: usize) -> System {
    let mut b = SystemBuilder::new(format!("fig6n{n}"));
    for i in 1..=n {
        for l in ["a", "b", "c", "d"] {
            b.declare_action(&format!("{l}{i}"));
        }
    }
    for i in 1..=n {
        let p = b.process(&format!("P{i}"), ProcKind::Client).unwrap();
        b.init(p, "0");
        b.transition(p, "0", &format!("a{i}"), "1");
        b.transition(p, "0", &format!("b{i}"), "2");
        b.transition(p, "1", &format!("c{i}"), "3");
        b.transition(p, "2", &format!("d{i}"), "3");
    }
    for i in 1..=n {
        let s = b.process(&format!("S{i}"), ProcKind::Server).unwrap();
        b.init(s, "0");
        for l in ["a", "b", "c", "d"] {
            b.transition(s, "0", &format!("{l}{i}"), "0");
        }
    }
    b.build().unwrap()
}

/// The worked examples: `fig1` (covering vs enabled), `fig3` (invalid: cyclic
/// client), `fig4` (covering set no persistent set contains), `fig5` (sleep
/// sets required for optimality), `fig6` (order-sensitive reduction, n = 2).
pub fn builtin_figures() -> BTreeMap<String, System> {
    let mut out = BTreeMap::new();

    let mut b = SystemBuilder::new("fig1");
    for a in ["a", "b", "c", "e"] {
        b.declare_action(a);
    }
    let pb = b.process("P_b", ProcKind::Client).unwrap();
    b.init(pb, "0");
    b.transition(pb, "0", "b", "1");
    let pce = b.process("P_ce", ProcKind::Client).unwrap();
    b.init(pce, "0");
    b.transition(pce, "0", "e", "1");
    b.transition(pce, "1", "a", "2");
    b.transition(pce, "0", "c", "3");
    let sab = b.process("S_ab", ProcKind::Server).unwrap();
    b.init(sab, "0");
    b.transition(sab, "0", "b", "1");
    b.transition(sab, "0", "a", "2");
    b.transition(sab, "2", "b", "3");
    let se = b.process("S_e", ProcKind::Server).unwrap();
    b.init(se, "0");
    b.transition(se, "0", "e", "1");
    let sc = b.process("S_c", ProcKind::Server).unwrap();
    b.init(sc, "0");
    b.transition(sc, "0", "c", "1");
    out.insert("fig1".into(), b.build().unwrap());

    let mut b = SystemBuilder::new("fig3");
    for a in ["a", "b"] {
        b.declare_action(a);
    }
    let ca = b.process("C_a", ProcKind::Client).unwrap();
    b.init(ca, "0");
    b.transition(ca, "0", "a", "1");
    let cb = b.process("C_b", ProcKind::Client).unwrap();
    b.init(cb, "0");
    b.transition(cb, "0", "b", "0");
    let sa = b.process("S_a", ProcKind::Server).unwrap();
    b.init(sa, "0");
    b.transition(sa, "0", "a", "0");
    let sb = b.process("S_b", ProcKind::Server).unwrap();
    b.init(sb, "0");
    b.transition(sb, "0", "b", "0");
    out.insert("fig3".into(), b.build().unwrap());

    let mut b = SystemBuilder::new("fig4");
    for a in ["a", "b", "c"] {
        b.declare_action(a);
    }
    let ca = b.process("C_a", ProcKind::Client).unwrap();
    b.init(ca, "0");
    b.transition(ca, "0", "a", "1");
    let cbc = b.process("C_bc", ProcKind::Client).unwrap();
    b.init(cbc, "0");
    b.transition(cbc, "0", "b", "1");
    b.transition(cbc, "0", "c", "2");
    let sab = b.process("S_ab", ProcKind::Server).unwrap();
    b.init(sab, "0");
    b.transition(sab, "0", "a", "1");
    b.transition(sab, "0", "b", "2");
    let sc = b.process("S_c", ProcKind::Server).unwrap();
    b.init(sc, "0");
    b.transition(sc, "0", "c", "1");
    out.insert("fig4".into(), b.build().unwrap());

    let mut b = SystemBuilder::new("fig5");
    for a in ["a", "b", "c"] {
        b.declare_action(a);
    }
    let pac = b.process("P_ac", ProcKind::Client).unwrap();
    b.init(pac, "0");
    b.transition(pac, "0", "a", "1");
    b.transition(pac, "0", "c", "2");
    let pb = b.process("P_b", ProcKind::Client).unwrap();
    b.init(pb, "0");
    b.transition(pb, "0", "b", "1");
    let sac = b.process("S_ac", ProcKind::Server).unwrap();
    b.init(sac, "0");
    b.transition(sac, "0", "a", "0");
    let sb = b.process("S_b", ProcKind::Server).unwrap();
    b.init(sb, "0");
    b.transition(sb, "0", "b", "1");
    b.transition(sb, "1", "c", "2");
    out.insert("fig5".into(), b.build().unwrap());

    out.insert("fig6".into(), gen_fig6(2));
    out
}

#[derive(Clone, Copy, Debug)]
pub struct RandomConfig {
    pub max_clients: usize,
    pub max_servers: usize,
    pub max_actions: usize,
    pub max_states: usize,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            max_clients: 2,
            max_servers: 2,
            max_actions: 6,
            max_states: 4,
        }
    }
}

/// Seeded random system; always valid (deterministic, binary domains,
/// acyclic clients).
pub fn gen_random_system(cfg: RandomConfig, seed: u64) -> System {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_clients = rng.gen_range(1..=cfg.max_clients);
    let n_servers = rng.gen_range(1..=cfg.max_servers);
    let n_actions = rng.gen_range(1..=cfg.max_actions);
    let mut b = SystemBuilder::new(format!("rnd{seed}"));
    for a in 0..n_actions {
        b.declare_action(&format!("a{a}"));
    }

    // client and server owning each action
    let owners: Vec<(usize, usize)> = (0..n_actions)
        .map(|_| {
            (
                rng.gen_range(0..n_clients),
                rng.gen_range(0..n_servers),
            )
        })
        .collect();

    for kind_pass in 0..2 {
        let (count, kind, prefix) = if kind_pass == 0 {
            (n_clients, ProcKind::Client, "C")
        } else {
            (n_servers, ProcKind::Server, "S")
        };
        for pi in 0..count {
            let alphabet: Vec<usize> = (0..n_actions)
                .filter(|&a| {
                    if kind == ProcKind::Client {
                        owners[a].0 == pi
                    } else {
                        owners[a].1 == pi
                    }
                })
                .collect();
            let p = b.process(&format!("{prefix}{pi}"), kind).unwrap();
            b.init(p, "0");
            if alphabet.is_empty() {
                continue;
            }
            let n_states = rng.gen_range(2..=cfg.max_states.max(2));
            let mut used: Vec<Vec<usize>> = vec![Vec::new(); n_states];
            let place = |rng: &mut ChaCha8Rng, used: &mut Vec<Vec<usize>>, a: usize| {
                let mut srcs: Vec<usize> = if kind == ProcKind::Client {
                    (0..n_states - 1).collect()
                } else {
                    (0..n_states).collect()
                };
                srcs.shuffle(rng);
                // bias toward transitions leaving the initial state so the
                // product has a rich reachable region instead of deadlocking
                // after a handful of steps
                if rng.gen_bool(0.5) {
                    if let Some(pos) = srcs.iter().position(|&s| s == 0) {
                        srcs.swap(0, pos);
                    }
                }
                for src in srcs {
                    if used[src].contains(&a) {
                        continue;
                    }
                    let dst = if kind == ProcKind::Client {
                        rng.gen_range(src + 1..n_states)
                    } else {
                        rng.gen_range(0..n_states)
                    };
                    used[src].push(a);
                    return Some((src, dst));
                }
                None
            };
            let mut trans = Vec::new();
            for &a in &alphabet {
                let (src, dst) = place(&mut rng, &mut used, a)
                    .expect("fresh process always has room for one transition per action");
                trans.push((src, a, dst));
            }
            let extra = rng.gen_range(0..=alphabet.len());
            for _ in 0..extra {
                let a = alphabet[rng.gen_range(0..alphabet.len())];
                if let Some((src, dst)) = place(&mut rng, &mut used, a) {
                    trans.push((src, a, dst));
                }
            }
            trans.sort_unstable();
            for (src, a, dst) in trans {
                b.transition(p, &src.to_string(), &format!("a{a}"), &dst.to_string());
            }
        }
    }
    b.build().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figures_are_valid_except_fig3() {
        for (name, sys) in builtin_figures() {
            let violations = sys.validate();
            if name == "fig3" {
                assert!(!violations.is_empty());
            } else {
                assert!(violations.is_empty(), "{name}: {violations:?}");
            }
        }
    }

    #[test]
    fn philosophers_shape() {
        let sys = gen_philosophers(4, 1);
        assert_eq!(sys.n_processes(), 8);
        assert_eq!(sys.n_actions(), 16);
        assert!(sys.validate().is_empty());
        let sys = gen_philosophers(3, 2);
        assert!(sys.validate().is_empty());
        assert_eq!(sys.processes[0].state_names.len(), 11);
    }

    #[test]
    fn multilocks_is_seed_deterministic() {
        let a = gen_multilocks(3, 5, 2, 7);
        let b = gen_multilocks(3, 5, 2, 7);
        let c = gen_multilocks(3, 5, 2, 8);
        assert!(a.validate().is_empty());
        let names = |s: &System| {
            s.actions
                .iter()
                .map(|i| i.name.clone())
                .collect::<Vec<_>>()
        };
        assert_eq!(names(&a), names(&b));
        assert_ne!(names(&a), names(&c));
    }

    #[test]
    fn multilocks_k1_is_take_release() {
        let sys = gen_multilocks(2, 3, 1, 0);
        assert!(sys.validate().is_empty());
        for p in sys.processes.iter().filter(|p| p.name.starts_with('c')) {
            assert_eq!(p.state_names.len(), 3);
        }
    }

    #[test]
    fn boolean_gates_counts() {
        let sys = gen_boolean_gates(3);
        let clients = sys
            .processes
            .iter()
            .filter(|p| p.kind == ProcKind::Client)
            .count();
        assert_eq!(clients, 15);
        assert_eq!(sys.n_processes() - clients, 14);
        assert!(sys.validate().is_empty());
        let sys1 = gen_boolean_gates(1);
        assert_eq!(sys1.n_processes(), 3 + 2);
        assert!(sys1.validate().is_empty());
    }

    #[test]
    fn sat_ifs_query_excludes_one_action() {
        let cnf = Cnf {
            n_vars: 1,
            clauses: vec![[1, 1, 1]],
        };
        let (sys, query) = gen_sat_ifs(&cnf);
        assert!(sys.validate().is_empty(), "{:?}", sys.validate());
        assert_eq!(query.len(), sys.n_actions() - 1);
        assert!(!query.contains(sys.action_by_name("f.up.F").unwrap()));
    }

    #[test]
    fn lowerbound_is_valid_with_repeated_literals() {
        let cnf = Cnf {
            n_vars: 2,
            clauses: vec![[1, 1, 1], [1, -2, 1]],
        };
        let sys = gen_lowerbound(&cnf);
        assert!(sys.validate().is_empty(), "{:?}", sys.validate());
        // x1 appears in both clauses: client C1 can do it twice
        let c1 = sys.proc_by_name("C1").unwrap();
        assert_eq!(sys.processes[c1.index()].state_names.len(), 4);
    }

    #[test]
    fn dimacs_parses_pads_and_rejects() {
        let cnf = parse_dimacs("c comment\np cnf 3 2\n1 -2 3 0\n2 0\n").unwrap();
        assert_eq!(cnf.n_vars, 3);
        assert_eq!(cnf.clauses, vec![[1, -2, 3], [2, 2, 2]]);
        assert!(parse_dimacs("p cnf 2 1\n1 2 1 2 0\n").is_err());
        assert!(parse_dimacs("1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 1\n5 0\n").is_err());
    }

    #[test]
    fn random_systems_are_valid() {
        for seed in 0..50 {
            let sys = gen_random_system(RandomConfig::default(), seed);
            assert!(sys.validate().is_empty(), "seed {seed}: {:?}", sys.validate());
        }
    }

    #[test]
    fn random_systems_are_seed_deterministic() {
        let a = gen_random_system(RandomConfig::default(), 13);
        let b = gen_random_system(RandomConfig::default(), 13);
        assert_eq!(a.n_actions(), b.n_actions());
        for (x, y) in a.processes.iter().zip(&b.processes) {
            assert_eq!(x.steps, y.steps);
        }
    }
}
