//! Line-oriented text format for systems.
//!
//! ```text
//! system <name>
//! client <pname> | server <pname>
//!   init <state>
//!   <state> <action> <state>
//! order <a1> <a2> ... <ak>
//! ```
//!
//! `#` starts a comment, tokens are whitespace-separated, and names are
//! drawn from `[A-Za-z0-9_.!^v-]`. The writer is canonical: parsing its
//! output and writing again reproduces the bytes. An `order` directive is
//! emitted whenever the action order differs from first mention, so a
//! round-trip preserves exploration order, not just structure.

use crate::model::{BuildError, ProcKind, System, SystemBuilder, Violation};
use crate::sets::ActionId;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("invalid system: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

fn syntax(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        msg: msg.into(),
    }
}

fn valid_name(tok: &str) -> bool {
    !tok.is_empty()
        && tok
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_.!^-".contains(c))
}

fn name_checked(line: usize, tok: &str) -> Result<(), ParseError> {
    if valid_name(tok) {
        Ok(())
    } else {
        Err(syntax(line, format!("bad name {tok:?}")))
    }
}

pub fn parse_system(text: &str) -> Result<System, ParseError> {
    let mut builder: Option<SystemBuilder> = None;
    let mut system_line = 0usize;
    let mut cur: Option<usize> = None;
    let mut cur_line = 0usize;
    let mut cur_has_init = false;
    let mut n_procs = 0usize;
    let mut order: Option<(usize, Vec<String>)> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks: Vec<&str> = raw
            .split('#')
            .next()
            .unwrap_or("")
            .split_whitespace()
            .collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "system" => {
                if builder.is_some() {
                    return Err(syntax(line, "duplicate system line"));
                }
                let [_, name] = toks[..] else {
                    return Err(syntax(line, "expected: system <name>"));
                };
                name_checked(line, name)?;
                builder = Some(SystemBuilder::new(name));
                system_line = line;
            }
            kind @ ("client" | "server") => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| syntax(line, "system line must come first"))?;
                let [_, name] = toks[..] else {
                    return Err(syntax(line, format!("expected: {kind} <name>")));
                };
                name_checked(line, name)?;
                if cur.is_some() && !cur_has_init {
                    return Err(syntax(cur_line, "process has no init state"));
                }
                let k = if toks[0] == "client" {
                    ProcKind::Client
                } else {
                    ProcKind::Server
                };
                let id = b
                    .process(name, k)
                    .map_err(|e| syntax(line, e.to_string()))?;
                cur = Some(id);
                cur_line = line;
                cur_has_init = false;
                n_procs += 1;
            }
            "init" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| syntax(line, "system line must come first"))?;
                let [_, state] = toks[..] else {
                    return Err(syntax(line, "expected: init <state>"));
                };
                name_checked(line, state)?;
                let p = cur.ok_or_else(|| syntax(line, "init outside a process block"))?;
                if cur_has_init {
                    return Err(syntax(line, "init already given for this process"));
                }
                b.init(p, state);
                cur_has_init = true;
            }
            "order" => {
                if builder.is_none() {
                    return Err(syntax(line, "system line must come first"));
                }
                if order.is_some() {
                    return Err(syntax(line, "duplicate order directive"));
                }
                if toks.len() < 2 {
                    return Err(syntax(line, "order must list every action"));
                }
                for t in &toks[1..] {
                    name_checked(line, t)?;
                }
                order = Some((line, toks[1..].iter().map(|t| t.to_string()).collect()));
            }
            _ => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| syntax(line, "system line must come first"))?;
                let [src, action, dst] = toks[..] else {
                    return Err(syntax(
                        line,
                        "expected a transition: <state> <action> <state>",
                    ));
                };
                for t in [src, action, dst] {
                    name_checked(line, t)?;
                }
                let p = cur.ok_or_else(|| syntax(line, "transition outside a process block"))?;
                b.transition(p, src, action, dst);
            }
        }
    }

    let mut b = builder.ok_or_else(|| syntax(1, "no processes"))?;
    if cur.is_some() && !cur_has_init {
        return Err(syntax(cur_line, "process has no init state"));
    }
    if n_procs == 0 {
        return Err(syntax(system_line, "no processes"));
    }
    let order_line = order.as_ref().map(|(l, _)| *l).unwrap_or(system_line);
    if let Some((_, names)) = order {
        b.set_order(names);
    }
    let sys = b.build().map_err(|e| match e {
        BuildError::MissingInit(_) => syntax(cur_line, e.to_string()),
        BuildError::UnknownOrderAction(_) | BuildError::BadOrder => {
            syntax(order_line, e.to_string())
        }
        other => syntax(system_line, other.to_string()),
    })?;
    let violations = sys.validate();
    if !violations.is_empty() {
        return Err(ParseError::Invalid(violations));
    }
    Ok(sys)
}

pub fn write_system(sys: &System) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "system {}", sys.name);
    // a parser assigns action ids by first mention in the text, so the
    // mention sequence is tracked in emission order to decide whether an
    // explicit order directive is required
    let mut seen = vec![false; sys.n_actions()];
    let mut mentioned: Vec<ActionId> = Vec::with_capacity(sys.n_actions());
    for p in &sys.processes {
        let kind = match p.kind {
            ProcKind::Client => "client",
            ProcKind::Server => "server",
        };
        let _ = writeln!(out, "{kind} {}", p.name);
        let _ = writeln!(out, "  init {}", p.state_names[p.init as usize]);
        // emission order is determined by names alone, so a parse of the
        // output (which re-interns state ids) writes back the same bytes
        let mut lines: Vec<(&str, &str, &str, ActionId)> = Vec::new();
        for (src, steps) in p.steps.iter().enumerate() {
            for &(a, dst) in steps {
                lines.push((
                    &p.state_names[src],
                    sys.action_name(a),
                    &p.state_names[dst as usize],
                    a,
                ));
            }
        }
        lines.sort_unstable();
        for (src, name, dst, a) in lines {
            let _ = writeln!(out, "  {src} {name} {dst}");
            if !seen[a.index()] {
                seen[a.index()] = true;
                mentioned.push(a);
            }
        }
    }
    let ordered: Vec<ActionId> = sys
        .order
        .iter()
        .copied()
        .filter(|a| seen[a.index()])
        .collect();
    if ordered != mentioned {
        let names: Vec<&str> = ordered.iter().map(|&a| sys.action_name(a)).collect();
        let _ = writeln!(out, "order {}", names.join(" "));
    }
    out
}
