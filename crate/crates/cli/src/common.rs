//! Shared plumbing: the error-to-exit-code mapping, model loading, preset
//! and order resolution, and output helpers.

use porex_core::explorer::{ExploreConfig, Oracle, Preset, Subsumption};
use porex_core::parse::parse_system;
use porex_core::{ActionId, ActionSet, System};
use std::fmt;
use std::fs;
use std::path::Path;
use std::time::Duration;

/// Failure modes mapped onto the documented exit codes.
pub enum CliError {
    /// Unreadable or malformed input (exit 2).
    Input(String),
    /// A check returned a definite failure (exit 1).
    VerifyFail(String),
    /// A node, time, or verification budget stopped the work (exit 3).
    Limit(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::VerifyFail(_) => 1,
            CliError::Input(_) => 2,
            CliError::Limit(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::VerifyFail(m) => write!(f, "verification failed: {m}"),
            CliError::Limit(m) => write!(f, "stopped: {m}"),
        }
    }
}

pub fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn load_system(path: &Path) -> Result<System, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| input(format!("cannot read {}: {e}", path.display())))?;
    parse_system(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// The six benchmark presets plus `exact`: the reference configuration with
/// the exact first-set oracle, sleep sets, and sleep-subset subsumption.
/// `exact` graphs are as small as the chosen order allows and `exact` trees
/// are trace-optimal, so it is the configuration `verify --tree` is for.
pub fn config_by_name(name: &str) -> Option<ExploreConfig> {
    if let Some(p) = Preset::by_name(name) {
        return Some(ExploreConfig::preset(p));
    }
    (name == "exact").then(|| ExploreConfig {
        oracle: Oracle::ExactIfs {
            memo_limit: 10_000_000,
        },
        sleep_enabled: true,
        subsumption: Subsumption::SleepSubset,
        label: "exact".to_string(),
        ..ExploreConfig::default()
    })
}

pub fn preset_names() -> String {
    let mut names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
    names.push("exact");
    names.join(", ")
}

/// Flags shared by every command that runs the explorer.
#[derive(clap::Args)]
pub struct EngineOpts {
    /// Exploration configuration: reach, pset+sleep, minclosure+sleep,
    /// apifs+sleep, full-sleep, full+sleep, or exact
    #[arg(long)]
    pub preset: String,
    /// Action order: `decl` for declaration order, or a file listing every
    /// action name exactly once
    #[arg(long, default_value = "decl")]
    pub order: String,
    /// Stop exploring after this many nodes (exit 3); `verify` also caps the
    /// brute-force full product with it
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Cooperative wall-clock limit in seconds (exit 3 when it fires)
    #[arg(long)]
    pub time_limit: Option<f64>,
}

impl EngineOpts {
    pub fn config(&self, sys: &System) -> Result<ExploreConfig, CliError> {
        let mut cfg = config_by_name(&self.preset).ok_or_else(|| {
            input(format!(
                "unknown preset {:?}; expected one of: {}",
                self.preset,
                preset_names()
            ))
        })?;
        cfg.order = parse_order(sys, &self.order)?;
        cfg.node_limit = self.node_limit;
        cfg.time_limit = self.time_limit.map(Duration::from_secs_f64);
        Ok(cfg)
    }
}

/// `decl` keeps the model's declared order; anything else names a file
/// listing every action exactly once (whitespace separated, `#` comments).
fn parse_order(sys: &System, arg: &str) -> Result<Option<Vec<ActionId>>, CliError> {
    if arg == "decl" {
        return Ok(None);
    }
    let text = fs::read_to_string(arg)
        .map_err(|e| input(format!("cannot read order file {arg}: {e}")))?;
    let mut order = Vec::with_capacity(sys.n_actions());
    let mut seen = vec![false; sys.n_actions()];
    let toks = text
        .lines()
        .flat_map(|l| l.split('#').next().unwrap_or("").split_whitespace());
    for tok in toks {
        let a = sys
            .action_by_name(tok)
            .ok_or_else(|| input(format!("order file {arg}: unknown action {tok:?}")))?;
        if std::mem::replace(&mut seen[a.index()], true) {
            return Err(input(format!(
                "order file {arg}: action {tok:?} listed twice"
            )));
        }
        order.push(a);
    }
    if order.len() != sys.n_actions() {
        return Err(input(format!(
            "order file {arg}: lists {} of {} actions",
            order.len(),
            sys.n_actions()
        )));
    }
    Ok(Some(order))
}

/// Write to the path, or to stdout when no path is given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// `{a,b,c}` with names in declaration order.
pub fn fmt_set(sys: &System, set: &ActionSet) -> String {
    let names: Vec<&str> = set.iter().map(|a| sys.action_name(a)).collect();
    format!("{{{}}}", names.join(","))
}
