//! `bench`: run a matrix of (model, preset) cells and print one CSV row per
//! cell.
//!
//! The matrix is a text file with one model family per line and `#` for
//! comments:
//!
//! ```text
//! dp n=4..=10 meals=1 presets=reach,pset+sleep,full+sleep timeout=10
//! multilocks clients=4 locks=10 k=2 seeds=0..51 presets=reach
//! gates height=3 presets=full+sleep
//! fig6 n=6 presets=exact
//! fig name=fig1 presets=reach
//! file path=model.csys presets=reach timeout=5
//! ```
//!
//! Integer parameters accept `A..B` (half-open) and `A..=B` (inclusive)
//! ranges. A line expands to its cross product with the family's parameters
//! in a fixed order (dp: n, meals; multilocks: clients, locks, k, seeds),
//! the first varying slowest and presets fastest. Cells run sequentially in
//! matrix order. A cell whose time limit fires is recorded with status
//! `timeout` and partial counts; a cell whose model cannot be loaded is
//! recorded with status `error`.

use crate::common::{config_by_name, emit, input, load_system, preset_names, CliError};
use clap::Args;
use porex_core::explorer::{explore, stats_csv_row, STATS_CSV_HEADER};
use porex_core::generators as g;
use porex_core::System;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Duration;

#[derive(Args)]
pub struct BenchArgs {
    /// Matrix file, one model family per line (see --help for the format)
    pub matrix: PathBuf,
    /// Output file (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

enum ModelSource {
    Built(Box<System>),
    File(PathBuf),
}

/// One matrix line after range expansion: a model and the presets to run it
/// under, all sharing a time limit.
struct ModelSpec {
    source: ModelSource,
    presets: Vec<String>,
    timeout: Option<f64>,
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.matrix)
        .map_err(|e| input(format!("cannot read {}: {e}", args.matrix.display())))?;
    let specs = parse_matrix(&text)?;

    let mut csv = String::new();
    let _ = writeln!(csv, "{STATS_CSV_HEADER},status");
    for spec in &specs {
        let sys = match &spec.source {
            ModelSource::Built(sys) => Ok(sys.as_ref().clone()),
            ModelSource::File(path) => load_system(path),
        };
        match sys {
            Ok(sys) => {
                for preset in &spec.presets {
                    let mut cfg = config_by_name(preset).expect("presets validated at parse");
                    cfg.time_limit = spec.timeout.map(Duration::from_secs_f64);
                    let ex = explore(&sys, &cfg);
                    let status = if ex.interrupted.is_some() { "timeout" } else { "ok" };
                    let _ = writeln!(csv, "{},{}", stats_csv_row(&ex.stats), status);
                }
            }
            Err(err) => {
                let ModelSource::File(path) = &spec.source else {
                    unreachable!("built models cannot fail to load");
                };
                eprintln!("bench: {err}");
                for preset in &spec.presets {
                    let _ = writeln!(csv, "{},{preset},-,0,0,0,,0,0,error", path.display());
                }
            }
        }
    }
    emit(args.out.as_deref(), &csv)
}

fn parse_matrix(text: &str) -> Result<Vec<ModelSpec>, CliError> {
    let mut specs = Vec::new();
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
        let bad = |msg: String| input(format!("matrix line {line}: {msg}"));

        let mut params: BTreeMap<&str, &str> = BTreeMap::new();
        let mut presets: Option<Vec<String>> = None;
        let mut timeout = None;
        for tok in &toks[1..] {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got {tok:?}")))?;
            match k {
                "presets" => presets = Some(v.split(',').map(str::to_string).collect()),
                "timeout" => {
                    let t: f64 = v
                        .parse()
                        .map_err(|_| bad(format!("bad timeout {v:?}")))?;
                    timeout = Some(t);
                }
                _ => {
                    if params.insert(k, v).is_some() {
                        return Err(bad(format!("duplicate parameter {k}")));
                    }
                }
            }
        }
        let presets = presets.ok_or_else(|| bad("missing presets=".into()))?;
        for p in &presets {
            if config_by_name(p).is_none() {
                return Err(bad(format!(
                    "unknown preset {p:?}; expected one of: {}",
                    preset_names()
                )));
            }
        }

        let sources = expand_family(line, toks[0], &mut params)?;
        if let Some((k, _)) = params.first_key_value() {
            return Err(bad(format!("unknown parameter {k} for family {}", toks[0])));
        }
        for source in sources {
            specs.push(ModelSpec {
                source,
                presets: presets.clone(),
                timeout,
            });
        }
    }
    Ok(specs)
}

/// Builds every model instance a line describes, consuming the parameters it
/// understands; leftovers are the caller's to reject.
fn expand_family(
    line: usize,
    family: &str,
    params: &mut BTreeMap<&str, &str>,
) -> Result<Vec<ModelSource>, CliError> {
    let built = |sys: System| ModelSource::Built(Box::new(sys));
    match family {
        "dp" => {
            let ns = int_values(line, "n", required(line, params, "n")?)?;
            let meals = optional_ints(line, params, "meals", 1)?;
            let mut out = Vec::new();
            for &n in &ns {
                for &m in &meals {
                    out.push(built(g::gen_philosophers(n as usize, m as usize)));
                }
            }
            Ok(out)
        }
        "multilocks" => {
            let clients = int_values(line, "clients", required(line, params, "clients")?)?;
            let locks = int_values(line, "locks", required(line, params, "locks")?)?;
            let k = int_values(line, "k", required(line, params, "k")?)?;
            let seeds = optional_ints(line, params, "seeds", 0)?;
            let mut out = Vec::new();
            for &c in &clients {
                for &l in &locks {
                    for &k in &k {
                        for &s in &seeds {
                            out.push(built(g::gen_multilocks(
                                c as usize, l as usize, k as usize, s,
                            )));
                        }
                    }
                }
            }
            Ok(out)
        }
        "gates" => {
            let heights = int_values(line, "height", required(line, params, "height")?)?;
            Ok(heights
                .iter()
                .map(|&h| built(g::gen_boolean_gates(h as usize)))
                .collect())
        }
        "fig6" => {
            let ns = int_values(line, "n", required(line, params, "n")?)?;
            Ok(ns.iter().map(|&n| built(g::gen_fig6(n as usize))).collect())
        }
        "fig" => {
            let name = required(line, params, "name")?;
            let sys = g::builtin_figures().remove(name).ok_or_else(|| {
                input(format!("matrix line {line}: unknown figure {name:?}"))
            })?;
            Ok(vec![built(sys)])
        }
        "file" => {
            let path = required(line, params, "path")?;
            Ok(vec![ModelSource::File(PathBuf::from(path))])
        }
        other => Err(input(format!(
            "matrix line {line}: unknown family {other:?}; expected dp, multilocks, gates, fig6, fig, or file"
        ))),
    }
}

fn required<'a>(
    line: usize,
    params: &mut BTreeMap<&str, &'a str>,
    key: &str,
) -> Result<&'a str, CliError> {
    params
        .remove(key)
        .ok_or_else(|| input(format!("matrix line {line}: missing {key}=")))
}

fn optional_ints(
    line: usize,
    params: &mut BTreeMap<&str, &str>,
    key: &str,
    default: u64,
) -> Result<Vec<u64>, CliError> {
    match params.remove(key) {
        Some(v) => int_values(line, key, v),
        None => Ok(vec![default]),
    }
}

/// A single integer, `A..B`, or `A..=B`.
fn int_values(line: usize, key: &str, v: &str) -> Result<Vec<u64>, CliError> {
    let bad = || input(format!("matrix line {line}: bad value {v:?} for {key}"));
    let Some((lo, hi)) = v.split_once("..") else {
        return Ok(vec![v.parse().map_err(|_| bad())?]);
    };
    let lo: u64 = lo.parse().map_err(|_| bad())?;
    let hi: u64 = match hi.strip_prefix('=') {
        Some(h) => h.parse::<u64>().map_err(|_| bad())? + 1,
        None => hi.parse().map_err(|_| bad())?,
    };
    if lo >= hi {
        return Err(input(format!(
            "matrix line {line}: empty range {v} for {key}"
        )));
    }
    Ok((lo..hi).collect())
}
