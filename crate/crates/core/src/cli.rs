//! Command-line entry points.
//!
//! Exit status: 0 on success, 1 when the scenario cannot be read, parsed or
//! validated, 2 when a computation fails (disconnected graph, write error).

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::engine::simulate;
use crate::graph::{RouteKey, SectorGraph};
use crate::output::{render, write_file, write_trace_csv};
use crate::paths::{rank_compare, rank_descending, v_k, PathParams, Shutdown};
use crate::scenario::{parse_scenario, ScenarioDocument};
use crate::spectral::{crdos_vulnerability, prdos_vulnerability, sdos_vulnerability, SpectralParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sectorflow", version, about = "Sector flow simulation under ADS-B attacks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write backlogs.csv, arrivals.csv and events.csv.
    Simulate {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Rank sectors (crdos, sdos) or routes (prdos) by spectral vulnerability.
    RankSpectral {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        attack: SpectralAttack,
        #[command(flatten)]
        spectral: SpectralFlags,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Rank sectors and routes by the path-loss metric.
    RankPath {
        scenario: PathBuf,
        #[command(flatten)]
        path: PathFlags,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare path-metric and C-RDOS spectral rankings per sector.
    Compare {
        scenario: PathBuf,
        #[command(flatten)]
        spectral: SpectralFlags,
        #[command(flatten)]
        path: PathFlags,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run with and without the scenario's attacks and write the differences.
    BaselineDiff {
        scenario: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpectralAttack {
    Crdos,
    Prdos,
    Sdos,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SpectralFlags {
    #[arg(long)]
    pub alpha: Option<u32>,
    #[arg(long)]
    pub beta: Option<u32>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub sdos_factor: Option<f64>,
}

impl SpectralFlags {
    fn apply(&self, base: SpectralParams) -> SpectralParams {
        SpectralParams {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            c_exp: self.c.unwrap_or(base.c_exp),
            sdos_factor: self.sdos_factor.unwrap_or(base.sdos_factor),
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct PathFlags {
    #[arg(long)]
    pub weight_lost: Option<f64>,
    #[arg(long)]
    pub max_n: Option<usize>,
}

/// Failure carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn invalid(e: impl Display) -> Failure {
    Failure {
        code: EXIT_INVALID,
        message: e.to_string(),
    }
}

fn compute(e: impl Display) -> Failure {
    Failure {
        code: EXIT_COMPUTE,
        message: e.to_string(),
    }
}

fn load(path: &Path) -> Result<ScenarioDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn path_params(doc: &ScenarioDocument, graph: &SectorGraph, flags: &PathFlags) -> Result<PathParams, Failure> {
    let weight = flags.weight_lost.unwrap_or_else(|| doc.weight_lost());
    let max_n = match flags.max_n.or(doc.metrics.max_n) {
        Some(n) => n,
        None => graph.diameter().map_err(compute)?.max(1),
    };
    PathParams::new(weight, max_n).map_err(invalid)
}

fn emit(dir: &Path, name: &str, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    let p = write_file(dir, name, text).map_err(compute)?;
    writeln!(out, "wrote {}", p.display()).map_err(compute)
}

fn ranked_rows<K: Ord + Copy>(values: &[(K, f64)], key: impl Fn(K) -> Vec<String>) -> Vec<Vec<String>> {
    let ranks = rank_descending(values.iter().copied());
    values
        .iter()
        .map(|(k, v)| {
            let mut row = key(*k);
            row.push(v.to_string());
            row.push(ranks[k].to_string());
            row
        })
        .collect()
}

/// Undirected routes, one direction each.
fn route_targets(graph: &SectorGraph) -> Vec<RouteKey> {
    graph
        .routes()
        .map(|(k, _)| k)
        .filter(|k| k.from < k.to || !graph.has_route(k.reversed()))
        .collect()
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate { scenario, out: dir } => {
            let doc = load(&scenario)?;
            let graph = doc.build_graph();
            let trace = simulate(&graph, doc.initial_state(&graph), &doc.attacks, doc.horizon).map_err(compute)?;
            for w in &trace.warnings {
                writeln!(out, "warning: {w}").map_err(compute)?;
            }
            for p in write_trace_csv(&trace, &dir).map_err(compute)? {
                writeln!(out, "wrote {}", p.display()).map_err(compute)?;
            }
        }
        Command::RankSpectral {
            scenario,
            attack,
            spectral,
            out: dir,
        } => {
            let doc = load(&scenario)?;
            let graph = doc.build_graph();
            let params = spectral.apply(doc.spectral_params());
            params.validate().map_err(invalid)?;
            let (name, text) = match attack {
                SpectralAttack::Crdos | SpectralAttack::Sdos => {
                    let mut values = Vec::new();
                    for s in graph.sectors() {
                        let v = if attack == SpectralAttack::Crdos {
                            crdos_vulnerability(&graph, s, &params)
                        } else {
                            sdos_vulnerability(&graph, s, &params)
                        };
                        values.push((s, v.map_err(compute)?));
                    }
                    let name = if attack == SpectralAttack::Crdos {
                        "spectral_crdos.csv"
                    } else {
                        "spectral_sdos.csv"
                    };
                    let rows = ranked_rows(&values, |s| vec![s.to_string()]);
                    (name, render(&["sector", "value", "rank"], rows).map_err(compute)?)
                }
                SpectralAttack::Prdos => {
                    let mut values = Vec::new();
                    for r in route_targets(&graph) {
                        let v =
                            prdos_vulnerability(&graph, r, &params).map_err(|e| compute(format!("route {r}: {e}")))?;
                        values.push((r, v));
                    }
                    let rows = ranked_rows(&values, |r| vec![r.from.to_string(), r.to.to_string()]);
                    (
                        "spectral_prdos.csv",
                        render(&["from_sector", "to_sector", "value", "rank"], rows).map_err(compute)?,
                    )
                }
            };
            emit(&dir, name, &text, out)?;
        }
        Command::RankPath {
            scenario,
            path,
            out: dir,
        } => {
            let doc = load(&scenario)?;
            let graph = doc.build_graph();
            let params = path_params(&doc, &graph, &path)?;
            let mut sectors = Vec::new();
            for s in graph.sectors() {
                sectors.push((s, v_k(&graph, Shutdown::Sector(s), &params).map_err(compute)?));
            }
            let mut routes = Vec::new();
            for r in route_targets(&graph) {
                routes.push((r, v_k(&graph, Shutdown::Route(r), &params).map_err(compute)?));
            }
            let rows = ranked_rows(&sectors, |s| vec![s.to_string()]);
            emit(
                &dir,
                "path_sectors.csv",
                &render(&["sector", "value", "rank"], rows).map_err(compute)?,
                out,
            )?;
            let rows = ranked_rows(&routes, |r| vec![r.from.to_string(), r.to.to_string()]);
            emit(
                &dir,
                "path_routes.csv",
                &render(&["from_sector", "to_sector", "value", "rank"], rows).map_err(compute)?,
                out,
            )?;
        }
        Command::Compare {
            scenario,
            spectral,
            path,
            out: dir,
        } => {
            let doc = load(&scenario)?;
            let graph = doc.build_graph();
            let sp = spectral.apply(doc.spectral_params());
            sp.validate().map_err(invalid)?;
            let pp = path_params(&doc, &graph, &path)?;
            let report = rank_compare(&graph, &sp, &pp);
            let opt = |x: Option<usize>| x.map(|v| v.to_string()).unwrap_or_default();
            let rows = report.rows.iter().map(|r| {
                let status = match (&r.vk, &r.vt) {
                    (Ok(_), Ok(_)) => "ok".to_string(),
                    (Err(e), _) | (_, Err(e)) => e.clone(),
                };
                vec![
                    r.sector.to_string(),
                    opt(r.vk_rank),
                    r.vk.as_ref().map(|v| v.to_string()).unwrap_or_default(),
                    opt(r.vt_rank),
                    r.vt.as_ref().map(|v| v.to_string()).unwrap_or_default(),
                    opt(r.difference),
                    status,
                ]
            });
            let text = render(
                &[
                    "sector",
                    "vk_rank",
                    "vk_value",
                    "vt_rank",
                    "vt_value",
                    "difference",
                    "status",
                ],
                rows,
            )
            .map_err(compute)?;
            emit(&dir, "comparison.csv", &text, out)?;
            for r in report.failed() {
                writeln!(out, "sector {} not fully ranked", r.sector).map_err(compute)?;
            }
            match report.max_difference {
                Some(d) => writeln!(out, "max rank difference: {d}"),
                None => writeln!(out, "max rank difference: n/a"),
            }
            .map_err(compute)?;
        }
        Command::BaselineDiff { scenario, out: dir } => {
            let doc = load(&scenario)?;
            let graph = doc.build_graph();
            let base = simulate(&graph, doc.initial_state(&graph), &[], doc.horizon).map_err(compute)?;
            let hit = simulate(&graph, doc.initial_state(&graph), &doc.attacks, doc.horizon).map_err(compute)?;

            let fmt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
            let rows = base.arrivals.iter().map(|(id, b)| {
                let a = hit.arrivals.get(id).copied().flatten();
                let delta = b.zip(a).map(|(b, a)| (i64::from(a) - i64::from(b)).to_string());
                vec![id.to_string(), fmt(*b), fmt(a), delta.unwrap_or_default()]
            });
            let text = render(&["aircraft_id", "baseline_t", "attacked_t", "delta"], rows).map_err(compute)?;
            emit(&dir, "arrival_deltas.csv", &text, out)?;

            let len = doc.horizon as usize + 1;
            let rows = (0..len).flat_map(|t| base.backlogs.iter().map(move |(route, b)| (t, *route, b[t])));
            let rows = rows.map(|(t, route, b)| {
                let a = hit.backlogs[&route][t];
                vec![
                    t.to_string(),
                    route.from.to_string(),
                    route.to.to_string(),
                    b.to_string(),
                    a.to_string(),
                    (i64::from(a) - i64::from(b)).to_string(),
                ]
            });
            let text = render(
                &["t", "from_sector", "to_sector", "baseline", "attacked", "delta"],
                rows,
            )
            .map_err(compute)?;
            emit(&dir, "backlog_deltas.csv", &text, out)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
