//! Path-based shutdown metric.
//!
//! For every unordered sector pair `{i, j}` and every length `n` (in edges),
//! compare the number of simple paths before (`a`) and after (`b`) a sector or
//! route is shut down:
//!
//! * `b == 0 < a` adds `a` to the lost count for `n`,
//! * `0 < b < a` adds `a - b` to the reduced count for `n`.
//!
//! The default count for `n` is the number of length-`n` simple paths in the
//! intact graph. For a sector shutdown, pairs containing the sector are skipped.
//! Pairs are unordered and counted once; counting ordered pairs would double
//! every count and leave the ratios unchanged.
//!
//! The score weights length `n` by `max_n - n + 1`, so shorter paths weigh
//! more:
//!
//! ```text
//! V_k = sum_n (max_n - n + 1) * (w * lost_n + (1 - w) * reduced_n) / default_n
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{simple_path_counts_from, GraphError, RouteKey, SectorGraph, SectorId};
use crate::spectral::{crdos_vulnerability, SpectralError, SpectralParams};

pub const DEFAULT_WEIGHT_LOST: f64 = 0.75;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PathError {
    #[error("invalid path parameters: {0}")]
    InvalidParams(String),
    #[error("length {0}: lost or reduced paths recorded but no baseline paths")]
    DivisionByZeroLength(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// What gets shut down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Shutdown {
    Sector(SectorId),
    Route(RouteKey),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathParams {
    /// Weight of lost paths against reduced ones, strictly between 0.5 and 1.
    pub weight_lost: f64,
    pub max_n: usize,
}

impl PathParams {
    pub fn new(weight_lost: f64, max_n: usize) -> Result<Self, PathError> {
        let p = Self { weight_lost, max_n };
        p.validate()?;
        Ok(p)
    }

    /// `max_n` defaults to the graph diameter (at least 1).
    pub fn for_graph(graph: &SectorGraph, weight_lost: f64) -> Result<Self, PathError> {
        Self::new(weight_lost, graph.diameter()?.max(1))
    }

    pub fn validate(&self) -> Result<(), PathError> {
        if !(self.weight_lost > 0.5 && self.weight_lost < 1.0) {
            return Err(PathError::InvalidParams(format!(
                "weight_lost must lie in (0.5, 1), got {}",
                self.weight_lost
            )));
        }
        if self.max_n == 0 {
            return Err(PathError::InvalidParams("max_n must be at least 1".into()));
        }
        Ok(())
    }
}

/// Lost/reduced/default path counts for one shutdown, indexed by `n - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCensus {
    pub max_n: usize,
    pub default_paths: Vec<u64>,
    pub lost: Vec<u64>,
    pub reduced: Vec<u64>,
}

/// Simple path counts per unordered pair `(low, high)`, indexed by `n - 1`.
pub fn pair_path_counts(graph: &SectorGraph, max_n: usize) -> BTreeMap<(SectorId, SectorId), Vec<u64>> {
    let adj = graph.undirected_adjacency();
    let mut out = BTreeMap::new();
    for i in graph.sectors() {
        for (j, counts) in simple_path_counts_from(&adj, i, max_n) {
            if i < j {
                out.insert((i, j), counts);
            }
        }
    }
    out
}

pub fn path_census(graph: &SectorGraph, shutdown: Shutdown, params: &PathParams) -> Result<PathCensus, PathError> {
    params.validate()?;
    let max_n = params.max_n;
    let reduced_graph = match shutdown {
        Shutdown::Sector(k) => graph.remove_sector(k)?,
        Shutdown::Route(r) => graph.remove_route(r.from, r.to)?,
    };
    let baseline = pair_path_counts(graph, max_n);
    let after = pair_path_counts(&reduced_graph, max_n);

    let mut census = PathCensus {
        max_n,
        default_paths: vec![0; max_n],
        lost: vec![0; max_n],
        reduced: vec![0; max_n],
    };
    for (&(i, j), counts) in &baseline {
        for (n, &a) in counts.iter().enumerate() {
            census.default_paths[n] += a;
        }
        if let Shutdown::Sector(k) = shutdown {
            if i == k || j == k {
                continue;
            }
        }
        let remaining = after.get(&(i, j));
        for (n, &a) in counts.iter().enumerate() {
            let b = remaining.map_or(0, |c| c[n]);
            if a > 0 && b == 0 {
                census.lost[n] += a;
            } else if b > 0 && b < a {
                census.reduced[n] += a - b;
            }
        }
    }
    Ok(census)
}

/// Score of a census under weight `w`.
pub fn v_k_from_census(census: &PathCensus, weight_lost: f64) -> Result<f64, PathError> {
    let max_n = census.max_n;
    let mut total = 0.0;
    for n in 1..=max_n {
        let numerator = weight_lost * census.lost[n - 1] as f64 + (1.0 - weight_lost) * census.reduced[n - 1] as f64;
        let default = census.default_paths[n - 1];
        if default == 0 {
            if numerator != 0.0 {
                return Err(PathError::DivisionByZeroLength(n));
            }
            continue;
        }
        total += (max_n - n + 1) as f64 * numerator / default as f64;
    }
    Ok(total)
}

pub fn v_k(graph: &SectorGraph, shutdown: Shutdown, params: &PathParams) -> Result<f64, PathError> {
    let census = path_census(graph, shutdown, params)?;
    v_k_from_census(&census, params.weight_lost)
}

/// 1-based ranks, descending by value, ties broken by ascending key.
///
/// Values are compared after rounding to 9 decimal places so that eigen
/// round-off on symmetric graphs does not split ties.
pub fn rank_descending<K: Ord + Copy>(values: impl IntoIterator<Item = (K, f64)>) -> BTreeMap<K, usize> {
    let mut v: Vec<(K, f64)> = values.into_iter().map(|(k, x)| (k, (x * 1e9).round())).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().enumerate().map(|(i, (k, _))| (k, i + 1)).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompareError {
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Path score and complete-RDOS spectral score for one sector.
pub fn compare_sector(
    graph: &SectorGraph,
    sector: SectorId,
    spectral: &SpectralParams,
    path: &PathParams,
) -> Result<(f64, f64), CompareError> {
    let vk = v_k(graph, Shutdown::Sector(sector), path)?;
    let vt = crdos_vulnerability(graph, sector, spectral)?;
    Ok((vk, vt))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub sector: SectorId,
    pub vk: Result<f64, String>,
    pub vk_rank: Option<usize>,
    pub vt: Result<f64, String>,
    pub vt_rank: Option<usize>,
    pub difference: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    /// Largest rank difference over sectors ranked by both metrics.
    pub max_difference: Option<usize>,
}

impl ComparisonReport {
    pub fn failed(&self) -> impl Iterator<Item = &ComparisonRow> + '_ {
        self.rows.iter().filter(|r| r.vk.is_err() || r.vt.is_err())
    }
}

/// Ranks every sector by the path metric and by the complete-RDOS spectral
/// metric. A sector whose metric fails keeps its error and gets no rank under
/// that metric.
pub fn rank_compare(graph: &SectorGraph, spectral: &SpectralParams, path: &PathParams) -> ComparisonReport {
    let mut vk = BTreeMap::new();
    let mut vt = BTreeMap::new();
    for s in graph.sectors() {
        vk.insert(s, v_k(graph, Shutdown::Sector(s), path).map_err(|e| e.to_string()));
        vt.insert(s, crdos_vulnerability(graph, s, spectral).map_err(|e| e.to_string()));
    }
    let ok = |m: &BTreeMap<SectorId, Result<f64, String>>| {
        rank_descending(m.iter().filter_map(|(k, v)| v.as_ref().ok().map(|x| (*k, *x))))
    };
    let vk_ranks = ok(&vk);
    let vt_ranks = ok(&vt);

    let rows: Vec<ComparisonRow> = graph
        .sectors()
        .map(|s| {
            let (a, b) = (vk_ranks.get(&s).copied(), vt_ranks.get(&s).copied());
            ComparisonRow {
                sector: s,
                vk: vk[&s].clone(),
                vk_rank: a,
                vt: vt[&s].clone(),
                vt_rank: b,
                difference: a.zip(b).map(|(x, y)| x.abs_diff(y)),
            }
        })
        .collect();
    let max_difference = rows.iter().filter_map(|r| r.difference).max();
    ComparisonReport { rows, max_difference }
}
