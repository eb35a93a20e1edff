//! Spectral vulnerability metric.
//!
//! For a connected graph with symmetric Laplacian `L`, let `lambda` be the
//! smallest positive eigenvalue and `v` its unit eigenvector. Each undirected
//! sector pair `{i, j}` joined by a route scores `f_ij^alpha * |v_i - v_j|^beta`
//! and the total is the sum of those scores divided by `lambda^c`. Since
//! `lambda` does not depend on the pair it is factored out of the sum.
//!
//! When both directions of a route exist, the pair flow is the larger of the
//! two flow densities (routes declared bidirectional share one value).
//!
//! The attack variants reshape the graph before scoring:
//! * complete RDOS sums the totals over every "keep one edge of the target"
//!   variant,
//! * partial RDOS scores the graph without the blocked route,
//! * SDOS scales the flow on the target's outflows and leaves `L` unchanged.

use std::collections::BTreeMap;

use log::warn;
use nalgebra::SymmetricEigen;
use thiserror::Error;

use crate::graph::{GraphError, LaplacianMatrix, RouteKey, SectorGraph, SectorId};

/// Eigenvalues at or below this are treated as zero.
pub const EIGEN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("Laplacian has no positive eigenvalue (edgeless graph)")]
    NoPositiveEigenvalue,
    #[error("Laplacian is not symmetric")]
    NotSymmetric,
    #[error("C-RDOS on sector {target}: {}", match .kept {
        Some(k) => format!("keeping only edge {target}-{k} disconnects the graph"),
        None => "sector has no edges".to_string(),
    })]
    DisconnectedVariant { target: SectorId, kept: Option<SectorId> },
    #[error("invalid spectral parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Flow exponent.
    pub alpha: u32,
    /// Eigenvector-difference exponent.
    pub beta: u32,
    /// Eigenvalue exponent.
    pub c_exp: f64,
    /// Flow multiplier on the SDOS target's outflows.
    pub sdos_factor: f64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self {
            alpha: 1,
            beta: 1,
            c_exp: 1.0,
            sdos_factor: 3.0,
        }
    }
}

impl SpectralParams {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if self.alpha < 1 || self.beta < 1 {
            return Err(SpectralError::InvalidParams(
                "alpha and beta must be positive integers".into(),
            ));
        }
        if !(self.c_exp.is_finite() && self.c_exp >= 0.0) {
            return Err(SpectralError::InvalidParams("c must be a non-negative number".into()));
        }
        if !(self.sdos_factor.is_finite() && self.sdos_factor > 0.0) {
            return Err(SpectralError::InvalidParams("sdos factor must be positive".into()));
        }
        Ok(())
    }
}

/// Smallest positive eigenpair of a Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiedler {
    pub lambda: f64,
    /// Unit eigenvector in the Laplacian's sector order; first nonzero
    /// component positive.
    pub vector: Vec<f64>,
    pub order: Vec<SectorId>,
    /// How many eigenvalues coincide with `lambda`.
    pub multiplicity: usize,
}

impl Fiedler {
    pub fn component(&self, sector: SectorId) -> Option<f64> {
        self.order.iter().position(|s| *s == sector).map(|i| self.vector[i])
    }
}

pub fn fiedler(l: &LaplacianMatrix) -> Result<Fiedler, SpectralError> {
    let n = l.dim();
    if n < 2 {
        return Err(SpectralError::NoPositiveEigenvalue);
    }
    if !l.is_symmetric() {
        return Err(SpectralError::NotSymmetric);
    }
    let eig = SymmetricEigen::new(l.matrix.clone());
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let Some(&pick) = idx.iter().find(|&&i| eig.eigenvalues[i] > EIGEN_TOLERANCE) else {
        return Err(SpectralError::NoPositiveEigenvalue);
    };
    let lambda = eig.eigenvalues[pick];
    let multiplicity = idx
        .iter()
        .filter(|&&i| (eig.eigenvalues[i] - lambda).abs() <= 1e-8 * lambda.max(1.0))
        .count();
    if multiplicity > 1 {
        warn!("smallest positive eigenvalue {lambda} has multiplicity {multiplicity}; eigenvector choice is solver-dependent");
    }

    let mut vector: Vec<f64> = eig.eigenvectors.column(pick).iter().copied().collect();
    let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
    let lead = vector
        .iter()
        .copied()
        .find(|x| x.abs() > EIGEN_TOLERANCE)
        .unwrap_or(1.0);
    let scale = if lead < 0.0 { -1.0 / norm } else { 1.0 / norm };
    for x in &mut vector {
        *x *= scale;
    }
    Ok(Fiedler {
        lambda,
        vector,
        order: l.order.clone(),
        multiplicity,
    })
}

/// Score of a single edge: `f^alpha * dv^beta`.
pub fn edge_vulnerability(f: f64, dv: f64, params: &SpectralParams) -> f64 {
    f.powi(params.alpha as i32) * dv.powi(params.beta as i32)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub fiedler: Fiedler,
    /// Per undirected pair `(low, high)`, before division by `lambda^c`.
    pub edge_scores: BTreeMap<(SectorId, SectorId), f64>,
    pub total: f64,
}

impl SpectralResult {
    pub fn lambda(&self) -> f64 {
        self.fiedler.lambda
    }
}

/// Flow assigned to the undirected pair `{a, b}`.
pub fn pair_flow(graph: &SectorGraph, a: SectorId, b: SectorId) -> Option<f64> {
    let fwd = graph.route(RouteKey { from: a, to: b }).map(|r| r.flow);
    let back = graph.route(RouteKey { from: b, to: a }).map(|r| r.flow);
    match (fwd, back) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    }
}

fn scored<F>(graph: &SectorGraph, params: &SpectralParams, flow_of: F) -> Result<SpectralResult, SpectralError>
where
    F: Fn(SectorId, SectorId) -> f64,
{
    params.validate()?;
    graph.check_connected()?;
    let fiedler = fiedler(&graph.laplacian(true))?;
    let index = graph.index_of();
    let mut edge_scores = BTreeMap::new();
    for (key, _) in graph.routes() {
        let (lo, hi) = if key.from < key.to {
            (key.from, key.to)
        } else {
            (key.to, key.from)
        };
        if edge_scores.contains_key(&(lo, hi)) {
            continue;
        }
        let dv = (fiedler.vector[index[&lo]] - fiedler.vector[index[&hi]]).abs();
        edge_scores.insert((lo, hi), edge_vulnerability(flow_of(lo, hi), dv, params));
    }
    let total = edge_scores.values().sum::<f64>() / fiedler.lambda.powf(params.c_exp);
    Ok(SpectralResult {
        fiedler,
        edge_scores,
        total,
    })
}

/// Total vulnerability of the intact graph.
pub fn total_vulnerability(graph: &SectorGraph, params: &SpectralParams) -> Result<SpectralResult, SpectralError> {
    scored(graph, params, |a, b| pair_flow(graph, a, b).unwrap_or(0.0))
}

/// Graph where `target` keeps only its edge to `kept`.
pub fn keep_one_edge(graph: &SectorGraph, target: SectorId, kept: SectorId) -> Result<SectorGraph, GraphError> {
    let mut out = graph.clone();
    for n in graph.undirected_neighbors(target) {
        if n == kept {
            continue;
        }
        for key in [RouteKey { from: target, to: n }, RouteKey { from: n, to: target }] {
            if out.has_route(key) {
                out = out.remove_route(key.from, key.to)?;
            }
        }
    }
    Ok(out)
}

/// Complete-RDOS score: sum of totals over the keep-one-edge variants.
pub fn crdos_vulnerability(
    graph: &SectorGraph,
    target: SectorId,
    params: &SpectralParams,
) -> Result<f64, SpectralError> {
    if !graph.contains_sector(target) {
        return Err(GraphError::UnknownSector(target).into());
    }
    let neighbors = graph.undirected_neighbors(target);
    if neighbors.is_empty() {
        return Err(SpectralError::DisconnectedVariant { target, kept: None });
    }
    let mut sum = 0.0;
    for kept in neighbors {
        let variant = keep_one_edge(graph, target, kept)?;
        if !variant.is_connected() {
            return Err(SpectralError::DisconnectedVariant {
                target,
                kept: Some(kept),
            });
        }
        sum += total_vulnerability(&variant, params)?.total;
    }
    Ok(sum)
}

/// Partial-RDOS score: total of the graph without route `(i, j)`.
pub fn prdos_vulnerability(
    graph: &SectorGraph,
    route: RouteKey,
    params: &SpectralParams,
) -> Result<f64, SpectralError> {
    let reduced = graph.remove_route(route.from, route.to)?;
    Ok(total_vulnerability(&reduced, params)?.total)
}

/// SDOS score: flows on the target's outflows scaled by `sdos_factor`.
pub fn sdos_vulnerability(
    graph: &SectorGraph,
    target: SectorId,
    params: &SpectralParams,
) -> Result<f64, SpectralError> {
    if !graph.contains_sector(target) {
        return Err(GraphError::UnknownSector(target).into());
    }
    let result = scored(graph, params, |a, b| {
        let other = if a == target {
            b
        } else if b == target {
            a
        } else {
            return pair_flow(graph, a, b).unwrap_or(0.0);
        };
        match graph.route(RouteKey {
            from: target,
            to: other,
        }) {
            Some(r) => r.flow * params.sdos_factor,
            None => pair_flow(graph, a, b).unwrap_or(0.0),
        }
    })?;
    Ok(result.total)
}
