//! Scenario documents.
//!
//! A scenario is a single TOML file holding the sector graph, the aircraft,
//! the attack schedule and optional metric parameters. The grammar is
//! documented in `scenarios/README.md`; `version = 1` is the only supported
//! version.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{validate_attacks, AttackError, AttackKind, AttackScenario};
use crate::engine::{Aircraft, AircraftId, NetworkState};
use crate::graph::{Route, RouteKey, SectorGraph, SectorId};
use crate::paths::{PathParams, DEFAULT_WEIGHT_LOST};
use crate::spectral::SpectralParams;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub horizon: u32,
    #[serde(default, skip_serializing_if = "MetricOverrides::is_empty")]
    pub metrics: MetricOverrides,
    pub graph: GraphSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aircraft: Vec<AircraftSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub streams: Vec<StreamSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attacks: Vec<AttackScenario>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub sectors: Vec<u32>,
    #[serde(default)]
    pub routes: Vec<RouteSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteSpec {
    pub from: u32,
    pub to: u32,
    pub capacity: u32,
    #[serde(default = "default_flow")]
    pub flow: f64,
    #[serde(default)]
    pub bidirectional: bool,
}

fn default_flow() -> f64 {
    1.0
}

/// One aircraft. Without `inject_at` it starts queued at leg `hop` (default 0)
/// of its route; with `inject_at` it joins its first queue at that interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AircraftSpec {
    pub id: u32,
    pub route: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hop: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject_at: Option<u32>,
}

/// `rate` aircraft injected on `route` at every interval in `start..=end`,
/// numbered consecutively from `first_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    pub route: Vec<u32>,
    pub rate: u32,
    pub start: u32,
    pub end: u32,
    pub first_id: u32,
}

impl StreamSpec {
    pub fn count(&self) -> u32 {
        self.rate * (self.end - self.start + 1)
    }

    fn expand(&self) -> impl Iterator<Item = AircraftSpec> + '_ {
        let per = self.rate;
        (0..self.count()).map(move |k| AircraftSpec {
            id: self.first_id + k,
            route: self.route.clone(),
            hop: None,
            inject_at: Some(self.start + k / per),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sdos_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_lost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_n: Option<usize>,
}

impl MetricOverrides {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

/// Parses and validates a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioDocument, ScenarioError> {
    let doc: ScenarioDocument = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    doc.validate()?;
    Ok(doc)
}

pub fn to_toml(doc: &ScenarioDocument) -> String {
    toml::to_string(doc).expect("scenario documents always serialize")
}

impl ScenarioDocument {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.version != FORMAT_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported version {} (expected {FORMAT_VERSION})", self.version),
            ));
        }
        if self.horizon < 1 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        let graph = self.build_graph_checked()?;

        let mut seen = BTreeSet::new();
        for (i, s) in self.streams.iter().enumerate() {
            let path = format!("streams[{i}]");
            if s.start > s.end {
                return Err(invalid(path, format!("start {} is after end {}", s.start, s.end)));
            }
            if s.start == 0 {
                return Err(invalid(format!("{path}.start"), "streams inject from interval 1 on"));
            }
            if s.rate == 0 {
                return Err(invalid(format!("{path}.rate"), "must be at least 1"));
            }
        }
        let all = self.all_aircraft();
        for (path, a) in &all {
            if !seen.insert(a.id) {
                return Err(invalid(format!("{path}.id"), format!("duplicate aircraft id {}", a.id)));
            }
            check_aircraft(path, a, &graph)?;
        }

        let ids: BTreeSet<AircraftId> = seen.iter().map(|&i| AircraftId(i)).collect();
        validate_attacks(&self.attacks, &graph, &ids).map_err(attack_error)?;
        for (i, atk) in self.attacks.iter().enumerate() {
            if let AttackKind::Rst {
                aircraft, ghost_from, ..
            } = atk.kind
            {
                let (_, spec) = all.iter().find(|(_, a)| a.id == aircraft.0).expect("validated above");
                let legs = &spec.route[spec.hop.unwrap_or(0)..spec.route.len() - 1];
                if !legs.contains(&ghost_from.0) {
                    return Err(invalid(
                        format!("attacks[{i}].ghost_from"),
                        format!("aircraft {aircraft} never departs from sector {ghost_from}"),
                    ));
                }
            }
        }
        self.spectral_params()
            .validate()
            .map_err(|e| invalid("metrics", e.to_string()))?;
        if let Some(w) = self.metrics.weight_lost {
            PathParams::new(w, 1).map_err(|e| invalid("metrics.weight_lost", e.to_string()))?;
        }
        if self.metrics.max_n == Some(0) {
            return Err(invalid("metrics.max_n", "must be at least 1"));
        }
        Ok(())
    }

    fn build_graph_checked(&self) -> Result<SectorGraph, ScenarioError> {
        let mut g = SectorGraph::new();
        for (i, &s) in self.graph.sectors.iter().enumerate() {
            if !g.add_sector(SectorId(s)) {
                return Err(invalid(format!("graph.sectors[{i}]"), format!("duplicate sector {s}")));
            }
        }
        if g.sector_count() == 0 {
            return Err(invalid("graph.sectors", "at least one sector is required"));
        }
        for (i, r) in self.graph.routes.iter().enumerate() {
            let route = Route {
                capacity: r.capacity,
                flow: r.flow,
            };
            let (from, to) = (SectorId(r.from), SectorId(r.to));
            let res = if r.bidirectional {
                g.add_bidirectional(from, to, route)
            } else {
                g.add_route(from, to, route)
            };
            res.map_err(|e| invalid(format!("graph.routes[{i}]"), e.to_string()))?;
        }
        Ok(g)
    }

    /// Sector graph; the document must already be valid.
    pub fn build_graph(&self) -> SectorGraph {
        self.build_graph_checked().expect("validated scenario")
    }

    /// Explicit aircraft followed by stream-generated ones, with field paths.
    fn all_aircraft(&self) -> Vec<(String, AircraftSpec)> {
        let mut out: Vec<(String, AircraftSpec)> = self
            .aircraft
            .iter()
            .enumerate()
            .map(|(i, a)| (format!("aircraft[{i}]"), a.clone()))
            .collect();
        for (i, s) in self.streams.iter().enumerate() {
            out.extend(s.expand().map(|a| (format!("streams[{i}]"), a)));
        }
        out
    }

    /// Network state at interval 0.
    pub fn initial_state(&self, graph: &SectorGraph) -> NetworkState {
        let mut state = NetworkState::new(graph);
        for (_, spec) in self.all_aircraft() {
            let a = Aircraft::new(AircraftId(spec.id), spec.route.iter().map(|&s| SectorId(s)).collect())
                .expect("validated aircraft");
            match spec.inject_at {
                Some(at) => state.schedule(graph, a, at),
                None => state.place(graph, a, spec.hop.unwrap_or(0)),
            }
            .expect("validated aircraft");
        }
        state
    }

    pub fn spectral_params(&self) -> SpectralParams {
        let d = SpectralParams::default();
        SpectralParams {
            alpha: self.metrics.alpha.unwrap_or(d.alpha),
            beta: self.metrics.beta.unwrap_or(d.beta),
            c_exp: self.metrics.c.unwrap_or(d.c_exp),
            sdos_factor: self.metrics.sdos_factor.unwrap_or(d.sdos_factor),
        }
    }

    pub fn weight_lost(&self) -> f64 {
        self.metrics.weight_lost.unwrap_or(DEFAULT_WEIGHT_LOST)
    }

    /// Same document without attacks.
    pub fn without_attacks(&self) -> Self {
        Self {
            attacks: Vec::new(),
            ..self.clone()
        }
    }
}

fn check_aircraft(path: &str, a: &AircraftSpec, graph: &SectorGraph) -> Result<(), ScenarioError> {
    if a.route.len() < 2 {
        return Err(invalid(format!("{path}.route"), "must list at least two sectors"));
    }
    let mut on_route = BTreeSet::new();
    for &s in &a.route {
        if !on_route.insert(s) {
            return Err(invalid(format!("{path}.route"), format!("sector {s} appears twice")));
        }
    }
    for w in a.route.windows(2) {
        let key = RouteKey::new(w[0], w[1]);
        if !graph.has_route(key) {
            return Err(invalid(
                format!("{path}.route"),
                format!("hop ({}, {}) is not a declared route", w[0], w[1]),
            ));
        }
    }
    if let Some(hop) = a.hop {
        if a.inject_at.is_some() {
            return Err(invalid(path, "set either hop or inject_at, not both"));
        }
        if hop + 1 >= a.route.len() {
            return Err(invalid(format!("{path}.hop"), format!("hop {hop} leaves no outflow")));
        }
    }
    Ok(())
}

fn attack_error(e: AttackError) -> ScenarioError {
    let path = match &e {
        AttackError::InvalidWindow { index, .. }
        | AttackError::UnknownSector { index, .. }
        | AttackError::UnknownRoute { index, .. } => format!("attacks[{index}]"),
        _ => "attacks".to_string(),
    };
    invalid(path, e.to_string())
}
