//! Discrete-time queue-network engine.
//!
//! Every directed route owns a FIFO queue at its source sector. Each interval
//! `t >= 1` runs one [`advance`]:
//!
//! 1. aircraft served at `t - 1` (and aircraft scheduled for injection at `t`)
//!    join the queue of their next outflow, ordered by aircraft id;
//! 2. ghosts injected at `t` join the back of their queue;
//! 3. each queue is served in ascending `(from, to)` order: a flushed sector
//!    forwards its whole queue, otherwise up to `mask * capacity` entries are
//!    taken from the front.
//!
//! Served aircraft reach the next queue one interval later. An aircraft served
//! on the last leg of its route is marked arrived at the service interval.
//! Interval 0 is the initial condition; no service happens there.
//!
//! Without ghosts or unmanaged aircraft, each route's backlog follows
//! [`step_backlog`] exactly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{self, AttackError, AttackKind, AttackScenario};
use crate::graph::{RouteKey, SectorGraph, SectorId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AircraftId(pub u32);

impl fmt::Display for AircraftId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("aircraft {0} is at its final sector")]
    RouteExhausted(AircraftId),
    #[error("aircraft {0}: route must list at least two sectors")]
    RouteTooShort(AircraftId),
    #[error("aircraft {aircraft}: sector {sector} repeats in route")]
    RepeatedSector { aircraft: AircraftId, sector: SectorId },
    #[error("aircraft {aircraft}: route hop {route} is not a declared route")]
    MissingHop { aircraft: AircraftId, route: RouteKey },
    #[error("aircraft {aircraft}: hop index {hop} is outside its route")]
    BadHop { aircraft: AircraftId, hop: usize },
    #[error("duplicate aircraft id {0}")]
    DuplicateAircraft(AircraftId),
    #[error("modifier references unknown route {0}")]
    UnknownRoute(RouteKey),
    #[error("modifier references unknown sector {0}")]
    UnknownSector(SectorId),
    #[error("inconsistent state: {0}")]
    InconsistentState(String),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("initial state must start at interval 0, found {0}")]
    NotInitial(u32),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Enters the queue of its first outflow at interval `at`.
    Scheduled {
        at: u32,
    },
    Queued,
    InTransit,
    Arrived {
        at: u32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aircraft {
    pub id: AircraftId,
    pub route: Vec<SectorId>,
    pub hop_index: usize,
    pub status: Status,
    /// False while an RST attack hides the aircraft from its controller.
    pub managed: bool,
}

impl Aircraft {
    pub fn new(id: AircraftId, route: Vec<SectorId>) -> Result<Self, EngineError> {
        if route.len() < 2 {
            return Err(EngineError::RouteTooShort(id));
        }
        let mut seen = BTreeSet::new();
        for &s in &route {
            if !seen.insert(s) {
                return Err(EngineError::RepeatedSector {
                    aircraft: id,
                    sector: s,
                });
            }
        }
        Ok(Self {
            id,
            route,
            hop_index: 0,
            status: Status::Queued,
            managed: true,
        })
    }

    pub fn current_sector(&self) -> SectorId {
        self.route[self.hop_index]
    }

    pub fn is_arrived(&self) -> bool {
        matches!(self.status, Status::Arrived { .. })
    }

    /// Route the aircraft leaves its current sector by.
    pub fn next_outflow(&self) -> Result<RouteKey, EngineError> {
        if self.hop_index + 1 >= self.route.len() {
            return Err(EngineError::RouteExhausted(self.id));
        }
        Ok(RouteKey {
            from: self.route[self.hop_index],
            to: self.route[self.hop_index + 1],
        })
    }

    /// Every consecutive pair in the route must be a declared route.
    pub fn check_route(&self, graph: &SectorGraph) -> Result<(), EngineError> {
        for w in self.route.windows(2) {
            let key = RouteKey { from: w[0], to: w[1] };
            if !graph.has_route(key) {
                return Err(EngineError::MissingHop {
                    aircraft: self.id,
                    route: key,
                });
            }
        }
        Ok(())
    }
}

/// Scalar backlog recurrence: `max(0, u + ghost + x_prev - mask * c)`.
pub fn step_backlog(x_prev: u32, u: u32, c: u32, capacity_mask: u32, ghost: u32) -> u32 {
    debug_assert!(capacity_mask <= 1);
    (u + ghost + x_prev).saturating_sub(capacity_mask * c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueueEntry {
    Aircraft(AircraftId),
    /// Non-existent aircraft shown to the controller, tagged with the id it
    /// was spoofed from.
    Ghost(AircraftId),
}

/// Per-interval effect of active attacks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepModifiers {
    /// Routes whose capacity mask is 0.
    pub blocked: BTreeSet<RouteKey>,
    /// Ghosts entering each route's queue this interval.
    pub ghosts: BTreeMap<RouteKey, Vec<AircraftId>>,
    /// Sectors whose queues are bypassed.
    pub flush: BTreeSet<SectorId>,
}

impl StepModifiers {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn is_identity(&self) -> bool {
        self.blocked.is_empty() && self.ghosts.is_empty() && self.flush.is_empty()
    }

    pub fn capacity_mask(&self, route: RouteKey) -> u32 {
        u32::from(!self.blocked.contains(&route))
    }

    pub fn ghost_increment(&self, route: RouteKey) -> u32 {
        self.ghosts.get(&route).map_or(0, |g| g.len() as u32)
    }

    pub fn flush_flag(&self, sector: SectorId) -> bool {
        self.flush.contains(&sector)
    }

    fn check(&self, graph: &SectorGraph) -> Result<(), EngineError> {
        for r in self.blocked.iter().chain(self.ghosts.keys()) {
            if !graph.has_route(*r) {
                return Err(EngineError::UnknownRoute(*r));
            }
        }
        for s in &self.flush {
            if !graph.contains_sector(*s) {
                return Err(EngineError::UnknownSector(*s));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Enter,
    Serve,
    Arrive,
    Flush,
    GhostEnter,
    GhostServe,
    GhostDrop,
    Unmanaged,
    Remanaged,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Enter => "enter",
            EventKind::Serve => "serve",
            EventKind::Arrive => "arrive",
            EventKind::Flush => "flush",
            EventKind::GhostEnter => "ghost_enter",
            EventKind::GhostServe => "ghost_serve",
            EventKind::GhostDrop => "ghost_drop",
            EventKind::Unmanaged => "unmanaged",
            EventKind::Remanaged => "remanaged",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceEvent {
    pub t: u32,
    pub kind: EventKind,
    pub route: RouteKey,
    pub aircraft: AircraftId,
}

/// Queues, aircraft and clock.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    clock: u32,
    pub(crate) aircraft: BTreeMap<AircraftId, Aircraft>,
    pub(crate) queues: BTreeMap<RouteKey, VecDeque<QueueEntry>>,
    in_transit: BTreeSet<AircraftId>,
    scheduled: BTreeMap<u32, BTreeSet<AircraftId>>,
}

impl NetworkState {
    /// Empty network at interval 0 with one queue per route.
    pub fn new(graph: &SectorGraph) -> Self {
        Self {
            clock: 0,
            aircraft: BTreeMap::new(),
            queues: graph.routes().map(|(k, _)| (k, VecDeque::new())).collect(),
            in_transit: BTreeSet::new(),
            scheduled: BTreeMap::new(),
        }
    }

    pub fn clock(&self) -> u32 {
        self.clock
    }

    pub fn aircraft(&self, id: AircraftId) -> Option<&Aircraft> {
        self.aircraft.get(&id)
    }

    pub fn all_aircraft(&self) -> impl Iterator<Item = &Aircraft> + '_ {
        self.aircraft.values()
    }

    pub fn queue(&self, route: RouteKey) -> Option<&VecDeque<QueueEntry>> {
        self.queues.get(&route)
    }

    pub fn backlog(&self, route: RouteKey) -> u32 {
        self.queues.get(&route).map_or(0, |q| q.len() as u32)
    }

    pub fn backlogs(&self) -> impl Iterator<Item = (RouteKey, u32)> + '_ {
        self.queues.iter().map(|(k, q)| (*k, q.len() as u32))
    }

    /// Aircraft currently sitting in a queue or in transit.
    pub fn in_network(&self) -> usize {
        self.aircraft
            .values()
            .filter(|a| matches!(a.status, Status::Queued | Status::InTransit))
            .count()
    }

    pub fn arrived(&self) -> usize {
        self.aircraft.values().filter(|a| a.is_arrived()).count()
    }

    fn insert(&mut self, graph: &SectorGraph, mut aircraft: Aircraft, hop: usize) -> Result<Aircraft, EngineError> {
        if self.aircraft.contains_key(&aircraft.id) {
            return Err(EngineError::DuplicateAircraft(aircraft.id));
        }
        aircraft.check_route(graph)?;
        if hop + 1 >= aircraft.route.len() {
            return Err(EngineError::BadHop {
                aircraft: aircraft.id,
                hop,
            });
        }
        aircraft.hop_index = hop;
        Ok(aircraft)
    }

    /// Puts an aircraft at the back of the queue for leg `hop` of its route.
    pub fn place(&mut self, graph: &SectorGraph, aircraft: Aircraft, hop: usize) -> Result<(), EngineError> {
        let mut aircraft = self.insert(graph, aircraft, hop)?;
        let key = aircraft.next_outflow()?;
        aircraft.status = Status::Queued;
        self.queues
            .entry(key)
            .or_default()
            .push_back(QueueEntry::Aircraft(aircraft.id));
        self.aircraft.insert(aircraft.id, aircraft);
        Ok(())
    }

    /// Schedules an aircraft to join its first queue at interval `at`.
    pub fn schedule(&mut self, graph: &SectorGraph, aircraft: Aircraft, at: u32) -> Result<(), EngineError> {
        if at <= self.clock {
            return self.place(graph, aircraft, 0);
        }
        let mut aircraft = self.insert(graph, aircraft, 0)?;
        aircraft.status = Status::Scheduled { at };
        self.scheduled.entry(at).or_default().insert(aircraft.id);
        self.aircraft.insert(aircraft.id, aircraft);
        Ok(())
    }

    fn check_consistency(&self) -> Result<(), EngineError> {
        let mut seen = BTreeSet::new();
        for q in self.queues.values() {
            for e in q {
                if let QueueEntry::Aircraft(id) = e {
                    if !seen.insert(*id) {
                        return Err(EngineError::InconsistentState(format!("aircraft {id} queued twice")));
                    }
                }
            }
        }
        for id in &self.in_transit {
            if !seen.insert(*id) {
                return Err(EngineError::InconsistentState(format!(
                    "aircraft {id} both queued and in transit"
                )));
            }
        }
        Ok(())
    }

    fn inject_ghosts(&mut self, modifiers: &StepModifiers, t: u32, events: &mut Vec<TraceEvent>) {
        for (route, tags) in &modifiers.ghosts {
            let q = self.queues.entry(*route).or_default();
            for tag in tags {
                q.push_back(QueueEntry::Ghost(*tag));
                events.push(TraceEvent {
                    t,
                    kind: EventKind::GhostEnter,
                    route: *route,
                    aircraft: *tag,
                });
            }
        }
    }

    /// Moves an aircraft one leg forward after it left `route` at `t`.
    fn depart(&mut self, id: AircraftId, route: RouteKey, t: u32, kind: EventKind, events: &mut Vec<TraceEvent>) {
        events.push(TraceEvent {
            t,
            kind,
            route,
            aircraft: id,
        });
        let a = self.aircraft.get_mut(&id).expect("queued aircraft is registered");
        a.hop_index += 1;
        if a.hop_index + 1 == a.route.len() {
            a.status = Status::Arrived { at: t };
            events.push(TraceEvent {
                t,
                kind: EventKind::Arrive,
                route,
                aircraft: id,
            });
        } else {
            a.status = Status::InTransit;
            self.in_transit.insert(id);
        }
    }
}

/// Result of one [`advance`].
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub state: NetworkState,
    pub events: Vec<TraceEvent>,
    /// Real aircraft that joined each route's queue this interval.
    pub inflow: BTreeMap<RouteKey, u32>,
    /// Queue entries removed from each route this interval.
    pub served: BTreeMap<RouteKey, u32>,
}

/// Runs one interval.
pub fn advance(
    mut state: NetworkState,
    graph: &SectorGraph,
    modifiers: &StepModifiers,
) -> Result<StepOutcome, EngineError> {
    modifiers.check(graph)?;
    state.check_consistency()?;
    let t = state.clock + 1;
    let mut events = Vec::new();

    let mut arrivals: BTreeMap<RouteKey, BTreeSet<AircraftId>> = BTreeMap::new();
    let transit = std::mem::take(&mut state.in_transit);
    let injected = state.scheduled.remove(&t).unwrap_or_default();
    for id in transit.into_iter().chain(injected) {
        let a = state
            .aircraft
            .get_mut(&id)
            .ok_or_else(|| EngineError::InconsistentState(format!("unregistered aircraft {id}")))?;
        let key = a.next_outflow()?;
        a.status = Status::Queued;
        arrivals.entry(key).or_default().insert(id);
    }

    let mut inflow = BTreeMap::new();
    for (route, ids) in &arrivals {
        let q = state.queues.entry(*route).or_default();
        for id in ids {
            q.push_back(QueueEntry::Aircraft(*id));
            events.push(TraceEvent {
                t,
                kind: EventKind::Enter,
                route: *route,
                aircraft: *id,
            });
        }
        inflow.insert(*route, ids.len() as u32);
    }
    state.inject_ghosts(modifiers, t, &mut events);

    let mut served = BTreeMap::new();
    let routes: Vec<RouteKey> = state.queues.keys().copied().collect();
    for route in routes {
        let queue = std::mem::take(state.queues.get_mut(&route).expect("route listed"));
        let mut kept = VecDeque::with_capacity(queue.len());
        let mut removed = 0u32;
        if modifiers.flush_flag(route.from) {
            for entry in queue {
                removed += 1;
                match entry {
                    QueueEntry::Aircraft(id) => state.depart(id, route, t, EventKind::Flush, &mut events),
                    QueueEntry::Ghost(tag) => events.push(TraceEvent {
                        t,
                        kind: EventKind::GhostDrop,
                        route,
                        aircraft: tag,
                    }),
                }
            }
        } else {
            let capacity = graph.route(route).map_or(0, |r| r.capacity);
            let mut slots = modifiers.capacity_mask(route) * capacity;
            for entry in queue {
                if slots == 0 {
                    kept.push_back(entry);
                    continue;
                }
                match entry {
                    QueueEntry::Ghost(tag) => {
                        slots -= 1;
                        removed += 1;
                        events.push(TraceEvent {
                            t,
                            kind: EventKind::GhostServe,
                            route,
                            aircraft: tag,
                        });
                    }
                    QueueEntry::Aircraft(id) if state.aircraft[&id].managed => {
                        slots -= 1;
                        removed += 1;
                        state.depart(id, route, t, EventKind::Serve, &mut events);
                    }
                    QueueEntry::Aircraft(_) => kept.push_back(entry),
                }
            }
        }
        served.insert(route, removed);
        *state.queues.get_mut(&route).expect("route listed") = kept;
    }

    state.clock = t;
    Ok(StepOutcome {
        state,
        events,
        inflow,
        served,
    })
}

/// One interval during which an attack was active.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackActivity {
    pub t: u32,
    pub attack: usize,
    pub label: String,
}

/// Full record of a run. Series are indexed by interval `0..=horizon`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub horizon: u32,
    pub backlogs: BTreeMap<RouteKey, Vec<u32>>,
    pub inflows: BTreeMap<RouteKey, Vec<u32>>,
    pub served: BTreeMap<RouteKey, Vec<u32>>,
    pub events: Vec<TraceEvent>,
    pub arrivals: BTreeMap<AircraftId, Option<u32>>,
    pub attack_log: Vec<AttackActivity>,
    pub warnings: Vec<String>,
}

impl SimulationTrace {
    pub fn backlog_series(&self, route: RouteKey) -> Option<&[u32]> {
        self.backlogs.get(&route).map(Vec::as_slice)
    }

    pub fn inflow_series(&self, route: RouteKey) -> Option<&[u32]> {
        self.inflows.get(&route).map(Vec::as_slice)
    }

    pub fn arrival(&self, id: AircraftId) -> Option<u32> {
        self.arrivals.get(&id).copied().flatten()
    }

    fn record(&mut self, state: &NetworkState, inflow: &BTreeMap<RouteKey, u32>, served: &BTreeMap<RouteKey, u32>) {
        for (route, x) in state.backlogs() {
            self.backlogs.entry(route).or_default().push(x);
            self.inflows
                .entry(route)
                .or_default()
                .push(inflow.get(&route).copied().unwrap_or(0));
            self.served
                .entry(route)
                .or_default()
                .push(served.get(&route).copied().unwrap_or(0));
        }
    }
}

/// Runs `horizon` intervals from `initial` under `attacks`.
pub fn simulate(
    graph: &SectorGraph,
    initial: NetworkState,
    attacks: &[AttackScenario],
    horizon: u32,
) -> Result<SimulationTrace, EngineError> {
    if horizon == 0 {
        return Err(EngineError::ZeroHorizon);
    }
    if initial.clock != 0 {
        return Err(EngineError::NotInitial(initial.clock));
    }
    let ids: BTreeSet<AircraftId> = initial.aircraft.keys().copied().collect();
    attack::validate_attacks(attacks, graph, &ids)?;

    let mut trace = SimulationTrace {
        horizon,
        backlogs: BTreeMap::new(),
        inflows: BTreeMap::new(),
        served: BTreeMap::new(),
        events: Vec::new(),
        arrivals: BTreeMap::new(),
        attack_log: Vec::new(),
        warnings: Vec::new(),
    };

    let mut state = initial;
    state.check_consistency()?;
    for t in 0..=horizon {
        for (idx, a) in attacks.iter().enumerate() {
            if a.is_active(t) {
                trace.attack_log.push(AttackActivity {
                    t,
                    attack: idx,
                    label: a.label(),
                });
            }
            if let AttackKind::Rst { .. } = a.kind {
                if a.is_active(t) || t == a.end + 1 {
                    let (next, events) = attack::rst_visibility_step(state, a, t)?;
                    state = next;
                    trace.events.extend(events);
                }
            }
        }
        let modifiers = attack::resolve_modifiers(attacks, t, graph)?;
        if t == 0 {
            state.inject_ghosts(&modifiers, 0, &mut trace.events);
            trace.record(&state, &BTreeMap::new(), &BTreeMap::new());
            continue;
        }
        let outcome = advance(state, graph, &modifiers)?;
        state = outcome.state;
        trace.events.extend(outcome.events);
        trace.record(&state, &outcome.inflow, &outcome.served);
    }

    let mut unarrived = 0;
    for a in state.aircraft.values() {
        let at = match a.status {
            Status::Arrived { at } => Some(at),
            _ => {
                unarrived += 1;
                None
            }
        };
        trace.arrivals.insert(a.id, at);
    }
    if unarrived > 0 {
        let msg = format!("horizon {horizon} too small: {unarrived} aircraft have not arrived");
        debug!("{msg}");
        trace.warnings.push(msg);
    }
    Ok(trace)
}
