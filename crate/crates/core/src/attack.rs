//! Attack scenarios and their translation into per-interval [`StepModifiers`].
//!
//! * complete RDOS: every outflow of the target sector has capacity mask 0;
//! * partial RDOS: a single route has capacity mask 0;
//! * RST: a ghost tagged with the target's id joins the ghost route's queue at
//!   window start, and the real aircraft is hidden from service until the
//!   window ends;
//! * SDOS: the target sector's queues are flushed downstream.
//!
//! Windows are inclusive on both ends. Several attacks active in the same
//! interval compose rule by rule.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{AircraftId, EventKind, NetworkState, QueueEntry, Status, StepModifiers, TraceEvent};
use crate::graph::{RouteKey, SectorGraph, SectorId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AttackError {
    #[error("attack {index}: window start {start} is after end {end}")]
    InvalidWindow { index: usize, start: u32, end: u32 },
    #[error("attack {index}: unknown sector {sector}")]
    UnknownSector { index: usize, sector: SectorId },
    #[error("attack {index}: unknown route {route}")]
    UnknownRoute { index: usize, route: RouteKey },
    #[error("unknown or already arrived aircraft {0}")]
    UnknownAircraft(AircraftId),
    #[error("interval {t}: route {route} is both RDOS-blocked and SDOS-flushed")]
    ConflictingAttack { t: u32, route: RouteKey },
    #[error("RST on aircraft {aircraft}: ghost route leaves sector {ghost_from} but the aircraft departs from sector {actual}")]
    RstSourceMismatch {
        aircraft: AircraftId,
        ghost_from: SectorId,
        actual: SectorId,
    },
    #[error("not an RST attack")]
    NotRst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AttackKind {
    CompleteRdos {
        sector: SectorId,
    },
    PartialRdos {
        from: SectorId,
        to: SectorId,
    },
    Rst {
        aircraft: AircraftId,
        ghost_from: SectorId,
        ghost_to: SectorId,
    },
    Sdos {
        sector: SectorId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackScenario {
    #[serde(flatten)]
    pub kind: AttackKind,
    pub start: u32,
    pub end: u32,
}

impl AttackScenario {
    pub fn new(kind: AttackKind, start: u32, end: u32) -> Self {
        Self { kind, start, end }
    }

    pub fn complete_rdos(sector: u32, start: u32, end: u32) -> Self {
        Self::new(
            AttackKind::CompleteRdos {
                sector: SectorId(sector),
            },
            start,
            end,
        )
    }

    pub fn partial_rdos(from: u32, to: u32, start: u32, end: u32) -> Self {
        Self::new(
            AttackKind::PartialRdos {
                from: SectorId(from),
                to: SectorId(to),
            },
            start,
            end,
        )
    }

    pub fn rst(aircraft: u32, ghost_from: u32, ghost_to: u32, start: u32, end: u32) -> Self {
        Self::new(
            AttackKind::Rst {
                aircraft: AircraftId(aircraft),
                ghost_from: SectorId(ghost_from),
                ghost_to: SectorId(ghost_to),
            },
            start,
            end,
        )
    }

    pub fn sdos(sector: u32, start: u32, end: u32) -> Self {
        Self::new(
            AttackKind::Sdos {
                sector: SectorId(sector),
            },
            start,
            end,
        )
    }

    pub fn is_active(&self, t: u32) -> bool {
        self.start <= t && t <= self.end
    }

    pub fn label(&self) -> String {
        match self.kind {
            AttackKind::CompleteRdos { sector } => format!("c-rdos sector {sector}"),
            AttackKind::PartialRdos { from, to } => format!("p-rdos route {from}-{to}"),
            AttackKind::Rst {
                aircraft,
                ghost_from,
                ghost_to,
            } => format!("rst aircraft {aircraft} ghost {ghost_from}-{ghost_to}"),
            AttackKind::Sdos { sector } => format!("sdos sector {sector}"),
        }
    }
}

/// Static checks: windows ordered, targets exist.
pub fn validate_attacks(
    attacks: &[AttackScenario],
    graph: &SectorGraph,
    aircraft: &BTreeSet<AircraftId>,
) -> Result<(), AttackError> {
    for (index, a) in attacks.iter().enumerate() {
        if a.start > a.end {
            return Err(AttackError::InvalidWindow {
                index,
                start: a.start,
                end: a.end,
            });
        }
        let sector_ok = |sector: SectorId| {
            if graph.contains_sector(sector) {
                Ok(())
            } else {
                Err(AttackError::UnknownSector { index, sector })
            }
        };
        let route_ok = |route: RouteKey| {
            if graph.has_route(route) {
                Ok(())
            } else {
                Err(AttackError::UnknownRoute { index, route })
            }
        };
        match a.kind {
            AttackKind::CompleteRdos { sector } | AttackKind::Sdos { sector } => sector_ok(sector)?,
            AttackKind::PartialRdos { from, to } => route_ok(RouteKey { from, to })?,
            AttackKind::Rst {
                aircraft: id,
                ghost_from,
                ghost_to,
            } => {
                if !aircraft.contains(&id) {
                    return Err(AttackError::UnknownAircraft(id));
                }
                route_ok(RouteKey {
                    from: ghost_from,
                    to: ghost_to,
                })?;
            }
        }
    }
    Ok(())
}

/// Modifiers in force at interval `t`.
pub fn resolve_modifiers(
    attacks: &[AttackScenario],
    t: u32,
    graph: &SectorGraph,
) -> Result<StepModifiers, AttackError> {
    let mut m = StepModifiers::identity();
    for a in attacks.iter().filter(|a| a.is_active(t)) {
        match a.kind {
            AttackKind::CompleteRdos { sector } => m.blocked.extend(graph.outflows(sector)),
            AttackKind::PartialRdos { from, to } => {
                m.blocked.insert(RouteKey { from, to });
            }
            AttackKind::Rst {
                aircraft,
                ghost_from,
                ghost_to,
            } => {
                // one ghost per attack, shown from the first interval on
                if t == a.start {
                    m.ghosts
                        .entry(RouteKey {
                            from: ghost_from,
                            to: ghost_to,
                        })
                        .or_default()
                        .push(aircraft);
                }
            }
            AttackKind::Sdos { sector } => {
                m.flush.insert(sector);
            }
        }
    }
    if let Some(route) = m.blocked.iter().find(|r| m.flush.contains(&r.from)) {
        return Err(AttackError::ConflictingAttack { t, route: *route });
    }
    Ok(m)
}

/// Hides the RST target from service while the attack is active and returns
/// it to the back of its queue on the first interval after the window.
pub fn apply_rst_visibility(state: NetworkState, attack: &AttackScenario, t: u32) -> Result<NetworkState, AttackError> {
    rst_visibility_step(state, attack, t).map(|(s, _)| s)
}

pub(crate) fn rst_visibility_step(
    mut state: NetworkState,
    attack: &AttackScenario,
    t: u32,
) -> Result<(NetworkState, Vec<TraceEvent>), AttackError> {
    let AttackKind::Rst {
        aircraft: id,
        ghost_from,
        ghost_to,
    } = attack.kind
    else {
        return Err(AttackError::NotRst);
    };
    let ghost_route = RouteKey {
        from: ghost_from,
        to: ghost_to,
    };
    let mut events = Vec::new();
    let Some(a) = state.aircraft.get_mut(&id) else {
        return Err(AttackError::UnknownAircraft(id));
    };

    if attack.is_active(t) {
        if t == attack.start {
            if a.is_arrived() {
                return Err(AttackError::UnknownAircraft(id));
            }
            if a.current_sector() != ghost_from {
                return Err(AttackError::RstSourceMismatch {
                    aircraft: id,
                    ghost_from,
                    actual: a.current_sector(),
                });
            }
        }
        if a.managed && !a.is_arrived() {
            a.managed = false;
            events.push(TraceEvent {
                t,
                kind: EventKind::Unmanaged,
                route: ghost_route,
                aircraft: id,
            });
        }
    } else if t == attack.end + 1 && !a.managed {
        a.managed = true;
        let status = a.status;
        let route = a.next_outflow().ok();
        if let (Status::Queued, Some(route)) = (status, route) {
            if let Some(q) = state.queues.get_mut(&route) {
                q.retain(|e| *e != QueueEntry::Aircraft(id));
                q.push_back(QueueEntry::Aircraft(id));
            }
        }
        events.push(TraceEvent {
            t,
            kind: EventKind::Remanaged,
            route: route.unwrap_or(ghost_route),
            aircraft: id,
        });
    }
    Ok((state, events))
}
