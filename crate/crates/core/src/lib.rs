//! Discrete-time simulation of air-traffic sector flows as a dynamic queuing
//! network, with injectable ADS-B attack models and two graph-level
//! vulnerability metrics.
//!
//! * [`graph`]: sector/route graph, Laplacian, simple-path counting.
//! * [`engine`]: backlog evolution, FIFO service, traces.
//! * [`attack`]: RDOS, RST and SDOS attack semantics.
//! * [`spectral`]: Fiedler-vector vulnerability and its attack variants.
//! * [`paths`]: lost/reduced path metric and ranking comparison.
//! * [`scenario`], [`output`], [`cli`]: file formats and entry points.

pub mod attack;
pub mod cli;
pub mod engine;
pub mod graph;
pub mod output;
pub mod paths;
pub mod scenario;
pub mod spectral;

pub use attack::{AttackKind, AttackScenario};
pub use engine::{simulate, Aircraft, AircraftId, NetworkState, SimulationTrace, StepModifiers};
pub use graph::{Route, RouteKey, SectorGraph, SectorId};
pub use paths::{PathParams, Shutdown};
pub use scenario::{parse_scenario, ScenarioDocument};
pub use spectral::SpectralParams;
