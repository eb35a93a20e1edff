//! CSV emission for traces, rankings and diffs.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use csv::Writer;

use crate::engine::SimulationTrace;

pub const BACKLOGS_CSV: &str = "backlogs.csv";
pub const ARRIVALS_CSV: &str = "arrivals.csv";
pub const EVENTS_CSV: &str = "events.csv";

fn finish(w: Writer<Vec<u8>>) -> io::Result<String> {
    let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}

/// Renders rows under `header` as CSV text.
pub fn render<R, S>(header: &[&str], rows: R) -> io::Result<String>
where
    R: IntoIterator<Item = Vec<S>>,
    S: AsRef<str>,
{
    let mut w = Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(AsRef::as_ref))?;
    }
    finish(w)
}

/// `t,from_sector,to_sector,backlog`, sorted by `t` then route.
pub fn backlogs_csv(trace: &SimulationTrace) -> io::Result<String> {
    let len = trace.backlogs.values().map(Vec::len).max().unwrap_or(0);
    let rows = (0..len).flat_map(|t| {
        trace.backlogs.iter().map(move |(route, series)| {
            vec![
                t.to_string(),
                route.from.to_string(),
                route.to.to_string(),
                series[t].to_string(),
            ]
        })
    });
    render(&["t", "from_sector", "to_sector", "backlog"], rows)
}

/// `aircraft_id,arrival_t`; unarrived aircraft leave `arrival_t` empty.
pub fn arrivals_csv(trace: &SimulationTrace) -> io::Result<String> {
    let rows = trace
        .arrivals
        .iter()
        .map(|(id, at)| vec![id.to_string(), at.map(|t| t.to_string()).unwrap_or_default()]);
    render(&["aircraft_id", "arrival_t"], rows)
}

/// `t,event,route,aircraft_id` in simulation order.
pub fn events_csv(trace: &SimulationTrace) -> io::Result<String> {
    let rows = trace.events.iter().map(|e| {
        vec![
            e.t.to_string(),
            e.kind.as_str().to_string(),
            e.route.to_string(),
            e.aircraft.to_string(),
        ]
    });
    render(&["t", "event", "route", "aircraft_id"], rows)
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

/// Writes the three trace files into `dir`.
pub fn write_trace_csv(trace: &SimulationTrace, dir: &Path) -> io::Result<Vec<PathBuf>> {
    Ok(vec![
        write_file(dir, BACKLOGS_CSV, &backlogs_csv(trace)?)?,
        write_file(dir, ARRIVALS_CSV, &arrivals_csv(trace)?)?,
        write_file(dir, EVENTS_CSV, &events_csv(trace)?)?,
    ])
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::engine::AircraftId;
    use crate::graph::RouteKey;

    fn empty() -> SimulationTrace {
        SimulationTrace {
            horizon: 1,
            backlogs: BTreeMap::new(),
            inflows: BTreeMap::new(),
            served: BTreeMap::new(),
            events: Vec::new(),
            arrivals: BTreeMap::new(),
            attack_log: Vec::new(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn empty_trace_has_headers_only() {
        let t = empty();
        assert_eq!(backlogs_csv(&t).unwrap(), "t,from_sector,to_sector,backlog\n");
        assert_eq!(arrivals_csv(&t).unwrap(), "aircraft_id,arrival_t\n");
        assert_eq!(events_csv(&t).unwrap(), "t,event,route,aircraft_id\n");
    }

    #[test]
    fn backlog_rows_in_order() {
        let mut t = empty();
        t.backlogs.insert(RouteKey::new(1, 2), vec![2, 1]);
        assert_eq!(
            backlogs_csv(&t).unwrap(),
            "t,from_sector,to_sector,backlog\n0,1,2,2\n1,1,2,1\n"
        );
    }

    #[test]
    fn unarrived_aircraft_blank() {
        let mut t = empty();
        t.arrivals.insert(AircraftId(1), Some(4));
        t.arrivals.insert(AircraftId(2), None);
        assert_eq!(arrivals_csv(&t).unwrap(), "aircraft_id,arrival_t\n1,4\n2,\n");
    }
}
