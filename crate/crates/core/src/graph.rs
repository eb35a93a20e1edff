//! Sector/route graph model.
//!
//! Sectors are nodes, routes are directed edges carrying a service capacity
//! (aircraft per interval) and a nominal flow density. A bidirectional route
//! is stored as two directed routes sharing the same capacity and flow.
//!
//! Every matrix or CSV produced from a graph uses ascending sector id as the
//! index order.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sector identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SectorId(pub u32);

impl fmt::Display for SectorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Directed route key `(from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouteKey {
    pub from: SectorId,
    pub to: SectorId,
}

impl RouteKey {
    pub fn new(from: u32, to: u32) -> Self {
        Self {
            from: SectorId(from),
            to: SectorId(to),
        }
    }

    pub fn reversed(self) -> Self {
        Self {
            from: self.to,
            to: self.from,
        }
    }
}

impl fmt::Display for RouteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.from, self.to)
    }
}

/// Per-route attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Route {
    /// Aircraft served per interval.
    pub capacity: u32,
    /// Nominal aircraft per interval.
    pub flow: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("unknown sector {0}")]
    UnknownSector(SectorId),
    #[error("unknown route {0}")]
    UnknownRoute(RouteKey),
    #[error("self-loop route at sector {0}")]
    SelfLoop(SectorId),
    #[error("duplicate route {0}")]
    DuplicateRoute(RouteKey),
    #[error("invalid flow density {flow} on route {route}")]
    InvalidFlow { route: RouteKey, flow: f64 },
    #[error("graph is disconnected: sectors {0} and {1} are not reachable from each other")]
    DisconnectedGraph(SectorId, SectorId),
    #[error("graph has no sectors")]
    Empty,
}

/// Directed sector graph.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SectorGraph {
    sectors: BTreeSet<SectorId>,
    routes: BTreeMap<RouteKey, Route>,
}

impl SectorGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a graph where every `(a, b)` pair becomes a bidirectional route
    /// with the given capacity and flow.
    pub fn undirected(
        sectors: impl IntoIterator<Item = u32>,
        edges: &[(u32, u32)],
        capacity: u32,
        flow: f64,
    ) -> Result<Self, GraphError> {
        let mut g = Self::new();
        for s in sectors {
            g.add_sector(SectorId(s));
        }
        for &(a, b) in edges {
            g.add_bidirectional(SectorId(a), SectorId(b), Route { capacity, flow })?;
        }
        Ok(g)
    }

    pub fn add_sector(&mut self, id: SectorId) -> bool {
        self.sectors.insert(id)
    }

    pub fn add_route(&mut self, from: SectorId, to: SectorId, route: Route) -> Result<(), GraphError> {
        let key = RouteKey { from, to };
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        for s in [from, to] {
            if !self.sectors.contains(&s) {
                return Err(GraphError::UnknownSector(s));
            }
        }
        if !(route.flow.is_finite() && route.flow >= 0.0) {
            return Err(GraphError::InvalidFlow {
                route: key,
                flow: route.flow,
            });
        }
        if self.routes.contains_key(&key) {
            return Err(GraphError::DuplicateRoute(key));
        }
        self.routes.insert(key, route);
        Ok(())
    }

    pub fn add_bidirectional(&mut self, a: SectorId, b: SectorId, route: Route) -> Result<(), GraphError> {
        self.add_route(a, b, route)?;
        self.add_route(b, a, route)
    }

    pub fn sectors(&self) -> impl Iterator<Item = SectorId> + '_ {
        self.sectors.iter().copied()
    }

    pub fn sector_count(&self) -> usize {
        self.sectors.len()
    }

    pub fn contains_sector(&self, id: SectorId) -> bool {
        self.sectors.contains(&id)
    }

    pub fn routes(&self) -> impl Iterator<Item = (RouteKey, &Route)> + '_ {
        self.routes.iter().map(|(k, r)| (*k, r))
    }

    pub fn route_count(&self) -> usize {
        self.routes.len()
    }

    pub fn route(&self, key: RouteKey) -> Option<&Route> {
        self.routes.get(&key)
    }

    pub fn route_mut(&mut self, key: RouteKey) -> Option<&mut Route> {
        self.routes.get_mut(&key)
    }

    pub fn has_route(&self, key: RouteKey) -> bool {
        self.routes.contains_key(&key)
    }

    /// Routes leaving `sector`, ascending by destination.
    pub fn outflows(&self, sector: SectorId) -> impl Iterator<Item = RouteKey> + '_ {
        let lo = RouteKey {
            from: sector,
            to: SectorId(0),
        };
        let hi = RouteKey {
            from: sector,
            to: SectorId(u32::MAX),
        };
        self.routes.range(lo..=hi).map(|(k, _)| *k)
    }

    /// Neighbours ignoring route direction.
    pub fn undirected_neighbors(&self, sector: SectorId) -> BTreeSet<SectorId> {
        self.routes
            .keys()
            .filter_map(|k| {
                if k.from == sector {
                    Some(k.to)
                } else if k.to == sector {
                    Some(k.from)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Undirected adjacency lists in ascending sector order.
    pub fn undirected_adjacency(&self) -> BTreeMap<SectorId, Vec<SectorId>> {
        let mut adj: BTreeMap<SectorId, BTreeSet<SectorId>> =
            self.sectors.iter().map(|s| (*s, BTreeSet::new())).collect();
        for k in self.routes.keys() {
            adj.entry(k.from).or_default().insert(k.to);
            adj.entry(k.to).or_default().insert(k.from);
        }
        adj.into_iter().map(|(s, n)| (s, n.into_iter().collect())).collect()
    }

    /// Index of each sector in matrix order.
    pub fn index_of(&self) -> BTreeMap<SectorId, usize> {
        self.sectors.iter().enumerate().map(|(i, s)| (*s, i)).collect()
    }

    /// Pure copy with `k` and all incident routes removed.
    pub fn remove_sector(&self, k: SectorId) -> Result<SectorGraph, GraphError> {
        if !self.sectors.contains(&k) {
            return Err(GraphError::UnknownSector(k));
        }
        let mut out = self.clone();
        out.sectors.remove(&k);
        out.routes.retain(|key, _| key.from != k && key.to != k);
        Ok(out)
    }

    /// Pure copy without route `(i, j)`; the reverse direction is removed too
    /// when present.
    pub fn remove_route(&self, i: SectorId, j: SectorId) -> Result<SectorGraph, GraphError> {
        let key = RouteKey { from: i, to: j };
        if !self.routes.contains_key(&key) {
            return Err(GraphError::UnknownRoute(key));
        }
        let mut out = self.clone();
        out.routes.remove(&key);
        out.routes.remove(&key.reversed());
        Ok(out)
    }

    /// Hop distances from `start` treating routes as undirected.
    fn bfs(&self, adj: &BTreeMap<SectorId, Vec<SectorId>>, start: SectorId) -> BTreeMap<SectorId, usize> {
        let mut dist = BTreeMap::new();
        dist.insert(start, 0usize);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            for &w in &adj[&u] {
                if let Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Ok when every sector is reachable from every other ignoring direction.
    pub fn check_connected(&self) -> Result<(), GraphError> {
        let Some(&first) = self.sectors.iter().next() else {
            return Err(GraphError::Empty);
        };
        let adj = self.undirected_adjacency();
        let dist = self.bfs(&adj, first);
        match self.sectors.iter().find(|s| !dist.contains_key(s)) {
            Some(&missing) => Err(GraphError::DisconnectedGraph(first, missing)),
            None => Ok(()),
        }
    }

    pub fn is_connected(&self) -> bool {
        self.check_connected().is_ok()
    }

    /// Longest shortest-path hop count over all sector pairs, routes treated
    /// as undirected.
    pub fn diameter(&self) -> Result<usize, GraphError> {
        if self.sectors.is_empty() {
            return Err(GraphError::Empty);
        }
        let adj = self.undirected_adjacency();
        let mut best = 0;
        for &s in &self.sectors {
            let dist = self.bfs(&adj, s);
            if let Some(&missing) = self.sectors.iter().find(|t| !dist.contains_key(t)) {
                return Err(GraphError::DisconnectedGraph(s, missing));
            }
            best = best.max(dist.values().copied().max().unwrap_or(0));
        }
        Ok(best)
    }

    /// Graph Laplacian over ascending sector order.
    ///
    /// Off-diagonal `L[i][j]` is -1 when a route `i -> j` exists; the diagonal
    /// makes each row sum to zero. With `symmetrize`, a route in either
    /// direction marks both `(i, j)` and `(j, i)`.
    pub fn laplacian(&self, symmetrize: bool) -> LaplacianMatrix {
        let order: Vec<SectorId> = self.sectors.iter().copied().collect();
        let index = self.index_of();
        let n = order.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for k in self.routes.keys() {
            let (i, j) = (index[&k.from], index[&k.to]);
            m[(i, j)] = -1.0;
            if symmetrize {
                m[(j, i)] = -1.0;
            }
        }
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
            m[(i, i)] = -off;
        }
        LaplacianMatrix { order, matrix: m }
    }

    /// Number of simple paths with exactly `n` edges between `i` and `j`,
    /// routes treated as undirected.
    pub fn count_simple_paths(&self, i: SectorId, j: SectorId, n: usize) -> u64 {
        if i == j || n == 0 || !self.contains_sector(i) || !self.contains_sector(j) {
            return 0;
        }
        let adj = self.undirected_adjacency();
        simple_path_counts_from(&adj, i, n)
            .get(&j)
            .and_then(|c| c.get(n - 1).copied())
            .unwrap_or(0)
    }
}

/// Dense Laplacian with its sector ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    pub order: Vec<SectorId>,
    pub matrix: DMatrix<f64>,
}

impl LaplacianMatrix {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.matrix == self.matrix.transpose()
    }
}

/// Counts simple paths starting at `start` with 1..=`max_len` edges.
///
/// Result maps each reachable endpoint to a vector whose `n - 1` entry is the
/// number of paths with exactly `n` edges.
pub fn simple_path_counts_from(
    adj: &BTreeMap<SectorId, Vec<SectorId>>,
    start: SectorId,
    max_len: usize,
) -> BTreeMap<SectorId, Vec<u64>> {
    fn dfs(
        adj: &BTreeMap<SectorId, Vec<SectorId>>,
        at: SectorId,
        depth: usize,
        max_len: usize,
        on_path: &mut BTreeSet<SectorId>,
        out: &mut BTreeMap<SectorId, Vec<u64>>,
    ) {
        if depth == max_len {
            return;
        }
        let Some(next) = adj.get(&at) else { return };
        for &w in next {
            if on_path.contains(&w) {
                continue;
            }
            out.entry(w).or_insert_with(|| vec![0; max_len])[depth] += 1;
            on_path.insert(w);
            dfs(adj, w, depth + 1, max_len, on_path, out);
            on_path.remove(&w);
        }
    }

    let mut out = BTreeMap::new();
    if max_len == 0 || !adj.contains_key(&start) {
        return out;
    }
    let mut on_path = BTreeSet::from([start]);
    dfs(adj, start, 0, max_len, &mut on_path, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> SectorGraph {
        SectorGraph::undirected([1, 2, 3], &[(1, 2), (2, 3), (3, 1)], 1, 2.0).unwrap()
    }

    fn path3() -> SectorGraph {
        SectorGraph::undirected([1, 2, 3], &[(1, 2), (2, 3)], 1, 2.0).unwrap()
    }

    fn rows(l: &LaplacianMatrix) -> Vec<Vec<f64>> {
        l.matrix.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    #[test]
    fn laplacian_small_cases() {
        let k2 = SectorGraph::undirected([1, 2], &[(1, 2)], 1, 1.0).unwrap();
        assert_eq!(rows(&k2.laplacian(false)), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(
            rows(&path3().laplacian(false)),
            vec![vec![1.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 1.0]]
        );

        let mut directed = SectorGraph::new();
        directed.add_sector(SectorId(1));
        directed.add_sector(SectorId(2));
        directed
            .add_route(SectorId(1), SectorId(2), Route { capacity: 1, flow: 1.0 })
            .unwrap();
        assert_eq!(rows(&directed.laplacian(false)), vec![vec![1.0, -1.0], vec![0.0, 0.0]]);
        assert_eq!(rows(&directed.laplacian(true)), vec![vec![1.0, -1.0], vec![-1.0, 1.0]]);
    }

    #[test]
    fn rejects_malformed_routes() {
        let mut g = SectorGraph::new();
        g.add_sector(SectorId(1));
        g.add_sector(SectorId(2));
        let r = Route { capacity: 1, flow: 1.0 };
        assert_eq!(
            g.add_route(SectorId(1), SectorId(1), r),
            Err(GraphError::SelfLoop(SectorId(1)))
        );
        assert_eq!(
            g.add_route(SectorId(1), SectorId(5), r),
            Err(GraphError::UnknownSector(SectorId(5)))
        );
        g.add_route(SectorId(1), SectorId(2), r).unwrap();
        assert!(matches!(
            g.add_route(SectorId(1), SectorId(2), r),
            Err(GraphError::DuplicateRoute(_))
        ));
        let bad = Route {
            capacity: 1,
            flow: -1.0,
        };
        assert!(matches!(
            g.add_route(SectorId(2), SectorId(1), bad),
            Err(GraphError::InvalidFlow { .. })
        ));
    }

    #[test]
    fn diameter_cases() {
        assert_eq!(path3().diameter(), Ok(2));
        assert_eq!(triangle().diameter(), Ok(1));
        let single = SectorGraph::undirected([4], &[], 1, 1.0).unwrap();
        assert_eq!(single.diameter(), Ok(0));
        let split = SectorGraph::undirected([1, 2, 3], &[(1, 2)], 1, 1.0).unwrap();
        assert!(matches!(split.diameter(), Err(GraphError::DisconnectedGraph(..))));
    }

    #[test]
    fn simple_path_counts() {
        let t = triangle();
        assert_eq!(t.count_simple_paths(SectorId(1), SectorId(3), 1), 1);
        assert_eq!(t.count_simple_paths(SectorId(1), SectorId(3), 2), 1);
        assert_eq!(t.count_simple_paths(SectorId(1), SectorId(3), 3), 0);
        assert_eq!(path3().count_simple_paths(SectorId(1), SectorId(3), 1), 0);
        assert_eq!(path3().count_simple_paths(SectorId(1), SectorId(3), 2), 1);
        assert_eq!(path3().count_simple_paths(SectorId(1), SectorId(9), 2), 0);
    }

    #[test]
    fn remove_sector_cases() {
        let g = path3().remove_sector(SectorId(2)).unwrap();
        assert_eq!(g.sectors().collect::<Vec<_>>(), vec![SectorId(1), SectorId(3)]);
        assert_eq!(g.route_count(), 0);

        let g = triangle().remove_sector(SectorId(3)).unwrap();
        let expected = SectorGraph::undirected([1, 2], &[(1, 2)], 1, 2.0).unwrap();
        assert_eq!(g, expected);

        assert_eq!(
            triangle().remove_sector(SectorId(9)),
            Err(GraphError::UnknownSector(SectorId(9)))
        );
    }

    #[test]
    fn remove_route_cases() {
        let t = triangle();
        let g = t.remove_route(SectorId(1), SectorId(2)).unwrap();
        let expected = SectorGraph::undirected([1, 2, 3], &[(1, 3), (3, 2)], 1, 2.0).unwrap();
        assert_eq!(g, expected);
        // input untouched
        assert_eq!(t.route_count(), 6);

        let k2 = SectorGraph::undirected([1, 2], &[(1, 2)], 1, 2.0).unwrap();
        let g = k2.remove_route(SectorId(1), SectorId(2)).unwrap();
        assert_eq!(g.route_count(), 0);
        assert_eq!(g.sector_count(), 2);

        assert_eq!(
            path3().remove_route(SectorId(1), SectorId(3)),
            Err(GraphError::UnknownRoute(RouteKey::new(1, 3)))
        );
    }

    #[test]
    fn outflows_are_ordered() {
        let g = SectorGraph::undirected([1, 2, 3, 4], &[(2, 4), (2, 1), (2, 3)], 1, 1.0).unwrap();
        let outs: Vec<_> = g.outflows(SectorId(2)).collect();
        assert_eq!(
            outs,
            vec![RouteKey::new(2, 1), RouteKey::new(2, 3), RouteKey::new(2, 4)]
        );
    }
}
