//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library except to build inputs.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::Rng;
use sectorflow::SectorGraph;

pub fn scenarios_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

pub fn bundled_scenarios() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

/// Prints one result line for an acceptance criterion and returns `ok`.
pub fn report(criterion: &str, ok: bool, detail: &str) -> bool {
    println!("{} {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// x(t) = max(0, u(t) + x(t-1) - mask(t) * c), x(0) = x0.
pub fn backlog_oracle(
    x0: i64,
    c: i64,
    u: impl Fn(u32) -> i64,
    blocked: impl Fn(u32) -> bool,
    horizon: u32,
) -> Vec<i64> {
    let mut out = vec![x0];
    let mut x = x0;
    for t in 1..=horizon {
        let mask = if blocked(t) { 0 } else { 1 };
        x = (u(t) + x - mask * c).max(0);
        out.push(x);
    }
    out
}

/// Undirected edge list over sectors `1..=n`.
#[derive(Debug, Clone)]
pub struct Edges {
    pub n: u32,
    pub edges: Vec<(u32, u32)>,
}

impl Edges {
    pub fn graph(&self, flow: f64) -> SectorGraph {
        SectorGraph::undirected(1..=self.n, &self.edges, 1, flow).unwrap()
    }

    pub fn adjacent(&self, a: u32, b: u32) -> bool {
        self.edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a))
    }

    pub fn connected(&self) -> bool {
        let mut seen = BTreeSet::from([1u32]);
        let mut stack = vec![1u32];
        while let Some(v) = stack.pop() {
            for w in 1..=self.n {
                if self.adjacent(v, w) && seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.n as usize
    }

    pub fn laplacian(&self) -> Vec<Vec<f64>> {
        let n = self.n as usize;
        let mut l = vec![vec![0.0; n]; n];
        for &(a, b) in &self.edges {
            let (i, j) = (a as usize - 1, b as usize - 1);
            l[i][j] -= 1.0;
            l[j][i] -= 1.0;
            l[i][i] += 1.0;
            l[j][j] += 1.0;
        }
        l
    }

    /// Longest shortest path, by Floyd-Warshall.
    pub fn diameter(&self) -> usize {
        let n = self.n as usize;
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(a, b) in &self.edges {
            d[a as usize - 1][b as usize - 1] = 1;
            d[b as usize - 1][a as usize - 1] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d.iter().flatten().copied().max().unwrap()
    }
}

/// Every labelled graph on `n` sectors that is connected.
pub fn all_connected(n: u32) -> Vec<Edges> {
    let pairs: Vec<(u32, u32)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let edges = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| *p)
            .collect();
        let g = Edges { n, edges };
        if g.connected() {
            out.push(g);
        }
    }
    out
}

/// Random connected graph: a random spanning tree plus extra edges with
/// probability `p`.
pub fn random_connected(rng: &mut StdRng, n: u32, p: f64) -> Edges {
    let mut edges = Vec::new();
    for v in 2..=n {
        let parent = rng.gen_range(1..v);
        edges.push((parent, v));
    }
    for a in 1..=n {
        for b in a + 1..=n {
            if !edges.contains(&(a, b)) && !edges.contains(&(b, a)) && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Edges { n, edges }
}

/// Cyclic Jacobi rotation eigen-solver for a small symmetric matrix.
/// Returns eigenvalues ascending with matching unit eigenvectors.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> Vec<(f64, Vec<f64>)> {
    let n = a.len();
    let mut a = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    a[p][k] = c * rp[k] - s * rq[k];
                    a[q][k] = s * rp[k] + c * rq[k];
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| (a[i][i], v.iter().map(|row| row[i]).collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// Simple-path counts per unordered pair, indexed by length - 1, found by
/// trying every vertex sequence of each length.
pub fn brute_pair_paths(
    sectors: &[u32],
    adjacent: impl Fn(u32, u32) -> bool,
    max_n: usize,
) -> BTreeMap<(u32, u32), Vec<u64>> {
    let mut out: BTreeMap<(u32, u32), Vec<u64>> = BTreeMap::new();
    for &a in sectors {
        for &b in sectors {
            if a < b {
                out.insert((a, b), vec![0; max_n]);
            }
        }
    }
    let m = sectors.len();
    for len in 1..=max_n {
        let k = len + 1;
        let mut idx = vec![0usize; k];
        loop {
            let seq: Vec<u32> = idx.iter().map(|&i| sectors[i]).collect();
            let distinct = seq.iter().collect::<BTreeSet<_>>().len() == k;
            if distinct && seq.windows(2).all(|w| adjacent(w[0], w[1])) && seq[0] < seq[k - 1] {
                out.get_mut(&(seq[0], seq[k - 1])).unwrap()[len - 1] += 1;
            }
            if !next_sequence(&mut idx, m) {
                break;
            }
        }
    }
    out
}

/// Advances `idx` as a base-`m` counter; false once it wraps.
fn next_sequence(idx: &mut [usize], m: usize) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < m {
            return true;
        }
        *d = 0;
    }
    false
}

/// Expected (default, lost, reduced) for a shutdown that removes sector
/// `removed` (if any) and the undirected edge `cut` (if any).
pub fn census_oracle(
    g: &Edges,
    removed: Option<u32>,
    cut: Option<(u32, u32)>,
    max_n: usize,
) -> (Vec<u64>, Vec<u64>, Vec<u64>) {
    let all: Vec<u32> = (1..=g.n).collect();
    let before = brute_pair_paths(&all, |a, b| g.adjacent(a, b), max_n);
    let kept: Vec<u32> = all.iter().copied().filter(|s| Some(*s) != removed).collect();
    let after = brute_pair_paths(
        &kept,
        |a, b| g.adjacent(a, b) && cut.is_none_or(|(x, y)| (a, b) != (x, y) && (a, b) != (y, x)),
        max_n,
    );
    let mut default = vec![0; max_n];
    let mut lost = vec![0; max_n];
    let mut reduced = vec![0; max_n];
    for (&(i, j), counts) in &before {
        for n in 0..max_n {
            default[n] += counts[n];
        }
        if Some(i) == removed || Some(j) == removed {
            continue;
        }
        for n in 0..max_n {
            let alpha = counts[n];
            let beta = after[&(i, j)][n];
            if alpha > 0 && beta == 0 {
                lost[n] += alpha;
            } else if beta > 0 && beta < alpha {
                reduced[n] += alpha - beta;
            }
        }
    }
    (default, lost, reduced)
}
