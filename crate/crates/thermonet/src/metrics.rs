//! Centrality metrics on the directed unweighted transition network.
//!
//! Edge betweenness is the workhorse: for each edge, the sum over
//! ordered node pairs (s, t) of the fraction of directed shortest paths
//! from s to t that cross the edge. Computed with per-source BFS and
//! backward dependency accumulation (Brandes, edge variant). Sources are
//! processed in ascending node order and sums accumulated sequentially,
//! so results are bit-stable.
//!
//! Normalization divides by n(n-1), the number of ordered pairs among
//! the n occupied nodes, giving scores in [0, 1] that are comparable
//! across networks of different occupied size. This convention is the
//! one the default decision threshold (0.2) is calibrated against.

use crate::error::{Error, Result};
use crate::netmap::QuantileNetwork;
use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

/// Per-edge betweenness, raw and normalized.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeScoreTable {
    /// edge -> raw path-count sum.
    pub raw: BTreeMap<(usize, usize), f64>,
    /// edge -> raw / (n_nodes * (n_nodes - 1)).
    pub scores: BTreeMap<(usize, usize), f64>,
    pub n_nodes: usize,
}

impl EdgeScoreTable {
    pub fn max_score(&self) -> f64 {
        self.scores.values().cloned().fold(0.0, f64::max)
    }

    pub fn score_values(&self) -> Vec<f64> {
        self.scores.values().cloned().collect()
    }

    /// `src,dst,raw,score` CSV, scores at 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "src,dst,raw,score")?;
        for ((src, dst), raw) in &self.raw {
            let score = self.scores[&(*src, *dst)];
            writeln!(w, "{src},{dst},{raw:.11e},{score:.11e}")?;
        }
        Ok(())
    }
}

struct Adjacency {
    /// Compact index -> original node id.
    ids: Vec<usize>,
    /// Out-neighbors per compact index, ascending.
    out: Vec<Vec<usize>>,
}

fn adjacency(g: &QuantileNetwork) -> Adjacency {
    let ids = g.nodes.clone();
    let index: BTreeMap<usize, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut out = vec![Vec::new(); ids.len()];
    for (src, dst) in g.edges() {
        out[index[&src]].push(index[&dst]);
    }
    Adjacency { ids, out }
}

/// Edge betweenness centrality for every edge of `g`.
pub fn edge_betweenness(g: &QuantileNetwork) -> Result<EdgeScoreTable> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyInput("network has no edges".into()));
    }
    let adj = adjacency(g);
    let n = adj.ids.len();
    let mut raw_by_index: BTreeMap<(usize, usize), f64> = BTreeMap::new();

    for s in 0..n {
        let mut order = Vec::with_capacity(n);
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &adj.out[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        // Backward accumulation: the contribution of edge (v, w) from
        // source s is (sigma[v]/sigma[w]) * (1 + delta[w]).
        let mut delta = vec![0.0f64; n];
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                *raw_by_index.entry((v, w)).or_insert(0.0) += c;
                delta[v] += c;
            }
        }
    }

    let mut raw = BTreeMap::new();
    for (src, dst) in g.edges() {
        raw.insert((src, dst), 0.0);
    }
    for ((vi, wi), value) in raw_by_index {
        raw.insert((adj.ids[vi], adj.ids[wi]), value);
    }
    let norm = if n >= 2 { (n * (n - 1)) as f64 } else { 1.0 };
    let scores = raw.iter().map(|(&e, &r)| (e, r / norm)).collect();
    Ok(EdgeScoreTable {
        raw,
        scores,
        n_nodes: n,
    })
}

/// Node betweenness centrality (interior vertices of shortest paths),
/// normalized by (n-1)(n-2) for n >= 3, all zeros otherwise.
pub fn node_betweenness(g: &QuantileNetwork) -> BTreeMap<usize, f64> {
    let adj = adjacency(g);
    let n = adj.ids.len();
    let mut acc = vec![0.0f64; n];
    if n >= 3 {
        for s in 0..n {
            let mut order = Vec::with_capacity(n);
            let mut sigma = vec![0.0f64; n];
            let mut dist = vec![-1i64; n];
            let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
            sigma[s] = 1.0;
            dist[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &w in &adj.out[v] {
                    if dist[w] < 0 {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                    if dist[w] == dist[v] + 1 {
                        sigma[w] += sigma[v];
                        preds[w].push(v);
                    }
                }
            }
            let mut delta = vec![0.0f64; n];
            for &w in order.iter().rev() {
                for &v in &preds[w] {
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
                }
                if w != s {
                    acc[w] += delta[w];
                }
            }
        }
        let norm = ((n - 1) * (n - 2)) as f64;
        for a in &mut acc {
            *a /= norm;
        }
    }
    adj.ids.iter().enumerate().map(|(i, &id)| (id, acc[i])).collect()
}

/// Distinct in/out neighbor counts per occupied node.
pub fn degree_stats(g: &QuantileNetwork) -> BTreeMap<usize, (usize, usize)> {
    let mut stats: BTreeMap<usize, (usize, usize)> =
        g.nodes.iter().map(|&id| (id, (0, 0))).collect();
    for (src, dst) in g.edges() {
        stats.get_mut(&src).expect("edge endpoint occupied").1 += 1;
        stats.get_mut(&dst).expect("edge endpoint occupied").0 += 1;
    }
    stats
}

/// Empirical cumulative distribution function over a sample multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct Ecdf {
    pub sorted_values: Vec<f64>,
}

impl Ecdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("ecdf needs at least one value".into()));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite ecdf sample"));
        Ok(Ecdf {
            sorted_values: sorted,
        })
    }

    /// Fraction of samples <= x.
    pub fn evaluate(&self, x: f64) -> f64 {
        let count = self.sorted_values.partition_point(|&v| v <= x);
        count as f64 / self.sorted_values.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_values.is_empty()
    }

    /// `value,cumfrac` CSV over the sample points.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "value,cumfrac")?;
        let n = self.sorted_values.len() as f64;
        let mut i = 0;
        while i < self.sorted_values.len() {
            let v = self.sorted_values[i];
            let mut j = i + 1;
            while j < self.sorted_values.len() && self.sorted_values[j] == v {
                j += 1;
            }
            writeln!(w, "{v},{}", j as f64 / n)?;
            i = j;
        }
        Ok(())
    }
}

/// ECDF of a sample list.
pub fn ecdf(values: &[f64]) -> Result<Ecdf> {
    Ecdf::new(values)
}
