//! Mapping a series into a directed quantile-transition network.
//!
//! The value axis is divided into `q` equiprobable bins (empirical
//! quantiles, linear interpolation between closest ranks). Each
//! consecutive-sample transition between two different bins becomes a
//! directed edge. Transition counts are retained for export but the
//! metrics treat the graph as unweighted.

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use serde_json::json;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// Quantile bin boundaries for a fixed bin count.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSpec {
    pub q: usize,
    /// Strictly ascending cut points; duplicates from tied quantiles are
    /// collapsed, so there are at most q-1 of them.
    pub boundaries: Vec<f64>,
}

/// Directed, unweighted transition network over occupied bins.
///
/// Node ids are bin indices in `[0, q)`. Edges are ordered with
/// `BTreeMap` so iteration (and every export) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileNetwork {
    pub q: usize,
    pub nodes: Vec<usize>,
    /// edge -> observed transition count (>= 1).
    pub counts: BTreeMap<(usize, usize), u64>,
    /// bin -> value interval, filled when built from a series.
    pub bin_ranges: BTreeMap<usize, (f64, f64)>,
}

impl QuantileNetwork {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.counts.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.counts.keys().copied()
    }

    /// Graph JSON export.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .map(|&id| {
                let (lo, hi) = self
                    .bin_ranges
                    .get(&id)
                    .copied()
                    .unwrap_or((f64::NAN, f64::NAN));
                json!({"id": id, "lo": lo, "hi": hi})
            })
            .collect();
        let edges: Vec<_> = self
            .counts
            .iter()
            .map(|(&(src, dst), &count)| json!({"src": src, "dst": dst, "count": count}))
            .collect();
        json!({"q": self.q, "nodes": nodes, "edges": edges})
    }

    /// Parse a graph JSON produced by [`to_json`](Self::to_json).
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |msg: &str| Error::InvalidArgument(format!("graph json: {msg}"));
        let q = value["q"].as_u64().ok_or_else(|| bad("missing q"))? as usize;
        let mut nodes = Vec::new();
        let mut bin_ranges = BTreeMap::new();
        for node in value["nodes"].as_array().ok_or_else(|| bad("missing nodes"))? {
            let id = node["id"].as_u64().ok_or_else(|| bad("node without id"))? as usize;
            nodes.push(id);
            if let (Some(lo), Some(hi)) = (node["lo"].as_f64(), node["hi"].as_f64()) {
                bin_ranges.insert(id, (lo, hi));
            }
        }
        nodes.sort_unstable();
        let mut counts = BTreeMap::new();
        for edge in value["edges"].as_array().ok_or_else(|| bad("missing edges"))? {
            let src = edge["src"].as_u64().ok_or_else(|| bad("edge without src"))? as usize;
            let dst = edge["dst"].as_u64().ok_or_else(|| bad("edge without dst"))? as usize;
            let count = edge["count"].as_u64().unwrap_or(1);
            if !nodes.contains(&src) || !nodes.contains(&dst) {
                return Err(bad(&format!("edge {src}->{dst} references unlisted node")));
            }
            counts.insert((src, dst), count);
        }
        Ok(QuantileNetwork {
            q,
            nodes,
            counts,
            bin_ranges,
        })
    }

    /// Graphviz DOT export, one `src -> dst` line per edge.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph quantile_network {\n");
        for &id in &self.nodes {
            if let Some((lo, hi)) = self.bin_ranges.get(&id) {
                let _ = writeln!(out, "  {id} [label=\"q{id}[{lo},{hi})\"];");
            } else {
                let _ = writeln!(out, "  {id} [label=\"q{id}\"];");
            }
        }
        for (src, dst) in self.edges() {
            let _ = writeln!(out, "  {src} -> {dst};");
        }
        out.push_str("}\n");
        out
    }
}

/// Empirical quantile at probability k/q of pre-sorted data, linear
/// interpolation between closest ranks (position `(n-1)*k/q`, zero-based).
/// The position is split with integer arithmetic; computing it in floats
/// can land an exactly-integer position a ulp off and shift a value
/// across the adjacent bin, breaking equiprobability.
fn quantile_sorted(sorted: &[f64], k: usize, q: usize) -> f64 {
    let num = (sorted.len() - 1) * k;
    let lo = num / q;
    let rem = num % q;
    if rem == 0 {
        sorted[lo]
    } else {
        let frac = rem as f64 / q as f64;
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// Boundaries at the k/q empirical quantiles, k = 1..q-1. Coincident
/// boundaries (duplicate-heavy series) are collapsed.
pub fn quantile_bounds(s: &TimeSeries, q: usize) -> Result<QuantileSpec> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!(
            "quantile count must be >= 2, got {q}"
        )));
    }
    if s.len() < q {
        return Err(Error::SeriesTooShort {
            need: q,
            got: s.len(),
        });
    }
    let mut sorted = s.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite value in series"));
    let mut boundaries = Vec::with_capacity(q - 1);
    for k in 1..q {
        let b = quantile_sorted(&sorted, k, q);
        if boundaries.last() != Some(&b) {
            boundaries.push(b);
        }
    }
    Ok(QuantileSpec { q, boundaries })
}

/// Bin index of each sample. Values equal to a cut point go to the upper
/// bin; values outside the boundary range clamp to the first/last bin.
pub fn assign_symbols(s: &TimeSeries, spec: &QuantileSpec) -> Vec<usize> {
    s.values
        .iter()
        .map(|&v| spec.boundaries.partition_point(|&b| b <= v))
        .collect()
}

/// Build the transition network from a symbol sequence. Consecutive
/// equal symbols (self-loops) add no edge.
pub fn build_network(symbols: &[usize], q: usize) -> Result<QuantileNetwork> {
    if symbols.is_empty() {
        return Err(Error::EmptyInput("symbol sequence is empty".into()));
    }
    let mut occupied = vec![false; q];
    for &s in symbols {
        if s >= q {
            return Err(Error::InvalidArgument(format!(
                "symbol {s} out of range for q = {q}"
            )));
        }
        occupied[s] = true;
    }
    let mut counts = BTreeMap::new();
    for w in symbols.windows(2) {
        if w[0] != w[1] {
            *counts.entry((w[0], w[1])).or_insert(0u64) += 1;
        }
    }
    let nodes = (0..q).filter(|&i| occupied[i]).collect();
    Ok(QuantileNetwork {
        q,
        nodes,
        counts,
        bin_ranges: BTreeMap::new(),
    })
}

/// Series -> spec -> symbols -> network, with bin value ranges attached.
pub fn map_series(s: &TimeSeries, q: usize) -> Result<(QuantileSpec, QuantileNetwork)> {
    let spec = quantile_bounds(s, q)?;
    let symbols = assign_symbols(s, &spec);
    let mut net = build_network(&symbols, q)?;

    let lo = s.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for &id in &net.nodes {
        let left = if id == 0 { lo } else { spec.boundaries[id - 1] };
        let right = if id < spec.boundaries.len() {
            spec.boundaries[id]
        } else {
            hi
        };
        net.bin_ranges.insert(id, (left, right));
    }
    Ok((spec, net))
}
