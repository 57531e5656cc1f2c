//! End-to-end composition: series -> preprocess -> network -> metrics -> verdict.

use crate::classify::{classify, Verdict};
use crate::error::Result;
use crate::metrics::{ecdf, edge_betweenness, Ecdf, EdgeScoreTable};
use crate::netmap::{map_series, QuantileNetwork, QuantileSpec};
use crate::preprocess::{pool, prepare};
use crate::series::TimeSeries;

/// Defaults follow the published method: 20 quantiles, cut-off 0.2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub q: usize,
    pub theta: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig { q: 20, theta: 0.2 }
    }
}

/// Everything the pipeline produces for one pooled group.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub pooled: TimeSeries,
    pub spec: QuantileSpec,
    pub network: QuantileNetwork,
    pub scores: EdgeScoreTable,
    pub ecdf: Ecdf,
    pub verdict: Verdict,
}

/// Run the full chain on raw (raw-mean or pc1 stage) input series:
/// baseline -> detrend -> normalize each, pool, map to a network,
/// score edges, and classify.
pub fn run(series: &[TimeSeries], config: &PipelineConfig) -> Result<PipelineOutput> {
    let prepared: Vec<TimeSeries> = series.iter().map(prepare).collect::<Result<_>>()?;
    let pooled = pool(&prepared)?;
    run_pooled(pooled, config)
}

/// Same as [`run`] but starting from an already pooled series.
pub fn run_pooled(pooled: TimeSeries, config: &PipelineConfig) -> Result<PipelineOutput> {
    let (spec, network) = map_series(&pooled, config.q)?;
    let scores = edge_betweenness(&network)?;
    let distribution = ecdf(&scores.score_values())?;
    let verdict = classify(&scores, config.theta)?;
    Ok(PipelineOutput {
        pooled,
        spec,
        network,
        scores,
        ecdf: distribution,
        verdict,
    })
}
