//! thermonet: frame sequences -> scalar time series -> directed
//! quantile-transition networks -> edge betweenness -> threshold verdict.
//!
//! The pipeline reduces each video frame to a scalar (mean pixel or
//! first principal component), detrends and pools the resulting series,
//! maps the pooled series onto a directed network whose nodes are
//! equiprobable value bins, and classifies the source process by the
//! cumulative distribution of normalized edge betweenness centrality.
//!
//! Edge betweenness is normalized by n(n-1) over the occupied node
//! count, so scores lie in [0, 1]; the default decision threshold (0.2)
//! is stated in that convention.

// Validation deliberately uses `!(x > 0.0)` so NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod netmap;
pub mod pipeline;
pub mod preprocess;
pub mod series;
pub mod synth;

pub use classify::{classify, compare_groups, GroupComparison, Verdict};
pub use error::{Error, Result};
pub use ingest::{crop, load_frames, mean_series, pc1_series, Frame, FrameSequence, Roi};
pub use metrics::{degree_stats, ecdf, edge_betweenness, node_betweenness, Ecdf, EdgeScoreTable};
pub use netmap::{assign_symbols, build_network, map_series, quantile_bounds, QuantileNetwork, QuantileSpec};
pub use pipeline::{run, run_pooled, PipelineConfig, PipelineOutput};
pub use preprocess::{baseline, detrend_linear, normalize, pool, prepare, DetrendReport};
pub use series::{Stage, TimeSeries};
pub use synth::{gen_series, gen_video, RegimeKind, RegimeParams};
