//! Command-line front end for the full pipeline.
//!
//! Exit codes: 0 success, 2 usage/contract error, 3 data error,
//! 4 internal invariant failure.

use clap::{Args, Parser, Subcommand};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thermonet::error::{Error, Result};
use thermonet::ingest::{self, Roi};
use thermonet::netmap::QuantileNetwork;
use thermonet::pipeline::{self, PipelineConfig};
use thermonet::preprocess;
use thermonet::series::{Stage, TimeSeries};
use thermonet::synth::{self, RegimeKind, RegimeParams};
use thermonet::{classify, metrics};

const NORMALIZATION_NOTE: &str = "Edge betweenness scores are normalized by n(n-1) over the \
occupied node count (ordered pairs), so they lie in [0,1]. The default decision threshold 0.2 \
is stated in that convention; rescale it if you compare against another normalization.";

#[derive(Parser)]
#[command(
    name = "thermonet",
    version,
    about = "Quantile-transition network analysis of frame-sequence time series",
    after_help = NORMALIZATION_NOTE
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce a frame-sequence manifest to a scalar time-series CSV.
    Reduce(ReduceArgs),
    /// Baseline, detrend, normalize, and pool raw series CSVs.
    Preprocess(PreprocessArgs),
    /// Map a pooled series CSV to a quantile-transition graph JSON.
    Netmap(NetmapArgs),
    /// Compute centrality metrics for a graph JSON.
    Metrics(MetricsArgs),
    /// Apply the threshold rule to a graph's edge-betweenness scores.
    Classify(ClassifyArgs),
    /// Full chain: raw series CSVs -> graph + metrics + ECDF + verdict.
    Pipeline(PipelineArgs),
    /// Generate synthetic series or frame sequences.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Compare two edge-score ECDF CSVs (KS statistic and overlay data).
    Compare(CompareArgs),
    /// Convert a graph JSON to Graphviz DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct ReduceArgs {
    /// Manifest JSON listing frames, geometry, and fps.
    #[arg(long)]
    manifest: PathBuf,
    /// Region of interest as x0,y0,w,h. Whole frame when omitted.
    #[arg(long)]
    roi: Option<String>,
    /// mean | pc1
    #[arg(long, default_value = "mean")]
    reducer: String,
    /// Number of variance fractions to report with pc1.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Output time-series CSV.
    #[arg(long)]
    out: PathBuf,
    /// Variance-report JSON (pc1 only).
    #[arg(long)]
    variance_out: Option<PathBuf>,
}

#[derive(Args)]
struct PreprocessArgs {
    /// Raw series CSVs, pooled in the given order.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Pooled (normalized, concatenated) series CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NetmapArgs {
    /// Pooled series CSV.
    #[arg(long)]
    input: PathBuf,
    /// Quantile count (number of equiprobable bins).
    #[arg(long, default_value_t = 20)]
    q: usize,
    /// Graph JSON output.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Graph JSON.
    #[arg(long)]
    graph: PathBuf,
    /// Per-edge betweenness CSV (src,dst,raw,score).
    #[arg(long)]
    edge_csv: PathBuf,
    /// ECDF CSV of normalized edge scores (value,cumfrac).
    #[arg(long)]
    ecdf_csv: Option<PathBuf>,
    /// Also print node betweenness and degrees to stdout.
    #[arg(long)]
    nodes: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Graph JSON.
    #[arg(long)]
    graph: PathBuf,
    /// Decision threshold on normalized (ordered-pairs) scores.
    #[arg(long, default_value_t = 0.2)]
    theta: f64,
    /// Verdict JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Raw series CSVs (one per clip), pooled in order.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Quantile count.
    #[arg(long, default_value_t = 20)]
    q: usize,
    /// Decision threshold (normalized by ordered pairs, n(n-1)).
    #[arg(long, default_value_t = 0.2)]
    theta: f64,
    /// Directory for graph.json, metrics.csv, ecdf.csv, verdict.json.
    #[arg(long)]
    output_dir: PathBuf,
    /// Also write per-stage intermediate CSVs.
    #[arg(long)]
    keep_intermediates: bool,
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Generate one regime series as a CSV.
    Series(SynthSeriesArgs),
    /// Generate a rank-one-plus-noise PGM frame sequence with manifest.
    Video(SynthVideoArgs),
}

#[derive(Args)]
struct SynthSeriesArgs {
    /// smooth | jumpy
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// AR coefficient, |phi| < 1.
    #[arg(long, default_value_t = 0.9)]
    phi: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Per-step jump probability (jumpy only).
    #[arg(long, default_value_t = 0.05)]
    jump_prob: f64,
    /// Jump magnitude in units of sigma (jumpy only).
    #[arg(long, default_value_t = 8.0)]
    jump_scale: f64,
    /// RNG seed; falls back to THERMONET_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthVideoArgs {
    #[arg(long, default_value_t = 135)]
    frames: usize,
    #[arg(long, default_value_t = 9.0)]
    fps: f64,
    #[arg(long, default_value_t = 32)]
    width: u32,
    #[arg(long, default_value_t = 24)]
    height: u32,
    /// smooth | jumpy driving signal.
    #[arg(long, default_value = "smooth")]
    kind: String,
    #[arg(long, default_value_t = 0.9)]
    phi: f64,
    #[arg(long, default_value_t = 20.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    jump_prob: f64,
    #[arg(long, default_value_t = 8.0)]
    jump_scale: f64,
    /// Per-pixel Gaussian noise scale in counts.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Base intensity level in counts.
    #[arg(long, default_value_t = 20000.0)]
    base: f64,
    /// RNG seed; falls back to THERMONET_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for frame PGMs and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// ECDF CSV of group A.
    #[arg(long)]
    group_a: PathBuf,
    /// ECDF CSV of group B.
    #[arg(long)]
    group_b: PathBuf,
    /// Comparison JSON output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Merged overlay CSV (value,cumfrac_a,cumfrac_b) for plotting.
    #[arg(long)]
    plot_csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    /// Graph JSON.
    #[arg(long)]
    graph: PathBuf,
    /// DOT output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Reduce(args) => cmd_reduce(args),
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Netmap(args) => cmd_netmap(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Pipeline(args) => cmd_pipeline(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Compare(args) => cmd_compare(args),
        Command::ExportDot(args) => cmd_export_dot(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {}: {err}", err.code());
        std::process::exit(err.exit_code());
    }
}

fn seed_or_env(seed: Option<u64>) -> u64 {
    seed.or_else(|| {
        std::env::var("THERMONET_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}

fn write_json(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable value");
    match path {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn read_graph(path: &Path) -> Result<QuantileNetwork> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    QuantileNetwork::from_json(&value)
}

fn cmd_reduce(args: ReduceArgs) -> Result<()> {
    let seq = ingest::load_frames(&args.manifest)?;
    let seq = match &args.roi {
        Some(spec) => ingest::crop(&seq, spec.parse::<Roi>()?)?,
        None => seq,
    };
    match args.reducer.as_str() {
        "mean" => {
            let series = ingest::mean_series(&seq)?;
            series.write_csv_file(&args.out)
        }
        "pc1" => {
            let (series, report) = ingest::pc1_series(&seq, args.k)?;
            series.write_csv_file(&args.out)?;
            let report_json = serde_json::json!({ "explained": report.explained });
            write_json(args.variance_out.as_deref(), &report_json)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown reducer `{other}` (expected mean|pc1)"
        ))),
    }
}

fn cmd_preprocess(args: PreprocessArgs) -> Result<()> {
    let prepared: Vec<TimeSeries> = args
        .input
        .iter()
        .map(|path| {
            let raw = TimeSeries::read_csv_file(path, Stage::RawMean)?;
            preprocess::prepare(&raw)
        })
        .collect::<Result<_>>()?;
    let pooled = preprocess::pool(&prepared)?;
    pooled.write_csv_file(&args.out)
}

fn cmd_netmap(args: NetmapArgs) -> Result<()> {
    let pooled = TimeSeries::read_csv_file(&args.input, Stage::Pooled)?;
    let (_, network) = thermonet::netmap::map_series(&pooled, args.q)?;
    write_json(Some(&args.out), &network.to_json())
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let graph = read_graph(&args.graph)?;
    let table = metrics::edge_betweenness(&graph)?;
    let file = std::fs::File::create(&args.edge_csv).map_err(|e| Error::Io {
        path: args.edge_csv.clone(),
        source: e,
    })?;
    table
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::Io {
            path: args.edge_csv.clone(),
            source: e,
        })?;
    if let Some(path) = &args.ecdf_csv {
        let distribution = metrics::ecdf(&table.score_values())?;
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        distribution
            .write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            })?;
    }
    if args.nodes {
        let nb = metrics::node_betweenness(&graph);
        let degrees = metrics::degree_stats(&graph);
        println!("node,betweenness,in_degree,out_degree");
        for (node, score) in nb {
            let (ind, outd) = degrees[&node];
            println!("{node},{score:.11e},{ind},{outd}");
        }
    }
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let graph = read_graph(&args.graph)?;
    let table = metrics::edge_betweenness(&graph)?;
    let verdict = classify::classify(&table, args.theta)?;
    let value = serde_json::to_value(&verdict).expect("serializable verdict");
    write_json(args.out.as_deref(), &value)
}

fn cmd_pipeline(args: PipelineArgs) -> Result<()> {
    std::fs::create_dir_all(&args.output_dir).map_err(|e| Error::Io {
        path: args.output_dir.clone(),
        source: e,
    })?;
    let result = run_pipeline(&args);
    if result.is_err() {
        // Remove partial outputs so a failed run leaves nothing behind.
        for name in [
            "graph.json",
            "metrics.csv",
            "ecdf.csv",
            "verdict.json",
            "pooled.csv",
        ] {
            let _ = std::fs::remove_file(args.output_dir.join(name));
        }
    }
    result
}

fn run_pipeline(args: &PipelineArgs) -> Result<()> {
    let config = PipelineConfig {
        q: args.q,
        theta: args.theta,
    };
    let raw: Vec<TimeSeries> = args
        .input
        .iter()
        .map(|path| TimeSeries::read_csv_file(path, Stage::RawMean))
        .collect::<Result<_>>()?;

    if args.keep_intermediates {
        for (path, series) in args.input.iter().zip(&raw) {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy();
            let based = preprocess::baseline(series)?;
            let (detrended, _) = preprocess::detrend_linear(&based)?;
            let scale = preprocess::normalization_scale(&based, &detrended);
            let normalized = preprocess::normalize(&detrended, scale)?;
            based.write_csv_file(&args.output_dir.join(format!("{stem}.baselined.csv")))?;
            detrended.write_csv_file(&args.output_dir.join(format!("{stem}.detrended.csv")))?;
            normalized.write_csv_file(&args.output_dir.join(format!("{stem}.normalized.csv")))?;
        }
    }

    let out = pipeline::run(&raw, &config)?;

    if args.keep_intermediates {
        out.pooled
            .write_csv_file(&args.output_dir.join("pooled.csv"))?;
    }
    write_json(
        Some(&args.output_dir.join("graph.json")),
        &out.network.to_json(),
    )?;

    let metrics_path = args.output_dir.join("metrics.csv");
    let file = std::fs::File::create(&metrics_path).map_err(|e| Error::Io {
        path: metrics_path.clone(),
        source: e,
    })?;
    out.scores
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::Io {
            path: metrics_path,
            source: e,
        })?;

    let ecdf_path = args.output_dir.join("ecdf.csv");
    let file = std::fs::File::create(&ecdf_path).map_err(|e| Error::Io {
        path: ecdf_path.clone(),
        source: e,
    })?;
    out.ecdf
        .write_csv(std::io::BufWriter::new(file))
        .map_err(|e| Error::Io {
            path: ecdf_path,
            source: e,
        })?;

    let verdict_value = serde_json::to_value(&out.verdict).expect("serializable verdict");
    write_json(Some(&args.output_dir.join("verdict.json")), &verdict_value)?;
    println!(
        "verdict: {} (max normalized score {:.6}, theta {}, {} normalization)",
        out.verdict.label, out.verdict.max_score, out.verdict.theta, out.verdict.normalization
    );
    Ok(())
}

fn cmd_synth(command: SynthCommand) -> Result<()> {
    match command {
        SynthCommand::Series(args) => {
            let params = RegimeParams {
                kind: args.kind.parse::<RegimeKind>()?,
                n: args.n,
                phi: args.phi,
                sigma: args.sigma,
                jump_prob: args.jump_prob,
                jump_scale: args.jump_scale,
                seed: seed_or_env(args.seed),
            };
            let series = synth::gen_series(&params)?;
            series.write_csv_file(&args.out)
        }
        SynthCommand::Video(args) => {
            let params = RegimeParams {
                kind: args.kind.parse::<RegimeKind>()?,
                n: args.frames,
                phi: args.phi,
                sigma: args.sigma,
                jump_prob: args.jump_prob,
                jump_scale: args.jump_scale,
                seed: seed_or_env(args.seed),
            };
            let signal = synth::gen_series(&params)?;
            let seq = synth::gen_video(
                args.frames,
                args.width,
                args.height,
                params.seed,
                &signal,
                args.noise_sigma,
                args.base,
                args.fps,
            )?;
            std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::Io {
                path: args.out_dir.clone(),
                source: e,
            })?;
            let mut frame_names = Vec::with_capacity(seq.len());
            for (i, frame) in seq.frames.iter().enumerate() {
                let name = format!("frame{i:05}.pgm");
                ingest::write_pgm16(&args.out_dir.join(&name), frame)?;
                frame_names.push(name);
            }
            let manifest = serde_json::json!({
                "fps": args.fps,
                "width": args.width,
                "height": args.height,
                "format": "pgm16",
                "frames": frame_names,
            });
            write_json(Some(&args.out_dir.join("manifest.json")), &manifest)
        }
    }
}

/// Step function read back from an ECDF CSV (`value,cumfrac` rows).
struct EcdfSteps {
    points: Vec<(f64, f64)>,
}

impl EcdfSteps {
    fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut points = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let mut field = |what: &str| -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::CsvParse {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        reason: format!("missing {what}"),
                    })?
                    .trim()
                    .parse()
                    .map_err(|e| Error::CsvParse {
                        path: path.to_path_buf(),
                        line: lineno + 1,
                        reason: format!("bad {what}: {e}"),
                    })
            };
            let value = field("value")?;
            let cumfrac = field("cumfrac")?;
            points.push((value, cumfrac));
        }
        if points.is_empty() {
            return Err(Error::EmptyInput(format!(
                "{}: no ECDF rows",
                path.display()
            )));
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite ecdf values"));
        Ok(EcdfSteps { points })
    }

    fn evaluate(&self, x: f64) -> f64 {
        let idx = self.points.partition_point(|&(v, _)| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.points[idx - 1].1
        }
    }

    fn max_value(&self) -> f64 {
        self.points.last().expect("non-empty").0
    }
}

fn cmd_compare(args: CompareArgs) -> Result<()> {
    let a = EcdfSteps::read(&args.group_a)?;
    let b = EcdfSteps::read(&args.group_b)?;
    let mut merged: Vec<f64> = a
        .points
        .iter()
        .chain(&b.points)
        .map(|&(v, _)| v)
        .collect();
    merged.sort_by(|x, y| x.partial_cmp(y).expect("finite values"));
    merged.dedup();
    let ks = merged
        .iter()
        .map(|&x| (a.evaluate(x) - b.evaluate(x)).abs())
        .fold(0.0f64, f64::max);
    let comparison = serde_json::json!({
        "ks_statistic": ks,
        "theta_gap": a.max_value() - b.max_value(),
    });
    write_json(args.out.as_deref(), &comparison)?;
    if let Some(path) = &args.plot_csv {
        let file = std::fs::File::create(path).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
        let mut w = std::io::BufWriter::new(file);
        let inner = (|| -> std::io::Result<()> {
            writeln!(w, "value,cumfrac_a,cumfrac_b")?;
            for &x in &merged {
                writeln!(w, "{x},{},{}", a.evaluate(x), b.evaluate(x))?;
            }
            Ok(())
        })();
        inner.map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}

fn cmd_export_dot(args: ExportDotArgs) -> Result<()> {
    let graph = read_graph(&args.graph)?;
    let dot = graph.to_dot();
    match &args.out {
        Some(path) => std::fs::write(path, dot).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}
