//! Baseline shift, linear detrending, normalization, and pooling.
//!
//! Series are detrended individually before pooling; detrending the
//! pooled series instead would stitch the per-clip trends into a
//! pseudo-periodic artifact.

use crate::error::{Error, Result};
use crate::series::{Stage, TimeSeries};

/// Least-squares fit removed by [`detrend_linear`]. Slope is per sample
/// index, not per second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetrendReport {
    pub slope: f64,
    pub intercept: f64,
    pub residual_mean: f64,
}

/// Shift the series so it starts at zero: `x[t] - x[0]`.
pub fn baseline(s: &TimeSeries) -> Result<TimeSeries> {
    if s.stage != Stage::RawMean && s.stage != Stage::Pc1 {
        return Err(Error::InvalidArgument(format!(
            "baseline expects a raw-mean or pc1 series, got stage {}",
            s.stage
        )));
    }
    let x0 = s.values[0];
    let values = s.values.iter().map(|v| v - x0).collect();
    TimeSeries::new(values, s.dt, s.label.clone(), Stage::Baselined)
}

/// Remove the ordinary-least-squares line fit over sample index 0..n-1.
pub fn detrend_linear(s: &TimeSeries) -> Result<(TimeSeries, DetrendReport)> {
    let n = s.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { need: 2, got: n });
    }
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let y_mean = s.values.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (i, &y) in s.values.iter().enumerate() {
        let dt = i as f64 - t_mean;
        sxx += dt * dt;
        sxy += dt * (y - y_mean);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = y_mean - slope * t_mean;
    let residuals: Vec<f64> = s
        .values
        .iter()
        .enumerate()
        .map(|(i, &y)| y - (slope * i as f64 + intercept))
        .collect();
    let residual_mean = residuals.iter().sum::<f64>() / nf;
    let out = TimeSeries::new(residuals, s.dt, s.label.clone(), Stage::Detrended)?;
    Ok((
        out,
        DetrendReport {
            slope,
            intercept,
            residual_mean,
        },
    ))
}

/// Divide every value by `scale`.
pub fn normalize(s: &TimeSeries, scale: f64) -> Result<TimeSeries> {
    if s.stage != Stage::Detrended {
        return Err(Error::InvalidArgument(format!(
            "normalize expects a detrended series, got stage {}",
            s.stage
        )));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "normalization scale must be a positive finite real, got {scale}"
        )));
    }
    let values = s.values.iter().map(|v| v / scale).collect();
    TimeSeries::new(values, s.dt, s.label.clone(), Stage::Normalized)
}

/// Amplitude scale the pipeline driver passes to [`normalize`]: the mean
/// absolute value of the pre-detrend (baselined) series when that is
/// meaningfully nonzero, falling back to the residual standard deviation,
/// then to 1. The choice only rescales the plot axis; the downstream
/// quantile network is invariant to it.
pub fn normalization_scale(baselined: &TimeSeries, detrended: &TimeSeries) -> f64 {
    let mean_abs =
        baselined.values.iter().map(|v| v.abs()).sum::<f64>() / baselined.len() as f64;
    if mean_abs > 1e-12 {
        return mean_abs;
    }
    let n = detrended.len() as f64;
    let sd = (detrended.values.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    if sd > 1e-12 {
        sd
    } else {
        1.0
    }
}

/// Concatenate normalized series in order. All inputs must share dt.
pub fn pool(series: &[TimeSeries]) -> Result<TimeSeries> {
    if series.is_empty() {
        return Err(Error::EmptyInput("pool needs at least one series".into()));
    }
    let dt = series[0].dt;
    let mut values = Vec::with_capacity(series.iter().map(TimeSeries::len).sum());
    let mut labels = Vec::with_capacity(series.len());
    for s in series {
        if s.stage != Stage::Normalized {
            return Err(Error::InvalidArgument(format!(
                "pool expects normalized series, `{}` has stage {}",
                s.label, s.stage
            )));
        }
        if s.dt != dt {
            return Err(Error::InvalidArgument(format!(
                "pool: mixed dt ({} vs {}) in `{}`",
                dt, s.dt, s.label
            )));
        }
        values.extend_from_slice(&s.values);
        labels.push(s.label.as_str());
    }
    TimeSeries::new(values, dt, labels.join("+"), Stage::Pooled)
}

/// Full per-series chain: baseline -> detrend -> normalize.
pub fn prepare(s: &TimeSeries) -> Result<TimeSeries> {
    let based = baseline(s)?;
    let (detrended, _) = detrend_linear(&based)?;
    let scale = normalization_scale(&based, &detrended);
    normalize(&detrended, scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(values: Vec<f64>, stage: Stage) -> TimeSeries {
        TimeSeries::new(values, 1.0, "t", stage).unwrap()
    }

    #[test]
    fn baseline_definition() {
        let out = baseline(&ts(vec![10.0, 12.0, 11.0], Stage::RawMean)).unwrap();
        assert_eq!(out.values, vec![0.0, 2.0, 1.0]);
        assert_eq!(out.stage, Stage::Baselined);
    }

    #[test]
    fn baseline_constant_and_singleton() {
        assert_eq!(
            baseline(&ts(vec![3.0, 3.0, 3.0], Stage::Pc1)).unwrap().values,
            vec![0.0, 0.0, 0.0]
        );
        assert_eq!(
            baseline(&ts(vec![5.0], Stage::RawMean)).unwrap().values,
            vec![0.0]
        );
    }

    #[test]
    fn detrend_exact_line() {
        let (res, fit) = detrend_linear(&ts(vec![1.0, 3.0, 5.0, 7.0], Stage::Baselined)).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        for r in &res.values {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn detrend_hand_computed_case() {
        // OLS on [0,2,1,3]: Sxx = 5, Sxy = 4 -> slope 0.8, intercept 0.3.
        let (res, fit) = detrend_linear(&ts(vec![0.0, 2.0, 1.0, 3.0], Stage::Baselined)).unwrap();
        assert!((fit.slope - 0.8).abs() < 1e-12);
        assert!((fit.intercept - 0.3).abs() < 1e-12);
        let expect = [-0.3, 0.9, -0.9, 0.3];
        for (r, e) in res.values.iter().zip(expect) {
            assert!((r - e).abs() < 1e-12, "{r} vs {e}");
        }
    }

    #[test]
    fn detrend_constant_series() {
        let (res, fit) = detrend_linear(&ts(vec![4.0; 5], Stage::Baselined)).unwrap();
        assert_eq!(fit.slope, 0.0);
        for r in &res.values {
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn detrend_rejects_short_series() {
        assert!(detrend_linear(&ts(vec![1.0], Stage::Baselined)).is_err());
    }

    #[test]
    fn normalize_definition_and_errors() {
        let s = ts(vec![-1.0, 1.0], Stage::Detrended);
        assert_eq!(normalize(&s, 2.0).unwrap().values, vec![-0.5, 0.5]);
        assert!(normalize(&s, 0.0).is_err());
        assert!(normalize(&s, -1.0).is_err());
        assert!(normalize(&s, f64::NAN).is_err());
        assert!(normalize(&ts(vec![1.0], Stage::RawMean), 1.0).is_err());
    }

    #[test]
    fn pool_concatenates_in_order() {
        let a = ts(vec![1.0, 2.0, 3.0], Stage::Normalized);
        let b = ts(vec![4.0, 5.0, 6.0, 7.0], Stage::Normalized);
        let p = pool(&[a, b]).unwrap();
        assert_eq!(p.len(), 7);
        assert_eq!(p.values, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(p.stage, Stage::Pooled);
        assert_eq!(p.label, "t+t");
    }

    #[test]
    fn pool_single_series_identity() {
        let a = ts(vec![1.0, 2.0], Stage::Normalized);
        let p = pool(std::slice::from_ref(&a)).unwrap();
        assert_eq!(p.values, a.values);
        assert_eq!(p.stage, Stage::Pooled);
    }

    #[test]
    fn pool_rejects_mixed_dt_and_wrong_stage() {
        let a = ts(vec![1.0], Stage::Normalized);
        let mut b = ts(vec![2.0], Stage::Normalized);
        b.dt = 0.5;
        assert!(pool(&[a.clone(), b]).is_err());
        assert!(pool(&[]).is_err());
        assert!(pool(&[ts(vec![1.0], Stage::Detrended)]).is_err());
    }

    #[test]
    fn baseline_then_detrend_matches_detrend_alone() {
        let raw = ts(vec![10.0, 11.5, 9.0, 13.0, 12.2], Stage::RawMean);
        let (direct, _) = detrend_linear(&ts(raw.values.clone(), Stage::Baselined)).unwrap();
        let (via_baseline, _) = detrend_linear(&baseline(&raw).unwrap()).unwrap();
        for (a, b) in direct.values.iter().zip(&via_baseline.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn detrend_residuals_orthogonal_to_trend(
            values in proptest::collection::vec(-1e3f64..1e3, 2..200)
        ) {
            let n = values.len();
            let max_abs = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let tol = 1e-9 * n as f64 * (max_abs + 1.0);
            let (res, _) = detrend_linear(&ts(values, Stage::Baselined)).unwrap();
            let sum: f64 = res.values.iter().sum();
            let tsum: f64 = res.values.iter().enumerate().map(|(i, r)| i as f64 * r).sum();
            prop_assert!(sum.abs() <= tol, "residual sum {sum} > {tol}");
            prop_assert!(tsum.abs() <= tol * n as f64, "t-weighted sum {tsum}");
        }

        #[test]
        fn detrend_is_idempotent(
            values in proptest::collection::vec(-1e3f64..1e3, 2..100)
        ) {
            let (res, _) = detrend_linear(&ts(values, Stage::Baselined)).unwrap();
            let (_, fit2) = detrend_linear(&ts(res.values.clone(), Stage::Baselined)).unwrap();
            prop_assert!(fit2.slope.abs() < 1e-9);
            prop_assert!(fit2.intercept.abs() < 1e-6);
        }

        #[test]
        fn pool_preserves_values(
            chunks in proptest::collection::vec(
                proptest::collection::vec(-10f64..10.0, 1..20), 1..6)
        ) {
            let series: Vec<TimeSeries> =
                chunks.iter().cloned().map(|c| ts(c, Stage::Normalized)).collect();
            let p = pool(&series).unwrap();
            let flat: Vec<f64> = chunks.into_iter().flatten().collect();
            prop_assert_eq!(p.values, flat);
        }
    }
}
