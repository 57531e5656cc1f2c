//! Threshold verdicts and group-distribution comparison.

use crate::error::{Error, Result};
use crate::metrics::{Ecdf, EdgeScoreTable};
use serde::{Deserialize, Serialize};

/// Classification outcome for one edge-betweenness distribution.
///
/// The label is `beyond-threshold` exactly when some normalized score
/// reaches theta. Labels are deliberately neutral; any clinical reading
/// belongs to the operator, not the tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub theta: f64,
    /// Normalization convention the scores (and theta) live in.
    pub normalization: String,
    pub max_score: f64,
    pub support_above: usize,
    pub label: String,
}

pub const LABEL_BEYOND: &str = "beyond-threshold";
pub const LABEL_WITHIN: &str = "within-threshold";

/// Apply the cut-off rule: beyond-threshold iff any score >= theta.
pub fn classify(dist: &EdgeScoreTable, theta: f64) -> Result<Verdict> {
    if dist.scores.is_empty() {
        return Err(Error::EmptyInput("empty score distribution".into()));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "theta must lie in (0,1), got {theta}"
        )));
    }
    let max_score = dist.max_score();
    let support_above = dist.scores.values().filter(|&&s| s >= theta).count();
    let label = if max_score >= theta {
        LABEL_BEYOND
    } else {
        LABEL_WITHIN
    };
    Ok(Verdict {
        theta,
        normalization: "ordered-pairs".into(),
        max_score,
        support_above,
        label: label.into(),
    })
}

/// Two-sample comparison of edge-score distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    /// Exact two-sample Kolmogorov-Smirnov statistic.
    pub ks_statistic: f64,
    /// max score of group A minus max score of group B.
    pub theta_gap: f64,
}

/// Exact KS statistic: sup |F_A - F_B| over the merged sample points.
pub fn compare_groups(a: &Ecdf, b: &Ecdf) -> GroupComparison {
    let mut sup = 0.0f64;
    for x in a.sorted_values.iter().chain(&b.sorted_values) {
        let d = (a.evaluate(*x) - b.evaluate(*x)).abs();
        sup = sup.max(d);
    }
    let max_a = *a
        .sorted_values
        .last()
        .expect("ecdf construction rejects empty samples");
    let max_b = *b.sorted_values.last().expect("non-empty");
    GroupComparison {
        ks_statistic: sup,
        theta_gap: max_a - max_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ecdf;
    use proptest::prelude::*;
    use std::collections::BTreeMap;

    fn table(scores: &[((usize, usize), f64)]) -> EdgeScoreTable {
        let scores: BTreeMap<(usize, usize), f64> = scores.iter().cloned().collect();
        let raw = scores.iter().map(|(&e, &s)| (e, s)).collect();
        EdgeScoreTable {
            raw,
            scores,
            n_nodes: 2,
        }
    }

    #[test]
    fn healthy_pattern_is_within() {
        let v = classify(&table(&[((0, 1), 0.05), ((1, 0), 0.15)]), 0.2).unwrap();
        assert_eq!(v.label, LABEL_WITHIN);
        assert_eq!(v.support_above, 0);
        assert_eq!(v.max_score, 0.15);
    }

    #[test]
    fn any_score_at_or_above_theta_is_beyond() {
        let v = classify(&table(&[((0, 1), 0.1), ((1, 0), 0.25)]), 0.2).unwrap();
        assert_eq!(v.label, LABEL_BEYOND);
        assert_eq!(v.support_above, 1);
    }

    #[test]
    fn boundary_score_exactly_theta_is_beyond() {
        let v = classify(&table(&[((0, 1), 0.2)]), 0.2).unwrap();
        assert_eq!(v.label, LABEL_BEYOND);
        assert_eq!(v.support_above, 1);
    }

    #[test]
    fn classify_rejects_bad_inputs() {
        assert!(classify(&table(&[]), 0.2).is_err());
        assert!(classify(&table(&[((0, 1), 0.1)]), 0.0).is_err());
        assert!(classify(&table(&[((0, 1), 0.1)]), 1.0).is_err());
    }

    #[test]
    fn ks_identical_samples_is_zero() {
        let e = ecdf(&[0.1, 0.2, 0.3]).unwrap();
        let c = compare_groups(&e, &e);
        assert_eq!(c.ks_statistic, 0.0);
        assert_eq!(c.theta_gap, 0.0);
    }

    #[test]
    fn ks_disjoint_supports_is_one() {
        let a = ecdf(&[0.0, 0.1]).unwrap();
        let b = ecdf(&[0.2, 0.3]).unwrap();
        assert_eq!(compare_groups(&a, &b).ks_statistic, 1.0);
    }

    #[test]
    fn ks_interleaved_case() {
        let a = ecdf(&[0.1, 0.3]).unwrap();
        let b = ecdf(&[0.2, 0.4]).unwrap();
        let c = compare_groups(&a, &b);
        assert!((c.ks_statistic - 0.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn classify_is_monotone_in_theta(
            scores in proptest::collection::vec(0.0f64..1.0, 1..20),
            t1 in 0.01f64..0.98,
            dt in 0.001f64..0.5,
        ) {
            let t2 = (t1 + dt).min(0.99);
            let entries: Vec<((usize, usize), f64)> = scores
                .iter()
                .enumerate()
                .map(|(i, &s)| ((i, i + 1), s))
                .collect();
            let tab = table(&entries);
            let v1 = classify(&tab, t1).unwrap();
            let v2 = classify(&tab, t2).unwrap();
            // Raising theta never turns within into beyond.
            if v1.label == LABEL_WITHIN {
                prop_assert_eq!(v2.label.as_str(), LABEL_WITHIN);
            }
            prop_assert!(v2.support_above <= v1.support_above);
        }

        #[test]
        fn ks_is_symmetric(
            a in proptest::collection::vec(0.0f64..1.0, 1..30),
            b in proptest::collection::vec(0.0f64..1.0, 1..30),
        ) {
            let ea = ecdf(&a).unwrap();
            let eb = ecdf(&b).unwrap();
            let ab = compare_groups(&ea, &eb).ks_statistic;
            let ba = compare_groups(&eb, &ea).ks_statistic;
            prop_assert!((ab - ba).abs() < 1e-15);
            if a == b {
                prop_assert_eq!(ab, 0.0);
            }
        }
    }
}
