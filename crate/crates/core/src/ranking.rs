//! Percent normalization of selector scores, aggregation into one ranking and
//! top-k selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::selectors::MethodScores;

/// How per-method percentages are combined; echoed into every report.
pub const AGGREGATION_RULE: &str = "unweighted arithmetic mean of per-method percentages";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub feature: String,
    pub percent: f64,
}

/// Features sorted by combined percentage, descending, ties by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedRanking {
    pub entries: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub names: Vec<String>,
    /// Sum of the selected features' combined percentages.
    pub coverage: f64,
}

/// True when every score is zero, in which case [`normalize`] falls back to a
/// uniform vector.
pub fn is_degenerate(m: &MethodScores) -> bool {
    m.scores.iter().all(|&s| s == 0.0)
}

/// Rescales scores to percentages of their sum. An all-zero vector becomes
/// uniform.
pub fn normalize(m: &MethodScores) -> Result<MethodScores> {
    if m.scores.is_empty() {
        return Err(Error::InvalidArgument("cannot normalize an empty score vector".into()));
    }
    for (f, &s) in m.features.iter().zip(&m.scores) {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidScore {
                feature: f.clone(),
                value: s,
            });
        }
    }
    let sum: f64 = m.scores.iter().sum();
    let scores = if sum == 0.0 {
        log::warn!("{} scored every feature 0; using a uniform vector", m.method);
        vec![100.0 / m.scores.len() as f64; m.scores.len()]
    } else {
        m.scores.iter().map(|s| s / sum * 100.0).collect()
    };
    MethodScores::new(m.method, m.features.clone(), scores)
}

/// Percentages are compared at 1e-9 points so that rescaling a method's raw
/// scores, which moves percentages by a few ulps, cannot reorder ties.
fn rank_key(percent: f64) -> i64 {
    (percent * 1e9).round() as i64
}

fn by_percent_then_name(a: &RankEntry, b: &RankEntry) -> Ordering {
    rank_key(b.percent)
        .cmp(&rank_key(a.percent))
        .then_with(|| a.feature.cmp(&b.feature))
}

/// Per-feature mean of percent-normalized vectors over the same features.
pub fn aggregate(normalized: &[MethodScores]) -> Result<CombinedRanking> {
    let first = normalized
        .first()
        .ok_or_else(|| Error::InvalidArgument("no score vectors to aggregate".into()))?;
    for m in normalized {
        if m.features != first.features {
            return Err(Error::MismatchedFeatures);
        }
        let sum: f64 = m.scores.iter().sum();
        if (sum - 100.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!(
                "{} scores sum to {sum}, not 100; normalize first",
                m.method
            )));
        }
    }
    let k = normalized.len() as f64;
    let mut entries: Vec<RankEntry> = first
        .features
        .iter()
        .enumerate()
        .map(|(j, f)| RankEntry {
            feature: f.clone(),
            percent: normalized.iter().map(|m| m.scores[j]).sum::<f64>() / k,
        })
        .collect();
    entries.sort_by(by_percent_then_name);
    Ok(CombinedRanking { entries })
}

/// Normalizes each raw vector and aggregates.
pub fn combine(raw: &[MethodScores]) -> Result<(Vec<MethodScores>, CombinedRanking)> {
    let normalized = raw.iter().map(normalize).collect::<Result<Vec<_>>>()?;
    let ranking = aggregate(&normalized)?;
    Ok((normalized, ranking))
}

/// The first `k` entries of the ranking.
pub fn top_k(r: &CombinedRanking, k: usize) -> Result<FeatureSet> {
    if k == 0 || k > r.entries.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} but the ranking holds {} features",
            r.entries.len()
        )));
    }
    let chosen = &r.entries[..k];
    Ok(FeatureSet {
        names: chosen.iter().map(|e| e.feature.clone()).collect(),
        coverage: chosen.iter().map(|e| e.percent).sum::<f64>().min(100.0),
    })
}

impl CombinedRanking {
    /// Two-column `feature,percent` table with two decimals.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["feature", "percent"]).expect("in-memory write");
        for e in &self.entries {
            w.write_record([e.feature.as_str(), &format!("{:.2}", e.percent)])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn percent_of(&self, feature: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.feature == feature).map(|e| e.percent)
    }
}
