//! Selector scores computed straight from their textbook definitions over
//! the raw (already discrete) values.

fn groups(values: &[f64]) -> Vec<f64> {
    let mut distinct: Vec<f64> = Vec::new();
    for &v in values {
        if !distinct.contains(&v) {
            distinct.push(v);
        }
    }
    distinct
}

fn count(values: &[f64], labels: &[u8], v: Option<f64>, y: Option<u8>) -> f64 {
    values
        .iter()
        .zip(labels)
        .filter(|(x, l)| v.is_none_or(|v| **x == v) && y.is_none_or(|y| **l == y))
        .count() as f64
}

/// Shannon entropy in bits of the labels where `values == v` (all rows if `v` is None).
fn entropy_where(values: &[f64], labels: &[u8], v: Option<f64>) -> f64 {
    let n = count(values, labels, v, None);
    let mut h = 0.0;
    for y in [0u8, 1] {
        let p = count(values, labels, v, Some(y)) / n;
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// H(Y) − Σ_v P(v)·H(Y | v), in bits.
pub fn info_gain(values: &[f64], labels: &[u8]) -> f64 {
    let n = labels.len() as f64;
    let mut conditional = 0.0;
    for v in groups(values) {
        conditional += count(values, labels, Some(v), None) / n * entropy_where(values, labels, Some(v));
    }
    entropy_where(values, labels, None) - conditional
}

/// Σ (O − E)² / E over value × class cells; cells with E = 0 add nothing.
pub fn chi_squared(values: &[f64], labels: &[u8]) -> f64 {
    let n = labels.len() as f64;
    let mut stat = 0.0;
    for v in groups(values) {
        for y in [0u8, 1] {
            let expected = count(values, labels, Some(v), None) * count(values, labels, None, Some(y)) / n;
            if expected > 0.0 {
                let observed = count(values, labels, Some(v), Some(y));
                stat += (observed - expected).powi(2) / expected;
            }
        }
    }
    stat
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean absolute deviation around the mean.
pub fn mad(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|x| (x - m).abs()).sum::<f64>() / values.len() as f64
}

/// sqrt(between-class variance / total variance); 0 for a constant column.
pub fn dispersion_ratio(values: &[f64], labels: &[u8]) -> f64 {
    let m = mean(values);
    let total: f64 = values.iter().map(|x| (x - m).powi(2)).sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut between = 0.0;
    for y in [0u8, 1] {
        let members: Vec<f64> = values
            .iter()
            .zip(labels)
            .filter(|(_, l)| **l == y)
            .map(|(x, _)| *x)
            .collect();
        if !members.is_empty() {
            between += members.len() as f64 * (mean(&members) - m).powi(2);
        }
    }
    (between / total).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_values() {
        // Contingency [[10, 20], [20, 10]].
        let mut values = vec![0.0; 30];
        values.extend(vec![1.0; 30]);
        let mut labels = vec![0u8; 10];
        labels.extend(vec![1u8; 20]);
        labels.extend(vec![0u8; 20]);
        labels.extend(vec![1u8; 10]);
        assert!((chi_squared(&values, &labels) - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(mad(&[1.0, 2.0, 3.0, 4.0]), 1.0);
        assert_eq!(dispersion_ratio(&[0.0, 0.0, 1.0, 1.0], &[0, 0, 1, 1]), 1.0);
        assert_eq!(info_gain(&[0.0, 1.0], &[0, 1]), 1.0);
    }
}
