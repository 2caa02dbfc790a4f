//! Second-order gradient boosting on the logistic loss over per-feature
//! histogram bins.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::cart::midpoint;
use super::{normalized, Family, FitStats, FittedModel, ModelConfig, Tree, TreeNode};

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic loss of raw score `z` for label `y`: ln(1 + e^z) − y·z.
pub fn log_loss(z: f64, y: u8) -> f64 {
    let softplus = z.max(0.0) + (-z.abs()).exp().ln_1p();
    softplus - f64::from(y) * z
}

/// First and second derivative of [`log_loss`] in the raw score, from the
/// probability `p = sigmoid(z)`.
pub fn grad_hess(p: f64, y: u8) -> (f64, f64) {
    (p - f64::from(y), p * (1.0 - p))
}

fn mean_loss(raw: &[f64], labels: &[u8]) -> f64 {
    raw.iter().zip(labels).map(|(&z, &y)| log_loss(z, y)).sum::<f64>() / raw.len() as f64
}

/// Up to `max_bins − 1` cut points between consecutive distinct values,
/// placed at equal-count quantiles. Bin b holds values in (edge[b−1], edge[b]].
pub(super) fn bin_edges(col: &[f64], max_bins: usize) -> Vec<f64> {
    let mut sorted = col.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for &v in &sorted {
        match distinct.last_mut() {
            Some((last, count)) if *last == v => *count += 1,
            _ => distinct.push((v, 1)),
        }
    }
    if distinct.len() <= max_bins {
        return distinct.windows(2).map(|w| midpoint(w[0].0, w[1].0)).collect();
    }
    let n = sorted.len();
    let mut edges = Vec::with_capacity(max_bins - 1);
    let mut next_bin = 1;
    let mut seen = 0usize;
    for j in 0..distinct.len() - 1 {
        seen += distinct[j].1;
        if seen * max_bins >= next_bin * n {
            edges.push(midpoint(distinct[j].0, distinct[j + 1].0));
            while next_bin < max_bins && seen * max_bins >= next_bin * n {
                next_bin += 1;
            }
            if edges.len() == max_bins - 1 {
                break;
            }
        }
    }
    edges
}

struct Binned {
    edges: Vec<Vec<f64>>,
    codes: Vec<Vec<u16>>,
}

impl Binned {
    fn new(cols: &[&[f64]], max_bins: usize) -> Binned {
        let edges: Vec<Vec<f64>> = cols.iter().map(|c| bin_edges(c, max_bins)).collect();
        let codes = cols
            .iter()
            .zip(&edges)
            .map(|(c, e)| c.iter().map(|&x| e.partition_point(|&t| t < x) as u16).collect())
            .collect();
        Binned { edges, codes }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    feature: usize,
    bin: u16,
    gain: f64,
}

struct Grower<'a> {
    binned: &'a Binned,
    grad: &'a [f64],
    hess: &'a [f64],
    features: &'a [usize],
    lambda: f64,
    gamma: f64,
    min_leaf: usize,
    learning_rate: f64,
    evaluations: u64,
    importance: Vec<f64>,
    nodes: Vec<TreeNode>,
}

struct Pending {
    id: usize,
    rows: Vec<u32>,
    depth: usize,
    best: Option<Candidate>,
}

impl Grower<'_> {
    fn sums(&self, rows: &[u32]) -> (f64, f64) {
        rows.iter().fold((0.0, 0.0), |(g, h), &r| {
            (g + self.grad[r as usize], h + self.hess[r as usize])
        })
    }

    /// Highest-gain histogram split with positive gain. Ties keep the first
    /// candidate: lowest feature index, then lowest bin.
    fn best_split(&mut self, rows: &[u32]) -> Option<Candidate> {
        let (g_total, h_total) = self.sums(rows);
        let parent = g_total * g_total / (h_total + self.lambda);
        let n = rows.len();
        let mut best: Option<Candidate> = None;
        let mut hist: Vec<(f64, f64, usize)> = Vec::new();
        for &f in self.features {
            let n_bins = self.binned.edges[f].len() + 1;
            if n_bins < 2 {
                continue;
            }
            hist.clear();
            hist.resize(n_bins, (0.0, 0.0, 0));
            let codes = &self.binned.codes[f];
            for &r in rows {
                let slot = &mut hist[codes[r as usize] as usize];
                slot.0 += self.grad[r as usize];
                slot.1 += self.hess[r as usize];
                slot.2 += 1;
            }
            let (mut gl, mut hl, mut cl) = (0.0, 0.0, 0usize);
            for (b, &(g, h, c)) in hist[..n_bins - 1].iter().enumerate() {
                gl += g;
                hl += h;
                cl += c;
                if c == 0 || cl < self.min_leaf || n - cl < self.min_leaf {
                    continue;
                }
                self.evaluations += 1;
                let (gr, hr) = (g_total - gl, h_total - hl);
                let gain = 0.5 * (gl * gl / (hl + self.lambda) + gr * gr / (hr + self.lambda) - parent) - self.gamma;
                if gain > best.map_or(0.0, |b| b.gain) {
                    best = Some(Candidate {
                        feature: f,
                        bin: b as u16,
                        gain,
                    });
                }
            }
        }
        best
    }

    fn make_leaf(&mut self, id: usize, rows: &[u32]) {
        let (g, h) = self.sums(rows);
        self.nodes[id] = TreeNode::Leaf {
            value: -g / (h + self.lambda) * self.learning_rate,
            n_samples: rows.len() as u64,
        };
    }

    /// Turns `p` into a split node and returns its two children.
    fn split(&mut self, p: Pending, c: Candidate) -> [Pending; 2] {
        self.importance[c.feature] += c.gain;
        let codes = &self.binned.codes[c.feature];
        let (l_rows, r_rows): (Vec<u32>, Vec<u32>) = p.rows.iter().partition(|&&r| codes[r as usize] <= c.bin);
        let left = self.nodes.len();
        for _ in 0..2 {
            self.nodes.push(TreeNode::Leaf {
                value: 0.0,
                n_samples: 0,
            });
        }
        self.nodes[p.id] = TreeNode::Split {
            feature: c.feature,
            threshold: self.binned.edges[c.feature][c.bin as usize],
            left,
            right: left + 1,
            n_samples: p.rows.len() as u64,
        };
        [
            Pending {
                id: left,
                rows: l_rows,
                depth: p.depth + 1,
                best: None,
            },
            Pending {
                id: left + 1,
                rows: r_rows,
                depth: p.depth + 1,
                best: None,
            },
        ]
    }

    /// Depth-limited growth; equivalent to level-wise growth because every
    /// node is split whenever a positive-gain split exists.
    fn grow_depthwise(&mut self, rows: Vec<u32>, max_depth: usize) {
        let mut stack = vec![Pending {
            id: 0,
            rows,
            depth: 0,
            best: None,
        }];
        while let Some(p) = stack.pop() {
            let best = if p.depth < max_depth {
                self.best_split(&p.rows)
            } else {
                None
            };
            match best {
                Some(c) => {
                    let [l, r] = self.split(p, c);
                    stack.push(r);
                    stack.push(l);
                }
                None => self.make_leaf(p.id, &p.rows),
            }
        }
    }

    /// Best-first growth: repeatedly split the open leaf with the largest
    /// gain until `max_leaves` leaves exist or nothing improves.
    fn grow_leafwise(&mut self, rows: Vec<u32>, max_leaves: usize, max_depth: usize) {
        let mut open = vec![Pending {
            id: 0,
            best: self.best_split(&rows),
            rows,
            depth: 0,
        }];
        let mut leaves = 1;
        while leaves < max_leaves {
            let pick = open
                .iter()
                .enumerate()
                .filter_map(|(i, p)| p.best.map(|c| (i, c.gain)))
                .fold(None, |acc: Option<(usize, f64)>, (i, g)| match acc {
                    Some((_, bg)) if bg >= g => acc,
                    _ => Some((i, g)),
                });
            let Some((i, _)) = pick else { break };
            let p = open.remove(i);
            let c = p.best.expect("picked leaves have a split");
            for mut child in self.split(p, c) {
                if child.depth < max_depth {
                    child.best = self.best_split(&child.rows);
                }
                open.push(child);
            }
            leaves += 1;
        }
        for p in open {
            self.make_leaf(p.id, &p.rows);
        }
    }
}

/// GOSS row sample: the top `a·n` rows by |gradient| plus `b·n` of the rest
/// drawn uniformly; the drawn rows are up-weighted by (1 − a)/b.
fn goss_sample(grad: &[f64], a: f64, b: f64, rng: &mut ChaCha8Rng) -> (Vec<u32>, Vec<f64>) {
    let n = grad.len();
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&i, &j| {
        grad[j as usize]
            .abs()
            .total_cmp(&grad[i as usize].abs())
            .then(i.cmp(&j))
    });
    let top = ((a * n as f64).round() as usize).min(n);
    let rest = n - top;
    let other = ((b * n as f64).round() as usize).min(rest);
    let mut weight = vec![0.0; n];
    let mut rows: Vec<u32> = order[..top].to_vec();
    for &r in &rows {
        weight[r as usize] = 1.0;
    }
    let amplify = (1.0 - a) / b;
    for k in index::sample(rng, rest, other) {
        let r = order[top + k];
        weight[r as usize] = amplify;
        rows.push(r);
    }
    rows.sort_unstable();
    (rows, weight)
}

pub(super) fn fit_boosted(cols: &[&[f64]], labels: &[u8], cfg: &ModelConfig) -> FittedModel {
    let n = labels.len();
    let n_features = cols.len();
    let binned = Binned::new(cols, cfg.histogram_bins);
    let positives = labels.iter().filter(|&&y| y == 1).count() as f64;
    let base_score = (positives / (n as f64 - positives)).ln();

    let mut raw = vec![base_score; n];
    let mut stats = FitStats {
        split_evaluations: 0,
        train_loss: vec![mean_loss(&raw, labels)],
    };
    let mut importance = vec![0.0; n_features];
    let mut trees = Vec::with_capacity(cfg.n_estimators);
    let n_cols = ((cfg.feature_subsample * n_features as f64).round() as usize).clamp(1, n_features);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];

    for round in 0..cfg.n_estimators {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(round as u64);
        for i in 0..n {
            let (g, h) = grad_hess(sigmoid(raw[i]), labels[i]);
            grad[i] = g;
            hess[i] = h;
        }
        let features: Vec<usize> = if n_cols < n_features {
            let mut f = index::sample(&mut rng, n_features, n_cols).into_vec();
            f.sort_unstable();
            f
        } else {
            (0..n_features).collect()
        };
        let rows: Vec<u32> = match cfg.family {
            Family::GbmGoss => {
                let (rows, weight) = goss_sample(&grad, cfg.goss_top_fraction, cfg.goss_other_fraction, &mut rng);
                for i in 0..n {
                    grad[i] *= weight[i];
                    hess[i] *= weight[i];
                }
                rows
            }
            _ => (0..n as u32).collect(),
        };

        let mut grower = Grower {
            binned: &binned,
            grad: &grad,
            hess: &hess,
            features: &features,
            lambda: cfg.l2_regularization,
            gamma: cfg.min_loss_reduction,
            min_leaf: cfg.min_samples_leaf,
            learning_rate: cfg.learning_rate,
            evaluations: 0,
            importance: vec![0.0; n_features],
            nodes: vec![TreeNode::Leaf {
                value: 0.0,
                n_samples: 0,
            }],
        };
        let max_depth = cfg.max_depth.unwrap_or(usize::MAX);
        match cfg.max_leaves {
            Some(max_leaves) if cfg.family == Family::GbmGoss => grower.grow_leafwise(rows, max_leaves, max_depth),
            _ => grower.grow_depthwise(rows, max_depth),
        }
        stats.split_evaluations += grower.evaluations;
        for (acc, v) in importance.iter_mut().zip(&grower.importance) {
            *acc += v;
        }
        let tree = Tree { nodes: grower.nodes };
        for (i, z) in raw.iter_mut().enumerate() {
            *z += tree.predict_row(|f| cols[f][i]);
        }
        stats.train_loss.push(mean_loss(&raw, labels));
        trees.push(tree);
    }

    FittedModel {
        config: cfg.clone(),
        n_features,
        trees,
        base_score,
        feature_importances: normalized(importance),
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::fit_gbm;

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(800.0) == 1.0 && sigmoid(-800.0) == 0.0);
        assert!((log_loss(0.0, 1) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(log_loss(-800.0, 1).is_finite());
    }

    #[test]
    fn edges_cover_distinct_values_when_few() {
        assert_eq!(bin_edges(&[1.0, 3.0, 3.0, 2.0], 256), vec![1.5, 2.5]);
        assert!(bin_edges(&[4.0; 5], 256).is_empty());
    }

    #[test]
    fn edges_are_capped_and_balanced() {
        let col: Vec<f64> = (0..1000).map(f64::from).collect();
        let e = bin_edges(&col, 10);
        assert_eq!(e.len(), 9);
        let codes: Vec<usize> = col.iter().map(|&x| e.partition_point(|&t| t < x)).collect();
        for b in 0..10 {
            assert_eq!(codes.iter().filter(|&&c| c == b).count(), 100);
        }
    }

    #[test]
    fn goss_keeps_large_gradients_and_reweights_the_rest() {
        let grad: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (rows, w) = goss_sample(&grad, 0.2, 0.1, &mut rng);
        assert_eq!(rows.len(), 30);
        assert!(w[80..].iter().all(|&x| x == 1.0));
        let amplified = w.iter().filter(|&&x| (x - 8.0).abs() < 1e-12).count();
        assert_eq!(amplified, 10);
    }

    /// Closed form for one full-batch stump with lr = 1 on 4 rows.
    #[test]
    fn one_stump_matches_newton_leaf_values() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0u8, 0, 1, 1];
        let mut cfg = ModelConfig::gbm_histogram();
        cfg.n_estimators = 1;
        cfg.learning_rate = 1.0;
        cfg.max_depth = Some(1);
        cfg.feature_subsample = 1.0;
        let m = fit_gbm(&[&x], &y, &cfg).unwrap();
        // base = ln(2/2) = 0, p = 0.5, g = ±0.5, h = 0.25 per row.
        // Left {0,1}: G = 1.0, H = 0.5 → −1/1.5. Right: G = −1.0 → +1/1.5.
        assert_eq!(m.base_score, 0.0);
        let t = &m.trees[0];
        assert_eq!(t.split_count(), 1);
        assert!((t.predict_row(|_| 0.0) + 1.0 / 1.5).abs() < 1e-15);
        assert!((t.predict_row(|_| 3.0) - 1.0 / 1.5).abs() < 1e-15);
    }

    #[test]
    fn huge_gamma_leaves_only_the_prior() {
        let x: Vec<f64> = (0..40).map(f64::from).collect();
        let y: Vec<u8> = (0..40).map(|i| u8::from(i >= 30)).collect();
        let mut cfg = ModelConfig::gbm_histogram();
        cfg.min_loss_reduction = 1e9;
        cfg.n_estimators = 5;
        let m = fit_gbm(&[&x], &y, &cfg).unwrap();
        assert!(m.trees.iter().all(|t| t.split_count() == 0));
        assert!(m.feature_importance().iter().all(|&v| v == 0.0));
        let p = m.predict(&[&x]).unwrap();
        for prob in p.probabilities {
            assert!((prob - 0.25).abs() < 1e-9);
        }
    }

    #[test]
    fn goss_tree_respects_leaf_limits() {
        let n = 2000;
        let x0: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1009) as f64).collect();
        let x1: Vec<f64> = (0..n).map(|i| ((i * 104729) % 997) as f64).collect();
        let y: Vec<u8> = (0..n).map(|i| u8::from(x0[i] + x1[i] > 1000.0)).collect();
        let mut cfg = ModelConfig::gbm_goss();
        cfg.max_leaves = Some(8);
        cfg.n_estimators = 20;
        let m = fit_gbm(&[&x0, &x1], &y, &cfg).unwrap();
        for t in &m.trees {
            assert!(t.leaf_count() <= 8);
            for node in &t.nodes {
                if let TreeNode::Leaf { n_samples, .. } = node {
                    assert!(*n_samples >= 16);
                }
            }
        }
        let acc = m
            .predict(&[&x0, &x1])
            .unwrap()
            .labels
            .iter()
            .zip(&y)
            .filter(|(a, b)| a == b)
            .count();
        assert!(acc as f64 / n as f64 > 0.9);
    }
}
