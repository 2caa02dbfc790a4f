//! Exact Gini splitter and bootstrap forest.

use std::cmp::Ordering;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalized, FitStats, FittedModel, ModelConfig, Tree, TreeNode};
use crate::parallel;

/// (c0² + c1²)/n summed over the children of a split, kept as an exact
/// fraction so equal-quality splits compare equal and the first one found
/// (lowest feature, then lowest threshold) wins.
#[derive(Debug, Clone, Copy)]
struct Purity {
    num: u128,
    den: u128,
}

impl Purity {
    fn node(c0: u64, c1: u64) -> Purity {
        let (c0, c1) = (c0 as u128, c1 as u128);
        Purity {
            num: c0 * c0 + c1 * c1,
            den: c0 + c1,
        }
    }

    fn split(l: [u64; 2], r: [u64; 2]) -> Purity {
        let a = Purity::node(l[0], l[1]);
        let b = Purity::node(r[0], r[1]);
        match (
            a.num.checked_mul(b.den),
            b.num.checked_mul(a.den),
            a.den.checked_mul(b.den),
        ) {
            (Some(x), Some(y), Some(den)) if x.checked_add(y).is_some() => Purity { num: x + y, den },
            // Beyond ~10⁷ weighted rows; rescale and accept rounding.
            _ => {
                let v = a.value() + b.value();
                Purity {
                    num: (v * 1e6) as u128,
                    den: 1_000_000,
                }
            }
        }
    }

    fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    fn cmp(self, other: Purity) -> Ordering {
        match (self.num.checked_mul(other.den), other.num.checked_mul(self.den)) {
            (Some(a), Some(b)) => a.cmp(&b),
            _ => self.value().total_cmp(&other.value()),
        }
    }
}

/// Sort-derived view of one column, reusable across fits on the same rows.
#[derive(Debug, Clone)]
pub(crate) struct ColumnIndex {
    ranks: Vec<u32>,
    /// Rows ordered by (rank, row).
    order: Vec<u32>,
    /// Distinct values indexed by rank.
    distinct: Vec<f64>,
}

impl ColumnIndex {
    pub(crate) fn new(col: &[f64]) -> ColumnIndex {
        let (ranks, order) = dense_ranks(col);
        let mut distinct: Vec<f64> = order.iter().map(|&r| col[r as usize]).collect();
        distinct.dedup_by(|a, b| a == b);
        ColumnIndex { ranks, order, distinct }
    }
}

struct Context<'a> {
    cols: &'a [&'a [f64]],
    index: &'a [&'a ColumnIndex],
    labels: &'a [u8],
    max_depth: usize,
    min_leaf: u64,
    mtry: usize,
}

/// Dense rank of every value within its column, and the rows ordered by
/// (rank, row). Negative zero ranks with zero.
pub(super) fn dense_ranks(col: &[f64]) -> (Vec<u32>, Vec<u32>) {
    let mut order: Vec<u32> = (0..col.len() as u32).collect();
    order.sort_by(|&a, &b| (col[a as usize] + 0.0).total_cmp(&(col[b as usize] + 0.0)));
    let mut ranks = vec![0u32; col.len()];
    let mut rank = 0u32;
    for w in 0..order.len() {
        if w > 0 && col[order[w] as usize] != col[order[w - 1] as usize] {
            rank += 1;
        }
        ranks[order[w] as usize] = rank;
    }
    (ranks, order)
}

/// Threshold strictly below `hi` that sends `lo` left.
pub(super) fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi || mid < lo {
        lo
    } else {
        mid
    }
}

struct Grown {
    tree: Tree,
    importance: Vec<f64>,
    evaluations: u64,
}

struct Best {
    feature: usize,
    threshold: f64,
    purity: Purity,
    approx: (f64, f64),
}

/// Decides on the float estimate unless it is too close to call.
fn improves(left: [u64; 2], right: [u64; 2], approx: (f64, f64), best: &Best) -> bool {
    let lhs = approx.0 * best.approx.1;
    let rhs = best.approx.0 * approx.1;
    let tol = 1e-9 * rhs;
    if lhs > rhs + tol {
        true
    } else if lhs < rhs - tol {
        false
    } else {
        Purity::split(left, right).cmp(best.purity) == Ordering::Greater
    }
}

fn grow(ctx: &Context, weights: &[u32], rng: &mut ChaCha8Rng) -> Grown {
    let n_features = ctx.cols.len();
    let mut importance = vec![0.0; n_features];
    let mut evaluations = 0u64;
    let mut nodes = vec![TreeNode::Leaf {
        value: 0.0,
        n_samples: 0,
    }];
    let root: Vec<u32> = (0..weights.len() as u32).filter(|&r| weights[r as usize] > 0).collect();
    let mut stack = vec![(0usize, root, 0usize)];
    let mut keys: Vec<u64> = Vec::new();
    let mut scanned = vec![0u64; weights.len() + 1];
    // Large nodes are ordered by filtering the presorted columns instead of
    // sorting; `member[r] == id` marks the rows of the current node.
    let mut member = vec![u32::MAX; weights.len()];
    let n_total = weights.len();
    // Sort keys carry weight and label so the scan needs no row lookups.
    let tags: Vec<u32> = weights
        .iter()
        .zip(ctx.labels)
        .map(|(&w, &y)| (w << 1) | u32::from(y))
        .collect();

    while let Some((id, rows, depth)) = stack.pop() {
        let mut counts = [0u64; 2];
        for &r in &rows {
            counts[ctx.labels[r as usize] as usize] += weights[r as usize] as u64;
        }
        let total = counts[0] + counts[1];
        let leaf = TreeNode::Leaf {
            value: if counts[1] >= counts[0] { 1.0 } else { 0.0 },
            n_samples: total,
        };
        if counts[0] == 0 || counts[1] == 0 || depth >= ctx.max_depth || total < 2 * ctx.min_leaf {
            nodes[id] = leaf;
            continue;
        }

        let candidates: Vec<usize> = if ctx.mtry >= n_features {
            (0..n_features).collect()
        } else {
            let mut v = rand::seq::index::sample(rng, n_features, ctx.mtry).into_vec();
            v.sort_unstable();
            v
        };

        let scan = rows.len() * 8 >= n_total;
        if scan {
            for &r in &rows {
                member[r as usize] = id as u32;
            }
        }
        let counts_f = [counts[0] as f64, counts[1] as f64];
        let mut best: Option<Best> = None;
        for &f in &candidates {
            let ranks = &ctx.index[f].ranks;
            let key = |r: u32| (u64::from(ranks[r as usize]) << 32) | u64::from(tags[r as usize]);
            let keys: &[u64] = if scan {
                // Branchless compaction: membership is close to a coin flip,
                // which a filter branch mispredicts constantly.
                let mut len = 0;
                for &r in &ctx.index[f].order {
                    scanned[len] = key(r);
                    len += usize::from(member[r as usize] == id as u32);
                }
                &scanned[..len]
            } else {
                keys.clear();
                keys.extend(rows.iter().map(|&r| key(r)));
                keys.sort_unstable();
                &keys
            };
            // Running counts are kept in both forms. The float copies stay
            // exact integers below 2⁵³, so only the products in the fast
            // numerator and denominator of `Purity::split` round.
            let mut left = [0u64; 2];
            let mut left_f = [0.0f64; 2];
            for pair in keys.windows(2) {
                let tag = pair[0] as u32;
                let (class, w) = ((tag & 1) as usize, tag >> 1);
                left[class] += u64::from(w);
                left_f[class] += f64::from(w);
                if pair[0] >> 32 == pair[1] >> 32 {
                    continue;
                }
                let n_left = left[0] + left[1];
                if n_left < ctx.min_leaf || total - n_left < ctx.min_leaf {
                    continue;
                }
                evaluations += 1;
                let right_f = [counts_f[0] - left_f[0], counts_f[1] - left_f[1]];
                let (nl, nr) = (left_f[0] + left_f[1], right_f[0] + right_f[1]);
                let approx = (
                    (left_f[0] * left_f[0] + left_f[1] * left_f[1]) * nr
                        + (right_f[0] * right_f[0] + right_f[1] * right_f[1]) * nl,
                    nl * nr,
                );
                let right = [counts[0] - left[0], counts[1] - left[1]];
                if best.as_ref().is_none_or(|b| improves(left, right, approx, b)) {
                    let distinct = &ctx.index[f].distinct;
                    best = Some(Best {
                        feature: f,
                        threshold: midpoint(distinct[(pair[0] >> 32) as usize], distinct[(pair[1] >> 32) as usize]),
                        purity: Purity::split(left, right),
                        approx,
                    });
                }
            }
        }

        let parent = Purity::node(counts[0], counts[1]);
        let Some(best) = best.filter(|b| b.purity.cmp(parent) == Ordering::Greater) else {
            nodes[id] = leaf;
            continue;
        };
        // Weighted impurity decrease n·G(parent) − n_l·G(l) − n_r·G(r).
        importance[best.feature] += best.purity.value() - parent.value();

        let col = ctx.cols[best.feature];
        let (l_rows, r_rows): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| col[r as usize] <= best.threshold);
        let left_id = nodes.len();
        nodes.push(TreeNode::Leaf {
            value: 0.0,
            n_samples: 0,
        });
        nodes.push(TreeNode::Leaf {
            value: 0.0,
            n_samples: 0,
        });
        nodes[id] = TreeNode::Split {
            feature: best.feature,
            threshold: best.threshold,
            left: left_id,
            right: left_id + 1,
            n_samples: total,
        };
        stack.push((left_id + 1, r_rows, depth + 1));
        stack.push((left_id, l_rows, depth + 1));
    }

    Grown {
        tree: Tree { nodes },
        importance,
        evaluations,
    }
}

pub(super) fn fit_forest(cols: &[&[f64]], labels: &[u8], cfg: &ModelConfig) -> FittedModel {
    let index: Vec<ColumnIndex> = cols.iter().map(|c| ColumnIndex::new(c)).collect();
    let refs: Vec<&ColumnIndex> = index.iter().collect();
    fit_forest_indexed(cols, &refs, labels, cfg)
}

pub(super) fn fit_forest_indexed(
    cols: &[&[f64]],
    index: &[&ColumnIndex],
    labels: &[u8],
    cfg: &ModelConfig,
) -> FittedModel {
    let n = labels.len();
    let ctx = Context {
        cols,
        index,
        labels,
        max_depth: cfg.max_depth.unwrap_or(usize::MAX),
        min_leaf: cfg.min_samples_leaf as u64,
        mtry: cfg.max_features.resolve(cols.len()),
    };

    // One ChaCha stream per tree keeps parallel and serial fits identical.
    let grown = parallel::map_range(cfg.n_estimators, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t as u64);
        let mut weights = vec![0u32; n];
        if cfg.bootstrap {
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1;
            }
        } else {
            weights.fill(1);
        }
        grow(&ctx, &weights, &mut rng)
    });

    let mut importance = vec![0.0; cols.len()];
    let mut stats = FitStats::default();
    let mut trees = Vec::with_capacity(grown.len());
    for g in grown {
        for (acc, v) in importance.iter_mut().zip(&g.importance) {
            *acc += v;
        }
        stats.split_evaluations += g.evaluations;
        trees.push(g.tree);
    }
    FittedModel {
        config: cfg.clone(),
        n_features: cols.len(),
        trees,
        base_score: 0.0,
        feature_importances: normalized(importance),
        stats,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::{fit_random_forest, MaxFeatures};

    #[test]
    fn ranks_are_dense() {
        assert_eq!(
            dense_ranks(&[3.0, 1.0, 3.0, -2.0]),
            (vec![2, 1, 2, 0], vec![3, 1, 0, 2])
        );
        assert_eq!(dense_ranks(&[0.0, -0.0, 0.0]), (vec![0, 0, 0], vec![0, 1, 2]));
    }

    #[test]
    fn midpoint_stays_below_upper_value() {
        assert_eq!(midpoint(1.0, 2.0), 1.5);
        let hi = 1.0f64;
        let lo = f64::from_bits(hi.to_bits() - 1);
        assert_eq!(midpoint(lo, hi), lo);
    }

    #[test]
    fn purity_comparison_is_exact() {
        // 3/4-style splits that tie exactly.
        let a = Purity::split([3, 1], [1, 3]);
        let b = Purity::split([1, 3], [3, 1]);
        assert_eq!(a.cmp(b), Ordering::Equal);
        assert_eq!(Purity::split([4, 0], [0, 4]).cmp(a), Ordering::Greater);
    }

    #[test]
    fn stump_takes_best_gini_split() {
        let x0 = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let x1 = [0.0, 1.0, 0.0, 2.0, 3.0, 2.0];
        let y = [0, 0, 0, 1, 1, 1];
        let mut cfg = ModelConfig::random_forest();
        cfg.n_estimators = 1;
        cfg.max_depth = Some(1);
        cfg.bootstrap = false;
        cfg.min_samples_leaf = 1;
        cfg.max_features = MaxFeatures::All;
        let m = fit_random_forest(&[&x0, &x1], &y, &cfg).unwrap();
        // Both features separate perfectly; the lower index wins the tie.
        match &m.trees[0].nodes[0] {
            TreeNode::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 2.5);
            }
            other => panic!("expected a split, got {other:?}"),
        }
        assert_eq!(m.feature_importance(), vec![1.0, 0.0]);
        assert_eq!(m.trees[0].depth(), 1);
    }

    #[test]
    fn separable_data_fits_perfectly() {
        let n = 200;
        let y: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
        let x0: Vec<f64> = (0..n).map(|i| (i * 37 % 97) as f64).collect();
        let x1: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, &l)| f64::from(l) * 10.0 + (i % 5) as f64)
            .collect();
        let m = fit_random_forest(&[&x0, &x1], &y, &ModelConfig::random_forest()).unwrap();
        assert_eq!(m.predict(&[&x0, &x1]).unwrap().labels, y);
        assert_eq!(m.trees.len(), 100);
        assert!(m.trees.iter().all(|t| t.depth() <= 16));
        let again = fit_random_forest(&[&x0, &x1], &y, &ModelConfig::random_forest()).unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn leaves_respect_min_samples() {
        let n = 60;
        let y: Vec<u8> = (0..n).map(|i| u8::from((i * 13) % 7 < 3)).collect();
        let x: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let m = fit_random_forest(&[&x], &y, &ModelConfig::random_forest()).unwrap();
        for t in &m.trees {
            for node in &t.nodes {
                if let TreeNode::Leaf { n_samples, .. } = node {
                    assert!(*n_samples >= 2);
                }
            }
        }
    }
}
