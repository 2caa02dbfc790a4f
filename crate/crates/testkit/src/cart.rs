//! Exhaustive single-tree CART with exact rational Gini arithmetic.
//! Split rule: minimize the weighted child impurity over every feature and
//! every midpoint between consecutive distinct values; the first candidate
//! in (feature, threshold) order wins ties; split only on a strict decrease.
//! Leaves predict the majority class, malicious (1) on a tie.

use std::cmp::Ordering;

/// p/q with q > 0.
#[derive(Debug, Clone, Copy)]
struct Frac {
    p: i128,
    q: i128,
}

impl Frac {
    fn add(self, o: Frac) -> Frac {
        Frac {
            p: self.p * o.q + o.p * self.q,
            q: self.q * o.q,
        }
    }

    fn cmp(self, o: Frac) -> Ordering {
        (self.p * o.q).cmp(&(o.p * self.q))
    }
}

/// n · gini = (n² − Σ c²) / n for the rows `idx`.
fn weighted_gini(labels: &[u8], idx: &[usize]) -> Frac {
    let n = idx.len() as i128;
    let ones = idx.iter().filter(|&&i| labels[i] == 1).count() as i128;
    let zeros = n - ones;
    Frac {
        p: n * n - ones * ones - zeros * zeros,
        q: n,
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Leaf(u8),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
}

impl Node {
    pub fn predict(&self, x: &[f64]) -> u8 {
        match self {
            Node::Leaf(y) => *y,
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.predict(x)
                } else {
                    right.predict(x)
                }
            }
        }
    }
}

/// `rows[i][j]` is feature j of row i.
pub fn fit(rows: &[Vec<f64>], labels: &[u8]) -> Node {
    let idx: Vec<usize> = (0..rows.len()).collect();
    build(rows, labels, &idx)
}

fn build(rows: &[Vec<f64>], labels: &[u8], idx: &[usize]) -> Node {
    let ones = idx.iter().filter(|&&i| labels[i] == 1).count();
    let majority = u8::from(2 * ones >= idx.len());
    if ones == 0 || ones == idx.len() {
        return Node::Leaf(majority);
    }
    let parent = weighted_gini(labels, idx);
    let n_features = rows[0].len();
    let mut best: Option<(Frac, usize, f64)> = None;
    #[allow(clippy::needless_range_loop)]
    for f in 0..n_features {
        let mut values: Vec<f64> = idx.iter().map(|&i| rows[i][f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = (w[0] + w[1]) / 2.0;
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][f] <= t);
            let score = weighted_gini(labels, &l).add(weighted_gini(labels, &r));
            if best.is_none_or(|(b, _, _)| score.cmp(b) == Ordering::Less) {
                best = Some((score, f, t));
            }
        }
    }
    match best {
        Some((score, feature, threshold)) if score.cmp(parent) == Ordering::Less => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| rows[i][feature] <= threshold);
            Node::Split {
                feature,
                threshold,
                left: Box::new(build(rows, labels, &l)),
                right: Box::new(build(rows, labels, &r)),
            }
        }
        _ => Node::Leaf(majority),
    }
}
