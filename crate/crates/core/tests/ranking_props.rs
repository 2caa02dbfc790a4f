use flowsieve::ranking::{combine, normalize, top_k};
use flowsieve::selectors::{Method, MethodScores};
use flowsieve_testkit::cases::{score_sets, ScoreSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn to_scores(set: &ScoreSet) -> Vec<MethodScores> {
    Method::ALL
        .iter()
        .zip(&set.vectors)
        .map(|(&m, v)| MethodScores::new(m, set.features.clone(), v.clone()).unwrap())
        .collect()
}

fn sets(seed: u64, count: usize) -> Vec<Vec<MethodScores>> {
    score_sets(seed, count, Method::ALL.len())
        .iter()
        .map(to_scores)
        .collect()
}

#[test]
fn normalized_vectors_sum_to_one_hundred() {
    for set in sets(21, 1000) {
        for m in set {
            let sum: f64 = normalize(&m).unwrap().scores.iter().sum();
            assert!((sum - 100.0).abs() <= 1e-9, "{sum}");
        }
    }
}

#[test]
fn rescaling_one_method_leaves_selection_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for raw in sets(22, 1000) {
        let (_, base) = combine(&raw).unwrap();
        let mut scaled = raw.clone();
        let which = rng.random_range(0..scaled.len());
        let c = 10f64.powf(rng.random_range(-6.0..6.0));
        scaled[which].scores.iter_mut().for_each(|s| *s *= c);
        let (_, other) = combine(&scaled).unwrap();
        for k in 1..=base.entries.len() {
            assert_eq!(top_k(&base, k).unwrap().names, top_k(&other, k).unwrap().names);
        }
    }
}

#[test]
fn top_k_is_nested() {
    for raw in sets(23, 1000) {
        let (_, r) = combine(&raw).unwrap();
        for k in 1..r.entries.len() {
            let small = top_k(&r, k).unwrap().names;
            let big = top_k(&r, k + 1).unwrap().names;
            assert!(small.iter().all(|n| big.contains(n)));
        }
    }
}

#[test]
fn renaming_features_permutes_the_ranking_consistently() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for raw in sets(24, 200) {
        let f = raw[0].features.len();
        let mut perm: Vec<usize> = (0..f).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<MethodScores> = raw
            .iter()
            .map(|m| {
                let features = perm.iter().map(|&j| m.features[j].clone()).collect();
                let scores = perm.iter().map(|&j| m.scores[j]).collect();
                MethodScores::new(m.method, features, scores).unwrap()
            })
            .collect();
        let (_, a) = combine(&raw).unwrap();
        let (_, b) = combine(&shuffled).unwrap();
        let names =
            |r: &flowsieve::ranking::CombinedRanking| r.entries.iter().map(|e| e.feature.clone()).collect::<Vec<_>>();
        assert_eq!(names(&a), names(&b));
    }
}
