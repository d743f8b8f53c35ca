//! Exhaustive split enumeration oracle and structural properties of the tree
//! learner.

use bogp_core::data::DataTable;
use bogp_core::tree::{best_split, fit_tree, TreeParams};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-12;

fn oracle_gini(c0: f64, c1: f64) -> f64 {
    let t = c0 + c1;
    if t <= 0.0 {
        return 0.0;
    }
    let (p0, p1) = (c0 / t, c1 / t);
    1.0 - p0 * p0 - p1 * p1
}

/// Direct recount at every (feature, midpoint) pair.
fn brute_force(
    table: &DataTable,
    weights: &[f64],
    features: &[usize],
    min_leaf: usize,
) -> Option<(usize, f64, f64)> {
    let n = table.n_rows();
    let y = table.labels();
    let (mut t0, mut t1) = (0.0, 0.0);
    for i in 0..n {
        if y[i] == 0 {
            t0 += weights[i];
        } else {
            t1 += weights[i];
        }
    }
    let total = t0 + t1;
    let parent = oracle_gini(t0, t1);
    let mut best: Option<(usize, f64, f64)> = None;
    let mut sorted_features = features.to_vec();
    sorted_features.sort_unstable();
    for &j in &sorted_features {
        let mut values: Vec<f64> = (0..n).map(|i| table.get(i, j)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let thr = (pair[0] + pair[1]) / 2.0;
            let (mut l0, mut l1, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0);
            let (mut nl, mut nr) = (0, 0);
            for i in 0..n {
                let w = weights[i];
                if table.get(i, j) <= thr {
                    nl += 1;
                    if y[i] == 0 { l0 += w } else { l1 += w }
                } else {
                    nr += 1;
                    if y[i] == 0 { r0 += w } else { r1 += w }
                }
            }
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let gain = parent
                - (l0 + l1) / total * oracle_gini(l0, l1)
                - (r0 + r1) / total * oracle_gini(r0, r1);
            if gain > EPS && best.is_none_or(|(_, _, g)| gain > g + EPS) {
                best = Some((j, thr, gain));
            }
        }
    }
    best
}

fn random_table(rng: &mut ChaCha8Rng) -> (DataTable, Vec<f64>) {
    let n = rng.random_range(2..=200);
    let f = rng.random_range(1..=8);
    let discrete = rng.random_bool(0.5);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..f)
                .map(|_| {
                    if discrete {
                        f64::from(rng.random_range(0..6))
                    } else {
                        rng.random_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect();
    let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.35))).collect();
    let weights: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.05) { 0.0 } else { rng.random_range(0.1..3.0) })
        .collect();
    (DataTable::from_rows(&rows, &labels).unwrap(), weights)
}

#[test]
fn best_split_matches_enumeration_on_200_tables() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut found = 0;
    for case in 0..200 {
        let (table, mut weights) = random_table(&mut rng);
        if weights.iter().all(|&w| w == 0.0) {
            weights[0] = 1.0;
        }
        let f = table.n_cols();
        let features: Vec<usize> = (0..f).filter(|_| rng.random_bool(0.8)).collect();
        let features = if features.is_empty() { vec![0] } else { features };
        let min_leaf = rng.random_range(1..=4);
        let got = best_split(&table, &weights, &features, min_leaf).unwrap();
        let want = brute_force(&table, &weights, &features, min_leaf);
        match (got, want) {
            (None, None) => {}
            (Some(s), Some((j, thr, gain))) => {
                found += 1;
                assert_eq!(s.feature, j, "case {case}");
                assert!((s.threshold - thr).abs() <= 1e-12 * thr.abs().max(1.0), "case {case}");
                assert!((s.gain - gain).abs() < 1e-9, "case {case}");
            }
            other => panic!("case {case}: {other:?}"),
        }
    }
    assert!(found > 150, "only {found} tables produced a split");
}

#[test]
fn four_row_example_matches_oracle() {
    let t = DataTable::from_rows(&[vec![1.0], vec![2.0], vec![3.0], vec![4.0]], &[0, 0, 1, 1])
        .unwrap();
    let (j, thr, gain) = brute_force(&t, &[1.0; 4], &[0], 1).unwrap();
    assert_eq!((j, thr), (0, 2.5));
    assert!((gain - 0.5).abs() < 1e-15);
}

fn training_error(table: &DataTable, params: &TreeParams) -> usize {
    let m = fit_tree(table, &vec![1.0; table.n_rows()], params).unwrap();
    (0..table.n_rows())
        .filter(|&i| m.predict_row(table.row(i)).0 != table.labels()[i])
        .count()
}

fn table_strategy(max_rows: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<u8>)> {
    (1usize..=4, 2usize..=max_rows).prop_flat_map(|(f, n)| {
        (
            prop::collection::vec(prop::collection::vec(-3i32..=3, f), n),
            prop::collection::vec(0u8..=1, n),
        )
            .prop_map(|(rows, labels)| {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(f64::from).collect())
                    .collect();
                (rows, labels)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unlimited_tree_has_zero_training_error_on_distinct_rows(
        seed in any::<u64>(), n in 2usize..120, f in 1usize..5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..f).map(|_| rng.random::<f64>()).collect()).collect();
        let labels: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.4))).collect();
        let t = DataTable::from_rows(&rows, &labels).unwrap();
        prop_assert_eq!(training_error(&t, &TreeParams::default()), 0);
    }

    #[test]
    fn duplicating_a_row_equals_doubling_its_weight(
        (rows, labels) in table_strategy(40), pick in any::<prop::sample::Index>(),
    ) {
        let r = pick.index(rows.len());
        let t = DataTable::from_rows(&rows, &labels).unwrap();
        let mut dup_rows = rows.clone();
        dup_rows.push(rows[r].clone());
        let mut dup_labels = labels.clone();
        dup_labels.push(labels[r]);
        let dup = DataTable::from_rows(&dup_rows, &dup_labels).unwrap();
        let mut w = vec![1.0; rows.len()];
        w[r] = 2.0;
        let a = fit_tree(&dup, &vec![1.0; dup.n_rows()], &TreeParams::default()).unwrap();
        let b = fit_tree(&t, &w, &TreeParams::default()).unwrap();
        let f = t.n_cols();
        // every cell of the integer grid the features live on, plus offsets
        for probe in 0..200i32 {
            let x: Vec<f64> = (0..f).map(|j| f64::from((probe * (j as i32 + 3)) % 9 - 4) + 0.5 * f64::from(probe % 2)).collect();
            prop_assert_eq!(a.predict_row(&x), b.predict_row(&x));
        }
        for row in &rows {
            prop_assert_eq!(a.predict_row(row), b.predict_row(row));
        }
    }

    #[test]
    fn training_error_non_increasing_in_depth((rows, labels) in table_strategy(80)) {
        let t = DataTable::from_rows(&rows, &labels).unwrap();
        let mut last = usize::MAX;
        for depth in (1..=8).map(Some).chain([None]) {
            let params = TreeParams { max_depth: depth, ..TreeParams::default() };
            let e = training_error(&t, &params);
            prop_assert!(e <= last, "depth {:?}: {} > {}", depth, e, last);
            last = e;
        }
    }

    #[test]
    fn tree_respects_depth_bound_and_leaf_distributions(
        (rows, labels) in table_strategy(60), depth in 1usize..5, leaf in 1usize..4,
    ) {
        let t = DataTable::from_rows(&rows, &labels).unwrap();
        let params = TreeParams { max_depth: Some(depth), min_leaf_size: leaf, ..TreeParams::default() };
        let m = fit_tree(&t, &vec![1.0; t.n_rows()], &params).unwrap();
        prop_assert!(m.depth <= depth);
        for node in &m.nodes {
            if let bogp_core::tree::Node::Leaf { probs } = node {
                prop_assert!(probs[0] >= 0.0 && probs[1] >= 0.0);
                prop_assert!((probs[0] + probs[1] - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn same_seed_same_tree_with_feature_subsampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..100).map(|_| (0..6).map(|_| rng.random::<f64>()).collect()).collect();
    let labels: Vec<u8> = (0..100).map(|i| u8::from(rows[i][0] + rows[i][3] > 1.0)).collect();
    let t = DataTable::from_rows(&rows, &labels).unwrap();
    let params = TreeParams {
        features_per_split: bogp_core::tree::FeatureSubset::Count(2),
        seed: 77,
        ..TreeParams::default()
    };
    let a = fit_tree(&t, &[1.0; 100], &params).unwrap();
    let b = fit_tree(&t, &[1.0; 100], &params).unwrap();
    assert_eq!(a, b);
    let other = fit_tree(&t, &[1.0; 100], &TreeParams { seed: 78, ..params }).unwrap();
    assert_ne!(a, other);
}
