use std::io::Write;

use bogp_core::data::{
    apply_preprocessor, fit_preprocessor, load_csv, pca_project, stratified_kfold_labels,
    stratified_split_indices, synthesize, write_pca_csv, IngestConfig, LabelMapping, SynthConfig,
};
use bogp_core::DataTable;
use proptest::prelude::*;

fn table_with_gaps() -> impl Strategy<Value = DataTable> {
    (1usize..6, 2usize..60).prop_flat_map(|(f, n)| {
        (
            prop::collection::vec(prop::collection::vec(prop::option::weighted(0.9, -1e3f64..1e3), f), n),
            prop::collection::vec(0u8..=1, n),
        )
            .prop_filter_map("needs an observed cell per column", move |(cells, labels)| {
                if (0..f).any(|j| cells.iter().all(|r| r[j].is_none())) {
                    return None;
                }
                let rows: Vec<Vec<f64>> = cells
                    .iter()
                    .map(|r| r.iter().map(|c| c.unwrap_or(f64::NAN)).collect())
                    .collect();
                DataTable::from_rows(&rows, &labels).ok()
            })
    })
}

proptest! {
    #[test]
    fn scaling_inverts_on_observed_cells(t in table_with_gaps()) {
        let p = fit_preprocessor(&t).unwrap();
        let s = apply_preprocessor(&p, &t).unwrap();
        prop_assert_eq!(s.missing_count(), 0);
        for i in 0..t.n_rows() {
            for j in 0..t.n_cols() {
                let sd = if p.scale_stds[j] == 0.0 { 1.0 } else { p.scale_stds[j] };
                let back = s.get(i, j) * sd + p.scale_means[j];
                let want = if t.is_missing(i, j) { p.impute_means[j] } else { t.get(i, j) };
                prop_assert!((back - want).abs() <= 1e-9 * want.abs().max(1.0));
            }
        }
        // scaled training columns: zero mean, unit population deviation
        for j in 0..t.n_cols() {
            let col = s.column(j);
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-9);
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            if p.scale_stds[j] > 1e-6 {
                prop_assert!((var - 1.0).abs() < 1e-9);
            } else if p.scale_stds[j] == 0.0 {
                prop_assert!(col.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn holdout_is_a_stratified_partition(
        n0 in 2usize..400, n1 in 2usize..400, frac in 0.05f64..0.95, seed in any::<u64>(),
    ) {
        let mut labels = vec![0u8; n0];
        labels.extend(std::iter::repeat_n(1u8, n1));
        let (train, test) = stratified_split_indices(&labels, frac, seed).unwrap();
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n0 + n1).collect::<Vec<_>>());
        for (class, n) in [(0u8, n0), (1u8, n1)] {
            let in_test = test.iter().filter(|&&i| labels[i] == class).count();
            prop_assert_eq!(in_test, (n as f64 * frac + 0.5).floor() as usize);
        }
        prop_assert_eq!(stratified_split_indices(&labels, frac, seed).unwrap(), (train, test));
    }

    #[test]
    fn kfold_validation_sets_partition_rows(
        n0 in 5usize..200, n1 in 5usize..200, k in 2usize..6, seed in any::<u64>(),
    ) {
        let mut labels = vec![0u8; n0];
        labels.extend(std::iter::repeat_n(1u8, n1));
        let folds = stratified_kfold_labels(&labels, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0usize; labels.len()];
        for f in &folds {
            prop_assert_eq!(f.train.len() + f.validation.len(), labels.len());
            for &i in &f.validation {
                seen[i] += 1;
            }
            prop_assert!(f.train.iter().all(|i| !f.validation.contains(i)));
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        let sizes: Vec<usize> = folds.iter().map(|f| f.validation.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for class in 0..=1u8 {
            let per: Vec<usize> = folds
                .iter()
                .map(|f| f.validation.iter().filter(|&&i| labels[i] == class).count())
                .collect();
            prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vkp, vkq) = (row[p], row[q]);
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| a[i][i]).collect();
    let vectors = (0..n).map(|c| (0..n).map(|r| v[r][c]).collect()).collect();
    (values, vectors)
}

#[test]
fn pca_matches_jacobi_oracle() {
    let raw = synthesize(&SynthConfig::new(120, 80, 6, 4)).unwrap();
    let t = apply_preprocessor(&fit_preprocessor(&raw).unwrap(), &raw).unwrap();
    let n = t.n_rows();
    let f = t.n_cols();
    let means: Vec<f64> = (0..f).map(|j| t.column(j).iter().sum::<f64>() / n as f64).collect();
    let cov: Vec<Vec<f64>> = (0..f)
        .map(|a| {
            (0..f)
                .map(|b| (0..n).map(|i| (t.get(i, a) - means[a]) * (t.get(i, b) - means[b])).sum::<f64>() / (n as f64 - 1.0))
                .collect()
        })
        .collect();
    let total: f64 = (0..f).map(|j| cov[j][j]).sum();
    let (values, vectors) = jacobi_eigen(cov);
    let mut order: Vec<usize> = (0..f).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let got = pca_project(&t, 3).unwrap();
    for (c, &o) in order.iter().take(3).enumerate() {
        let mut want = vectors[o].clone();
        let pivot = want.iter().copied().max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap();
        if pivot < 0.0 {
            want.iter_mut().for_each(|x| *x = -*x);
        }
        for j in 0..f {
            assert!((got.components[c][j] - want[j]).abs() < 1e-8, "component {c} entry {j}");
        }
        assert!((got.explained_variance_ratio[c] - values[o] / total).abs() < 1e-10);
    }
    for a in 0..3 {
        for b in 0..3 {
            let dot: f64 = (0..f).map(|j| got.components[a][j] * got.components[b][j]).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-10);
        }
    }
    // projections are centered and uncorrelated
    for a in 0..3 {
        let mean: f64 = got.projected.iter().map(|r| r[a]).sum::<f64>() / n as f64;
        assert!(mean.abs() < 1e-10);
    }
    let cross: f64 = got.projected.iter().map(|r| r[0] * r[1]).sum();
    assert!(cross.abs() < 1e-8);
}

#[test]
fn pca_csv_has_plotting_columns() {
    let t = synthesize(&SynthConfig::new(10, 10, 3, 1)).unwrap();
    let r = pca_project(&t, 2).unwrap();
    let mut buf = Vec::new();
    write_pca_csv(&r, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pc1,pc2,label"));
    assert_eq!(lines.count(), 20);
    assert!(!text.contains('\r'));
}

#[test]
fn csv_ingest_handles_text_labels_gaps_and_dropped_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("telemetry.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "ts,cpu,mem,proc,type,class").unwrap();
    writeln!(f, "2020-01-01,0.5,10,3,none,normal").unwrap();
    writeln!(f, "2020-01-02,,12,4,ddos,ATTACK").unwrap();
    writeln!(f, "2020-01-03,0.7,-,5,none,Normal").unwrap();
    drop(f);
    let schema = IngestConfig {
        label_column: "class".into(),
        exclude: vec!["ts".into()],
        missing_sentinel: Some("-".into()),
        label_mapping: LabelMapping::Text { normal: vec!["normal".into()], attack: vec!["attack".into()] },
    };
    let t = load_csv(&path, &schema).unwrap();
    assert_eq!(t.column_names(), ["cpu", "mem", "proc"]);
    assert_eq!(t.labels(), [0, 1, 0]);
    assert_eq!(t.class_counts(), [2, 1]);
    assert!(t.is_missing(1, 0) && t.is_missing(2, 1));
    assert_eq!(t.missing_count(), 2);
    assert_eq!(t.get(2, 2), 5.0);
}
