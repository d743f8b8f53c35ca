//! Weighted CART classification tree (Gini criterion), the base learner of
//! every ensemble.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};

/// Gains at or below this are treated as no improvement, and gains closer
/// than this are treated as ties.
pub const GAIN_EPS: f64 = 1e-12;

/// How many features are examined at each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FeatureSubset {
    #[default]
    All,
    /// A fresh uniform subset of this size per node.
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until purity or the leaf-size bound.
    pub max_depth: Option<usize>,
    pub min_leaf_size: usize,
    pub features_per_split: FeatureSubset,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_leaf_size: 1,
            features_per_split: FeatureSubset::All,
            seed: 0,
        }
    }
}

impl TreeParams {
    pub fn validate(&self, n_features: usize) -> Result<()> {
        if self.min_leaf_size == 0 {
            return Err(Error::InvalidParameter("min_leaf_size must be >= 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidParameter("max_depth must be >= 1".into()));
        }
        if let FeatureSubset::Count(m) = self.features_per_split {
            if m == 0 || m > n_features {
                return Err(Error::InvalidParameter(format!(
                    "features_per_split must lie in [1, {n_features}], got {m}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    /// Weighted Gini decrease: parent impurity minus weight-averaged child
    /// impurities.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Weighted `[normal, attack]` distribution.
        probs: [f64; 2],
    },
}

/// Fitted tree stored as a flat node list; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeModel {
    pub nodes: Vec<Node>,
    pub depth: usize,
    pub n_features: usize,
}

/// `1 - sum p_i^2`.
pub fn gini(weighted_counts: &[f64]) -> Result<f64> {
    let total: f64 = weighted_counts.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParameter("gini of all-zero counts".into()));
    }
    Ok(gini_unchecked(weighted_counts, total))
}

fn gini_unchecked(counts: &[f64], total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

fn gini2(c: [f64; 2]) -> f64 {
    gini_unchecked(&c, c[0] + c[1])
}

fn midpoint(lo: f64, hi: f64) -> f64 {
    let mid = lo + (hi - lo) / 2.0;
    if mid >= hi {
        lo
    } else {
        mid
    }
}

/// Finds the best threshold on one feature given the node's samples sorted
/// by that feature's value. Returns `(threshold, gain)`.
fn scan_sorted(
    sorted: impl Iterator<Item = (f64, u8, f64)>,
    totals: [f64; 2],
    n_rows: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let total_w = totals[0] + totals[1];
    let parent = gini2(totals);
    let mut left = [0.0f64; 2];
    let mut prev: Option<f64> = None;
    let mut best: Option<(f64, f64)> = None;
    for (left_rows, (value, label, w)) in sorted.enumerate() {
        if let Some(p) = prev {
            if p < value && left_rows >= min_leaf && n_rows - left_rows >= min_leaf {
                let right = [
                    (totals[0] - left[0]).max(0.0),
                    (totals[1] - left[1]).max(0.0),
                ];
                let wl = left[0] + left[1];
                let wr = right[0] + right[1];
                let gain = parent - (wl / total_w) * gini2(left) - (wr / total_w) * gini2(right);
                if gain > GAIN_EPS && best.is_none_or(|(_, g)| gain > g + GAIN_EPS) {
                    best = Some((midpoint(p, value), gain));
                }
            }
        }
        left[label as usize] += w;
        prev = Some(value);
    }
    best
}

fn check_weights(weights: &[f64], n_rows: usize) -> Result<()> {
    if weights.len() != n_rows {
        return Err(Error::DimensionMismatch {
            expected: n_rows,
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidParameter(
            "weights must be finite and non-negative".into(),
        ));
    }
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::InvalidParameter("weights are all zero".into()));
    }
    Ok(())
}

/// Best single split over `candidate_features`, or `None` when no split
/// with both children holding at least `min_leaf_size` rows lowers impurity.
///
/// Thresholds sit midway between consecutive distinct values. Ties go to the
/// lowest feature index, then the smallest threshold.
pub fn best_split(
    table: &DataTable,
    weights: &[f64],
    candidate_features: &[usize],
    min_leaf_size: usize,
) -> Result<Option<SplitCandidate>> {
    if candidate_features.is_empty() {
        return Err(Error::Empty("candidate feature set"));
    }
    check_weights(weights, table.n_rows())?;
    if let Some(&bad) = candidate_features.iter().find(|&&j| j >= table.n_cols()) {
        return Err(Error::DimensionMismatch {
            expected: table.n_cols(),
            actual: bad + 1,
        });
    }
    let labels = table.labels();
    let mut totals = [0.0; 2];
    for (i, &w) in weights.iter().enumerate() {
        totals[labels[i] as usize] += w;
    }
    let mut features = candidate_features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut order: Vec<usize> = (0..table.n_rows()).collect();
    let mut best: Option<SplitCandidate> = None;
    for j in features {
        order.sort_by(|&a, &b| table.get(a, j).total_cmp(&table.get(b, j)));
        let it = order
            .iter()
            .map(|&i| (table.get(i, j), labels[i], weights[i]));
        if let Some((threshold, gain)) = scan_sorted(it, totals, order.len(), min_leaf_size.max(1)) {
            if best.is_none_or(|b| gain > b.gain + GAIN_EPS) {
                best = Some(SplitCandidate {
                    feature: j,
                    threshold,
                    gain,
                });
            }
        }
    }
    Ok(best)
}

/// Column-major copy of a table plus one ascending row order per feature.
///
/// Built once and shared by every tree trained on the same table.
#[derive(Debug, Clone)]
pub struct TrainingView {
    columns: Vec<Vec<f64>>,
    labels: Vec<u8>,
    order: Vec<Vec<u32>>,
}

impl TrainingView {
    pub fn new(table: &DataTable) -> Self {
        let columns = table.columns();
        let order = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..col.len() as u32).collect();
                idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
                idx
            })
            .collect();
        Self {
            columns,
            labels: table.labels().to_vec(),
            order,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.columns[feature][row]
    }
}

struct Builder<'a> {
    view: &'a TrainingView,
    /// Table row behind each sample slot.
    rows: &'a [usize],
    /// Weight of each sample slot.
    weights: Vec<f64>,
    /// Per feature, slots sorted by value; every node owns the same
    /// `[start, end)` range in each list.
    sorted: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    params: &'a TreeParams,
    rng: Rng,
    nodes: Vec<Node>,
    depth: usize,
}

impl Builder<'_> {
    fn leaf(&self, totals: [f64; 2], start: usize, end: usize) -> Node {
        let w = totals[0] + totals[1];
        let probs = if w > 0.0 {
            [totals[0] / w, totals[1] / w]
        } else {
            let attack = self.sorted[0][start..end]
                .iter()
                .filter(|&&s| self.view.labels[self.rows[s as usize]] == 1)
                .count() as f64;
            let n = (end - start) as f64;
            [(n - attack) / n, attack / n]
        };
        Node::Leaf { probs }
    }

    fn candidates(&mut self) -> Vec<usize> {
        let f = self.view.n_features();
        match self.params.features_per_split {
            FeatureSubset::Count(m) if m < f => {
                let mut c = sample(&mut self.rng, f, m).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..f).collect(),
        }
    }

    fn grow(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let id = self.nodes.len();
        self.depth = self.depth.max(depth);
        let mut totals = [0.0; 2];
        for &s in &self.sorted[0][start..end] {
            totals[self.view.labels[self.rows[s as usize]] as usize] += self.weights[s as usize];
        }
        let n = end - start;
        let min_leaf = self.params.min_leaf_size;
        let at_depth_limit = self.params.max_depth.is_some_and(|d| depth >= d);
        let pure = totals[0] == 0.0 || totals[1] == 0.0;
        if at_depth_limit || pure || n < 2 * min_leaf {
            let leaf = self.leaf(totals, start, end);
            self.nodes.push(leaf);
            return id;
        }

        let mut best: Option<SplitCandidate> = None;
        for j in self.candidates() {
            let col = &self.view.columns[j];
            let it = self.sorted[j][start..end].iter().map(|&s| {
                let row = self.rows[s as usize];
                (col[row], self.view.labels[row], self.weights[s as usize])
            });
            if let Some((threshold, gain)) = scan_sorted(it, totals, n, min_leaf) {
                if best.is_none_or(|b| gain > b.gain + GAIN_EPS) {
                    best = Some(SplitCandidate {
                        feature: j,
                        threshold,
                        gain,
                    });
                }
            }
        }
        let Some(split) = best else {
            let leaf = self.leaf(totals, start, end);
            self.nodes.push(leaf);
            return id;
        };

        let col = &self.view.columns[split.feature];
        let mut n_left = 0;
        for &s in &self.sorted[split.feature][start..end] {
            let left = col[self.rows[s as usize]] <= split.threshold;
            self.goes_left[s as usize] = left;
            n_left += usize::from(left);
        }
        for list in &mut self.sorted {
            let seg = &mut list[start..end];
            self.scratch.clear();
            let mut w = 0;
            for k in 0..seg.len() {
                let s = seg[k];
                if self.goes_left[s as usize] {
                    seg[w] = s;
                    w += 1;
                } else {
                    self.scratch.push(s);
                }
            }
            seg[w..].copy_from_slice(&self.scratch);
        }

        self.nodes.push(Node::Leaf { probs: [1.0, 0.0] });
        let left = self.grow(start, start + n_left, depth + 1);
        let right = self.grow(start + n_left, end, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

/// Fits a tree on `rows` of the view (repeats allowed, as in a bootstrap
/// sample). `row_weights` is indexed by table row.
pub fn fit_tree_on_rows(
    view: &TrainingView,
    rows: &[usize],
    row_weights: &[f64],
    params: &TreeParams,
) -> Result<TreeModel> {
    if rows.is_empty() {
        return Err(Error::Empty("training rows"));
    }
    if row_weights.len() != view.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: view.n_rows(),
            actual: row_weights.len(),
        });
    }
    params.validate(view.n_features())?;

    // Group sample slots by table row, then walk each feature's global order.
    let n = view.n_rows();
    let mut offsets = vec![0u32; n + 1];
    for &r in rows {
        offsets[r + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut slots_by_row = vec![0u32; rows.len()];
    for (slot, &r) in rows.iter().enumerate() {
        slots_by_row[fill[r] as usize] = slot as u32;
        fill[r] += 1;
    }
    let sorted = view
        .order
        .iter()
        .map(|order| {
            let mut list = Vec::with_capacity(rows.len());
            for &r in order {
                let r = r as usize;
                list.extend_from_slice(&slots_by_row[offsets[r] as usize..offsets[r + 1] as usize]);
            }
            list
        })
        .collect();

    let mut builder = Builder {
        view,
        rows,
        weights: rows.iter().map(|&r| row_weights[r]).collect(),
        sorted,
        goes_left: vec![false; rows.len()],
        scratch: Vec::with_capacity(rows.len()),
        params,
        rng: seeded(params.seed),
        nodes: Vec::new(),
        depth: 0,
    };
    builder.grow(0, rows.len(), 0);
    Ok(TreeModel {
        depth: builder.depth,
        nodes: builder.nodes,
        n_features: view.n_features(),
    })
}

/// Greedy recursive CART fit over every row of `table`.
pub fn fit_tree(table: &DataTable, weights: &[f64], params: &TreeParams) -> Result<TreeModel> {
    if table.is_empty() {
        return Err(Error::Empty("training table"));
    }
    check_weights(weights, table.n_rows())?;
    let view = TrainingView::new(table);
    let rows: Vec<usize> = (0..table.n_rows()).collect();
    fit_tree_on_rows(&view, &rows, weights, params)
}

impl TreeModel {
    fn leaf_for(&self, row: &[f64]) -> [f64; 2] {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
                Node::Leaf { probs } => return *probs,
            }
        }
    }

    /// Leaf majority class (ties to 0) and attack probability. Assumes
    /// `row.len() == n_features`.
    pub fn predict_row(&self, row: &[f64]) -> (u8, f64) {
        let p = self.leaf_for(row);
        (u8::from(p[1] > p[0]), p[1])
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn predict_tree(model: &TreeModel, row: &[f64]) -> Result<(u8, f64)> {
    if row.len() != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            actual: row.len(),
        });
    }
    Ok(model.predict_row(row))
}
