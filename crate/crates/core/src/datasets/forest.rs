//! Bagged CART classifier over sparse term counts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::corpus::{Label, SparseRow, TfMatrix};
use crate::rng::{self, stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    /// Fraction of features tried per split; `None` means `ceil(sqrt(m)) / m`.
    pub feature_subsample: Option<f64>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 100, max_depth: 12, feature_subsample: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    /// Rows with `count <= threshold` go left.
    Split { feature: usize, threshold: u32, left: usize, right: usize },
    /// Training rows reaching the leaf, as `[negative, positive]`.
    Leaf { counts: [u32; 2] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    fn leaf_for(&self, value: impl Fn(usize) -> u32) -> [u32; 2] {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Split { feature, threshold, left, right } => {
                    at = if value(feature) <= threshold { left } else { right };
                }
                Node::Leaf { counts } => return counts,
            }
        }
    }

    /// Positive fraction of the leaf the row lands in.
    pub fn positive_fraction(&self, value: impl Fn(usize) -> u32) -> f64 {
        let [neg, pos] = self.leaf_for(value);
        f64::from(pos) / f64::from(neg + pos)
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
                Node::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub n_trees: usize,
    pub max_depth: usize,
    pub feature_subsample: f64,
    pub seed: u64,
    pub n_features: usize,
}

impl ForestModel {
    /// Mean positive leaf fraction over the trees for a dense count row.
    pub fn score_article(&self, row: &[u32]) -> Result<f64, DatasetError> {
        if row.len() != self.n_features {
            return Err(DatasetError::DimensionMismatch { expected: self.n_features, got: row.len() });
        }
        Ok(self.mean_fraction(|f| row[f]))
    }

    pub fn score_sparse(&self, row: &SparseRow) -> Result<f64, DatasetError> {
        if let Some(&(col, _)) = row.entries().last() {
            if col >= self.n_features {
                return Err(DatasetError::DimensionMismatch { expected: self.n_features, got: col + 1 });
            }
        }
        Ok(self.mean_fraction(|f| row.get(f)))
    }

    fn mean_fraction(&self, value: impl Fn(usize) -> u32 + Copy) -> f64 {
        self.trees.iter().map(|t| t.positive_fraction(value)).sum::<f64>() / self.trees.len() as f64
    }
}

fn class_index(label: Label, row: usize) -> Result<usize, DatasetError> {
    match label {
        Label::Negative => Ok(0),
        Label::Positive => Ok(1),
        Label::Unlabeled => Err(DatasetError::UnlabeledRow(row)),
    }
}

/// Train on every row of `tf`.
pub fn train_forest(tf: &TfMatrix, labels: &[Label], params: &ForestParams) -> Result<ForestModel, DatasetError> {
    if labels.len() != tf.n_rows() {
        return Err(DatasetError::LabelMismatch { labels: labels.len(), rows: tf.n_rows() });
    }
    let rows: Vec<usize> = (0..tf.n_rows()).collect();
    train_forest_on(tf, &rows, labels, params)
}

/// Train on the listed rows of `tf`, `labels[i]` belonging to `rows[i]`.
pub fn train_forest_on(
    tf: &TfMatrix,
    rows: &[usize],
    labels: &[Label],
    params: &ForestParams,
) -> Result<ForestModel, DatasetError> {
    fit(tf, rows, labels, params, stream::FOREST)
}

pub(crate) fn fit(
    tf: &TfMatrix,
    rows: &[usize],
    labels: &[Label],
    params: &ForestParams,
    stream_name: &str,
) -> Result<ForestModel, DatasetError> {
    if labels.len() != rows.len() {
        return Err(DatasetError::LabelMismatch { labels: labels.len(), rows: rows.len() });
    }
    if rows.is_empty() {
        return Err(DatasetError::EmptyTraining);
    }
    if params.n_trees == 0 {
        return Err(DatasetError::InvalidParams("n_trees must be at least 1".into()));
    }
    let classes: Vec<usize> = labels.iter().enumerate().map(|(i, &l)| class_index(l, i)).collect::<Result<_, _>>()?;
    if classes.iter().all(|&c| c == classes[0]) {
        return Err(DatasetError::SingleClass);
    }
    let m = tf.n_cols();
    let per_split = match params.feature_subsample {
        None => (m as f64).sqrt().ceil() as usize,
        Some(f) if f > 0.0 && f <= 1.0 => ((f * m as f64).ceil() as usize).max(1),
        Some(f) => return Err(DatasetError::InvalidParams(format!("feature_subsample {f} outside (0, 1]"))),
    }
    .min(m);

    // nonzero counts of each feature, by position in `rows`
    let mut columns: Vec<Vec<(usize, u32)>> = vec![Vec::new(); m];
    for (pos, &r) in rows.iter().enumerate() {
        for &(col, count) in tf.row(r).entries() {
            columns[col].push((pos, count));
        }
    }

    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::substream(params.seed, stream_name, t as u64);
            let sample: Vec<usize> = (0..rows.len()).map(|_| rng.random_range(0..rows.len())).collect();
            let mut builder = TreeBuilder {
                tf,
                rows,
                columns: &columns,
                classes: &classes,
                per_split,
                max_depth: params.max_depth,
                rng,
                nodes: Vec::new(),
                features: (0..m).collect(),
                multiplicity: vec![0; rows.len()],
            };
            builder.grow(sample, 0);
            Tree { nodes: builder.nodes }
        })
        .collect();

    Ok(ForestModel {
        trees,
        n_trees: params.n_trees,
        max_depth: params.max_depth,
        feature_subsample: if m == 0 { 0.0 } else { per_split as f64 / m as f64 },
        seed: params.seed,
        n_features: m,
    })
}

fn gini(counts: [u32; 2]) -> f64 {
    let n = f64::from(counts[0] + counts[1]);
    if n == 0.0 {
        return 0.0;
    }
    let p = f64::from(counts[1]) / n;
    2.0 * p * (1.0 - p)
}

struct TreeBuilder<'a> {
    tf: &'a TfMatrix,
    rows: &'a [usize],
    columns: &'a [Vec<(usize, u32)>],
    classes: &'a [usize],
    per_split: usize,
    max_depth: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    features: Vec<usize>,
    /// Copies of each training position in the node being split.
    multiplicity: Vec<u32>,
}

struct Candidate {
    feature: usize,
    threshold: u32,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, sample: &[usize]) -> [u32; 2] {
        let mut c = [0u32; 2];
        for &s in sample {
            c[self.classes[s]] += 1;
        }
        c
    }

    fn value(&self, s: usize, feature: usize) -> u32 {
        self.tf.get(self.rows[s], feature)
    }

    /// Best threshold on one feature, or `None` if it is constant here.
    /// Reads only the feature's nonzero entries; `multiplicity` must hold
    /// the node's sample.
    fn best_threshold(&self, total: [u32; 2], feature: usize) -> Option<Candidate> {
        let mut nonzero: Vec<(u32, usize, u32)> = self.columns[feature]
            .iter()
            .filter(|&&(pos, _)| self.multiplicity[pos] > 0)
            .map(|&(pos, c)| (c, self.classes[pos], self.multiplicity[pos]))
            .collect();
        nonzero.sort_unstable();
        let mut left = total;
        for &(_, k, w) in &nonzero {
            left[k] -= w;
        }
        // `left` now counts the zeros
        let mut values: Vec<u32> = Vec::with_capacity(nonzero.len() + 1);
        let mut lefts: Vec<[u32; 2]> = Vec::with_capacity(nonzero.len() + 1);
        if left[0] + left[1] > 0 {
            values.push(0);
            lefts.push(left);
        }
        for (i, &(c, k, w)) in nonzero.iter().enumerate() {
            left[k] += w;
            if nonzero.get(i + 1).is_none_or(|next| next.0 != c) {
                values.push(c);
                lefts.push(left);
            }
        }
        if values.len() < 2 {
            return None;
        }
        let n = f64::from(total[0] + total[1]);
        let mut best: Option<Candidate> = None;
        for (&value, &l) in values.iter().zip(&lefts).take(values.len() - 1) {
            let right = [total[0] - l[0], total[1] - l[1]];
            let nl = f64::from(l[0] + l[1]);
            let impurity = (nl * gini(l) + (n - nl) * gini(right)) / n;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                best = Some(Candidate { feature, threshold: value, impurity });
            }
        }
        best
    }

    /// Try `per_split` randomly drawn features; if all are constant on
    /// this sample, keep drawing until one is not.
    fn choose_split(&mut self, sample: &[usize], total: [u32; 2]) -> Option<Candidate> {
        for &s in sample {
            self.multiplicity[s] += 1;
        }
        let m = self.features.len();
        let mut best: Option<Candidate> = None;
        for i in 0..m {
            if i >= self.per_split && best.is_some() {
                break;
            }
            let j = self.rng.random_range(i..m);
            self.features.swap(i, j);
            if let Some(c) = self.best_threshold(total, self.features[i]) {
                if best.as_ref().is_none_or(|b| c.impurity < b.impurity) {
                    best = Some(c);
                }
            }
        }
        for &s in sample {
            self.multiplicity[s] = 0;
        }
        best
    }

    fn grow(&mut self, sample: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&sample);
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf { counts });
        if depth >= self.max_depth || counts[0] == 0 || counts[1] == 0 {
            return at;
        }
        let Some(split) = self.choose_split(&sample, counts) else {
            return at;
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            sample.iter().partition(|&&s| self.value(s, split.feature) <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[at] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        at
    }
}
