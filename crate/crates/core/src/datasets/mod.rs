//! Topic datasets grown from a small coded seed set: a first forest picks
//! confident positives and hard negatives, a second forest trained on those
//! labels the whole universe.

mod forest;

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use serde::{Deserialize, Serialize};

pub use forest::{train_forest, train_forest_on, ForestModel, ForestParams, Node, Tree};

use crate::corpus::{Corpus, CorpusError, Label, NgramOrders, TfMatrix, Tokenizer};
use crate::newscycle::AnnualFeatureSeries;
use crate::rng::{self, stream};
use crate::stats::median;

/// Cap on the number of articles mined per class for the second stage.
pub const MINE_CAP: usize = 1000;

const STAGE_TWO_STREAM: &str = "forest/stage2";

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("training labels contain a single class")]
    SingleClass,
    #[error("no training rows")]
    EmptyTraining,
    #[error("{labels} labels for {rows} rows")]
    LabelMismatch { labels: usize, rows: usize },
    #[error("row {0} is unlabeled")]
    UnlabeledRow(usize),
    #[error("row has {got} features, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid forest parameters: {0}")]
    InvalidParams(String),
    #[error("article {0:?} is not in the universal corpus")]
    UnknownArticle(String),
    #[error("no year has below-median volume")]
    NoQuiescentYears,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

/// Articles scored below 0.5, highest score first (ties by id), at most `m`.
pub fn mine_hard_negatives(
    model: &ForestModel,
    unlabeled: &Corpus,
    tf: &TfMatrix,
    m: usize,
) -> Result<Corpus, DatasetError> {
    let mut by_id = unlabeled.articles().to_vec();
    by_id.sort_by(|a, b| a.id.cmp(&b.id));
    let by_id = Corpus::new(by_id)?;
    let scored = score_corpus(model, &by_id, tf)?;
    let picked = top_by_score(&scored, |s| s < 0.5, m);
    Ok(Corpus::new(picked.iter().map(|&i| by_id.articles()[i].clone()).collect())?)
}

/// Score every article of `corpus` through its row in `tf`.
pub fn score_corpus(model: &ForestModel, corpus: &Corpus, tf: &TfMatrix) -> Result<Vec<f64>, DatasetError> {
    corpus
        .articles()
        .iter()
        .map(|a| {
            let r = tf.row_index(&a.id).ok_or_else(|| DatasetError::UnknownArticle(a.id.clone()))?;
            model.score_sparse(tf.row(r))
        })
        .collect()
}

/// Indices of the `m` highest scores passing `keep`, ties broken by
/// position (callers pass id-sorted slices).
fn top_by_score(scores: &[f64], keep: impl Fn(f64) -> bool, m: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| keep(scores[i])).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    idx.truncate(m);
    idx
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapParams {
    pub forest: ForestParams,
    /// Feature n-grams; unigrams by default, since a large bigram
    /// vocabulary thins out the per-split feature draw.
    pub orders: NgramOrders,
    pub min_df: usize,
    /// Train the second forest on the seeds as well as the mined articles.
    pub include_seeds_in_stage2: bool,
}

impl Default for BootstrapParams {
    fn default() -> Self {
        Self { forest: ForestParams::default(), orders: NgramOrders::UNIGRAMS, min_df: 2, include_seeds_in_stage2: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed_size: usize,
    pub seed_positives: usize,
    pub seed_negatives: usize,
    pub extra_negatives: usize,
    /// Stage-one predicted positives / negatives among non-seed articles.
    pub k_pos: usize,
    pub k_neg: usize,
    pub m_pos: usize,
    pub m_neg: usize,
    pub stage2_training_size: usize,
    pub include_seeds_in_stage2: bool,
    pub final_positives: usize,
    pub final_negatives: usize,
    /// Universal articles the first forest scores above 0.5.
    pub stage1_positive_ids: Vec<String>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicDataset {
    pub positives: Corpus,
    pub negatives: Corpus,
    pub provenance: Provenance,
}

/// Two-stage bootstrap over `universal`.
///
/// `seed_labels` maps article ids to their coded class; `extra_negatives`
/// (for example articles from quiescent years) join the first-stage
/// training set as negatives.
pub fn bootstrap_dataset(
    seed_labels: &BTreeMap<String, Label>,
    extra_negatives: &BTreeSet<String>,
    universal: &Corpus,
    tokenizer: &Tokenizer,
    params: &BootstrapParams,
) -> Result<TopicDataset, DatasetError> {
    let mut training: BTreeMap<&str, Label> = BTreeMap::new();
    for id in extra_negatives {
        training.insert(id, Label::Negative);
    }
    for (id, &label) in seed_labels {
        if label == Label::Unlabeled {
            return Err(DatasetError::UnlabeledRow(0));
        }
        training.insert(id, label);
    }
    for id in training.keys() {
        if universal.get(id).is_none() {
            return Err(DatasetError::UnknownArticle(id.to_string()));
        }
    }

    let mut articles = universal.articles().to_vec();
    articles.sort_by(|a, b| a.id.cmp(&b.id));
    let universal = Corpus::new(articles)?;
    let tf = TfMatrix::build(&universal, tokenizer, params.orders, params.min_df)?;
    let row_of = |id: &str| tf.row_index(id).ok_or_else(|| DatasetError::UnknownArticle(id.to_string()));

    // stage one
    let rows: Vec<usize> = training.keys().map(|id| row_of(id)).collect::<Result<_, _>>()?;
    let labels: Vec<Label> = training.values().copied().collect();
    let stage1 = forest::fit(&tf, &rows, &labels, &params.forest, stream::FOREST)?;
    let scores1: Vec<f64> = tf.rows().iter().map(|r| stage1.score_sparse(r)).collect::<Result<_, _>>()?;

    let unlabeled: Vec<usize> = (0..tf.n_rows()).filter(|&r| !training.contains_key(tf.article_ids()[r].as_str())).collect();
    let unlabeled_scores: Vec<f64> = unlabeled.iter().map(|&r| scores1[r]).collect();
    let k_pos = unlabeled_scores.iter().filter(|&&s| s > 0.5).count();
    let k_neg = unlabeled_scores.iter().filter(|&&s| s < 0.5).count();
    let (m_pos, m_neg) = (k_pos.min(MINE_CAP), k_neg.min(MINE_CAP));
    let mined_pos = top_by_score(&unlabeled_scores, |s| s > 0.5, m_pos);
    let mined_neg = top_by_score(&unlabeled_scores, |s| s < 0.5, m_neg);

    // stage two
    let mut stage2_rows: Vec<usize> = mined_pos.iter().chain(&mined_neg).map(|&i| unlabeled[i]).collect();
    let mut stage2_labels: Vec<Label> =
        mined_pos.iter().map(|_| Label::Positive).chain(mined_neg.iter().map(|_| Label::Negative)).collect();
    if params.include_seeds_in_stage2 {
        stage2_rows.extend(&rows);
        stage2_labels.extend(&labels);
    }
    let stage2 = forest::fit(&tf, &stage2_rows, &stage2_labels, &params.forest, STAGE_TWO_STREAM)?;

    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    for (r, article) in universal.articles().iter().enumerate() {
        if stage2.score_sparse(tf.row(r))? > 0.5 {
            positives.push(article.clone());
        } else {
            negatives.push(article.clone());
        }
    }
    let provenance = Provenance {
        seed_size: seed_labels.len(),
        seed_positives: seed_labels.values().filter(|&&l| l == Label::Positive).count(),
        seed_negatives: seed_labels.values().filter(|&&l| l == Label::Negative).count(),
        extra_negatives: extra_negatives.len(),
        k_pos,
        k_neg,
        m_pos,
        m_neg,
        stage2_training_size: stage2_rows.len(),
        include_seeds_in_stage2: params.include_seeds_in_stage2,
        final_positives: positives.len(),
        final_negatives: negatives.len(),
        stage1_positive_ids: (0..tf.n_rows()).filter(|&r| scores1[r] > 0.5).map(|r| tf.article_ids()[r].clone()).collect(),
        seed: params.forest.seed,
    };
    Ok(TopicDataset { positives: Corpus::new(positives)?, negatives: Corpus::new(negatives)?, provenance })
}

/// Years with volume at or below the median that are not the busiest
/// year. Returns an empty set when every year has the same volume.
pub fn quiescent_years(series: &AnnualFeatureSeries) -> BTreeSet<i32> {
    let volumes: Vec<f64> = series.volume.iter().map(|&v| v as f64).collect();
    let (Some(med), Some(&max)) = (median(&volumes), series.volume.iter().max()) else {
        return BTreeSet::new();
    };
    series
        .years
        .iter()
        .zip(&series.volume)
        .filter(|&(_, &v)| (v as f64) <= med && v < max)
        .map(|(&y, _)| y)
        .collect()
}

/// Draw `n` articles (seeded, without replacement) from quiescent years.
pub fn quiescent_negatives(
    series: &AnnualFeatureSeries,
    universal: &Corpus,
    n: usize,
    seed: u64,
) -> Result<Corpus, DatasetError> {
    let years = quiescent_years(series);
    if years.is_empty() {
        return Err(DatasetError::NoQuiescentYears);
    }
    let mut pool: Vec<_> = universal.articles().iter().filter(|a| years.contains(&a.year())).collect();
    pool.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = rng::substream(seed, stream::SAMPLING, 0);
    let mut picked: Vec<usize> = index::sample(&mut rng, pool.len(), n.min(pool.len())).into_vec();
    picked.sort_unstable();
    Ok(Corpus::new(picked.into_iter().map(|i| pool[i].clone()).collect())?)
}
