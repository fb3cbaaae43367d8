use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{sentence_ngrams, Corpus, CorpusError, NGram, NgramOrders, Tokenizer};

/// Nonzero counts of one article, sorted by column.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseRow {
    entries: Vec<(usize, u32)>,
}

impl SparseRow {
    pub fn from_dense(counts: &[u32]) -> Self {
        Self {
            entries: counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(i, &c)| (i, c))
                .collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    pub fn get(&self, col: usize) -> u32 {
        self.entries
            .binary_search_by_key(&col, |&(c, _)| c)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    pub fn to_dense(&self, width: usize) -> Vec<u32> {
        let mut out = vec![0; width];
        for &(c, n) in &self.entries {
            out[c] = n;
        }
        out
    }
}

/// Article × n-gram term-frequency table.
///
/// Rows are stored sparsely; `vocab` is sorted and unique.
#[derive(Debug, Clone, PartialEq)]
pub struct TfMatrix {
    vocab: Vec<NGram>,
    rows: Vec<SparseRow>,
    article_ids: Vec<String>,
}

impl TfMatrix {
    /// Count n-grams per article, keeping those whose document frequency
    /// is at least `min_df`.
    pub fn build(
        corpus: &Corpus,
        tokenizer: &Tokenizer,
        orders: NgramOrders,
        min_df: usize,
    ) -> Result<Self, CorpusError> {
        if corpus.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        if min_df == 0 {
            return Err(CorpusError::InvalidMinDf);
        }
        let per_article: Vec<HashMap<NGram, u32>> = corpus
            .articles()
            .par_iter()
            .map(|a| {
                let mut counts = HashMap::new();
                for g in sentence_ngrams(&tokenizer.sentences(&a.text()), orders) {
                    *counts.entry(g).or_insert(0u32) += 1;
                }
                counts
            })
            .collect();

        let mut df: BTreeMap<&NGram, usize> = BTreeMap::new();
        for counts in &per_article {
            for g in counts.keys() {
                *df.entry(g).or_insert(0) += 1;
            }
        }
        let vocab: Vec<NGram> = df
            .into_iter()
            .filter(|&(_, n)| n >= min_df)
            .map(|(g, _)| g.clone())
            .collect();
        if vocab.is_empty() {
            return Err(CorpusError::EmptyVocabulary);
        }
        let index: HashMap<&NGram, usize> = vocab.iter().enumerate().map(|(i, g)| (g, i)).collect();

        let rows = per_article
            .iter()
            .map(|counts| {
                let mut entries: Vec<(usize, u32)> = counts
                    .iter()
                    .filter_map(|(g, &n)| index.get(g).map(|&i| (i, n)))
                    .collect();
                entries.sort_unstable_by_key(|&(i, _)| i);
                SparseRow { entries }
            })
            .collect();

        Ok(Self {
            vocab,
            rows,
            article_ids: corpus.articles().iter().map(|a| a.id.clone()).collect(),
        })
    }

    /// Assemble a matrix from dense rows; used for synthetic data.
    pub fn from_dense(vocab: Vec<NGram>, article_ids: Vec<String>, rows: &[Vec<u32>]) -> Self {
        assert_eq!(article_ids.len(), rows.len(), "one id per row");
        assert!(rows.iter().all(|r| r.len() == vocab.len()), "row width must equal vocab size");
        Self {
            vocab,
            rows: rows.iter().map(|r| SparseRow::from_dense(r)).collect(),
            article_ids,
        }
    }

    pub fn vocab(&self) -> &[NGram] {
        &self.vocab
    }

    pub fn article_ids(&self) -> &[String] {
        &self.article_ids
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.vocab.len()
    }

    pub fn row(&self, r: usize) -> &SparseRow {
        &self.rows[r]
    }

    pub fn rows(&self) -> &[SparseRow] {
        &self.rows
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.rows[r].get(c)
    }

    pub fn dense_row(&self, r: usize) -> Vec<u32> {
        self.rows[r].to_dense(self.n_cols())
    }

    pub fn column_index(&self, ngram: &NGram) -> Option<usize> {
        self.vocab.binary_search(ngram).ok()
    }

    pub fn row_index(&self, article_id: &str) -> Option<usize> {
        self.article_ids.iter().position(|id| id == article_id)
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0u64; self.n_cols()];
        for row in &self.rows {
            for &(c, n) in row.entries() {
                sums[c] += u64::from(n);
            }
        }
        sums
    }

    pub fn document_frequencies(&self) -> Vec<usize> {
        let mut df = vec![0usize; self.n_cols()];
        for row in &self.rows {
            for &(c, _) in row.entries() {
                df[c] += 1;
            }
        }
        df
    }
}
