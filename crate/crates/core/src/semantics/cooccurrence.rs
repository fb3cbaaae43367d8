use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::SemanticsError;
use crate::corpus::{Corpus, Tokenizer};

/// Symmetric windowed co-occurrence counts over a unigram vocabulary.
///
/// The diagonal is always zero: a token never co-occurs with itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CooccurrenceMatrix {
    vocab: Vec<String>,
    counts: Vec<f64>,
    window: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VocabLimit {
    /// Keep at most this many tokens, most frequent first. `None` keeps all.
    pub max_vocab: Option<usize>,
    /// Tokens kept regardless of the cap (keyword tokens, typically).
    pub required: BTreeSet<String>,
}

impl CooccurrenceMatrix {
    /// Count, for each pair of tokens at most `window` positions apart in
    /// the same sentence, one co-occurrence in both symmetric cells.
    pub fn build(
        corpus: &Corpus,
        tokenizer: &Tokenizer,
        window: usize,
        limit: &VocabLimit,
    ) -> Result<Self, SemanticsError> {
        if window == 0 {
            return Err(SemanticsError::ZeroWindow);
        }
        let docs: Vec<Vec<Vec<String>>> =
            corpus.articles().iter().map(|a| tokenizer.sentences(&a.text())).collect();

        let mut freq: HashMap<&str, u64> = HashMap::new();
        for tok in docs.iter().flatten().flatten() {
            *freq.entry(tok.as_str()).or_insert(0) += 1;
        }
        if freq.is_empty() {
            return Err(SemanticsError::EmptyVocabulary);
        }
        let mut vocab: Vec<String> = match limit.max_vocab {
            Some(cap) if cap < freq.len() => {
                let mut ranked: Vec<(&str, u64)> = freq.iter().map(|(&t, &n)| (t, n)).collect();
                ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
                let mut keep: BTreeSet<String> =
                    ranked.iter().take(cap).map(|(t, _)| t.to_string()).collect();
                keep.extend(limit.required.iter().filter(|t| freq.contains_key(t.as_str())).cloned());
                keep.into_iter().collect()
            }
            _ => freq.keys().map(|t| t.to_string()).collect(),
        };
        vocab.sort();
        let index: HashMap<&str, usize> =
            vocab.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();

        let v = vocab.len();
        let mut counts = vec![0.0; v * v];
        for sentence in docs.iter().flatten() {
            let ids: Vec<Option<usize>> = sentence.iter().map(|t| index.get(t.as_str()).copied()).collect();
            for (i, a) in ids.iter().enumerate() {
                let Some(a) = *a else { continue };
                for b in ids.iter().skip(i + 1).take(window).flatten() {
                    if a != *b {
                        counts[a * v + b] += 1.0;
                        counts[b * v + a] += 1.0;
                    }
                }
            }
        }
        Ok(Self { vocab, counts, window })
    }

    /// Wrap a precomputed symmetric table (row-major, `vocab.len()` square).
    pub fn from_counts(vocab: Vec<String>, counts: Vec<f64>, window: usize) -> Result<Self, SemanticsError> {
        let v = vocab.len();
        if v == 0 {
            return Err(SemanticsError::EmptyVocabulary);
        }
        if counts.len() != v * v {
            return Err(SemanticsError::DimensionMismatch { expected: v * v, got: counts.len() });
        }
        for i in 0..v {
            for j in 0..i {
                if counts[i * v + j] != counts[j * v + i] {
                    return Err(SemanticsError::Asymmetric(i, j));
                }
            }
        }
        Ok(Self { vocab, counts, window })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    /// Row-major `V × V` counts.
    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn get(&self, a: &str, b: &str) -> f64 {
        let ia = self.vocab.binary_search_by(|t| t.as_str().cmp(a));
        let ib = self.vocab.binary_search_by(|t| t.as_str().cmp(b));
        match (ia, ib) {
            (Ok(i), Ok(j)) => self.counts[i * self.vocab.len() + j],
            _ => 0.0,
        }
    }

    /// Positive pointwise mutual information of the counts.
    pub fn ppmi(&self) -> Vec<f64> {
        let v = self.vocab.len();
        let row_sums: Vec<f64> = self.counts.chunks(v).map(|r| r.iter().sum()).collect();
        let total: f64 = row_sums.iter().sum();
        let mut out = vec![0.0; v * v];
        if total == 0.0 {
            return out;
        }
        for i in 0..v {
            for j in 0..v {
                let c = self.counts[i * v + j];
                if c > 0.0 {
                    let pmi = (c * total / (row_sums[i] * row_sums[j])).ln();
                    out[i * v + j] = pmi.max(0.0);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Article;
    use chrono::NaiveDate;

    fn one_doc(body: &str) -> Corpus {
        let d = NaiveDate::from_ymd_opt(2014, 1, 1).unwrap();
        Corpus::new(vec![Article::new("d", d, body)]).unwrap()
    }

    fn build(body: &str, window: usize) -> CooccurrenceMatrix {
        CooccurrenceMatrix::build(&one_doc(body), &Tokenizer::without_stopwords(), window, &VocabLimit::default())
            .unwrap()
    }

    #[test]
    fn adjacent_pair() {
        let m = build("a b", 1);
        assert_eq!(m.get("a", "b"), 1.0);
        assert_eq!(m.get("b", "a"), 1.0);
        assert_eq!(m.get("a", "a"), 0.0);
    }

    #[test]
    fn window_two_reaches_across() {
        let m = build("a b c", 2);
        assert_eq!((m.get("a", "b"), m.get("b", "c"), m.get("a", "c")), (1.0, 1.0, 1.0));
    }

    #[test]
    fn window_one_stops() {
        let m = build("a b c", 1);
        assert_eq!(m.get("a", "c"), 0.0);
        assert_eq!(m.get("a", "b"), 1.0);
    }

    #[test]
    fn sentences_are_separate_windows() {
        let m = build("a b. c d", 5);
        assert_eq!(m.get("b", "c"), 0.0);
        assert_eq!(m.get("c", "d"), 1.0);
    }

    #[test]
    fn repeated_token_skips_diagonal() {
        let m = build("a a b", 2);
        assert_eq!(m.get("a", "a"), 0.0);
        assert_eq!(m.get("a", "b"), 2.0);
    }

    #[test]
    fn cap_keeps_required_tokens() {
        let limit = VocabLimit {
            max_vocab: Some(1),
            required: ["z".to_string()].into_iter().collect(),
        };
        let m = CooccurrenceMatrix::build(&one_doc("a a a z b"), &Tokenizer::without_stopwords(), 2, &limit)
            .unwrap();
        assert_eq!(m.vocab(), ["a", "z"]);
    }

    #[test]
    fn empty_and_invalid() {
        let t = Tokenizer::default();
        let limit = VocabLimit::default();
        assert!(matches!(
            CooccurrenceMatrix::build(&one_doc("the of and"), &t, 2, &limit),
            Err(SemanticsError::EmptyVocabulary)
        ));
        assert!(matches!(
            CooccurrenceMatrix::build(&one_doc("word"), &t, 0, &limit),
            Err(SemanticsError::ZeroWindow)
        ));
    }

    #[test]
    fn ppmi_is_nonnegative_and_symmetric() {
        let m = build("a b c a d b c e a", 3);
        let p = m.ppmi();
        let v = m.len();
        for i in 0..v {
            for j in 0..v {
                assert!(p[i * v + j] >= 0.0);
                assert_eq!(p[i * v + j], p[j * v + i]);
            }
        }
    }
}
