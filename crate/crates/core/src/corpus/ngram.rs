use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::CorpusError;

/// A unigram or bigram of normalized tokens.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NGram(Vec<String>);

impl NGram {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let tokens: Vec<String> = tokens.into_iter().map(Into::into).collect();
        debug_assert!((1..=2).contains(&tokens.len()));
        Self(tokens)
    }

    pub fn unigram(token: impl Into<String>) -> Self {
        Self(vec![token.into()])
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for NGram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.join(" "))
    }
}

impl FromStr for NGram {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens: Vec<String> = s.split_whitespace().map(str::to_lowercase).collect();
        if tokens.is_empty() || tokens.len() > 2 {
            return Err(CorpusError::InvalidOrders(vec![tokens.len() as u8]));
        }
        Ok(Self(tokens))
    }
}

impl Serialize for NGram {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NGram {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(d)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Which n-gram orders to extract: a nonempty subset of {1, 2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgramOrders {
    unigrams: bool,
    bigrams: bool,
}

impl NgramOrders {
    pub const UNIGRAMS: Self = Self { unigrams: true, bigrams: false };
    pub const BIGRAMS: Self = Self { unigrams: false, bigrams: true };
    pub const BOTH: Self = Self { unigrams: true, bigrams: true };

    pub fn from_orders(orders: &[u8]) -> Result<Self, CorpusError> {
        if orders.is_empty() || orders.iter().any(|o| !(1..=2).contains(o)) {
            return Err(CorpusError::InvalidOrders(orders.to_vec()));
        }
        Ok(Self {
            unigrams: orders.contains(&1),
            bigrams: orders.contains(&2),
        })
    }

    pub fn orders(&self) -> Vec<u8> {
        let mut v = Vec::with_capacity(2);
        if self.unigrams {
            v.push(1);
        }
        if self.bigrams {
            v.push(2);
        }
        v
    }

    pub fn includes_unigrams(&self) -> bool {
        self.unigrams
    }

    pub fn includes_bigrams(&self) -> bool {
        self.bigrams
    }
}

impl Default for NgramOrders {
    fn default() -> Self {
        Self::BOTH
    }
}

impl Serialize for NgramOrders {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.orders().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NgramOrders {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let orders = Vec::<u8>::deserialize(d)?;
        Self::from_orders(&orders).map_err(serde::de::Error::custom)
    }
}

/// All contiguous n-grams of a single token run, unigrams first, each
/// order in document order.
pub fn extract_ngrams(tokens: &[String], orders: NgramOrders) -> Vec<NGram> {
    let mut out = Vec::new();
    if orders.unigrams {
        out.extend(tokens.iter().map(|t| NGram(vec![t.clone()])));
    }
    if orders.bigrams {
        out.extend(tokens.windows(2).map(|w| NGram(w.to_vec())));
    }
    out
}

/// N-grams of a sentence-split document; bigrams never cross sentences.
pub fn sentence_ngrams(sentences: &[Vec<String>], orders: NgramOrders) -> Vec<NGram> {
    sentences
        .iter()
        .flat_map(|s| extract_ngrams(s, orders))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    fn show(ngrams: &[NGram]) -> Vec<String> {
        ngrams.iter().map(|n| n.to_string()).collect()
    }

    #[test]
    fn unigrams_and_bigrams() {
        let got = extract_ngrams(&toks(&["a", "b", "c"]), NgramOrders::BOTH);
        assert_eq!(show(&got), ["a", "b", "c", "a b", "b c"]);
    }

    #[test]
    fn too_short_for_bigram() {
        assert!(extract_ngrams(&toks(&["a"]), NgramOrders::BIGRAMS).is_empty());
    }

    #[test]
    fn multiplicity_kept() {
        let got = extract_ngrams(&toks(&["a", "a"]), NgramOrders::UNIGRAMS);
        assert_eq!(show(&got), ["a", "a"]);
    }

    #[test]
    fn bigrams_stop_at_sentence_boundaries() {
        let doc = vec![toks(&["leak", "warning"]), toks(&["snowden", "asylum"])];
        let got = sentence_ngrams(&doc, NgramOrders::BIGRAMS);
        assert_eq!(show(&got), ["leak warning", "snowden asylum"]);
    }

    #[test]
    fn orders_validated() {
        assert!(NgramOrders::from_orders(&[]).is_err());
        assert!(NgramOrders::from_orders(&[3]).is_err());
        assert_eq!(NgramOrders::from_orders(&[2, 1]).unwrap(), NgramOrders::BOTH);
    }

    #[test]
    fn ngram_string_form() {
        let n: NGram = "Equality  Index".parse().unwrap();
        assert_eq!(n.tokens(), ["equality", "index"]);
        assert_eq!(serde_json::to_string(&n).unwrap(), "\"equality index\"");
        assert!("".parse::<NGram>().is_err());
    }
}
