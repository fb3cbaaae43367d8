#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use newsframe_core::{Article, Corpus, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MARKER: &str = "quorum";
const TOPICAL: [&str; 8] = ["ballot", "senate", "filibuster", "caucus", "whip", "cloture", "amendment", "committee"];

fn filler(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| format!("w{}", rng.random_range(0..300))).collect()
}

/// A universe where an article belongs to the topic exactly when it
/// contains the marker term. Topic articles also draw on a few topical
/// words that never appear outside the topic.
pub struct Universe {
    pub corpus: Corpus,
    pub members: BTreeSet<String>,
    pub seeds: BTreeMap<String, Label>,
}

pub fn universe(seed: u64, n: usize, member_share: f64, topical_rate: f64, seeds_per_class: usize) -> Universe {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut articles = Vec::with_capacity(n);
    let mut members = BTreeSet::new();
    for i in 0..n {
        let id = format!("u{i:05}");
        let mut words = filler(&mut rng, 25);
        if rng.random_bool(member_share) {
            for _ in 0..rng.random_range(1..4) {
                let at = rng.random_range(0..=words.len());
                words.insert(at, MARKER.to_string());
            }
            for t in TOPICAL {
                if rng.random_bool(topical_rate) {
                    let at = rng.random_range(0..=words.len());
                    words.insert(at, t.to_string());
                }
            }
            members.insert(id.clone());
        }
        let date = NaiveDate::from_ymd_opt(2010 + (i % 5) as i32, 1 + (i % 12) as u32, 1 + (i % 28) as u32).unwrap();
        articles.push(Article::new(id, date, words.join(" ") + "."));
    }
    let mut seeds = BTreeMap::new();
    let (mut pos, mut neg) = (0, 0);
    for a in &articles {
        if members.contains(&a.id) && pos < seeds_per_class {
            seeds.insert(a.id.clone(), Label::Positive);
            pos += 1;
        } else if !members.contains(&a.id) && neg < seeds_per_class {
            seeds.insert(a.id.clone(), Label::Negative);
            neg += 1;
        }
    }
    Universe { corpus: Corpus::new(articles).unwrap(), members, seeds }
}

pub fn precision_recall(predicted: &BTreeSet<String>, truth: &BTreeSet<String>) -> (f64, f64) {
    let hits = predicted.intersection(truth).count() as f64;
    let precision = if predicted.is_empty() { 1.0 } else { hits / predicted.len() as f64 };
    let recall = if truth.is_empty() { 1.0 } else { hits / truth.len() as f64 };
    (precision, recall)
}

/// Two period corpora whose later period introduces its own vocabulary.
pub fn period_pair(seed: u64) -> (Corpus, Corpus) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let early = ["budget", "tax", "deficit", "spending", "revenue"];
    let late = ["leak", "snowden", "metadata", "wiretap", "encryption"];
    let make = |rng: &mut ChaCha8Rng, prefix: &str, year: i32, topic: &[&str]| -> Vec<Article> {
        (0..30)
            .map(|i| {
                let mut sentences = Vec::new();
                for _ in 0..3 {
                    let mut words = filler(rng, 6);
                    for _ in 0..2 {
                        let t = topic[rng.random_range(0..topic.len())];
                        let at = rng.random_range(0..=words.len());
                        words.insert(at, t.to_string());
                    }
                    sentences.push(words.join(" "));
                }
                let date = NaiveDate::from_ymd_opt(year, 1 + (i % 12) as u32, 1 + (i % 28) as u32).unwrap();
                Article::new(format!("{prefix}{i:03}"), date, sentences.join(". ") + ".")
            })
            .collect()
    };
    let t1 = make(&mut rng, "a", 2010, &early);
    let t2 = make(&mut rng, "b", 2014, &late);
    (Corpus::new(t1).unwrap(), Corpus::new(t2).unwrap())
}
