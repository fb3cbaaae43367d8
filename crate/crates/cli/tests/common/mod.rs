#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::{Command, Output};

use chrono::NaiveDate;
use newsframe_core::corpus::parse_date;
use newsframe_core::{Article, Corpus, Label};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn day(raw: &str) -> NaiveDate {
    parse_date(raw).expect("valid test date")
}

pub fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newsframe"))
        .args(args)
        .env_remove("NYT_API_KEY")
        .env_remove("GUARDIAN_API_KEY")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn write_corpus(path: &Path, corpus: &Corpus) {
    newsframe_ingest::save_corpus(corpus, path).unwrap();
}

fn filler(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    (0..n).map(|_| format!("w{}", rng.random_range(0..300))).collect()
}

pub const MARKER: &str = "quorum";
const TOPICAL: [&str; 8] = ["ballot", "senate", "filibuster", "caucus", "whip", "cloture", "amendment", "committee"];

/// Articles belong to the topic exactly when they contain the marker;
/// members also draw topical words at `topical_rate`.
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
        let date = day(&format!("{}-{:02}-{:02}", 2010 + i % 5, 1 + i % 12, 1 + i % 28));
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

pub fn write_seeds(path: &Path, seeds: &BTreeMap<String, Label>) {
    let mut text = String::from("article_id,label\n");
    for (id, l) in seeds {
        text += &format!("{id},{}\n", if *l == Label::Positive { "positive" } else { "negative" });
    }
    std::fs::write(path, text).unwrap();
}

pub fn precision_recall(predicted: &BTreeSet<String>, truth: &BTreeSet<String>) -> (f64, f64) {
    let hits = predicted.intersection(truth).count() as f64;
    let precision = if predicted.is_empty() { 1.0 } else { hits / predicted.len() as f64 };
    let recall = if truth.is_empty() { 1.0 } else { hits / truth.len() as f64 };
    (precision, recall)
}

/// Two period corpora; the later one introduces its own vocabulary.
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
                let date = day(&format!("{year}-{:02}-{:02}", 1 + i % 12, 1 + i % 28));
                Article::new(format!("{prefix}{i:03}"), date, sentences.join(". ") + ".")
            })
            .collect()
    };
    let t1 = make(&mut rng, "a", 2010, &early);
    let t2 = make(&mut rng, "b", 2014, &late);
    (Corpus::new(t1).unwrap(), Corpus::new(t2).unwrap())
}

/// Annual feature CSV for 14 years where each spike year jumps in volume
/// and MNC after a calm year.
pub fn spike_series_csv(spikes: &[usize]) -> String {
    let mut text = String::from("year,volume,mean_sentiment,mnc,legislative\n");
    for y in 0..14 {
        let spike = spikes.contains(&y);
        let (volume, mnc) = if spike { (200, 0.6) } else { (20, 0.1) };
        text += &format!("{},{volume},0.1,{mnc},{}\n", 2000 + y, u8::from(spike));
    }
    text
}

/// Laws CSV matching `spike_series_csv` for the given topics.
pub fn laws_csv(topics: &[(&str, &[usize])]) -> String {
    let mut text = String::from("topic,year,count\n");
    for (topic, spikes) in topics {
        for &y in spikes.iter() {
            text += &format!("{topic},{},1\n", 2000 + y);
        }
    }
    text
}

pub const SPIKES: [(&str, &[usize]); 3] = [("alpha", &[3, 7, 11]), ("beta", &[2, 6, 10]), ("gamma", &[4, 9, 12])];

pub fn write_spike_series(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    for (topic, spikes) in SPIKES {
        std::fs::write(dir.join(format!("{topic}.csv")), spike_series_csv(spikes)).unwrap();
    }
}

/// A small corpus spanning `years`, with a few articles per year.
pub fn yearly_corpus(seed: u64, years: &[(i32, usize)]) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = ["good", "bad", "privacy", "law", "court", "data", "happy", "terrible", "agency"];
    let mut articles = Vec::new();
    for &(year, n) in years {
        for i in 0..n {
            let body: Vec<&str> = (0..12).map(|_| words[rng.random_range(0..words.len())]).collect();
            let date = day(&format!("{year}-{:02}-15", 1 + i % 12));
            articles.push(Article::new(format!("y{year}-{i}"), date, body.join(" ") + "."));
        }
    }
    Corpus::new(articles).unwrap()
}
