use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use newsframe_core::corpus::parse_date;
use newsframe_core::datasets::bootstrap_dataset;
use newsframe_core::framing::detect_framing_change;
use newsframe_core::legislation::{change_series, fit_model, loo_evaluate, FeatureDiffSeries, LegislationModel};
use newsframe_core::newscycle::{annual_features, Lexicon};
use newsframe_core::{DateRange, Tokenizer};
use newsframe_ingest::{fetch_topic, save_corpus, AdapterName, FetchJob, SourceAdapter, UreqTransport};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{self, Inputs};

fn required<'a>(slot: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, CliError> {
    slot.as_deref()
        .ok_or_else(|| CliError::Input(format!("missing --{flag} (or paths.{} in the config)", flag.replace('-', "_"))))
}

/// Report written next to a single output file: `x.csv` gets `x.run.json`.
fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("run.json")
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "topic".into())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "NA".into())
}

pub fn fetch(c: &RunConfig, adapter: &str, query: &str, from: &str, to: &str) -> Result<String, CliError> {
    let name: AdapterName = adapter.parse()?;
    let day = |raw: &str| parse_date(raw).ok_or_else(|| CliError::Input(format!("bad date {raw:?}")));
    let period = DateRange::new(day(from)?, day(to)?)
        .ok_or_else(|| CliError::Input(format!("--from {from} is after --to {to}")))?;
    let out = required(&c.paths.out, "out")?;
    let cache_dir = c.paths.cache_dir.clone().unwrap_or_else(|| PathBuf::from("cache"));
    let mut job = FetchJob::new(SourceAdapter::for_name(name), query, period, c.max_pages, cache_dir);
    job.requests_per_second = c.requests_per_second;
    job.topic = c.topic.clone();

    let outcome = fetch_topic(&job, &mut UreqTransport::default())?;
    save_corpus(&outcome.corpus, out).map_err(|e| CliError::Runtime(format!("{}: {e}", out.display())))?;
    if outcome.corpus.is_empty() {
        eprintln!("warning: the query matched no articles");
    }
    let s = &outcome.stats;
    let mut inputs = Inputs::default();
    inputs.add("cache", &outcome.cache_path.join(newsframe_ingest::cache::CORPUS_FILE))?;
    let stats = json!({
        "adapter": name.slug(),
        "query": query,
        "period": period,
        "articles": outcome.corpus.len(),
        "requests": s.requests,
        "pages_from_cache": s.pages_from_cache,
        "corpus_cache_hit": s.corpus_cache_hit,
        "total_hits": s.total_hits,
        "records": s.records,
        "skipped_records": s.skipped_records,
        "duplicates": s.duplicates,
        "out_of_period": s.out_of_period,
    });
    io::write_report(&sidecar(out), "fetch", c, &inputs, stats)?;
    Ok(format!(
        "fetch adapter={} articles={} requests={} cache_hit={}",
        name.slug(),
        outcome.corpus.len(),
        s.requests,
        s.corpus_cache_hit
    ))
}

#[derive(Serialize)]
struct KeywordRow {
    rank: usize,
    ngram: String,
    ig_bits: f64,
    document_frequency: usize,
}

#[derive(Serialize)]
struct CoordRow {
    ngram: String,
    x: f64,
    y: f64,
}

pub fn framing(c: &RunConfig) -> Result<String, CliError> {
    let (p1, p2) = (required(&c.paths.t1, "t1")?, required(&c.paths.t2, "t2")?);
    let out = required(&c.paths.out, "out")?;
    let mut inputs = Inputs::default();
    inputs.add("t1", p1)?;
    inputs.add("t2", p2)?;
    let (t1, t2) = (io::load_corpus(p1)?, io::load_corpus(p2)?);
    let topic = c.topic.clone().unwrap_or_else(|| "topic".into());

    let report = detect_framing_change(&topic, &t1, &t2, &Tokenizer::default(), &c.framing())?;

    io::write_report(&out.join("framing.json"), "framing", c, &inputs, &report)?;
    io::write_csv(
        &out.join("keywords.csv"),
        report.keyword_set.keywords.iter().enumerate().map(|(i, k)| KeywordRow {
            rank: i + 1,
            ngram: k.ngram.to_string(),
            ig_bits: k.ig_bits,
            document_frequency: k.document_frequency,
        }),
    )?;
    io::write_csv(
        &out.join("coords.csv"),
        report.coordinates.iter().map(|p| CoordRow { ngram: p.ngram.to_string(), x: p.x, y: p.y }),
    )?;
    Ok(format!("framing {} keywords={}", report.summary_line(), report.keyword_set.len()))
}

pub fn cycle(c: &RunConfig) -> Result<String, CliError> {
    let path = required(&c.paths.corpus, "corpus")?;
    let out = required(&c.paths.out, "out")?;
    let mut inputs = Inputs::default();
    inputs.add("corpus", path)?;
    let corpus = io::load_corpus(path)?;
    let lexicon = match &c.paths.lexicons {
        Some(dir) => {
            inputs.add("lexicons/positive.txt", &dir.join("positive.txt"))?;
            inputs.add("lexicons/negative.txt", &dir.join("negative.txt"))?;
            Lexicon::from_dir(dir)?
        }
        None => Lexicon::bundled(),
    };
    let topic = c.topic.clone().unwrap_or_else(|| file_stem(path));
    let law_years = match &c.paths.laws {
        Some(p) => {
            inputs.add("laws", p)?;
            let laws = io::read_laws(p)?;
            if !laws.contains_key(&topic) {
                eprintln!("warning: topic {topic:?} has no rows in {}", p.display());
            }
            Some(laws.get(&topic).cloned().unwrap_or_default())
        }
        None => None,
    };

    let series = annual_features(&topic, &corpus, &lexicon, &Tokenizer::default(), law_years.as_ref(), &c.cycle())?;

    io::write_csv(out, io::cycle_rows(&series))?;
    io::write_report(&sidecar(out), "cycle", c, &inputs, &series)?;
    Ok(format!(
        "cycle topic={} years={} first={} last={} articles={}",
        topic,
        series.len(),
        series.years.first().copied().unwrap_or_default(),
        series.years.last().copied().unwrap_or_default(),
        corpus.len()
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Legislate {
    Fit,
    Predict,
    Loo,
}

fn load_series(c: &RunConfig, inputs: &mut Inputs, need_labels: bool) -> Result<Vec<FeatureDiffSeries>, CliError> {
    let dir = required(&c.paths.series_dir, "series-dir")?;
    inputs.add("series", dir)?;
    let laws = match &c.paths.laws {
        Some(p) => {
            inputs.add("laws", p)?;
            Some(io::read_laws(p)?)
        }
        None => None,
    };
    let files = io::csv_files(dir)?;
    if files.is_empty() {
        return Err(CliError::Input(format!("{}: no .csv series", dir.display())));
    }
    let empty = BTreeSet::new();
    files
        .iter()
        .map(|f| {
            let topic = file_stem(f);
            let mut series = io::read_series(f, &topic)?;
            if let Some(laws) = &laws {
                series = series.with_legislative(laws.get(&topic).unwrap_or(&empty));
            }
            if need_labels && series.legislative.is_none() {
                return Err(CliError::Input(format!(
                    "{}: legislative column is incomplete; pass --laws",
                    f.display()
                )));
            }
            Ok(change_series(&series, c.change_input)?)
        })
        .collect()
}

#[derive(Serialize)]
struct PredictionRow<'a> {
    topic: &'a str,
    year: i32,
    posterior: f64,
    label: u8,
    actual: u8,
}

fn read_model(path: &Path) -> Result<LegislationModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::io(path, e))?;
    // Accept a fit report as well as a bare model.
    if let Some(inner) = value.get_mut("result") {
        value = inner.take();
    }
    serde_json::from_value(value).map_err(|e| CliError::io(path, e))
}

pub fn legislate(c: &RunConfig, action: Legislate) -> Result<String, CliError> {
    let out = required(&c.paths.out, "out")?;
    let mut inputs = Inputs::default();
    let params = c.legislation();
    match action {
        Legislate::Fit => {
            let data = load_series(c, &mut inputs, true)?;
            let model = fit_model(&data, &params)?;
            for w in &model.warnings {
                eprintln!("warning: {w}");
            }
            io::write_report(&out.join("model.json"), "legislate fit", c, &inputs, &model)?;
            Ok(format!(
                "legislate fit topics={} training_pairs={} warnings={}",
                data.len(),
                model.training_pairs,
                model.warnings.len()
            ))
        }
        Legislate::Predict => {
            let model_path = required(&c.paths.model, "model")?;
            inputs.add("model", model_path)?;
            let model = read_model(model_path)?;
            let data = load_series(c, &mut inputs, false)?;
            let mut rows = Vec::new();
            for s in &data {
                rows.extend(model.predict_series(s)?);
            }
            io::write_csv(
                &out.join("predictions.csv"),
                rows.iter().map(|p| PredictionRow {
                    topic: &p.topic,
                    year: p.year,
                    posterior: p.posterior,
                    label: u8::from(p.predicted),
                    actual: u8::from(p.actual),
                }),
            )?;
            let positives = rows.iter().filter(|p| p.predicted).count();
            Ok(format!("legislate predict topics={} years={} predicted_legislative={}", data.len(), rows.len(), positives))
        }
        Legislate::Loo => {
            let data = load_series(c, &mut inputs, true)?;
            let report = loo_evaluate(&data, &params)?;
            io::write_report(&out.join("loo.json"), "legislate loo", c, &inputs, &report)?;
            let s = report.overall.scores;
            Ok(format!(
                "legislate loo topics={} precision={:.6} recall={:.6} f1={:.6} accuracy={}",
                report.per_topic.len(),
                s.precision,
                s.recall,
                s.f1,
                fmt_opt(Some(report.overall.accuracy))
            ))
        }
    }
}

pub fn bootstrap(c: &RunConfig) -> Result<String, CliError> {
    let seeds_path = required(&c.paths.seeds, "seeds")?;
    let universal_path = required(&c.paths.universal, "universal")?;
    let out = required(&c.paths.out, "out")?;
    let mut inputs = Inputs::default();
    inputs.add("seeds", seeds_path)?;
    inputs.add("universal", universal_path)?;
    let seeds = io::read_seeds(seeds_path)?;
    let universal = io::load_corpus(universal_path)?;
    let extra = match &c.paths.extra_negatives {
        Some(p) => {
            inputs.add("extra_negatives", p)?;
            io::read_id_list(p)?
        }
        None => BTreeSet::new(),
    };

    let dataset = bootstrap_dataset(&seeds, &extra, &universal, &Tokenizer::default(), &c.bootstrap())?;

    let write = |name: &str, corpus| {
        let path = out.join(name);
        io::write_file(&path, &newsframe_ingest::jsonl::corpus_to_bytes(corpus))
    };
    write("positives.jsonl", &dataset.positives)?;
    write("negatives.jsonl", &dataset.negatives)?;
    io::write_report(&out.join("provenance.json"), "bootstrap", c, &inputs, &dataset.provenance)?;
    let p = &dataset.provenance;
    Ok(format!(
        "bootstrap positives={} negatives={} k_pos={} k_neg={} m_pos={} m_neg={} seed={}",
        p.final_positives, p.final_negatives, p.k_pos, p.k_neg, p.m_pos, p.m_neg, p.seed
    ))
}
