//! Paged fetching through an on-disk response cache.
//!
//! Layout: `<cache_dir>/<adapter>/<sha256(query)>/page-N.json` holds raw page
//! responses, and `corpus.jsonl` in the same directory marks a finished job.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use newsframe_core::{Corpus, DateRange};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::adapter::{parse_article, SourceAdapter};
use crate::jsonl::{load_corpus, save_corpus};
use crate::transport::{RateLimiter, Transport};
use crate::IngestError;

pub const CORPUS_FILE: &str = "corpus.jsonl";

#[derive(Debug, Clone)]
pub struct FetchJob {
    pub adapter: SourceAdapter,
    pub keyword: String,
    pub period: DateRange,
    pub max_pages: u32,
    pub cache_dir: PathBuf,
    /// Falls back to the adapter's environment variable when `None`.
    pub api_key: Option<String>,
    pub requests_per_second: f64,
    /// Written into each fetched article's `topic`.
    pub topic: Option<String>,
}

impl FetchJob {
    pub fn new(
        adapter: SourceAdapter,
        keyword: impl Into<String>,
        period: DateRange,
        max_pages: u32,
        cache_dir: impl Into<PathBuf>,
    ) -> Self {
        Self {
            adapter,
            keyword: keyword.into(),
            period,
            max_pages,
            cache_dir: cache_dir.into(),
            api_key: None,
            requests_per_second: 1.0,
            topic: None,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        self.adapter.validate()?;
        if self.max_pages == 0 {
            return Err(IngestError::InvalidJob("max_pages must be at least 1".into()));
        }
        if self.keyword.trim().is_empty() {
            return Err(IngestError::InvalidJob("keyword must not be empty".into()));
        }
        if self.period.start > self.period.end {
            return Err(IngestError::InvalidJob("period start is after its end".into()));
        }
        Ok(())
    }

    /// Canonical query text that names this job in the cache.
    pub fn query_key(&self) -> String {
        format!(
            "adapter={}\nkeyword={}\nstart={}\nend={}\nmax_pages={}\n",
            self.adapter.name, self.keyword, self.period.start, self.period.end, self.max_pages
        )
    }

    pub fn cache_path(&self) -> PathBuf {
        let digest = hex::encode(Sha256::digest(self.query_key().as_bytes()));
        self.cache_dir.join(self.adapter.name.slug()).join(digest)
    }

    fn api_key(&self) -> Result<String, IngestError> {
        if let Some(k) = &self.api_key {
            return Ok(k.clone());
        }
        let var = self.adapter.name.key_env();
        match std::env::var(var) {
            Ok(k) if !k.trim().is_empty() => Ok(k),
            _ => Err(IngestError::MissingKey(var)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FetchStats {
    pub requests: usize,
    pub pages_from_cache: usize,
    /// The finished corpus file was reused.
    pub corpus_cache_hit: bool,
    pub total_hits: Option<u64>,
    pub records: usize,
    pub skipped_records: usize,
    pub duplicates: usize,
    pub out_of_period: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FetchOutcome {
    pub corpus: Corpus,
    pub stats: FetchStats,
    pub cache_path: PathBuf,
}

/// Write through a sibling temp file and rename into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IngestError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Fetch every page of `job`, reusing whatever the cache already holds.
///
/// No request is made, and no API key is needed, once the job's corpus file exists.
pub fn fetch_topic(job: &FetchJob, transport: &mut dyn Transport) -> Result<FetchOutcome, IngestError> {
    job.validate()?;
    let dir = job.cache_path();
    let corpus_path = dir.join(CORPUS_FILE);
    let mut stats = FetchStats::default();
    if corpus_path.is_file() {
        stats.corpus_cache_hit = true;
        let corpus = load_corpus(&corpus_path)?;
        return Ok(FetchOutcome { corpus, stats, cache_path: dir });
    }

    let adapter = &job.adapter;
    let mut limiter = RateLimiter::new(job.requests_per_second)?;
    let mut key: Option<String> = None;
    let mut ids = HashSet::new();
    let mut urls = HashSet::new();
    let mut articles = Vec::new();

    for page in 0..job.max_pages {
        let page_path = dir.join(format!("page-{page}.json"));
        let body = if page_path.is_file() {
            stats.pages_from_cache += 1;
            fs::read_to_string(&page_path)?
        } else {
            if key.is_none() {
                key = Some(job.api_key()?);
            }
            let mut query = adapter.query(&job.keyword, job.period.start, job.period.end, page);
            query.push((adapter.key_param().to_string(), key.clone().unwrap_or_default()));
            limiter.wait();
            stats.requests += 1;
            let resp = transport.get(&adapter.base_url, &query)?;
            match resp.status {
                200..=299 => {}
                401 | 403 => return Err(IngestError::Auth(format!("HTTP {}", resp.status))),
                429 => return Err(IngestError::RateLimited { retry_after: resp.retry_after }),
                s => return Err(IngestError::Network(format!("HTTP {s}"))),
            }
            write_atomic(&page_path, resp.body.as_bytes())?;
            resp.body
        };
        let value: Value = serde_json::from_str(&body)
            .map_err(|e| IngestError::Json(format!("page {page}: {e}")))?;
        let (docs, hits) = adapter.page_records(&value)?;
        if stats.total_hits.is_none() {
            stats.total_hits = hits;
        }
        for raw in docs {
            stats.records += 1;
            let Ok(mut article) = parse_article(raw, adapter) else {
                stats.skipped_records += 1;
                continue;
            };
            if !job.period.contains(article.published_at) {
                stats.out_of_period += 1;
                continue;
            }
            let dup_url = article.url.as_ref().is_some_and(|u| urls.contains(u));
            if dup_url || ids.contains(&article.id) {
                stats.duplicates += 1;
                continue;
            }
            ids.insert(article.id.clone());
            if let Some(u) = &article.url {
                urls.insert(u.clone());
            }
            article.topic = job.topic.clone();
            articles.push(article);
        }
        let seen = (page as u64 + 1) * adapter.page_size as u64;
        if docs.len() < adapter.page_size || hits.is_some_and(|h| seen >= h) {
            break;
        }
    }

    let corpus = Corpus::new(articles)?;
    save_corpus(&corpus, &corpus_path)?;
    Ok(FetchOutcome { corpus, stats, cache_path: dir })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn job(keyword: &str) -> FetchJob {
        let d = |y| NaiveDate::from_ymd_opt(y, 1, 1).unwrap();
        FetchJob::new(SourceAdapter::nyt(), keyword, DateRange::new(d(2013), d(2014)).unwrap(), 3, "/tmp/c")
    }

    #[test]
    fn cache_path_depends_on_query_only() {
        let a = job("drones");
        let mut b = job("drones");
        b.api_key = Some("secret".into());
        assert_eq!(a.cache_path(), b.cache_path());
        assert_ne!(a.cache_path(), job("drone").cache_path());
        let leaf = a.cache_path();
        assert_eq!(leaf.parent().unwrap(), Path::new("/tmp/c/nyt"));
        assert_eq!(leaf.file_name().unwrap().len(), 64);
    }

    #[test]
    fn invalid_jobs_are_rejected() {
        let mut j = job("x");
        j.max_pages = 0;
        assert!(j.validate().is_err());
        assert!(job(" ").validate().is_err());
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join(format!("nf-atomic-{}", std::process::id()));
        let p = dir.join("a/b.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
        fs::remove_dir_all(dir).unwrap();
    }
}
