//! Source adapters: one table per article-search API, one shared parser.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDate;
use newsframe_core::corpus::parse_date;
use newsframe_core::{Article, Label, Source};
use serde_json::Value;

use crate::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AdapterName {
    Nyt,
    Guardian,
}

impl AdapterName {
    /// Directory name used in the cache layout.
    pub fn slug(self) -> &'static str {
        match self {
            AdapterName::Nyt => "nyt",
            AdapterName::Guardian => "guardian",
        }
    }

    pub fn key_env(self) -> &'static str {
        match self {
            AdapterName::Nyt => "NYT_API_KEY",
            AdapterName::Guardian => "GUARDIAN_API_KEY",
        }
    }
}

impl fmt::Display for AdapterName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl std::str::FromStr for AdapterName {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nyt" => Ok(AdapterName::Nyt),
            "guardian" => Ok(AdapterName::Guardian),
            _ => Err(IngestError::InvalidJob(format!("unknown adapter {s:?}"))),
        }
    }
}

/// Generic query fields every adapter maps to its own parameter names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryField {
    Keyword,
    BeginDate,
    EndDate,
    Page,
    ApiKey,
}

/// Article fields an adapter can extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArticleField {
    Id,
    Title,
    Body,
    PublishedAt,
    Url,
}

impl ArticleField {
    pub fn name(self) -> &'static str {
        match self {
            ArticleField::Id => "id",
            ArticleField::Title => "title",
            ArticleField::Body => "body",
            ArticleField::PublishedAt => "published_at",
            ArticleField::Url => "url",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceAdapter {
    pub name: AdapterName,
    pub base_url: String,
    pub query_param_map: BTreeMap<QueryField, String>,
    /// Dotted JSON paths per field, tried in order.
    pub response_paths: BTreeMap<ArticleField, Vec<String>>,
    /// Path to the array of records in a page response.
    pub docs_path: String,
    /// Path to the total hit count in a page response.
    pub hits_path: String,
    pub page_size: usize,
    /// Value the API uses for the first page.
    pub first_page: u32,
    pub date_format: &'static str,
    /// Constant parameters sent with every request.
    pub extra_params: Vec<(String, String)>,
}

fn paths(entries: &[(ArticleField, &[&str])]) -> BTreeMap<ArticleField, Vec<String>> {
    entries
        .iter()
        .map(|(f, p)| (*f, p.iter().map(|s| s.to_string()).collect()))
        .collect()
}

fn params(entries: &[(QueryField, &str)]) -> BTreeMap<QueryField, String> {
    entries.iter().map(|(f, p)| (*f, p.to_string())).collect()
}

impl SourceAdapter {
    pub fn nyt() -> Self {
        Self {
            name: AdapterName::Nyt,
            base_url: "https://api.nytimes.com/svc/search/v2/articlesearch.json".into(),
            query_param_map: params(&[
                (QueryField::Keyword, "q"),
                (QueryField::BeginDate, "begin_date"),
                (QueryField::EndDate, "end_date"),
                (QueryField::Page, "page"),
                (QueryField::ApiKey, "api-key"),
            ]),
            response_paths: paths(&[
                (ArticleField::Id, &["_id", "uri", "web_url"]),
                (ArticleField::Title, &["headline.main"]),
                (ArticleField::Body, &["lead_paragraph", "abstract", "snippet"]),
                (ArticleField::PublishedAt, &["pub_date"]),
                (ArticleField::Url, &["web_url"]),
            ]),
            docs_path: "response.docs".into(),
            hits_path: "response.meta.hits".into(),
            page_size: 10,
            first_page: 0,
            date_format: "%Y%m%d",
            extra_params: vec![("sort".into(), "oldest".into())],
        }
    }

    pub fn guardian() -> Self {
        Self {
            name: AdapterName::Guardian,
            base_url: "https://content.guardianapis.com/search".into(),
            query_param_map: params(&[
                (QueryField::Keyword, "q"),
                (QueryField::BeginDate, "from-date"),
                (QueryField::EndDate, "to-date"),
                (QueryField::Page, "page"),
                (QueryField::ApiKey, "api-key"),
            ]),
            response_paths: paths(&[
                (ArticleField::Id, &["id", "webUrl"]),
                (ArticleField::Title, &["webTitle", "fields.headline"]),
                (ArticleField::Body, &["fields.bodyText", "fields.trailText"]),
                (ArticleField::PublishedAt, &["webPublicationDate"]),
                (ArticleField::Url, &["webUrl"]),
            ]),
            docs_path: "response.results".into(),
            hits_path: "response.total".into(),
            page_size: 50,
            first_page: 1,
            date_format: "%Y-%m-%d",
            extra_params: vec![
                ("page-size".into(), "50".into()),
                ("show-fields".into(), "bodyText".into()),
                ("order-by".into(), "oldest".into()),
            ],
        }
    }

    pub fn for_name(name: AdapterName) -> Self {
        match name {
            AdapterName::Nyt => Self::nyt(),
            AdapterName::Guardian => Self::guardian(),
        }
    }

    pub fn source(&self) -> Source {
        match self.name {
            AdapterName::Nyt => Source::Nyt,
            AdapterName::Guardian => Source::Guardian,
        }
    }

    pub fn validate(&self) -> Result<(), IngestError> {
        if self.page_size == 0 {
            return Err(IngestError::InvalidJob("adapter page size must be positive".into()));
        }
        for f in [ArticleField::Id, ArticleField::PublishedAt] {
            if self.response_paths.get(&f).is_none_or(|p| p.is_empty()) {
                return Err(IngestError::InvalidJob(format!(
                    "adapter {} has no response path for {}",
                    self.name,
                    f.name()
                )));
            }
        }
        Ok(())
    }

    fn param(&self, field: QueryField) -> &str {
        self.query_param_map
            .get(&field)
            .map(String::as_str)
            .unwrap_or(match field {
                QueryField::Keyword => "q",
                QueryField::BeginDate => "begin_date",
                QueryField::EndDate => "end_date",
                QueryField::Page => "page",
                QueryField::ApiKey => "api-key",
            })
    }

    /// Query parameters for page `page` (zero based), without the API key.
    pub fn query(&self, keyword: &str, start: NaiveDate, end: NaiveDate, page: u32) -> Vec<(String, String)> {
        let mut q = vec![
            (self.param(QueryField::Keyword).to_string(), keyword.to_string()),
            (self.param(QueryField::BeginDate).to_string(), start.format(self.date_format).to_string()),
            (self.param(QueryField::EndDate).to_string(), end.format(self.date_format).to_string()),
            (self.param(QueryField::Page).to_string(), (self.first_page + page).to_string()),
        ];
        q.extend(self.extra_params.iter().cloned());
        q
    }

    pub fn key_param(&self) -> &str {
        self.param(QueryField::ApiKey)
    }

    /// Records and total hit count of one page response.
    pub fn page_records<'a>(&self, page: &'a Value) -> Result<(&'a [Value], Option<u64>), IngestError> {
        let hits = lookup(page, &self.hits_path).and_then(Value::as_u64);
        match lookup(page, &self.docs_path) {
            Some(Value::Array(docs)) => Ok((docs.as_slice(), hits)),
            Some(Value::Null) | None if hits == Some(0) => Ok((&[], hits)),
            _ => Err(IngestError::Json(format!("page has no array at {}", self.docs_path))),
        }
    }

    fn text(&self, raw: &Value, field: ArticleField) -> Option<String> {
        self.response_paths.get(&field)?.iter().find_map(|p| match lookup(raw, p)? {
            Value::String(s) if !s.trim().is_empty() => Some(s.clone()),
            _ => None,
        })
    }
}

/// Follow a dotted path through nested objects.
pub fn lookup<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(value, |v, key| v.get(key))
}

/// Map one source record to an unlabeled article.
pub fn parse_article(raw: &Value, adapter: &SourceAdapter) -> Result<Article, IngestError> {
    let date_raw = adapter
        .text(raw, ArticleField::PublishedAt)
        .ok_or(IngestError::MissingField(ArticleField::PublishedAt.name()))?;
    let published_at = parse_date(&date_raw).ok_or(IngestError::BadDate(date_raw))?;
    let id = adapter
        .text(raw, ArticleField::Id)
        .ok_or(IngestError::MissingField(ArticleField::Id.name()))?;
    let title = adapter.text(raw, ArticleField::Title).unwrap_or_default();
    let body = adapter.text(raw, ArticleField::Body).unwrap_or_default();
    if title.is_empty() && body.is_empty() {
        return Err(IngestError::MissingField(ArticleField::Title.name()));
    }
    Ok(Article {
        id,
        source: adapter.source(),
        url: adapter.text(raw, ArticleField::Url),
        title,
        body,
        published_at,
        topic: None,
        label: Label::Unlabeled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn nyt_without_id_falls_back_to_url() {
        let raw = json!({
            "headline": {"main": "X"},
            "pub_date": "2014-01-02T05:00:00+0000",
            "web_url": "u",
            "lead_paragraph": "b"
        });
        let a = parse_article(&raw, &SourceAdapter::nyt()).unwrap();
        assert_eq!(a.id, "u");
        assert_eq!(a.title, "X");
        assert_eq!(a.body, "b");
        assert_eq!(a.url.as_deref(), Some("u"));
        assert_eq!(a.published_at, NaiveDate::from_ymd_opt(2014, 1, 2).unwrap());
        assert_eq!(a.source, Source::Nyt);
    }

    #[test]
    fn bad_date_is_reported() {
        let raw = json!({"_id": "1", "headline": {"main": "X"}, "pub_date": "yesterday"});
        assert_eq!(
            parse_article(&raw, &SourceAdapter::nyt()),
            Err(IngestError::BadDate("yesterday".into()))
        );
    }

    #[test]
    fn record_without_text_is_rejected() {
        let raw = json!({"id": "g", "webPublicationDate": "2015-06-01T00:00:00Z"});
        assert_eq!(
            parse_article(&raw, &SourceAdapter::guardian()),
            Err(IngestError::MissingField("title"))
        );
    }

    #[test]
    fn query_maps_fields_and_pages() {
        let d = |m| NaiveDate::from_ymd_opt(2013, m, 1).unwrap();
        let q = SourceAdapter::nyt().query("drones", d(1), d(6), 2);
        assert!(q.contains(&("begin_date".into(), "20130101".into())));
        assert!(q.contains(&("page".into(), "2".into())));
        let q = SourceAdapter::guardian().query("drones", d(1), d(6), 0);
        assert!(q.contains(&("from-date".into(), "2013-01-01".into())));
        assert!(q.contains(&("page".into(), "1".into())));
    }

    #[test]
    fn builtin_adapters_validate() {
        SourceAdapter::nyt().validate().unwrap();
        SourceAdapter::guardian().validate().unwrap();
        let mut a = SourceAdapter::nyt();
        a.page_size = 0;
        assert!(a.validate().is_err());
    }
}
