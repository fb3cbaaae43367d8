//! Corpus files: one JSON article per line.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use newsframe_core::{Article, Corpus};

use crate::IngestError;

pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> Result<(), IngestError> {
    for a in corpus.articles() {
        serde_json::to_writer(&mut out, a).map_err(|e| IngestError::Json(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn corpus_to_bytes(corpus: &Corpus) -> Vec<u8> {
    let mut buf = Vec::new();
    write_corpus(corpus, &mut buf).expect("writing to memory cannot fail");
    buf
}

/// Read articles line by line. Blank lines are skipped; line numbers are 1-based.
pub fn read_corpus<R: Read>(input: R) -> Result<Corpus, IngestError> {
    let mut articles = Vec::new();
    let mut lines = Vec::new();
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let article: Article = serde_json::from_str(&line)
            .map_err(|e| IngestError::Parse { line: i + 1, message: e.to_string() })?;
        articles.push(article);
        lines.push(i + 1);
    }
    // Per-article checks first so the error can point at a line.
    let mut seen = std::collections::HashSet::new();
    for (a, &line) in articles.iter().zip(&lines) {
        let bad = a.validate().err().map(|e| e.to_string()).or_else(|| {
            (!seen.insert(a.id.as_str())).then(|| format!("duplicate article id {:?}", a.id))
        });
        if let Some(message) = bad {
            return Err(IngestError::Parse { line, message });
        }
    }
    Ok(Corpus::new(articles)?)
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<(), IngestError> {
    crate::cache::write_atomic(path, &corpus_to_bytes(corpus))
}

pub fn load_corpus(path: &Path) -> Result<Corpus, IngestError> {
    read_corpus(fs::File::open(path)?)
}
