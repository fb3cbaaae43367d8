use std::collections::HashSet;
use std::sync::OnceLock;

const BUNDLED_STOPWORDS: &str = include_str!("../../resources/stopwords.txt");

fn bundled_stopwords() -> &'static HashSet<String> {
    static SET: OnceLock<HashSet<String>> = OnceLock::new();
    SET.get_or_init(|| {
        BUNDLED_STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|w| !w.is_empty())
            .map(str::to_owned)
            .collect()
    })
}

/// Lowercasing word tokenizer that keeps sentence boundaries.
///
/// Words are maximal runs of alphanumeric characters, with apostrophes
/// allowed inside a word. A trailing possessive `'s` is dropped and any
/// remaining apostrophes are removed, so `general's` becomes `general` and
/// `don't` becomes `dont`. Sentences end at `!`, `?`, or a `.` that is
/// followed by whitespace or the end of the text.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: Option<HashSet<String>>,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self {
            stopwords: Some(bundled_stopwords().clone()),
        }
    }
}

impl Tokenizer {
    pub fn without_stopwords() -> Self {
        Self { stopwords: None }
    }

    pub fn with_stopwords<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            stopwords: Some(words.into_iter().map(|w| w.as_ref().to_lowercase()).collect()),
        }
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.as_ref().is_some_and(|s| s.contains(word))
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        self.sentences(text).into_iter().flatten().collect()
    }

    /// Tokens grouped by sentence; empty sentences are dropped.
    pub fn sentences(&self, text: &str) -> Vec<Vec<String>> {
        let mut sentences = Vec::new();
        let mut current = Vec::new();
        let mut word = String::new();
        let mut chars = text.chars().peekable();

        while let Some(c) = chars.next() {
            if c.is_alphanumeric() || ((c == '\'' || c == '\u{2019}') && !word.is_empty()) {
                word.push(if c == '\u{2019}' { '\'' } else { c });
                continue;
            }
            self.flush_word(&mut word, &mut current);
            let ends_sentence = match c {
                '!' | '?' => true,
                '.' => chars.peek().is_none_or(|n| n.is_whitespace()),
                _ => false,
            };
            if ends_sentence && !current.is_empty() {
                sentences.push(std::mem::take(&mut current));
            }
        }
        self.flush_word(&mut word, &mut current);
        if !current.is_empty() {
            sentences.push(current);
        }
        sentences
    }

    fn flush_word(&self, word: &mut String, out: &mut Vec<String>) {
        if word.is_empty() {
            return;
        }
        let mut w = word.to_lowercase();
        word.clear();
        while w.ends_with('\'') {
            w.pop();
        }
        if let Some(stripped) = w.strip_suffix("'s") {
            w.truncate(stripped.len());
        }
        w.retain(|c| c != '\'');
        if !w.is_empty() && !self.is_stopword(&w) {
            out.push(w);
        }
    }
}

/// Tokenize with the bundled stopword list.
pub fn tokenize(text: &str) -> Vec<String> {
    Tokenizer::default().tokenize(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strips_punctuation_keeps_alphanumerics() {
        assert_eq!(tokenize("HTML5 Leak!"), vec!["html5", "leak"]);
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ... !? ").is_empty());
    }

    #[test]
    fn possessive_and_stopwords() {
        assert_eq!(
            tokenize("The surgeon general's WARNING"),
            vec!["surgeon", "general", "warning"]
        );
        assert_eq!(tokenize("Don\u{2019}t panic"), vec!["dont", "panic"]);
    }

    #[test]
    fn sentence_boundaries() {
        let t = Tokenizer::without_stopwords();
        assert_eq!(
            t.sentences("Read the warning. Snowden fled! Why? version 2.5 ships"),
            vec![
                vec!["read", "the", "warning"],
                vec!["snowden", "fled"],
                vec!["why"],
                vec!["version", "2", "5", "ships"],
            ]
        );
    }

    proptest! {
        #[test]
        fn retokenizing_joined_tokens_is_identity(text in "[A-Za-z0-9 ,.!?'-]{0,80}") {
            let t = Tokenizer::default();
            let once = t.tokenize(&text);
            let twice = t.tokenize(&once.join(" "));
            prop_assert_eq!(once, twice);
        }
    }
}
