//! Plain-text dictionaries to definitional digraphs: every content word of a
//! lexeme's first definition points to the lexeme.

use std::collections::{BTreeMap, BTreeSet};
use std::io::BufRead;

use serde::Deserialize;
use thiserror::Error;

use crate::graph::Digraph;

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Lexeme to its ordered definitions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawDictionary {
    pub entries: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize)]
struct JsonEntry {
    lexeme: String,
    definitions: Vec<String>,
}

impl RawDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends definitions; lexemes are lowercased and blank definitions
    /// dropped.
    pub fn add<I, S>(&mut self, lexeme: &str, definitions: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let defs = self.entries.entry(lexeme.trim().to_lowercase()).or_default();
        defs.extend(definitions.into_iter().map(Into::into).filter(|d: &String| !d.trim().is_empty()));
    }

    /// One JSON object per line: `{"lexeme": ..., "definitions": [...]}`.
    /// Repeated lexemes accumulate their definitions in file order.
    pub fn from_jsonl<R: BufRead>(reader: R) -> Result<Self, DictionaryError> {
        let mut dict = Self::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: JsonEntry = serde_json::from_str(&line)
                .map_err(|e| DictionaryError::Format { line: i + 1, message: e.to_string() })?;
            if entry.lexeme.trim().is_empty() {
                return Err(DictionaryError::Format { line: i + 1, message: "empty lexeme".into() });
            }
            dict.add(&entry.lexeme, entry.definitions);
        }
        Ok(dict)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Closed-class words to ignore.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stoplist(BTreeSet<String>);

impl Stoplist {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        Self(words.into_iter().map(|w| w.as_ref().trim().to_lowercase()).filter(|w| !w.is_empty()).collect())
    }

    /// One word per line; blank lines and `#` comments are skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, DictionaryError> {
        let mut words = Vec::new();
        for line in reader.lines() {
            let line = line?;
            let w = line.trim();
            if !w.is_empty() && !w.starts_with('#') {
                words.push(w.to_string());
            }
        }
        Ok(Self::new(words))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Lowercase alphabetic runs, in order, duplicates kept.
pub fn tokenize(definition: &str) -> Vec<String> {
    definition
        .split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// One vertex per lexeme and per surviving token; arcs `token -> lexeme` from
/// each lexeme's first definition.
pub fn build_dictionary_digraph(dict: &RawDictionary, stop: &Stoplist) -> Digraph {
    let mut g = Digraph::new();
    for lexeme in dict.entries.keys() {
        g.add_vertex(lexeme);
    }
    for (lexeme, defs) in &dict.entries {
        let Some(first) = defs.first() else { continue };
        let target = g.vertex(lexeme).expect("added above");
        let words: BTreeSet<String> = tokenize(first).into_iter().filter(|t| !stop.contains(t)).collect();
        for w in words {
            let source = match g.vertex(&w) {
                Some(v) => v,
                None => g.add_vertex(&w),
            };
            g.add_arc(source, target);
        }
    }
    g
}
