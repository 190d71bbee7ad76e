//! Document ingestion, tokenization, and corpus-level statistics.
//!
//! Tokenization is deliberately conservative: split on Unicode whitespace,
//! strip leading/trailing punctuation, keep internal hyphens and
//! apostrophes, and case-fold while remembering the original
//! capitalization. Capitalization is an extraction cue downstream, and
//! surface forms like "near" and "of" must survive untouched, so there is
//! no stemming or stopword removal here.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One token of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// The surface form after punctuation stripping, original case.
    pub surface: String,
    /// Lowercased surface.
    pub normalized: String,
    /// Byte offset of the surface within the raw text.
    pub byte_start: usize,
    /// Byte offset one past the end of the surface.
    pub byte_end: usize,
    /// Whether the surface starts with an uppercase character.
    pub is_capitalized: bool,
}

/// A corpus text unit with its tokenization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub raw_text: String,
    pub tokens: Vec<Token>,
    /// Token count.
    pub length: usize,
}

/// Corpus-level statistics: document count and document frequencies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_docs: usize,
    /// term -> number of documents containing it.
    pub df: BTreeMap<String, usize>,
}

impl CorpusStats {
    /// df(term); 0 for unseen terms.
    pub fn document_frequency(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }
}

/// Split `raw_text` into tokens.
///
/// Rules: split on Unicode whitespace; strip leading/trailing
/// non-alphanumeric characters from each piece; drop pieces that become
/// empty; normalized form is the lowercased surface. Deterministic and
/// idempotent for identical input.
pub fn tokenize(raw_text: &str) -> Vec<Token> {
    let mut tokens = Vec::new();
    let mut offset = 0;
    for piece in raw_text.split_whitespace() {
        // split_whitespace does not report offsets; find the piece from the
        // current cursor. Pieces occur in order, so this is unambiguous.
        let start = raw_text[offset..]
            .find(piece)
            .map(|i| i + offset)
            .expect("piece must occur in raw text");
        offset = start + piece.len();

        let trimmed = piece.trim_matches(|c: char| !c.is_alphanumeric());
        if trimmed.is_empty() {
            continue;
        }
        let inner = piece
            .find(trimmed)
            .expect("trimmed slice must occur in piece");
        let byte_start = start + inner;
        let byte_end = byte_start + trimmed.len();
        let is_capitalized = trimmed.chars().next().is_some_and(|c| c.is_uppercase());
        tokens.push(Token {
            surface: trimmed.to_string(),
            normalized: trimmed.to_lowercase(),
            byte_start,
            byte_end,
            is_capitalized,
        });
    }
    tokens
}

/// In-memory corpus store. Single writer until sealed; read-only after.
#[derive(Debug, Clone, Default)]
pub struct CorpusStore {
    docs: BTreeMap<String, Document>,
    stats: CorpusStats,
    sealed: bool,
}

/// Schema of one line of `docs.jsonl` and of external JSONL input.
#[derive(Debug, Serialize, Deserialize)]
struct DocLine {
    id: String,
    text: String,
}

impl CorpusStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Tokenize and store a document. Re-ingesting an existing doc_id
    /// replaces the previous version without changing n_docs.
    pub fn ingest_document(&mut self, doc_id: &str, raw_text: &str) -> Result<&Document> {
        if self.sealed {
            return Err(Error::Sealed);
        }
        if doc_id.is_empty() {
            return Err(Error::Identifier("empty doc_id".into()));
        }
        if let Some(old) = self.docs.remove(doc_id) {
            self.remove_from_stats(&old);
            self.stats.n_docs -= 1;
        }
        let tokens = tokenize(raw_text);
        let doc = Document {
            doc_id: doc_id.to_string(),
            raw_text: raw_text.to_string(),
            length: tokens.len(),
            tokens,
        };
        self.stats.n_docs += 1;
        for term in doc.tokens.iter().map(|t| t.normalized.clone()).collect::<BTreeSet<_>>() {
            *self.stats.df.entry(term).or_insert(0) += 1;
        }
        debug_assert!(self.stats.df.values().all(|&n| n <= self.stats.n_docs));
        let entry = self.docs.entry(doc_id.to_string()).or_insert(doc);
        Ok(entry)
    }

    fn remove_from_stats(&mut self, doc: &Document) {
        for term in doc.tokens.iter().map(|t| t.normalized.as_str()).collect::<BTreeSet<_>>() {
            if let Some(n) = self.stats.df.get_mut(term) {
                *n -= 1;
                if *n == 0 {
                    self.stats.df.remove(term);
                }
            }
        }
    }

    /// Ingest every `.txt` file in a directory; the file stem is the doc_id.
    pub fn ingest_dir(&mut self, dir: &Path) -> Result<usize> {
        let mut paths: Vec<_> = std::fs::read_dir(dir)?
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e == "txt"))
            .collect();
        paths.sort();
        let mut count = 0;
        for path in paths {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| Error::Identifier(format!("{}", path.display())))?
                .to_string();
            let bytes = std::fs::read(&path)?;
            let text = String::from_utf8(bytes)
                .map_err(|_| Error::Encoding(format!("{}", path.display())))?;
            self.ingest_document(&stem, &text)?;
            count += 1;
        }
        Ok(count)
    }

    /// Ingest a line-delimited JSON file with `{"id": ..., "text": ...}` lines.
    pub fn ingest_jsonl(&mut self, path: &Path) -> Result<usize> {
        let file = std::fs::File::open(path)?;
        let mut count = 0;
        for (lineno, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: DocLine = serde_json::from_str(&line).map_err(|e| {
                Error::Integrity(format!("{}:{}: {e}", path.display(), lineno + 1))
            })?;
            self.ingest_document(&rec.id, &rec.text)?;
            count += 1;
        }
        Ok(count)
    }

    /// Freeze the corpus. After sealing, all reads are safe from any number
    /// of concurrent readers and ingestion fails with `Error::Sealed`.
    pub fn seal(&mut self) {
        self.sealed = true;
    }

    pub fn is_sealed(&self) -> bool {
        self.sealed
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.docs.get(doc_id)
    }

    pub fn docs(&self) -> impl Iterator<Item = &Document> {
        self.docs.values()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(|s| s.as_str())
    }

    pub fn n_docs(&self) -> usize {
        self.stats.n_docs
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    /// df(term) after trimming and case-folding the argument.
    pub fn document_frequency(&self, term: &str) -> usize {
        self.stats.document_frequency(&term.trim().to_lowercase())
    }

    /// Write `docs.jsonl` and `stats.json` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut out = std::fs::File::create(dir.join("docs.jsonl"))?;
        for doc in self.docs.values() {
            let line = serde_json::to_string(&DocLine {
                id: doc.doc_id.clone(),
                text: doc.raw_text.clone(),
            })?;
            writeln!(out, "{line}")?;
        }
        let stats = serde_json::to_string_pretty(&self.stats)?;
        std::fs::write(dir.join("stats.json"), stats)?;
        Ok(())
    }

    /// Load a store saved with [`CorpusStore::save`]. The result is sealed.
    pub fn load(dir: &Path) -> Result<Self> {
        let mut store = Self::new();
        store.ingest_jsonl(&dir.join("docs.jsonl"))?;
        let stats_path = dir.join("stats.json");
        let stored: CorpusStats = serde_json::from_str(&std::fs::read_to_string(&stats_path)?)?;
        if stored != store.stats {
            return Err(Error::Integrity(format!(
                "{} disagrees with recomputed statistics",
                stats_path.display()
            )));
        }
        store.seal();
        Ok(store)
    }
}
