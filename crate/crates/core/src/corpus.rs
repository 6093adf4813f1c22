//! Plain-text corpus ingestion.

use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::domain::{ContentDomain, Dataset};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tokenization {
    /// One token per non-blank line (trimmed).
    #[default]
    Line,
    /// Whitespace-separated tokens.
    Whitespace,
}

impl FromStr for Tokenization {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "line" => Ok(Tokenization::Line),
            "whitespace" => Ok(Tokenization::Whitespace),
            other => Err(format!("unknown tokenization `{other}` (expected line or whitespace)")),
        }
    }
}

pub fn tokenize(text: &str, mode: Tokenization) -> Vec<&str> {
    match mode {
        Tokenization::Line => text.lines().map(str::trim).filter(|l| !l.is_empty()).collect(),
        Tokenization::Whitespace => text.split_whitespace().collect(),
    }
}

/// Reads a corpus file. The domain is the sorted set of distinct tokens and
/// the dataset is the token sequence in file order.
pub fn ingest_corpus(path: impl AsRef<Path>, mode: Tokenization) -> Result<(Arc<ContentDomain>, Dataset)> {
    let text = fs::read_to_string(path)?;
    let tokens = tokenize(&text, mode);
    if tokens.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut symbols: Vec<&str> = tokens.clone();
    symbols.sort_unstable();
    symbols.dedup();
    let domain = ContentDomain::new(symbols)?;
    let dataset = Dataset::from_symbols(domain.clone(), &tokens)?;
    Ok((domain, dataset))
}
