//! Vocabulary construction and tf.idf weighting.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::corpus::RawDocument;
use super::porter::stem;
use super::tokenize::{filter_stop_words, tokenize, StopList};
use super::TextError;

/// Stop-word filtering and stemming applied to every document and query.
#[derive(Debug, Clone, Default)]
pub struct Analyzer {
    stop_list: StopList,
}

impl Analyzer {
    pub fn new(stop_list: StopList) -> Self {
        Self { stop_list }
    }

    pub fn stop_list(&self) -> &StopList {
        &self.stop_list
    }

    /// tokenize -> drop stop words -> stem -> drop stems that are stop words.
    ///
    /// Stemming is repeated until the stem no longer changes, so that every
    /// emitted term is a fixed point of [`stem`].
    pub fn terms(&self, text: &str) -> Vec<String> {
        filter_stop_words(tokenize(text), &self.stop_list)
            .into_iter()
            .map(|t| stem_fixed_point(&t))
            .filter(|t| !self.stop_list.contains(t))
            .collect()
    }

    /// Terms of a document: title and body concatenated, unweighted.
    pub fn document_terms(&self, doc: &RawDocument) -> Vec<String> {
        let mut terms = self.terms(&doc.title);
        terms.extend(self.terms(&doc.body));
        terms
    }
}

fn stem_fixed_point(token: &str) -> String {
    let mut current = stem(token);
    loop {
        let next = stem(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

/// Sorted, deduplicated corpus terms with their document frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    df: Vec<u32>,
    n_docs: u32,
}

impl Vocabulary {
    pub fn build(corpus: &[RawDocument], analyzer: &Analyzer) -> Result<Self, TextError> {
        let docs: Vec<Vec<String>> = corpus.iter().map(|d| analyzer.document_terms(d)).collect();
        Self::from_term_lists(&docs)
    }

    /// Builds from already-analyzed documents.
    pub fn from_term_lists(docs: &[Vec<String>]) -> Result<Self, TextError> {
        if docs.is_empty() {
            return Err(TextError::EmptyCorpus);
        }
        let mut df: BTreeMap<&str, u32> = BTreeMap::new();
        for terms in docs {
            let mut seen: Vec<&str> = terms.iter().map(String::as_str).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let (terms, df): (Vec<String>, Vec<u32>) =
            df.into_iter().map(|(t, c)| (t.to_string(), c)).unzip();
        Ok(Self {
            terms,
            df,
            n_docs: docs.len() as u32,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn n_docs(&self) -> u32 {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn df(&self, index: usize) -> u32 {
        self.df[index]
    }

    /// `ln(n_docs / df)`.
    pub fn idf(&self, index: usize) -> f64 {
        (f64::from(self.n_docs) / f64::from(self.df[index])).ln()
    }

    /// Raw-count tf times ln idf, L2-normalized. Terms outside the
    /// vocabulary are ignored.
    pub fn vectorize_terms(&self, terms: &[String]) -> TermVector {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for t in terms {
            if let Some(i) = self.index_of(t) {
                *counts.entry(i).or_insert(0) += 1;
            }
        }
        let mut weights: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(i, tf)| (i as u32, f64::from(tf) * self.idf(i)))
            .collect();
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in &mut weights {
                *w /= norm;
            }
        }
        TermVector { weights }
    }

    pub fn vectorize(&self, doc: &RawDocument, analyzer: &Analyzer) -> TermVector {
        self.vectorize_terms(&analyzer.document_terms(doc))
    }
}

/// Sparse tf.idf vector sorted by term index.
///
/// Terms present in the document with zero idf keep an explicit zero entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermVector {
    weights: Vec<(u32, f64)>,
}

impl TermVector {
    pub fn weights(&self) -> &[(u32, f64)] {
        &self.weights
    }

    pub fn get(&self, index: u32) -> f64 {
        self.weights
            .binary_search_by_key(&index, |(i, _)| *i)
            .map(|p| self.weights[p].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt()
    }

    /// True when every weight is zero (the document only uses terms that
    /// appear in every document, or no known terms at all).
    pub fn is_zero(&self) -> bool {
        self.weights.iter().all(|(_, w)| *w == 0.0)
    }

    pub fn to_dense(&self, dim: usize) -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for &(i, w) in &self.weights {
            out[i as usize] = w;
        }
        out
    }
}
