//! How well distances in the compressed map preserve the structure of the
//! full tf.idf space (or of known topic labels).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::stats::spearman;
use crate::map::{euclidean, MapError, Pca, DEFAULT_VARIANCE_THRESHOLD};
use crate::text::{Analyzer, RawDocument, StopList, TextError, Vocabulary};

#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    /// Pairwise distances in the uncompressed tf.idf space.
    FullSpace,
    /// Topic of each document, in input order: distance 0 within a topic,
    /// 1 across topics.
    TopicLabels(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrRow {
    /// `full`, `pca`, or `pca-intrinsic`.
    pub space: String,
    pub dims: usize,
    pub spearman: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrStudy {
    pub documents: usize,
    pub vocabulary_size: usize,
    pub intrinsic_dimensionality: usize,
    pub rows: Vec<CorrRow>,
}

impl CorrStudy {
    pub fn row(&self, space: &str, dims: usize) -> Option<&CorrRow> {
        self.rows.iter().find(|r| r.space == space && r.dims == dims)
    }

    pub fn intrinsic(&self) -> Option<&CorrRow> {
        self.rows.iter().find(|r| r.space == "pca-intrinsic")
    }

    pub fn full(&self) -> Option<&CorrRow> {
        self.rows.iter().find(|r| r.space == "full")
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("space,dims,spearman\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{:.6}", r.space, r.dims, r.spearman);
        }
        s
    }

    /// Correlation-versus-dimensionality series for plotting.
    pub fn chart_json(&self) -> serde_json::Value {
        let mut pca: Vec<_> = self.rows.iter().filter(|r| r.space != "full").collect();
        pca.sort_by_key(|r| r.dims);
        pca.dedup_by_key(|r| r.dims);
        serde_json::json!({
            "x_label": "dimensions",
            "y_label": "spearman",
            "series": [{
                "name": "pca",
                "points": pca.iter().map(|r| [r.dims as f64, r.spearman]).collect::<Vec<_>>(),
            }],
            "reference": self.full().map(|r| serde_json::json!({"name": "full", "dims": r.dims, "spearman": r.spearman})),
            "intrinsic_dimensionality": self.intrinsic_dimensionality,
        })
    }
}

fn pairwise(points: &[Vec<f64>]) -> Vec<f64> {
    let n = points.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(euclidean(&points[i], &points[j]));
        }
    }
    out
}

/// Spearman correlation between model distances and `truth` for the full
/// space, each PCA dimensionality in `dims`, and the intrinsic
/// dimensionality. Dimensions beyond what the corpus supports are skipped.
pub fn correlation_study(
    corpus: &[RawDocument],
    dims: &[usize],
    truth: &GroundTruth,
    stop_list: &StopList,
) -> Result<CorrStudy, MapError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus.into());
    }
    let analyzer = Analyzer::new(stop_list.clone());
    let terms: Vec<Vec<String>> = corpus.iter().map(|d| analyzer.document_terms(d)).collect();
    let vocab = Vocabulary::from_term_lists(&terms)?;
    let full: Vec<Vec<f64>> = terms
        .iter()
        .map(|t| vocab.vectorize_terms(t).to_dense(vocab.len()))
        .collect();
    let full_dist = pairwise(&full);
    let truth_dist = match truth {
        GroundTruth::FullSpace => full_dist.clone(),
        GroundTruth::TopicLabels(labels) => {
            let n = labels.len();
            if n != corpus.len() {
                return Err(MapError::DimensionMismatch {
                    expected: corpus.len(),
                    got: n,
                });
            }
            let mut out = Vec::with_capacity(n * (n - 1) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    out.push(if labels[i] == labels[j] { 0.0 } else { 1.0 });
                }
            }
            out
        }
    };
    let rho = |d: &[f64]| spearman(d, &truth_dist).unwrap_or(0.0);

    let pca = Pca::fit(&full)?;
    let intrinsic = pca.intrinsic_dimensionality(DEFAULT_VARIANCE_THRESHOLD)?;
    let mut rows = vec![CorrRow {
        space: "full".into(),
        dims: vocab.len(),
        spearman: rho(&full_dist),
    }];
    let mut wanted: Vec<(usize, &str)> = dims
        .iter()
        .filter(|&&d| d >= 1 && d <= pca.max_dim())
        .map(|&d| (d, "pca"))
        .collect();
    wanted.push((intrinsic, "pca-intrinsic"));
    for (d, space) in wanted {
        let projection = pca.projection(d)?;
        let coords: Vec<Vec<f64>> = full.iter().map(|v| projection.project(v)).collect::<Result<_, _>>()?;
        rows.push(CorrRow {
            space: space.into(),
            dims: d,
            spearman: rho(&pairwise(&coords)),
        });
    }
    Ok(CorrStudy {
        documents: corpus.len(),
        vocabulary_size: vocab.len(),
        intrinsic_dimensionality: intrinsic,
        rows,
    })
}
