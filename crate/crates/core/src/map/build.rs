//! End-to-end map construction: text pipeline, PCA at the chosen
//! dimensionality, clustering.

use log::{info, warn};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::kmeans::kmeans;
use super::knowledge::{KnowledgeMap, MapDocument, MapParts, MAP_FORMAT_VERSION};
use super::pca::Pca;
use super::{ClusterId, MapError};
use crate::text::{validate, Analyzer, RawDocument, StopList, TextError, Vocabulary};

pub const DEFAULT_VARIANCE_THRESHOLD: f64 = 0.90;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionChoice {
    /// Use exactly this many principal axes.
    Fixed(usize),
    /// Use the intrinsic dimensionality at this cumulative-variance threshold.
    Variance(f64),
}

impl Default for DimensionChoice {
    fn default() -> Self {
        Self::Variance(DEFAULT_VARIANCE_THRESHOLD)
    }
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub dims: DimensionChoice,
    /// Number of clusters; equals the navigation set size.
    pub clusters: usize,
    pub seed: u64,
    pub stop_list: StopList,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            dims: DimensionChoice::default(),
            clusters: 10,
            seed: 0,
            stop_list: StopList::english(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuildReport {
    pub corpus_size: usize,
    pub vocabulary_size: usize,
    pub dimensionality: usize,
    /// Intrinsic dimensionality at the default threshold, for reference.
    pub intrinsic_dimensionality: usize,
    pub explained_variance_ratio: f64,
    pub cluster_sizes: Vec<usize>,
    pub zero_vector_docs: Vec<String>,
    pub config_hash: String,
}

pub fn build_map(
    mut corpus: Vec<RawDocument>,
    config: &BuildConfig,
) -> Result<(KnowledgeMap, BuildReport), MapError> {
    if corpus.is_empty() {
        return Err(TextError::EmptyCorpus.into());
    }
    validate(&corpus)?;
    if corpus.len() < config.clusters {
        return Err(MapError::MapTooSmall {
            docs: corpus.len(),
            needed: config.clusters,
        });
    }
    corpus.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));

    let analyzer = Analyzer::new(config.stop_list.clone());
    let term_lists: Vec<Vec<String>> = corpus.iter().map(|d| analyzer.document_terms(d)).collect();
    let vocab = Vocabulary::from_term_lists(&term_lists)?;
    let vectors: Vec<_> = term_lists.iter().map(|t| vocab.vectorize_terms(t)).collect();

    let zero: Vec<bool> = vectors.iter().map(|v| v.is_zero()).collect();
    let zero_vector_docs: Vec<String> = corpus
        .iter()
        .zip(&zero)
        .filter(|(_, z)| **z)
        .map(|(d, _)| d.doc_id.clone())
        .collect();
    for id in &zero_vector_docs {
        warn!("document `{id}` has an all-zero tf.idf vector; placing it at the origin");
    }

    let fit_rows: Vec<Vec<f64>> = vectors
        .iter()
        .zip(&zero)
        .filter(|(_, z)| !**z)
        .map(|(v, _)| v.to_dense(vocab.len()))
        .collect();
    let pca = Pca::fit(&fit_rows)?;
    let intrinsic = pca.intrinsic_dimensionality(DEFAULT_VARIANCE_THRESHOLD)?;
    let target_dim = match config.dims {
        DimensionChoice::Fixed(d) => d,
        DimensionChoice::Variance(tau) => pca.intrinsic_dimensionality(tau)?,
    };
    let projection = pca.projection(target_dim)?;

    let coords: Vec<Vec<f64>> = vectors
        .iter()
        .zip(&zero)
        .map(|(v, z)| {
            if *z {
                Ok(vec![0.0; target_dim])
            } else {
                projection.project_sparse(v)
            }
        })
        .collect::<Result<_, _>>()?;

    let clustering = kmeans(&coords, config.clusters, config.seed)?;
    let mut cluster_sizes = vec![0; config.clusters];
    for &c in &clustering.assignment {
        cluster_sizes[c] += 1;
    }

    let config_hash = hash_inputs(&corpus, config);
    let explained: f64 = projection.explained_variance().iter().sum();
    let explained_variance_ratio = if projection.total_variance() > 0.0 {
        explained / projection.total_variance()
    } else {
        0.0
    };

    let documents = corpus
        .into_iter()
        .zip(&zero)
        .map(|(d, z)| MapDocument {
            id: d.doc_id,
            title: d.title,
            uri: d.source_uri,
            body: d.body,
            zero_vector: *z,
        })
        .collect::<Vec<_>>();
    let report = BuildReport {
        corpus_size: documents.len(),
        vocabulary_size: vocab.len(),
        dimensionality: target_dim,
        intrinsic_dimensionality: intrinsic,
        explained_variance_ratio,
        cluster_sizes,
        zero_vector_docs,
        config_hash: config_hash.clone(),
    };
    let map = KnowledgeMap::from_parts(MapParts {
        config_hash,
        documents,
        stop_words: config
            .stop_list
            .sorted_words()
            .into_iter()
            .map(String::from)
            .collect(),
        vocabulary: Some(vocab),
        projection: Some(projection),
        coords,
        clusters: clustering
            .assignment
            .iter()
            .map(|&c| ClusterId(c as u32))
            .collect(),
        centroids: clustering.centroids,
    })?;
    info!(
        "built map: {} docs, {} terms, {} dims, clusters {:?}",
        report.corpus_size, report.vocabulary_size, report.dimensionality, report.cluster_sizes
    );
    Ok((map, report))
}

fn hash_inputs(corpus: &[RawDocument], config: &BuildConfig) -> String {
    let mut h = Sha256::new();
    let header = serde_json::json!({
        "format_version": MAP_FORMAT_VERSION,
        "dims": config.dims,
        "clusters": config.clusters,
        "seed": config.seed,
        "stop_words": config.stop_list.sorted_words(),
    });
    h.update(header.to_string().as_bytes());
    for d in corpus {
        for field in [&d.doc_id, &d.title, &d.body, &d.source_uri] {
            h.update((field.len() as u64).to_le_bytes());
            h.update(field.as_bytes());
        }
    }
    hex::encode(h.finalize())
}
