use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans, squared_distance};
use super::pca::Projection;
use super::{ClusterId, DocIdx, MapError};
use crate::text::{Analyzer, RawDocument, StopList, Vocabulary};

pub const MAP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    pub id: String,
    pub title: String,
    pub uri: String,
    pub body: String,
    /// The document's tf.idf vector was all zeros; it sits at the origin.
    pub zero_vector: bool,
}

/// Where an unseen document lands in an existing map.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub coord: Vec<f64>,
    pub cluster: ClusterId,
    pub zero_vector: bool,
}

/// Corpus coordinates in the compressed space plus the cluster partition.
///
/// Immutable once built; share it behind an `Arc`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnowledgeMap {
    format_version: u32,
    config_hash: String,
    dimensionality: usize,
    documents: Vec<MapDocument>,
    stop_words: Vec<String>,
    vocabulary: Option<Vocabulary>,
    projection: Option<Projection>,
    coords: Vec<Vec<f64>>,
    clusters: Vec<ClusterId>,
    centroids: Vec<Vec<f64>>,
    #[serde(skip)]
    members: Vec<Vec<DocIdx>>,
    #[serde(skip)]
    by_id: HashMap<String, DocIdx>,
}

pub(super) struct MapParts {
    pub config_hash: String,
    pub documents: Vec<MapDocument>,
    pub stop_words: Vec<String>,
    pub vocabulary: Option<Vocabulary>,
    pub projection: Option<Projection>,
    pub coords: Vec<Vec<f64>>,
    pub clusters: Vec<ClusterId>,
    pub centroids: Vec<Vec<f64>>,
}

impl KnowledgeMap {
    pub(super) fn from_parts(parts: MapParts) -> Result<Self, MapError> {
        let dimensionality = parts.coords.first().map_or(0, Vec::len);
        let mut map = Self {
            format_version: MAP_FORMAT_VERSION,
            config_hash: parts.config_hash,
            dimensionality,
            documents: parts.documents,
            stop_words: parts.stop_words,
            vocabulary: parts.vocabulary,
            projection: parts.projection,
            coords: parts.coords,
            clusters: parts.clusters,
            centroids: parts.centroids,
            members: Vec::new(),
            by_id: HashMap::new(),
        };
        map.index()?;
        Ok(map)
    }

    /// A map over precomputed coordinates, clustered into `k` groups.
    /// Documents are reordered by id.
    pub fn from_coordinates(
        ids: Vec<String>,
        coords: Vec<Vec<f64>>,
        k: usize,
        seed: u64,
    ) -> Result<Self, MapError> {
        let (ids, coords, _) = sort_by_id(ids, coords, vec![0; 0]);
        let clustering = kmeans(&coords, k, seed)?;
        let clusters = clustering
            .assignment
            .iter()
            .map(|&c| ClusterId(c as u32))
            .collect();
        Self::bare(ids, coords, clusters, clustering.centroids)
    }

    /// A map with an explicit cluster assignment (`0..k`). Centroids are the
    /// member means.
    pub fn with_clusters(
        ids: Vec<String>,
        coords: Vec<Vec<f64>>,
        clusters: Vec<u32>,
    ) -> Result<Self, MapError> {
        if clusters.len() != ids.len() {
            return Err(MapError::Malformed("cluster list length differs".into()));
        }
        let (ids, coords, clusters) = sort_by_id(ids, coords, clusters);
        let k = clusters.iter().max().map_or(0, |m| *m as usize + 1);
        let dim = coords.first().map_or(0, Vec::len);
        let mut centroids = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (c, p) in clusters.iter().zip(&coords) {
            counts[*c as usize] += 1;
            for (s, x) in centroids[*c as usize].iter_mut().zip(p) {
                *s += x;
            }
        }
        for (c, n) in centroids.iter_mut().zip(&counts) {
            if *n > 0 {
                c.iter_mut().for_each(|x| *x /= *n as f64);
            }
        }
        let clusters = clusters.into_iter().map(ClusterId).collect();
        Self::bare(ids, coords, clusters, centroids)
    }

    fn bare(
        ids: Vec<String>,
        coords: Vec<Vec<f64>>,
        clusters: Vec<ClusterId>,
        centroids: Vec<Vec<f64>>,
    ) -> Result<Self, MapError> {
        let documents = ids
            .into_iter()
            .map(|id| MapDocument {
                title: id.clone(),
                id,
                uri: String::new(),
                body: String::new(),
                zero_vector: false,
            })
            .collect();
        Self::from_parts(MapParts {
            config_hash: String::new(),
            documents,
            stop_words: Vec::new(),
            vocabulary: None,
            projection: None,
            coords,
            clusters,
            centroids,
        })
    }

    /// Validates invariants and rebuilds the lookup tables.
    fn index(&mut self) -> Result<(), MapError> {
        let n = self.documents.len();
        if self.coords.len() != n || self.clusters.len() != n {
            return Err(MapError::Malformed(format!(
                "{n} documents, {} coordinates, {} cluster ids",
                self.coords.len(),
                self.clusters.len()
            )));
        }
        if let Some(bad) = self.coords.iter().find(|c| c.len() != self.dimensionality) {
            return Err(MapError::DimensionMismatch {
                expected: self.dimensionality,
                got: bad.len(),
            });
        }
        if self.coords.iter().flatten().any(|x| !x.is_finite()) {
            return Err(MapError::Malformed("non-finite coordinate".into()));
        }
        if self.documents.windows(2).any(|w| w[0].id >= w[1].id) {
            return Err(MapError::Malformed("documents not sorted by unique id".into()));
        }
        let k = self.centroids.len();
        let mut members = vec![Vec::new(); k];
        for (i, c) in self.clusters.iter().enumerate() {
            members
                .get_mut(c.index())
                .ok_or_else(|| MapError::Malformed(format!("cluster {} out of range", c.0)))?
                .push(DocIdx(i as u32));
        }
        self.members = members;
        self.by_id = self
            .documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), DocIdx(i as u32)))
            .collect();
        Ok(())
    }

    pub fn format_version(&self) -> u32 {
        self.format_version
    }

    /// Hash of the build inputs (configuration and corpus).
    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn size(&self) -> usize {
        self.documents.len()
    }

    pub fn dimensionality(&self) -> usize {
        self.dimensionality
    }

    pub fn n_clusters(&self) -> usize {
        self.centroids.len()
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = DocIdx> {
        (0..self.documents.len() as u32).map(DocIdx)
    }

    pub fn document(&self, doc: DocIdx) -> &MapDocument {
        &self.documents[doc.index()]
    }

    pub fn find(&self, id: &str) -> Option<DocIdx> {
        self.by_id.get(id).copied()
    }

    pub fn contains(&self, doc: DocIdx) -> bool {
        doc.index() < self.documents.len()
    }

    pub fn coord(&self, doc: DocIdx) -> &[f64] {
        &self.coords[doc.index()]
    }

    pub fn cluster_of(&self, doc: DocIdx) -> ClusterId {
        self.clusters[doc.index()]
    }

    pub fn members(&self, cluster: ClusterId) -> &[DocIdx] {
        self.members.get(cluster.index()).map_or(&[], Vec::as_slice)
    }

    pub fn centroid(&self, cluster: ClusterId) -> &[f64] {
        &self.centroids[cluster.index()]
    }

    pub fn projection(&self) -> Option<&Projection> {
        self.projection.as_ref()
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.vocabulary.as_ref()
    }

    pub fn distance(&self, a: DocIdx, b: DocIdx) -> f64 {
        euclidean(self.coord(a), self.coord(b))
    }

    /// Euclidean distance between two documents by id; smaller is more
    /// relevant.
    pub fn relevance(&self, a: &str, b: &str) -> Result<f64, MapError> {
        let a = self.find(a).ok_or_else(|| MapError::UnknownDocument(a.into()))?;
        let b = self.find(b).ok_or_else(|| MapError::UnknownDocument(b.into()))?;
        Ok(self.distance(a, b))
    }

    /// Closest non-excluded document to `point`; ties go to the smaller id.
    pub fn most_relevant(
        &self,
        point: &[f64],
        excluded: impl Fn(DocIdx) -> bool,
    ) -> Result<DocIdx, MapError> {
        let mut best: Option<(f64, DocIdx)> = None;
        for doc in self.doc_ids().filter(|d| !excluded(*d)) {
            let d = squared_distance(point, self.coord(doc));
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, doc));
            }
        }
        best.map(|(_, d)| d).ok_or(MapError::NoCandidates)
    }

    /// Uniform draw over the cluster's non-excluded members.
    pub fn random_from_cluster(
        &self,
        cluster: ClusterId,
        rng: &mut impl Rng,
        excluded: impl Fn(DocIdx) -> bool,
    ) -> Result<DocIdx, MapError> {
        let eligible: Vec<DocIdx> = self
            .members(cluster)
            .iter()
            .copied()
            .filter(|d| !excluded(*d))
            .collect();
        if eligible.is_empty() {
            return Err(MapError::EmptyCluster(cluster));
        }
        Ok(eligible[rng.random_range(0..eligible.len())])
    }

    /// Uniform draw over all non-excluded documents.
    pub fn random_document(
        &self,
        rng: &mut impl Rng,
        excluded: impl Fn(DocIdx) -> bool,
    ) -> Result<DocIdx, MapError> {
        let eligible: Vec<DocIdx> = self.doc_ids().filter(|d| !excluded(*d)).collect();
        if eligible.is_empty() {
            return Err(MapError::NoCandidates);
        }
        Ok(eligible[rng.random_range(0..eligible.len())])
    }

    /// Projects an unseen document with the existing projection and assigns
    /// it to the nearest centroid's cluster. The map itself is unchanged.
    pub fn place(&self, doc: &RawDocument) -> Result<Placement, MapError> {
        let (Some(vocab), Some(projection)) = (&self.vocabulary, &self.projection) else {
            return Err(MapError::Malformed("map has no projection".into()));
        };
        let analyzer = Analyzer::new(StopList::from_words(self.stop_words.iter().cloned()));
        let vector = vocab.vectorize(doc, &analyzer);
        let zero_vector = vector.is_zero();
        let coord = if zero_vector {
            vec![0.0; self.dimensionality]
        } else {
            projection.project_sparse(&vector)?
        };
        let cluster = self
            .centroids
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                squared_distance(&coord, a).total_cmp(&squared_distance(&coord, b))
            })
            .map(|(i, _)| ClusterId(i as u32))
            .ok_or(MapError::NoCandidates)?;
        Ok(Placement {
            coord,
            cluster,
            zero_vector,
        })
    }

    pub fn to_json_bytes(&self) -> Result<Vec<u8>, MapError> {
        let mut bytes = serde_json::to_vec(self)?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, MapError> {
        let mut map: Self = serde_json::from_slice(bytes)?;
        if map.format_version != MAP_FORMAT_VERSION {
            return Err(MapError::UnsupportedVersion(map.format_version));
        }
        map.index()?;
        Ok(map)
    }

    /// Writes atomically: a sibling temp file renamed over `path`.
    pub fn save(&self, path: &Path) -> Result<(), MapError> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&self.to_json_bytes()?)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, MapError> {
        Self::from_json_bytes(&fs::read(path)?)
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

fn sort_by_id(
    ids: Vec<String>,
    coords: Vec<Vec<f64>>,
    clusters: Vec<u32>,
) -> (Vec<String>, Vec<Vec<f64>>, Vec<u32>) {
    let mut order: Vec<usize> = (0..ids.len()).collect();
    order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
    let ids2 = order.iter().map(|&i| ids[i].clone()).collect();
    let coords2 = order.iter().map(|&i| coords[i].clone()).collect();
    let clusters2 = if clusters.is_empty() {
        clusters
    } else {
        order.iter().map(|&i| clusters[i]).collect()
    };
    (ids2, coords2, clusters2)
}
