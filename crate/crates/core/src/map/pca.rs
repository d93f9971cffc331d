//! Principal component analysis by exact symmetric eigendecomposition.
//!
//! When there are fewer samples than features the `n x n` Gram matrix of the
//! centered data is decomposed instead of the `d x d` covariance; both share
//! their non-zero spectrum and the covariance eigenvectors are recovered as
//! `X^T u / sqrt((n - 1) lambda)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::MapError;
use crate::text::TermVector;

/// Eigenvalues at or below this fraction of the largest are treated as zero.
const RELATIVE_ZERO: f64 = 1e-12;

/// A fitted linear projection onto the leading principal axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    mean: Vec<f64>,
    basis: Vec<Vec<f64>>,
    explained_variance: Vec<f64>,
    total_variance: f64,
}

impl Projection {
    pub fn target_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Orthonormal principal axes, strongest first.
    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// `basis^T (vector - mean)`.
    pub fn project(&self, vector: &[f64]) -> Result<Vec<f64>, MapError> {
        if vector.len() != self.mean.len() {
            return Err(MapError::DimensionMismatch {
                expected: self.mean.len(),
                got: vector.len(),
            });
        }
        Ok(self
            .basis
            .iter()
            .map(|axis| {
                axis.iter()
                    .zip(vector.iter().zip(&self.mean))
                    .map(|(a, (v, m))| a * (v - m))
                    .sum()
            })
            .collect())
    }

    /// Same as [`project`](Self::project) for a sparse tf.idf vector.
    pub fn project_sparse(&self, vector: &TermVector) -> Result<Vec<f64>, MapError> {
        if let Some(&(i, _)) = vector.weights().last() {
            if i as usize >= self.mean.len() {
                return Err(MapError::DimensionMismatch {
                    expected: self.mean.len(),
                    got: i as usize + 1,
                });
            }
        }
        Ok(self
            .basis
            .iter()
            .map(|axis| {
                let along_vector: f64 = vector
                    .weights()
                    .iter()
                    .map(|&(i, w)| axis[i as usize] * w)
                    .sum();
                let along_mean: f64 = axis.iter().zip(&self.mean).map(|(a, m)| a * m).sum();
                along_vector - along_mean
            })
            .collect())
    }

    /// Maps a coordinate back into the input space.
    pub fn reconstruct(&self, coord: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (axis, c) in self.basis.iter().zip(coord) {
            for (o, a) in out.iter_mut().zip(axis) {
                *o += c * a;
            }
        }
        out
    }

    /// Largest deviation of `basis * basis^T` from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate().skip(i) {
                let d = dot(a, b);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }
}

/// Full decomposition of a data set: every principal axis and the whole
/// eigenvalue spectrum.
#[derive(Debug, Clone)]
pub struct Pca {
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
    max_dim: usize,
}

impl Pca {
    /// Fits on dense rows of equal length.
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, MapError> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(MapError::DimensionMismatch {
                expected: d,
                got: rows.iter().map(Vec::len).find(|&l| l != d).unwrap_or(0),
            });
        }
        if n < 2 || d == 0 || !has_two_distinct(rows) {
            return Err(MapError::DegenerateInput);
        }
        let mean = column_mean(rows, d);
        let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
        let denom = (n - 1) as f64;
        let max_dim = (n - 1).min(d);

        let (eigenvalues, mut components) = if d <= n {
            let cov = centered.transpose() * &centered / denom;
            let (values, vectors) = sorted_eigen(cov);
            let comps = vectors.into_iter().take(max_dim).collect::<Vec<_>>();
            (values, comps)
        } else {
            let gram = &centered * centered.transpose() / denom;
            let (values, vectors) = sorted_eigen(gram);
            let top = values.first().copied().unwrap_or(0.0).max(0.0);
            let mut comps = Vec::with_capacity(max_dim);
            for (lambda, u) in values.iter().zip(&vectors).take(max_dim) {
                if *lambda <= top * RELATIVE_ZERO || *lambda <= 0.0 {
                    break;
                }
                let u = nalgebra::DVector::from_column_slice(u);
                let v = centered.transpose() * u / (denom * lambda).sqrt();
                comps.push(v.as_slice().to_vec());
            }
            (values, comps)
        };

        let top = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
        let eigenvalues: Vec<f64> = eigenvalues
            .into_iter()
            .map(|l| if l <= top * RELATIVE_ZERO { 0.0 } else { l })
            .collect();
        // Axes for a zero eigenvalue are arbitrary; keep only the
        // well-determined ones and complete the basis deterministically.
        let determined = eigenvalues.iter().take(max_dim).filter(|&&l| l > 0.0).count();
        components.truncate(determined);
        orthonormalize(&mut components);
        complete_basis(&mut components, d, max_dim);
        for c in &mut components {
            canonical_sign(c);
        }
        Ok(Self {
            mean,
            components,
            eigenvalues,
            max_dim,
        })
    }

    pub fn fit_term_vectors(vectors: &[TermVector], vocab_size: usize) -> Result<Self, MapError> {
        let rows: Vec<Vec<f64>> = vectors.iter().map(|v| v.to_dense(vocab_size)).collect();
        Self::fit(&rows)
    }

    /// All eigenvalues of the sample covariance, descending, clamped at zero.
    pub fn spectrum(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Largest usable target dimension, `min(n - 1, d)`.
    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    /// Smallest `d` whose cumulative explained-variance ratio reaches `tau`.
    pub fn intrinsic_dimensionality(&self, tau: f64) -> Result<usize, MapError> {
        let total: f64 = self.eigenvalues.iter().sum();
        if total <= 0.0 {
            return Err(MapError::DegenerateInput);
        }
        let mut cumulative = 0.0;
        for (i, l) in self.eigenvalues.iter().enumerate().take(self.max_dim) {
            cumulative += l;
            if cumulative / total >= tau - 1e-12 {
                return Ok(i + 1);
            }
        }
        Ok(self.max_dim)
    }

    pub fn projection(&self, target_dim: usize) -> Result<Projection, MapError> {
        if target_dim == 0 || target_dim > self.max_dim {
            return Err(MapError::InvalidDimension {
                requested: target_dim,
                max: self.max_dim,
            });
        }
        Ok(Projection {
            mean: self.mean.clone(),
            basis: self.components[..target_dim].to_vec(),
            explained_variance: self.eigenvalues[..target_dim].to_vec(),
            total_variance: self.eigenvalues.iter().sum(),
        })
    }
}

/// Fits a projection onto the top `target_dim` principal axes.
pub fn fit_pca(rows: &[Vec<f64>], target_dim: usize) -> Result<Projection, MapError> {
    Pca::fit(rows)?.projection(target_dim)
}

/// Smallest dimensionality retaining a `tau` fraction of total variance.
pub fn estimate_intrinsic_dimensionality(rows: &[Vec<f64>], tau: f64) -> Result<usize, MapError> {
    Pca::fit(rows)?.intrinsic_dimensionality(tau)
}

fn has_two_distinct(rows: &[Vec<f64>]) -> bool {
    rows.iter().skip(1).any(|r| r != &rows[0])
}

fn column_mean(rows: &[Vec<f64>], d: usize) -> Vec<f64> {
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = rows.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Eigenpairs of a symmetric matrix sorted by descending eigenvalue, ties by
/// original index.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    (values, vectors)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt in place; drops vectors that collapse to zero.
fn orthonormalize(vectors: &mut Vec<Vec<f64>>) {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors.drain(..) {
        for _ in 0..2 {
            for u in &out {
                let p = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-10 {
            v.iter_mut().for_each(|x| *x /= norm);
            out.push(v);
        }
    }
    *vectors = out;
}

/// Extends an orthonormal set to `target` vectors using standard basis
/// directions in index order.
fn complete_basis(vectors: &mut Vec<Vec<f64>>, d: usize, target: usize) {
    for axis in 0..d {
        if vectors.len() >= target {
            break;
        }
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        for _ in 0..2 {
            for u in vectors.iter() {
                let p = dot(&e, u);
                e.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
            }
        }
        let norm = dot(&e, &e).sqrt();
        if norm > 1e-6 {
            e.iter_mut().for_each(|x| *x /= norm);
            vectors.push(e);
        }
    }
}

/// Flips `v` so that its largest-magnitude entry is positive.
fn canonical_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| *x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
