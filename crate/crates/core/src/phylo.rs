//! Metric families from weighted sums of per-marker distances.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::Deserialize;
use thiserror::Error;

use crate::dendrogram::{build_dendrogram, Dendrogram};
use crate::metric::{DistanceMatrix, MatrixError};
use crate::network::{merge_dendrograms, ClusterNetwork, MetricId, NetworkError};
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhyloError {
    #[error("no markers")]
    NoMarkers,
    #[error("duplicate marker id {0}")]
    DuplicateMarker(String),
    #[error("marker {0} does not share the taxon labels of the first marker")]
    LabelMismatch(String),
    #[error("{expected} markers but {found} weights")]
    LengthMismatch { expected: usize, found: usize },
    #[error("weight {0} is negative")]
    NegativeWeight(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("all weights are zero")]
    ZeroWeights,
    #[error("empty weight grid")]
    EmptyGrid,
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSet {
    markers: Vec<(String, DistanceMatrix)>,
}

impl MarkerSet {
    pub fn new(markers: Vec<(String, DistanceMatrix)>) -> Result<Self, PhyloError> {
        let Some((_, first)) = markers.first() else {
            return Err(PhyloError::NoMarkers);
        };
        let mut seen = BTreeSet::new();
        for (id, matrix) in &markers {
            if !seen.insert(id.as_str()) {
                return Err(PhyloError::DuplicateMarker(id.clone()));
            }
            if matrix.labels() != first.labels() {
                return Err(PhyloError::LabelMismatch(id.clone()));
            }
        }
        Ok(Self { markers })
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.markers.iter().map(|(id, _)| id.as_str())
    }

    pub fn marker(&self, index: usize) -> &DistanceMatrix {
        &self.markers[index].1
    }
}

/// Nonnegative weights, not all zero.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WeightVector(Vec<Rational>);

impl WeightVector {
    pub fn new(weights: Vec<Rational>) -> Result<Self, PhyloError> {
        if let Some(w) = weights.iter().find(|w| **w < Rational::zero()) {
            return Err(PhyloError::NegativeWeight(format_rational(w)));
        }
        if weights.iter().all(Zero::is_zero) {
            return Err(PhyloError::ZeroWeights);
        }
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    /// Scaled to sum to one.
    pub fn normalized(&self) -> Self {
        let total: Rational = self.0.iter().sum();
        Self(self.0.iter().map(|w| w / &total).collect())
    }

    pub fn id(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(format_rational).collect();
        format!("w=({})", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GridSpec {
    Simplex { resolution: u32 },
    Explicit { weights: Vec<Vec<String>> },
}

/// Normalized, deduplicated weight vectors in a fixed order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepGrid(Vec<WeightVector>);

impl SweepGrid {
    pub fn explicit(vectors: Vec<WeightVector>) -> Result<Self, PhyloError> {
        if vectors.is_empty() {
            return Err(PhyloError::EmptyGrid);
        }
        let unique: BTreeSet<WeightVector> = vectors.iter().map(WeightVector::normalized).collect();
        Ok(Self(unique.into_iter().collect()))
    }

    /// All `w` with `w_j = k_j / n`, `k_j >= 0`, `sum k_j = n`, for
    /// `markers` markers and resolution `n`.
    pub fn simplex(markers: usize, resolution: u32) -> Result<Self, PhyloError> {
        if markers == 0 {
            return Err(PhyloError::NoMarkers);
        }
        if resolution == 0 {
            return Err(PhyloError::ZeroResolution);
        }
        let mut vectors = Vec::new();
        let mut current = Vec::with_capacity(markers);
        compositions(markers, resolution, &mut current, &mut vectors);
        let n = Rational::from_integer(resolution.into());
        let weights = vectors
            .into_iter()
            .map(|ks| {
                WeightVector::new(
                    ks.into_iter()
                        .map(|k| Rational::from_integer(k.into()) / &n)
                        .collect(),
                )
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::explicit(weights)
    }

    pub fn from_spec(spec: &GridSpec, markers: usize) -> Result<Self, PhyloError> {
        match spec {
            GridSpec::Simplex { resolution } => Self::simplex(markers, *resolution),
            GridSpec::Explicit { weights } => {
                let mut vectors = Vec::with_capacity(weights.len());
                for row in weights {
                    let parsed = row
                        .iter()
                        .map(|s| crate::rational::parse_rational(s))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|e| PhyloError::InvalidWeight(e.to_string()))?;
                    vectors.push(WeightVector::new(parsed)?);
                }
                Self::explicit(vectors)
            }
        }
    }

    pub fn vectors(&self) -> &[WeightVector] {
        &self.0
    }
}

fn compositions(parts: usize, total: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        current.push(total);
        out.push(current.clone());
        current.pop();
        return;
    }
    for k in 0..=total {
        current.push(k);
        compositions(parts - 1, total - k, current, out);
        current.pop();
    }
}

/// `d(x, y) = sum_j w_j d_j(x, y)`.
pub fn combine(markers: &MarkerSet, weights: &WeightVector) -> Result<DistanceMatrix, PhyloError> {
    if weights.0.len() != markers.len() {
        return Err(PhyloError::LengthMismatch {
            expected: markers.len(),
            found: weights.0.len(),
        });
    }
    let first = markers.marker(0);
    let n = first.len();
    let mut entries = vec![vec![Rational::zero(); n]; n];
    for ((_, matrix), w) in markers.markers.iter().zip(&weights.0) {
        if w.is_zero() {
            continue;
        }
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += w * matrix.get(i, j);
            }
        }
    }
    let labels: Vec<String> = first.labels().iter().map(|l| l.as_str().to_string()).collect();
    Ok(DistanceMatrix::new(labels, entries)?)
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub network: ClusterNetwork,
    /// Every grid vector with the metric id of the tree it produced.
    pub assignments: Vec<(String, MetricId)>,
}

/// One tree per weight vector; vectors that give the same clusters share a
/// metric id (the first such vector's).
pub fn sweep(markers: &MarkerSet, grid: &SweepGrid) -> Result<SweepResult, PhyloError> {
    if grid.0.is_empty() {
        return Err(PhyloError::EmptyGrid);
    }
    let mut trees: Vec<Dendrogram> = Vec::new();
    let mut ids: Vec<MetricId> = Vec::new();
    let mut assignments = Vec::new();
    for w in &grid.0 {
        let tree = build_dendrogram(&combine(markers, w)?).expect("markers are nonempty");
        let existing = trees.iter().position(|t| same_clusters(t, &tree));
        let id = match existing {
            Some(k) => ids[k].clone(),
            None => {
                let id = MetricId::new(w.id());
                trees.push(tree);
                ids.push(id.clone());
                id
            }
        };
        assignments.push((w.id(), id));
    }
    let network = merge_dendrograms(&trees, &ids)?;
    Ok(SweepResult {
        network,
        assignments,
    })
}

fn same_clusters(a: &Dendrogram, b: &Dendrogram) -> bool {
    a.clusters().len() == b.clusters().len()
        && a.clusters()
            .iter()
            .zip(b.clusters())
            .all(|(x, y)| x.members == y.members)
}
