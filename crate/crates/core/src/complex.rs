//! Simplicial structure on a cluster network and its dimension.
//!
//! Fix a subfamily `r` of metrics and a vertex `I` that is a ball for every
//! metric in `r`. Let `J` be the least such common ball strictly above `I`.
//! For each `s` in `r`, the `s`-balls between `I` and `J` (both included)
//! form a chain; every subset of that chain with at least two elements is a
//! simplex. The `r`-dimension of `(I, J)` is the length of the longest such
//! chain minus one.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::dendrogram::MemberSet;
use crate::network::{ClusterNetwork, MetricId, NetworkError, Superball, VertexId};

/// Longest chain whose subsets are enumerated explicitly.
pub const MAX_CHAIN_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("vertex {lower} is not contained in vertex {upper}")]
    NotContained { lower: VertexId, upper: VertexId },
    #[error("vertex {vertex} is not a ball of metric `{metric}`")]
    NotBall { vertex: VertexId, metric: MetricId },
    #[error("vertex {upper} is not the least common ball above vertex {lower}")]
    NotMinimalSuperball { lower: VertexId, upper: VertexId },
    #[error("vertex {vertex} has several minimal common balls above it: {candidates:?}")]
    Ambiguous {
        vertex: VertexId,
        candidates: Vec<VertexId>,
    },
    #[error("chain of {len} balls exceeds the enumeration limit of {MAX_CHAIN_LEN}")]
    ChainTooLong { len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatibilityViolation {
    pub first: VertexId,
    pub first_metric: MetricId,
    pub second: VertexId,
    pub second_metric: MetricId,
    /// Point indices of the intersection, which is a ball of no metric.
    pub intersection: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatibilityReport {
    pub compatible: bool,
    pub checked_pairs: usize,
    pub violations: Vec<CompatibilityViolation>,
}

/// Checks that any two intersecting balls of different metrics meet in a
/// ball of some metric of the family.
pub fn check_compatibility(net: &ClusterNetwork) -> CompatibilityReport {
    let vertices = net.vertices();
    let mut checked = 0;
    let mut violations = Vec::new();
    for a in 0..vertices.len() {
        for b in (a + 1)..vertices.len() {
            let witness = vertices[a].present_in().find_map(|s| {
                vertices[b]
                    .present_in()
                    .find(|t| *t != s)
                    .map(|t| (s.clone(), t.clone()))
            });
            let Some((s, t)) = witness else { continue };
            let meet = vertices[a].members.intersection(&vertices[b].members);
            if meet.is_empty() {
                continue;
            }
            checked += 1;
            if net.find(&meet).is_none() {
                violations.push(CompatibilityViolation {
                    first: a,
                    first_metric: s,
                    second: b,
                    second_metric: t,
                    intersection: meet.as_slice().to_vec(),
                });
            }
        }
    }
    CompatibilityReport {
        compatible: violations.is_empty(),
        checked_pairs: checked,
        violations,
    }
}

/// The `metric`-balls `K` with `lower ⊆ K ⊆ upper`, ordered by inclusion.
pub fn intermediary_chain(
    net: &ClusterNetwork,
    lower: VertexId,
    upper: VertexId,
    metric: &MetricId,
) -> Result<Vec<VertexId>, ComplexError> {
    net.metric_index(metric)?;
    for v in [lower, upper] {
        if !net.vertex(v)?.is_ball_of(metric) {
            return Err(ComplexError::NotBall {
                vertex: v,
                metric: metric.clone(),
            });
        }
    }
    let low = &net.vertices()[lower].members;
    let high = &net.vertices()[upper].members;
    if !low.is_subset(high) {
        return Err(ComplexError::NotContained { lower, upper });
    }
    // Vertex ids follow (size, members) order, so a chain is increasing.
    Ok((lower..=upper)
        .filter(|&k| {
            let v = &net.vertices()[k];
            v.is_ball_of(metric) && low.is_subset(&v.members) && v.members.is_subset(high)
        })
        .collect())
}

/// The least common `r`-ball strictly above `vertex`, or `None` at the top.
pub fn common_superball(
    net: &ClusterNetwork,
    vertex: VertexId,
    r: &[MetricId],
) -> Result<Option<VertexId>, ComplexError> {
    match net.minimal_common_superball(vertex, r)? {
        Superball::Found(upper) => Ok(Some(upper)),
        Superball::NoneAbove => Ok(None),
        Superball::Ambiguous(candidates) => Err(ComplexError::Ambiguous { vertex, candidates }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Simplex {
    /// Vertex ids, increasing; their member sets form a strict chain.
    pub vertices: Vec<VertexId>,
    pub witness: MetricId,
    pub anchor: (VertexId, VertexId),
}

impl Simplex {
    pub fn dimension(&self) -> usize {
        self.vertices.len() - 1
    }
}

fn checked_anchor(
    net: &ClusterNetwork,
    lower: VertexId,
    upper: VertexId,
    r: &[MetricId],
) -> Result<(), ComplexError> {
    match common_superball(net, lower, r)? {
        Some(found) if found == upper => Ok(()),
        _ => Err(ComplexError::NotMinimalSuperball { lower, upper }),
    }
}

fn subfamily(r: &[MetricId]) -> Vec<MetricId> {
    r.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect()
}

/// Every subset (of size at least two) of each single-metric chain between
/// `lower` and its least common superball `upper`, deduplicated by vertex
/// set. The first metric in id order is kept as the witness.
pub fn simplices_for_pair(
    net: &ClusterNetwork,
    lower: VertexId,
    upper: VertexId,
    r: &[MetricId],
) -> Result<Vec<Simplex>, ComplexError> {
    checked_anchor(net, lower, upper, r)?;
    let mut out: BTreeMap<Vec<VertexId>, Simplex> = BTreeMap::new();
    for metric in subfamily(r) {
        let chain = intermediary_chain(net, lower, upper, &metric)?;
        if chain.len() > MAX_CHAIN_LEN {
            return Err(ComplexError::ChainTooLong { len: chain.len() });
        }
        for mask in 0u32..(1 << chain.len()) {
            if mask.count_ones() < 2 {
                continue;
            }
            let vertices: Vec<VertexId> = chain
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &v)| v)
                .collect();
            out.entry(vertices.clone()).or_insert_with(|| Simplex {
                vertices,
                witness: metric.clone(),
                anchor: (lower, upper),
            });
        }
    }
    Ok(out.into_values().collect())
}

/// A pair whose least common superball is not unique; it contributes no
/// simplices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AmbiguityWarning {
    pub vertex: VertexId,
    pub candidates: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    subfamily: Vec<MetricId>,
    simplices: BTreeMap<Vec<VertexId>, Simplex>,
    warnings: Vec<AmbiguityWarning>,
}

impl SimplicialComplex {
    pub fn subfamily(&self) -> &[MetricId] {
        &self.subfamily
    }

    /// Simplices ordered by their vertex lists.
    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.simplices.values()
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn warnings(&self) -> &[AmbiguityWarning] {
        &self.warnings
    }

    pub fn contains(&self, vertices: &[VertexId]) -> bool {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.simplices.contains_key(&key)
    }

    /// Largest simplex dimension, or `None` for an empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.values().map(Simplex::dimension).max()
    }

    /// Simplices not contained in any other simplex.
    pub fn maximal_simplices(&self) -> Vec<&Simplex> {
        self.simplices
            .values()
            .filter(|s| {
                !self.simplices.values().any(|t| {
                    t.vertices.len() > s.vertices.len()
                        && s.vertices.iter().all(|v| t.vertices.contains(v))
                })
            })
            .collect()
    }

    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        self.simplices
            .keys()
            .filter(|k| k.len() == 2)
            .map(|k| (k[0], k[1]))
            .collect()
    }

    /// Every face of size at least two of every simplex is present.
    pub fn is_downward_closed(&self) -> bool {
        self.simplices.keys().all(|key| {
            (0u32..(1 << key.len()))
                .filter(|m| m.count_ones() >= 2)
                .all(|m| {
                    let face: Vec<VertexId> = key
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| m & (1 << i) != 0)
                        .map(|(_, &v)| v)
                        .collect();
                    self.simplices.contains_key(&face)
                })
        })
    }
}

/// Union of [`simplices_for_pair`] over every `r`-ball with a least common
/// superball. Vertices with ambiguous superballs are skipped and recorded.
pub fn build_complex(
    net: &ClusterNetwork,
    r: &[MetricId],
) -> Result<SimplicialComplex, ComplexError> {
    net.check_subfamily(r)?;
    let mut simplices = BTreeMap::new();
    let mut warnings = Vec::new();
    for lower in 0..net.vertices().len() {
        if !net.is_r_ball(lower, r)? {
            continue;
        }
        let upper = match common_superball(net, lower, r) {
            Ok(Some(upper)) => upper,
            Ok(None) => continue,
            Err(ComplexError::Ambiguous { vertex, candidates }) => {
                warnings.push(AmbiguityWarning { vertex, candidates });
                continue;
            }
            Err(e) => return Err(e),
        };
        for simplex in simplices_for_pair(net, lower, upper, r)? {
            simplices
                .entry(simplex.vertices.clone())
                .or_insert(simplex);
        }
    }
    Ok(SimplicialComplex {
        subfamily: subfamily(r),
        simplices,
        warnings,
    })
}

/// Length of the longest single-metric chain between `lower` and its least
/// common superball `upper`, minus one.
pub fn r_dimension(
    net: &ClusterNetwork,
    lower: VertexId,
    upper: VertexId,
    r: &[MetricId],
) -> Result<usize, ComplexError> {
    checked_anchor(net, lower, upper, r)?;
    let mut longest = 0;
    for metric in subfamily(r) {
        longest = longest.max(intermediary_chain(net, lower, upper, &metric)?.len());
    }
    Ok(longest - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairDimension {
    pub lower: VertexId,
    pub upper: VertexId,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DimensionReport {
    pub subfamily: Vec<MetricId>,
    pub pairs: Vec<PairDimension>,
    /// Maximum over `pairs`; zero when there are none.
    pub overall: usize,
    pub ambiguous: Vec<AmbiguityWarning>,
}

pub fn network_dimension(
    net: &ClusterNetwork,
    r: &[MetricId],
) -> Result<DimensionReport, ComplexError> {
    net.check_subfamily(r)?;
    let mut pairs = Vec::new();
    let mut ambiguous = Vec::new();
    for lower in 0..net.vertices().len() {
        if !net.is_r_ball(lower, r)? {
            continue;
        }
        match common_superball(net, lower, r) {
            Ok(Some(upper)) => pairs.push(PairDimension {
                lower,
                upper,
                dimension: r_dimension(net, lower, upper, r)?,
            }),
            Ok(None) => {}
            Err(ComplexError::Ambiguous { vertex, candidates }) => {
                ambiguous.push(AmbiguityWarning { vertex, candidates })
            }
            Err(e) => return Err(e),
        }
    }
    let overall = pairs.iter().map(|p| p.dimension).max().unwrap_or(0);
    Ok(DimensionReport {
        subfamily: subfamily(r),
        pairs,
        overall,
        ambiguous,
    })
}

/// Member sets of a simplex, for callers that want to check the chain
/// property directly.
pub fn simplex_members<'a>(net: &'a ClusterNetwork, simplex: &Simplex) -> Vec<&'a MemberSet> {
    simplex
        .vertices
        .iter()
        .map(|&v| &net.vertices()[v].members)
        .collect()
}
