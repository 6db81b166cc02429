//! Cluster networks: the union of the cluster trees of a metric family,
//! with clusters identified when they have the same members.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dendrogram::{canonical_dendrogram, Cluster, Dendrogram, MemberSet};
use crate::metric::Label;
use crate::rational::Rational;

/// Opaque name of one metric in a family.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricId(String);

impl MetricId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MetricId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NetworkError {
    #[error("metric family is empty")]
    EmptyFamily,
    #[error("{dendrograms} dendrograms but {ids} metric ids")]
    LengthMismatch { dendrograms: usize, ids: usize },
    #[error("duplicate metric id `{0}`")]
    DuplicateMetric(MetricId),
    #[error("dendrogram for `{0}` is over a different label set")]
    LabelMismatch(MetricId),
    #[error("unknown metric id `{0}`")]
    UnknownMetric(MetricId),
    #[error("metric subfamily is empty")]
    EmptySubfamily,
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("vertex {vertex} is not a ball for every metric in the subfamily")]
    NotSubfamilyBall { vertex: usize },
}

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkVertex {
    pub members: MemberSet,
    /// Radius at which the cluster appears, for each metric it belongs to.
    pub radius_by_metric: BTreeMap<MetricId, Rational>,
}

impl NetworkVertex {
    pub fn present_in(&self) -> impl Iterator<Item = &MetricId> {
        self.radius_by_metric.keys()
    }

    pub fn is_ball_of(&self, metric: &MetricId) -> bool {
        self.radius_by_metric.contains_key(metric)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkEdge {
    pub child: VertexId,
    pub parent: VertexId,
    pub metrics: BTreeSet<MetricId>,
}

/// Result of looking for the least common ball strictly above a vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Superball {
    Found(VertexId),
    /// No common ball strictly contains the vertex.
    NoneAbove,
    /// Several minimal common balls, pairwise incomparable.
    Ambiguous(Vec<VertexId>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterNetwork {
    labels: Vec<Label>,
    metrics: Vec<MetricId>,
    vertices: Vec<NetworkVertex>,
    edges: Vec<NetworkEdge>,
}

/// Fuses one dendrogram per metric into a single network.
///
/// Vertices are keyed by member set; an inclusion pair that is an edge in
/// several trees becomes one edge tagged with all of their ids. The result
/// does not depend on the order of the inputs.
pub fn merge_dendrograms(
    dendrograms: &[Dendrogram],
    ids: &[MetricId],
) -> Result<ClusterNetwork, NetworkError> {
    if dendrograms.len() != ids.len() {
        return Err(NetworkError::LengthMismatch {
            dendrograms: dendrograms.len(),
            ids: ids.len(),
        });
    }
    if dendrograms.is_empty() {
        return Err(NetworkError::EmptyFamily);
    }
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(NetworkError::DuplicateMetric(id.clone()));
        }
    }
    let labels = dendrograms[0].labels().to_vec();
    for (d, id) in dendrograms.iter().zip(ids) {
        if d.labels() != labels.as_slice() {
            return Err(NetworkError::LabelMismatch(id.clone()));
        }
    }

    let mut vertices: BTreeMap<MemberSet, BTreeMap<MetricId, Rational>> = BTreeMap::new();
    for (d, id) in dendrograms.iter().zip(ids) {
        for cluster in d.clusters() {
            vertices
                .entry(cluster.members.clone())
                .or_default()
                .insert(id.clone(), cluster.radius.clone());
        }
    }
    let vertices: Vec<NetworkVertex> = vertices
        .into_iter()
        .map(|(members, radius_by_metric)| NetworkVertex {
            members,
            radius_by_metric,
        })
        .collect();
    let position = |members: &MemberSet| {
        vertices
            .binary_search_by(|v| v.members.cmp(members))
            .expect("every cluster became a vertex")
    };

    let mut edges: BTreeMap<(VertexId, VertexId), BTreeSet<MetricId>> = BTreeMap::new();
    for (d, id) in dendrograms.iter().zip(ids) {
        for (child, parent) in d.edges() {
            let key = (
                position(&d.clusters()[child].members),
                position(&d.clusters()[parent].members),
            );
            edges.entry(key).or_default().insert(id.clone());
        }
    }

    let mut metrics = ids.to_vec();
    metrics.sort();
    Ok(ClusterNetwork {
        labels,
        metrics,
        vertices,
        edges: edges
            .into_iter()
            .map(|((child, parent), metrics)| NetworkEdge {
                child,
                parent,
                metrics,
            })
            .collect(),
    })
}

impl ClusterNetwork {
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Metric ids of the family, sorted.
    pub fn metrics(&self) -> &[MetricId] {
        &self.metrics
    }

    pub fn vertices(&self) -> &[NetworkVertex] {
        &self.vertices
    }

    pub fn vertex(&self, id: VertexId) -> Result<&NetworkVertex, NetworkError> {
        self.vertices.get(id).ok_or(NetworkError::UnknownVertex(id))
    }

    pub fn edges(&self) -> &[NetworkEdge] {
        &self.edges
    }

    pub fn find(&self, members: &MemberSet) -> Option<VertexId> {
        self.vertices
            .binary_search_by(|v| v.members.cmp(members))
            .ok()
    }

    /// Looks a vertex up by label names.
    pub fn find_by_names(&self, names: &[&str]) -> Option<VertexId> {
        let mut members = Vec::with_capacity(names.len());
        for name in names {
            members.push(self.labels.binary_search_by(|l| l.as_str().cmp(name)).ok()?);
        }
        self.find(&MemberSet::new(members))
    }

    /// Concatenated member names, used as a human-readable vertex name.
    pub fn vertex_name(&self, id: VertexId) -> String {
        let names = self.vertices[id].members.names(&self.labels);
        if names.iter().all(|n| n.chars().count() == 1) {
            names.concat()
        } else {
            names.join(",")
        }
    }

    pub fn metric_index(&self, metric: &MetricId) -> Result<usize, NetworkError> {
        self.metrics
            .binary_search(metric)
            .map_err(|_| NetworkError::UnknownMetric(metric.clone()))
    }

    pub(crate) fn check_subfamily(&self, r: &[MetricId]) -> Result<(), NetworkError> {
        if r.is_empty() {
            return Err(NetworkError::EmptySubfamily);
        }
        for metric in r {
            self.metric_index(metric)?;
        }
        Ok(())
    }

    /// The cluster tree of one metric, recovered from the network.
    pub fn restrict(&self, metric: &MetricId) -> Result<Dendrogram, NetworkError> {
        self.metric_index(metric)?;
        let ids: Vec<VertexId> = (0..self.vertices.len())
            .filter(|&v| self.vertices[v].is_ball_of(metric))
            .collect();
        let local: BTreeMap<VertexId, usize> =
            ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let clusters = ids
            .iter()
            .map(|&v| Cluster {
                members: self.vertices[v].members.clone(),
                radius: self.vertices[v].radius_by_metric[metric].clone(),
            })
            .collect();
        let mut parents = vec![None; ids.len()];
        for edge in self.edges.iter().filter(|e| e.metrics.contains(metric)) {
            parents[local[&edge.child]] = Some(local[&edge.parent]);
        }
        Ok(canonical_dendrogram(self.labels.clone(), clusters, parents))
    }

    /// True iff `vertex` is a ball for every metric in `r`.
    pub fn is_r_ball(&self, vertex: VertexId, r: &[MetricId]) -> Result<bool, NetworkError> {
        self.check_subfamily(r)?;
        let v = self.vertex(vertex)?;
        Ok(r.iter().all(|m| v.is_ball_of(m)))
    }

    /// The least ball common to all metrics in `r` that strictly contains
    /// `vertex`. Incomparable minimal candidates are reported, not resolved.
    pub fn minimal_common_superball(
        &self,
        vertex: VertexId,
        r: &[MetricId],
    ) -> Result<Superball, NetworkError> {
        if !self.is_r_ball(vertex, r)? {
            return Err(NetworkError::NotSubfamilyBall { vertex });
        }
        let base = &self.vertices[vertex].members;
        let candidates: Vec<VertexId> = (0..self.vertices.len())
            .filter(|&w| {
                let v = &self.vertices[w];
                base.is_strict_subset(&v.members) && r.iter().all(|m| v.is_ball_of(m))
            })
            .collect();
        let minimal: Vec<VertexId> = candidates
            .iter()
            .copied()
            .filter(|&w| {
                !candidates.iter().any(|&u| {
                    self.vertices[u]
                        .members
                        .is_strict_subset(&self.vertices[w].members)
                })
            })
            .collect();
        Ok(match minimal.as_slice() {
            [] => Superball::NoneAbove,
            [only] => Superball::Found(*only),
            _ => Superball::Ambiguous(minimal),
        })
    }

    /// A cycle basis of the underlying undirected graph.
    ///
    /// Each cycle starts at its smallest vertex id and proceeds towards the
    /// smaller of that vertex's two neighbours on the cycle. The number of
    /// cycles is `E - V + components`.
    pub fn undirected_cycles(&self) -> Vec<Vec<VertexId>> {
        let n = self.vertices.len();
        let mut adjacency: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for e in &self.edges {
            adjacency[e.child].push(e.parent);
            adjacency[e.parent].push(e.child);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let mut parent: Vec<Option<VertexId>> = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut tree_edges = BTreeSet::new();
        for start in 0..n {
            if depth[start] != usize::MAX {
                continue;
            }
            depth[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adjacency[v] {
                    if depth[w] == usize::MAX {
                        depth[w] = depth[v] + 1;
                        parent[w] = Some(v);
                        tree_edges.insert((v.min(w), v.max(w)));
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut cycles = Vec::new();
        for e in &self.edges {
            let key = (e.child.min(e.parent), e.child.max(e.parent));
            if tree_edges.contains(&key) {
                continue;
            }
            let (mut a, mut b) = (e.child, e.parent);
            let mut left = vec![a];
            let mut right = vec![b];
            while a != b {
                if depth[a] >= depth[b] {
                    a = parent[a].expect("non-root has a parent");
                    left.push(a);
                } else {
                    b = parent[b].expect("non-root has a parent");
                    right.push(b);
                }
            }
            right.pop();
            right.reverse();
            left.extend(right);
            cycles.push(canonical_cycle(left));
        }
        cycles.sort();
        cycles
    }
}

fn canonical_cycle(mut cycle: Vec<VertexId>) -> Vec<VertexId> {
    let start = cycle
        .iter()
        .enumerate()
        .min_by_key(|(_, v)| **v)
        .map(|(i, _)| i)
        .unwrap_or(0);
    cycle.rotate_left(start);
    if cycle.len() > 2 && cycle[cycle.len() - 1] < cycle[1] {
        cycle[1..].reverse();
    }
    cycle
}
