//! The tree of chain-distance clusters of a single dissimilarity.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::metric::{minimum_spanning_tree, DistanceMatrix, Label, Partition, UnionFind};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DendrogramError {
    #[error("point set is empty")]
    Empty,
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
}

/// Sorted set of point indices identifying a cluster extensionally.
///
/// Ordered by size first, then lexicographically; this is the canonical
/// vertex order used for serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemberSet(Vec<usize>);

impl MemberSet {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, point: usize) -> bool {
        self.0.binary_search(&point).is_ok()
    }

    pub fn is_subset(&self, other: &MemberSet) -> bool {
        self.len() <= other.len() && self.0.iter().all(|&p| other.contains(p))
    }

    pub fn is_strict_subset(&self, other: &MemberSet) -> bool {
        self.len() < other.len() && self.is_subset(other)
    }

    pub fn intersection(&self, other: &MemberSet) -> MemberSet {
        MemberSet(self.0.iter().copied().filter(|&p| other.contains(p)).collect())
    }

    pub fn names<'a>(&self, labels: &'a [Label]) -> Vec<&'a str> {
        self.0.iter().map(|&i| labels[i].as_str()).collect()
    }
}

impl Ord for MemberSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MemberSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A chain-distance ball, together with the least radius at which it
/// appears.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    pub members: MemberSet,
    pub radius: Rational,
}

/// Clusters of one dissimilarity ordered by inclusion. Edges join each
/// cluster to the smallest cluster strictly containing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dendrogram {
    labels: Vec<Label>,
    clusters: Vec<Cluster>,
    parents: Vec<Option<usize>>,
}

impl Dendrogram {
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Clusters in canonical order (size, then members).
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn parent(&self, cluster: usize) -> Option<usize> {
        self.parents[cluster]
    }

    pub fn root(&self) -> usize {
        self.clusters.len() - 1
    }

    /// `(child, parent)` pairs, ordered by child.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.parents
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|parent| (child, parent)))
            .collect()
    }

    pub fn find(&self, members: &MemberSet) -> Option<usize> {
        self.clusters.binary_search_by(|c| c.members.cmp(members)).ok()
    }

    pub fn leaves(&self) -> Vec<usize> {
        let mut has_child = vec![false; self.clusters.len()];
        for p in self.parents.iter().flatten() {
            has_child[*p] = true;
        }
        (0..self.clusters.len()).filter(|&c| !has_child[c]).collect()
    }

    /// The smallest cluster containing `point`.
    pub fn leaf_of(&self, point: usize) -> usize {
        self.clusters
            .iter()
            .position(|c| c.members.contains(point))
            .expect("leaves cover the point set")
    }

    /// Index of the least cluster containing both points.
    pub fn sup_index(&self, a: usize, b: usize) -> usize {
        let mut node = self.leaf_of(a);
        while !self.clusters[node].members.contains(b) {
            node = self.parents[node].expect("root contains every point");
        }
        node
    }

    /// The least cluster containing both labelled points.
    pub fn sup_cluster(&self, a: &str, b: &str) -> Result<&Cluster, DendrogramError> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        Ok(&self.clusters[self.sup_index(ia, ib)])
    }

    /// Cut at height `eps`: the maximal clusters of radius at most `eps`.
    pub fn clusters_at(&self, eps: &Rational) -> Partition {
        let mut blocks = Vec::new();
        for (idx, cluster) in self.clusters.iter().enumerate() {
            if &cluster.radius > eps {
                continue;
            }
            let parent_fits = self.parents[idx].is_some_and(|p| &self.clusters[p].radius <= eps);
            if !parent_fits {
                blocks.push(cluster.members.as_slice().to_vec());
            }
        }
        Partition::from_blocks(blocks)
    }

    fn index_of(&self, name: &str) -> Result<usize, DendrogramError> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(name))
            .map_err(|_| DendrogramError::UnknownLabel(name.to_string()))
    }
}

/// Builds the cluster tree of `matrix`.
///
/// Points are merged by increasing minimum-spanning-tree weight; every edge
/// of a given weight is applied at once, so equal merge heights produce a
/// single multi-way merge and no tie-breaking is involved.
pub fn build_dendrogram(matrix: &DistanceMatrix) -> Result<Dendrogram, DendrogramError> {
    let n = matrix.len();
    if n == 0 {
        return Err(DendrogramError::Empty);
    }
    let mut tree = minimum_spanning_tree(matrix);
    tree.sort_by(|a, b| a.2.cmp(&b.2));

    let mut components = UnionFind::new(n);
    let mut next_edge = 0;
    while next_edge < tree.len() && tree[next_edge].2.is_zero() {
        components.union(tree[next_edge].0, tree[next_edge].1);
        next_edge += 1;
    }

    let mut clusters: Vec<Cluster> = Vec::new();
    let mut parents: Vec<Option<usize>> = Vec::new();
    // uf root -> index of the current top cluster of that component
    let mut top: BTreeMap<usize, usize> = BTreeMap::new();
    for block in components.partition().blocks() {
        let root = components.find(block[0]);
        top.insert(root, clusters.len());
        clusters.push(Cluster {
            members: MemberSet::new(block.clone()),
            radius: Rational::zero(),
        });
        parents.push(None);
    }

    while next_edge < tree.len() {
        let weight = tree[next_edge].2.clone();
        let mut group_end = next_edge;
        while group_end < tree.len() && tree[group_end].2 == weight {
            group_end += 1;
        }
        let mut merged: Vec<usize> = Vec::new();
        for (a, b, _) in &tree[next_edge..group_end] {
            merged.push(components.find(*a));
            merged.push(components.find(*b));
        }
        for (a, b, _) in &tree[next_edge..group_end] {
            components.union(*a, *b);
        }
        merged.sort_unstable();
        merged.dedup();

        let mut children: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for old_root in merged {
            let cluster = top.remove(&old_root).expect("component has a top cluster");
            children
                .entry(components.find(old_root))
                .or_default()
                .push(cluster);
        }
        for (new_root, kids) in children {
            let members = MemberSet::new(
                kids.iter()
                    .flat_map(|&c| clusters[c].members.as_slice().iter().copied())
                    .collect(),
            );
            let id = clusters.len();
            for &kid in &kids {
                parents[kid] = Some(id);
            }
            clusters.push(Cluster {
                members,
                radius: weight.clone(),
            });
            parents.push(None);
            top.insert(new_root, id);
        }
        next_edge = group_end;
    }

    Ok(canonical_dendrogram(matrix.labels().to_vec(), clusters, parents))
}

pub(crate) fn canonical_dendrogram(
    labels: Vec<Label>,
    clusters: Vec<Cluster>,
    parents: Vec<Option<usize>>,
) -> Dendrogram {
    let mut order: Vec<usize> = (0..clusters.len()).collect();
    order.sort_by(|&a, &b| clusters[a].members.cmp(&clusters[b].members));
    let mut position = vec![0; clusters.len()];
    for (new, &old) in order.iter().enumerate() {
        position[old] = new;
    }
    Dendrogram {
        labels,
        parents: order
            .iter()
            .map(|&old| parents[old].map(|p| position[p]))
            .collect(),
        clusters: order.into_iter().map(|old| clusters[old].clone()).collect(),
    }
}
