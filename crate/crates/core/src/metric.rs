//! Finite dissimilarity spaces and their chain distance.
//!
//! A [`DistanceMatrix`] holds an exact symmetric dissimilarity over a set of
//! labelled points. Its chain distance (the least `eps` for which two points
//! are joined by a sequence of hops of length at most `eps`) is the
//! subdominant ultrametric, returned as an [`UltrametricMatrix`].

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{exact_sqrt, format_rational, Rational};

/// Name of a point. Points are always stored in lexicographic label order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Result<Self, MatrixError> {
        let name = name.into();
        if name.is_empty() {
            return Err(MatrixError::EmptyLabel);
        }
        Ok(Self(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("point set is empty")]
    Empty,
    #[error("label is empty")]
    EmptyLabel,
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("row {row} has {found} entries, expected {expected}")]
    NotSquare {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("asymmetric entries at ({row}, {col}): {forward} vs {backward}")]
    Asymmetric {
        row: String,
        col: String,
        forward: String,
        backward: String,
    },
    #[error("negative entry {value} at ({row}, {col})")]
    Negative {
        row: String,
        col: String,
        value: String,
    },
    #[error("nonzero diagonal entry {value} at ({label}, {label})")]
    NonzeroDiagonal { label: String, value: String },
    #[error("strong triangle inequality fails on ({a}, {b}, {c})")]
    NotUltrametric { a: String, b: String, c: String },
    #[error("point coordinates have mismatched dimensions")]
    DimensionMismatch,
    #[error("distance between `{a}` and `{b}` is irrational")]
    IrrationalDistance { a: String, b: String },
    #[error("label sets differ")]
    LabelMismatch,
}

/// Exact symmetric dissimilarity with zero diagonal and nonnegative entries.
///
/// The triangle inequality is not required; see [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    labels: Vec<Label>,
    entries: Vec<Vec<Rational>>,
}

impl DistanceMatrix {
    /// Builds a matrix, reordering rows and columns so labels are sorted.
    pub fn new<S: Into<String>>(
        labels: Vec<S>,
        entries: Vec<Vec<Rational>>,
    ) -> Result<Self, MatrixError> {
        let labels = labels
            .into_iter()
            .map(Label::new)
            .collect::<Result<Vec<_>, _>>()?;
        if labels.is_empty() {
            return Err(MatrixError::Empty);
        }
        let n = labels.len();
        let mut seen = BTreeSet::new();
        for label in &labels {
            if !seen.insert(label.clone()) {
                return Err(MatrixError::DuplicateLabel(label.to_string()));
            }
        }
        if entries.len() != n {
            return Err(MatrixError::NotSquare {
                row: entries.len(),
                expected: n,
                found: 0,
            });
        }
        for (row, values) in entries.iter().enumerate() {
            if values.len() != n {
                return Err(MatrixError::NotSquare {
                    row,
                    expected: n,
                    found: values.len(),
                });
            }
        }
        for i in 0..n {
            if !entries[i][i].is_zero() {
                return Err(MatrixError::NonzeroDiagonal {
                    label: labels[i].to_string(),
                    value: format_rational(&entries[i][i]),
                });
            }
            for j in 0..n {
                if entries[i][j] < Rational::zero() {
                    return Err(MatrixError::Negative {
                        row: labels[i].to_string(),
                        col: labels[j].to_string(),
                        value: format_rational(&entries[i][j]),
                    });
                }
                if entries[i][j] != entries[j][i] {
                    return Err(MatrixError::Asymmetric {
                        row: labels[i].to_string(),
                        col: labels[j].to_string(),
                        forward: format_rational(&entries[i][j]),
                        backward: format_rational(&entries[j][i]),
                    });
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
        let sorted_labels = order.iter().map(|&i| labels[i].clone()).collect();
        let sorted_entries = order
            .iter()
            .map(|&i| order.iter().map(|&j| entries[i][j].clone()).collect())
            .collect();
        Ok(Self {
            labels: sorted_labels,
            entries: sorted_entries,
        })
    }

    /// Euclidean distances between points given by rational coordinates.
    /// Fails unless every pairwise distance is itself rational.
    pub fn euclidean<S: Into<String>>(
        labels: Vec<S>,
        points: &[Vec<Rational>],
    ) -> Result<Self, MatrixError> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != points.len() {
            return Err(MatrixError::DimensionMismatch);
        }
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(MatrixError::DimensionMismatch);
        }
        let n = points.len();
        let mut entries = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let squared = points[i]
                    .iter()
                    .zip(&points[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .fold(Rational::zero(), |acc, x| acc + x);
                let dist = exact_sqrt(&squared).ok_or_else(|| MatrixError::IrrationalDistance {
                    a: labels[i].clone(),
                    b: labels[j].clone(),
                })?;
                entries[i][j] = dist.clone();
                entries[j][i] = dist;
            }
        }
        Self::new(labels, entries)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(name))
            .ok()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    /// Entrywise multiple by a nonnegative factor.
    pub fn scaled(&self, factor: &Rational) -> Self {
        Self {
            labels: self.labels.clone(),
            entries: self
                .entries
                .iter()
                .map(|row| row.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// True when every off-diagonal pair and triple satisfies the strong
    /// triangle inequality.
    pub fn is_ultrametric(&self) -> bool {
        first_ultrametric_violation(&self.entries).is_none()
    }
}

/// A dissimilarity satisfying `d(a,c) <= max(d(a,b), d(b,c))`. Zero
/// off-diagonal entries are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UltrametricMatrix(DistanceMatrix);

impl UltrametricMatrix {
    pub fn new(matrix: DistanceMatrix) -> Result<Self, MatrixError> {
        if let Some((a, b, c)) = first_ultrametric_violation(&matrix.entries) {
            return Err(MatrixError::NotUltrametric {
                a: matrix.labels[a].to_string(),
                b: matrix.labels[b].to_string(),
                c: matrix.labels[c].to_string(),
            });
        }
        Ok(Self(matrix))
    }

    pub fn as_matrix(&self) -> &DistanceMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DistanceMatrix {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        self.0.get(i, j)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The matrix between blocks of `partition`, assuming entries are
    /// constant across blocks (as they are for the zero quotient).
    /// Block labels join member labels with `+`.
    pub fn induced(&self, partition: &Partition) -> UltrametricMatrix {
        let labels: Vec<String> = partition
            .blocks()
            .iter()
            .map(|block| {
                block
                    .iter()
                    .map(|&i| self.0.labels[i].as_str())
                    .collect::<Vec<_>>()
                    .join("+")
            })
            .collect();
        let entries = partition
            .blocks()
            .iter()
            .map(|a| {
                partition
                    .blocks()
                    .iter()
                    .map(|b| self.get(a[0], b[0]).clone())
                    .collect()
            })
            .collect();
        let matrix = DistanceMatrix::new(labels, entries)
            .expect("induced matrix of a valid ultrametric is valid");
        UltrametricMatrix(matrix)
    }
}

fn first_ultrametric_violation(entries: &[Vec<Rational>]) -> Option<(usize, usize, usize)> {
    let n = entries.len();
    for a in 0..n {
        for c in (a + 1)..n {
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                let bound = entries[a][b].clone().max(entries[b][c].clone());
                if entries[a][c] > bound {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// Disjoint cover of point indices. Blocks are sorted internally and ordered
/// by their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>) -> Self {
        for block in &mut blocks {
            block.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        Self { blocks }
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (0..n).map(|i| vec![i]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, point: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&point))
    }

    /// Renders blocks with label names, e.g. `{A,B} {C}`.
    pub fn display(&self, labels: &[Label]) -> String {
        self.blocks
            .iter()
            .map(|b| {
                let names: Vec<&str> = b.iter().map(|&i| labels[i].as_str()).collect();
                format!("{{{}}}", names.join(","))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Triangle,
    StrongTriangle,
}

/// Offending triple: `d(a,c)` exceeds the bound through `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub a: Label,
    pub b: Label,
    pub c: Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub is_metric: bool,
    pub is_ultrametric: bool,
    pub violations: Vec<Violation>,
}

/// Reports whether `matrix` is a metric and whether it is an ultrametric.
///
/// Structural problems (asymmetry, negative entries, nonzero diagonal) are
/// rejected earlier by [`DistanceMatrix::new`].
pub fn validate(matrix: &DistanceMatrix) -> ValidationReport {
    let n = matrix.len();
    let mut violations = Vec::new();
    for a in 0..n {
        for c in (a + 1)..n {
            for b in 0..n {
                if b == a || b == c {
                    continue;
                }
                let ab = matrix.get(a, b);
                let bc = matrix.get(b, c);
                let ac = matrix.get(a, c);
                let labels = matrix.labels();
                if ac > &(ab + bc) {
                    violations.push(Violation {
                        kind: ViolationKind::Triangle,
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                        c: labels[c].clone(),
                    });
                }
                if ac > ab.max(bc) {
                    violations.push(Violation {
                        kind: ViolationKind::StrongTriangle,
                        a: labels[a].clone(),
                        b: labels[b].clone(),
                        c: labels[c].clone(),
                    });
                }
            }
        }
    }
    let is_metric = !violations.iter().any(|v| v.kind == ViolationKind::Triangle);
    let is_ultrametric = violations.is_empty();
    ValidationReport {
        is_metric,
        is_ultrametric,
        violations,
    }
}

/// Connected components of the graph joining points at distance `<= eps`.
pub fn epsilon_components(matrix: &DistanceMatrix, eps: &Rational) -> Partition {
    let n = matrix.len();
    let mut components = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix.get(i, j) <= eps {
                components.union(i, j);
            }
        }
    }
    components.partition()
}

/// Minimum spanning tree edges `(i, j, weight)` by Prim's algorithm. Ties
/// are broken by index, but the bottleneck weights it induces do not depend
/// on the choice.
pub(crate) fn minimum_spanning_tree(matrix: &DistanceMatrix) -> Vec<(usize, usize, Rational)> {
    let n = matrix.len();
    if n == 0 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<(Rational, usize)>> = vec![None; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        for (j, slot) in best.iter_mut().enumerate() {
            if in_tree[j] {
                continue;
            }
            let w = matrix.get(current, j);
            if slot.as_ref().map_or(true, |(bw, _)| w < bw) {
                *slot = Some((w.clone(), current));
            }
        }
        let (next, _) = best
            .iter()
            .enumerate()
            .filter(|(j, _)| !in_tree[*j])
            .filter_map(|(j, slot)| slot.as_ref().map(|(w, _)| (j, w)))
            .min_by(|a, b| a.1.cmp(b.1))
            .expect("some point remains outside the tree");
        let (weight, from) = best[next].take().expect("candidate edge recorded");
        in_tree[next] = true;
        edges.push((from, next, weight));
        current = next;
    }
    edges
}

/// Chain distance: for each pair, the least bottleneck over all paths.
///
/// Computed from the minimum spanning tree, whose unique path between two
/// points realises the minimax.
pub fn chain_distance(matrix: &DistanceMatrix) -> UltrametricMatrix {
    let n = matrix.len();
    let mut adjacency: Vec<Vec<(usize, &Rational)>> = vec![Vec::new(); n];
    let tree = minimum_spanning_tree(matrix);
    for (a, b, w) in &tree {
        adjacency[*a].push((*b, w));
        adjacency[*b].push((*a, w));
    }
    let mut entries = vec![vec![Rational::zero(); n]; n];
    for root in 0..n {
        let mut stack = vec![(root, usize::MAX, Rational::zero())];
        while let Some((node, parent, bottleneck)) = stack.pop() {
            for &(next, w) in &adjacency[node] {
                if next == parent {
                    continue;
                }
                let through = if w > &bottleneck { w.clone() } else { bottleneck.clone() };
                entries[root][next] = through.clone();
                stack.push((next, node, through));
            }
        }
    }
    UltrametricMatrix(DistanceMatrix {
        labels: matrix.labels.clone(),
        entries,
    })
}

/// Classes of points at chain distance zero from each other.
pub fn zero_quotient(ultrametric: &UltrametricMatrix) -> Partition {
    epsilon_components(ultrametric.as_matrix(), &Rational::zero())
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut node = x;
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    pub(crate) fn partition(&mut self) -> Partition {
        let n = self.parent.len();
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            blocks[r].push(i);
        }
        Partition::from_blocks(blocks)
    }
}
