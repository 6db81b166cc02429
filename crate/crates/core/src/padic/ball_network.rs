//! Cluster networks of p-adic norms restricted to `(Z/p^m)^d`.
//!
//! Points are the integer vectors with coordinates in `[0, p^m)`, and each
//! norm gives the metric `N(x - y)`. Its clusters are the cosets of balls
//! that fit in the window.

use std::collections::HashMap;

use super::linalg::PadicMatrix;
use super::norm::{norm_eval, NormSpec};
use super::scalar::PadicRing;
use super::PadicError;
use crate::dendrogram::{build_dendrogram, Dendrogram};
use crate::metric::DistanceMatrix;
use crate::network::{merge_dendrograms, ClusterNetwork, MetricId};
use crate::rational::{format_rational, Rational};

const MAX_POINTS: u64 = 1024;

#[derive(Debug, Clone)]
pub struct BallNetwork {
    pub network: ClusterNetwork,
    pub metrics: Vec<MetricId>,
    pub norms: Vec<NormSpec>,
    /// Pairs of norms that cannot be told apart inside the window.
    pub diagnostics: Vec<String>,
}

/// All permutations of `0..d` in lexicographic order.
pub fn orderings(d: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..d).collect();
    let mut out = vec![current.clone()];
    loop {
        let Some(i) = (1..d).rev().find(|&i| current[i - 1] < current[i]) else {
            return out;
        };
        let j = (i..d).rev().find(|&j| current[j] > current[i - 1]).expect("exists");
        current.swap(i - 1, j);
        current[i..].reverse();
        out.push(current.clone());
    }
}

fn window_points(p: u64, d: usize, m: u32) -> Vec<Vec<i64>> {
    let side = p.pow(m) as i64;
    let mut points = vec![Vec::new()];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (0..side).map(move |x| {
                    let mut next = prefix.clone();
                    next.push(x);
                    next
                })
            })
            .collect();
    }
    points
}

fn label(point: &[i64], width: usize) -> String {
    point
        .iter()
        .map(|x| format!("{x:0width$}"))
        .collect::<Vec<_>>()
        .join(".")
}

/// One metric per `(frame, ordering)`: the norm with frame `A` and weights
/// `q` permuted by the ordering.
pub fn ball_network(
    ring: &PadicRing,
    q: &[Rational],
    frames: &[PadicMatrix],
    orderings: &[Vec<usize>],
    window: u32,
) -> Result<BallNetwork, PadicError> {
    let p = ring.prime();
    let d = q.len();
    let too_large = window == 0
        || (p as u128)
            .checked_pow(window * d as u32)
            .map_or(true, |n| n > MAX_POINTS as u128);
    if too_large {
        return Err(PadicError::WindowTooLarge(window));
    }
    if orderings.iter().any(|o| {
        let mut sorted = o.clone();
        sorted.sort();
        sorted != (0..d).collect::<Vec<_>>()
    }) {
        return Err(PadicError::DimensionMismatch);
    }

    let points = window_points(p, d, window);
    let width = (p.pow(window) - 1).to_string().len();
    let labels: Vec<String> = points.iter().map(|x| label(x, width)).collect();

    let mut norms = Vec::new();
    let mut metrics: Vec<MetricId> = Vec::new();
    let mut diagnostics = Vec::new();
    for (f, frame) in frames.iter().enumerate() {
        for order in orderings {
            let weights: Vec<Rational> = order.iter().map(|&i| q[i].clone()).collect();
            let id = format!(
                "A{f}:({})",
                weights.iter().map(format_rational).collect::<Vec<_>>().join(",")
            );
            if metrics.iter().any(|m| m.as_str() == id) {
                diagnostics.push(format!("{id} appears twice; the repeat is dropped"));
                continue;
            }
            norms.push(NormSpec::new(*ring, frame.clone(), weights)?);
            metrics.push(MetricId::new(id));
        }
    }

    let mut dendrograms = Vec::with_capacity(norms.len());
    for norm in &norms {
        dendrograms.push(norm_dendrogram(ring, norm, &points, &labels)?);
    }

    for a in 0..dendrograms.len() {
        for b in (a + 1)..dendrograms.len() {
            if same_clusters(&dendrograms[a], &dendrograms[b]) {
                diagnostics.push(format!(
                    "{} and {} have the same clusters in window {window}",
                    metrics[a].as_str(),
                    metrics[b].as_str()
                ));
            }
        }
    }

    let network = merge_dendrograms(&dendrograms, &metrics)
        .expect("metric ids are distinct and all trees share the labels");
    Ok(BallNetwork {
        network,
        metrics,
        norms,
        diagnostics,
    })
}

fn norm_dendrogram(
    ring: &PadicRing,
    norm: &NormSpec,
    points: &[Vec<i64>],
    labels: &[String],
) -> Result<Dendrogram, PadicError> {
    let n = points.len();
    let mut cache: HashMap<Vec<i64>, Rational> = HashMap::new();
    let mut entries = vec![vec![Rational::from_integer(0.into()); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let diff: Vec<i64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
            let value = match cache.get(&diff) {
                Some(v) => v.clone(),
                None => {
                    let z: Vec<_> = diff.iter().map(|&x| ring.from_int(x)).collect();
                    let v = norm_eval(norm, &z)?;
                    cache.insert(diff, v.clone());
                    v
                }
            };
            entries[i][j] = value.clone();
            entries[j][i] = value;
        }
    }
    let matrix = DistanceMatrix::new(labels.to_vec(), entries).expect("norm distances form a metric");
    Ok(build_dendrogram(&matrix).expect("window is nonempty"))
}

fn same_clusters(a: &Dendrogram, b: &Dendrogram) -> bool {
    a.clusters().len() == b.clusters().len()
        && a
            .clusters()
            .iter()
            .zip(b.clusters())
            .all(|(x, y)| x.members == y.members)
}
