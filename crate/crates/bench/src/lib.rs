//! Input generators shared by the benchmarks.

use clusternet::{DistanceMatrix, Rational};

/// Points on a line at the given integer positions, labelled `p0`, `p1`, ...
pub fn line(positions: &[i64]) -> DistanceMatrix {
    let labels: Vec<String> = (0..positions.len()).map(|i| format!("p{i}")).collect();
    let entries = positions
        .iter()
        .map(|a| {
            positions
                .iter()
                .map(|b| Rational::from_integer((a - b).abs().into()))
                .collect()
        })
        .collect();
    DistanceMatrix::new(labels, entries).expect("line distances are a metric")
}
