//! Hierarchical clustering over families of metrics.
//!
//! A single dissimilarity yields a tree of chain-distance clusters
//! ([`dendrogram`]). A family of dissimilarities yields one tree per member;
//! fusing them by identifying clusters with equal members gives a
//! [`network`], a DAG whose undirected cycles record the different orders in
//! which clusters grow. The [`complex`] module puts a simplicial structure on
//! such a network and measures its dimension, and [`padic`] checks the
//! construction against balls of p-adic norms, where the same structure is
//! the affine building of `GL_d`. [`phylo`] builds metric families from
//! weighted per-marker distances.

pub mod complex;
pub mod dendrogram;
pub mod export;
pub mod io;
pub mod metric;
pub mod network;
pub mod padic;
pub mod phylo;
pub mod rational;

pub use complex::{
    build_complex, check_compatibility, network_dimension, r_dimension, simplices_for_pair,
    CompatibilityReport, ComplexError, DimensionReport, Simplex, SimplicialComplex,
};
pub use dendrogram::{build_dendrogram, Cluster, Dendrogram, DendrogramError, MemberSet};
pub use metric::{
    chain_distance, epsilon_components, validate, zero_quotient, DistanceMatrix, Label,
    MatrixError, Partition, UltrametricMatrix, ValidationReport,
};
pub use network::{merge_dendrograms, ClusterNetwork, MetricId, NetworkError, Superball, VertexId};
pub use padic::{
    verify_correspondence, CorrespondenceReport, Lattice, LatticeChain, LatticeClass, NormSpec,
    Padic, PadicError, PadicRing,
};
pub use phylo::{combine, sweep, MarkerSet, PhyloError, SweepGrid, WeightVector};
pub use rational::{format_rational, parse_rational, Rational};
