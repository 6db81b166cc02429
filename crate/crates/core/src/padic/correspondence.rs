//! From a maximal lattice chain to a norm whose balls reproduce it, and an
//! exhaustive check of that construction around the standard lattice.

use serde::Serialize;

use super::ball_network::{ball_network, orderings};
use super::chain::{lattices_between, maximal_chains, LatticeChain};
use super::flags::{flag_count, gaussian_binomial};
use super::lattice::{is_adjacent, Lattice};
use super::linalg;
use super::norm::{intermediary_balls, NormSpec};
use super::scalar::{Padic, PadicRing};
use super::PadicError;
use crate::complex::network_dimension;
use crate::rational::{format_rational, Rational};

/// Vectors `f_1, …, f_d` with `f_j ∈ L_j \ L_{j-1}`. Each `f_j` is the
/// combination of the Hermite basis of `L_d` with lexicographically
/// smallest coefficients in `{0, …, p-1}`.
pub fn basis_from_chain(ring: &PadicRing, chain: &LatticeChain) -> Result<Vec<Vec<Padic>>, PadicError> {
    let d = chain.dim();
    if !chain.is_maximal() {
        return Err(PadicError::NotMaximal {
            len: chain.len(),
            expected: d + 1,
        });
    }
    let p = ring.prime();
    let top = chain.top().basis(ring);
    let candidates = (p as usize).pow(d as u32);
    let lattices = chain.lattices();
    let mut out = Vec::with_capacity(d);
    for j in 1..=d {
        let mut found = None;
        for code in 1..candidates {
            let mut coefs = vec![0u64; d];
            let mut rest = code;
            for c in coefs.iter_mut().rev() {
                *c = (rest % p as usize) as u64;
                rest /= p as usize;
            }
            let v = combine(ring, &coefs, &top);
            if lattices[j].contains(ring, &v)? && !lattices[j - 1].contains(ring, &v)? {
                found = Some(v);
                break;
            }
        }
        out.push(found.ok_or_else(|| PadicError::InvalidChain(format!("no vector in level {j}")))?);
    }
    Ok(out)
}

fn combine(ring: &PadicRing, coefs: &[u64], basis: &[Vec<Padic>]) -> Vec<Padic> {
    let d = basis.len();
    let mut v = vec![Padic::Zero; d];
    for (c, b) in coefs.iter().zip(basis) {
        if *c == 0 {
            continue;
        }
        let c = ring.from_int(*c as i64);
        for (vi, bi) in v.iter_mut().zip(b) {
            *vi = ring.add(*vi, ring.mul(c, *bi));
        }
    }
    v
}

/// Checks `L_j = Z_p f_1 + … + Z_p f_j + p Z_p f_{j+1} + … + p Z_p f_d` for
/// every `j` by mutual containment, and that `det(f)` has the valuation of
/// `det L_d`.
pub fn check_decomposition(ring: &PadicRing, chain: &LatticeChain, basis: &[Vec<Padic>]) -> Result<bool, PadicError> {
    let d = chain.dim();
    if basis.len() != d {
        return Err(PadicError::DimensionMismatch);
    }
    let p = ring.p_power(1);
    for (j, level) in chain.lattices().iter().enumerate() {
        let gens: Vec<Vec<Padic>> = basis
            .iter()
            .enumerate()
            .map(|(i, f)| {
                if i < j {
                    f.clone()
                } else {
                    f.iter().map(|x| ring.mul(*x, p)).collect()
                }
            })
            .collect();
        let spanned = Lattice::from_generators(ring, d, &gens)?;
        if !level.contains_lattice(ring, &spanned)? || !spanned.contains_lattice(ring, level)? {
            return Ok(false);
        }
    }
    let det = linalg::determinant(ring, &linalg::from_columns(basis))?;
    Ok(ring.valuation(&det)? == Some(chain.top().det_valuation()))
}

/// The norm `N(z) = max_i q_i |(Az)_i|_p` with `A` sending `f_j` to the
/// `j`-th coordinate vector. Requires `q` strictly increasing in `(1/p, 1]`.
pub fn norm_from_chain(ring: &PadicRing, chain: &LatticeChain, q: &[Rational]) -> Result<NormSpec, PadicError> {
    if q.len() != chain.dim() {
        return Err(PadicError::DimensionMismatch);
    }
    if q.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PadicError::NotIncreasing);
    }
    let basis = basis_from_chain(ring, chain)?;
    let frame = linalg::inverse(ring, &linalg::from_columns(&basis))?;
    NormSpec::new(*ring, frame, q.to_vec())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainCheck {
    pub index: usize,
    pub lattices: Vec<String>,
    pub basis: Vec<Vec<String>>,
    pub decomposition: bool,
    /// `None` when the weights are degenerate and no norm is built.
    pub round_trip: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegenerateCheck {
    pub distinct_weights: usize,
    pub balls: usize,
    pub lattices: Vec<String>,
    pub fewer_than_maximal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowCheck {
    pub window: u32,
    pub points: usize,
    pub metrics: Vec<String>,
    pub dimension: usize,
    pub expected: usize,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CorrespondenceReport {
    pub p: u64,
    pub d: usize,
    pub q: Vec<String>,
    pub precision: u32,
    pub generic: bool,
    /// Number of lattices `K` with `pL ⊆ K ⊆ L` and `dim K/pL = k`, by `k`.
    pub lattices_by_level: Vec<usize>,
    pub subspace_counts: Vec<u64>,
    pub strictly_between: usize,
    pub all_adjacent: bool,
    pub chain_count: usize,
    pub flag_count: u64,
    pub round_trips_passed: usize,
    pub decompositions_passed: usize,
    pub distinct_ball_chains: bool,
    pub chains: Vec<ChainCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<DegenerateCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowCheck>,
    pub scope: String,
    pub passed: bool,
}

const SCOPE: &str = "checked around the standard lattice only: its maximal chains, \
the lattices between pL and L, and their adjacency to L; the rest of the building is not enumerated";

fn padic_string(ring: &PadicRing, x: &Padic) -> String {
    match ring.residue(x, ring.precision()) {
        Ok(n) => n.to_string(),
        Err(_) => format!("{x:?}"),
    }
}

/// Runs the chain → norm → chain round trip for every maximal chain of the
/// standard lattice `Z_p^d`. With equal weights no norm can be built from a
/// chain; the report then records how many balls the diagonal norm has
/// instead. A `window` adds the dimension of the reordering network.
pub fn verify_correspondence(
    p: u64,
    d: usize,
    q: &[Rational],
    precision: u32,
    window: Option<u32>,
) -> Result<CorrespondenceReport, PadicError> {
    let ring = PadicRing::new(p, precision)?;
    if q.len() != d || d == 0 {
        return Err(PadicError::DimensionMismatch);
    }
    if q.windows(2).any(|w| w[0] > w[1]) {
        return Err(PadicError::NotIncreasing);
    }
    // Validates the weights.
    let diagonal = NormSpec::identity(ring, q.to_vec())?;
    let generic = diagonal.is_generic();

    let standard = Lattice::standard(p, d);
    let between = lattices_between(&ring, &standard)?;
    let mut lattices_by_level = vec![0usize; d + 1];
    for (k, _) in &between {
        lattices_by_level[*k] += 1;
    }
    let subspace_counts: Vec<u64> = (0..=d)
        .map(|k| gaussian_binomial(p, d as u32, k as u32))
        .collect();
    let mut all_adjacent = true;
    for (k, lattice) in &between {
        if *k > 0 && *k < d {
            all_adjacent &= is_adjacent(&ring, standard.class(), lattice.class())?;
        }
    }

    let chains = maximal_chains(&ring, &standard)?;
    let mut checks = Vec::with_capacity(chains.len());
    let mut ball_chains = Vec::new();
    for (index, chain) in chains.iter().enumerate() {
        let basis = basis_from_chain(&ring, chain)?;
        let decomposition = check_decomposition(&ring, chain, &basis)?;
        let mut witness = None;
        if !decomposition {
            witness = Some("basis does not decompose the chain".to_string());
        }
        let round_trip = if generic {
            let norm = norm_from_chain(&ring, chain, q)?;
            let balls = intermediary_balls(&norm, chain.top())?;
            let same = balls == *chain;
            if !same {
                witness = Some(format!(
                    "balls {}",
                    balls.lattices().iter().map(ToString::to_string).collect::<Vec<_>>().join(" < ")
                ));
            }
            ball_chains.push(balls);
            Some(same)
        } else {
            None
        };
        checks.push(ChainCheck {
            index,
            lattices: chain.lattices().iter().map(ToString::to_string).collect(),
            basis: basis
                .iter()
                .map(|f| f.iter().map(|x| padic_string(&ring, x)).collect())
                .collect(),
            decomposition,
            round_trip,
            witness,
        });
    }
    let round_trips_passed = checks.iter().filter(|c| c.round_trip == Some(true)).count();
    let decompositions_passed = checks.iter().filter(|c| c.decomposition).count();
    let distinct_ball_chains = {
        let mut sorted = ball_chains.clone();
        sorted.sort();
        sorted.dedup();
        sorted.len() == ball_chains.len()
    };

    let degenerate = if generic {
        None
    } else {
        let balls = intermediary_balls(&diagonal, &standard)?;
        let mut distinct = q.to_vec();
        distinct.dedup();
        Some(DegenerateCheck {
            distinct_weights: distinct.len(),
            balls: balls.len(),
            lattices: balls.lattices().iter().map(ToString::to_string).collect(),
            fewer_than_maximal: balls.len() < d + 1,
        })
    };

    let window = match window {
        Some(m) => Some(window_check(&ring, d, q, m)?),
        None => None,
    };

    let flags = flag_count(p, d as u32);
    let counts_match = lattices_by_level
        .iter()
        .zip(&subspace_counts)
        .all(|(a, b)| *a as u64 == *b);
    let mut passed = counts_match
        && all_adjacent
        && chains.len() as u64 == flags
        && decompositions_passed == chains.len();
    if generic {
        passed &= round_trips_passed == chains.len() && distinct_ball_chains;
    }
    if let Some(check) = &degenerate {
        passed &= check.fewer_than_maximal;
    }
    if let Some(check) = &window {
        passed &= check.dimension == check.expected;
    }

    Ok(CorrespondenceReport {
        p,
        d,
        q: q.iter().map(format_rational).collect(),
        precision,
        generic,
        strictly_between: between.len() - 2,
        lattices_by_level,
        subspace_counts,
        all_adjacent,
        chain_count: chains.len(),
        flag_count: flags,
        round_trips_passed,
        decompositions_passed,
        distinct_ball_chains,
        chains: checks,
        degenerate,
        window,
        scope: SCOPE.to_string(),
        passed,
    })
}

fn window_check(ring: &PadicRing, d: usize, q: &[Rational], m: u32) -> Result<WindowCheck, PadicError> {
    let frame = linalg::identity(ring, d);
    let built = ball_network(ring, q, &[frame], &orderings(d), m)?;
    let report = network_dimension(&built.network, &built.metrics)
        .expect("metric ids come from the network itself");
    Ok(WindowCheck {
        window: m,
        points: built.network.labels().len(),
        metrics: built.metrics.iter().map(|m| m.as_str().to_string()).collect(),
        dimension: report.overall,
        expected: d,
        diagnostics: built.diagnostics,
    })
}
