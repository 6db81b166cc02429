//! Lattices between `pL` and `L`, and maximal chains of them.

use serde::Serialize;

use super::flags::{subspaces, Flag, Subspace};
use super::lattice::Lattice;
use super::scalar::{Padic, PadicRing};
use super::PadicError;

/// `L_0 ⊂ L_1 ⊂ … ⊂ L_m` with `L_0 = p L_m` and all inclusions strict.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeChain {
    lattices: Vec<Lattice>,
}

impl LatticeChain {
    pub fn new(ring: &PadicRing, lattices: Vec<Lattice>) -> Result<Self, PadicError> {
        let Some(top) = lattices.last() else {
            return Err(PadicError::InvalidChain("empty".into()));
        };
        if lattices.len() < 2 {
            return Err(PadicError::InvalidChain("a chain needs pL and L".into()));
        }
        let d = top.dim();
        if lattices.len() > d + 1 {
            return Err(PadicError::InvalidChain(format!(
                "{} lattices in dimension {d}",
                lattices.len()
            )));
        }
        if lattices[0] != top.dilate(1) {
            return Err(PadicError::InvalidChain("first lattice is not p times the last".into()));
        }
        for pair in lattices.windows(2) {
            if pair[0] == pair[1] || !pair[1].contains_lattice(ring, &pair[0])? {
                return Err(PadicError::InvalidChain(format!(
                    "{} is not strictly inside {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self { lattices })
    }

    pub fn lattices(&self) -> &[Lattice] {
        &self.lattices
    }

    pub fn len(&self) -> usize {
        self.lattices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lattices.is_empty()
    }

    pub fn top(&self) -> &Lattice {
        self.lattices.last().expect("chains are nonempty")
    }

    pub fn dim(&self) -> usize {
        self.top().dim()
    }

    pub fn is_maximal(&self) -> bool {
        self.len() == self.dim() + 1
    }

    /// The subspaces `L_j / pL` of `L / pL`, in coordinates of the Hermite
    /// basis of `L`, for `0 < j < m`.
    pub fn flag(&self, ring: &PadicRing) -> Result<Flag, PadicError> {
        let top = self.top();
        let d = self.dim();
        let mut spaces = Vec::new();
        for lattice in &self.lattices[1..self.len() - 1] {
            let mut rows = Vec::new();
            for v in lattice.basis(ring) {
                let coords = top.coordinates(ring, &v)?;
                rows.push(
                    coords
                        .iter()
                        .map(|c| ring.residue(c, 1))
                        .collect::<Result<Vec<_>, _>>()?,
                );
            }
            spaces.push(Subspace::spanned_by(ring.prime(), d, &rows));
        }
        Ok(Flag { subspaces: spaces })
    }
}

/// Every lattice `K` with `pL ⊆ K ⊆ L`, as `(dim K/pL, K)` pairs ordered by
/// that dimension. `K/pL` runs over the subspaces of `L/pL ≅ F_p^d`.
pub fn lattices_between(ring: &PadicRing, l: &Lattice) -> Result<Vec<(usize, Lattice)>, PadicError> {
    let p = ring.prime();
    let d = l.dim();
    let basis = l.basis(ring);
    let lower: Vec<Vec<Padic>> = basis
        .iter()
        .map(|b| b.iter().map(|x| ring.mul(*x, ring.p_power(1))).collect())
        .collect();
    let mut out = Vec::new();
    for space in subspaces(p, d) {
        let mut gens = lower.clone();
        for row in &space.basis {
            let mut v = vec![Padic::Zero; d];
            for (coef, b) in row.iter().zip(&basis) {
                if *coef == 0 {
                    continue;
                }
                let c = ring.from_int(*coef as i64);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = ring.add(*vi, ring.mul(c, *bi));
                }
            }
            gens.push(v);
        }
        out.push((space.dim(), Lattice::from_generators(ring, d, &gens)?));
    }
    Ok(out)
}

/// All maximal chains `pL = L_0 ⊂ … ⊂ L_d = L`, in lexicographic order of
/// their lattices.
pub fn maximal_chains(ring: &PadicRing, l: &Lattice) -> Result<Vec<LatticeChain>, PadicError> {
    let d = l.dim();
    let between = lattices_between(ring, l)?;
    let mut by_level: Vec<Vec<Lattice>> = vec![Vec::new(); d + 1];
    for (k, lattice) in between {
        by_level[k].push(lattice);
    }
    let mut chains = Vec::new();
    let mut current = vec![by_level[0][0].clone()];
    extend(ring, &by_level, &mut current, &mut chains)?;
    chains.sort();
    Ok(chains)
}

fn extend(
    ring: &PadicRing,
    by_level: &[Vec<Lattice>],
    current: &mut Vec<Lattice>,
    out: &mut Vec<LatticeChain>,
) -> Result<(), PadicError> {
    let level = current.len();
    if level == by_level.len() {
        out.push(LatticeChain {
            lattices: current.clone(),
        });
        return Ok(());
    }
    for next in &by_level[level] {
        if next.contains_lattice(ring, current.last().expect("nonempty"))? {
            current.push(next.clone());
            extend(ring, by_level, current, out)?;
            current.pop();
        }
    }
    Ok(())
}
