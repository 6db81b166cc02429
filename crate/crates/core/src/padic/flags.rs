//! Subspaces and complete flags of `F_p^d`.
//!
//! Lattices between `pL` and `L` correspond to subspaces of
//! `L / pL ≅ F_p^d`, and maximal chains of such lattices to complete flags.

use serde::Serialize;

/// A subspace given by the rows of its reduced row echelon basis.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Subspace {
    pub basis: Vec<Vec<u64>>,
}

impl Subspace {
    /// The span of `vectors` (entries taken mod `p`), in reduced echelon
    /// form.
    pub fn spanned_by(p: u64, d: usize, vectors: &[Vec<u64>]) -> Self {
        let mut rows: Vec<Vec<u64>> = vectors
            .iter()
            .map(|v| v.iter().map(|x| x % p).collect())
            .collect();
        let mut rank = 0;
        for col in 0..d {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = inverse_mod(rows[rank][col], p);
            for x in rows[rank].iter_mut() {
                *x = *x * inv % p;
            }
            for r in 0..rows.len() {
                if r != rank && rows[r][col] != 0 {
                    let f = rows[r][col];
                    for c in 0..d {
                        rows[r][c] = (rows[r][c] + p * p - f * rows[rank][c]) % p;
                    }
                }
            }
            rank += 1;
        }
        rows.truncate(rank);
        Self { basis: rows }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    (1..p).find(|x| a * x % p == 1).expect("p is prime")
}

/// Nested subspaces `V_1 ⊂ … ⊂ V_{d-1}` with `dim V_i = i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub subspaces: Vec<Subspace>,
}

/// All subspaces of `F_p^d`, ordered by dimension and then by echelon
/// basis.
pub fn subspaces(p: u64, d: usize) -> Vec<Subspace> {
    let mut out = Vec::new();
    for rank in 0..=d {
        for pivots in combinations(d, rank) {
            // free positions: (row, col) with col > pivot[row], col not a pivot
            let free: Vec<(usize, usize)> = pivots
                .iter()
                .enumerate()
                .flat_map(|(row, &pc)| {
                    ((pc + 1)..d)
                        .filter(|c| !pivots.contains(c))
                        .map(move |c| (row, c))
                })
                .collect();
            let total = (p as usize).pow(free.len() as u32);
            for code in 0..total {
                let mut basis = vec![vec![0u64; d]; rank];
                for (row, &pc) in pivots.iter().enumerate() {
                    basis[row][pc] = 1;
                }
                let mut rest = code;
                for &(row, col) in &free {
                    basis[row][col] = (rest % p as usize) as u64;
                    rest /= p as usize;
                }
                out.push(Subspace { basis });
            }
        }
    }
    out.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.basis.cmp(&b.basis)));
    out
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            go(i + 1, n, k, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian binomial `[d choose k]_p`: the number of `k`-dimensional
/// subspaces of `F_p^d`.
pub fn gaussian_binomial(p: u64, d: u32, k: u32) -> u64 {
    if k > d {
        return 0;
    }
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num *= (p as u128).pow(d - i) - 1;
        den *= (p as u128).pow(i + 1) - 1;
    }
    (num / den) as u64
}

/// Number of complete flags of `F_p^d`: `prod_{i=1}^{d} (p^i - 1)/(p - 1)`.
pub fn flag_count(p: u64, d: u32) -> u64 {
    (1..=d)
        .map(|i| (p.pow(i) - 1) / (p - 1))
        .product()
}
