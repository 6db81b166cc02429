//! Full-rank `Z_p`-lattices in `Q_p^d` and their classes modulo dilation.
//!
//! A lattice is stored as `p^scale * H`, where `H` is an integral lower
//! triangular matrix in Hermite form whose columns span the lattice:
//! `H[i][i] = p^{e_i}`, `0 <= H[i][j] < p^{e_i}` for `j < i`, zeros above the
//! diagonal, and at least one entry of `H` is a `p`-adic unit. `H` alone is
//! the canonical form of the lattice's class.

use std::fmt;

use serde::Serialize;

use super::linalg::{self, PadicMatrix};
use super::scalar::{Padic, PadicRing};
use super::PadicError;

/// Canonical representative of a lattice class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LatticeClass {
    p: u64,
    hnf: Vec<Vec<u64>>,
}

impl LatticeClass {
    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.hnf.len()
    }

    /// The Hermite form, row-major.
    pub fn matrix(&self) -> &[Vec<u64>] {
        &self.hnf
    }

    /// Diagonal exponents `e_i` with `H[i][i] = p^{e_i}`.
    pub fn exponents(&self) -> Vec<u32> {
        self.hnf
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut x = row[i];
                let mut e = 0;
                while x > 1 {
                    x /= self.p;
                    e += 1;
                }
                e
            })
            .collect()
    }

    /// The representative with this exact Hermite form.
    pub fn representative(&self) -> Lattice {
        Lattice {
            scale: 0,
            class: self.clone(),
        }
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .hnf
            .iter()
            .map(|r| {
                r.iter()
                    .map(u64::to_string)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Lattice {
    scale: i64,
    class: LatticeClass,
}

impl Lattice {
    /// `Z_p^d`.
    pub fn standard(p: u64, d: usize) -> Self {
        let hnf = (0..d)
            .map(|i| (0..d).map(|j| u64::from(i == j)).collect())
            .collect();
        Self {
            scale: 0,
            class: LatticeClass { p, hnf },
        }
    }

    /// The lattice spanned by `generators` (each a vector in `Q_p^d`).
    /// Fails if they do not span `Q_p^d`, or if precision is insufficient
    /// to pin the lattice down.
    pub fn from_generators(
        ring: &PadicRing,
        d: usize,
        generators: &[Vec<Padic>],
    ) -> Result<Self, PadicError> {
        if d == 0 || generators.iter().any(|g| g.len() != d) {
            return Err(PadicError::DimensionMismatch);
        }
        let mut cols: Vec<Vec<Padic>> = generators.to_vec();

        let scale = min_valuation(&cols)?;
        let shift = ring.p_power(-scale);
        for col in &mut cols {
            for x in col.iter_mut() {
                *x = ring.mul(*x, shift);
            }
        }

        let mut exponents = Vec::with_capacity(d);
        for i in 0..d {
            let pivot = pivot_column(&cols, i, i)?.ok_or(PadicError::Singular)?;
            cols.swap(i, pivot);
            let Padic::Value { val, .. } = cols[i][i] else {
                unreachable!("pivot entry has known valuation")
            };
            let normalizer = ring.mul(ring.inv(cols[i][i])?, ring.p_power(val));
            for x in cols[i].iter_mut() {
                *x = ring.mul(*x, normalizer);
            }
            cols[i][i] = ring.p_power(val);
            exponents.push(val as u32);
            let pivot_inv = ring.p_power(-val);
            for j in (i + 1)..cols.len() {
                if cols[j][i] == Padic::Zero {
                    continue;
                }
                let factor = ring.mul(cols[j][i], pivot_inv);
                for k in i..d {
                    let delta = ring.mul(factor, cols[i][k]);
                    cols[j][k] = ring.sub(cols[j][k], delta);
                }
                cols[j][i] = Padic::Zero;
            }
        }

        // The triangular part contains p^total Z_p^d, so the lattice is
        // determined by its generators modulo p^(total + 1).
        let total: u32 = exponents.iter().sum();
        let p = ring.prime();
        if (p as u128).checked_pow(total + 1).map_or(true, |m| m >= (1u128 << 62)) {
            return Err(PadicError::Precision);
        }
        for extra in &cols[d..] {
            for x in extra {
                if !ring.divisible_by(x, total as i64)? {
                    return Err(PadicError::Precision);
                }
            }
        }
        let modulus = p.pow(total + 1) as u128;
        let mut h = vec![vec![0u128; d]; d];
        for j in 0..d {
            for i in j..d {
                h[i][j] = ring.residue(&cols[j][i], total + 1)? as u128;
            }
        }
        for i in 0..d {
            let pivot = p.pow(exponents[i]) as u128;
            for j in 0..i {
                let c = h[i][j] / pivot;
                if c == 0 {
                    continue;
                }
                for k in i..d {
                    let delta = c * h[k][i] % modulus;
                    h[k][j] = (h[k][j] + modulus - delta) % modulus;
                }
            }
        }
        let hnf = h
            .into_iter()
            .map(|row| row.into_iter().map(|x| x as u64).collect())
            .collect();
        Ok(Self {
            scale,
            class: LatticeClass { p, hnf },
        })
    }

    pub fn class(&self) -> &LatticeClass {
        &self.class
    }

    pub fn scale(&self) -> i64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.class.dim()
    }

    /// `p^k * self`.
    pub fn dilate(&self, k: i64) -> Self {
        Self {
            scale: self.scale + k,
            class: self.class.clone(),
        }
    }

    /// Valuation of the determinant of any basis.
    pub fn det_valuation(&self) -> i64 {
        let d = self.dim() as i64;
        self.scale * d + self.class.exponents().iter().map(|&e| e as i64).sum::<i64>()
    }

    /// Basis vectors (the scaled columns of the Hermite form).
    pub fn basis(&self, ring: &PadicRing) -> Vec<Vec<Padic>> {
        let d = self.dim();
        let factor = ring.p_power(self.scale);
        (0..d)
            .map(|j| {
                (0..d)
                    .map(|i| ring.mul(ring.from_int(self.class.hnf[i][j] as i64), factor))
                    .collect()
            })
            .collect()
    }

    /// Basis as a matrix with basis vectors as columns.
    pub fn basis_matrix(&self, ring: &PadicRing) -> PadicMatrix {
        linalg::from_columns(&self.basis(ring))
    }

    /// Coordinates of `z` in the Hermite basis.
    pub fn coordinates(&self, ring: &PadicRing, z: &[Padic]) -> Result<Vec<Padic>, PadicError> {
        let d = self.dim();
        if z.len() != d {
            return Err(PadicError::DimensionMismatch);
        }
        let unscale = ring.p_power(-self.scale);
        let w: Vec<Padic> = z.iter().map(|x| ring.mul(*x, unscale)).collect();
        let mut coords: Vec<Padic> = Vec::with_capacity(d);
        for i in 0..d {
            let mut rest = w[i];
            for (j, c) in coords.iter().enumerate() {
                let h = ring.from_int(self.class.hnf[i][j] as i64);
                rest = ring.sub(rest, ring.mul(h, *c));
            }
            let diag = ring.from_int(self.class.hnf[i][i] as i64);
            coords.push(ring.div(rest, diag)?);
        }
        Ok(coords)
    }

    pub fn contains(&self, ring: &PadicRing, z: &[Padic]) -> Result<bool, PadicError> {
        for c in self.coordinates(ring, z)? {
            if !ring.divisible_by(&c, 0)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn contains_lattice(&self, ring: &PadicRing, other: &Lattice) -> Result<bool, PadicError> {
        if other.det_valuation() < self.det_valuation() {
            return Ok(false);
        }
        for v in other.basis(ring) {
            if !self.contains(ring, &v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            write!(f, "{}", self.class)
        } else {
            write!(f, "p^{} {}", self.scale, self.class)
        }
    }
}

fn min_valuation(cols: &[Vec<Padic>]) -> Result<i64, PadicError> {
    let mut best: Option<i64> = None;
    let mut fuzz: Option<i64> = None;
    for x in cols.iter().flatten() {
        match *x {
            Padic::Zero => {}
            Padic::Value { val, .. } => best = Some(best.map_or(val, |b| b.min(val))),
            Padic::Indeterminate { abs } => fuzz = Some(fuzz.map_or(abs, |f| f.min(abs))),
        }
    }
    match (best, fuzz) {
        (None, _) => Err(PadicError::Singular),
        (Some(b), Some(f)) if f <= b => Err(PadicError::Precision),
        (Some(b), _) => Ok(b),
    }
}

/// Column `>= from` whose entry in `row` has least valuation.
fn pivot_column(cols: &[Vec<Padic>], row: usize, from: usize) -> Result<Option<usize>, PadicError> {
    let mut best: Option<(i64, usize)> = None;
    let mut fuzz: Option<i64> = None;
    for (j, col) in cols.iter().enumerate().skip(from) {
        match col[row] {
            Padic::Zero => {}
            Padic::Value { val, .. } => {
                if best.map_or(true, |(v, _)| val < v) {
                    best = Some((val, j));
                }
            }
            Padic::Indeterminate { abs } => fuzz = Some(fuzz.map_or(abs, |f| f.min(abs))),
        }
    }
    match (best, fuzz) {
        (Some((v, _)), Some(f)) if f <= v => Err(PadicError::Precision),
        (Some((_, j)), _) => Ok(Some(j)),
        (None, Some(_)) => Err(PadicError::Precision),
        (None, None) => Ok(None),
    }
}

/// Whether the classes are adjacent in the building: some dilate of `b`
/// lies strictly between `p * a` and `a`.
pub fn is_adjacent(ring: &PadicRing, a: &LatticeClass, b: &LatticeClass) -> Result<bool, PadicError> {
    if a.dim() != b.dim() || a.prime() != b.prime() {
        return Err(PadicError::DimensionMismatch);
    }
    if a == b {
        return Ok(false);
    }
    let outer = a.representative();
    let inner = outer.dilate(1);
    let base = b.representative();
    let d = a.dim() as i64;
    // Strictly between forces det(outer) < det(p^k b) < det(outer) + d,
    // which pins k down.
    let lo = outer.det_valuation();
    let base_det = base.det_valuation();
    let k = (lo - base_det).div_euclid(d) + 1;
    let candidate = base.dilate(k);
    if candidate.det_valuation() >= lo + d {
        return Ok(false);
    }
    if outer.contains_lattice(ring, &candidate)? && candidate.contains_lattice(ring, &inner)? {
        return Ok(true);
    }
    Ok(false)
}
