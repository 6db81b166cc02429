//! Dense linear algebra over `Q_p` at finite precision.

use super::scalar::{Padic, PadicRing};
use super::PadicError;

/// Row-major square or rectangular matrix.
pub type PadicMatrix = Vec<Vec<Padic>>;

pub fn identity(ring: &PadicRing, d: usize) -> PadicMatrix {
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| if i == j { ring.one() } else { Padic::Zero })
                .collect()
        })
        .collect()
}

pub fn from_ints(ring: &PadicRing, rows: &[Vec<i64>]) -> PadicMatrix {
    rows.iter()
        .map(|row| row.iter().map(|&x| ring.from_int(x)).collect())
        .collect()
}

pub fn mat_vec(ring: &PadicRing, m: &PadicMatrix, v: &[Padic]) -> Vec<Padic> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(Padic::Zero, |acc, (a, b)| ring.add(acc, ring.mul(*a, *b)))
        })
        .collect()
}

pub fn mat_mul(ring: &PadicRing, a: &PadicMatrix, b: &PadicMatrix) -> PadicMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(Padic::Zero, |acc, (x, brow)| ring.add(acc, ring.mul(*x, brow[j])))
                })
                .collect()
        })
        .collect()
}

/// Matrix whose columns are `columns`.
pub fn from_columns(columns: &[Vec<Padic>]) -> PadicMatrix {
    let rows = columns.first().map_or(0, Vec::len);
    (0..rows)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect()
}

pub fn column(m: &PadicMatrix, j: usize) -> Vec<Padic> {
    m.iter().map(|row| row[j]).collect()
}

/// Row among `rows` whose entry in `col` has least known valuation.
fn pivot_row(
    m: &PadicMatrix,
    col: usize,
    rows: std::ops::Range<usize>,
) -> Result<Option<usize>, PadicError> {
    let mut best: Option<(i64, usize)> = None;
    let mut fuzzy = false;
    for r in rows {
        match m[r][col] {
            Padic::Zero => {}
            Padic::Value { val, .. } => {
                if best.map_or(true, |(v, _)| val < v) {
                    best = Some((val, r));
                }
            }
            Padic::Indeterminate { .. } => fuzzy = true,
        }
    }
    match best {
        Some((_, r)) => Ok(Some(r)),
        None if fuzzy => Err(PadicError::Precision),
        None => Ok(None),
    }
}

pub fn inverse(ring: &PadicRing, m: &PadicMatrix) -> Result<PadicMatrix, PadicError> {
    let d = m.len();
    if m.iter().any(|row| row.len() != d) {
        return Err(PadicError::DimensionMismatch);
    }
    let mut a = m.clone();
    let mut inv = identity(ring, d);
    for c in 0..d {
        let r = pivot_row(&a, c, c..d)?.ok_or(PadicError::Singular)?;
        a.swap(c, r);
        inv.swap(c, r);
        let scale = ring.inv(a[c][c])?;
        for j in 0..d {
            a[c][j] = ring.mul(a[c][j], scale);
            inv[c][j] = ring.mul(inv[c][j], scale);
        }
        a[c][c] = ring.one();
        for k in 0..d {
            if k == c || a[k][c] == Padic::Zero {
                continue;
            }
            let factor = a[k][c];
            for j in 0..d {
                a[k][j] = ring.sub(a[k][j], ring.mul(factor, a[c][j]));
                inv[k][j] = ring.sub(inv[k][j], ring.mul(factor, inv[c][j]));
            }
            a[k][c] = Padic::Zero;
        }
    }
    Ok(inv)
}

pub fn determinant(ring: &PadicRing, m: &PadicMatrix) -> Result<Padic, PadicError> {
    let d = m.len();
    if m.iter().any(|row| row.len() != d) {
        return Err(PadicError::DimensionMismatch);
    }
    let mut a = m.clone();
    let mut det = ring.one();
    for c in 0..d {
        let Some(r) = pivot_row(&a, c, c..d)? else {
            return Ok(Padic::Zero);
        };
        if r != c {
            a.swap(c, r);
            det = ring.neg(det);
        }
        det = ring.mul(det, a[c][c]);
        let pivot_inv = ring.inv(a[c][c])?;
        for k in (c + 1)..d {
            if a[k][c] == Padic::Zero {
                continue;
            }
            let factor = ring.mul(a[k][c], pivot_inv);
            for j in c..d {
                a[k][j] = ring.sub(a[k][j], ring.mul(factor, a[c][j]));
            }
            a[k][c] = Padic::Zero;
        }
    }
    Ok(det)
}
