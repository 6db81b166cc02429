//! The norms `N(z) = max_i q_i |(Az)_i|_p` and their balls.

use num_traits::{One, Zero};

use super::chain::LatticeChain;
use super::lattice::Lattice;
use super::linalg::{self, PadicMatrix};
use super::scalar::{p_power_rational, Padic, PadicRing};
use super::PadicError;
use crate::rational::{format_rational, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    ring: PadicRing,
    frame: PadicMatrix,
    frame_inverse: PadicMatrix,
    q: Vec<Rational>,
}

impl NormSpec {
    /// `frame` is the matrix `A`. Every weight must lie in `(1/p, 1]`.
    pub fn new(ring: PadicRing, frame: PadicMatrix, q: Vec<Rational>) -> Result<Self, PadicError> {
        let d = q.len();
        if d == 0 || frame.len() != d || frame.iter().any(|row| row.len() != d) {
            return Err(PadicError::DimensionMismatch);
        }
        let lower = Rational::new(1.into(), ring.prime().into());
        for w in &q {
            if *w <= lower || *w > Rational::one() {
                return Err(PadicError::InvalidWeights(format_rational(w)));
            }
        }
        let frame_inverse = linalg::inverse(&ring, &frame)?;
        Ok(Self {
            ring,
            frame,
            frame_inverse,
            q,
        })
    }

    pub fn identity(ring: PadicRing, q: Vec<Rational>) -> Result<Self, PadicError> {
        let frame = linalg::identity(&ring, q.len());
        Self::new(ring, frame, q)
    }

    pub fn ring(&self) -> &PadicRing {
        &self.ring
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn frame(&self) -> &PadicMatrix {
        &self.frame
    }

    pub fn frame_inverse(&self) -> &PadicMatrix {
        &self.frame_inverse
    }

    pub fn weights(&self) -> &[Rational] {
        &self.q
    }

    /// All weights pairwise distinct.
    pub fn is_generic(&self) -> bool {
        let mut sorted = self.q.clone();
        sorted.sort();
        sorted.windows(2).all(|w| w[0] != w[1])
    }
}

/// `N(z)`, exactly. A coordinate of `Az` lost to cancellation is harmless
/// when its bound lies strictly below the other terms; otherwise this fails
/// rather than guess.
pub fn norm_eval(norm: &NormSpec, z: &[Padic]) -> Result<Rational, PadicError> {
    if z.len() != norm.dim() {
        return Err(PadicError::DimensionMismatch);
    }
    let image = linalg::mat_vec(&norm.ring, &norm.frame, z);
    let p = norm.ring.prime();
    let mut best = Rational::zero();
    let mut unknown = Rational::zero();
    for (x, q) in image.iter().zip(&norm.q) {
        match *x {
            Padic::Zero => {}
            Padic::Value { val, .. } => best = best.max(q * p_power_rational(p, -val)),
            Padic::Indeterminate { abs } => unknown = unknown.max(q * p_power_rational(p, -abs)),
        }
    }
    if !unknown.is_zero() && unknown >= best {
        return Err(PadicError::Precision);
    }
    Ok(best)
}

/// Smallest `v` with `q * p^-v <= radius`.
fn exponent_bound(p: u64, q: &Rational, radius: &Rational) -> i64 {
    let mut v = 0i64;
    while q * p_power_rational(p, -v) > *radius {
        v += 1;
    }
    while q * p_power_rational(p, -(v - 1)) <= *radius {
        v -= 1;
    }
    v
}

/// `{z : N(z) <= radius}`.
pub fn ball_of_radius(norm: &NormSpec, radius: &Rational) -> Result<Lattice, PadicError> {
    if *radius <= Rational::zero() {
        return Err(PadicError::NonPositiveRadius);
    }
    let ring = &norm.ring;
    let d = norm.dim();
    let gens: Vec<Vec<Padic>> = (0..d)
        .map(|j| {
            let shift = ring.p_power(exponent_bound(ring.prime(), &norm.q[j], radius));
            linalg::column(&norm.frame_inverse, j)
                .into_iter()
                .map(|x| ring.mul(x, shift))
                .collect()
        })
        .collect();
    Lattice::from_generators(ring, d, &gens)
}

/// The largest value of `N` on `lattice`, attained on a basis vector.
pub fn radius_of(norm: &NormSpec, lattice: &Lattice) -> Result<Rational, PadicError> {
    let mut best = Rational::zero();
    for v in lattice.basis(&norm.ring) {
        let value = norm_eval(norm, &v)?;
        if value > best {
            best = value;
        }
    }
    Ok(best)
}

pub fn is_ball(norm: &NormSpec, lattice: &Lattice) -> Result<bool, PadicError> {
    let radius = radius_of(norm, lattice)?;
    Ok(ball_of_radius(norm, &radius)? == *lattice)
}

/// The balls `K` with `pL ⊆ K ⊆ L`, smallest first. There is one per distinct
/// value of `N` in `(R/p, R]`, where `R` is the radius of `L`, plus `pL`.
pub fn intermediary_balls(norm: &NormSpec, lattice: &Lattice) -> Result<LatticeChain, PadicError> {
    if norm.dim() != lattice.dim() {
        return Err(PadicError::DimensionMismatch);
    }
    if !is_ball(norm, lattice)? {
        return Err(PadicError::NotABall);
    }
    let p = norm.ring.prime();
    let top = radius_of(norm, lattice)?;
    let floor = &top / Rational::from_integer(p.into());
    let mut thresholds: Vec<Rational> = norm
        .q
        .iter()
        .map(|q| {
            let v = exponent_bound(p, q, &top);
            q * p_power_rational(p, -v)
        })
        .collect();
    thresholds.push(floor);
    thresholds.sort();
    thresholds.dedup();
    let balls = thresholds
        .iter()
        .map(|r| ball_of_radius(norm, r))
        .collect::<Result<Vec<_>, _>>()?;
    LatticeChain::new(&norm.ring, balls)
}
