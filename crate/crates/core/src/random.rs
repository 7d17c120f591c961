//! Seeded samplers for property runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::scalar::{self, Scalar};
use crate::sequence::{make_tangent, SimplexPoint, TangentVector};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Interior point with log-coordinates uniform in `[-2, 2]` before
/// normalization, so the smallest coordinate stays within `e^4` of the largest.
pub fn simplex_point<T: Scalar>(dim: usize, rng: &mut impl Rng) -> Result<SimplexPoint<T>> {
    let raw: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-2.0f64..2.0).exp())).collect();
    let s = scalar::sum(&raw);
    SimplexPoint::new(raw.into_iter().map(|x| x / s).collect())
}

/// Uniform `[-1, 1]^N` vector projected onto the zero-sum hyperplane.
pub fn tangent<T: Scalar>(base: &SimplexPoint<T>, rng: &mut impl Rng) -> Result<TangentVector<T>> {
    let raw: Vec<T> = (0..base.dim()).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    make_tangent(base, &raw)
}

/// Tangent `v_n = p_n (a_n - Σ p_k a_k)` with log-rates `a_n` uniform in
/// `[-scale, scale]`.
pub fn log_rate_tangent<T: Scalar>(base: &SimplexPoint<T>, scale: f64, rng: &mut impl Rng) -> Result<TangentVector<T>> {
    let a: Vec<T> = (0..base.dim()).map(|_| T::lit(rng.gen_range(-scale..scale))).collect();
    let mean = scalar::dot(&a, base.coords());
    let comps = a.iter().zip(base.coords()).map(|(&x, &p)| p * (x - mean)).collect();
    TangentVector::new(base.clone(), comps)
}

/// Uniform coefficients in `[lo, hi]`.
pub fn coefficients<T: Scalar>(dim: usize, lo: f64, hi: f64, rng: &mut impl Rng) -> Vec<T> {
    (0..dim).map(|_| T::lit(rng.gen_range(lo..hi))).collect()
}

/// Strictly decreasing coefficients starting at 1 with gaps in `[min_gap, 1]`.
pub fn decreasing_coefficients<T: Scalar>(dim: usize, min_gap: f64, rng: &mut impl Rng) -> Vec<T> {
    let mut c = Vec::with_capacity(dim);
    let mut x = 1.0;
    for _ in 0..dim {
        c.push(T::lit(x));
        x -= rng.gen_range(min_gap..1.0);
    }
    c
}
