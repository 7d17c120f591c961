//! Truncated sequences: simplex points, sphere points, their tangent vectors,
//! and the [`SequenceSpec`] generators used to build them.
//!
//! An N-vector always stands for the first N coordinates of an infinite
//! sequence. `tail_bound` records how much probability mass the truncation
//! discarded, so identities that hold only in the limit can be checked as
//! Cauchy-in-N statements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};

/// Absolute tolerance per coordinate for membership checks.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

fn max_abs<T: Scalar>(xs: &[T]) -> T {
    xs.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Strictly positive probability vector of length `dim >= 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint<T> {
    coords: Vec<T>,
    tail_bound: T,
}

impl<T: Scalar> SimplexPoint<T> {
    /// Validates a finite probability vector (`tail_bound = 0`).
    pub fn new(coords: Vec<T>) -> Result<Self> {
        Self::with_tail(coords, T::zero())
    }

    /// Validates the first N coordinates of a point whose remaining mass is at
    /// most `tail_bound`.
    pub fn with_tail(coords: Vec<T>, tail_bound: T) -> Result<Self> {
        let n = coords.len();
        if n < 2 {
            return Err(Error::DimensionTooSmall(n));
        }
        if !(tail_bound >= T::zero()) || !tail_bound.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        for (index, &x) in coords.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteInput);
            }
            if x <= T::zero() {
                return Err(Error::NonPositiveCoordinate { index, value: x.as_f64() });
            }
        }
        let s = scalar::sum(&coords);
        let tol = T::tol(MEMBERSHIP_TOL) * T::count(n);
        if s > T::one() + tol || s < T::one() - tail_bound - tol {
            return Err(Error::NotOnSimplex { sum: s.as_f64(), tail_bound: tail_bound.as_f64() });
        }
        Ok(Self { coords, tail_bound })
    }

    /// Uniform distribution on `dim` atoms.
    pub fn uniform(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Self::new(vec![T::one() / T::count(dim); dim])
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn sum(&self) -> T {
        scalar::sum(&self.coords)
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// Rescales to unit sum and drops the tail bookkeeping.
    pub fn renormalized(&self) -> Result<Self> {
        let s = self.sum();
        Self::new(self.coords.iter().map(|&x| x / s).collect())
    }

    /// Zero-padded copy of the coordinates with length `len >= dim`.
    pub fn padded(&self, len: usize) -> Vec<T> {
        let mut v = self.coords.clone();
        v.resize(len.max(self.dim()), T::zero());
        v
    }

    pub(crate) fn require_finite_support(&self) -> Result<()> {
        if self.tail_bound > T::zero() {
            Err(Error::NonZeroTail(self.tail_bound.as_f64()))
        } else {
            Ok(())
        }
    }

    pub(crate) fn same_point(&self, other: &Self) -> bool {
        self.tail_bound == other.tail_bound && self.coords == other.coords
    }
}

/// Zero-sum vector attached to a [`SimplexPoint`].
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T> {
    base: SimplexPoint<T>,
    comps: Vec<T>,
}

impl<T: Scalar> TangentVector<T> {
    /// Validates that `comps` sums to zero within `1e-12 * N` (relative to the
    /// largest component when that exceeds one).
    pub fn new(base: SimplexPoint<T>, comps: Vec<T>) -> Result<Self> {
        Self::with_tolerance(base, comps, MEMBERSHIP_TOL)
    }

    pub fn with_tolerance(base: SimplexPoint<T>, comps: Vec<T>, tol: f64) -> Result<Self> {
        if comps.len() != base.dim() {
            return Err(Error::LengthMismatch { expected: base.dim(), got: comps.len() });
        }
        if comps.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let s = scalar::sum(&comps);
        let bound = zero_sum_bound(&comps, tol);
        if s.abs() > bound {
            return Err(Error::NotTangent { sum: s.as_f64(), tol: bound.as_f64() });
        }
        Ok(Self { base, comps })
    }

    pub fn zero(base: SimplexPoint<T>) -> Self {
        let comps = vec![T::zero(); base.dim()];
        Self { base, comps }
    }

    pub fn base(&self) -> &SimplexPoint<T> {
        &self.base
    }

    pub fn comps(&self) -> &[T] {
        &self.comps
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// `a * self + b * other`; both vectors must share a base point.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if !self.base.same_point(&other.base) {
            return Err(Error::BaseMismatch);
        }
        let comps = self.comps.iter().zip(&other.comps).map(|(&x, &y)| a * x + b * y).collect();
        Ok(Self { base: self.base.clone(), comps })
    }

    pub fn scaled(&self, a: T) -> Self {
        Self { base: self.base.clone(), comps: self.comps.iter().map(|&x| a * x).collect() }
    }

    /// ℓ² norm of `v_n / sqrt(p_n)`; finite at every truncation, monitored
    /// under refinement.
    pub fn weighted_l2_norm(&self) -> T {
        self.comps.iter().zip(self.base.coords()).map(|(&v, &p)| v * v / p).sum::<T>().sqrt()
    }
}

fn zero_sum_bound<T: Scalar>(comps: &[T], tol: f64) -> T {
    T::tol(tol) * T::count(comps.len().max(1)) * max_abs(comps).max(T::one())
}

/// Point on the ℓq unit sphere (up to a recorded tail mass).
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint<T> {
    coords: Vec<T>,
    q: T,
    positive: bool,
    tail_bound: T,
}

impl<T: Scalar> SpherePoint<T> {
    pub fn new(coords: Vec<T>, q: T) -> Result<Self> {
        Self::with_tail(coords, q, T::zero())
    }

    /// Validates `Σ|x_n|^q ∈ [1 - tail_bound, 1]` within `1e-12 * N`.
    pub fn with_tail(coords: Vec<T>, q: T, tail_bound: T) -> Result<Self> {
        check_exponent(q)?;
        if coords.is_empty() {
            return Err(Error::DimensionTooSmall(0));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let mass: T = coords.iter().map(|x| x.abs().powf(q)).sum();
        let tol = T::tol(MEMBERSHIP_TOL) * T::count(coords.len());
        if mass > T::one() + tol || mass < T::one() - tail_bound - tol {
            return Err(Error::NotOnSphere(mass.as_f64()));
        }
        let positive = coords.iter().all(|&x| x > T::zero());
        Ok(Self { coords, q, positive, tail_bound })
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn is_positive(&self) -> bool {
        self.positive
    }

    pub fn tail_bound(&self) -> T {
        self.tail_bound
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Tangent vector to the ℓq sphere at `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereTangent<T> {
    base: SpherePoint<T>,
    comps: Vec<T>,
}

impl<T: Scalar> SphereTangent<T> {
    pub fn new(base: SpherePoint<T>, comps: Vec<T>) -> Result<Self> {
        Self::with_tolerance(base, comps, MEMBERSHIP_TOL)
    }

    /// Checks `Σ sign(x_n)|x_n|^{q-1} v_n = 0` relative to the magnitude of
    /// its terms.
    pub fn with_tolerance(base: SpherePoint<T>, comps: Vec<T>, tol: f64) -> Result<Self> {
        if comps.len() != base.dim() {
            return Err(Error::LengthMismatch { expected: base.dim(), got: comps.len() });
        }
        let qm1 = base.q - T::one();
        let (s, scale) = base.coords.iter().zip(&comps).fold((T::zero(), T::zero()), |(s, a), (&x, &v)| {
            let t = x.signum() * x.abs().powf(qm1) * v;
            (s + t, a + t.abs())
        });
        let bound = T::tol(tol) * scale.max(T::one());
        if s.abs() > bound {
            return Err(Error::NotTangent { sum: s.as_f64(), tol: bound.as_f64() });
        }
        Ok(Self { base, comps })
    }

    pub fn base(&self) -> &SpherePoint<T> {
        &self.base
    }

    pub fn comps(&self) -> &[T] {
        &self.comps
    }
}

pub(crate) fn check_exponent<T: Scalar>(q: T) -> Result<()> {
    if q.is_finite() && q > T::one() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(q.as_f64()))
    }
}

/// `(Σ |v_n|^q)^{1/q}`, evaluated with the largest entry factored out.
pub fn lq_norm<T: Scalar>(v: &[T], q: T) -> Result<T> {
    check_exponent(q)?;
    let m = max_abs(v);
    if m == T::zero() {
        return Ok(T::zero());
    }
    let s: T = v.iter().map(|&x| (x.abs() / m).powf(q)).sum();
    Ok(m * s.powf(q.recip()))
}

/// Projects `raw` onto the zero-sum hyperplane and attaches it to `base`.
///
/// Vectors that already sum to zero (to rounding) come back unchanged, which
/// makes the projection idempotent bit-for-bit.
pub fn make_tangent<T: Scalar>(base: &SimplexPoint<T>, raw: &[T]) -> Result<TangentVector<T>> {
    if raw.len() != base.dim() {
        return Err(Error::LengthMismatch { expected: base.dim(), got: raw.len() });
    }
    let s = scalar::sum(raw);
    let comps = if s.abs() <= zero_sum_bound(raw, MEMBERSHIP_TOL) {
        raw.to_vec()
    } else {
        let mean = s / T::count(raw.len());
        raw.iter().map(|&x| x - mean).collect()
    };
    TangentVector::new(base.clone(), comps)
}

/// How a generated sequence is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Rescale the truncation to unit sum.
    Simplex,
    /// Rescale the truncation to unit ℓq norm.
    Sphere,
    /// Keep the genuine first N coordinates of the normalized infinite
    /// sequence (finite kinds are taken as given).
    #[default]
    None,
}

/// Shape of a generated sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SequenceKind {
    Explicit {
        coords: Vec<f64>,
    },
    Uniform,
    /// `r^n` for `r ∈ (0, 1)`.
    Geometric {
        ratio: f64,
    },
    /// `(n + 1)^{-s}` for `s > 1`.
    Power {
        exponent: f64,
    },
}

/// Desk-scale description of an element of ℓ¹ / ℓ².
///
/// JSON form: `{"kind": ..., "dim": N, "ratio"?, "coords"?, "exponent"?,
/// "normalize": "simplex"|"sphere"|"none", "q"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    #[serde(flatten)]
    pub kind: SequenceKind,
    pub dim: usize,
    #[serde(default)]
    pub normalize: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind, dim: usize, normalize: Normalization) -> Self {
        Self { kind, dim, normalize, q: None }
    }

    pub fn uniform(dim: usize) -> Self {
        Self::new(SequenceKind::Uniform, dim, Normalization::Simplex)
    }

    pub fn geometric(ratio: f64, dim: usize, normalize: Normalization) -> Self {
        Self::new(SequenceKind::Geometric { ratio }, dim, normalize)
    }

    pub fn explicit(coords: Vec<f64>, normalize: Normalization) -> Self {
        let dim = coords.len();
        Self::new(SequenceKind::Explicit { coords }, dim, normalize)
    }

    pub fn with_dim(&self, dim: usize) -> Self {
        let mut s = self.clone();
        s.dim = dim;
        s
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            SequenceKind::Explicit { .. } => "explicit",
            SequenceKind::Uniform => "uniform",
            SequenceKind::Geometric { .. } => "geometric",
            SequenceKind::Power { .. } => "power",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            SequenceKind::Geometric { ratio } if !(*ratio > 0.0 && *ratio < 1.0) => {
                return Err(Error::RatioOutOfRange(*ratio))
            }
            SequenceKind::Power { exponent } if !(*exponent > 1.0 && exponent.is_finite()) => {
                return Err(Error::InvalidSpec(format!("power exponent {exponent} must exceed 1")))
            }
            SequenceKind::Explicit { coords } if coords.len() != self.dim => {
                return Err(Error::LengthMismatch { expected: self.dim, got: coords.len() })
            }
            _ => {}
        }
        if let Some(q) = self.q {
            check_exponent(q)?;
        }
        Ok(())
    }

    /// Leading-coefficient-one values `x_0, …, x_{N-1}` of the sequence.
    pub fn raw_values(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.dim;
        Ok(match &self.kind {
            SequenceKind::Explicit { coords } => coords.clone(),
            SequenceKind::Uniform => vec![1.0; n],
            SequenceKind::Geometric { ratio } => (0..n).map(|i| ratio.powi(i as i32)).collect(),
            SequenceKind::Power { exponent } => (0..n).map(|i| ((i + 1) as f64).powf(-exponent)).collect(),
        })
    }

    /// Upper bound on `Σ_{n >= N} x_n` for the leading-coefficient-one
    /// sequence; `None` for kinds without a tail model.
    pub fn unnormalized_tail(&self) -> Option<f64> {
        let n = self.dim as f64;
        match self.kind {
            SequenceKind::Geometric { ratio } => Some(ratio.powf(n) / (1.0 - ratio)),
            SequenceKind::Power { exponent } => Some(n.powf(1.0 - exponent) / (exponent - 1.0)),
            _ => None,
        }
    }

    /// `Σ_{n >= 0} x_n` of the full sequence, for kinds with a tail model.
    pub fn infinite_sum(&self) -> Option<f64> {
        match self.kind {
            SequenceKind::Geometric { ratio } => Some(1.0 / (1.0 - ratio)),
            SequenceKind::Power { exponent } => Some(zeta(exponent)),
            _ => None,
        }
    }

    /// Probability mass beyond the truncation once the infinite sequence is
    /// normalized to unit sum.
    pub fn normalized_tail(&self) -> Option<f64> {
        Some(self.unnormalized_tail()? / self.infinite_sum()?)
    }
}

/// Riemann zeta for `s > 1`: direct sum plus an Euler–Maclaurin remainder.
fn zeta(s: f64) -> f64 {
    const M: usize = 1000;
    let head: f64 = (1..=M).rev().map(|k| (k as f64).powf(-s)).sum();
    let m = M as f64;
    head + m.powf(1.0 - s) / (s - 1.0) - 0.5 * m.powf(-s) + s * m.powf(-s - 1.0) / 12.0
}

fn convert<T: Scalar>(xs: &[f64]) -> Vec<T> {
    xs.iter().map(|&x| T::lit(x)).collect()
}

/// Builds a validated [`SimplexPoint`] from a spec.
pub fn make_simplex_point<T: Scalar>(spec: &SequenceSpec) -> Result<SimplexPoint<T>> {
    if spec.dim < 2 {
        return Err(Error::DimensionTooSmall(spec.dim));
    }
    let raw = spec.raw_values()?;
    let total: f64 = raw.iter().sum();
    if raw.iter().all(|&x| x == 0.0) {
        return Err(Error::NotNormalizable(total));
    }
    if let Some((index, &value)) = raw.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(Error::NonPositiveCoordinate { index, value });
    }
    match spec.normalize {
        Normalization::Simplex => {
            let coords: Vec<T> = convert(&raw);
            let s = scalar::sum(&coords);
            SimplexPoint::new(coords.into_iter().map(|x| x / s).collect())
        }
        Normalization::None => match (spec.infinite_sum(), spec.normalized_tail()) {
            (Some(inf), Some(tail)) => {
                SimplexPoint::with_tail(raw.iter().map(|&x| T::lit(x / inf)).collect(), T::lit(tail))
            }
            _ if matches!(spec.kind, SequenceKind::Uniform) => SimplexPoint::uniform(spec.dim),
            _ => SimplexPoint::new(convert(&raw)),
        },
        Normalization::Sphere => {
            Err(Error::InvalidSpec("sphere normalization produces a sphere point, not a simplex point".into()))
        }
    }
}

/// Builds a positive point of the ℓq unit sphere from a spec (`q` defaults to 2).
pub fn make_sphere_point<T: Scalar>(spec: &SequenceSpec) -> Result<SpherePoint<T>> {
    let q = T::lit(spec.q.unwrap_or(2.0));
    let raw: Vec<T> = convert(&spec.raw_values()?);
    if raw.iter().all(|&x| x == T::zero()) {
        return Err(Error::NotNormalizable(0.0));
    }
    let norm = lq_norm(&raw, q)?;
    SpherePoint::new(raw.into_iter().map(|x| x / norm).collect(), q)
}

/// Genuine truncations of `spec` at each dimension in `dims`, each carrying
/// its discarded mass as `tail_bound`.
pub fn refine<T: Scalar>(spec: &SequenceSpec, dims: &[usize]) -> Result<Vec<SimplexPoint<T>>> {
    if spec.unnormalized_tail().is_none() {
        return Err(Error::NoTailModel(spec.kind_name().into()));
    }
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingDims);
    }
    dims.iter()
        .map(|&n| {
            let mut s = spec.with_dim(n);
            s.normalize = Normalization::None;
            make_simplex_point(&s)
        })
        .collect()
}
