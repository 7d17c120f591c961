//! Unit complex vectors modulo phase, the S¹ and torus momentum maps, the
//! canonical Poisson bracket in Wirtinger form, and the diagonal quadratic
//! Hamiltonians `H_c([z]) = Σ c_n |z_n|²` with their first integrals.
//!
//! Bracket convention: `{f, g} = 2i Σ_j (∂f/∂z̄_j ∂g/∂z_j - ∂f/∂z_j ∂g/∂z̄_j)`,
//! which gives `{Re z_0, Im z_0} = 1` and the Hamiltonian flow
//! `z_n(t) = z_n(0) e^{2i c_n t}`.
//!
//! Momentum maps take values in `iℝ`; they are returned as their real
//! coefficients.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Step of the numeric Wirtinger derivatives.
pub const WIRTINGER_STEP: f64 = 1e-6;
/// Largest imaginary part tolerated in a bracket of real fields.
pub const BRACKET_IMAG_TOL: f64 = 1e-10;

/// Point of the unit sphere in ℂ^N.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint<T> {
    coords: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexPoint<T> {
    pub fn new(coords: Vec<Complex<T>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::DimensionTooSmall(0));
        }
        if coords.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let n2 = norm_sqr(&coords);
        if (n2 - T::one()).abs() > T::tol(1e-12) * T::count(coords.len()) {
            return Err(Error::NotNormalized(n2.as_f64()));
        }
        Ok(Self { coords })
    }

    /// Rescales a nonzero vector onto the unit sphere.
    pub fn normalize(coords: Vec<Complex<T>>) -> Result<Self> {
        let n = norm_sqr(&coords).sqrt();
        if !(n > T::zero()) || !n.is_finite() {
            return Err(Error::NotNormalizable(n.as_f64()));
        }
        Self::new(coords.into_iter().map(|z| z / n).collect())
    }

    /// Real positive lift `x_n = √p_n` of a probability vector.
    pub fn from_real(x: &[T]) -> Result<Self> {
        Self::new(x.iter().map(|&r| Complex::new(r, T::zero())).collect())
    }

    pub fn coords(&self) -> &[Complex<T>] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// `e^{iθ} z`.
    pub fn rotated(&self, theta: T) -> Self {
        let u = Complex::from_polar(T::one(), theta);
        Self { coords: self.coords.iter().map(|&z| z * u).collect() }
    }
}

fn norm_sqr<T: Scalar>(z: &[Complex<T>]) -> T {
    z.iter().map(|c| c.norm_sqr()).sum()
}

/// Class `[z]` in CP^{N-1}, stored in canonical gauge: the first coordinate of
/// largest modulus is real and nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint<T> {
    rep: ComplexPoint<T>,
    gauge_index: usize,
}

impl<T: Scalar> ProjectivePoint<T> {
    pub fn from_complex(z: &ComplexPoint<T>) -> Self {
        let gauge_index = z
            .coords
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, c)| {
                let m = c.norm_sqr();
                if m > best.1 {
                    (i, m)
                } else {
                    best
                }
            })
            .0;
        let pivot = z.coords[gauge_index];
        let phase = pivot.arg();
        let mut rep = z.rotated(-phase);
        rep.coords[gauge_index] = Complex::new(pivot.norm(), T::zero());
        Self { rep, gauge_index }
    }

    pub fn rep(&self) -> &ComplexPoint<T> {
        &self.rep
    }

    pub fn gauge_index(&self) -> usize {
        self.gauge_index
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }
}

impl<T: Scalar> From<&ComplexPoint<T>> for ProjectivePoint<T> {
    fn from(z: &ComplexPoint<T>) -> Self {
        Self::from_complex(z)
    }
}

/// `H_c([z]) = Σ c_n |z_n|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian<T> {
    weights: Vec<T>,
}

impl<T: Scalar> QuadraticHamiltonian<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { weights })
    }

    /// The first integral `H_n = c_n |z_n|²` of `H_c`.
    pub fn component(c: &[T], n: usize) -> Self {
        let mut weights = vec![T::zero(); c.len()];
        weights[n] = c[n];
        Self { weights }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    fn eval_raw(&self, z: &[Complex<T>]) -> T {
        self.weights.iter().zip(z).map(|(&c, w)| c * w.norm_sqr()).sum()
    }
}

/// `⟨z, z⟩ = Σ |z_n|²` (the momentum map is `i` times this).
pub fn momentum_s1<T: Scalar>(z: &ComplexPoint<T>) -> T {
    norm_sqr(&z.coords)
}

/// `(1/2)|z_n|²` for each n (the momentum map is `i` times this). Twice the
/// output is a point of the closed simplex.
pub fn momentum_torus<T: Scalar>(zp: &ProjectivePoint<T>) -> Vec<T> {
    let half = T::lit(0.5);
    zp.rep.coords.iter().map(|z| half * z.norm_sqr()).collect()
}

pub fn hamiltonian_value<T: Scalar>(h: &QuadraticHamiltonian<T>, zp: &ProjectivePoint<T>) -> Result<T> {
    if h.dim() != zp.dim() {
        return Err(Error::DimensionMismatch(h.dim(), zp.dim()));
    }
    Ok(h.eval_raw(&zp.rep.coords))
}

type RawField<T> = dyn Fn(&[Complex<T>]) -> T + Send + Sync;
type RawDerivatives<T> = dyn Fn(&[Complex<T>]) -> Wirtinger<T> + Send + Sync;

/// Real-valued function on ℂ^N. The structured variants carry exact
/// Wirtinger derivatives; [`ScalarField::Custom`] falls back to finite
/// differences.
#[derive(Clone)]
pub enum ScalarField<T> {
    Constant(T),
    Quadratic(QuadraticHamiltonian<T>),
    RealPart(usize),
    ImagPart(usize),
    Custom(Arc<RawField<T>>),
    /// Caller-supplied value and Wirtinger derivatives. For a real field
    /// `∂f/∂z̄` must be the conjugate of `∂f/∂z`; violations surface as
    /// [`Error::ComplexResidue`] in brackets.
    Analytic(Arc<RawField<T>>, Arc<RawDerivatives<T>>),
}

impl<T> fmt::Debug for ScalarField<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Self::Quadratic(h) => f.debug_tuple("Quadratic").field(h).finish(),
            Self::RealPart(j) => f.debug_tuple("RealPart").field(j).finish(),
            Self::ImagPart(j) => f.debug_tuple("ImagPart").field(j).finish(),
            Self::Custom(_) => f.write_str("Custom(..)"),
            Self::Analytic(..) => f.write_str("Analytic(..)"),
        }
    }
}

impl<T: Scalar> ScalarField<T> {
    pub fn custom(f: impl Fn(&[Complex<T>]) -> T + Send + Sync + 'static) -> Self {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, z: &[Complex<T>]) -> T {
        match self {
            Self::Constant(c) => *c,
            Self::Quadratic(h) => h.eval_raw(z),
            Self::RealPart(j) => z[*j].re,
            Self::ImagPart(j) => z[*j].im,
            Self::Custom(f) | Self::Analytic(f, _) => f(z),
        }
    }
}

/// How [`wirtinger_with`] obtains derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    /// Exact forms where registered, finite differences otherwise.
    #[default]
    Auto,
    /// Finite differences for every field.
    Numeric,
}

/// `(∂f/∂z_j, ∂f/∂z̄_j)` for every j.
pub type Wirtinger<T> = (Vec<Complex<T>>, Vec<Complex<T>>);

pub fn wirtinger<T: Scalar>(f: &ScalarField<T>, z: &[Complex<T>]) -> Wirtinger<T> {
    wirtinger_with(f, z, DerivativeMode::Auto)
}

pub fn wirtinger_with<T: Scalar>(f: &ScalarField<T>, z: &[Complex<T>], mode: DerivativeMode) -> Wirtinger<T> {
    let n = z.len();
    let zero = Complex::new(T::zero(), T::zero());
    let half = T::lit(0.5);
    if mode == DerivativeMode::Auto {
        match f {
            ScalarField::Constant(_) => return (vec![zero; n], vec![zero; n]),
            ScalarField::Quadratic(h) => {
                let dz = h.weights.iter().zip(z).map(|(&c, w)| w.conj() * c).collect();
                let dzbar = h.weights.iter().zip(z).map(|(&c, w)| w * c).collect();
                return (dz, dzbar);
            }
            ScalarField::RealPart(j) => {
                let mut d = vec![zero; n];
                d[*j] = Complex::new(half, T::zero());
                return (d.clone(), d);
            }
            ScalarField::ImagPart(j) => {
                let mut dz = vec![zero; n];
                let mut dzbar = vec![zero; n];
                dz[*j] = Complex::new(T::zero(), -half);
                dzbar[*j] = Complex::new(T::zero(), half);
                return (dz, dzbar);
            }
            ScalarField::Analytic(_, d) => return d(z),
            ScalarField::Custom(_) => {}
        }
    }
    numeric_wirtinger(f, z)
}

/// `∂f/∂z = (∂f/∂x - i ∂f/∂y)/2`, `∂f/∂z̄ = (∂f/∂x + i ∂f/∂y)/2`, with
/// central differences of step [`WIRTINGER_STEP`].
fn numeric_wirtinger<T: Scalar>(f: &ScalarField<T>, z: &[Complex<T>]) -> Wirtinger<T> {
    let h = T::lit(WIRTINGER_STEP);
    let two_h = h + h;
    let half = T::lit(0.5);
    let mut work = z.to_vec();
    let mut dz = Vec::with_capacity(z.len());
    let mut dzbar = Vec::with_capacity(z.len());
    for j in 0..z.len() {
        let orig = work[j];
        work[j] = orig + Complex::new(h, T::zero());
        let xp = f.eval(&work);
        work[j] = orig - Complex::new(h, T::zero());
        let xm = f.eval(&work);
        work[j] = orig + Complex::new(T::zero(), h);
        let yp = f.eval(&work);
        work[j] = orig - Complex::new(T::zero(), h);
        let ym = f.eval(&work);
        work[j] = orig;
        let dx = (xp - xm) / two_h;
        let dy = (yp - ym) / two_h;
        dz.push(Complex::new(half * dx, -half * dy));
        dzbar.push(Complex::new(half * dx, half * dy));
    }
    (dz, dzbar)
}

/// `{f, g}` at `z`; errors if the imaginary part exceeds [`BRACKET_IMAG_TOL`].
pub fn poisson_bracket<T: Scalar>(f: &ScalarField<T>, g: &ScalarField<T>, z: &[Complex<T>]) -> Result<T> {
    poisson_bracket_with(f, g, z, DerivativeMode::Auto)
}

pub fn poisson_bracket_with<T: Scalar>(
    f: &ScalarField<T>,
    g: &ScalarField<T>,
    z: &[Complex<T>],
    mode: DerivativeMode,
) -> Result<T> {
    let (fz, fzbar) = wirtinger_with(f, z, mode);
    let (gz, gzbar) = wirtinger_with(g, z, mode);
    let s: Complex<T> = (0..z.len())
        .map(|j| fzbar[j] * gz[j] - fz[j] * gzbar[j])
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    let value = s * Complex::new(T::zero(), T::lit(2.0));
    if value.im.abs() > T::tol(BRACKET_IMAG_TOL) {
        return Err(Error::ComplexResidue(value.im.as_f64()));
    }
    Ok(value.re)
}

/// `z_n(t) = z_n(0) e^{2i c_n t}`.
pub fn hamiltonian_flow<T: Scalar>(h: &QuadraticHamiltonian<T>, z0: &ComplexPoint<T>, t: T) -> Result<ComplexPoint<T>> {
    if h.dim() != z0.dim() {
        return Err(Error::DimensionMismatch(h.dim(), z0.dim()));
    }
    let two = T::lit(2.0);
    let coords =
        z0.coords.iter().zip(&h.weights).map(|(&z, &c)| z * Complex::from_polar(T::one(), two * c * t)).collect();
    Ok(ComplexPoint { coords })
}

/// Horizontal projection at `z`: removes the complex component along `z`.
fn horizontal<T: Scalar>(z: &[Complex<T>], u: &[Complex<T>]) -> Vec<Complex<T>> {
    let k: Complex<T> =
        u.iter().zip(z).map(|(a, b)| a * b.conj()).fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
    u.iter().zip(z).map(|(&a, &b)| a - k * b).collect()
}

/// Fubini–Study gradient of `H` at `z`, as a horizontal vector
/// (`2 Diag(c) z` minus its component along `z`).
pub fn fs_gradient<T: Scalar>(h: &QuadraticHamiltonian<T>, z: &ComplexPoint<T>) -> Vec<Complex<T>> {
    let two = T::lit(2.0);
    let raw: Vec<Complex<T>> = z.coords.iter().zip(&h.weights).map(|(&w, &c)| w * (two * c)).collect();
    horizontal(&z.coords, &raw)
}

/// Hamiltonian vector field `2i Diag(c) z`, horizontally projected.
pub fn hamiltonian_field<T: Scalar>(h: &QuadraticHamiltonian<T>, z: &ComplexPoint<T>) -> Vec<Complex<T>> {
    let two = T::lit(2.0);
    let raw: Vec<Complex<T>> =
        z.coords.iter().zip(&h.weights).map(|(&w, &c)| w * Complex::new(T::zero(), two * c)).collect();
    horizontal(&z.coords, &raw)
}

/// `‖X_H - i ∇H‖` with both fields horizontally lifted at `z`.
pub fn kahler_gradient_check<T: Scalar>(h: &QuadraticHamiltonian<T>, z: &ComplexPoint<T>) -> Result<T> {
    if h.dim() != z.dim() {
        return Err(Error::DimensionMismatch(h.dim(), z.dim()));
    }
    let grad = fs_gradient(h, z);
    let xh = hamiltonian_field(h, z);
    let i = Complex::new(T::zero(), T::one());
    Ok(xh.iter().zip(&grad).map(|(&a, &b)| (a - i * b).norm_sqr()).sum::<T>().sqrt())
}

/// Result of [`integrability_suite`]; serializes to the report schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub brackets_max_abs: f64,
    pub conservation_max_drift: f64,
    pub gram_det: f64,
    pub pass: bool,
    pub seed: u64,
}

/// Thresholds applied by [`integrability_suite`].
pub const NUMERIC_BRACKET_TOL: f64 = 1e-8;
pub const CONSERVATION_TOL: f64 = 1e-10;
/// Flow times probed for conservation.
pub const CONSERVATION_TIMES: [f64; 3] = [0.1, 1.0, 10.0];

/// Uniform sample of the box `[-1, 1]^{2N}`, normalized onto the sphere.
pub fn random_complex_point<T: Scalar>(dim: usize, rng: &mut impl Rng) -> ComplexPoint<T> {
    loop {
        let coords: Vec<Complex<T>> = (0..dim)
            .map(|_| Complex::new(T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0))))
            .collect();
        if let Ok(z) = ComplexPoint::normalize(coords) {
            return z;
        }
    }
}

/// Seeded check that the `H_n` Poisson-commute with each other and with
/// `H_c`, are conserved by the flow of `H_c`, and have independent
/// differentials (Gram determinant of their ambient gradients).
pub fn integrability_suite<T: Scalar>(c: &[T], trials: usize, seed: u64) -> Result<IntegrabilityReport> {
    let n = c.len();
    if n == 0 || trials == 0 {
        return Err(Error::InvalidSpec("integrability suite needs N >= 1 and trials >= 1".into()));
    }
    let total = QuadraticHamiltonian::new(c.to_vec())?;
    let mut fields: Vec<ScalarField<T>> =
        (0..n).map(|k| ScalarField::Quadratic(QuadraticHamiltonian::component(c, k))).collect();
    fields.push(ScalarField::Quadratic(total.clone()));

    let mut analytic_max = T::zero();
    let mut numeric_max = T::zero();
    let mut drift_max = T::zero();
    let mut gram_min = T::infinity();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
        let z = random_complex_point::<T>(n, &mut rng);
        for a in 0..fields.len() {
            for b in (a + 1)..fields.len() {
                let exact = poisson_bracket(&fields[a], &fields[b], z.coords())?;
                let approx = poisson_bracket_with(&fields[a], &fields[b], z.coords(), DerivativeMode::Numeric)?;
                analytic_max = analytic_max.max(exact.abs());
                numeric_max = numeric_max.max(approx.abs());
            }
        }
        for &t in &CONSERVATION_TIMES {
            let zt = hamiltonian_flow(&total, &z, T::lit(t))?;
            for f in &fields {
                drift_max = drift_max.max((f.eval(zt.coords()) - f.eval(z.coords())).abs());
            }
        }
        gram_min = gram_min.min(gradient_gram_det(c, &z));
    }
    let pass = analytic_max == T::zero()
        && numeric_max <= T::tol(NUMERIC_BRACKET_TOL)
        && drift_max <= T::tol(CONSERVATION_TOL)
        && gram_min > T::zero();
    Ok(IntegrabilityReport {
        brackets_max_abs: analytic_max.max(numeric_max).as_f64(),
        conservation_max_drift: drift_max.as_f64(),
        gram_det: gram_min.as_f64(),
        pass,
        seed,
    })
}

/// Gram determinant of the real gradients of the lifts `Ĥ_n = c_n|z_n|²` in
/// ℂ^N ≅ ℝ^{2N}. The gradients `2 c_n (Re z_n, Im z_n) e_n` have disjoint
/// supports, but the full Gram matrix is formed and reduced anyway.
pub fn gradient_gram_det<T: Scalar>(c: &[T], z: &ComplexPoint<T>) -> T {
    let n = c.len();
    let two = T::lit(2.0);
    let grads: Vec<Vec<T>> = (0..n)
        .map(|k| {
            let mut g = vec![T::zero(); 2 * n];
            g[2 * k] = two * c[k] * z.coords[k].re;
            g[2 * k + 1] = two * c[k] * z.coords[k].im;
            g
        })
        .collect();
    let mut gram: Vec<Vec<T>> =
        (0..n).map(|a| (0..n).map(|b| grads[a].iter().zip(&grads[b]).map(|(&x, &y)| x * y).sum()).collect()).collect();
    determinant(&mut gram)
}

/// Determinant by Gaussian elimination with partial pivoting.
fn determinant<T: Scalar>(m: &mut [Vec<T>]) -> T {
    let n = m.len();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap()).unwrap();
        if m[pivot][col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det = det * m[col][col];
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for r in rest.iter_mut() {
            let f = r[col] / pivot_row[col];
            for (x, &v) in r[col..].iter_mut().zip(&pivot_row[col..]) {
                *x = *x - f * v;
            }
        }
    }
    det
}
