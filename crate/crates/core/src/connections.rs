//! Directional derivatives of vector fields, the α-connection, and the
//! exponential connection with its closed-form geodesics.
//!
//! Directional derivatives are taken along the affine chart line `p + s v`.
//! Since `Σ v_n = 0` the line stays on the unit-sum hyperplane, and at finite
//! N this chart induces the same derivative as the sphere pullback.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::sequence::{check_exponent, SimplexPoint, TangentVector};

/// Default step for field derivatives.
pub const FIELD_STEP: f64 = 1e-5;
/// Default step for curve derivatives.
pub const CURVE_STEP: f64 = 1e-3;
/// Smallest step the positivity search will try.
pub const MIN_STEP: f64 = 1e-8;

/// A tangent vector field on the simplex. Implementations must be pure.
pub trait VectorField<T: Scalar> {
    fn eval(&self, p: &SimplexPoint<T>) -> Result<TangentVector<T>>;

    fn label(&self) -> &str {
        "field"
    }
}

type FieldFn<T> = dyn Fn(&SimplexPoint<T>) -> Result<TangentVector<T>> + Send + Sync;

/// Closure-backed vector field.
#[derive(Clone)]
pub struct FnField<T> {
    label: String,
    f: Arc<FieldFn<T>>,
}

impl<T: Scalar> FnField<T> {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&SimplexPoint<T>) -> Result<TangentVector<T>> + Send + Sync + 'static,
    ) -> Self {
        Self { label: label.into(), f: Arc::new(f) }
    }

    /// Field with the same components at every point.
    pub fn constant(comps: Vec<T>) -> Self {
        Self::new("constant", move |p| TangentVector::new(p.clone(), comps.clone()))
    }
}

impl<T> fmt::Debug for FnField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnField").field("label", &self.label).finish()
    }
}

impl<T: Scalar> VectorField<T> for FnField<T> {
    fn eval(&self, p: &SimplexPoint<T>) -> Result<TangentVector<T>> {
        (self.f)(p)
    }

    fn label(&self) -> &str {
        &self.label
    }
}

/// Finite-difference settings for [`directional_derivative_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions<T> {
    pub step: T,
    /// Combine steps `h` and `h/2` to cancel the `O(h²)` error term.
    pub richardson: bool,
}

impl<T: Scalar> Default for DerivativeOptions<T> {
    fn default() -> Self {
        Self { step: T::lit(FIELD_STEP), richardson: false }
    }
}

fn shifted<T: Scalar>(p: &SimplexPoint<T>, v: &[T], s: T) -> Option<SimplexPoint<T>> {
    let coords: Vec<T> = p.coords().iter().zip(v).map(|(&x, &d)| x + s * d).collect();
    if coords.iter().all(|&x| x > T::zero()) {
        SimplexPoint::with_tail(coords, p.tail_bound()).ok()
    } else {
        None
    }
}

/// Central difference of an arbitrary vector-valued function of the point
/// along `p + s v`. The step is halved until both `p ± h v` are positive.
pub fn directional_derivative_of<T, F>(
    f: F,
    p: &SimplexPoint<T>,
    v: &TangentVector<T>,
    opts: DerivativeOptions<T>,
) -> Result<Vec<T>>
where
    T: Scalar,
    F: Fn(&SimplexPoint<T>) -> Result<Vec<T>>,
{
    let min = T::lit(MIN_STEP);
    let mut h = opts.step;
    let central = |h: T| -> Option<Result<Vec<T>>> {
        let plus = shifted(p, v.comps(), h)?;
        let minus = shifted(p, v.comps(), -h)?;
        Some((|| {
            let a = f(&plus)?;
            let b = f(&minus)?;
            let two_h = h + h;
            Ok(a.iter().zip(&b).map(|(&x, &y)| (x - y) / two_h).collect())
        })())
    };
    loop {
        if h < min {
            return Err(Error::StepUnderflow(h.as_f64()));
        }
        if let Some(d) = central(h) {
            let d = d?;
            if !opts.richardson {
                return Ok(d);
            }
            let half = central(h / T::lit(2.0)).expect("half step stays inside")?;
            let four = T::lit(4.0);
            let three = T::lit(3.0);
            return Ok(half.iter().zip(&d).map(|(&a, &b)| (four * a - b) / three).collect());
        }
        h = h / T::lit(2.0);
    }
}

/// `D_v W(p)` as a raw N-vector.
pub fn directional_derivative<T: Scalar, W: VectorField<T> + ?Sized>(
    w: &W,
    p: &SimplexPoint<T>,
    v: &TangentVector<T>,
    h: T,
) -> Result<Vec<T>> {
    directional_derivative_with(w, p, v, DerivativeOptions { step: h, richardson: false })
}

pub fn directional_derivative_with<T: Scalar, W: VectorField<T> + ?Sized>(
    w: &W,
    p: &SimplexPoint<T>,
    v: &TangentVector<T>,
    opts: DerivativeOptions<T>,
) -> Result<Vec<T>> {
    directional_derivative_of(|x| Ok(w.eval(x)?.comps().to_vec()), p, v, opts)
}

/// Amari–Čencov α-connection with `α = 1 - 2/q`:
/// `D_V W - (1/q*) ((V_n/p_n) W_n - (Σ_k V_k W_k / p_k) p_n)`, `q* = q/(q-1)`.
pub fn alpha_connection<T, V, W>(v: &V, w: &W, p: &SimplexPoint<T>, q: T) -> Result<TangentVector<T>>
where
    T: Scalar,
    V: VectorField<T> + ?Sized,
    W: VectorField<T> + ?Sized,
{
    check_exponent(q)?;
    let vp = v.eval(p)?;
    let wp = w.eval(p)?;
    let d = directional_derivative(w, p, &vp, T::lit(FIELD_STEP))?;
    let inv_dual = (q - T::one()) / q;
    let coupling: T = vp.comps().iter().zip(wp.comps()).zip(p.coords()).map(|((&a, &b), &x)| a * b / x).sum();
    let comps = d
        .iter()
        .zip(vp.comps().iter().zip(wp.comps()))
        .zip(p.coords())
        .map(|((&dn, (&vn, &wn)), &pn)| dn - inv_dual * (vn / pn * wn - coupling * pn))
        .collect();
    TangentVector::with_tolerance(p.clone(), comps, 1e-10)
}

/// Residual of the e-geodesic equation along `curve` at time `t`:
/// `p_n (d/dt(ṗ_n/p_n) - Σ_k p_k d/dt(ṗ_k/p_k))`, all derivatives by central
/// differences with step `h`. Near zero iff the curve is an e-geodesic.
pub fn e_connection_residual<T, C>(curve: C, t: T, h: T) -> Result<Vec<T>>
where
    T: Scalar,
    C: Fn(T) -> Result<SimplexPoint<T>>,
{
    let eval = |s: T| curve(s).map_err(|_| Error::CurveDomain(s.as_f64()));
    let two_h = h + h;
    let log_velocity = |s: T| -> Result<Vec<T>> {
        let a = eval(s + h)?;
        let b = eval(s - h)?;
        let mid = eval(s)?;
        Ok(a.coords().iter().zip(b.coords()).zip(mid.coords()).map(|((&x, &y), &p)| (x - y) / two_h / p).collect())
    };
    let fwd = log_velocity(t + h)?;
    let bwd = log_velocity(t - h)?;
    let p = eval(t)?;
    let accel: Vec<T> = fwd.iter().zip(&bwd).map(|(&a, &b)| (a - b) / two_h).collect();
    let mean = scalar::dot(p.coords(), &accel);
    Ok(p.coords().iter().zip(&accel).map(|(&pn, &an)| pn * (an - mean)).collect())
}

/// Softmax of `log p_n + a_n t` via log-sum-exp. Entries that underflow are
/// set to the smallest positive normal so the result stays in the open
/// simplex; the largest entry absorbs the rounding so the sum is one.
pub(crate) fn exp_tilt<T: Scalar>(p0: &SimplexPoint<T>, a: &[T], t: T) -> Result<SimplexPoint<T>> {
    if !t.is_finite() || a.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let at: Vec<T> = a.iter().map(|&an| an * t).collect();
    if at.iter().all(|&x| x == at[0]) {
        return Ok(p0.clone());
    }
    let s: Vec<T> = p0.coords().iter().zip(&at).map(|(&p, &x)| p.ln() + x).collect();
    let (imax, &smax) = s.iter().enumerate().fold((0, &s[0]), |best, (i, x)| if *x > *best.1 { (i, x) } else { best });
    let lse = smax + s.iter().map(|&x| (x - smax).exp()).sum::<T>().ln();
    let tiny = T::min_positive_value();
    let mut coords: Vec<T> = s.iter().map(|&x| (x - lse).exp().max(tiny)).collect();
    let rest: T = coords.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, &x)| x).sum();
    coords[imax] = T::one() - rest;
    SimplexPoint::new(coords)
}

/// Exponential-connection geodesic `p_n(t) ∝ p_n(0) e^{a_n t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EGeodesic<T> {
    p0: SimplexPoint<T>,
    a: Vec<T>,
    gauge: T,
}

impl<T: Scalar> EGeodesic<T> {
    pub fn from_exponents(p0: SimplexPoint<T>, a: Vec<T>) -> Result<Self> {
        if a.len() != p0.dim() {
            return Err(Error::LengthMismatch { expected: p0.dim(), got: a.len() });
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        Ok(Self { p0, a, gauge: T::zero() })
    }

    pub fn p0(&self) -> &SimplexPoint<T> {
        &self.p0
    }

    pub fn exponents(&self) -> &[T] {
        &self.a
    }

    pub fn gauge(&self) -> T {
        self.gauge
    }

    /// Adds `mu` to every exponent; the curve itself does not change.
    pub fn with_gauge_shift(&self, mu: T) -> Self {
        Self { p0: self.p0.clone(), a: self.a.iter().map(|&x| x + mu).collect(), gauge: self.gauge + mu }
    }

    pub fn eval(&self, t: T) -> Result<SimplexPoint<T>> {
        e_geodesic_eval(self, t)
    }
}

/// e-geodesic through `p0` with initial velocity `v0`: `a_n = v0_n / p0_n`,
/// gauge `λ = 0`.
pub fn make_e_geodesic<T: Scalar>(p0: &SimplexPoint<T>, v0: &TangentVector<T>) -> Result<EGeodesic<T>> {
    if v0.base() != p0 {
        return Err(Error::BaseMismatch);
    }
    p0.require_finite_support()?;
    let a = v0.comps().iter().zip(p0.coords()).map(|(&v, &p)| v / p).collect();
    EGeodesic::from_exponents(p0.clone(), a)
}

/// Evaluates the geodesic at any finite `t`.
pub fn e_geodesic_eval<T: Scalar>(g: &EGeodesic<T>, t: T) -> Result<SimplexPoint<T>> {
    exp_tilt(&g.p0, &g.a, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::make_tangent;
    use approx::assert_relative_eq;

    fn point(c: &[f64]) -> SimplexPoint<f64> {
        SimplexPoint::new(c.to_vec()).unwrap()
    }

    fn linear_field() -> FnField<f64> {
        FnField::new("linear", |p: &SimplexPoint<f64>| {
            let c = p.coords();
            TangentVector::new(p.clone(), vec![c[0] - c[1], c[1] - c[0]])
        })
    }

    #[test]
    fn derivative_of_constant_field_vanishes() {
        let p = point(&[0.3, 0.7]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        let w = FnField::constant(vec![0.4, -0.4]);
        for h in [1e-3, 1e-5] {
            let d = directional_derivative(&w, &p, &v, h).unwrap();
            assert!(d.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn derivative_of_linear_field() {
        let p = point(&[0.3, 0.7]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        let d = directional_derivative(&linear_field(), &p, &v, 1e-5).unwrap();
        assert_relative_eq!(d[0], 2.0, epsilon = 1e-9);
        assert_relative_eq!(d[1], -2.0, epsilon = 1e-9);
    }

    #[test]
    fn step_shrinks_then_underflows() {
        let p = point(&[1e-4, 1.0 - 1e-4]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        let d = directional_derivative(&linear_field(), &p, &v, 1e-3).unwrap();
        assert_relative_eq!(d[0], 2.0, epsilon = 1e-9);

        let p = point(&[1e-12, 1.0 - 1e-12]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        assert!(matches!(directional_derivative(&linear_field(), &p, &v, 1e-3), Err(Error::StepUnderflow(_))));
    }

    #[test]
    fn richardson_matches_plain_on_quadratic_field() {
        let field = FnField::new("quad", |p: &SimplexPoint<f64>| {
            let c = p.coords();
            TangentVector::new(p.clone(), vec![c[0] * c[0] - c[1] * c[1], c[1] * c[1] - c[0] * c[0]])
        });
        let p = point(&[0.3, 0.7]);
        let v = make_tangent(&p, &[0.5, -0.5]).unwrap();
        let r =
            directional_derivative_with(&field, &p, &v, DerivativeOptions { step: 1e-3, richardson: true }).unwrap();
        // d/ds (p0² - p1²) along (0.5, -0.5) = p0 + p1 = 1
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn alpha_connection_examples() {
        let v = FnField::constant(vec![1.0, -1.0]);
        let out = alpha_connection(&v, &v, &point(&[0.5, 0.5]), 2.0).unwrap();
        assert!(out.comps().iter().all(|c| c.abs() < 1e-15));

        let out = alpha_connection(&v, &v, &point(&[0.25, 0.75]), 2.0).unwrap();
        assert_relative_eq!(out.comps()[0], -4.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(out.comps()[1], 4.0 / 3.0, epsilon = 1e-13);

        let zero = FnField::constant(vec![0.0, 0.0]);
        let out = alpha_connection(&zero, &linear_field(), &point(&[0.25, 0.75]), 3.0).unwrap();
        assert!(out.comps().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn make_geodesic_examples() {
        let p = point(&[0.5, 0.5]);
        let g = make_e_geodesic(&p, &make_tangent(&p, &[0.5, -0.5]).unwrap()).unwrap();
        assert_eq!(g.exponents(), &[1.0, -1.0]);
        assert_eq!(g.gauge(), 0.0);
        let g0 = make_e_geodesic(&p, &TangentVector::zero(p.clone())).unwrap();
        assert_eq!(g0.exponents(), &[0.0, 0.0]);
        let other = point(&[0.25, 0.75]);
        let v = make_tangent(&other, &[1.0, -1.0]).unwrap();
        assert_eq!(make_e_geodesic(&p, &v), Err(Error::BaseMismatch));
    }

    #[test]
    fn gauge_shift_leaves_curve() {
        let p = point(&[0.2, 0.3, 0.5]);
        let g = make_e_geodesic(&p, &make_tangent(&p, &[0.1, 0.2, -0.3]).unwrap()).unwrap();
        let shifted = g.with_gauge_shift(5.0);
        for t in [-1.0, 0.3, 2.0] {
            let a = g.eval(t).unwrap();
            let b = shifted.eval(t).unwrap();
            for (x, y) in a.coords().iter().zip(b.coords()) {
                assert!((x - y).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn eval_examples() {
        let p = point(&[0.5, 0.5]);
        let g = EGeodesic::from_exponents(p.clone(), vec![1.0, -1.0]).unwrap();
        let q = g.eval(3f64.ln() / 2.0).unwrap();
        assert_relative_eq!(q.coords()[0], 0.75, epsilon = 1e-15);
        assert_relative_eq!(q.coords()[1], 0.25, epsilon = 1e-15);
        assert_eq!(g.eval(0.0).unwrap().coords(), p.coords());

        let far = g.eval(1e4).unwrap();
        assert_eq!(far.coords()[1], f64::MIN_POSITIVE);
        assert_eq!(far.sum(), 1.0);
        assert!(matches!(g.eval(f64::NAN), Err(Error::NonFiniteInput)));
    }

    #[test]
    fn residual_separates_geodesics() {
        let p = point(&[0.5, 0.5]);
        let g = EGeodesic::from_exponents(p.clone(), vec![1.0, -1.0]).unwrap();
        let r = e_connection_residual(|t| g.eval(t), 0.3, 1e-3).unwrap();
        assert!(r.iter().all(|x| x.abs() <= 1e-6));

        let end = point(&[0.9, 0.1]);
        let fr = |t: f64| crate::metrics::fr_geodesic(&p, &end, t);
        let r = e_connection_residual(fr, 0.5, 1e-3).unwrap();
        // independent evaluation gives ±0.19227
        assert_relative_eq!(r[0], 0.19227436, epsilon = 1e-5);
        assert!(r.iter().fold(0.0f64, |m, x| m.max(x.abs())) > 1e-2);

        let constant = |_t: f64| Ok(p.clone());
        assert!(e_connection_residual(constant, 0.0, 1e-3).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn residual_reports_curve_domain() {
        let curve = |t: f64| if t > 0.0 { Err(Error::NonFiniteInput) } else { SimplexPoint::uniform(2) };
        assert!(matches!(e_connection_residual(curve, 0.0, 1e-3), Err(Error::CurveDomain(_))));
    }
}
