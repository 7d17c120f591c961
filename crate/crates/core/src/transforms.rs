//! The q-root transform `p ↦ p^{1/q}` and its differential.
//!
//! For `q = 2` this is the square-root map, which carries the Fisher–Rao
//! metric onto the round metric of the unit sphere exactly. For general `q`
//! the differential satisfies `‖dΦ_q v‖_{ℓq} = (1/q) F^q(v)`, where `F^q` is
//! [`finsler_norm`](crate::metrics::finsler_norm); the factor `1/q` is part of
//! the identity, not a rounding artifact.

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::sequence::{check_exponent, SimplexPoint, SpherePoint, SphereTangent, TangentVector};

/// Tolerance for the tangency of pushed-forward vectors.
const PUSHFORWARD_TANGENCY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootTransform<T> {
    q: T,
}

impl<T: Scalar> RootTransform<T> {
    pub fn new(q: T) -> Result<Self> {
        check_exponent(q)?;
        Ok(Self { q })
    }

    /// The square-root map.
    pub fn sqrt() -> Self {
        Self { q: T::lit(2.0) }
    }

    pub fn q(&self) -> T {
        self.q
    }

    fn is_square_root(&self) -> bool {
        self.q == T::lit(2.0)
    }

    /// `x_n = p_n^{1/q}`.
    pub fn forward(&self, p: &SimplexPoint<T>) -> Result<SpherePoint<T>> {
        let retained = p.sum();
        if retained < T::lit(0.5) {
            return Err(Error::TailTooLarge(retained.as_f64()));
        }
        let inv = self.q.recip();
        let coords = p.coords().iter().map(|&x| self.root(x, inv)).collect();
        SpherePoint::with_tail(coords, self.q, p.tail_bound())
    }

    fn root(&self, x: T, inv: T) -> T {
        if self.is_square_root() {
            x.sqrt()
        } else {
            x.powf(inv)
        }
    }

    /// `p_n = x_n^q`.
    pub fn inverse(&self, x: &SpherePoint<T>) -> Result<SimplexPoint<T>> {
        if x.q() != self.q {
            return Err(Error::InvalidExponent(x.q().as_f64()));
        }
        if !x.is_positive() {
            return Err(Error::NotPositive);
        }
        let coords = x.coords().iter().map(|&c| if self.is_square_root() { c * c } else { c.powf(self.q) }).collect();
        SimplexPoint::with_tail(coords, x.tail_bound())
    }

    /// Analytic differential: `(1/q) v_n p_n^{1/q - 1}` at `forward(p)`.
    pub fn pushforward(&self, v: &TangentVector<T>) -> Result<SphereTangent<T>> {
        let base = self.forward(v.base())?;
        let inv = self.q.recip();
        let comps = v
            .comps()
            .iter()
            .zip(v.base().coords())
            .zip(base.coords())
            .map(|((&vn, &pn), &xn)| inv * vn * xn / pn)
            .collect();
        SphereTangent::with_tolerance(base, comps, PUSHFORWARD_TANGENCY_TOL)
    }

    /// Ambient ℓ² inner product of the pushed-forward vectors (`q = 2` only).
    pub fn pullback_inner(&self, v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
        if !self.is_square_root() {
            return Err(Error::ExponentNotTwo(self.q.as_f64()));
        }
        if v.base() != w.base() {
            return Err(Error::BaseMismatch);
        }
        let dv = self.pushforward(v)?;
        let dw = self.pushforward(w)?;
        Ok(scalar::dot(dv.comps(), dw.comps()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::make_tangent;
    use approx::assert_relative_eq;

    fn point(c: &[f64]) -> SimplexPoint<f64> {
        SimplexPoint::new(c.to_vec()).unwrap()
    }

    fn tangent(p: &SimplexPoint<f64>, v: &[f64]) -> TangentVector<f64> {
        make_tangent(p, v).unwrap()
    }

    #[test]
    fn forward_examples() {
        let h = 0.5f64.sqrt();
        let x = RootTransform::sqrt().forward(&point(&[0.5, 0.5])).unwrap();
        assert_relative_eq!(x.coords()[0], h, epsilon = 1e-16);
        assert_relative_eq!(x.coords()[1], h, epsilon = 1e-16);

        let x = RootTransform::new(3.0).unwrap().forward(&point(&[0.125, 0.875])).unwrap();
        assert_relative_eq!(x.coords()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(x.coords()[1], 0.9564655913861946, epsilon = 1e-15);

        let x = RootTransform::sqrt().forward(&point(&[4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0])).unwrap();
        for (a, e) in x.coords().iter().zip([0.7559289460184544, 0.5345224838248488, 0.3779644730092272]) {
            assert_relative_eq!(*a, e, epsilon = 1e-15);
        }
    }

    #[test]
    fn inverse_examples() {
        let t = RootTransform::sqrt();
        let h = 0.5f64.sqrt();
        let p = t.inverse(&SpherePoint::new(vec![h, h], 2.0).unwrap()).unwrap();
        assert_relative_eq!(p.coords()[0], 0.5, epsilon = 1e-15);

        let t3 = RootTransform::new(3.0).unwrap();
        let x = SpherePoint::new(vec![0.5, 0.875f64.cbrt()], 3.0).unwrap();
        let p = t3.inverse(&x).unwrap();
        assert_relative_eq!(p.coords()[0], 0.125, epsilon = 1e-15);
        assert_relative_eq!(p.coords()[1], 0.875, epsilon = 1e-15);

        let x = SpherePoint::new(vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(t.inverse(&x), Err(Error::NotPositive));
    }

    #[test]
    fn pushforward_examples() {
        let p = point(&[0.5, 0.5]);
        let d = RootTransform::sqrt().pushforward(&tangent(&p, &[1.0, -1.0])).unwrap();
        let e = 1.0 / 2f64.sqrt();
        assert_relative_eq!(d.comps()[0], e, epsilon = 1e-15);
        assert_relative_eq!(d.comps()[1], -e, epsilon = 1e-15);

        let d = RootTransform::sqrt().pushforward(&TangentVector::zero(p)).unwrap();
        assert!(d.comps().iter().all(|&c| c == 0.0));

        let p = point(&[0.125, 0.875]);
        let d = RootTransform::new(3.0).unwrap().pushforward(&tangent(&p, &[1.0, -1.0])).unwrap();
        assert_relative_eq!(d.comps()[0], 4.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(d.comps()[1], -0.36436784433759795, epsilon = 1e-14);
    }

    #[test]
    fn pullback_examples() {
        let t = RootTransform::sqrt();
        let p = point(&[0.5, 0.5]);
        let v = tangent(&p, &[1.0, -1.0]);
        assert_relative_eq!(t.pullback_inner(&v, &v).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(t.pullback_inner(&TangentVector::zero(p.clone()), &v).unwrap(), 0.0);

        let p = point(&[0.25, 0.75]);
        let v = tangent(&p, &[1.0, -1.0]);
        assert_relative_eq!(t.pullback_inner(&v, &v).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn pullback_errors() {
        let p = point(&[0.25, 0.75]);
        let r = point(&[0.5, 0.5]);
        let v = tangent(&p, &[1.0, -1.0]);
        let w = tangent(&r, &[1.0, -1.0]);
        assert_eq!(RootTransform::sqrt().pullback_inner(&v, &w), Err(Error::BaseMismatch));
        assert_eq!(RootTransform::new(3.0).unwrap().pullback_inner(&v, &v), Err(Error::ExponentNotTwo(3.0)));
    }

    #[test]
    fn invalid_exponent() {
        assert_eq!(RootTransform::new(1.0), Err(Error::InvalidExponent(1.0)));
    }

    #[test]
    fn heavy_tail_rejected() {
        let p = SimplexPoint::with_tail(vec![0.2, 0.2], 0.6).unwrap();
        assert!(matches!(RootTransform::sqrt().forward(&p), Err(Error::TailTooLarge(_))));
    }
}
