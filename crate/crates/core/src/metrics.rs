//! Fisher–Rao inner product, the ℓq Finsler norm, and distances/geodesics
//! obtained by pulling back great circles through the square-root map.
//!
//! Conventions: `fr_inner(v, w) = (1/4) Σ v_n w_n / p_n`, so the square-root
//! map is an isometry onto the unit sphere and `fr_distance` is the
//! Bhattacharyya angle `arccos Σ √(p_n r_n)` (radius-one convention).

use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::sequence::{check_exponent, lq_norm, SimplexPoint, SpherePoint, SphereTangent, TangentVector};
use crate::transforms::RootTransform;

/// Fisher–Rao value together with its residual against the sphere pullback.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport<T> {
    pub value: T,
    pub residual_vs_pullback: T,
    pub at: SimplexPoint<T>,
}

/// `(1/4) Σ v_n w_n / p_n`.
pub fn fr_inner<T: Scalar>(v: &TangentVector<T>, w: &TangentVector<T>) -> Result<T> {
    if v.base() != w.base() {
        return Err(Error::BaseMismatch);
    }
    let s: T = v.comps().iter().zip(w.comps()).zip(v.base().coords()).map(|((&a, &b), &p)| a * b / p).sum();
    Ok(T::lit(0.25) * s)
}

/// `fr_inner(v, w)` with the isometry residual attached.
pub fn metric_report<T: Scalar>(v: &TangentVector<T>, w: &TangentVector<T>) -> Result<MetricReport<T>> {
    let value = fr_inner(v, w)?;
    let pulled = RootTransform::sqrt().pullback_inner(v, w)?;
    Ok(MetricReport { value, residual_vs_pullback: (value - pulled).abs(), at: v.base().clone() })
}

/// `(Σ |v_n/p_n|^q p_n)^{1/q}`.
///
/// Evaluated as the ℓq norm of `v_n p_n^{(1-q)/q}`, which is the same sum
/// without the overflow-prone quotient `v_n / p_n`.
pub fn finsler_norm<T: Scalar>(v: &TangentVector<T>, q: T) -> Result<T> {
    check_exponent(q)?;
    let e = (T::one() - q) / q;
    let weighted: Vec<T> = v.comps().iter().zip(v.base().coords()).map(|(&a, &p)| a * p.powf(e)).collect();
    lq_norm(&weighted, q)
}

/// Orthogonal projection onto the tangent space of the round sphere at `x`.
pub fn sphere_project<T: Scalar>(x: &SpherePoint<T>, raw: &[T]) -> Result<SphereTangent<T>> {
    if x.q() != T::lit(2.0) {
        return Err(Error::ExponentNotTwo(x.q().as_f64()));
    }
    if raw.len() != x.dim() {
        return Err(Error::LengthMismatch { expected: x.dim(), got: raw.len() });
    }
    let k = scalar::dot(raw, x.coords());
    let comps = raw.iter().zip(x.coords()).map(|(&r, &c)| r - k * c).collect();
    SphereTangent::with_tolerance(x.clone(), comps, 1e-10)
}

fn bhattacharyya<T: Scalar>(p: &SimplexPoint<T>, r: &SimplexPoint<T>) -> Result<T> {
    if p.dim() != r.dim() {
        return Err(Error::DimensionMismatch(p.dim(), r.dim()));
    }
    p.require_finite_support()?;
    r.require_finite_support()?;
    Ok(p.coords().iter().zip(r.coords()).map(|(&a, &b)| (a * b).sqrt()).sum())
}

/// Bhattacharyya angle `arccos Σ √(p_n r_n)`.
pub fn fr_distance<T: Scalar>(p: &SimplexPoint<T>, r: &SimplexPoint<T>) -> Result<T> {
    let bc = bhattacharyya(p, r)?;
    if bc >= T::one() - T::tol(1e-12) {
        return Ok(T::zero());
    }
    Ok(bc.max(-T::one()).acos())
}

/// Point at parameter `t ∈ [0, 1]` on the Fisher–Rao geodesic from `p` to
/// `r`: the great-circle arc between `√p` and `√r`, squared back.
pub fn fr_geodesic<T: Scalar>(p: &SimplexPoint<T>, r: &SimplexPoint<T>, t: T) -> Result<SimplexPoint<T>> {
    if !t.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let theta = fr_distance(p, r)?;
    if theta == T::zero() {
        return Err(Error::DegenerateEndpoints);
    }
    let s = theta.sin();
    let a = ((T::one() - t) * theta).sin() / s;
    let b = (t * theta).sin() / s;
    let sq: Vec<T> = p
        .coords()
        .iter()
        .zip(r.coords())
        .map(|(&x, &y)| {
            let z = a * x.sqrt() + b * y.sqrt();
            z * z
        })
        .collect();
    let total = scalar::sum(&sq);
    SimplexPoint::new(sq.into_iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::make_tangent;
    use approx::assert_relative_eq;

    fn point(c: &[f64]) -> SimplexPoint<f64> {
        SimplexPoint::new(c.to_vec()).unwrap()
    }

    #[test]
    fn fr_inner_examples() {
        let p = point(&[0.5, 0.5]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(fr_inner(&v, &v).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(fr_inner(&TangentVector::zero(p), &v).unwrap(), 0.0);
        let p = point(&[0.25, 0.75]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(fr_inner(&v, &v).unwrap(), 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn fr_inner_base_mismatch() {
        let v = make_tangent(&point(&[0.5, 0.5]), &[1.0, -1.0]).unwrap();
        let w = make_tangent(&point(&[0.25, 0.75]), &[1.0, -1.0]).unwrap();
        assert_eq!(fr_inner(&v, &w), Err(Error::BaseMismatch));
    }

    #[test]
    fn finsler_examples() {
        let p = point(&[0.5, 0.5]);
        let v = make_tangent(&p, &[1.0, -1.0]).unwrap();
        assert_relative_eq!(finsler_norm(&v, 2.0).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(finsler_norm(&v, 3.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_eq!(finsler_norm(&TangentVector::zero(p), 1.7).unwrap(), 0.0);
        assert_eq!(finsler_norm(&v, 0.5), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn sphere_project_examples() {
        let x = SpherePoint::new(vec![1.0, 0.0], 2.0).unwrap();
        assert_eq!(sphere_project(&x, &[0.0, 1.0]).unwrap().comps(), &[0.0, 1.0]);
        let h = 0.5f64.sqrt();
        let x = SpherePoint::new(vec![h, h], 2.0).unwrap();
        let p = sphere_project(&x, &[h, h]).unwrap();
        assert!(p.comps().iter().all(|c| c.abs() < 1e-15));
        let p = sphere_project(&x, &[1.0, 0.0]).unwrap();
        assert_relative_eq!(p.comps()[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(p.comps()[1], -0.5, epsilon = 1e-15);
        let x3 = SpherePoint::new(vec![1.0, 0.0], 3.0).unwrap();
        assert_eq!(sphere_project(&x3, &[0.0, 1.0]).unwrap_err(), Error::ExponentNotTwo(3.0));
        assert!(matches!(sphere_project(&x, &[1.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn distance_examples() {
        let p = point(&[0.5, 0.5]);
        let r = point(&[0.9, 0.1]);
        assert_eq!(fr_distance(&p, &p).unwrap(), 0.0);
        assert_relative_eq!(fr_distance(&p, &r).unwrap(), 0.46364760900080615, epsilon = 1e-14);
        assert_relative_eq!(fr_distance(&r, &p).unwrap(), fr_distance(&p, &r).unwrap());
        let s = point(&[0.2, 0.3, 0.5]);
        assert_eq!(fr_distance(&p, &s), Err(Error::DimensionMismatch(2, 3)));
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let p = point(&[0.5, 0.5]);
        let r = point(&[0.9, 0.1]);
        let g0 = fr_geodesic(&p, &r, 0.0).unwrap();
        let g1 = fr_geodesic(&p, &r, 1.0).unwrap();
        for i in 0..2 {
            assert_relative_eq!(g0.coords()[i], p.coords()[i], epsilon = 1e-12);
            assert_relative_eq!(g1.coords()[i], r.coords()[i], epsilon = 1e-12);
        }
        let mid = fr_geodesic(&p, &r, 0.5).unwrap();
        assert_relative_eq!(mid.sum(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(fr_distance(&p, &mid).unwrap(), 0.5 * fr_distance(&p, &r).unwrap(), epsilon = 1e-12);
        assert_eq!(fr_geodesic(&p, &p, 0.5), Err(Error::DegenerateEndpoints));
    }

    #[test]
    fn report_residual_is_tiny() {
        let p = point(&[0.1, 0.2, 0.7]);
        let v = make_tangent(&p, &[0.3, -0.1, 0.2]).unwrap();
        let rep = metric_report(&v, &v).unwrap();
        assert!(rep.residual_vs_pullback <= 1e-15);
    }
}
