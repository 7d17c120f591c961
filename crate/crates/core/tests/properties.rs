use proptest::prelude::*;
use simplexgeo::connections::FnField;
use simplexgeo::metrics::sphere_project;
use simplexgeo::sequence::{lq_norm, make_tangent, refine, Normalization, SequenceSpec};
use simplexgeo::{
    alpha_connection, finsler_norm, flow_closed_form, fr_inner, make_e_geodesic, objective_value, LinearObjective,
    RootTransform, SimplexPoint, TangentVector,
};

fn simplex(max_dim: usize) -> impl Strategy<Value = SimplexPoint<f64>> {
    prop::collection::vec(-2.0f64..2.0, 2..=max_dim).prop_map(|logs| {
        let raw: Vec<f64> = logs.iter().map(|x| x.exp()).collect();
        let s: f64 = raw.iter().sum();
        SimplexPoint::new(raw.iter().map(|x| x / s).collect()).unwrap()
    })
}

fn point_and_raw(max_dim: usize) -> impl Strategy<Value = (SimplexPoint<f64>, Vec<f64>, Vec<f64>)> {
    simplex(max_dim).prop_flat_map(|p| {
        let n = p.dim();
        (Just(p), prop::collection::vec(-1.0f64..1.0, n), prop::collection::vec(-1.0f64..1.0, n))
    })
}

fn l2_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn constructed_points_are_interior(p in simplex(64)) {
        prop_assert!((p.sum() - 1.0).abs() <= 1e-12);
        prop_assert!(p.coords().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn make_tangent_idempotent((p, raw, _) in point_and_raw(64)) {
        let once = make_tangent(&p, &raw).unwrap();
        let twice = make_tangent(&p, once.comps()).unwrap();
        prop_assert_eq!(once.comps(), twice.comps());
    }

    #[test]
    fn lq_norm_is_a_norm(
        v in prop::collection::vec(-10.0f64..10.0, 1..64),
        w_seed in prop::collection::vec(-10.0f64..10.0, 64),
        a in -5.0f64..5.0,
        q in 1.01f64..6.0,
    ) {
        let w = &w_seed[..v.len()];
        let sum: Vec<f64> = v.iter().zip(w).map(|(x, y)| x + y).collect();
        let (nv, nw) = (lq_norm(&v, q).unwrap(), lq_norm(w, q).unwrap());
        prop_assert!(lq_norm(&sum, q).unwrap() <= (nv + nw) * (1.0 + 1e-12));
        let scaled: Vec<f64> = v.iter().map(|x| a * x).collect();
        let ns = lq_norm(&scaled, q).unwrap();
        prop_assert!((ns - a.abs() * nv).abs() <= 1e-12 * (1.0 + ns));
    }

    #[test]
    fn root_transform_round_trip(p in simplex(64), qi in 0usize..4) {
        let q = [1.5, 2.0, 3.0, 4.0][qi];
        let t = RootTransform::new(q).unwrap();
        let back = t.inverse(&t.forward(&p).unwrap()).unwrap();
        for (a, b) in back.coords().iter().zip(p.coords()) {
            prop_assert!((a - b).abs() <= 1e-14, "{} vs {}", a, b);
        }
    }

    #[test]
    fn isometry_and_scaled_isometry((p, rv, rw) in point_and_raw(32), qi in 0usize..4) {
        let v = make_tangent(&p, &rv).unwrap();
        let w = make_tangent(&p, &rw).unwrap();
        let g = fr_inner(&v, &w).unwrap();
        let pb = RootTransform::sqrt().pullback_inner(&v, &w).unwrap();
        prop_assert!((g - pb).abs() <= 1e-12 * g.abs().max(1.0));

        let q = [1.5, 2.0, 3.0, 4.0][qi];
        let lhs = lq_norm(RootTransform::new(q).unwrap().pushforward(&v).unwrap().comps(), q).unwrap();
        let f = finsler_norm(&v, q).unwrap();
        prop_assert!((lhs - f / q).abs() <= 1e-10 * (f / q));

        let f2 = finsler_norm(&v, 2.0).unwrap();
        prop_assert!((f2 - 2.0 * fr_inner(&v, &v).unwrap().sqrt()).abs() <= 1e-12 * f2.max(1.0));
    }

    #[test]
    fn pushforward_linear((p, rv, rw) in point_and_raw(32), a in -3.0f64..3.0, b in -3.0f64..3.0, qi in 0usize..4) {
        let t = RootTransform::new([1.5, 2.0, 3.0, 4.0][qi]).unwrap();
        let v = make_tangent(&p, &rv).unwrap();
        let w = make_tangent(&p, &rw).unwrap();
        let lhs = t.pushforward(&v.combine(a, &w, b).unwrap()).unwrap();
        let (dv, dw) = (t.pushforward(&v).unwrap(), t.pushforward(&w).unwrap());
        for ((l, x), y) in lhs.comps().iter().zip(dv.comps()).zip(dw.comps()) {
            prop_assert!((l - (a * x + b * y)).abs() <= 1e-12 * (1.0 + l.abs()));
        }
    }

    #[test]
    fn sphere_projection_idempotent_self_adjoint((p, ru, rv) in point_and_raw(32)) {
        let x = RootTransform::sqrt().forward(&p).unwrap();
        let pu = sphere_project(&x, &ru).unwrap();
        let ppu = sphere_project(&x, pu.comps()).unwrap();
        for (a, b) in pu.comps().iter().zip(ppu.comps()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let pv = sphere_project(&x, &rv).unwrap();
        prop_assert!((l2_dot(pu.comps(), &rv) - l2_dot(&ru, pv.comps())).abs() <= 1e-12);
    }

    #[test]
    fn alpha_connection_is_tangent((p, rv, rw) in point_and_raw(16), q in 1.2f64..5.0, k in 0usize..16) {
        let v = FnField::constant(make_tangent(&p, &rv).unwrap().comps().to_vec());
        let w0 = make_tangent(&p, &rw).unwrap().comps().to_vec();
        let j = k % p.dim();
        // coordinate polynomial field p_j^2 * w0, projected
        let w = FnField::new("poly", move |x: &SimplexPoint<f64>| {
            let s = x.coords()[j] * x.coords()[j];
            let raw: Vec<f64> = w0.iter().map(|c| c * s).collect();
            make_tangent(x, &raw)
        });
        let d = alpha_connection(&v, &w, &p, q).unwrap();
        let sum: f64 = d.comps().iter().sum();
        prop_assert!(sum.abs() <= 1e-10);
    }

    #[test]
    fn e_geodesic_gauge_invariance((p, rv, _) in point_and_raw(32), t in -20.0f64..20.0) {
        let g = make_e_geodesic(&p, &make_tangent(&p, &rv).unwrap()).unwrap();
        let base = g.eval(t).unwrap();
        for mu in [-3.0, 5.0] {
            let shifted = g.with_gauge_shift(mu).eval(t).unwrap();
            for (a, b) in base.coords().iter().zip(shifted.coords()) {
                prop_assert!((a - b).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn e_geodesic_far_times_stay_in_simplex((p, rv, _) in point_and_raw(32), sign in prop::bool::ANY) {
        let g = make_e_geodesic(&p, &make_tangent(&p, &rv).unwrap()).unwrap();
        let t = if sign { 1e4 } else { -1e4 };
        let x = g.eval(t).unwrap();
        prop_assert!(x.coords().iter().all(|&c| c > 0.0));
        prop_assert!((x.sum() - 1.0).abs() <= x.dim() as f64 * f64::EPSILON);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn flow_objective_nondecreasing(p in simplex(32), seed in prop::collection::vec(-1.0f64..1.0, 32)) {
        let obj = LinearObjective::new(seed[..p.dim()].to_vec()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..1000 {
            let f = objective_value(&obj, &flow_closed_form(&obj, &p, i as f64 * 0.01).unwrap()).unwrap();
            prop_assert!(f >= prev - 1e-15, "step {}: {} < {}", i, f, prev);
            prev = f;
        }
    }
}

#[test]
fn refine_cauchy_differences_decrease() {
    for r in [0.3, 0.5, 0.9] {
        let spec = SequenceSpec::geometric(r, 2, Normalization::None);
        let dims: Vec<usize> = (2..40).collect();
        let pts = refine::<f64>(&spec, &dims).unwrap();
        let mut prev = f64::INFINITY;
        for pair in pts.windows(2) {
            let a = pair[0].renormalized().unwrap().padded(pair[1].dim());
            let b = pair[1].renormalized().unwrap();
            let diff: Vec<f64> = a.iter().zip(b.coords()).map(|(x, y)| x - y).collect();
            let d = lq_norm(&diff, 2.0).unwrap();
            assert!(d < prev, "r={r}: {d} !< {prev}");
            prev = d;
        }
    }
}

#[test]
fn leibniz_rule_for_alpha_connection() {
    let p = SimplexPoint::new(vec![0.3, 0.5, 0.2]).unwrap();
    let v: TangentVector<f64> = make_tangent(&p, &[0.4, -0.1, -0.3]).unwrap();
    let w0 = vec![0.2, 0.3, -0.5];
    let v_field = FnField::constant(v.comps().to_vec());
    let w_field = FnField::constant(w0.clone());
    let fw0 = w0.clone();
    let fw = FnField::new("p0*W", move |x: &SimplexPoint<f64>| {
        TangentVector::new(x.clone(), fw0.iter().map(|c| c * x.coords()[0]).collect())
    });
    for q in [1.5, 2.0, 3.0, 4.0] {
        let lhs = alpha_connection(&v_field, &fw, &p, q).unwrap();
        let nabla_w = alpha_connection(&v_field, &w_field, &p, q).unwrap();
        let df = v.comps()[0];
        let f = p.coords()[0];
        for ((l, w), nw) in lhs.comps().iter().zip(&w0).zip(nabla_w.comps()) {
            assert!((l - (df * w + f * nw)).abs() <= 2e-6, "q={q}");
        }
    }
}
