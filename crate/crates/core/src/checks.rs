//! Property suites that turn the geometric identities into pass/fail checks.
//!
//! Each `check_*` function runs one seeded property at its pinned tolerance
//! and returns a [`CheckOutcome`] carrying the worst observed value. The CLI
//! `check-all` command and the acceptance tests both run these.

use serde::Serialize;

use crate::connections::{e_connection_residual, make_e_geodesic, CURVE_STEP};
use crate::error::Result;
use crate::flows::{
    default_correspondence_grid, flow_closed_form, flow_geodesic_correspondence, flow_ode_residual, integrate_flow_rk4,
    objective_value, solve_lp, vertex_gap, LinearObjective,
};
use crate::hamiltonian::{
    hamiltonian_flow, momentum_torus, poisson_bracket, poisson_bracket_with, random_complex_point, ComplexPoint,
    DerivativeMode, ProjectivePoint, QuadraticHamiltonian, ScalarField,
};
use crate::metrics::{finsler_norm, fr_distance, fr_geodesic, fr_inner};
use crate::random;
use crate::sequence::{lq_norm, make_tangent, refine, Normalization, SequenceSpec, SimplexPoint};
use crate::transforms::RootTransform;

/// Outcome of a single property suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity (ratio to its bound for
    /// checks whose bound varies per instance).
    pub worst: f64,
    pub threshold: f64,
    pub detail: String,
}

impl CheckOutcome {
    fn new(id: u32, name: &'static str, worst: f64, threshold: f64, extra_ok: bool, detail: String) -> Self {
        Self { id, name, passed: extra_ok && worst <= threshold, worst, threshold, detail }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} worst={:.3e} threshold={:.1e} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.worst,
            self.threshold,
            self.detail
        )
    }
}

/// Dimensions and seed for a suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub dims: Vec<usize>,
    pub seed: u64,
}

impl CheckConfig {
    /// The configuration of the acceptance criteria.
    pub fn acceptance(seed: u64) -> Self {
        Self { dims: vec![2, 8, 32], seed }
    }

    /// Dimensions `{2, dim/2, dim}` (deduplicated) for a CLI run.
    pub fn for_dim(dim: usize, seed: u64) -> Self {
        let mut dims = vec![2, (dim / 2).max(2), dim.max(2)];
        dims.dedup();
        Self { dims, seed }
    }

    fn max_dim(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(2)
    }
}

pub const ISOMETRY_TOL: f64 = 1e-12;
pub const QROOT_TOL: f64 = 1e-10;
pub const FLOW_RESIDUAL_TOL: f64 = 1e-6;
pub const FLOW_RESIDUAL_STEP: f64 = 1e-4;
pub const RK4_TOL: f64 = 1e-6;
pub const LP_TOL: f64 = 1e-8;
pub const RATE_REL_TOL: f64 = 0.05;
pub const EGEO_RESIDUAL_TOL: f64 = 1e-6;
pub const CORRESPONDENCE_TOL: f64 = 1e-12;
pub const BRACKET_NUMERIC_TOL: f64 = 1e-8;
pub const CONSERVATION_TOL: f64 = 1e-10;
pub const CANONICAL_PAIR_TOL: f64 = 1e-10;
pub const MOMENTUM_SUM_TOL: f64 = 1e-12;
pub const MOMENTUM_LIFT_TOL: f64 = 1e-14;
pub const GEODESIC_LENGTH_TOL: f64 = 1e-4;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// |fr_inner − pullback_inner| ≤ 1e-12·max(1, |fr_inner|), 200 trials per N.
pub fn check_isometry(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let sqrt = RootTransform::<f64>::sqrt();
    let mut worst = 0.0f64;
    let mut count = 0;
    for &n in &cfg.dims {
        let mut rng = random::seeded(cfg.seed ^ 0x1001 ^ n as u64);
        for _ in 0..200 {
            let p = random::simplex_point::<f64>(n, &mut rng)?;
            let v = random::tangent(&p, &mut rng)?;
            let w = random::tangent(&p, &mut rng)?;
            let g = fr_inner(&v, &w)?;
            worst = worst.max(rel(sqrt.pullback_inner(&v, &w)?, g));
            count += 1;
        }
    }
    Ok(CheckOutcome::new(1, "isometry", worst, ISOMETRY_TOL, true, format!("{count} trials, N in {:?}", cfg.dims)))
}

/// ‖dΦ_q v‖_q = F^q(v)/q (relative 1e-10) for q ∈ {1.5, 2, 3, 4}, plus
/// F^2 = 2√fr_inner at q = 2.
pub fn check_qroot(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut worst = 0.0f64;
    let mut worst_q2 = 0.0f64;
    for &q in &[1.5, 2.0, 3.0, 4.0] {
        let t = RootTransform::new(q)?;
        for &n in &cfg.dims {
            let mut rng = random::seeded(cfg.seed ^ 0x2002 ^ (n as u64) << 8 ^ (q * 10.0) as u64);
            for _ in 0..100 {
                let p = random::simplex_point::<f64>(n, &mut rng)?;
                let v = random::tangent(&p, &mut rng)?;
                let lhs = lq_norm(t.pushforward(&v)?.comps(), q)?;
                let f = finsler_norm(&v, q)?;
                worst = worst.max((lhs - f / q).abs() / (f / q).max(f64::MIN_POSITIVE));
                if q == 2.0 {
                    let g = fr_inner(&v, &v)?;
                    worst_q2 = worst_q2.max(rel(f, 2.0 * g.sqrt()));
                }
            }
        }
    }
    let ok = worst_q2 <= ISOMETRY_TOL;
    Ok(CheckOutcome::new(
        2,
        "q-root identity",
        worst,
        QROOT_TOL,
        ok,
        format!("finsler vs 2*sqrt(fr) worst {worst_q2:.3e}"),
    ))
}

/// Closed-form flow solves ṗ = W (ℓ¹ 1e-6 at h = 1e-4) and RK4 at t = 2,
/// dt = 1e-3 matches it (ℓ¹ 1e-6).
pub fn check_gradient_flow(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = random::seeded(cfg.seed ^ 0x3003);
    let mut worst_ode = 0.0f64;
    for &n in &cfg.dims {
        for _ in 0..20 {
            let obj = LinearObjective::new(random::coefficients::<f64>(n, -1.0, 1.0, &mut rng))?;
            let p0 = random::simplex_point::<f64>(n, &mut rng)?;
            let t = rand::Rng::gen_range(&mut rng, 0.0..3.0);
            worst_ode = worst_ode.max(flow_ode_residual(&obj, &p0, t, FLOW_RESIDUAL_STEP)?);
        }
    }
    let mut worst_rk4 = 0.0f64;
    let mut cases = vec![(LinearObjective::new(vec![1.0, 0.0])?, SimplexPoint::new(vec![0.5, 0.5])?)];
    for _ in 0..3 {
        let n = cfg.max_dim().min(16);
        cases.push((
            LinearObjective::new(random::coefficients(n, -1.0, 1.0, &mut rng))?,
            random::simplex_point(n, &mut rng)?,
        ));
    }
    for (obj, p0) in &cases {
        let traj = integrate_flow_rk4(obj, p0, 2.0, 1e-3)?;
        let exact = flow_closed_form(obj, p0, 2.0)?;
        let end = traj.last().expect("nonempty trajectory");
        let err: f64 = end.coords().iter().zip(exact.coords()).map(|(a, b): (&f64, &f64)| (a - b).abs()).sum();
        worst_rk4 = worst_rk4.max(err);
    }
    let ok = worst_rk4 <= RK4_TOL;
    Ok(CheckOutcome::new(
        3,
        "gradient flow",
        worst_ode,
        FLOW_RESIDUAL_TOL,
        ok,
        format!("rk4 endpoint worst {worst_rk4:.3e}"),
    ))
}

/// solve_lp reaches ‖p − e_0‖₁ ≤ 1e-8 with decay rate c_0 − c_1 (5%).
pub fn check_lp_convergence(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut objectives = vec![vec![3.0, 2.0, 1.0]];
    for &r in &[0.3, 0.5, 0.9] {
        objectives.push(SequenceSpec::geometric(r, cfg.max_dim().clamp(2, 16), Normalization::None).raw_values()?);
    }
    let mut rng = random::seeded(cfg.seed ^ 0x4004);
    for _ in 0..5 {
        objectives.push(random::decreasing_coefficients(cfg.max_dim().clamp(2, 8), 0.1, &mut rng));
    }
    let mut worst_rate = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut all_converged = true;
    for c in objectives {
        let obj = LinearObjective::new(c)?;
        let p0 = SimplexPoint::uniform(obj.dim())?;
        let (p, rep) = solve_lp(&obj, &p0, LP_TOL)?;
        all_converged &= rep.converged && vertex_gap(&p) <= LP_TOL;
        worst_gap = worst_gap.max(rep.gap_l1);
        let (m, e) = (rep.measured_rate.unwrap_or(f64::NAN), rep.expected_rate.unwrap_or(f64::NAN));
        let r = (m - e).abs() / e;
        worst_rate = if r.is_nan() { f64::INFINITY } else { worst_rate.max(r) };
    }
    Ok(CheckOutcome::new(
        4,
        "lp convergence",
        worst_rate,
        RATE_REL_TOL,
        all_converged,
        format!("worst gap {worst_gap:.3e} (tol {LP_TOL:.0e})"),
    ))
}

/// e-geodesic residual ≤ 1e-6 (h = 1e-3) on 50 random instances; evaluation
/// at |t| = 1e4 stays in the simplex with unit sum.
pub fn check_e_geodesics(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = random::seeded(cfg.seed ^ 0x5005);
    let max_n = cfg.max_dim().max(2);
    let mut worst = 0.0f64;
    let mut far_ok = true;
    let mut worst_sum = 0.0f64;
    for _ in 0..50 {
        let n = rand::Rng::gen_range(&mut rng, 2..=max_n);
        let p0 = random::simplex_point::<f64>(n, &mut rng)?;
        let v0 = random::log_rate_tangent(&p0, 1.0, &mut rng)?;
        let g = make_e_geodesic(&p0, &v0)?;
        let t = rand::Rng::gen_range(&mut rng, -1.0..1.0);
        let r = e_connection_residual(|s| g.eval(s), t, CURVE_STEP)?;
        worst = worst.max(r.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        for far in [1e4, -1e4] {
            let p = g.eval(far)?;
            far_ok &= p.coords().iter().all(|&x| x > 0.0);
            worst_sum = worst_sum.max((p.sum() - 1.0).abs());
        }
    }
    let sum_tol = unit_sum_tol(max_n);
    let ok = far_ok && worst_sum <= sum_tol;
    Ok(CheckOutcome::new(5, "e-geodesics", worst, EGEO_RESIDUAL_TOL, ok, format!("|t|=1e4 sum error {worst_sum:.1e}")))
}

/// Rounding allowance for a recomputed unit sum of `n` terms.
pub fn unit_sum_tol(n: usize) -> f64 {
    n as f64 * f64::EPSILON
}

/// Gradient flow and its e-geodesic agree to 1e-12 (ℓ¹) on {0, 0.5, 1, 5}.
pub fn check_flow_geodesic(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = random::seeded(cfg.seed ^ 0x6006);
    let grid = default_correspondence_grid::<f64>();
    let max_n = cfg.max_dim().max(2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rand::Rng::gen_range(&mut rng, 2..=max_n);
        let obj = LinearObjective::new(random::coefficients::<f64>(n, -1.0, 1.0, &mut rng))?;
        let p0 = random::simplex_point(n, &mut rng)?;
        worst = worst.max(flow_geodesic_correspondence(&obj, &p0, &grid)?);
    }
    Ok(CheckOutcome::new(6, "flow <-> e-geodesic", worst, CORRESPONDENCE_TOL, true, "50 random (c, p0)".into()))
}

/// Poisson-commuting first integrals at N = 16 (or the configured maximum).
pub fn check_integrability(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let n = if cfg.dims.contains(&32) { 16 } else { cfg.max_dim().max(2) };
    let mut rng = random::seeded(cfg.seed ^ 0x7007);
    let c: Vec<f64> = random::coefficients(n, -2.0, 2.0, &mut rng);
    let total = ScalarField::Quadratic(QuadraticHamiltonian::new(c.clone())?);
    let parts: Vec<_> = (0..n).map(|k| ScalarField::Quadratic(QuadraticHamiltonian::component(&c, k))).collect();
    let z = random_complex_point::<f64>(n, &mut rng);
    let mut analytic = 0.0f64;
    let mut numeric = 0.0f64;
    let mut pairs: Vec<(&ScalarField<f64>, &ScalarField<f64>)> = Vec::new();
    for k in 0..n {
        for m in (k + 1)..n {
            pairs.push((&parts[k], &parts[m]));
        }
        pairs.push((&total, &parts[k]));
    }
    for (f, g) in pairs {
        analytic = analytic.max(poisson_bracket(f, g, z.coords())?.abs());
        numeric = numeric.max(poisson_bracket_with(f, g, z.coords(), DerivativeMode::Numeric)?.abs());
    }
    let h = QuadraticHamiltonian::new(c.clone())?;
    let mut drift = 0.0f64;
    for i in 0..=100 {
        let zt = hamiltonian_flow(&h, &z, 0.1 * i as f64)?;
        for f in parts.iter().chain(std::iter::once(&total)) {
            drift = drift.max((f.eval(zt.coords()) - f.eval(z.coords())).abs());
        }
    }
    let pair = poisson_bracket(&ScalarField::RealPart(0), &ScalarField::ImagPart(0), z.coords())?;
    let pair_num = poisson_bracket_with(
        &ScalarField::RealPart(0),
        &ScalarField::ImagPart(0),
        z.coords(),
        DerivativeMode::Numeric,
    )?;
    let pair_err = (pair - 1.0).abs().max((pair_num - 1.0).abs());
    let ok = analytic == 0.0 && drift <= CONSERVATION_TOL && pair_err <= CANONICAL_PAIR_TOL;
    Ok(CheckOutcome::new(
        7,
        "integrability",
        numeric,
        BRACKET_NUMERIC_TOL,
        ok,
        format!("N={n} analytic={analytic:.1e} drift={drift:.1e} canonical-pair err={pair_err:.1e}"),
    ))
}

/// Doubled torus momentum lies in the closed simplex and inverts the square
/// root on real positive lifts.
pub fn check_momentum_image(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = random::seeded(cfg.seed ^ 0x8008);
    let max_n = cfg.max_dim().max(2);
    let mut worst_sum = 0.0f64;
    let mut nonneg = true;
    let mut worst_lift = 0.0f64;
    let sqrt = RootTransform::<f64>::sqrt();
    for _ in 0..500 {
        let n = rand::Rng::gen_range(&mut rng, 1..=max_n);
        let z = random_complex_point::<f64>(n, &mut rng);
        let m = momentum_torus(&ProjectivePoint::from(&z));
        nonneg &= m.iter().all(|&x| x >= 0.0);
        worst_sum = worst_sum.max((2.0 * m.iter().sum::<f64>() - 1.0).abs());

        let p = random::simplex_point::<f64>(n.max(2), &mut rng)?;
        let x = sqrt.forward(&p)?;
        let lift = ComplexPoint::from_real(x.coords())?;
        let doubled: Vec<f64> = momentum_torus(&ProjectivePoint::from(&lift)).iter().map(|v| 2.0 * v).collect();
        for (d, e) in doubled.iter().zip(p.coords()) {
            worst_lift = worst_lift.max((d - e).abs());
        }
    }
    let ok = nonneg && worst_lift <= MOMENTUM_LIFT_TOL;
    Ok(CheckOutcome::new(8, "momentum image", worst_sum, MOMENTUM_SUM_TOL, ok, format!("lift worst {worst_lift:.1e}")))
}

/// Midpoint-rule Fisher–Rao length of the pulled-back great circle.
pub fn geodesic_quadrature_length(p: &SimplexPoint<f64>, r: &SimplexPoint<f64>, steps: usize) -> Result<f64> {
    let dt = 1.0 / steps as f64;
    let mut prev = fr_geodesic(p, r, 0.0)?;
    let mut total = 0.0;
    for i in 1..=steps {
        let next = fr_geodesic(p, r, i as f64 * dt)?;
        let mid = fr_geodesic(p, r, (i as f64 - 0.5) * dt)?;
        let raw: Vec<f64> = next.coords().iter().zip(prev.coords()).map(|(a, b)| (a - b) / dt).collect();
        let v = make_tangent(&mid, &raw)?;
        total += fr_inner(&v, &v)?.sqrt() * dt;
        prev = next;
    }
    Ok(total)
}

/// Geodesics stay positive and their quadrature length matches fr_distance.
pub fn check_geodesic_convexity(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let mut rng = random::seeded(cfg.seed ^ 0x9009);
    let max_n = cfg.max_dim().max(2);
    let mut worst = 0.0f64;
    let mut positive = true;
    for _ in 0..100 {
        let n = rand::Rng::gen_range(&mut rng, 2..=max_n);
        let p = random::simplex_point::<f64>(n, &mut rng)?;
        let r = random::simplex_point::<f64>(n, &mut rng)?;
        for i in 0..=10 {
            positive &= fr_geodesic(&p, &r, i as f64 / 10.0)?.coords().iter().all(|&x| x > 0.0);
        }
        let len = geodesic_quadrature_length(&p, &r, 1000)?;
        worst = worst.max((len - fr_distance(&p, &r)?).abs());
    }
    Ok(CheckOutcome::new(9, "geodesic convexity", worst, GEODESIC_LENGTH_TOL, positive, "100 random pairs".into()))
}

/// `arccos √((1 - τ_N)/(1 - τ_2N))`: distance on the sphere closure between
/// the renormalized truncations at N and 2N of a sequence whose normalized
/// tails are `τ_N`, `τ_2N`.
pub fn truncation_distance_bound(tail_n: f64, tail_2n: f64) -> f64 {
    ((1.0 - tail_n) / (1.0 - tail_2n)).sqrt().min(1.0).acos()
}

/// Quantities at N and 2N differ by at most their analytic tail bounds.
pub fn check_tail_refinement(cfg: &CheckConfig) -> Result<CheckOutcome> {
    let base_dims: Vec<usize> =
        if cfg.dims.contains(&32) { vec![8, 16, 32] } else { cfg.dims.iter().copied().filter(|&n| n >= 2).collect() };
    let coeffs = SequenceSpec::geometric(0.5, 1, Normalization::None);
    let mut worst_ratio = 0.0f64;
    let mut lp_ok = true;
    for &r in &[0.3, 0.5, 0.9] {
        let spec = SequenceSpec::geometric(r, 2, Normalization::None);
        let partner = SequenceSpec::geometric(r / 2.0, 2, Normalization::None);
        for &n in &base_dims {
            let pts = refine::<f64>(&spec, &[n, 2 * n])?;
            let others = refine::<f64>(&partner, &[n, 2 * n])?;
            let (tail_n, tail_2n) = (pts[0].tail_bound(), pts[1].tail_bound());

            let c_n = LinearObjective::new(coeffs.with_dim(n).raw_values()?)?;
            let c_2n = LinearObjective::new(coeffs.with_dim(2 * n).raw_values()?)?;
            let df = (objective_value(&c_n, &pts[0])? - objective_value(&c_2n, &pts[1])?).abs();
            let bound_f = c_2n.max_abs() * tail_n;
            worst_ratio = worst_ratio.max(df / bound_f);

            let d_n = fr_distance(&pts[0].renormalized()?, &others[0].renormalized()?)?;
            let d_2n = fr_distance(&pts[1].renormalized()?, &others[1].renormalized()?)?;
            let bound_d = truncation_distance_bound(tail_n, tail_2n)
                + truncation_distance_bound(others[0].tail_bound(), others[1].tail_bound());
            worst_ratio = worst_ratio.max((d_n - d_2n).abs() / bound_d);

            let (lim_n, rep_n) = solve_lp(&c_n, &pts[0].renormalized()?, LP_TOL)?;
            let (lim_2n, rep_2n) = solve_lp(&c_2n, &pts[1].renormalized()?, LP_TOL)?;
            lp_ok &= rep_n.limit_vertex == rep_2n.limit_vertex && rep_n.limit_vertex.is_some();
            lp_ok &= vertex_gap(&lim_n) <= LP_TOL && vertex_gap(&lim_2n) <= LP_TOL;
        }
    }
    Ok(CheckOutcome::new(
        10,
        "tail refinement",
        worst_ratio,
        1.0,
        lp_ok,
        format!("N in {base_dims:?}; worst is |diff|/bound"),
    ))
}

/// Runs every suite in order.
pub fn run_all(cfg: &CheckConfig) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        check_isometry(cfg)?,
        check_qroot(cfg)?,
        check_gradient_flow(cfg)?,
        check_lp_convergence(cfg)?,
        check_e_geodesics(cfg)?,
        check_flow_geodesic(cfg)?,
        check_integrability(cfg)?,
        check_momentum_image(cfg)?,
        check_geodesic_convexity(cfg)?,
        check_tail_refinement(cfg)?,
    ])
}
