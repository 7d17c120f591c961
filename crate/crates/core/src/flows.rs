//! The linear program `max Σ c_n p_n` over the closed simplex, its
//! Fisher–Rao gradient flow, and the flow/e-geodesic correspondence.
//!
//! The flow is `ṗ = W(p)` with `W_n = p_n c_n - F(p) p_n`, whose solution is
//! the exponential tilt `p_n(t) ∝ p_n(0) e^{c_n t}`. With the `1/4`
//! normalization of [`fr_inner`](crate::metrics::fr_inner) the metric
//! gradient of `F` is `4W`; the two conventions differ by `t ↦ 4t`.

use serde::Serialize;

use crate::connections::{exp_tilt, make_e_geodesic, VectorField};
use crate::error::{Error, Result};
use crate::scalar::{self, Scalar};
use crate::sequence::{SimplexPoint, TangentVector};

/// Horizon at which [`solve_lp`] gives up.
pub const LP_HORIZON_CAP: f64 = 1e6;
/// Step used for the ODE residual diagnostic of closed-form trajectories.
pub const RESIDUAL_STEP: f64 = 1e-4;

/// Objective coefficients `c` of `F(p) = Σ c_n p_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearObjective<T> {
    c: Vec<T>,
    strictly_decreasing: bool,
}

impl<T: Scalar> LinearObjective<T> {
    pub fn new(c: Vec<T>) -> Result<Self> {
        if c.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        let strictly_decreasing = c.windows(2).all(|w| w[0] > w[1]);
        Ok(Self { c, strictly_decreasing })
    }

    pub fn coeffs(&self) -> &[T] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.strictly_decreasing
    }

    pub fn max_abs(&self) -> T {
        self.c.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    fn check_dim(&self, p: &SimplexPoint<T>) -> Result<()> {
        if p.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.dim(), p.dim()))
        }
    }
}

/// `F(p) = Σ c_n p_n`.
pub fn objective_value<T: Scalar>(obj: &LinearObjective<T>, p: &SimplexPoint<T>) -> Result<T> {
    obj.check_dim(p)?;
    Ok(scalar::dot(&obj.c, p.coords()))
}

/// `W_n = p_n c_n - F(p) p_n`.
pub fn gradient_field<T: Scalar>(obj: &LinearObjective<T>, p: &SimplexPoint<T>) -> Result<TangentVector<T>> {
    let f = objective_value(obj, p)?;
    let comps = obj.c.iter().zip(p.coords()).map(|(&c, &x)| x * (c - f)).collect();
    TangentVector::new(p.clone(), comps)
}

/// The gradient field of an objective as a [`VectorField`].
#[derive(Debug, Clone)]
pub struct GradientField<T> {
    pub objective: LinearObjective<T>,
}

impl<T: Scalar> VectorField<T> for GradientField<T> {
    fn eval(&self, p: &SimplexPoint<T>) -> Result<TangentVector<T>> {
        gradient_field(&self.objective, p)
    }

    fn label(&self) -> &str {
        "gradient"
    }
}

/// Point of the gradient flow at time `t` (any finite `t`).
pub fn flow_closed_form<T: Scalar>(obj: &LinearObjective<T>, p0: &SimplexPoint<T>, t: T) -> Result<SimplexPoint<T>> {
    obj.check_dim(p0)?;
    p0.require_finite_support()?;
    exp_tilt(p0, &obj.c, t)
}

/// Per-step diagnostics of a [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    /// ODE residual (closed form) or unit-sum drift before renormalization (RK4).
    pub residual_l1: f64,
    /// Step length that produced this state (0 for the initial state).
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub points: Vec<SimplexPoint<T>>,
    pub objective: Vec<T>,
    pub diagnostics: Vec<StepDiagnostics>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SimplexPoint<T>> {
        self.points.last()
    }
}

fn l1<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y).abs()).sum()
}

/// ℓ¹ distance between the time derivative of the closed-form flow (central
/// differences, step `h`) and `W` at `p(t)`.
pub fn flow_ode_residual<T: Scalar>(obj: &LinearObjective<T>, p0: &SimplexPoint<T>, t: T, h: T) -> Result<T> {
    let a = flow_closed_form(obj, p0, t + h)?;
    let b = flow_closed_form(obj, p0, t - h)?;
    let p = flow_closed_form(obj, p0, t)?;
    let w = gradient_field(obj, &p)?;
    let two_h = h + h;
    let d: Vec<T> = a.coords().iter().zip(b.coords()).map(|(&x, &y)| (x - y) / two_h).collect();
    Ok(l1(&d, w.comps()))
}

/// Samples the closed-form flow on `t = 0, dt, …, t_max`.
pub fn flow_trajectory<T: Scalar>(
    obj: &LinearObjective<T>,
    p0: &SimplexPoint<T>,
    t_max: T,
    dt: T,
) -> Result<Trajectory<T>> {
    let steps = step_count(t_max, dt)?;
    let mut traj = Trajectory { times: vec![], points: vec![], objective: vec![], diagnostics: vec![] };
    let h = T::lit(RESIDUAL_STEP);
    for i in 0..=steps {
        let t = dt * T::count(i);
        let p = flow_closed_form(obj, p0, t)?;
        traj.objective.push(objective_value(obj, &p)?);
        traj.diagnostics.push(StepDiagnostics {
            residual_l1: flow_ode_residual(obj, p0, t, h)?.as_f64(),
            dt: if i == 0 { 0.0 } else { dt.as_f64() },
        });
        traj.times.push(t);
        traj.points.push(p);
    }
    Ok(traj)
}

pub(crate) fn step_count<T: Scalar>(t_max: T, dt: T) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::InvalidStep(dt.as_f64()));
    }
    if !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    Ok((t_max / dt).round().to_usize().unwrap_or(0))
}

/// Classical fixed-step RK4 for `ṗ = field(p)`. Each accepted state is
/// renormalized to unit sum; a stage or state leaving the open simplex is an
/// error, never clamped.
pub fn integrate_rk4<T, F>(field: &F, p0: &SimplexPoint<T>, t_max: T, dt: T) -> Result<Trajectory<T>>
where
    T: Scalar,
    F: VectorField<T> + ?Sized,
{
    let steps = step_count(t_max, dt)?;
    let mut traj = Trajectory {
        times: vec![T::zero()],
        points: vec![p0.clone()],
        objective: vec![T::nan()],
        diagnostics: vec![StepDiagnostics { residual_l1: 0.0, dt: 0.0 }],
    };
    let mut p = p0.clone();
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    for step in 1..=steps {
        let lost = || Error::PositivityLost { step, time: (dt * T::count(step)).as_f64() };
        let stage = |base: &SimplexPoint<T>, k: &[T], s: T| -> Result<SimplexPoint<T>> {
            let c: Vec<T> = base.coords().iter().zip(k).map(|(&x, &d)| x + s * d).collect();
            if c.iter().any(|&x| !(x > T::zero())) {
                return Err(lost());
            }
            SimplexPoint::new(c).map_err(|_| lost())
        };
        let k1 = field.eval(&p)?.comps().to_vec();
        let k2 = field.eval(&stage(&p, &k1, half * dt)?)?.comps().to_vec();
        let k3 = field.eval(&stage(&p, &k2, half * dt)?)?.comps().to_vec();
        let k4 = field.eval(&stage(&p, &k3, dt)?)?.comps().to_vec();
        let next: Vec<T> = p
            .coords()
            .iter()
            .enumerate()
            .map(|(n, &x)| x + dt * sixth * (k1[n] + T::lit(2.0) * (k2[n] + k3[n]) + k4[n]))
            .collect();
        if next.iter().any(|&x| !(x > T::zero())) {
            return Err(lost());
        }
        let s = scalar::sum(&next);
        p = SimplexPoint::new(next.into_iter().map(|x| x / s).collect()).map_err(|_| lost())?;
        traj.times.push(dt * T::count(step));
        traj.points.push(p.clone());
        traj.objective.push(T::nan());
        traj.diagnostics.push(StepDiagnostics { residual_l1: (s - T::one()).abs().as_f64(), dt: dt.as_f64() });
    }
    Ok(traj)
}

/// RK4 trajectory of the gradient flow, with the objective column filled in.
pub fn integrate_flow_rk4<T: Scalar>(
    obj: &LinearObjective<T>,
    p0: &SimplexPoint<T>,
    t_max: T,
    dt: T,
) -> Result<Trajectory<T>> {
    obj.check_dim(p0)?;
    let field = GradientField { objective: obj.clone() };
    let mut traj = integrate_rk4(&field, p0, t_max, dt)?;
    for (f, p) in traj.objective.iter_mut().zip(&traj.points) {
        *f = objective_value(obj, p)?;
    }
    Ok(traj)
}

/// Outcome of [`solve_lp`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpReport {
    pub converged: bool,
    /// Set when `c` is not strictly decreasing: the limit may be a face point
    /// rather than the vertex `e_0`, and convergence is not certified.
    pub not_strictly_decreasing: bool,
    /// Index of the vertex the flow converges to, when certified.
    pub limit_vertex: Option<usize>,
    pub t_final: f64,
    /// `‖p(t_final) - e_0‖₁`.
    pub gap_l1: f64,
    pub objective: f64,
    /// Least-squares slope of `-log ‖p(t) - e_0‖₁` over the last decade.
    pub measured_rate: Option<f64>,
    /// `c_0 - c_1`.
    pub expected_rate: Option<f64>,
}

/// `‖p - e_0‖₁`. On the simplex `|1 - p_0| = Σ_{n>=1} p_n`, so the gap is
/// twice the non-leading mass, which keeps full precision near the vertex.
pub fn vertex_gap<T: Scalar>(p: &SimplexPoint<T>) -> T {
    let rest: T = p.coords()[1..].iter().copied().sum();
    rest + rest
}

fn gap_at<T: Scalar>(obj: &LinearObjective<T>, p0: &SimplexPoint<T>, t: T) -> Result<T> {
    Ok(vertex_gap(&flow_closed_form(obj, p0, t)?))
}

/// Follows the closed-form flow with a doubling horizon from `t = 1` until
/// `‖p(t) - e_0‖₁ <= tol`, capped at [`LP_HORIZON_CAP`].
pub fn solve_lp<T: Scalar>(
    obj: &LinearObjective<T>,
    p0: &SimplexPoint<T>,
    tol: T,
) -> Result<(SimplexPoint<T>, LpReport)> {
    obj.check_dim(p0)?;
    p0.require_finite_support()?;
    let cap = T::lit(LP_HORIZON_CAP);
    let mut t = T::one();
    let mut gap = gap_at(obj, p0, t)?;
    while gap > tol && t < cap {
        t = (t + t).min(cap);
        gap = gap_at(obj, p0, t)?;
    }
    let converged = gap <= tol;
    let p = flow_closed_form(obj, p0, t)?;
    let decreasing = obj.is_strictly_decreasing();
    let measured_rate = if converged && decreasing { Some(fit_rate(obj, p0, t, gap)?.as_f64()) } else { None };
    let report = LpReport {
        converged,
        not_strictly_decreasing: !decreasing,
        limit_vertex: decreasing.then_some(0),
        t_final: t.as_f64(),
        gap_l1: gap.as_f64(),
        objective: objective_value(obj, &p)?.as_f64(),
        measured_rate,
        expected_rate: decreasing.then(|| (obj.c[0] - obj.c[1]).as_f64()),
    };
    Ok((p, report))
}

/// Least-squares decay rate of the vertex gap over `[t_a, t_end]`, where
/// `t_a` is where the gap was ten times its final value.
fn fit_rate<T: Scalar>(obj: &LinearObjective<T>, p0: &SimplexPoint<T>, t_end: T, gap_end: T) -> Result<T> {
    let target = gap_end * T::lit(10.0);
    let (mut lo, mut hi) = (T::zero(), t_end);
    if gap_at(obj, p0, lo)? <= target {
        // already within a decade at t = 0; fit over the whole run
        hi = T::zero();
    }
    for _ in 0..200 {
        if hi - lo <= T::tol(1e-12) * t_end.max(T::one()) {
            break;
        }
        let mid = (lo + hi) / T::lit(2.0);
        if gap_at(obj, p0, mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let start = hi;
    let samples = 64;
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = start + (t_end - start) * T::count(i) / T::count(samples - 1);
        xs.push(t);
        ys.push(gap_at(obj, p0, t)?.ln());
    }
    let n = T::count(samples);
    let mx = scalar::sum(&xs) / n;
    let my = scalar::sum(&ys) / n;
    let sxy: T = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    Ok(-sxy / sxx)
}

/// Maximum ℓ¹ deviation over `grid` between the gradient flow and the
/// e-geodesic with initial velocity `v_n = p0_n (c_n - Σ_k p0_k c_k)`.
pub fn flow_geodesic_correspondence<T: Scalar>(
    obj: &LinearObjective<T>,
    p0: &SimplexPoint<T>,
    grid: &[T],
) -> Result<T> {
    let v = gradient_field(obj, p0)?;
    let g = make_e_geodesic(p0, &v)?;
    grid.iter().try_fold(T::zero(), |m, &t| {
        let a = flow_closed_form(obj, p0, t)?;
        let b = g.eval(t)?;
        Ok(m.max(l1(a.coords(), b.coords())))
    })
}

/// Grid used by [`flow_geodesic_correspondence`] when none is given.
pub fn default_correspondence_grid<T: Scalar>() -> Vec<T> {
    [0.0, 0.5, 1.0, 5.0].iter().map(|&t| T::lit(t)).collect()
}
