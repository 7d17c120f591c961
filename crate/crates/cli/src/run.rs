//! Command implementations.

use serde_json::json;
use simplexgeo::checks::{self, CheckConfig};
use simplexgeo::connections::CURVE_STEP;
use simplexgeo::flows::{flow_trajectory, integrate_flow_rk4};
use simplexgeo::hamiltonian::{poisson_bracket_with, random_complex_point, DerivativeMode};
use simplexgeo::random;
use simplexgeo::{
    e_connection_residual, finsler_norm, flow_closed_form, fr_inner, gradient_field, integrability_suite, lq_norm,
    make_e_geodesic, make_simplex_point, make_tangent, objective_value, poisson_bracket, solve_lp, LinearObjective64,
    QuadraticHamiltonian64, RootTransform64, ScalarField, SimplexPoint64,
};

use crate::config::{CommandKind, ConfigError, Method, RunConfig};
use crate::output::{Artifact, Table};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{op}: {source}")]
    Library { op: &'static str, source: simplexgeo::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Library { .. } => 1,
        }
    }
}

trait Context<T> {
    fn op(self, op: &'static str) -> Result<T, RunError>;
}

impl<T> Context<T> for simplexgeo::Result<T> {
    fn op(self, op: &'static str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Library { op, source })
    }
}

/// A finished run: one-line summary, verdict and optional file contents.
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub passed: bool,
    pub artifact: Artifact,
    /// Extra lines printed before the summary (check-all only).
    pub details: Vec<String>,
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, RunError> {
    match cfg.command()? {
        CommandKind::Flow => flow(cfg),
        CommandKind::Geodesic => geodesic(cfg),
        CommandKind::Lp => lp(cfg),
        CommandKind::Isometry => isometry(cfg),
        CommandKind::Bracket => bracket(cfg),
        CommandKind::Integrability => integrability(cfg),
        CommandKind::CheckAll => check_all(cfg),
    }
}

fn objective(cfg: &RunConfig, dim: usize) -> Result<LinearObjective64, RunError> {
    let command = cfg.command()?.name();
    let c = cfg.objective(dim)?.ok_or(ConfigError::Missing { command, field: "--c" })?;
    LinearObjective64::new(c).op("flows::LinearObjective::new")
}

/// Objective for the Hamiltonian commands; seeded coefficients in `[-2, 2]`
/// when `--c` is absent.
fn weights(cfg: &RunConfig, dim: usize) -> Result<Vec<f64>, RunError> {
    match cfg.objective(dim)? {
        Some(c) => Ok(c),
        None => Ok(random::coefficients(dim, -2.0, 2.0, &mut random::seeded(cfg.seed()))),
    }
}

fn initial(cfg: &RunConfig, dim: usize) -> Result<SimplexPoint64, RunError> {
    make_simplex_point(&cfg.initial(dim)?).op("sequence::make_simplex_point")
}

fn flow(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let obj = objective(cfg, dim)?;
    let p0 = initial(cfg, dim)?;
    let (t_max, dt) = (cfg.t_max()?, cfg.dt()?);
    let method = cfg.method.unwrap_or_default();
    let traj = match method {
        Method::Closed => flow_trajectory(&obj, &p0, t_max, dt).op("flows::flow_trajectory")?,
        Method::Rk4 => integrate_flow_rk4(&obj, &p0, t_max, dt).op("flows::integrate_rk4")?,
    };
    let monotone = traj.objective.windows(2).all(|w| w[1] >= w[0]);
    let max_residual = traj.diagnostics.iter().fold(0.0f64, |m, d| m.max(d.residual_l1));
    let residual_ok = method == Method::Rk4 || max_residual <= checks::FLOW_RESIDUAL_TOL;
    let passed = monotone && residual_ok;
    let final_objective = *traj.objective.last().expect("trajectory has t = 0");
    let report = json!({
        "method": method,
        "rows": traj.len(),
        "final_objective": final_objective,
        "objective_nondecreasing": monotone,
        "max_residual_l1": max_residual,
        "pass": passed,
    });
    Ok(Outcome {
        summary: format!(
            "flow N={dim} method={} rows={} F(t_max)={final_objective} max_residual={max_residual:.3e} {}",
            if method == Method::Closed { "closed" } else { "rk4" },
            traj.len(),
            verdict(passed)
        ),
        passed,
        artifact: Artifact { report, table: Table::from_trajectory(&traj) },
        details: vec![],
    })
}

fn geodesic(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let p0 = initial(cfg, dim)?;
    let v0 = match cfg.velocity(dim)? {
        Some(raw) => make_tangent(&p0, &raw).op("sequence::make_tangent")?,
        None => {
            let obj = objective(cfg, dim).map_err(|e| match e {
                RunError::Config(ConfigError::Missing { command, .. }) => {
                    RunError::Config(ConfigError::Missing { command, field: "--v0 or --c" })
                }
                other => other,
            })?;
            gradient_field(&obj, &p0).op("flows::gradient_field")?
        }
    };
    let g = make_e_geodesic(&p0, &v0).op("connections::make_e_geodesic")?;
    let tilt = LinearObjective64::new(g.exponents().to_vec()).op("flows::LinearObjective::new")?;
    let (t_max, dt) = (cfg.t_max()?, cfg.dt()?);
    let steps = (t_max / dt).round() as usize;
    let mut columns = vec!["t".to_string()];
    columns.extend((0..dim).map(|n| format!("p_{n}")));
    columns.extend(["objective".to_string(), "residual_max".to_string()]);
    let mut table = Table::new(columns);
    let mut worst = 0.0f64;
    for i in 0..=steps {
        let t = i as f64 * dt;
        let p = g.eval(t).op("connections::e_geodesic_eval")?;
        let r = e_connection_residual(|s| g.eval(s), t, CURVE_STEP).op("connections::e_connection_residual")?;
        let r_max = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        worst = worst.max(r_max);
        let mut row = vec![t];
        row.extend_from_slice(p.coords());
        row.push(objective_value(&tilt, &p).op("flows::objective_value")?);
        row.push(r_max);
        table.rows.push(row);
    }
    let passed = worst <= checks::EGEO_RESIDUAL_TOL;
    let report = json!({ "rows": table.rows.len(), "max_residual": worst, "pass": passed });
    Ok(Outcome {
        summary: format!("geodesic N={dim} rows={} max_residual={worst:.3e} {}", table.rows.len(), verdict(passed)),
        passed,
        artifact: Artifact { report, table },
        details: vec![],
    })
}

fn lp(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let obj = objective(cfg, dim)?;
    let p0 = initial(cfg, dim)?;
    let tol = cfg.tol()?;
    let (limit, report) = solve_lp(&obj, &p0, tol).op("flows::solve_lp")?;
    let mut table = Table::new(
        ["t"]
            .iter()
            .map(|s| s.to_string())
            .chain((0..dim).map(|n| format!("p_{n}")))
            .chain(["objective".to_string(), "gap_l1".to_string()])
            .collect(),
    );
    let mut t = 1.0;
    loop {
        let p = if t == report.t_final {
            limit.clone()
        } else {
            flow_closed_form(&obj, &p0, t).op("flows::flow_closed_form")?
        };
        let mut row = vec![t];
        row.extend_from_slice(p.coords());
        row.push(objective_value(&obj, &p).op("flows::objective_value")?);
        row.push(simplexgeo::flows::vertex_gap(&p));
        table.rows.push(row);
        if t >= report.t_final {
            break;
        }
        t = (2.0 * t).min(report.t_final);
    }
    let rate_ok = match (report.measured_rate, report.expected_rate) {
        (Some(m), Some(e)) => (m - e).abs() <= checks::RATE_REL_TOL * e,
        _ => false,
    };
    let passed = report.converged && rate_ok;
    let rate = report.measured_rate.map_or("n/a".to_string(), |r| format!("{r:.6}"));
    let summary = format!(
        "lp N={dim} t_final={} gap={:.3e} rate={rate}{} {}",
        report.t_final,
        report.gap_l1,
        if report.not_strictly_decreasing { " (c not strictly decreasing)" } else { "" },
        verdict(passed)
    );
    let mut value = serde_json::to_value(&report).expect("report serializes");
    value["pass"] = json!(passed);
    Ok(Outcome { summary, passed, artifact: Artifact { report: value, table }, details: vec![] })
}

fn isometry(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let q = cfg.q()?;
    let trials = cfg.trials()?;
    let mut rng = random::seeded(cfg.seed());
    let sqrt = RootTransform64::sqrt();
    let root = RootTransform64::new(q).op("transforms::RootTransform::new")?;
    let mut table = Table::new(
        ["trial", "fr_inner", "pullback_inner", "isometry_err", "lq_pushforward", "finsler_over_q", "qroot_rel_err"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    let (mut worst_iso, mut worst_q) = (0.0f64, 0.0f64);
    for trial in 0..trials {
        let p = random::simplex_point::<f64>(dim, &mut rng).op("random::simplex_point")?;
        let v = random::tangent(&p, &mut rng).op("random::tangent")?;
        let w = random::tangent(&p, &mut rng).op("random::tangent")?;
        let g = fr_inner(&v, &w).op("metrics::fr_inner")?;
        let pb = sqrt.pullback_inner(&v, &w).op("transforms::pullback_inner")?;
        let iso = (g - pb).abs() / g.abs().max(1.0);
        let lhs = lq_norm(root.pushforward(&v).op("transforms::pushforward")?.comps(), q).op("sequence::lq_norm")?;
        let rhs = finsler_norm(&v, q).op("metrics::finsler_norm")? / q;
        let rel = (lhs - rhs).abs() / rhs.max(f64::MIN_POSITIVE);
        worst_iso = worst_iso.max(iso);
        worst_q = worst_q.max(rel);
        table.rows.push(vec![trial as f64, g, pb, iso, lhs, rhs, rel]);
    }
    let passed = worst_iso <= checks::ISOMETRY_TOL && worst_q <= checks::QROOT_TOL;
    let report = json!({
        "q": q,
        "trials": trials,
        "isometry_max_err": worst_iso,
        "qroot_max_rel_err": worst_q,
        "pass": passed,
    });
    Ok(Outcome {
        summary: format!(
            "isometry N={dim} q={q} trials={trials} isometry_err={worst_iso:.3e} qroot_err={worst_q:.3e} {}",
            verdict(passed)
        ),
        passed,
        artifact: Artifact { report, table },
        details: vec![],
    })
}

fn bracket(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let c = weights(cfg, dim)?;
    let mut rng = random::seeded(cfg.seed() ^ 0xb4ac);
    let z = random_complex_point::<f64>(dim, &mut rng);
    let total =
        ScalarField::Quadratic(QuadraticHamiltonian64::new(c.clone()).op("hamiltonian::QuadraticHamiltonian::new")?);
    let parts: Vec<_> = (0..dim).map(|k| ScalarField::Quadratic(QuadraticHamiltonian64::component(&c, k))).collect();
    let mut table = Table::new(["k", "m", "analytic", "numeric"].iter().map(|s| s.to_string()).collect());
    let (mut analytic_max, mut numeric_max) = (0.0f64, 0.0f64);
    // m = -1 stands for the total Hamiltonian H_c
    let mut pairs: Vec<(i64, i64, &ScalarField<f64>, &ScalarField<f64>)> = Vec::new();
    for k in 0..dim {
        pairs.push((-1, k as i64, &total, &parts[k]));
        for m in (k + 1)..dim {
            pairs.push((k as i64, m as i64, &parts[k], &parts[m]));
        }
    }
    for (k, m, f, g) in pairs {
        let a = poisson_bracket(f, g, z.coords()).op("hamiltonian::poisson_bracket")?;
        let n = poisson_bracket_with(f, g, z.coords(), DerivativeMode::Numeric).op("hamiltonian::poisson_bracket")?;
        analytic_max = analytic_max.max(a.abs());
        numeric_max = numeric_max.max(n.abs());
        table.rows.push(vec![k as f64, m as f64, a, n]);
    }
    let passed = analytic_max == 0.0 && numeric_max <= checks::BRACKET_NUMERIC_TOL;
    let report = json!({
        "analytic_max_abs": analytic_max,
        "numeric_max_abs": numeric_max,
        "pairs": table.rows.len(),
        "pass": passed,
    });
    Ok(Outcome {
        summary: format!(
            "bracket N={dim} pairs={} analytic_max={analytic_max:.1e} numeric_max={numeric_max:.3e} {}",
            table.rows.len(),
            verdict(passed)
        ),
        passed,
        artifact: Artifact { report, table },
        details: vec![],
    })
}

fn integrability(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let c = weights(cfg, dim)?;
    let trials = cfg.trials()?;
    let rep = integrability_suite(&c, trials, cfg.seed()).op("hamiltonian::integrability_suite")?;
    let mut table = Table::new(
        ["brackets_max_abs", "conservation_max_drift", "gram_det", "pass", "seed"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    );
    table.rows.push(vec![
        rep.brackets_max_abs,
        rep.conservation_max_drift,
        rep.gram_det,
        if rep.pass { 1.0 } else { 0.0 },
        rep.seed as f64,
    ]);
    Ok(Outcome {
        summary: format!(
            "integrability N={dim} trials={trials} brackets={:.3e} drift={:.3e} gram_det={:.3e} {}",
            rep.brackets_max_abs,
            rep.conservation_max_drift,
            rep.gram_det,
            verdict(rep.pass)
        ),
        passed: rep.pass,
        artifact: Artifact { report: serde_json::to_value(&rep).expect("report serializes"), table },
        details: vec![],
    })
}

fn check_all(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let dim = cfg.require_dim()?;
    let suite = CheckConfig::for_dim(dim, cfg.seed());
    let outcomes = checks::run_all(&suite).op("checks::run_all")?;
    let passed = outcomes.iter().all(|o| o.passed);
    let mut table = Table::new(["id", "passed", "worst", "threshold"].iter().map(|s| s.to_string()).collect());
    for o in &outcomes {
        table.rows.push(vec![o.id as f64, if o.passed { 1.0 } else { 0.0 }, o.worst, o.threshold]);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    Ok(Outcome {
        summary: format!(
            "check-all N={dim} dims={:?} seed={} passed={}/{} {}",
            suite.dims,
            suite.seed,
            outcomes.len() - failed,
            outcomes.len(),
            verdict(passed)
        ),
        passed,
        details: outcomes.iter().map(|o| o.summary_line()).collect(),
        artifact: Artifact { report: json!({ "dims": suite.dims, "checks": outcomes, "pass": passed }), table },
    })
}
