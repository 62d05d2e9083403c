//! The filtration benchmark: fluid enters through the porous bottom, rises
//! through the transition zone and leaves through the free-flow outflow
//! boundary. Both models run on the same outer geometry; the full solution
//! is averaged across the transition zone and compared with the interface
//! unknowns of the reduced model.

use crate::assembly::bc::{
    BoundarySpecFull, BoundarySpecReduced, DarcyBc, GammaBoundarySpec, SourceFieldsFull,
    SourceFieldsReduced, VelocityBc,
};
use crate::assembly::{assemble_full, assemble_reduced, TangentialClosure};
use crate::error::{Error, Result};
use crate::grid::{build_grid, GeometryConfig, ModelKind, StaggeredGrid};
use crate::params::{ClosureProfile, PhysicalParams, SymTensor2};
use crate::solver::{cpu_time_s, solve_auto, SolveReport};

/// Fixed setup of the filtration problem.
#[derive(Debug, Clone, Copy)]
pub struct FiltrationConfig {
    /// Cells per unit length (`h = 1/n`).
    pub n: usize,
    pub profile: ClosureProfile,
    /// Relative residual target for the Krylov path.
    pub tol: f64,
}

impl FiltrationConfig {
    pub fn new(n: usize, profile: ClosureProfile) -> Self {
        Self { n, profile, tol: 1e-10 }
    }

    pub fn params(&self) -> PhysicalParams {
        PhysicalParams {
            mu: 1e-3,
            mu_eff: 1e-3,
            alpha: 1.0,
            beta: SymTensor2::zero(),
            k_tr: SymTensor2::isotropic(1e-3),
            k_pm: SymTensor2::isotropic(1e-8),
        }
    }

    pub fn geometry_full(&self) -> GeometryConfig {
        let h = 1.0 / self.n as f64;
        GeometryConfig {
            lx: 1.0,
            ly: 1.005,
            y_gamma_pm: 0.5,
            y_gamma_ff: 0.505,
            nx: self.n,
            ny: (1.005 / h).round() as usize,
        }
    }

    pub fn geometry_reduced(&self) -> GeometryConfig {
        GeometryConfig { ny: self.n, ..self.geometry_full() }
    }
}

/// Prescribed inflow: upward normal velocity at the porous bottom,
/// `v.n_outward = 0.1 (x-0.25)(x-0.75)` on the inlet (negative there).
pub fn inflow_normal_velocity(x: f64) -> f64 {
    if (0.25..=0.75).contains(&x) {
        0.1 * (x - 0.25) * (x - 0.75)
    } else {
        0.0
    }
}

/// Exact total inflow through the inlet.
pub fn total_inflow_exact() -> f64 {
    0.1 * 0.5f64.powi(3) / 6.0
}

/// Boundary conditions of the filtration problem for both models.
pub fn filtration_bcs() -> (BoundarySpecFull, BoundarySpecReduced, GammaBoundarySpec) {
    let full = BoundarySpecFull {
        ff_left: VelocityBc::no_slip(),
        ff_right: VelocityBc::do_nothing(),
        ff_top: VelocityBc::no_slip(),
        ff_bottom: None,
        tr_left: VelocityBc::no_slip(),
        tr_right: VelocityBc::no_slip(),
        pm_left: DarcyBc::no_flux(),
        pm_right: DarcyBc::no_flux(),
        pm_bottom: DarcyBc::NormalFlux(Box::new(|x, _| inflow_normal_velocity(x))),
    };
    let reduced = BoundarySpecReduced {
        ff_left: VelocityBc::no_slip(),
        ff_right: VelocityBc::do_nothing(),
        ff_top: VelocityBc::no_slip(),
        pm_left: DarcyBc::no_flux(),
        pm_right: DarcyBc::no_flux(),
        pm_bottom: DarcyBc::NormalFlux(Box::new(|x, _| inflow_normal_velocity(x))),
    };
    (full, reduced, GammaBoundarySpec::no_slip())
}

/// Transition-zone averages of a full-model solution at the interface-cell
/// centers. The tangential velocity and pressure use quadrature with
/// second-order end corrections built from the interface traces; the normal
/// velocity uses the composite trapezoid over the face values.
pub struct TransitionAverages {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

/// Integral over an end cell `[0, h]` of the quadratic through the boundary
/// trace `f0` and the first two center values.
fn end_cell_integral(f0: f64, fm: f64, fm2: f64, h: f64) -> f64 {
    h / 9.0 * f0 + 5.0 * h / 6.0 * fm + h / 18.0 * fm2
}

pub fn average_full_across_transition(
    grid: &StaggeredGrid,
    params: &PhysicalParams,
    x: &[f64],
) -> Result<TransitionAverages> {
    let l = grid.full().clone();
    let m = l.strip_rows();
    if m < 1 {
        return Err(Error::Validation(vec![format!(
            "cannot average across the transition zone: d/hy = {m} < 1"
        )]));
    }
    let (nx, hy) = (l.nx, grid.hy);
    let d = grid.geometry.d();
    let (mu, mue) = (params.mu, params.mu_eff);
    let sk = params.k_pm_ref().sqrt();
    let c_bjs = (2.0 * sk - params.alpha * hy) / (2.0 * sk + params.alpha * hy);
    let a_ff = (mu - mue) / (mu + mue);
    let b_ff = 2.0 * mue / (mu + mue);

    // tangential velocity at face columns, then averaged to centers
    let mut ubar = vec![0.0; nx + 1];
    for i in 0..=nx {
        let us: Vec<f64> = (l.j_pm..l.j_ff).map(|j| x[l.iu(i, j)]).collect();
        let u_above = x[l.iu(i, l.j_ff)];
        // traces from the BJS ghost and the matched interface ghost (friction-free form)
        let u_bot = 0.5 * (1.0 + c_bjs) * us[0];
        let u_top = 0.5 * (u_above + a_ff * u_above + b_ff * us[m - 1]);
        ubar[i] = if m == 1 {
            (u_bot + 4.0 * us[0] + u_top) / 6.0
        } else {
            let mut integral = end_cell_integral(u_bot, us[0], us[1], hy)
                + end_cell_integral(u_top, us[m - 1], us[m - 2], hy);
            integral += hy * us[1..m - 1].iter().sum::<f64>();
            integral / d
        };
    }
    let u = (0..nx).map(|k| 0.5 * (ubar[k] + ubar[k + 1])).collect();

    let mut v = vec![0.0; nx];
    let mut p = vec![0.0; nx];
    for i in 0..nx {
        let vs: Vec<f64> = (l.j_pm..=l.j_ff).map(|j| x[l.iv(i, j)]).collect();
        v[i] = (0.5 * vs[0] + vs[1..m].iter().sum::<f64>() + 0.5 * vs[m]) / m as f64;
        let ps: Vec<f64> = (l.j_pm..l.j_ff).map(|j| x[l.ip(i, j)]).collect();
        p[i] = if m == 1 {
            ps[0]
        } else {
            // composite trapezoid including extrapolated interface values
            let p_bot = 1.5 * ps[0] - 0.5 * ps[1];
            let p_top = 1.5 * ps[m - 1] - 0.5 * ps[m - 2];
            let mut integral = 0.25 * hy * (p_bot + ps[0]) + 0.25 * hy * (p_top + ps[m - 1]);
            for k in 0..m - 1 {
                integral += 0.5 * hy * (ps[k] + ps[k + 1]);
            }
            integral / d
        };
    }
    Ok(TransitionAverages { u, v, p })
}

/// Interface fields of a reduced solution sampled at cell centers
/// (the staggered tangential average interpolated from faces).
pub struct GammaFields {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

pub fn gamma_fields(grid: &StaggeredGrid, x: &[f64]) -> GammaFields {
    let l = grid.reduced();
    let u = (0..l.nx).map(|k| 0.5 * (x[l.igu(k)] + x[l.igu(k + 1)])).collect();
    let v = (0..l.nx).map(|k| x[l.igv(k)]).collect();
    let p = (0..l.nx).map(|k| x[l.igp(k)]).collect();
    GammaFields { u, v, p }
}

/// Relative L2(gamma) deviations between the averaged full model and the
/// reduced model.
#[derive(Debug, Clone, Copy)]
pub struct Deviations {
    pub eps_u: f64,
    pub eps_v: f64,
    pub eps_p: f64,
}

pub fn relative_deviations(avg: &TransitionAverages, gam: &GammaFields) -> Result<Deviations> {
    if avg.u.len() != gam.u.len() {
        return Err(Error::Validation(vec![format!(
            "mismatched interface discretizations: {} vs {}",
            avg.u.len(),
            gam.u.len()
        )]));
    }
    let rel = |a: &[f64], b: &[f64]| -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let den: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if den < 1e-14 { f64::NAN } else { num / den }
    };
    Ok(Deviations {
        eps_u: rel(&avg.u, &gam.u),
        eps_v: rel(&avg.v, &gam.v),
        eps_p: rel(&avg.p, &gam.p),
    })
}

/// Timing breakdown of one model run.
#[derive(Debug, Clone, Copy)]
pub struct CpuBreakdown {
    pub assembly_s: f64,
    pub solve_s: f64,
}

impl CpuBreakdown {
    pub fn total(&self) -> f64 {
        self.assembly_s + self.solve_s
    }
}

pub struct FullRun {
    pub grid: StaggeredGrid,
    pub report: SolveReport,
    pub cpu: CpuBreakdown,
}

pub struct ReducedRun {
    pub grid: StaggeredGrid,
    pub report: SolveReport,
    pub cpu: CpuBreakdown,
}

/// Assemble and solve the full-dimensional filtration problem.
pub fn run_filtration_full(cfg: &FiltrationConfig) -> Result<FullRun> {
    let params = cfg.params();
    let grid = build_grid(cfg.geometry_full(), ModelKind::Full)?;
    let (bcs_full, _, _) = filtration_bcs();
    let sources = SourceFieldsFull::zero();
    let t0 = cpu_time_s();
    let sys = assemble_full(&grid, &params, &sources, &bcs_full)?;
    let t1 = cpu_time_s();
    let report = solve_auto(&sys, cfg.tol)?;
    let t2 = cpu_time_s();
    Ok(FullRun { grid, report, cpu: CpuBreakdown { assembly_s: t1 - t0, solve_s: t2 - t1 } })
}

/// Assemble and solve the reduced filtration problem with the configured
/// closure profile.
pub fn run_filtration_reduced(cfg: &FiltrationConfig) -> Result<ReducedRun> {
    let params = cfg.params();
    let grid = build_grid(cfg.geometry_reduced(), ModelKind::Reduced)?;
    let (_, bcs_reduced, gamma_bcs) = filtration_bcs();
    let sources = SourceFieldsReduced::zero();
    let t0 = cpu_time_s();
    let sys = assemble_reduced(&grid, &params, cfg.profile, &sources, &bcs_reduced, &gamma_bcs)?;
    let t1 = cpu_time_s();
    let report = solve_auto(&sys, cfg.tol)?;
    let t2 = cpu_time_s();
    Ok(ReducedRun { grid, report, cpu: CpuBreakdown { assembly_s: t1 - t0, solve_s: t2 - t1 } })
}

/// Full comparison outcome for one closure profile.
pub struct DeviationReport {
    pub profile: ClosureProfile,
    pub deviations: Deviations,
    pub cpu_full: CpuBreakdown,
    pub cpu_reduced: CpuBreakdown,
}

/// Run both models and compare (the full run may be shared across profiles
/// by the caller; this convenience runs everything).
pub fn run_filtration(cfg: &FiltrationConfig) -> Result<(DeviationReport, FullRun, ReducedRun)> {
    let full = run_filtration_full(cfg)?;
    let reduced = run_filtration_reduced(cfg)?;
    let report = compare_runs(cfg, &full, &reduced)?;
    Ok((report, full, reduced))
}

pub fn compare_runs(cfg: &FiltrationConfig, full: &FullRun, reduced: &ReducedRun) -> Result<DeviationReport> {
    let avg = average_full_across_transition(&full.grid, &cfg.params(), &full.report.x)?;
    let gam = gamma_fields(&reduced.grid, &reduced.report.x);
    Ok(DeviationReport {
        profile: cfg.profile,
        deviations: relative_deviations(&avg, &gam)?,
        cpu_full: full.cpu,
        cpu_reduced: reduced.cpu,
    })
}

/// Discrete inflow through the porous bottom (same for both models).
pub fn discrete_inflow(grid: &StaggeredGrid) -> f64 {
    let nx = grid.geometry.nx;
    let hx = grid.hx;
    -(0..nx).map(|i| hx * inflow_normal_velocity(grid.x_center(i))).sum::<f64>()
}

/// Outflow through the free-flow outflow boundary of a full-model solution.
pub fn outflow_full(grid: &StaggeredGrid, x: &[f64]) -> f64 {
    let l = grid.full();
    (l.j_ff..l.ny).map(|j| grid.hy * x[l.iu(l.nx, j)]).sum()
}

/// Outflow through the free-flow outflow boundary of a reduced solution,
/// including the tangential interface flux at the right endpoint.
pub fn outflow_reduced(grid: &StaggeredGrid, x: &[f64]) -> f64 {
    let l = grid.reduced();
    let bulk: f64 = (0..l.ny_ff).map(|j| grid.hy * x[l.iu(l.nx, j)]).sum();
    bulk + grid.geometry.d() * x[l.igu(l.nx)]
}

/// Velocity profile along the y = y_gamma_ff line for both models:
/// columns are (x, u_full, v_full, u_reduced, v_reduced).
pub fn extract_profile_at_gamma_ff(
    full_grid: &StaggeredGrid,
    xf: &[f64],
    reduced_grid: &StaggeredGrid,
    xr: &[f64],
    params: &PhysicalParams,
) -> Vec<[f64; 5]> {
    let lf = full_grid.full();
    let lr = reduced_grid.reduced();
    let nx = lf.nx;
    let d = reduced_grid.geometry.d();
    let tc = TangentialClosure::new(params, d);
    let fric = params.mu / params.k_tr_ref().sqrt() * params.beta.xx;
    let den = params.mu / reduced_grid.hy + (tc.c_2 + fric) / 2.0;
    let mut rows = Vec::with_capacity(nx);
    for k in 0..nx {
        let x = full_grid.x_center(k);
        // full model: one-sided trace of u on the line, shared v face
        let utr = |i: usize| -> f64 {
            0.5 * (3.0 * xf[lf.iu(i, lf.j_ff)] - xf[lf.iu(i, lf.j_ff + 1)])
        };
        let u_full = 0.5 * (utr(k) + utr(k + 1));
        let v_full = xf[lf.iv(k, lf.j_ff)];
        // reduced model: transmission trace at faces, interpolated to centers
        let trace = |i: usize| -> f64 {
            if i == 0 || i == lr.nx {
                0.5 * (3.0 * xr[lr.iu(i, 0)] - xr[lr.iu(i, 1)])
            } else {
                (params.mu / reduced_grid.hy * xr[lr.iu(i, 0)] + 0.5 * tc.c_uff * xr[lr.igu(i)]) / den
            }
        };
        let u_red = 0.5 * (trace(k) + trace(k + 1));
        let v_red = xr[lr.iv(k, 0)];
        rows.push([x, u_full, v_full, u_red, v_red]);
    }
    rows
}
