//! Manufactured solutions, analytic source terms, discrete error norms and
//! convergence studies for both models.
//!
//! The closed-form fields below satisfy the bulk mass conservation equations
//! exactly and, with the verification parameter set, all five interface
//! conditions. Hard-coded source formulas are checked against central
//! finite-difference and quadrature oracles in the test suite before
//! anything else relies on them.

use crate::assembly::bc::{
    BoundarySpecFull, BoundarySpecReduced, DarcyBc, GammaBoundarySpec, GammaEndBc,
    SourceFieldsFull, SourceFieldsReduced, VelocityBc,
};
use crate::assembly::{assemble_full, assemble_reduced};
use crate::error::{Error, Result};
use crate::grid::{build_grid, GeometryConfig, Layout, ModelKind, StaggeredGrid};
use crate::params::{ClosureProfile, PhysicalParams};
use crate::solver::{solve, Method};
use std::collections::BTreeMap;

/// Closed-form exact solution of the full-dimensional verification problem,
/// parameterized by the bottom interface position.
#[derive(Debug, Clone, Copy)]
pub struct ExactSolutionFull {
    pub y_gamma_pm: f64,
}

impl ExactSolutionFull {
    pub fn new(y_gamma_pm: f64) -> Self {
        Self { y_gamma_pm }
    }

    pub fn u_ff(&self, x: f64, y: f64) -> f64 {
        x.cos() * (y - self.y_gamma_pm).exp()
    }

    pub fn v_ff(&self, x: f64, y: f64) -> f64 {
        x.sin() * (y - self.y_gamma_pm).exp()
    }

    pub fn p_ff(&self, x: f64, y: f64) -> f64 {
        (x + y - self.y_gamma_pm).sin()
    }

    // transition-zone fields coincide with the free-flow ones
    pub fn u_tr(&self, x: f64, y: f64) -> f64 {
        self.u_ff(x, y)
    }

    pub fn v_tr(&self, x: f64, y: f64) -> f64 {
        self.v_ff(x, y)
    }

    pub fn p_tr(&self, x: f64, y: f64) -> f64 {
        self.p_ff(x, y)
    }

    pub fn p_pm(&self, x: f64, y: f64) -> f64 {
        -100.0 * (y - self.y_gamma_pm) * x.sin()
    }

    pub fn velocity(&self, x: f64, y: f64) -> [f64; 2] {
        [self.u_ff(x, y), self.v_ff(x, y)]
    }

    /// Darcy velocity `-(K_pm/mu) grad p_pm`.
    pub fn v_pm(&self, par: &PhysicalParams, x: f64, y: f64) -> [f64; 2] {
        let gx = -100.0 * (y - self.y_gamma_pm) * x.cos();
        let gy = -100.0 * x.sin();
        let kg = par.k_pm.apply([gx, gy]);
        [-kg[0] / par.mu, -kg[1] / par.mu]
    }

    /// Viscous stress `T = mu grad(v) - p I` of the free-flow field.
    pub fn stress_ff(&self, mu: f64, x: f64, y: f64) -> [[f64; 2]; 2] {
        let e = (y - self.y_gamma_pm).exp();
        let (du_dx, du_dy) = (-x.sin() * e, x.cos() * e);
        let (dv_dx, dv_dy) = (x.cos() * e, x.sin() * e);
        let p = self.p_ff(x, y);
        [[mu * du_dx - p, mu * du_dy], [mu * dv_dx, mu * dv_dy - p]]
    }

    /// Traction `T.n` of the free-flow/transition field (identical fields;
    /// pass the viscosity of the region the trace is taken from).
    pub fn traction(&self, mu: f64, x: f64, y: f64, n: [f64; 2]) -> [f64; 2] {
        let t = self.stress_ff(mu, x, y);
        [t[0][0] * n[0] + t[0][1] * n[1], t[1][0] * n[0] + t[1][1] * n[1]]
    }
}

/// Averaged exact solution on the interface line (reduced model).
#[derive(Debug, Clone, Copy)]
pub struct ExactSolutionReduced {
    pub y_gamma_pm: f64,
    pub d: f64,
}

impl ExactSolutionReduced {
    pub fn new(y_gamma_pm: f64, d: f64) -> Self {
        Self { y_gamma_pm, d }
    }

    pub fn bulk(&self) -> ExactSolutionFull {
        ExactSolutionFull::new(self.y_gamma_pm)
    }

    pub fn u_avg(&self, s: f64) -> f64 {
        s.cos() * (self.d.exp() - 1.0) / self.d
    }

    pub fn v_avg(&self, s: f64) -> f64 {
        s.sin() * (self.d.exp() - 1.0) / self.d
    }

    pub fn p_avg(&self, s: f64) -> f64 {
        -((s + self.d).cos() - s.cos()) / self.d
    }

    /// Averaged normal traction along +tau: `mu_eff dV/ds`.
    pub fn t_n(&self, mu_eff: f64, s: f64) -> f64 {
        mu_eff * s.cos() * (self.d.exp() - 1.0) / self.d
    }

    /// Averaged tangential traction along +tau: `mu_eff dU/ds - P`.
    pub fn t_tau(&self, mu_eff: f64, s: f64) -> f64 {
        -mu_eff * s.sin() * (self.d.exp() - 1.0) / self.d - self.p_avg(s)
    }
}

/// Closed-form sources for the full verification problem:
/// `f = mu K^{-1} v - div T + ...` per region (the velocity Laplacian of the
/// exact fields vanishes identically).
pub fn mms_sources_full(params: &PhysicalParams, y_gamma_pm: f64) -> Result<SourceFieldsFull> {
    let ex = ExactSolutionFull::new(y_gamma_pm);
    let kinv = params.k_tr.inverse()?;
    let mu = params.mu;
    let k = params.k_pm;
    let f_ff = move |x: f64, y: f64| {
        let g = (x + y - y_gamma_pm).cos();
        [g, g]
    };
    let f_tr = move |x: f64, y: f64| {
        let g = (x + y - y_gamma_pm).cos();
        let kv = kinv.apply([ex.u_tr(x, y), ex.v_tr(x, y)]);
        [mu * kv[0] + g, mu * kv[1] + g]
    };
    let q = move |x: f64, y: f64| {
        let p_xx = 100.0 * (y - y_gamma_pm) * x.sin();
        let p_xy = -100.0 * x.cos();
        -(k.xx * p_xx + 2.0 * k.xy * p_xy) / mu
    };
    Ok(SourceFieldsFull { f_ff: Box::new(f_ff), f_tr: Box::new(f_tr), q: Box::new(q) })
}

/// Averaged sources on the interface line for the reduced verification
/// problem, integrated in closed form across the transition zone.
pub fn mms_sources_reduced(params: &PhysicalParams, y_gamma_pm: f64, d: f64) -> Result<SourceFieldsReduced> {
    let full = mms_sources_full(params, y_gamma_pm)?;
    let kinv = params.k_tr.inverse()?;
    let mu = params.mu;
    let eavg = (d.exp() - 1.0) / d;
    let f_n = move |s: f64| {
        mu * (kinv.xy * s.cos() + kinv.yy * s.sin()) * eavg + ((s + d).sin() - s.sin()) / d
    };
    let f_tau = move |s: f64| {
        mu * (kinv.xx * s.cos() + kinv.xy * s.sin()) * eavg + ((s + d).sin() - s.sin()) / d
    };
    Ok(SourceFieldsReduced {
        f_ff: full.f_ff,
        q: full.q,
        f_n: Box::new(f_n),
        f_tau: Box::new(f_tau),
    })
}

/// Outer boundary data of the full verification problem: Dirichlet
/// everywhere, sampled from the exact solution.
pub fn mms_bcs_full(y_gamma_pm: f64) -> BoundarySpecFull {
    let ex = ExactSolutionFull::new(y_gamma_pm);
    BoundarySpecFull::dirichlet_everywhere(move |x, y| ex.velocity(x, y), move |x, y| ex.p_pm(x, y))
}

/// Outer boundary data of the reduced verification problem: traction on the
/// left/right free-flow sides, Dirichlet elsewhere, averaged Neumann data at
/// the interface endpoints.
pub fn mms_bcs_reduced(
    params: &PhysicalParams,
    y_gamma_pm: f64,
    d: f64,
    lx: f64,
) -> (BoundarySpecReduced, GammaBoundarySpec) {
    let ex = ExactSolutionFull::new(y_gamma_pm);
    let exr = ExactSolutionReduced::new(y_gamma_pm, d);
    let mu = params.mu;
    let bcs = BoundarySpecReduced {
        ff_left: VelocityBc::Traction(Box::new(move |x, y| ex.traction(mu, x, y, [-1.0, 0.0]))),
        ff_right: VelocityBc::Traction(Box::new(move |x, y| ex.traction(mu, x, y, [1.0, 0.0]))),
        ff_top: VelocityBc::Dirichlet(Box::new(move |x, y| ex.velocity(x, y))),
        pm_left: DarcyBc::Pressure(Box::new(move |x, y| ex.p_pm(x, y))),
        pm_right: DarcyBc::Pressure(Box::new(move |x, y| ex.p_pm(x, y))),
        pm_bottom: DarcyBc::Pressure(Box::new(move |x, y| ex.p_pm(x, y))),
    };
    let mu_eff = params.mu_eff;
    let gamma = GammaBoundarySpec {
        left: GammaEndBc::Neumann { t_n: exr.t_n(mu_eff, 0.0), t_tau: exr.t_tau(mu_eff, 0.0) },
        right: GammaEndBc::Neumann { t_n: exr.t_n(mu_eff, lx), t_tau: exr.t_tau(mu_eff, lx) },
    };
    (bcs, gamma)
}

/// Exact solution sampled at every unknown of a full-model grid.
pub fn exact_vector_full(grid: &StaggeredGrid, ex: &ExactSolutionFull) -> Vec<f64> {
    let l = grid.full();
    let mut x = vec![0.0; grid.dof_count()];
    for j in l.j_pm..l.ny {
        for i in 0..=l.nx {
            x[l.iu(i, j)] = ex.u_ff(grid.x_face(i), grid.y_center(j));
        }
    }
    for j in l.j_pm..=l.ny {
        for i in 0..l.nx {
            x[l.iv(i, j)] = ex.v_ff(grid.x_center(i), grid.y_line(j));
        }
    }
    for j in 0..l.ny {
        for i in 0..l.nx {
            let (xc, yc) = (grid.x_center(i), grid.y_center(j));
            x[l.ip(i, j)] = if j < l.j_pm { ex.p_pm(xc, yc) } else { ex.p_ff(xc, yc) };
        }
    }
    x
}

/// Exact solution sampled at every unknown of a reduced-model grid.
pub fn exact_vector_reduced(grid: &StaggeredGrid, exr: &ExactSolutionReduced) -> Vec<f64> {
    let l = grid.reduced();
    let ex = exr.bulk();
    let mut x = vec![0.0; grid.dof_count()];
    for j in 0..l.ny_ff {
        for i in 0..=l.nx {
            x[l.iu(i, j)] = ex.u_ff(grid.x_face(i), grid.y_ff_center(j));
        }
    }
    for j in 0..=l.ny_ff {
        for i in 0..l.nx {
            x[l.iv(i, j)] = ex.v_ff(grid.x_center(i), grid.y_ff_line(j));
        }
    }
    for j in 0..l.ny_ff {
        for i in 0..l.nx {
            x[l.ipf(i, j)] = ex.p_ff(grid.x_center(i), grid.y_ff_center(j));
        }
    }
    for j in 0..l.ny_pm {
        for i in 0..l.nx {
            x[l.ipp(i, j)] = ex.p_pm(grid.x_center(i), grid.y_pm_center(j));
        }
    }
    for i in 0..=l.nx {
        x[l.igu(i)] = exr.u_avg(grid.x_face(i));
    }
    for k in 0..l.nx {
        x[l.igv(k)] = exr.v_avg(grid.x_center(k));
        x[l.igp(k)] = exr.p_avg(grid.x_center(k));
    }
    x
}

/// Discrete L2 norm of pointwise differences: `sqrt(sum w (a_k - b_k)^2)`.
pub fn l2_error(pairs: impl IntoIterator<Item = (f64, f64)>, w: f64) -> f64 {
    pairs.into_iter().map(|(a, b)| w * (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Per-field discrete L2 errors of a solved full-model state.
pub fn errors_full(grid: &StaggeredGrid, x: &[f64], ex: &ExactSolutionFull) -> BTreeMap<String, f64> {
    let l = grid.full();
    let w = grid.hx * grid.hy;
    let mut out = BTreeMap::new();
    let sel_u = |name: &str, lo: usize, hi: usize, out: &mut BTreeMap<String, f64>| {
        let mut pairs = Vec::new();
        for j in lo..hi {
            for i in 0..=l.nx {
                pairs.push((x[l.iu(i, j)], ex.u_ff(grid.x_face(i), grid.y_center(j))));
            }
        }
        out.insert(name.to_string(), l2_error(pairs, w));
    };
    sel_u("u_ff", l.j_ff, l.ny, &mut out);
    sel_u("u_tr", l.j_pm, l.j_ff, &mut out);
    let sel_v = |name: &str, lo: usize, hi: usize, out: &mut BTreeMap<String, f64>| {
        let mut pairs = Vec::new();
        for j in lo..hi {
            for i in 0..l.nx {
                pairs.push((x[l.iv(i, j)], ex.v_ff(grid.x_center(i), grid.y_line(j))));
            }
        }
        out.insert(name.to_string(), l2_error(pairs, w));
    };
    sel_v("v_ff", l.j_ff, l.ny + 1, &mut out);
    sel_v("v_tr", l.j_pm, l.j_ff + 1, &mut out);
    let sel_p = |name: &str, lo: usize, hi: usize, pm: bool, out: &mut BTreeMap<String, f64>| {
        let mut pairs = Vec::new();
        for j in lo..hi {
            for i in 0..l.nx {
                let (xc, yc) = (grid.x_center(i), grid.y_center(j));
                let e = if pm { ex.p_pm(xc, yc) } else { ex.p_ff(xc, yc) };
                pairs.push((x[l.ip(i, j)], e));
            }
        }
        out.insert(name.to_string(), l2_error(pairs, w));
    };
    sel_p("p_ff", l.j_ff, l.ny, false, &mut out);
    sel_p("p_tr", l.j_pm, l.j_ff, false, &mut out);
    sel_p("p_pm", 0, l.j_pm, true, &mut out);
    out
}

/// Per-field discrete L2 errors of a solved reduced-model state.
pub fn errors_reduced(
    grid: &StaggeredGrid,
    x: &[f64],
    exr: &ExactSolutionReduced,
) -> BTreeMap<String, f64> {
    let l = grid.reduced();
    let ex = exr.bulk();
    let w = grid.hx * grid.hy;
    let mut out = BTreeMap::new();
    let mut pairs = Vec::new();
    for j in 0..l.ny_ff {
        for i in 0..=l.nx {
            pairs.push((x[l.iu(i, j)], ex.u_ff(grid.x_face(i), grid.y_ff_center(j))));
        }
    }
    out.insert("u_ff".into(), l2_error(pairs, w));
    let mut pairs = Vec::new();
    for j in 0..=l.ny_ff {
        for i in 0..l.nx {
            pairs.push((x[l.iv(i, j)], ex.v_ff(grid.x_center(i), grid.y_ff_line(j))));
        }
    }
    out.insert("v_ff".into(), l2_error(pairs, w));
    let mut pairs = Vec::new();
    for j in 0..l.ny_ff {
        for i in 0..l.nx {
            pairs.push((x[l.ipf(i, j)], ex.p_ff(grid.x_center(i), grid.y_ff_center(j))));
        }
    }
    out.insert("p_ff".into(), l2_error(pairs, w));
    let mut pairs = Vec::new();
    for j in 0..l.ny_pm {
        for i in 0..l.nx {
            pairs.push((x[l.ipp(i, j)], ex.p_pm(grid.x_center(i), grid.y_pm_center(j))));
        }
    }
    out.insert("p_pm".into(), l2_error(pairs, w));
    let pairs: Vec<_> = (0..=l.nx).map(|i| (x[l.igu(i)], exr.u_avg(grid.x_face(i)))).collect();
    out.insert("U".into(), l2_error(pairs, grid.hx));
    let pairs: Vec<_> = (0..l.nx).map(|k| (x[l.igv(k)], exr.v_avg(grid.x_center(k)))).collect();
    out.insert("V".into(), l2_error(pairs, grid.hx));
    let pairs: Vec<_> = (0..l.nx).map(|k| (x[l.igp(k)], exr.p_avg(grid.x_center(k)))).collect();
    out.insert("P".into(), l2_error(pairs, grid.hx));
    out
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone)]
pub struct ConvergenceLevel {
    pub nx: usize,
    pub h: f64,
    pub errors: BTreeMap<String, f64>,
    /// Consistency residual of the exact solution injected into the operator.
    pub injected_residual: f64,
    pub solve_wall_s: f64,
}

/// Full report of a convergence study: per-level errors, pairwise orders
/// and least-squares slopes.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub model: ModelKind,
    pub levels: Vec<ConvergenceLevel>,
    /// Least-squares slope of log(error) vs log(h) per field; NaN when a
    /// field's error vanishes on some level.
    pub orders: BTreeMap<String, f64>,
}

impl ConvergenceReport {
    pub fn pairwise_orders(&self, field: &str) -> Vec<f64> {
        let mut out = Vec::new();
        for w in self.levels.windows(2) {
            let (e0, e1) = (w[0].errors[field], w[1].errors[field]);
            out.push((e0 / e1).log2() / (w[1].nx as f64 / w[0].nx as f64).log2());
        }
        out
    }

    pub fn residual_order(&self) -> f64 {
        let pts: Vec<(f64, f64)> =
            self.levels.iter().map(|l| (l.h.ln(), l.injected_residual.ln())).collect();
        least_squares_slope(&pts)
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Geometry of the full-model verification setup.
pub fn mms_full_geometry(nx: usize) -> GeometryConfig {
    GeometryConfig { lx: 1.0, ly: 2.0, y_gamma_pm: 0.9, y_gamma_ff: 1.1, nx, ny: 2 * nx }
}

/// Geometry of the reduced-model verification setup (narrow strip).
pub fn mms_reduced_geometry(nx: usize) -> GeometryConfig {
    let d = 5e-4;
    GeometryConfig { lx: 1.0, ly: 1.0 + d, y_gamma_pm: 0.5, y_gamma_ff: 0.5 + d, nx, ny: nx }
}

/// Assemble and solve one verification level; returns the level record.
pub fn run_mms_level(model: ModelKind, nx: usize, params: &PhysicalParams) -> Result<ConvergenceLevel> {
    match model {
        ModelKind::Full => {
            let geo = mms_full_geometry(nx);
            let grid = build_grid(geo, ModelKind::Full)?;
            let ex = ExactSolutionFull::new(geo.y_gamma_pm);
            let sources = mms_sources_full(params, geo.y_gamma_pm)?;
            let bcs = mms_bcs_full(geo.y_gamma_pm);
            let sys = assemble_full(&grid, params, &sources, &bcs)?;
            let xe = exact_vector_full(&grid, &ex);
            let injected_residual = sys.consistency_residual(&xe);
            let rep = solve(&sys, Method::DirectLu, f64::NAN)?;
            Ok(ConvergenceLevel {
                nx,
                h: grid.hx,
                errors: errors_full(&grid, &rep.x, &ex),
                injected_residual,
                solve_wall_s: rep.wall_s,
            })
        }
        ModelKind::Reduced => {
            let geo = mms_reduced_geometry(nx);
            let grid = build_grid(geo, ModelKind::Reduced)?;
            let exr = ExactSolutionReduced::new(geo.y_gamma_pm, geo.d());
            let sources = mms_sources_reduced(params, geo.y_gamma_pm, geo.d())?;
            let (bcs, gbcs) = mms_bcs_reduced(params, geo.y_gamma_pm, geo.d(), geo.lx);
            let sys = assemble_reduced(&grid, params, ClosureProfile::Quadratic, &sources, &bcs, &gbcs)?;
            let xe = exact_vector_reduced(&grid, &exr);
            let injected_residual = sys.consistency_residual(&xe);
            let rep = solve(&sys, Method::DirectLu, f64::NAN)?;
            Ok(ConvergenceLevel {
                nx,
                h: grid.hx,
                errors: errors_reduced(&grid, &rep.x, &exr),
                injected_residual,
                solve_wall_s: rep.wall_s,
            })
        }
    }
}

/// Run the verification problem on a doubling grid sequence and report
/// errors and observed orders.
pub fn convergence_study(
    model: ModelKind,
    grid_sequence: &[usize],
    params: &PhysicalParams,
) -> Result<ConvergenceReport> {
    if grid_sequence.len() < 3 {
        return Err(Error::Validation(vec!["need at least 3 grid levels".into()]));
    }
    for w in grid_sequence.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::Validation(vec![format!(
                "grid sequence must refine by 2 (got {} -> {})",
                w[0], w[1]
            )]));
        }
    }
    let mut levels = Vec::new();
    for &nx in grid_sequence {
        levels.push(run_mms_level(model, nx, params)?);
    }
    let mut orders = BTreeMap::new();
    for field in levels[0].errors.keys() {
        let mut pts = Vec::new();
        let mut degenerate = false;
        for l in &levels {
            let e = l.errors[field];
            if e <= 0.0 {
                degenerate = true;
                break;
            }
            pts.push((l.h.ln(), e.ln()));
        }
        let slope = if degenerate { f64::NAN } else { least_squares_slope(&pts) };
        orders.insert(field.clone(), slope);
    }
    Ok(ConvergenceReport { model, levels, orders })
}

/// Helper for grids in tests and examples: the layout kind of a grid.
pub fn layout_kind(grid: &StaggeredGrid) -> ModelKind {
    match grid.layout {
        Layout::Full(_) => ModelKind::Full,
        Layout::Reduced(_) => ModelKind::Reduced,
    }
}

/// Central finite-difference helpers: the independent oracle used to verify
/// the hard-coded closed forms.
pub mod fd {
    /// First partial derivatives with step `h`.
    pub fn grad(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> [f64; 2] {
        [
            (f(x + h, y) - f(x - h, y)) / (2.0 * h),
            (f(x, y + h) - f(x, y - h)) / (2.0 * h),
        ]
    }

    /// Laplacian with step `h`.
    pub fn laplacian(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h)
            + (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h)
    }

    /// Mixed second derivative with step `h`.
    pub fn d2_dxdy(f: impl Fn(f64, f64) -> f64, x: f64, y: f64, h: f64) -> f64 {
        (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h)) / (4.0 * h * h)
    }

    /// Composite Simpson quadrature of `f` over `[a, b]` with `n` panels
    /// (n even).
    pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        assert!(n % 2 == 0);
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for k in 1..n {
            s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }
}
