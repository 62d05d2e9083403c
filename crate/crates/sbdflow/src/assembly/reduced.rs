//! Monolithic assembly of the hybrid-dimensional model: bulk Stokes above
//! and Darcy below the interface line, plus the averaged 1D momentum and
//! mass equations on it, coupled through the transmission conditions.
//!
//! Interface staggering mirrors MAC: the tangential average U sits at face
//! abscissae, the normal average V and the averaged pressure P at cell
//! centers. Every discrete trace expression (free-flow traces on gamma_ff,
//! porous pressure on gamma_pm, the eliminated porous normal velocity) is
//! built once and shared by all rows that reference it, so the stiff
//! transmission couplings are collocation-exact.

use crate::assembly::bc::{
    BoundarySpecReduced, DarcyBc, GammaBoundarySpec, GammaEndBc, SourceFieldsReduced, VelocityBc,
};
use crate::error::{Error, Result};
use crate::grid::StaggeredGrid;
use crate::params::{closure_params, ClosureProfile, PhysicalParams};
use crate::system::{LinearSystem, RowClass, SystemBuilder};

/// Coefficients of the quadratic tangential-velocity closure.
#[derive(Debug, Clone, Copy)]
pub struct TangentialClosure {
    /// `C_tt`: coefficient of the averaged tangential velocity in the
    /// tangential momentum equation.
    pub c_tt: f64,
    /// `C_uff`: coupling to the free-flow tangential trace.
    pub c_uff: f64,
    /// `C_2`: trace coefficient of the tangential transmission condition.
    pub c_2: f64,
}

impl TangentialClosure {
    pub fn new(par: &PhysicalParams, d: f64) -> Self {
        let sk = par.k_pm_ref().sqrt();
        let den = d * (par.alpha * d + 4.0 * sk);
        Self {
            c_tt: par.mu_eff * (12.0 * par.alpha * d + 12.0 * sk) / den,
            c_uff: par.mu_eff * (6.0 * par.alpha * d + 12.0 * sk) / den,
            c_2: par.mu_eff * (4.0 * par.alpha * d + 12.0 * sk) / den,
        }
    }
}

/// Tangential closure values: the transition-zone tangential velocity on
/// gamma_pm and its normal derivative on gamma_ff, from the averaged
/// velocity and the free-flow trace.
pub fn tangential_closure(par: &PhysicalParams, d: f64, v_tau: f64, u_ff_at_gamma: f64) -> (f64, f64) {
    let sk = par.k_pm_ref().sqrt();
    let den = par.alpha * d + 4.0 * sk;
    let at_pm = 2.0 * sk * (3.0 * v_tau - u_ff_at_gamma) / den;
    let dn_at_ff = (-6.0 * (par.alpha * d + 2.0 * sk) * v_tau
        + 4.0 * (par.alpha * d + 3.0 * sk) * u_ff_at_gamma)
        / (d * den);
    (at_pm, dn_at_ff)
}

/// Normal closure derivatives on the two sides of the transition zone,
/// scaled by the thickness: `d dv/dn`.
pub fn normal_closure(
    profile: ClosureProfile,
    d: f64,
    v_n: f64,
    v_ff_n: f64,
    v_pm_n: f64,
) -> Result<(f64, f64)> {
    let (l1, l2) = closure_params(profile)?;
    let at_ff = (-(l1 + l2) * v_n + l1 * v_ff_n + l2 * v_pm_n) / d;
    let at_pm = ((l1 + l2) * v_n - l2 * v_ff_n - l1 * v_pm_n) / d;
    Ok((at_ff, at_pm))
}

pub fn assemble_reduced(
    grid: &StaggeredGrid,
    params: &PhysicalParams,
    profile: ClosureProfile,
    sources: &SourceFieldsReduced,
    bcs: &BoundarySpecReduced,
    gamma_bcs: &GammaBoundarySpec,
) -> Result<LinearSystem> {
    params.validate()?;
    let (l1, l2) = closure_params(profile)?;
    let l = grid.reduced().clone();
    if l.nx < 3 {
        return Err(Error::Assembly("grid too coarse for second-order stencils".into()));
    }
    let d = grid.geometry.d();
    let kinv = params.k_tr.inverse()?;
    let asm = ReducedAssembler {
        grid,
        nx: l.nx,
        ny_ff: l.ny_ff,
        ny_pm: l.ny_pm,
        hx: grid.hx,
        hy: grid.hy,
        d,
        par: *params,
        l1,
        l2,
        m_nn: kinv.yy,
        m_nt: kinv.xy,
        m_tt: kinv.xx,
        tc: TangentialClosure::new(params, d),
        builder: SystemBuilder::new(grid.dof_count()),
    };
    asm.run(sources, bcs, gamma_bcs)
}

struct ReducedAssembler<'g> {
    grid: &'g StaggeredGrid,
    nx: usize,
    ny_ff: usize,
    ny_pm: usize,
    hx: f64,
    hy: f64,
    d: f64,
    par: PhysicalParams,
    l1: f64,
    l2: f64,
    m_nn: f64,
    m_nt: f64,
    m_tt: f64,
    tc: TangentialClosure,
    builder: SystemBuilder,
}

type Lin = Vec<(usize, f64)>;

impl<'g> ReducedAssembler<'g> {
    fn friction(&self) -> crate::params::SymTensor2 {
        let s = self.par.mu / self.par.k_tr_ref().sqrt();
        crate::params::SymTensor2::new(s * self.par.beta.xx, s * self.par.beta.xy, s * self.par.beta.yy)
    }

    /// Porous pressure trace on gamma_pm under cell-center column k.
    fn ppm_trace(&self, k: usize) -> Lin {
        let l = self.grid.reduced();
        vec![(l.ipp(k, self.ny_pm - 1), 1.5), (l.ipp(k, self.ny_pm - 2), -0.5)]
    }

    /// Eliminated porous normal velocity `v_pm . n` (upward) on gamma_pm:
    /// the gamma_pm transmission condition solved for the trace.
    fn v_pm_normal(&self, k: usize) -> Lin {
        let l = self.grid.reduced();
        let c = self.d / (self.par.mu_eff * self.l1);
        let mut e = vec![
            (l.igv(k), (self.l1 + self.l2) / self.l1),
            (l.igp(k), -c),
            (l.iv(k, 0), -self.l2 / self.l1),
        ];
        for (col, w) in self.ppm_trace(k) {
            e.push((col, c * w));
        }
        e
    }

    /// Shared tangential trace of the free flow on gamma_ff at face
    /// abscissa i (interior faces), from the transmission ghost relation.
    /// With friction the relation is
    /// `mu (u0-gh)/hy = -C_uff U_i + (C_2 + c11) t + c12 vbar`, `t=(u0+gh)/2`.
    fn face_trace(&self, i: usize) -> Lin {
        let l = self.grid.reduced();
        let c = self.friction();
        let den = self.par.mu / self.hy + (self.tc.c_2 + c.xx) / 2.0;
        let mut e = vec![
            (l.iu(i, 0), (self.par.mu / self.hy) / den),
            (l.igu(i), self.tc.c_uff / (2.0 * den)),
        ];
        if c.xy != 0.0 {
            e.push((l.iv(i - 1, 0), -c.xy / (4.0 * den)));
            e.push((l.iv(i, 0), -c.xy / (4.0 * den)));
        }
        e
    }

    /// Ghost below the first free-flow u row, eliminated through the
    /// tangential transmission condition; `gh = 2 t - u0`.
    fn u_ghost(&self, i: usize) -> Lin {
        let l = self.grid.reduced();
        let mut e = self.face_trace(i);
        for (_, w) in e.iter_mut() {
            *w *= 2.0;
        }
        // subtract u0
        for entry in e.iter_mut() {
            if entry.0 == l.iu(i, 0) {
                entry.1 -= 1.0;
            }
        }
        e
    }

    /// Tangential trace at the cell-center abscissa k (average of the two
    /// face traces; boundary faces fall back to one-sided extrapolation).
    fn center_u_trace(&self, k: usize) -> Lin {
        let l = self.grid.reduced();
        let mut e = Vec::new();
        for i in [k, k + 1] {
            if i == 0 || i == self.nx {
                e.push((l.iu(i, 0), 0.75));
                e.push((l.iu(i, 1), -0.25));
            } else {
                for (col, w) in self.face_trace(i) {
                    e.push((col, 0.5 * w));
                }
            }
        }
        e
    }

    fn add_lin(&mut self, r: usize, coeffs: &Lin, scale: f64) {
        for &(col, w) in coeffs {
            self.builder.add(r, col, scale * w);
        }
    }

    fn run(
        mut self,
        sources: &SourceFieldsReduced,
        bcs: &BoundarySpecReduced,
        gamma_bcs: &GammaBoundarySpec,
    ) -> Result<LinearSystem> {
        self.ff_u_rows(sources, bcs);
        self.ff_v_rows(sources, bcs);
        self.ff_continuity_rows();
        self.darcy_rows(sources, bcs);
        self.gamma_rows(sources, gamma_bcs);
        self.builder.finalize()
    }

    // --------------------------------------------------------- free flow

    fn ff_u_rows(&mut self, sources: &SourceFieldsReduced, bcs: &BoundarySpecReduced) {
        let l = self.grid.reduced().clone();
        let (nx, hx, hy) = (self.nx, self.hx, self.hy);
        let mu = self.par.mu;
        let area = hx * hy;
        let ly = self.grid.geometry.ly;
        for j in 0..self.ny_ff {
            let y = self.grid.y_ff_center(j);
            for i in 0..=nx {
                let x = self.grid.x_face(i);
                let r = l.iu(i, j);
                if i == 0 || i == nx {
                    let bc = if i == 0 { &bcs.ff_left } else { &bcs.ff_right };
                    match bc {
                        VelocityBc::Dirichlet(g) => {
                            self.builder.add(r, r, 1.0);
                            self.builder.add_rhs(r, g(x, y)[0]);
                        }
                        VelocityBc::Traction(t) => {
                            if i == 0 {
                                self.builder.add(r, l.iu(0, j), -mu * -3.0 / (2.0 * hx));
                                self.builder.add(r, l.iu(1, j), -mu * 4.0 / (2.0 * hx));
                                self.builder.add(r, l.iu(2, j), -mu * -1.0 / (2.0 * hx));
                                self.builder.add(r, l.ipf(0, j), 1.5);
                                self.builder.add(r, l.ipf(1, j), -0.5);
                            } else {
                                self.builder.add(r, l.iu(nx, j), mu * 3.0 / (2.0 * hx));
                                self.builder.add(r, l.iu(nx - 1, j), -mu * 4.0 / (2.0 * hx));
                                self.builder.add(r, l.iu(nx - 2, j), mu / (2.0 * hx));
                                self.builder.add(r, l.ipf(nx - 1, j), -1.5);
                                self.builder.add(r, l.ipf(nx - 2, j), 0.5);
                            }
                            self.builder.add_rhs(r, t(x, y)[0]);
                        }
                    }
                    self.builder.set_row_meta(r, RowClass::Boundary, area);
                    continue;
                }
                let mut rhs = (sources.f_ff)(x, y)[0];
                let mut diag = 2.0 * mu / (hx * hx) + 2.0 * mu / (hy * hy);
                let mut class = RowClass::Interior;
                self.builder.add(r, l.iu(i - 1, j), -mu / (hx * hx));
                self.builder.add(r, l.iu(i + 1, j), -mu / (hx * hx));
                if j == 0 {
                    // transmission ghost below gamma_ff
                    let gh = self.u_ghost(i);
                    self.add_lin(r, &gh, -mu / (hy * hy));
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iu(i, j - 1), -mu / (hy * hy));
                }
                if j == self.ny_ff - 1 {
                    match &bcs.ff_top {
                        VelocityBc::Dirichlet(g) => {
                            diag += mu / (hy * hy);
                            rhs += 2.0 * g(x, ly)[0] * mu / (hy * hy);
                        }
                        VelocityBc::Traction(t) => {
                            diag += -mu / (hy * hy);
                            rhs += t(x, ly)[0] / hy;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iu(i, j + 1), -mu / (hy * hy));
                }
                self.builder.add(r, r, diag);
                self.builder.add(r, l.ipf(i, j), 1.0 / hx);
                self.builder.add(r, l.ipf(i - 1, j), -1.0 / hx);
                self.builder.add_rhs(r, rhs);
                self.builder.set_row_meta(r, class, area);
            }
        }
    }

    fn ff_v_rows(&mut self, sources: &SourceFieldsReduced, bcs: &BoundarySpecReduced) {
        let l = self.grid.reduced().clone();
        let (nx, hx, hy) = (self.nx, self.hx, self.hy);
        let mu = self.par.mu;
        let area = hx * hy;
        let lx = self.grid.geometry.lx;
        let ly = self.grid.geometry.ly;
        let cnn = self.par.mu_eff * (self.l1 * self.l1 - self.l2 * self.l2) / (self.l1 * self.d);
        let l12 = (self.l1 + self.l2) / self.l1;
        for j in 0..=self.ny_ff {
            let y = self.grid.y_ff_line(j);
            for i in 0..nx {
                let x = self.grid.x_center(i);
                let r = l.iv(i, j);
                if j == self.ny_ff {
                    match &bcs.ff_top {
                        VelocityBc::Dirichlet(g) => {
                            self.builder.add(r, r, 1.0);
                            self.builder.add_rhs(r, g(x, ly)[1]);
                        }
                        VelocityBc::Traction(t) => {
                            let jn = self.ny_ff;
                            self.builder.add(r, l.iv(i, jn), mu * 3.0 / (2.0 * hy));
                            self.builder.add(r, l.iv(i, jn - 1), -mu * 4.0 / (2.0 * hy));
                            self.builder.add(r, l.iv(i, jn - 2), mu / (2.0 * hy));
                            self.builder.add(r, l.ipf(i, jn - 1), -1.5);
                            self.builder.add(r, l.ipf(i, jn - 2), 0.5);
                            self.builder.add_rhs(r, t(x, ly)[1]);
                        }
                    }
                    self.builder.set_row_meta(r, RowClass::Boundary, area);
                    continue;
                }
                if j == 0 {
                    // normal transmission row (v_pm.n eliminated):
                    // mu dv/dy - p_ff = -cnn V - l12 P + cnn v0 + (l2/l1) p_pm + friction_n
                    self.builder.add(r, l.iv(i, 0), mu * -3.0 / (2.0 * hy) - cnn);
                    self.builder.add(r, l.iv(i, 1), mu * 4.0 / (2.0 * hy));
                    self.builder.add(r, l.iv(i, 2), mu * -1.0 / (2.0 * hy));
                    self.builder.add(r, l.ipf(i, 0), -1.5);
                    self.builder.add(r, l.ipf(i, 1), 0.5);
                    self.builder.add(r, l.igv(i), cnn);
                    self.builder.add(r, l.igp(i), l12);
                    let ppm = self.ppm_trace(i);
                    self.add_lin(r, &ppm, -self.l2 / self.l1);
                    let c = self.friction();
                    if c.yy != 0.0 {
                        self.builder.add(r, l.iv(i, 0), -c.yy);
                    }
                    if c.xy != 0.0 {
                        let tr = self.center_u_trace(i);
                        self.add_lin(r, &tr, -c.xy);
                    }
                    self.builder.set_row_meta(r, RowClass::Interface, area);
                    continue;
                }
                let mut rhs = (sources.f_ff)(x, y)[1];
                let mut diag = 2.0 * mu / (hx * hx) + 2.0 * mu / (hy * hy);
                let mut class = RowClass::Interior;
                self.builder.add(r, l.iv(i, j - 1), -mu / (hy * hy));
                self.builder.add(r, l.iv(i, j + 1), -mu / (hy * hy));
                if i == 0 {
                    match &bcs.ff_left {
                        VelocityBc::Dirichlet(g) => {
                            diag += mu / (hx * hx);
                            rhs += 2.0 * g(0.0, y)[1] * mu / (hx * hx);
                        }
                        VelocityBc::Traction(t) => {
                            diag += -mu / (hx * hx);
                            rhs += t(0.0, y)[1] / hx;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iv(i - 1, j), -mu / (hx * hx));
                }
                if i == nx - 1 {
                    match &bcs.ff_right {
                        VelocityBc::Dirichlet(g) => {
                            diag += mu / (hx * hx);
                            rhs += 2.0 * g(lx, y)[1] * mu / (hx * hx);
                        }
                        VelocityBc::Traction(t) => {
                            diag += -mu / (hx * hx);
                            rhs += t(lx, y)[1] / hx;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iv(i + 1, j), -mu / (hx * hx));
                }
                self.builder.add(r, r, diag);
                self.builder.add(r, l.ipf(i, j), 1.0 / hy);
                self.builder.add(r, l.ipf(i, j - 1), -1.0 / hy);
                self.builder.add_rhs(r, rhs);
                self.builder.set_row_meta(r, class, area);
            }
        }
    }

    fn ff_continuity_rows(&mut self) {
        let l = self.grid.reduced().clone();
        let (hx, hy) = (self.hx, self.hy);
        for j in 0..self.ny_ff {
            for i in 0..self.nx {
                let r = l.ipf(i, j);
                self.builder.add(r, l.iu(i + 1, j), 1.0 / hx);
                self.builder.add(r, l.iu(i, j), -1.0 / hx);
                self.builder.add(r, l.iv(i, j + 1), 1.0 / hy);
                self.builder.add(r, l.iv(i, j), -1.0 / hy);
                self.builder.set_row_meta(r, RowClass::Interior, hx * hy);
            }
        }
    }

    // ------------------------------------------------------ porous medium

    fn darcy_rows(&mut self, sources: &SourceFieldsReduced, bcs: &BoundarySpecReduced) {
        let l = self.grid.reduced().clone();
        let (nx, hx, hy) = (self.nx, self.hx, self.hy);
        let k = self.par.k_pm;
        let mu = self.par.mu;
        for j in 0..self.ny_pm {
            let y = self.grid.y_pm_center(j);
            for i in 0..nx {
                let x = self.grid.x_center(i);
                let r = l.ipp(i, j);
                let mut class = RowClass::Interior;
                self.builder.add_rhs(r, (sources.q)(x, y));
                for (right, ii) in [(false, i.wrapping_sub(1)), (true, i + 1)] {
                    let sgn = if right { 1.0 } else { -1.0 };
                    if (right && i + 1 < nx) || (!right && i > 0) {
                        self.builder.add(r, l.ipp(i, j), k.xx / (mu * hx * hx));
                        self.builder.add(r, l.ipp(ii, j), -k.xx / (mu * hx * hx));
                        if k.xy != 0.0 {
                            self.cross_dpdy(r, [ii.min(i), ii.max(i)], j, -sgn * k.xy / (mu * hx));
                        }
                    } else {
                        let (xb, bc) = if right {
                            (self.grid.geometry.lx, &bcs.pm_right)
                        } else {
                            (0.0, &bcs.pm_left)
                        };
                        class = RowClass::NearBoundary;
                        match bc {
                            DarcyBc::Pressure(g) => {
                                let pb = g(xb, y);
                                self.builder.add(r, l.ipp(i, j), 2.0 * k.xx / (mu * hx * hx));
                                self.builder.add_rhs(r, 2.0 * k.xx * pb / (mu * hx * hx));
                                if k.xy != 0.0 {
                                    let dpdy = (g(xb, y + 0.5 * hy) - g(xb, y - 0.5 * hy)) / hy;
                                    self.builder.add_rhs(r, sgn * k.xy * dpdy / (mu * hx));
                                }
                            }
                            DarcyBc::NormalFlux(g) => {
                                self.builder.add_rhs(r, -g(xb, y) / hx);
                            }
                        }
                    }
                }
                if j > 0 {
                    self.builder.add(r, l.ipp(i, j), k.yy / (mu * hy * hy));
                    self.builder.add(r, l.ipp(i, j - 1), -k.yy / (mu * hy * hy));
                    if k.xy != 0.0 {
                        self.cross_dpdx(r, i, [j - 1, j], k.xy / (mu * hy));
                    }
                } else {
                    class = RowClass::NearBoundary;
                    match &bcs.pm_bottom {
                        DarcyBc::Pressure(g) => {
                            let pb = g(x, 0.0);
                            self.builder.add(r, l.ipp(i, 0), 2.0 * k.yy / (mu * hy * hy));
                            self.builder.add_rhs(r, 2.0 * k.yy * pb / (mu * hy * hy));
                            if k.xy != 0.0 {
                                let dpdx = (g(x + 0.5 * hx, 0.0) - g(x - 0.5 * hx, 0.0)) / hx;
                                self.builder.add_rhs(r, -k.xy * dpdx / (mu * hy));
                            }
                        }
                        DarcyBc::NormalFlux(g) => {
                            self.builder.add_rhs(r, -g(x, 0.0) / hy);
                        }
                    }
                }
                if j < self.ny_pm - 1 {
                    self.builder.add(r, l.ipp(i, j), k.yy / (mu * hy * hy));
                    self.builder.add(r, l.ipp(i, j + 1), -k.yy / (mu * hy * hy));
                    if k.xy != 0.0 {
                        self.cross_dpdx(r, i, [j, j + 1], -k.xy / (mu * hy));
                    }
                } else {
                    // top flux is the transmitted porous normal velocity
                    let e = self.v_pm_normal(i);
                    self.add_lin(r, &e, 1.0 / hy);
                    class = RowClass::NearBoundary;
                }
                self.builder.set_row_meta(r, class, hx * hy);
            }
        }
    }

    fn cross_dpdy(&mut self, r: usize, cols: [usize; 2], j: usize, scale: f64) {
        let l = self.grid.reduced().clone();
        let hy = self.hy;
        let (jm, jp, denom) = if j == 0 {
            (j, j + 1, hy)
        } else if j + 1 >= self.ny_pm {
            (j - 1, j, hy)
        } else {
            (j - 1, j + 1, 2.0 * hy)
        };
        for &c in &cols {
            self.builder.add(r, l.ipp(c, jp), scale * 0.5 / denom);
            self.builder.add(r, l.ipp(c, jm), -scale * 0.5 / denom);
        }
    }

    fn cross_dpdx(&mut self, r: usize, i: usize, rows: [usize; 2], scale: f64) {
        let l = self.grid.reduced().clone();
        let hx = self.hx;
        let (im, ip_, denom) = if i == 0 {
            (i, i + 1, hx)
        } else if i + 1 >= self.nx {
            (i - 1, i, hx)
        } else {
            (i - 1, i + 1, 2.0 * hx)
        };
        for &row in &rows {
            self.builder.add(r, l.ipp(ip_, row), scale * 0.5 / denom);
            self.builder.add(r, l.ipp(im, row), -scale * 0.5 / denom);
        }
    }

    // ----------------------------------------------------- interface rows

    fn gamma_rows(&mut self, sources: &SourceFieldsReduced, gamma_bcs: &GammaBoundarySpec) {
        let l = self.grid.reduced().clone();
        let (nx, hx) = (self.nx, self.hx);
        let d = self.d;
        let (mu, mue) = (self.par.mu, self.par.mu_eff);
        let cnn = mue * (self.l1 * self.l1 - self.l2 * self.l2) / (self.l1 * d);
        let l12 = (self.l1 + self.l2) / self.l1;

        // mass and normal momentum rows at cell centers
        for kcell in 0..nx {
            let s = self.grid.x_center(kcell);

            // (a) averaged mass: v_ff.n - v_pm.n + d dU/ds = 0  -> P row
            let r = l.igp(kcell);
            self.builder.add(r, l.iv(kcell, 0), 1.0);
            let e = self.v_pm_normal(kcell);
            self.add_lin(r, &e, -1.0);
            self.builder.add(r, l.igu(kcell + 1), d / hx);
            self.builder.add(r, l.igu(kcell), -d / hx);
            self.builder.set_row_meta(r, RowClass::Interface, hx);

            // (b) averaged normal momentum -> V row
            let r = l.igv(kcell);
            self.builder.add(r, l.igv(kcell), cnn + d * mu * self.m_nn);
            if self.m_nt != 0.0 {
                self.builder.add(r, l.igu(kcell), 0.5 * d * mu * self.m_nt);
                self.builder.add(r, l.igu(kcell + 1), 0.5 * d * mu * self.m_nt);
            }
            self.builder.add(r, l.igp(kcell), l12);
            self.builder.add(r, l.iv(kcell, 0), -cnn);
            let ppm = self.ppm_trace(kcell);
            self.add_lin(r, &ppm, -l12);
            self.builder.add_rhs(r, d * (sources.f_n)(s));
            let mut class = RowClass::Interface;
            // -d mu_eff d2V/ds2 in flux form
            if kcell > 0 {
                self.builder.add(r, l.igv(kcell), d * mue / (hx * hx));
                self.builder.add(r, l.igv(kcell - 1), -d * mue / (hx * hx));
            } else {
                match gamma_bcs.left {
                    GammaEndBc::Neumann { t_n, .. } => self.builder.add_rhs(r, -d * t_n / hx),
                    GammaEndBc::Dirichlet { u_n, .. } => {
                        self.builder.add(r, l.igv(0), 2.0 * d * mue / (hx * hx));
                        self.builder.add_rhs(r, 2.0 * d * mue * u_n / (hx * hx));
                    }
                }
                class = RowClass::NearBoundary;
            }
            if kcell < nx - 1 {
                self.builder.add(r, l.igv(kcell), d * mue / (hx * hx));
                self.builder.add(r, l.igv(kcell + 1), -d * mue / (hx * hx));
            } else {
                match gamma_bcs.right {
                    GammaEndBc::Neumann { t_n, .. } => self.builder.add_rhs(r, d * t_n / hx),
                    GammaEndBc::Dirichlet { u_n, .. } => {
                        self.builder.add(r, l.igv(nx - 1), 2.0 * d * mue / (hx * hx));
                        self.builder.add_rhs(r, 2.0 * d * mue * u_n / (hx * hx));
                    }
                }
                class = RowClass::NearBoundary;
            }
            self.builder.set_row_meta(r, class, hx);
        }

        // (c) averaged tangential momentum -> U rows at faces
        for i in 0..=nx {
            let s = self.grid.x_face(i);
            let r = l.igu(i);
            if i == 0 || i == nx {
                let bc = if i == 0 { gamma_bcs.left } else { gamma_bcs.right };
                match bc {
                    GammaEndBc::Dirichlet { u_tau, .. } => {
                        self.builder.add(r, r, 1.0);
                        self.builder.add_rhs(r, u_tau);
                    }
                    GammaEndBc::Neumann { t_tau, .. } => {
                        // mu_eff dU/ds - P = t_tau, one-sided second order
                        let sg = if i == 0 { 1.0 } else { -1.0 };
                        let (i0, i1, i2) = if i == 0 { (0, 1, 2) } else { (nx, nx - 1, nx - 2) };
                        let (k0, k1) = if i == 0 { (0, 1) } else { (nx - 1, nx - 2) };
                        self.builder.add(r, l.igu(i0), sg * mue * -3.0 / (2.0 * hx));
                        self.builder.add(r, l.igu(i1), sg * mue * 4.0 / (2.0 * hx));
                        self.builder.add(r, l.igu(i2), sg * mue * -1.0 / (2.0 * hx));
                        self.builder.add(r, l.igp(k0), -1.5);
                        self.builder.add(r, l.igp(k1), 0.5);
                        self.builder.add_rhs(r, t_tau);
                    }
                }
                self.builder.set_row_meta(r, RowClass::Boundary, hx);
                continue;
            }
            if self.m_nt != 0.0 {
                self.builder.add(r, l.igv(i - 1), 0.5 * d * mu * self.m_nt);
                self.builder.add(r, l.igv(i), 0.5 * d * mu * self.m_nt);
            }
            self.builder.add(r, l.igu(i), self.tc.c_tt + d * mu * self.m_tt);
            let t = self.face_trace(i);
            self.add_lin(r, &t, -self.tc.c_uff);
            self.builder.add_rhs(r, d * (sources.f_tau)(s));
            // -d mu_eff d2U/ds2 + d dP/ds, compact at the face
            self.builder.add(r, l.igu(i), 2.0 * d * mue / (hx * hx));
            self.builder.add(r, l.igu(i - 1), -d * mue / (hx * hx));
            self.builder.add(r, l.igu(i + 1), -d * mue / (hx * hx));
            self.builder.add(r, l.igp(i), d / hx);
            self.builder.add(r, l.igp(i - 1), -d / hx);
            self.builder.set_row_meta(r, RowClass::Interface, hx);
        }
    }
}
