//! Monolithic assembly of the full-dimensional Stokes-Brinkman-Darcy model.
//!
//! MAC layout: u on vertical faces, v on horizontal faces, p at cell centers.
//! Stokes momentum uses the non-symmetric stress `T = mu grad(v) - p I`;
//! Brinkman adds the drag `mu K_tr^{-1} v` and uses `mu_eff` in the stress.
//! The porous medium carries pressure only (primal Darcy form).
//!
//! Interface conditions: on gamma_ff the normal velocity is a shared face
//! unknown, tangential continuity and the tangential stress jump eliminate a
//! matched ghost pair, and the normal stress jump is the row of the shared
//! face. On gamma_pm the force balance is the row of the boundary face, the
//! porous medium receives the transition-zone normal velocity as its
//! top-face flux, and Beavers-Joseph-Saffman closes the tangential ghost.
//! With a single transition-zone cell row the two normal-direction rows
//! switch to a conservative flux-form variant (one-sided second-order
//! stencils need two rows).

use crate::assembly::bc::{BoundarySpecFull, DarcyBc, SourceFieldsFull, VelocityBc};
use crate::error::{Error, Result};
use crate::grid::{Region, StaggeredGrid};
use crate::params::PhysicalParams;
use crate::system::{LinearSystem, RowClass, SystemBuilder};

pub fn assemble_full(
    grid: &StaggeredGrid,
    params: &PhysicalParams,
    sources: &SourceFieldsFull,
    bcs: &BoundarySpecFull,
) -> Result<LinearSystem> {
    params.validate()?;
    bcs.check_coverage(grid.geometry.is_stokes_box())?;
    let l = grid.full().clone();
    if l.nx < 3 || l.ny - l.j_pm < 3 {
        return Err(Error::Assembly("grid too coarse for second-order stencils".into()));
    }
    if !grid.geometry.is_stokes_box() && (l.j_pm < 2 || l.ny - l.j_ff < 2) {
        return Err(Error::Assembly("need at least two cell rows per bulk region".into()));
    }
    let asm = FullAssembler {
        grid,
        nx: l.nx,
        ny: l.ny,
        j_pm: l.j_pm,
        j_ff: l.j_ff,
        hx: grid.hx,
        hy: grid.hy,
        par: *params,
        kinv_tr: params.k_tr.inverse()?,
        builder: SystemBuilder::new(grid.dof_count()),
    };
    asm.run(sources, bcs)
}

struct FullAssembler<'g> {
    grid: &'g StaggeredGrid,
    nx: usize,
    ny: usize,
    j_pm: usize,
    j_ff: usize,
    hx: f64,
    hy: f64,
    par: PhysicalParams,
    kinv_tr: crate::params::SymTensor2,
    builder: SystemBuilder,
}

impl<'g> FullAssembler<'g> {
    fn visc(&self, j: usize) -> f64 {
        if j >= self.j_ff { self.par.mu } else { self.par.mu_eff }
    }

    fn in_transition(&self, j: usize) -> bool {
        j >= self.j_pm && j < self.j_ff
    }

    /// Friction coefficient matrix `(mu / sqrt(K_tr)) beta`.
    fn friction(&self) -> crate::params::SymTensor2 {
        let s = self.par.mu / self.par.k_tr_ref().sqrt();
        crate::params::SymTensor2::new(s * self.par.beta.xx, s * self.par.beta.xy, s * self.par.beta.yy)
    }

    /// BJS tangential ghost factor: u_ghost = c * u at the first strip row.
    fn bjs_ghost_factor(&self) -> f64 {
        let sk = self.par.k_pm_ref().sqrt();
        (2.0 * sk - self.par.alpha * self.hy) / (2.0 * sk + self.par.alpha * self.hy)
    }

    /// Matched ghost pair across gamma_ff for the tangential velocity.
    /// Returns coefficient lists for the ff-side ghost (used by the first
    /// free-flow row) and the tr-side ghost (used by the last transition
    /// row), each as (u_ff, u_tr, v_left, v_right) weights.
    fn tangential_ghosts(&self) -> ([f64; 4], [f64; 4]) {
        let (mu, mue, hy) = (self.par.mu, self.par.mu_eff, self.hy);
        let c = self.friction();
        let den = (mu + mue) / hy + c.xx / 2.0;
        let g_tr = [
            2.0 * mu / (hy * den),
            ((mue - mu) / hy - c.xx / 2.0) / den,
            -c.xy / (2.0 * den),
            -c.xy / (2.0 * den),
        ];
        let g_ff = [g_tr[0] - 1.0, g_tr[1] + 1.0, g_tr[2], g_tr[3]];
        (g_ff, g_tr)
    }

    fn run(mut self, sources: &SourceFieldsFull, bcs: &BoundarySpecFull) -> Result<LinearSystem> {
        self.u_rows(sources, bcs);
        self.v_rows(sources, bcs)?;
        self.continuity_rows();
        self.darcy_rows(sources, bcs);
        self.builder.finalize()
    }

    // ------------------------------------------------------------- u rows

    fn u_rows(&mut self, sources: &SourceFieldsFull, bcs: &BoundarySpecFull) {
        let (nx, hx, hy) = (self.nx, self.hx, self.hy);
        let l = self.grid.full().clone();
        let area = hx * hy;
        let stokes_box = self.grid.geometry.is_stokes_box();
        for j in self.j_pm..self.ny {
            let y = self.grid.y_center(j);
            let in_tr = self.in_transition(j);
            let nu = self.visc(j);
            let side = |left: bool| -> &VelocityBc {
                match (in_tr, left) {
                    (true, true) => &bcs.tr_left,
                    (true, false) => &bcs.tr_right,
                    (false, true) => &bcs.ff_left,
                    (false, false) => &bcs.ff_right,
                }
            };
            for i in 0..=nx {
                let x = self.grid.x_face(i);
                let r = l.iu(i, j);
                if i == 0 || i == nx {
                    self.u_boundary_row(r, i, j, x, y, nu, side(i == 0));
                    continue;
                }
                let f = if in_tr { (sources.f_tr)(x, y) } else { (sources.f_ff)(x, y) };
                let mut rhs = f[0];
                let mut diag = 2.0 * nu / (hx * hx) + 2.0 * nu / (hy * hy);
                let mut class = RowClass::Interior;
                self.builder.add(r, l.iu(i - 1, j), -nu / (hx * hx));
                self.builder.add(r, l.iu(i + 1, j), -nu / (hx * hx));
                if in_tr {
                    // Brinkman drag; off-diagonal couples to the transverse
                    // velocity averaged around the face.
                    diag += self.par.mu * self.kinv_tr.xx;
                    let kxy = self.par.mu * self.kinv_tr.xy;
                    if kxy != 0.0 {
                        for (vi, vj) in [(i - 1, j), (i, j), (i - 1, j + 1), (i, j + 1)] {
                            self.builder.add(r, l.iv(vi, vj), 0.25 * kxy);
                        }
                    }
                }
                // neighbor below
                if j == self.j_pm && !stokes_box {
                    // Beavers-Joseph-Saffman ghost below gamma_pm
                    diag += -nu / (hy * hy) * self.bjs_ghost_factor();
                    class = RowClass::NearBoundary;
                } else if j == self.j_ff && !stokes_box {
                    let (g_ff, _) = self.tangential_ghosts();
                    diag += -nu / (hy * hy) * g_ff[0];
                    self.builder.add(r, l.iu(i, j - 1), -nu / (hy * hy) * g_ff[1]);
                    if g_ff[2] != 0.0 {
                        self.builder.add(r, l.iv(i - 1, self.j_ff), -nu / (hy * hy) * g_ff[2]);
                        self.builder.add(r, l.iv(i, self.j_ff), -nu / (hy * hy) * g_ff[3]);
                    }
                    class = RowClass::NearBoundary;
                } else if j == 0 && stokes_box {
                    match bcs.ff_bottom.as_ref().expect("coverage checked") {
                        VelocityBc::Dirichlet(g) => {
                            let ub = g(x, 0.0)[0];
                            diag += nu / (hy * hy);
                            rhs += 2.0 * ub * nu / (hy * hy);
                        }
                        VelocityBc::Traction(t) => {
                            // n = -e2: tbar_1 = -nu du/dy
                            diag += -nu / (hy * hy);
                            rhs += t(x, 0.0)[0] / hy;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iu(i, j - 1), -nu / (hy * hy));
                }
                // neighbor above
                if j == self.ny - 1 {
                    match &bcs.ff_top {
                        VelocityBc::Dirichlet(g) => {
                            let ub = g(x, self.grid.geometry.ly)[0];
                            diag += nu / (hy * hy);
                            rhs += 2.0 * ub * nu / (hy * hy);
                        }
                        VelocityBc::Traction(t) => {
                            diag += -nu / (hy * hy);
                            rhs += t(x, self.grid.geometry.ly)[0] / hy;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else if j == self.j_ff - 1 && !stokes_box && j >= self.j_pm {
                    let (_, g_tr) = self.tangential_ghosts();
                    self.builder.add(r, l.iu(i, j + 1), -nu / (hy * hy) * g_tr[0]);
                    diag += -nu / (hy * hy) * g_tr[1];
                    if g_tr[2] != 0.0 {
                        self.builder.add(r, l.iv(i - 1, self.j_ff), -nu / (hy * hy) * g_tr[2]);
                        self.builder.add(r, l.iv(i, self.j_ff), -nu / (hy * hy) * g_tr[3]);
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iu(i, j + 1), -nu / (hy * hy));
                }
                self.builder.add(r, r, diag);
                self.builder.add(r, l.ip(i, j), 1.0 / hx);
                self.builder.add(r, l.ip(i - 1, j), -1.0 / hx);
                self.builder.add_rhs(r, rhs);
                self.builder.set_row_meta(r, class, area);
            }
        }
    }

    fn u_boundary_row(&mut self, r: usize, i: usize, j: usize, x: f64, y: f64, nu: f64, bc: &VelocityBc) {
        let l = self.grid.full().clone();
        let (nx, hx) = (self.nx, self.hx);
        match bc {
            VelocityBc::Dirichlet(g) => {
                self.builder.add(r, r, 1.0);
                self.builder.add_rhs(r, g(x, y)[0]);
            }
            VelocityBc::Traction(t) => {
                // normal traction row: (T.n)_1 = tbar_1 with one-sided stencils
                if i == 0 {
                    // n = -e1: -mu du/dx + p = tbar_1
                    self.builder.add(r, l.iu(0, j), -nu * -3.0 / (2.0 * hx));
                    self.builder.add(r, l.iu(1, j), -nu * 4.0 / (2.0 * hx));
                    self.builder.add(r, l.iu(2, j), -nu * -1.0 / (2.0 * hx));
                    self.builder.add(r, l.ip(0, j), 1.5);
                    self.builder.add(r, l.ip(1, j), -0.5);
                } else {
                    // n = +e1: mu du/dx - p = tbar_1
                    self.builder.add(r, l.iu(nx, j), nu * 3.0 / (2.0 * hx));
                    self.builder.add(r, l.iu(nx - 1, j), -nu * 4.0 / (2.0 * hx));
                    self.builder.add(r, l.iu(nx - 2, j), nu * 1.0 / (2.0 * hx));
                    self.builder.add(r, l.ip(nx - 1, j), -1.5);
                    self.builder.add(r, l.ip(nx - 2, j), 0.5);
                }
                self.builder.add_rhs(r, t(x, y)[0]);
            }
        }
        self.builder.set_row_meta(r, RowClass::Boundary, self.hx * self.hy);
    }

    // ------------------------------------------------------------- v rows

    fn v_rows(&mut self, sources: &SourceFieldsFull, bcs: &BoundarySpecFull) -> Result<()> {
        let (nx, hx, hy) = (self.nx, self.hx, self.hy);
        let l = self.grid.full().clone();
        let area = hx * hy;
        let stokes_box = self.grid.geometry.is_stokes_box();
        let strip_rows = l.strip_rows();
        for j in self.j_pm..=self.ny {
            let y = self.grid.y_line(j);
            for i in 0..nx {
                let x = self.grid.x_center(i);
                let r = l.iv(i, j);
                if j == self.ny {
                    self.v_top_bottom_row(r, i, x, y, true, &bcs.ff_top);
                    continue;
                }
                if j == 0 && stokes_box {
                    let bc = bcs.ff_bottom.as_ref().expect("coverage checked");
                    self.v_top_bottom_row(r, i, x, y, false, bc);
                    continue;
                }
                if !stokes_box && j == self.j_ff {
                    if strip_rows >= 2 {
                        self.stress_jump_row(r, i, x, y);
                    } else {
                        self.fv_gamma_ff_row(r, i, x, y, sources, bcs);
                    }
                    continue;
                }
                if !stokes_box && j == self.j_pm {
                    if strip_rows >= 2 {
                        self.force_balance_row(r, i, x, y);
                    } else {
                        self.fv_gamma_pm_row(r, i, x, y, sources, bcs);
                    }
                    continue;
                }
                // interior momentum row
                let in_tr = j < self.j_ff && !stokes_box;
                let nu = if in_tr { self.par.mu_eff } else { self.par.mu };
                let f = if in_tr { (sources.f_tr)(x, y) } else { (sources.f_ff)(x, y) };
                let mut rhs = f[1];
                let mut diag = 2.0 * nu / (hx * hx) + 2.0 * nu / (hy * hy);
                let mut class = RowClass::Interior;
                if in_tr {
                    diag += self.par.mu * self.kinv_tr.yy;
                    let kxy = self.par.mu * self.kinv_tr.xy;
                    if kxy != 0.0 {
                        for (ui, uj) in [(i, j - 1), (i + 1, j - 1), (i, j), (i + 1, j)] {
                            self.builder.add(r, l.iu(ui, uj), 0.25 * kxy);
                        }
                    }
                }
                self.builder.add(r, l.iv(i, j - 1), -nu / (hy * hy));
                self.builder.add(r, l.iv(i, j + 1), -nu / (hy * hy));
                let side_bc = |left: bool| -> &VelocityBc {
                    match (in_tr, left) {
                        (true, true) => &bcs.tr_left,
                        (true, false) => &bcs.tr_right,
                        (false, true) => &bcs.ff_left,
                        (false, false) => &bcs.ff_right,
                    }
                };
                if i == 0 {
                    match side_bc(true) {
                        VelocityBc::Dirichlet(g) => {
                            let vb = g(0.0, y)[1];
                            diag += nu / (hx * hx);
                            rhs += 2.0 * vb * nu / (hx * hx);
                        }
                        VelocityBc::Traction(t) => {
                            diag += -nu / (hx * hx);
                            rhs += t(0.0, y)[1] / hx;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iv(i - 1, j), -nu / (hx * hx));
                }
                if i == nx - 1 {
                    match side_bc(false) {
                        VelocityBc::Dirichlet(g) => {
                            let vb = g(self.grid.geometry.lx, y)[1];
                            diag += nu / (hx * hx);
                            rhs += 2.0 * vb * nu / (hx * hx);
                        }
                        VelocityBc::Traction(t) => {
                            diag += -nu / (hx * hx);
                            rhs += t(self.grid.geometry.lx, y)[1] / hx;
                        }
                    }
                    class = RowClass::NearBoundary;
                } else {
                    self.builder.add(r, l.iv(i + 1, j), -nu / (hx * hx));
                }
                self.builder.add(r, r, diag);
                self.builder.add(r, l.ip(i, j), 1.0 / hy);
                self.builder.add(r, l.ip(i, j - 1), -1.0 / hy);
                self.builder.add_rhs(r, rhs);
                self.builder.set_row_meta(r, class, area);
            }
        }
        Ok(())
    }

    fn v_top_bottom_row(&mut self, r: usize, i: usize, x: f64, y: f64, top: bool, bc: &VelocityBc) {
        let l = self.grid.full().clone();
        let (hy, ny) = (self.hy, self.ny);
        match bc {
            VelocityBc::Dirichlet(g) => {
                self.builder.add(r, r, 1.0);
                self.builder.add_rhs(r, g(x, y)[1]);
            }
            VelocityBc::Traction(t) => {
                let nu = if top { self.par.mu } else { self.visc(0) };
                if top {
                    // n = +e2: mu dv/dy - p = tbar_2
                    self.builder.add(r, l.iv(i, ny), nu * 3.0 / (2.0 * hy));
                    self.builder.add(r, l.iv(i, ny - 1), -nu * 4.0 / (2.0 * hy));
                    self.builder.add(r, l.iv(i, ny - 2), nu * 1.0 / (2.0 * hy));
                    self.builder.add(r, l.ip(i, ny - 1), -1.5);
                    self.builder.add(r, l.ip(i, ny - 2), 0.5);
                } else {
                    // n = -e2: -mu dv/dy + p = tbar_2
                    self.builder.add(r, l.iv(i, 0), -nu * -3.0 / (2.0 * hy));
                    self.builder.add(r, l.iv(i, 1), -nu * 4.0 / (2.0 * hy));
                    self.builder.add(r, l.iv(i, 2), -nu * -1.0 / (2.0 * hy));
                    self.builder.add(r, l.ip(i, 0), 1.5);
                    self.builder.add(r, l.ip(i, 1), -0.5);
                }
                self.builder.add_rhs(r, t(x, y)[1]);
            }
        }
        self.builder.set_row_meta(r, RowClass::Boundary, self.hx * self.hy);
    }

    /// One-sided trace of the free-flow tangential velocity on gamma_ff at
    /// the cell-center abscissa of column i.
    fn add_u_trace_ff(&mut self, r: usize, i: usize, j_ff: usize, scale: f64) {
        let l = self.grid.full().clone();
        for col in [i, i + 1] {
            self.builder.add(r, l.iu(col, j_ff), scale * 0.75);
            self.builder.add(r, l.iu(col, j_ff + 1), scale * -0.25);
        }
    }

    /// Normal stress jump row at the shared gamma_ff face (needs >= 2 strip
    /// rows): `mu dv/dy|ff - p_ff - mu_eff dv/dy|tr + p_tr = (friction v)_2`.
    fn stress_jump_row(&mut self, r: usize, i: usize, x: f64, _y: f64) {
        let _ = x;
        let l = self.grid.full().clone();
        let (mu, mue, hy) = (self.par.mu, self.par.mu_eff, self.hy);
        let jf = self.j_ff;
        self.builder.add(r, l.iv(i, jf), -mu * 3.0 / (2.0 * hy) - mue * 3.0 / (2.0 * hy));
        self.builder.add(r, l.iv(i, jf + 1), mu * 4.0 / (2.0 * hy));
        self.builder.add(r, l.iv(i, jf + 2), -mu / (2.0 * hy));
        self.builder.add(r, l.iv(i, jf - 1), mue * 4.0 / (2.0 * hy));
        self.builder.add(r, l.iv(i, jf - 2), -mue / (2.0 * hy));
        self.builder.add(r, l.ip(i, jf), -1.5);
        self.builder.add(r, l.ip(i, jf + 1), 0.5);
        self.builder.add(r, l.ip(i, jf - 1), 1.5);
        self.builder.add(r, l.ip(i, jf - 2), -0.5);
        let c = self.friction();
        if c.yy != 0.0 {
            self.builder.add(r, l.iv(i, jf), -c.yy);
        }
        if c.xy != 0.0 {
            self.add_u_trace_ff(r, i, jf, -c.xy);
        }
        self.builder.set_row_meta(r, RowClass::Interface, self.hx * self.hy);
    }

    /// Force balance row at the gamma_pm face (needs >= 2 strip rows):
    /// `-mu_eff dv/dy|tr + p_tr = p_pm` on gamma_pm.
    fn force_balance_row(&mut self, r: usize, i: usize, _x: f64, _y: f64) {
        let l = self.grid.full().clone();
        let (mue, hy) = (self.par.mu_eff, self.hy);
        let jp = self.j_pm;
        self.builder.add(r, l.iv(i, jp), -mue * -3.0 / (2.0 * hy));
        self.builder.add(r, l.iv(i, jp + 1), -mue * 4.0 / (2.0 * hy));
        self.builder.add(r, l.iv(i, jp + 2), -mue * -1.0 / (2.0 * hy));
        self.builder.add(r, l.ip(i, jp), 1.5);
        self.builder.add(r, l.ip(i, jp + 1), -0.5);
        self.builder.add(r, l.ip(i, jp - 1), -1.5);
        self.builder.add(r, l.ip(i, jp - 2), 0.5);
        self.builder.set_row_meta(r, RowClass::Interface, self.hx * self.hy);
    }

    /// Single-strip-row variant of the gamma_ff row: finite-volume momentum
    /// over the cell straddling the interface, with the stress jump as a
    /// concentrated source.
    fn fv_gamma_ff_row(&mut self, r: usize, i: usize, x: f64, y: f64, sources: &SourceFieldsFull, bcs: &BoundarySpecFull) {
        let l = self.grid.full().clone();
        let (mu, mue, hx, hy) = (self.par.mu, self.par.mu_eff, self.hx, self.hy);
        let jf = self.j_ff;
        let mum = 0.5 * (mu + mue);
        let drag = 0.5 * self.par.mu * self.kinv_tr.yy;
        let mut diag = drag * 0.75 + mu / (hy * hy) + mue / (hy * hy) + 2.0 * mum / (hx * hx);
        self.builder.add(r, l.iv(i, jf - 1), drag * 0.25 - mue / (hy * hy));
        self.builder.add(r, l.iv(i, jf + 1), -mu / (hy * hy));
        self.builder.add(r, l.ip(i, jf), 1.0 / hy);
        self.builder.add(r, l.ip(i, jf - 1), -1.0 / hy);
        let mut rhs = 0.5 * ((sources.f_tr)(x, y - 0.25 * hy)[1] + (sources.f_ff)(x, y + 0.25 * hy)[1]);
        // friction jump as interface source
        let c = self.friction();
        if c.yy != 0.0 {
            diag += c.yy / hy;
        }
        if c.xy != 0.0 {
            self.add_u_trace_ff(r, i, jf, c.xy / hy);
        }
        // side ghosts: treat with the free-flow side condition (the cell is
        // half in each region; the paper's cases have matching wall data)
        for (left, ii) in [(true, i.wrapping_sub(1)), (false, i + 1)] {
            let at_wall = (left && i == 0) || (!left && i == self.nx - 1);
            if !at_wall {
                self.builder.add(r, l.iv(ii, jf), -mum / (hx * hx));
                continue;
            }
            let (xb, bc) = if left { (0.0, &bcs.ff_left) } else { (self.grid.geometry.lx, &bcs.ff_right) };
            match bc {
                VelocityBc::Dirichlet(g) => {
                    let vb = g(xb, y)[1];
                    diag += mum / (hx * hx);
                    rhs += 2.0 * vb * mum / (hx * hx);
                }
                VelocityBc::Traction(t) => {
                    diag += -mum / (hx * hx);
                    rhs += t(xb, y)[1] / hx;
                }
            }
        }
        self.builder.add(r, r, diag);
        self.builder.add_rhs(r, rhs);
        self.builder.set_row_meta(r, RowClass::NearBoundary, self.hx * self.hy);
    }

    /// Single-strip-row variant of the gamma_pm row: half-cell momentum
    /// balance above the interface whose bottom traction is the force
    /// balance `-p_pm`.
    fn fv_gamma_pm_row(&mut self, r: usize, i: usize, x: f64, y: f64, sources: &SourceFieldsFull, bcs: &BoundarySpecFull) {
        let l = self.grid.full().clone();
        let (mue, hx, hy) = (self.par.mu_eff, self.hx, self.hy);
        let jp = self.j_pm;
        let drag = self.par.mu * self.kinv_tr.yy;
        let mut diag = drag * 0.75 + 2.0 * mue / (hy * hy) + 2.0 * mue / (hx * hx);
        self.builder.add(r, l.iv(i, jp + 1), drag * 0.25 - 2.0 * mue / (hy * hy));
        self.builder.add(r, l.ip(i, jp), 2.0 / hy);
        self.builder.add(r, l.ip(i, jp - 1), -3.0 / hy);
        self.builder.add(r, l.ip(i, jp - 2), 1.0 / hy);
        let mut rhs = (sources.f_tr)(x, y + 0.25 * hy)[1];
        for (left, ii) in [(true, i.wrapping_sub(1)), (false, i + 1)] {
            let at_wall = (left && i == 0) || (!left && i == self.nx - 1);
            if !at_wall {
                self.builder.add(r, l.iv(ii, jp), -mue / (hx * hx));
                continue;
            }
            let (xb, bc) = if left { (0.0, &bcs.tr_left) } else { (self.grid.geometry.lx, &bcs.tr_right) };
            match bc {
                VelocityBc::Dirichlet(g) => {
                    let vb = g(xb, y)[1];
                    diag += mue / (hx * hx);
                    rhs += 2.0 * vb * mue / (hx * hx);
                }
                VelocityBc::Traction(t) => {
                    diag += -mue / (hx * hx);
                    rhs += t(xb, y)[1] / hx;
                }
            }
        }
        self.builder.add(r, r, diag);
        self.builder.add_rhs(r, rhs);
        self.builder.set_row_meta(r, RowClass::NearBoundary, self.hx * self.hy);
    }

    // ------------------------------------------------------- p rows

    fn continuity_rows(&mut self) {
        let l = self.grid.full().clone();
        let (hx, hy) = (self.hx, self.hy);
        for j in self.j_pm..self.ny {
            for i in 0..self.nx {
                let r = l.ip(i, j);
                self.builder.add(r, l.iu(i + 1, j), 1.0 / hx);
                self.builder.add(r, l.iu(i, j), -1.0 / hx);
                self.builder.add(r, l.iv(i, j + 1), 1.0 / hy);
                self.builder.add(r, l.iv(i, j), -1.0 / hy);
                self.builder.set_row_meta(r, RowClass::Interior, hx * hy);
            }
        }
    }

    fn darcy_rows(&mut self, sources: &SourceFieldsFull, bcs: &BoundarySpecFull) {
        let l = self.grid.full().clone();
        let (nx, hx, hy) = (self.nx, self.hx, self.hy);
        let k = self.par.k_pm;
        let mu = self.par.mu;
        let j_pm = self.j_pm;
        for j in 0..j_pm {
            let y = self.grid.y_pm_center(j);
            for i in 0..nx {
                let x = self.grid.x_center(i);
                let r = l.ip(i, j);
                let mut class = RowClass::Interior;
                self.builder.add_rhs(r, (sources.q)(x, y));
                // horizontal fluxes: (Fx_right - Fx_left)/hx
                for (right, ii) in [(false, i.wrapping_sub(1)), (true, i + 1)] {
                    let sgn = if right { 1.0 } else { -1.0 };
                    if (right && i + 1 < nx) || (!right && i > 0) {
                        // interior face: -(1/mu)(Kxx dp/dx + Kxy dp/dy)
                        self.builder.add(r, l.ip(i, j), k.xx / (mu * hx * hx));
                        self.builder.add(r, l.ip(ii, j), -k.xx / (mu * hx * hx));
                        if k.xy != 0.0 {
                            self.darcy_cross_dpdy(r, [ii.min(i), ii.max(i)], j, -sgn * k.xy / (mu * hx));
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
                                self.builder.add(r, l.ip(i, j), 2.0 * k.xx / (mu * hx * hx));
                                self.builder.add_rhs(r, 2.0 * k.xx * pb / (mu * hx * hx));
                                if k.xy != 0.0 {
                                    // boundary-tangential gradient from the data
                                    let dpdy = (g(xb, y + 0.5 * hy) - g(xb, y - 0.5 * hy)) / hy;
                                    self.builder.add_rhs(r, sgn * k.xy * dpdy / (mu * hx));
                                }
                            }
                            DarcyBc::NormalFlux(g) => {
                                // outward normal flux given: F = sgn_outward * vbar
                                self.builder.add_rhs(r, -g(xb, y) / hx);
                            }
                        }
                    }
                }
                // bottom flux
                if j > 0 {
                    self.builder.add(r, l.ip(i, j), k.yy / (mu * hy * hy));
                    self.builder.add(r, l.ip(i, j - 1), -k.yy / (mu * hy * hy));
                    if k.xy != 0.0 {
                        self.darcy_cross_dpdx(r, i, [j - 1, j], k.xy / (mu * hy));
                    }
                } else {
                    class = RowClass::NearBoundary;
                    match &bcs.pm_bottom {
                        DarcyBc::Pressure(g) => {
                            let pb = g(x, 0.0);
                            self.builder.add(r, l.ip(i, 0), 2.0 * k.yy / (mu * hy * hy));
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
                // top flux: interior two-point or the transition-zone velocity
                if j < j_pm - 1 {
                    self.builder.add(r, l.ip(i, j), k.yy / (mu * hy * hy));
                    self.builder.add(r, l.ip(i, j + 1), -k.yy / (mu * hy * hy));
                    if k.xy != 0.0 {
                        self.darcy_cross_dpdx(r, i, [j, j + 1], -k.xy / (mu * hy));
                    }
                } else {
                    // normal-flux continuity with the transition zone
                    self.builder.add(r, l.iv(i, j_pm), 1.0 / hy);
                    class = RowClass::NearBoundary;
                }
                self.builder.set_row_meta(r, class, hx * hy);
            }
        }
    }

    /// Transverse dp/dy at a vertical face between columns `cols`, row j,
    /// scaled by `scale` (one-sided at the region's top and bottom rows).
    fn darcy_cross_dpdy(&mut self, r: usize, cols: [usize; 2], j: usize, scale: f64) {
        let l = self.grid.full().clone();
        let hy = self.hy;
        let (jm, jp, denom) = if j == 0 {
            (j, j + 1, hy)
        } else if j + 1 >= self.j_pm {
            (j - 1, j, hy)
        } else {
            (j - 1, j + 1, 2.0 * hy)
        };
        for &c in &cols {
            self.builder.add(r, l.ip(c, jp), scale * 0.5 / denom);
            self.builder.add(r, l.ip(c, jm), -scale * 0.5 / denom);
        }
    }

    /// Transverse dp/dx at a horizontal face between rows `rows`, column i.
    fn darcy_cross_dpdx(&mut self, r: usize, i: usize, rows: [usize; 2], scale: f64) {
        let l = self.grid.full().clone();
        let hx = self.hx;
        let (im, ip_, denom) = if i == 0 {
            (i, i + 1, hx)
        } else if i + 1 >= self.nx {
            (i - 1, i, hx)
        } else {
            (i - 1, i + 1, 2.0 * hx)
        };
        for &row in &rows {
            self.builder.add(r, l.ip(ip_, row), scale * 0.5 / denom);
            self.builder.add(r, l.ip(im, row), -scale * 0.5 / denom);
        }
    }
}

/// Region tag helper for error metrics.
pub fn region_of_full_row(grid: &StaggeredGrid, j: usize) -> Region {
    grid.full().region_of_row(j)
}
