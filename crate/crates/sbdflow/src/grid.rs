//! Uniform rectangular staggered (MAC) grids over the layered domain.
//!
//! The full model grids the whole box `[0,Lx] x [0,Ly]`; cell rows are
//! partitioned into porous medium (pressure only), transition zone and free
//! flow (velocity + pressure). The reduced model grids only the two bulk
//! blocks and carries 1D unknowns on the interface line: the tangential
//! average `U` at face abscissae and the normal average `V` and pressure `P`
//! at cell centers, mirroring the MAC staggering in the interface direction.

use crate::error::{Error, Result};

const CONFORMITY_RTOL: f64 = 1e-12;

/// Which of the two coupled models a grid is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Full,
    Reduced,
}

/// Region of a bulk cell row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    FreeFlow,
    Transition,
    PorousMedium,
}

/// Domain extents, interface positions and resolution.
///
/// For the full model `ny` counts all cell rows of `[0,Ly]`. For the reduced
/// model `ny` counts the bulk rows (porous medium plus free flow); the strip
/// of width `d` between them carries no bulk cells.
#[derive(Debug, Clone, Copy)]
pub struct GeometryConfig {
    pub lx: f64,
    pub ly: f64,
    pub y_gamma_pm: f64,
    pub y_gamma_ff: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GeometryConfig {
    /// Transition-zone thickness.
    pub fn d(&self) -> f64 {
        self.y_gamma_ff - self.y_gamma_pm
    }

    /// A single-region Stokes box without transition zone or porous medium,
    /// used by sanity and structure tests.
    pub fn stokes_box(lx: f64, ly: f64, nx: usize, ny: usize) -> Self {
        Self { lx, ly, y_gamma_pm: 0.0, y_gamma_ff: 0.0, nx, ny }
    }

    pub fn is_stokes_box(&self) -> bool {
        self.y_gamma_pm == 0.0 && self.y_gamma_ff == 0.0
    }

    fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.lx > 0.0 && self.ly > 0.0) {
            errs.push("domain extents must be positive".into());
        }
        if self.nx == 0 || self.ny == 0 {
            errs.push("nx and ny must be positive".into());
        }
        if !self.is_stokes_box() {
            if !(self.y_gamma_pm > 0.0 && self.y_gamma_pm < self.y_gamma_ff) {
                errs.push("d must be positive (require 0 < y_gamma_pm < y_gamma_ff)".into());
            }
            if !(self.y_gamma_ff < self.ly) {
                errs.push("y_gamma_ff must lie below the top boundary".into());
            }
        }
        if errs.is_empty() { Ok(()) } else { Err(Error::Validation(errs)) }
    }
}

fn conforming_index(coord: f64, h: f64, what: &str) -> Result<usize> {
    let ratio = coord / h;
    let idx = ratio.round();
    if (ratio - idx).abs() > CONFORMITY_RTOL * ratio.abs().max(1.0) {
        return Err(Error::Geometry(format!(
            "{what} = {coord} does not conform to the grid (not an integer multiple of h = {h})"
        )));
    }
    Ok(idx as usize)
}

/// Full-model unknown layout. Unknowns are ordered by field then
/// lexicographically with `i` fastest: all `u`, then `v`, then `p`.
#[derive(Debug, Clone)]
pub struct FullLayout {
    pub nx: usize,
    pub ny: usize,
    /// First transition-zone cell row (rows below are porous medium).
    pub j_pm: usize,
    /// First free-flow cell row (gamma_ff is the face line at this row).
    pub j_ff: usize,
    v_off: usize,
    p_off: usize,
    n_dofs: usize,
}

impl FullLayout {
    fn new(nx: usize, ny: usize, j_pm: usize, j_ff: usize) -> Self {
        let stokes_rows = ny - j_pm;
        let nu = (nx + 1) * stokes_rows;
        let nv = nx * (stokes_rows + 1);
        let np = nx * ny;
        Self { nx, ny, j_pm, j_ff, v_off: nu, p_off: nu + nv, n_dofs: nu + nv + np }
    }

    /// u at vertical face (i*hx, (j+1/2)*hy); rows j_pm..ny.
    pub fn iu(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && (self.j_pm..self.ny).contains(&j));
        (j - self.j_pm) * (self.nx + 1) + i
    }

    /// v at horizontal face ((i+1/2)*hx, j*hy); face lines j_pm..=ny.
    pub fn iv(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && (self.j_pm..=self.ny).contains(&j));
        self.v_off + (j - self.j_pm) * self.nx + i
    }

    /// p at cell center ((i+1/2)*hx, (j+1/2)*hy); all rows.
    pub fn ip(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        self.p_off + j * self.nx + i
    }

    pub fn region_of_row(&self, j: usize) -> Region {
        if j < self.j_pm {
            Region::PorousMedium
        } else if j < self.j_ff {
            Region::Transition
        } else {
            Region::FreeFlow
        }
    }

    /// Transition rows between the interfaces (`m = d/hy`).
    pub fn strip_rows(&self) -> usize {
        self.j_ff - self.j_pm
    }
}

/// Reduced-model unknown layout: free-flow block, porous-medium block and
/// interface arrays. Ordered u_ff, v_ff, p_ff, p_pm, U(gamma), V(gamma),
/// P(gamma).
#[derive(Debug, Clone)]
pub struct ReducedLayout {
    pub nx: usize,
    /// Free-flow cell rows (above y_gamma_ff).
    pub ny_ff: usize,
    /// Porous-medium cell rows (below y_gamma_pm).
    pub ny_pm: usize,
    v_off: usize,
    pff_off: usize,
    ppm_off: usize,
    gu_off: usize,
    gv_off: usize,
    gp_off: usize,
    n_dofs: usize,
}

impl ReducedLayout {
    fn new(nx: usize, ny_ff: usize, ny_pm: usize) -> Self {
        let nu = (nx + 1) * ny_ff;
        let nv = nx * (ny_ff + 1);
        let npf = nx * ny_ff;
        let npp = nx * ny_pm;
        let v_off = nu;
        let pff_off = nu + nv;
        let ppm_off = pff_off + npf;
        let gu_off = ppm_off + npp;
        let gv_off = gu_off + nx + 1;
        let gp_off = gv_off + nx;
        Self { nx, ny_ff, ny_pm, v_off, pff_off, ppm_off, gu_off, gv_off, gp_off, n_dofs: gp_off + nx }
    }

    /// Free-flow u; local row j counts from gamma_ff upward.
    pub fn iu(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.nx && j < self.ny_ff);
        j * (self.nx + 1) + i
    }

    /// Free-flow v; face line j = 0 lies on gamma_ff.
    pub fn iv(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j <= self.ny_ff);
        self.v_off + j * self.nx + i
    }

    /// Free-flow pressure.
    pub fn ipf(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny_ff);
        self.pff_off + j * self.nx + i
    }

    /// Porous-medium pressure; row 0 at the domain bottom.
    pub fn ipp(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny_pm);
        self.ppm_off + j * self.nx + i
    }

    /// Averaged tangential velocity at face abscissa i*hx.
    pub fn igu(&self, i: usize) -> usize {
        debug_assert!(i <= self.nx);
        self.gu_off + i
    }

    /// Averaged normal velocity at cell-center abscissa (k+1/2)*hx.
    pub fn igv(&self, k: usize) -> usize {
        debug_assert!(k < self.nx);
        self.gv_off + k
    }

    /// Averaged pressure at cell-center abscissa (k+1/2)*hx.
    pub fn igp(&self, k: usize) -> usize {
        debug_assert!(k < self.nx);
        self.gp_off + k
    }
}

#[derive(Debug, Clone)]
pub enum Layout {
    Full(FullLayout),
    Reduced(ReducedLayout),
}

/// A built staggered grid with its unknown indexing.
#[derive(Debug, Clone)]
pub struct StaggeredGrid {
    pub geometry: GeometryConfig,
    pub hx: f64,
    pub hy: f64,
    pub layout: Layout,
}

impl StaggeredGrid {
    pub fn full(&self) -> &FullLayout {
        match &self.layout {
            Layout::Full(l) => l,
            Layout::Reduced(_) => panic!("expected full-model grid"),
        }
    }

    pub fn reduced(&self) -> &ReducedLayout {
        match &self.layout {
            Layout::Reduced(l) => l,
            Layout::Full(_) => panic!("expected reduced-model grid"),
        }
    }

    /// Total number of global unknowns.
    pub fn dof_count(&self) -> usize {
        match &self.layout {
            Layout::Full(l) => l.n_dofs,
            Layout::Reduced(l) => l.n_dofs,
        }
    }

    pub fn x_face(&self, i: usize) -> f64 {
        i as f64 * self.hx
    }

    pub fn x_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.hx
    }

    /// y of a full-grid cell-row center.
    pub fn y_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy
    }

    /// y of a full-grid horizontal face line.
    pub fn y_line(&self, j: usize) -> f64 {
        j as f64 * self.hy
    }

    /// y of a free-flow cell-row center in the reduced model (local row).
    pub fn y_ff_center(&self, j: usize) -> f64 {
        self.geometry.y_gamma_ff + (j as f64 + 0.5) * self.hy
    }

    /// y of a free-flow face line in the reduced model (local line).
    pub fn y_ff_line(&self, j: usize) -> f64 {
        self.geometry.y_gamma_ff + j as f64 * self.hy
    }

    /// y of a porous-medium cell-row center (same in both models).
    pub fn y_pm_center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.hy
    }
}

/// Build a grid for the requested model, checking interface conformity.
pub fn build_grid(config: GeometryConfig, model: ModelKind) -> Result<StaggeredGrid> {
    config.validate()?;
    let hx = config.lx / config.nx as f64;
    match model {
        ModelKind::Full => {
            let hy = config.ly / config.ny as f64;
            let (j_pm, j_ff) = if config.is_stokes_box() {
                (0, 0)
            } else {
                (
                    conforming_index(config.y_gamma_pm, hy, "y_gamma_pm")?,
                    conforming_index(config.y_gamma_ff, hy, "y_gamma_ff")?,
                )
            };
            Ok(StaggeredGrid {
                geometry: config,
                hx,
                hy,
                layout: Layout::Full(FullLayout::new(config.nx, config.ny, j_pm, j_ff)),
            })
        }
        ModelKind::Reduced => {
            if config.is_stokes_box() {
                return Err(Error::Geometry("reduced model requires a transition zone".into()));
            }
            let bulk_height = config.ly - config.d();
            let hy = bulk_height / config.ny as f64;
            let ny_pm = conforming_index(config.y_gamma_pm, hy, "y_gamma_pm")?;
            let ny_ff = config.ny - ny_pm;
            if ny_pm < 2 || ny_ff < 3 {
                return Err(Error::Geometry(
                    "reduced model needs at least 2 porous rows and 3 free-flow rows".into(),
                ));
            }
            Ok(StaggeredGrid {
                geometry: config,
                hx,
                hy,
                layout: Layout::Reduced(ReducedLayout::new(config.nx, ny_ff, ny_pm)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_grid_row_split_matches_geometry() {
        let g = GeometryConfig { lx: 1.0, ly: 2.0, y_gamma_pm: 0.9, y_gamma_ff: 1.1, nx: 10, ny: 20 };
        let grid = build_grid(g, ModelKind::Full).unwrap();
        let l = grid.full();
        assert_eq!((l.j_pm, l.j_ff), (9, 11));
        for j in 0..9 {
            assert_eq!(l.region_of_row(j), Region::PorousMedium);
        }
        assert_eq!(l.region_of_row(9), Region::Transition);
        assert_eq!(l.region_of_row(10), Region::Transition);
        for j in 11..20 {
            assert_eq!(l.region_of_row(j), Region::FreeFlow);
        }
    }

    #[test]
    fn conformity_checks() {
        // 0.505 / 0.005 = 101: conforming
        let g = GeometryConfig { lx: 1.0, ly: 1.005, y_gamma_pm: 0.5, y_gamma_ff: 0.505, nx: 10, ny: 201 };
        assert!(build_grid(g, ModelKind::Full).is_ok());
        // hy = 1.005/300 = 0.00335: 0.505/0.00335 is not integral
        let g = GeometryConfig { ny: 300, ..g };
        let err = build_grid(g, ModelKind::Full).unwrap_err().to_string();
        assert!(err.contains("y_gamma_pm") || err.contains("y_gamma_ff"), "{err}");
    }

    #[test]
    fn negative_thickness_rejected() {
        let g = GeometryConfig { lx: 1.0, ly: 2.0, y_gamma_pm: 1.1, y_gamma_ff: 0.9, nx: 4, ny: 8 };
        let err = build_grid(g, ModelKind::Full).unwrap_err().to_string();
        assert!(err.contains("d must be positive"), "{err}");
    }

    #[test]
    fn reduced_grid_with_narrow_strip() {
        let d = 5e-4;
        let g = GeometryConfig { lx: 1.0, ly: 1.0 + d, y_gamma_pm: 0.5, y_gamma_ff: 0.5 + d, nx: 16, ny: 16 };
        let grid = build_grid(g, ModelKind::Reduced).unwrap();
        let l = grid.reduced();
        assert_eq!((l.ny_pm, l.ny_ff), (8, 8));
        assert!((grid.hy - 1.0 / 16.0).abs() < 1e-15);
        // gamma arrays: U on nx+1 faces, V and P on nx centers
        assert_eq!(l.igu(16) - l.igu(0), 16);
        assert_eq!(grid.dof_count(), 17 * 8 + 16 * 9 + 16 * 8 + 16 * 8 + (3 * 16 + 1));
    }

    #[test]
    fn stokes_box_counts() {
        // 2x2 box: 3x2 u faces + 2x3 v faces + 4 p cells = 16
        let grid = build_grid(GeometryConfig::stokes_box(1.0, 1.0, 2, 2), ModelKind::Full).unwrap();
        assert_eq!(grid.dof_count(), 16);
    }

    #[test]
    fn dof_count_monotone_in_resolution() {
        let mut prev = 0;
        for nx in [10, 20, 40] {
            let g = GeometryConfig { lx: 1.0, ly: 2.0, y_gamma_pm: 0.9, y_gamma_ff: 1.1, nx, ny: 2 * nx };
            let n = build_grid(g, ModelKind::Full).unwrap().dof_count();
            assert!(n > prev);
            prev = n;
        }
    }

    #[test]
    fn refinement_preserves_conformity_and_quadruples_cells() {
        let g1 = GeometryConfig { lx: 1.0, ly: 2.0, y_gamma_pm: 0.9, y_gamma_ff: 1.1, nx: 10, ny: 20 };
        let g2 = GeometryConfig { nx: 20, ny: 40, ..g1 };
        let a = build_grid(g1, ModelKind::Full).unwrap();
        let b = build_grid(g2, ModelKind::Full).unwrap();
        assert_eq!(4 * g1.nx * g1.ny, g2.nx * g2.ny);
        assert_eq!(b.full().strip_rows(), 2 * a.full().strip_rows());
    }

    #[test]
    fn index_maps_are_bijective() {
        let g = GeometryConfig { lx: 1.0, ly: 2.0, y_gamma_pm: 0.9, y_gamma_ff: 1.1, nx: 5, ny: 10 };
        let grid = build_grid(g, ModelKind::Full).unwrap();
        let l = grid.full();
        let mut seen = vec![false; grid.dof_count()];
        for j in l.j_pm..l.ny {
            for i in 0..=l.nx {
                assert!(!std::mem::replace(&mut seen[l.iu(i, j)], true));
            }
        }
        for j in l.j_pm..=l.ny {
            for i in 0..l.nx {
                assert!(!std::mem::replace(&mut seen[l.iv(i, j)], true));
            }
        }
        for j in 0..l.ny {
            for i in 0..l.nx {
                assert!(!std::mem::replace(&mut seen[l.ip(i, j)], true));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
