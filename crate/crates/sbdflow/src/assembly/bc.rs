//! Boundary conditions and source fields for both assemblies.

use crate::error::{Error, Result};

pub type ScalarField = Box<dyn Fn(f64, f64) -> f64>;
pub type VectorField = Box<dyn Fn(f64, f64) -> [f64; 2]>;
pub type LineField = Box<dyn Fn(f64) -> f64>;

pub fn zero_scalar() -> ScalarField {
    Box::new(|_, _| 0.0)
}

pub fn zero_vector() -> VectorField {
    Box::new(|_, _| [0.0, 0.0])
}

pub fn zero_line() -> LineField {
    Box::new(|_| 0.0)
}

/// Condition on a Stokes/Brinkman outer boundary segment.
pub enum VelocityBc {
    /// Prescribed velocity vector.
    Dirichlet(VectorField),
    /// Prescribed traction `T.n` with the outward normal.
    Traction(VectorField),
}

impl VelocityBc {
    pub fn no_slip() -> Self {
        Self::Dirichlet(zero_vector())
    }

    /// Zero-traction outflow.
    pub fn do_nothing() -> Self {
        Self::Traction(zero_vector())
    }
}

/// Condition on a Darcy outer boundary segment.
pub enum DarcyBc {
    /// Prescribed pressure.
    Pressure(ScalarField),
    /// Prescribed outward normal velocity `v.n`.
    NormalFlux(ScalarField),
}

impl DarcyBc {
    pub fn no_flux() -> Self {
        Self::NormalFlux(zero_scalar())
    }
}

/// Source terms of the full-dimensional model.
pub struct SourceFieldsFull {
    /// Force density in the free flow.
    pub f_ff: VectorField,
    /// Force density in the transition zone.
    pub f_tr: VectorField,
    /// Darcy source.
    pub q: ScalarField,
}

impl SourceFieldsFull {
    pub fn zero() -> Self {
        Self { f_ff: zero_vector(), f_tr: zero_vector(), q: zero_scalar() }
    }
}

/// Outer boundary conditions of the full model. `ff_bottom` exists only for
/// the single-region Stokes box; on the layered domain the free flow ends at
/// the interface.
pub struct BoundarySpecFull {
    pub ff_left: VelocityBc,
    pub ff_right: VelocityBc,
    pub ff_top: VelocityBc,
    pub ff_bottom: Option<VelocityBc>,
    pub tr_left: VelocityBc,
    pub tr_right: VelocityBc,
    pub pm_left: DarcyBc,
    pub pm_right: DarcyBc,
    pub pm_bottom: DarcyBc,
}

impl BoundarySpecFull {
    /// Dirichlet data everywhere, sampled from given velocity and pressure
    /// fields (the manufactured-solution setup).
    pub fn dirichlet_everywhere(
        velocity: impl Fn(f64, f64) -> [f64; 2] + Clone + 'static,
        pressure: impl Fn(f64, f64) -> f64 + Clone + 'static,
    ) -> Self {
        Self {
            ff_left: VelocityBc::Dirichlet(Box::new(velocity.clone())),
            ff_right: VelocityBc::Dirichlet(Box::new(velocity.clone())),
            ff_top: VelocityBc::Dirichlet(Box::new(velocity.clone())),
            ff_bottom: None,
            tr_left: VelocityBc::Dirichlet(Box::new(velocity.clone())),
            tr_right: VelocityBc::Dirichlet(Box::new(velocity)),
            pm_left: DarcyBc::Pressure(Box::new(pressure.clone())),
            pm_right: DarcyBc::Pressure(Box::new(pressure.clone())),
            pm_bottom: DarcyBc::Pressure(Box::new(pressure)),
        }
    }

    pub fn check_coverage(&self, is_stokes_box: bool) -> Result<()> {
        match (is_stokes_box, self.ff_bottom.is_some()) {
            (true, false) => Err(Error::Assembly(
                "single-region grid: the free-flow bottom boundary has no condition".into(),
            )),
            (false, true) => Err(Error::Assembly(
                "layered grid: free flow has no outer bottom boundary".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Source terms of the reduced model: bulk sources plus the averaged
/// interface sources as functions of the tangential coordinate.
pub struct SourceFieldsReduced {
    pub f_ff: VectorField,
    pub q: ScalarField,
    pub f_n: LineField,
    pub f_tau: LineField,
}

impl SourceFieldsReduced {
    pub fn zero() -> Self {
        Self { f_ff: zero_vector(), q: zero_scalar(), f_n: zero_line(), f_tau: zero_line() }
    }
}

/// Outer boundary conditions of the reduced model.
pub struct BoundarySpecReduced {
    pub ff_left: VelocityBc,
    pub ff_right: VelocityBc,
    pub ff_top: VelocityBc,
    pub pm_left: DarcyBc,
    pub pm_right: DarcyBc,
    pub pm_bottom: DarcyBc,
}

/// Condition at one endpoint of the interface line. Neumann data are the
/// averaged tractions oriented along +tau.
#[derive(Debug, Clone, Copy)]
pub enum GammaEndBc {
    Dirichlet { u_n: f64, u_tau: f64 },
    Neumann { t_n: f64, t_tau: f64 },
}

/// Endpoint conditions of the interface line.
#[derive(Debug, Clone, Copy)]
pub struct GammaBoundarySpec {
    pub left: GammaEndBc,
    pub right: GammaEndBc,
}

impl GammaBoundarySpec {
    pub fn no_slip() -> Self {
        let end = GammaEndBc::Dirichlet { u_n: 0.0, u_tau: 0.0 };
        Self { left: end, right: end }
    }
}
