//! Physical parameters shared by all assemblies: permeability and friction
//! tensors, viscosities, the Beavers-Joseph slip coefficient and the closure
//! profile of the normal velocity across the transition zone.

use crate::error::{Error, Result};

/// Symmetric 2x2 tensor `[[xx, xy], [xy, yy]]` with single off-diagonal storage.
///
/// Used for the permeabilities `K_tr`, `K_pm` (units of length^2) and the
/// dimensionless friction tensor `beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl SymTensor2 {
    pub const fn new(xx: f64, xy: f64, yy: f64) -> Self {
        Self { xx, xy, yy }
    }

    /// Isotropic tensor `k * I`.
    pub const fn isotropic(k: f64) -> Self {
        Self { xx: k, xy: 0.0, yy: k }
    }

    pub const fn zero() -> Self {
        Self { xx: 0.0, xy: 0.0, yy: 0.0 }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    /// Symmetric positive definite, tested by leading principal minors.
    pub fn is_spd(&self) -> bool {
        self.xx > 0.0 && self.det() > 0.0
    }

    /// Symmetric positive semi-definite.
    pub fn is_psd(&self) -> bool {
        self.xx >= 0.0 && self.yy >= 0.0 && self.det() >= 0.0
    }

    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let r0 = self.xx.abs() + self.xy.abs();
        let r1 = self.xy.abs() + self.yy.abs();
        r0.max(r1)
    }

    /// Closed-form inverse. Fails for singular or non-SPD input.
    pub fn inverse(&self) -> Result<SymTensor2> {
        if !self.is_spd() {
            return Err(Error::Validation(vec!["tensor not SPD, cannot invert".into()]));
        }
        let det = self.det();
        Ok(SymTensor2 { xx: self.yy / det, xy: -self.xy / det, yy: self.xx / det })
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.xx * v[0] + self.xy * v[1], self.xy * v[0] + self.yy * v[1]]
    }
}

/// `a . K^{-1} . b` for unit vectors `a`, `b`, via the closed-form 2x2 inverse.
///
/// These are the drag projections that couple the averaged interface
/// velocities; for isotropic `K` the mixed projection vanishes.
pub fn m_projection(k: &SymTensor2, a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    let ki = k.inverse()?;
    let kb = ki.apply(b);
    Ok(a[0] * kb[0] + a[1] * kb[1])
}

/// Assumed shape of the normal velocity across the transition zone,
/// determining the closure parameters `(lambda1, lambda2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosureProfile {
    Linear,
    PiecewiseLinear,
    Quadratic,
    Custom { lambda1: f64, lambda2: f64 },
}

impl ClosureProfile {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Self::Linear),
            "piecewise-linear" | "pwlinear" | "piecewise_linear" => Ok(Self::PiecewiseLinear),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(Error::Validation(vec![format!("unknown closure profile `{other}`")])),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::PiecewiseLinear => "piecewise-linear",
            Self::Quadratic => "quadratic",
            Self::Custom { .. } => "custom",
        }
    }
}

/// Closure parameters `(lambda1, lambda2)` for a normal-velocity profile.
///
/// Custom pairs must satisfy `lambda1 > lambda2 >= 0`.
pub fn closure_params(profile: ClosureProfile) -> Result<(f64, f64)> {
    let (l1, l2) = match profile {
        ClosureProfile::Linear => (2.0, 0.0),
        ClosureProfile::PiecewiseLinear => (3.0, 1.0),
        ClosureProfile::Quadratic => (4.0, 2.0),
        ClosureProfile::Custom { lambda1, lambda2 } => (lambda1, lambda2),
    };
    if !(l1 > l2 && l2 >= 0.0) {
        return Err(Error::Validation(vec![format!(
            "closure parameters must satisfy lambda1 > lambda2 >= 0, got ({l1}, {l2})"
        )]));
    }
    Ok((l1, l2))
}

/// Fluid and medium constants for both models.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalParams {
    /// Dynamic viscosity of the fluid.
    pub mu: f64,
    /// Effective viscosity in the transition zone.
    pub mu_eff: f64,
    /// Beavers-Joseph slip coefficient.
    pub alpha: f64,
    /// Friction tensor in the stress jump condition (PSD).
    pub beta: SymTensor2,
    /// Transition-zone permeability (SPD).
    pub k_tr: SymTensor2,
    /// Porous-medium permeability (SPD).
    pub k_pm: SymTensor2,
}

impl PhysicalParams {
    /// Section-5 verification constants: unit viscosities, `alpha = 0.1`,
    /// no friction, isotropic permeabilities `1e-2`.
    pub fn verification() -> Self {
        Self {
            mu: 1.0,
            mu_eff: 1.0,
            alpha: 0.1,
            beta: SymTensor2::zero(),
            k_tr: SymTensor2::isotropic(1e-2),
            k_pm: SymTensor2::isotropic(1e-2),
        }
    }

    /// Scalar permeability reference of the transition zone, `||K_tr||_inf`.
    pub fn k_tr_ref(&self) -> f64 {
        self.k_tr.norm_inf()
    }

    /// Scalar permeability reference of the porous medium, `tau . K_pm . tau`
    /// with `tau = e1` for a horizontal interface.
    pub fn k_pm_ref(&self) -> f64 {
        self.k_pm.xx
    }

    /// Check every invariant; collects all violations instead of stopping at
    /// the first one.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.mu > 0.0) {
            errs.push(format!("mu must be > 0, got {}", self.mu));
        }
        if !(self.mu_eff > 0.0) {
            errs.push(format!("mu_eff must be > 0, got {}", self.mu_eff));
        }
        if !(self.alpha > 0.0) {
            errs.push(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !self.k_tr.is_spd() {
            errs.push("K_tr not SPD".into());
        }
        if !self.k_pm.is_spd() {
            errs.push("K_pm not SPD".into());
        }
        if !self.beta.is_psd() {
            errs.push("beta not PSD".into());
        }
        if errs.is_empty() { Ok(()) } else { Err(Error::Validation(errs)) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: [f64; 2] = [0.0, 1.0];
    const TAU: [f64; 2] = [1.0, 0.0];

    #[test]
    fn closure_params_match_table() {
        assert_eq!(closure_params(ClosureProfile::Linear).unwrap(), (2.0, 0.0));
        assert_eq!(closure_params(ClosureProfile::PiecewiseLinear).unwrap(), (3.0, 1.0));
        assert_eq!(closure_params(ClosureProfile::Quadratic).unwrap(), (4.0, 2.0));
        let c = ClosureProfile::Custom { lambda1: 5.0, lambda2: 0.5 };
        assert_eq!(closure_params(c).unwrap(), (5.0, 0.5));
    }

    #[test]
    fn closure_params_reject_bad_custom() {
        assert!(closure_params(ClosureProfile::Custom { lambda1: 1.0, lambda2: 1.0 }).is_err());
        assert!(closure_params(ClosureProfile::Custom { lambda1: 2.0, lambda2: -0.5 }).is_err());
        assert!(closure_params(ClosureProfile::Custom { lambda1: 0.5, lambda2: 2.0 }).is_err());
    }

    #[test]
    fn m_projection_isotropic() {
        let k = SymTensor2::isotropic(1e-2);
        assert!((m_projection(&k, N, N).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(m_projection(&k, N, TAU).unwrap(), 0.0);
    }

    #[test]
    fn m_projection_hand_inverse() {
        // K = [[2,1],[1,2]], K^{-1} = (1/3)[[2,-1],[-1,2]]
        let k = SymTensor2::new(2.0, 1.0, 2.0);
        let got = m_projection(&k, [1.0, 0.0], [0.0, 1.0]).unwrap();
        assert!((got - (-1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn m_projection_symmetry_and_positivity() {
        let k = SymTensor2::new(3.0, 0.7, 2.0);
        let a = [0.6, 0.8];
        let b = [-0.8, 0.6];
        let mab = m_projection(&k, a, b).unwrap();
        let mba = m_projection(&k, b, a).unwrap();
        assert!((mab - mba).abs() < 1e-14);
        assert!(m_projection(&k, a, a).unwrap() > 0.0);
    }

    #[test]
    fn m_projection_rejects_singular() {
        let k = SymTensor2::new(1.0, 1.0, 1.0); // det = 0
        assert!(m_projection(&k, N, N).is_err());
    }

    #[test]
    fn validate_section5_params() {
        assert!(PhysicalParams::verification().validate().is_ok());
    }

    #[test]
    fn validate_rejects_documented_bad_inputs() {
        let mut p = PhysicalParams::verification();
        p.k_tr = SymTensor2::new(1.0, 2.0, 1.0); // det = -3
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("K_tr not SPD"), "{err}");

        let mut p = PhysicalParams::verification();
        p.beta = SymTensor2::new(1.0, 0.0, -1.0);
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("beta not PSD"), "{err}");

        let mut p = PhysicalParams::verification();
        p.mu = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn k_refs() {
        let p = PhysicalParams::verification();
        assert_eq!(p.k_tr_ref(), 1e-2);
        assert_eq!(p.k_pm_ref(), 1e-2);
        // anisotropic: inf norm is max abs row sum
        let k = SymTensor2::new(2.0, -1.0, 4.0);
        assert_eq!(k.norm_inf(), 5.0);
    }
}
