//! System assembly for the two coupled models.

pub mod bc;
pub mod full;
pub mod reduced;

pub use bc::{
    BoundarySpecFull, BoundarySpecReduced, DarcyBc, GammaBoundarySpec, GammaEndBc,
    SourceFieldsFull, SourceFieldsReduced, VelocityBc,
};
pub use full::assemble_full;
pub use reduced::{assemble_reduced, normal_closure, tangential_closure, TangentialClosure};
