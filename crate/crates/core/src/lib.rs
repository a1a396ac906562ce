//! Classification of stagnation-point singularities of steady axisymmetric
//! free-surface stream functions.
//!
//! The crate evaluates the Weiss-type boundary-adjusted energy and an
//! Almgren-type frequency function about stagnation candidates on the axis
//! `{y = 0}`, verifies the derivative identities those functionals satisfy,
//! runs blow-up rescalings to estimate homogeneity degrees, and labels each
//! candidate as a Stokes corner, a cusp/zero-density point, or an excluded
//! horizontally-flat point (witnessed by the nonzero distributional Laplacian
//! concentrated on the nodal rays of the would-be limit profile).
//!
//! Pipeline: [`field`] supplies stream functions (synthetic closed forms or
//! grid data), [`quadrature`] the weighted circle/disk/improper integrals,
//! [`functionals`] the radial profiles, [`identity`] the residual checks,
//! [`blowup`] the rescaling machinery, and [`classify`] the labels.

pub mod blowup;
pub mod classify;
pub mod error;
pub mod field;
pub mod functionals;
pub mod identity;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
pub use field::{
    load_grid, make_synthetic, GridField, Point2, ScalarField2D, SyntheticProfileSpec,
    VorticityModel, VorticitySource, Window,
};
pub use functionals::{AnalysisWindow, CoreFunctionals, RadialProfile, RadialRecord};
pub use quadrature::{IntegrandClass, QuadratureSpec};
