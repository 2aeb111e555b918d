//! Discrete spectral geometry toolkit.
//!
//! Scalar fields on measured weighted graphs are rearranged onto
//! constant-curvature model spaces, globally or fiber by fiber over a base,
//! and the resulting profiles feed first-eigenvalue and Yamabe-quotient
//! comparisons on meshed spheres, products, warped products and bounded
//! domains.

pub mod comparisons;
pub mod error;
pub mod functionals;
pub mod manifold;
pub mod model_spaces;
pub mod numeric;
pub mod rearrangement;
pub mod spectrum;

pub use error::{Error, Result};
pub use manifold::{DiscreteManifold, ProductStructure, ScalarField};
pub use model_spaces::{unit_sphere_volume, ModelSpace};
pub use rearrangement::{FiberwiseField, RadialProfile};
pub use spectrum::{SolverOptions, SpectralResult};
