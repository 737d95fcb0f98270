//! Numerical experiments on Laplace eigenfunctions of model analytic surfaces:
//! Carleman estimates, three-sphere and doubling inequalities, complex growth
//! bounds and the measure of critical and nodal sets.

pub mod carleman;
pub mod error;
pub mod fieldcalc;
pub mod geomeasure;
pub mod growth;
pub mod manifolds;
pub mod numerics;
pub mod spectra;
pub mod uniqueness;

pub use error::{Error, Result};
pub use manifolds::{ModelSurface, Point, Profile, QuadratureRule, Region};
pub use spectra::{ChartField, EigenPair};
