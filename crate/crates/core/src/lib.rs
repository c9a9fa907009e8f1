//! Natural SU(2)-structures on tangent sphere bundles of constant-curvature
//! 3-manifolds: exact invariant-form calculus, induced metrics, class
//! detection, solution families, the hypo evolution flow and a coordinate
//! oracle on the flat model.

pub mod classify;
pub mod evolution;
pub mod exterior;
pub mod families;
pub mod frames;
pub mod oracle;
pub mod poly;
pub mod sample;
pub mod scalar;
pub mod su2core;

pub use exterior::{FrameVector, KForm, MultiIndex};
pub use frames::{GeometryParams, InvariantForm};
pub use poly::Poly;
pub use scalar::{Scalar, DEFAULT_TOL};
pub use su2core::NaturalStructure;
