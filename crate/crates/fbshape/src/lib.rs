//! Numerical laboratory for overdetermined free-boundary problems on
//! star-shaped planar domains: chained Dirichlet solvers, shape calculus,
//! residual-driven boundary flows, and condition checkers.

pub mod cheeger;
pub mod conditions;
pub mod error;
pub mod fem;
pub mod flows;
pub mod geometry;
pub mod io;
pub mod mesh;
pub mod radial;
pub mod scalar;
pub mod shape_calculus;
pub mod sparse;

pub use error::{Error, Result};

/// Concrete double-precision aliases for the generic core types.
pub type StarDomain = geometry::StarDomain<f64>;
pub type BoundaryTrace = geometry::BoundaryTrace<f64>;
pub type DeformationField = geometry::DeformationField<f64>;
pub type ConvexBody = geometry::ConvexBody<f64>;
pub type NormalCone = geometry::NormalCone<f64>;
pub type Mesh = mesh::Mesh<f64>;
pub type SourceSpec = fem::SourceSpec<f64>;
pub type Chain = fem::Chain<f64>;
pub type DerivativeChain = fem::DerivativeChain<f64>;
