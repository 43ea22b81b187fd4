//! Explicit real algebraic functions on closed manifolds whose Reeb graphs
//! are prescribed cycle or path graphs.

pub mod certificate;
pub mod corpus;
pub mod graph_model;
pub mod layout;
pub mod numeric;
pub mod poly;
pub mod sweep;

pub use graph_model::{validate, GraphSpec, Mode, ValidatedSpec, Violation};
pub use layout::{build_arrangement, CircleArrangement, LayoutError, PlacedCircle, Role};
pub use numeric::{Interval, StructuredAngle, DEFAULT_PRECISION_BITS};
pub use poly::{synthesize, FactoredPolynomial, PolyError, Synthesis, SynthesisError};
pub use sweep::{sweep_reeb, ReebGraphResult};
