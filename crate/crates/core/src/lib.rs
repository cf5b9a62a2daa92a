pub mod error;
pub mod field;
pub mod geometry;
pub mod oracles;
pub mod semiclassics;
pub mod starprod;
pub mod triangles;

pub use error::{Error, Result};
pub use field::{Damping, QuadraticPhase, ScalarField};
pub use geometry::{Point, Space, SpaceKind, Tangent, Vec3};
pub use semiclassics::{Composition, GeneratingFunction};
pub use starprod::{QuadratureSpec, StarOptions, StarResult, Strategy};
pub use triangles::{CornerTriple, Eta, MidpointTriple};
