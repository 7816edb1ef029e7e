//! Numerical laboratory for convex billiards with the equal-angle chord
//! property: for a fixed angle delta, every chord meeting the boundary at
//! angle delta on one end meets it at angle delta on the other.
//!
//! The crate provides planar convex curves through Fourier support functions,
//! dimension-generic convex bodies (spheres, ellipsoids, constant-width bodies
//! of revolution), the Birkhoff billiard map and its delta-chord restriction,
//! defect scans that measure how far a body is from the equal-angle property,
//! verification routines for the chord/curvature identities that force the
//! property onto round spheres in dimension three and up, and geodesic
//! integration with Frenet data on quadrics.
//!
//! Everything is deterministic: samplers are seeded low-discrepancy sequences
//! and reductions are fixed-order compensated sums, so a scan re-run with the
//! same seed reproduces its report byte for byte regardless of thread count.

pub mod billiard;
pub mod error;
pub mod geodesics;
pub mod geom2d;
pub mod geomnd;
pub mod gutkin;
pub mod lemmas;
pub mod numerics;
pub mod sampling;


pub use billiard::{ChordRecord, OrientedLine, PhasePoint2D};
pub use error::{Error, Result};
pub use geom2d::{CurvePoint, CurveSpec, SupportCurve2D};
pub use geomnd::{BodySpec, ConvexBodyND, SurfacePoint};
pub use gutkin::{DefectReport, DeltaRoot};


