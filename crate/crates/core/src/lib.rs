//! Fractional area and fractional mean curvature of hypersurfaces with
//! boundary: polylines in the plane and triangle meshes in space.
//!
//! The normalization constant c_N defaults to 1; every sign and vanishing
//! statement is independent of it.

pub mod area;
pub mod curvature;
pub mod error;
pub mod exec;
pub mod flow;
pub mod geometry;
pub mod params;
pub mod probes;
pub mod quad;
pub mod rng;
pub mod shapes;
pub mod side;

pub use curvature::{fmc_estimate, Estimate, QuadratureSpec};
pub use error::{Error, Result};
pub use exec::Execution;
pub use geometry::{build_polyline, build_polylines, build_trimesh, pt2, Hypersurface, Point, Segment};
pub use params::{Dim, Params};
pub use side::{classify, SideLabel};
