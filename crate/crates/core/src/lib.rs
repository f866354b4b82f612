//! Exact construction of a positive-measure fractal arc in the plane, the
//! `C^{2-}` functions living on it, a constructive Whitney extension of their
//! jets, and the sphere whose tangent planes meet the contact distribution
//! `dz - y dx = 0` along a Jordan curve of positive area.

pub mod arc;
pub mod error;
pub mod estimates;
pub mod exact;
pub mod functions;
pub mod jordan;
pub mod surface;
pub mod whitney;

pub use error::{Error, Result};
