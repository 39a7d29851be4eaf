//! Filippov (piecewise-smooth) vector fields on the plane, the torus and the
//! Klein bottle.
//!
//! The crate classifies discontinuity sets, integrates set-valued Filippov
//! flows with sliding and branching, estimates the saturation of the
//! non-uniqueness set and checks or constructs invariant measures.

pub mod classify;
pub mod error;
pub mod expr;
pub mod flow;
pub mod geometry;
pub mod measure;
pub mod nonuniqueness;
pub mod scenario_file;
pub mod scenarios;
pub mod stepper;
pub mod system;

pub use error::{Error, Result};
pub use geometry::{DomainMode, QuotientDomain, Seam, Vec2};
pub use system::{PiecewiseSystem, SurfaceId};
