//! Minimization of generalized integral Menger curvature for closed
//! polygonal curves by a projected Sobolev gradient flow.
//!
//! The flow descends the discrete energy along the gradient taken with
//! respect to a fractional Sobolev (Gagliardo) inner product, projected onto
//! the null space of the logarithmic edge-strain and barycenter constraints.
//! Every accepted step preserves edge-length strain, the barycenter, and the
//! knot class (the latter certified by a level-preserving isotopy check on
//! the linear homotopy between consecutive polylines).
//!
//! Module map:
//! - [`geometry`]: partitions, polylines, discrete diagnostics
//! - [`energy`]: discrete Menger energy and its analytic differential
//! - [`metric`]: Gagliardo Gram matrix (discrete Riesz isomorphism)
//! - [`constraints`]: strain and barycenter constraint maps and Jacobians
//! - [`saddle`]: KKT saddle-point assembly, factorization and solves
//! - [`isotopy`]: certification of knot-class preservation per step
//! - [`flow`]: the projected gradient descent driver

// Negated float comparisons below (`!(x > 0.0)`) are deliberate: unlike
// `x <= 0.0` they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constraints;
pub mod energy;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod isotopy;
pub mod metric;
pub mod saddle;
mod segments;
mod vecn;

pub use nalgebra;

pub use constraints::{BarycenterJacobian, StrainJacobian, StrainVector};
pub use energy::{EnergyParams, EnergyReport};
pub use error::{CurveError, Result};
pub use flow::{FlowConfig, FlowResult, FlowState, StopReason, TraceRow};
pub use geometry::{Partition, Polyline};
pub use isotopy::{HomotopyCertificate, IsotopyPolicy};
pub use metric::GagliardoMatrix;
pub use saddle::SaddleSystem;
pub use segments::segment_distance;
