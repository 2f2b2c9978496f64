//! Verification and classification for 4-dimensional Riemannian manifolds
//! `(M, Q, g)` whose structure `Q` is the cyclic shift (`Q^4 = id`) and an
//! isometry of `g`, together with the almost product manifold `(M, Q^2, g)`.
//!
//! The pipeline is pointwise in a single chart:
//!
//! 1. [`expr`] parses metric and structure components and differentiates
//!    them symbolically.
//! 2. [`geometry`] evaluates the metric jets at a point and builds the
//!    Levi-Civita connection, `∇Q`, `∇P` and the curvature tensor.
//! 3. [`classify`] forms `F`, `F̄` and the Lee forms, and evaluates the
//!    W0..W3 conditions and the structural identities relating them.
//! 4. [`cli`] loads spec files and renders reports.

#![allow(clippy::needless_range_loop)]

pub mod circulant;
pub mod classify;
pub mod cli;
pub mod expr;
pub mod geometry;
pub mod sampling;
pub mod tensor;

pub use circulant::{canonical_p, canonical_q, compatibility_residual, CirculantMetricSpec};
pub use classify::{
    classify, identity_suite, point_tensors, ClassReport, ClassifyError, ClassifyOptions, Identity, IdentityReport,
    PointTensors, Residuals, Verdict, Verdicts,
};
pub use expr::{parse, Coord, EvalError, Expr, ParseError};
pub use geometry::{frame_at, nabla_of_field, Domain, GeometryFrame, ManifoldSpec, PointError};
pub use tensor::{Mat4, SingularError, Vec4, T3, T4};
