//! The canonical circulant structure and metrics compatible with it.
//!
//! With the cyclic shift `Q` as structure, `g(Qx, Qy) = g(x, y)` forces the
//! metric matrix to be symmetric circulant, `g = circ(A, B, C, B)`. Its
//! eigenvalues are `A + 2B + C`, `A - C` (twice) and `A - 2B + C`, so it is
//! positive definite iff all three are positive.

use crate::expr::Expr;
use crate::geometry::{constant_expr_mat, expr_mat_from_fn, Domain, DomainError, ManifoldSpec};
use crate::tensor::{Mat4, DIM};

/// The cyclic shift with ones at (1,2), (2,3), (3,4), (4,1). It sends
/// `e_1 -> e_4` and `e_j -> e_{j-1}`.
pub fn canonical_q() -> Mat4 {
    Mat4::from_fn(|i, j| if j == (i + 1) % DIM { 1.0 } else { 0.0 })
}

/// `P = Q^2` for the canonical `Q`.
pub fn canonical_p() -> Mat4 {
    let q = canonical_q();
    q * q
}

/// `|Q^T g Q - g|_max`.
pub fn compatibility_residual(g: &Mat4, q: &Mat4) -> f64 {
    (q.transpose() * *g * *q - *g).max_abs()
}

/// Eigenvalues of `circ(a, b, c, b)` in Fourier order (frequencies 0..3).
pub fn circulant_eigenvalues(a: f64, b: f64, c: f64) -> [f64; DIM] {
    [a + 2.0 * b + c, a - c, a - 2.0 * b + c, a - c]
}

/// Metric `circ(A, B, C, B)` given by three scalar fields.
#[derive(Debug, Clone)]
pub struct CirculantMetricSpec {
    pub label: String,
    pub a: Expr,
    pub b: Expr,
    pub c: Expr,
    pub domain: Domain,
}

impl CirculantMetricSpec {
    pub fn new(label: impl Into<String>, a: Expr, b: Expr, c: Expr, domain: Domain) -> Self {
        CirculantMetricSpec { label: label.into(), a, b, c, domain }
    }

    /// Component layout: `g_ij = row[(j - i) mod 4]` with `row = (A, B, C, B)`.
    pub fn metric_exprs(&self) -> [[Expr; DIM]; DIM] {
        let row = [&self.a, &self.b, &self.c, &self.b];
        expr_mat_from_fn(|i, j| row[(j + DIM - i) % DIM].clone())
    }

    pub fn to_manifold_spec(&self) -> Result<ManifoldSpec, DomainError> {
        ManifoldSpec::new(self.label.clone(), self.metric_exprs(), constant_expr_mat(&canonical_q()), self.domain)
    }
}
