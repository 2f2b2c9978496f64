//! Pointwise Riemannian geometry in a single chart.
//!
//! A [`ManifoldSpec`] holds the metric `g_ij` and a (1,1) structure field
//! `Q^k_j` as expressions in `x1..x4`. Their first and second symbolic
//! derivatives are built once when the spec is constructed; [`frame_at`]
//! then evaluates everything at a point and assembles the Levi-Civita
//! connection, the covariant derivatives of `Q` and `P = Q^2`, and the
//! (0,4) curvature tensor.

use std::fmt;

use thiserror::Error;

use crate::expr::{Coord, EvalError, Expr};
use crate::tensor::{Mat4, SingularError, Vec4, DIM, T3, T4};

/// Leading principal minors must exceed this for a point to be accepted.
pub const MINOR_FLOOR: f64 = 1e-12;
/// Per-entry tolerance for `Q^4 = I`.
pub const INVOLUTION_TOL: f64 = 1e-10;
/// Tolerance for `Q^T g Q = g`, relative to `max(1, |g|)`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;
/// Tolerance for `g_ij = g_ji`, relative to `max(1, |g|)`.
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Norms below this are treated as zero when normalizing residuals.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// A 4x4 array of component expressions.
pub type ExprMat = [[Expr; DIM]; DIM];

pub fn expr_mat_from_fn(f: impl Fn(usize, usize) -> Expr) -> ExprMat {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn constant_expr_mat(m: &Mat4) -> ExprMat {
    expr_mat_from_fn(|i, j| Expr::constant(m[(i, j)]))
}

/// Symbolic matrix product of two component arrays.
pub fn expr_mat_mul(a: &ExprMat, b: &ExprMat) -> ExprMat {
    expr_mat_from_fn(|i, j| {
        (0..DIM).fold(Expr::zero(), |acc, k| Expr::add(acc, Expr::mul(a[i][k].clone(), b[k][j].clone())))
    })
}

/// Closed sampling box, one interval per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain(pub [(f64, f64); DIM]);

impl Domain {
    pub fn cube(min: f64, max: f64) -> Domain {
        Domain([(min, max); DIM])
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        for (axis, &(lo, hi)) in self.0.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(DomainError { coord: Coord::from_axis(axis).unwrap_or(Coord::X1), lo, hi });
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: &Vec4) -> bool {
        self.0.iter().zip(p.0.iter()).all(|(&(lo, hi), &x)| lo <= x && x <= hi)
    }
}

impl Default for Domain {
    fn default() -> Self {
        Domain::cube(-1.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("invalid interval for {coord}: [{lo}, {hi}]")]
pub struct DomainError {
    pub coord: Coord,
    pub lo: f64,
    pub hi: f64,
}

/// Reasons a sample point is rejected.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PointError {
    #[error("point lies outside the domain")]
    OutsideDomain,
    #[error("evaluating {component}: {source}")]
    Eval { component: String, source: EvalError },
    #[error("metric is not symmetric (asymmetry {0:e})")]
    AsymmetricMetric(f64),
    #[error("metric is not positive definite (leading minors {0:?})")]
    NotPositiveDefinite([f64; DIM]),
    #[error("metric is degenerate: {0}")]
    Singular(#[from] SingularError),
    #[error("structure fails Q^4 = I (deviation {0:e})")]
    NotQuartic(f64),
    #[error("structure is not an isometry of the metric (residual {0:e})")]
    Incompatible(f64),
}

/// Metric and structure of a 4-manifold in one chart, plus the symbolic
/// derivatives needed for the connection and curvature.
#[derive(Debug, Clone)]
pub struct ManifoldSpec {
    label: String,
    domain: Domain,
    metric: ExprMat,
    structure: ExprMat,
    product: ExprMat,
    // d_metric[k][i][j] = ∂_k g_ij, dd_metric[m][k][i][j] = ∂_m ∂_k g_ij
    d_metric: [ExprMat; DIM],
    dd_metric: [[ExprMat; DIM]; DIM],
    d_structure: [ExprMat; DIM],
    d_product: [ExprMat; DIM],
}

fn differentiate_mat(m: &ExprMat) -> [ExprMat; DIM] {
    std::array::from_fn(|k| {
        let coord = Coord::ALL[k];
        expr_mat_from_fn(|i, j| m[i][j].differentiate(coord))
    })
}

impl ManifoldSpec {
    /// Builds a spec and its derivative tables. `P = Q^2` is formed
    /// symbolically so non-constant structures are handled exactly.
    pub fn new(
        label: impl Into<String>,
        metric: ExprMat,
        structure: ExprMat,
        domain: Domain,
    ) -> Result<ManifoldSpec, DomainError> {
        domain.validate()?;
        let product = expr_mat_mul(&structure, &structure);
        let d_metric = differentiate_mat(&metric);
        let dd_metric = std::array::from_fn(|m| differentiate_mat(&d_metric[m]));
        let d_structure = differentiate_mat(&structure);
        let d_product = differentiate_mat(&product);
        Ok(ManifoldSpec {
            label: label.into(),
            domain,
            metric,
            structure,
            product,
            d_metric,
            dd_metric,
            d_structure,
            d_product,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn metric(&self) -> &ExprMat {
        &self.metric
    }

    pub fn structure(&self) -> &ExprMat {
        &self.structure
    }

    /// Symbolic `P = Q^2`.
    pub fn product(&self) -> &ExprMat {
        &self.product
    }

    /// Same structure and domain with every metric component multiplied by `c`.
    pub fn with_scaled_metric(&self, c: f64) -> ManifoldSpec {
        let metric = expr_mat_from_fn(|i, j| Expr::mul(Expr::constant(c), self.metric[i][j].clone()));
        ManifoldSpec::new(self.label.clone(), metric, self.structure.clone(), self.domain)
            .expect("domain already validated")
    }

    pub fn with_domain(&self, domain: Domain) -> Result<ManifoldSpec, DomainError> {
        domain.validate()?;
        Ok(ManifoldSpec { domain, ..self.clone() })
    }
}

/// Everything known about the geometry at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFrame {
    pub point: Vec4,
    pub g: Mat4,
    pub ginv: Mat4,
    /// `dg[k][i][j] = ∂_k g_ij`.
    pub dg: [[[f64; DIM]; DIM]; DIM],
    /// `gamma[i][j][k] = Γ^k_ij`.
    pub gamma: T3,
    pub q: Mat4,
    pub p: Mat4,
    /// `nabla_q[i][j][k] = (∇_i Q)^k_j`.
    pub nabla_q: T3,
    pub nabla_p: T3,
    /// `r[i][j][k][l] = R(e_i, e_j, e_k, e_l) = g(R(e_i, e_j) e_k, e_l)`.
    pub r: T4,
}

struct Evaluator<'a> {
    point: &'a [f64; DIM],
}

impl Evaluator<'_> {
    fn mat(&self, m: &ExprMat, what: impl Fn(usize, usize) -> String) -> Result<Mat4, PointError> {
        let mut out = Mat4::zero();
        for i in 0..DIM {
            for j in 0..DIM {
                out[(i, j)] = m[i][j]
                    .evaluate(self.point)
                    .map_err(|source| PointError::Eval { component: what(i, j), source })?;
            }
        }
        Ok(out)
    }

    fn d_mat(&self, dm: &[ExprMat; DIM], name: &str) -> Result<[Mat4; DIM], PointError> {
        let mut out = [Mat4::zero(); DIM];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.mat(&dm[k], |i, j| format!("d{name}{}{}/dx{}", i + 1, j + 1, k + 1))?;
        }
        Ok(out)
    }
}

fn symmetrize(m: &Mat4) -> Mat4 {
    Mat4::from_fn(|i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

/// Christoffel symbols `Γ^k_ij` (stored `[i][j][k]`) from the inverse metric
/// and `dg[k][i][j] = ∂_k g_ij`.
pub fn christoffel(ginv: &Mat4, dg: &[[[f64; DIM]; DIM]; DIM]) -> T3 {
    let first = first_kind(dg);
    T3::from_fn(|i, j, k| (0..DIM).map(|l| ginv[(k, l)] * first[i][j][l]).sum())
}

// Γ_ijl = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
fn first_kind(dg: &[[[f64; DIM]; DIM]; DIM]) -> [[[f64; DIM]; DIM]; DIM] {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|l| 0.5 * ((dg[i][j][l] + dg[j][i][l]) - dg[l][i][j])))
    })
}

/// `(∇_i A)^k_j = ∂_i A^k_j + Γ^k_il A^l_j − Γ^l_ij A^k_l`, stored `[i][j][k]`.
pub fn covariant_derivative(gamma: &T3, a: &Mat4, da: &[Mat4; DIM]) -> T3 {
    T3::from_fn(|i, j, k| {
        let mut acc = da[i][(k, j)];
        for l in 0..DIM {
            acc += gamma.get(i, l, k) * a[(l, j)] - gamma.get(i, j, l) * a[(k, l)];
        }
        acc
    })
}

/// Evaluates the full frame at `point`, rejecting the point if any
/// admissibility condition fails.
pub fn frame_at(spec: &ManifoldSpec, point: &Vec4) -> Result<GeometryFrame, PointError> {
    if !spec.domain.contains(point) {
        return Err(PointError::OutsideDomain);
    }
    let ev = Evaluator { point: &point.0 };

    let g_raw = ev.mat(&spec.metric, |i, j| format!("g{}{}", i + 1, j + 1))?;
    let g_scale = g_raw.max_abs().max(1.0);
    let asym = (g_raw - g_raw.transpose()).max_abs();
    if asym > SYMMETRY_TOL * g_scale {
        return Err(PointError::AsymmetricMetric(asym));
    }
    let g = symmetrize(&g_raw);
    let minors = g.leading_minors();
    if minors.iter().any(|&m| m <= MINOR_FLOOR) {
        return Err(PointError::NotPositiveDefinite(minors));
    }
    let ginv = g.inverse()?;

    let q = ev.mat(&spec.structure, |i, j| format!("q{}{}", i + 1, j + 1))?;
    let quartic = (q.powi(4) - Mat4::identity()).max_abs();
    if quartic > INVOLUTION_TOL {
        return Err(PointError::NotQuartic(quartic));
    }
    let compat = (q.transpose() * g * q - g).max_abs();
    if compat > COMPATIBILITY_TOL * g_scale {
        return Err(PointError::Incompatible(compat));
    }
    let p = ev.mat(&spec.product, |i, j| format!("p{}{}", i + 1, j + 1))?;

    let dg_mats = ev.d_mat(&spec.d_metric, "g")?;
    let dg: [[[f64; DIM]; DIM]; DIM] = std::array::from_fn(|k| symmetrize(&dg_mats[k]).0);
    let mut ddg = [[[[0.0; DIM]; DIM]; DIM]; DIM];
    for m in 0..DIM {
        let dd = ev.d_mat(&spec.dd_metric[m], "dg")?;
        for k in 0..DIM {
            ddg[m][k] = symmetrize(&dd[k]).0;
        }
    }
    let dq = ev.d_mat(&spec.d_structure, "q")?;
    let dp = ev.d_mat(&spec.d_product, "p")?;

    let gamma = christoffel(&ginv, &dg);
    let nabla_q = covariant_derivative(&gamma, &q, &dq);
    let nabla_p = covariant_derivative(&gamma, &p, &dp);
    let r = curvature(&g, &ginv, &dg, &ddg, &gamma);

    Ok(GeometryFrame { point: *point, g, ginv, dg, gamma, q, p, nabla_q, nabla_p, r })
}

/// (0,4) curvature from the metric jets.
///
/// `R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik` and
/// `R_ijkm = g_lm R^l_ijk`.
fn curvature(
    g: &Mat4,
    ginv: &Mat4,
    dg: &[[[f64; DIM]; DIM]; DIM],
    ddg: &[[[[f64; DIM]; DIM]; DIM]; DIM],
    gamma: &T3,
) -> T4 {
    let first = first_kind(dg);
    // ∂_m g^kl = −g^ka ∂_m g_ab g^bl
    let dginv: [Mat4; DIM] = std::array::from_fn(|m| {
        let dgm = Mat4(dg[m]);
        let t = *ginv * dgm * *ginv;
        Mat4::from_fn(|k, l| -t[(k, l)])
    });
    // dgamma[m][i][j][k] = ∂_m Γ^k_ij
    let dgamma: [T3; DIM] = std::array::from_fn(|m| {
        let d_first: [[[f64; DIM]; DIM]; DIM] = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|l| 0.5 * ((ddg[m][i][j][l] + ddg[m][j][i][l]) - ddg[m][l][i][j]))
            })
        });
        T3::from_fn(|i, j, k| {
            (0..DIM).map(|l| dginv[m][(k, l)] * first[i][j][l] + ginv[(k, l)] * d_first[i][j][l]).sum()
        })
    });
    // riemann[i][j][k][l] = R^l_ijk
    let riemann = T4::from_fn(|i, j, k, l| {
        let mut acc = dgamma[i].get(j, k, l) - dgamma[j].get(i, k, l);
        for m in 0..DIM {
            acc += gamma.get(i, m, l) * gamma.get(j, k, m) - gamma.get(j, m, l) * gamma.get(i, k, m);
        }
        acc
    });
    T4::from_fn(|i, j, k, m| (0..DIM).map(|l| g[(l, m)] * riemann.get(i, j, k, l)).sum())
}

/// Covariant derivative of an arbitrary (1,1) field over the spec's metric.
pub fn nabla_of_field(spec: &ManifoldSpec, field: &ExprMat, point: &Vec4) -> Result<T3, PointError> {
    let frame = frame_at(spec, point)?;
    let ev = Evaluator { point: &point.0 };
    let a = ev.mat(field, |i, j| format!("a{}{}", i + 1, j + 1))?;
    let da = ev.d_mat(&differentiate_mat(field), "a")?;
    Ok(covariant_derivative(&frame.gamma, &a, &da))
}

/// `max |Γ^k_ij − Γ^k_ji|`.
pub fn torsion_residual(frame: &GeometryFrame) -> f64 {
    let g = &frame.gamma;
    (g.permute([1, 0, 2]) - *g).max_abs()
}

/// `max |∇_k g_ij|` divided by `max(1, |∂g|)`.
pub fn metricity_residual(frame: &GeometryFrame) -> f64 {
    let mut worst: f64 = 0.0;
    let mut dg_max: f64 = 0.0;
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                let mut v = frame.dg[k][i][j];
                dg_max = dg_max.max(v.abs());
                for l in 0..DIM {
                    v -= frame.gamma.get(k, i, l) * frame.g[(l, j)] + frame.gamma.get(k, j, l) * frame.g[(i, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    worst / dg_max.max(1.0)
}

/// Algebraic curvature symmetries, each normalized by `max(floor, |R|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureSymmetries {
    /// `R_ijkl + R_jikl`
    pub skew_first_pair: f64,
    /// `R_ijkl + R_ijlk`
    pub skew_last_pair: f64,
    /// `R_ijkl − R_klij`
    pub pair_exchange: f64,
    /// `R_ijkl + R_jkil + R_kijl`
    pub first_bianchi: f64,
}

impl CurvatureSymmetries {
    pub fn max(&self) -> f64 {
        self.skew_first_pair.max(self.skew_last_pair).max(self.pair_exchange).max(self.first_bianchi)
    }
}

pub fn curvature_symmetries(frame: &GeometryFrame) -> CurvatureSymmetries {
    let r = &frame.r;
    let scale = r.max_abs().max(DEGENERACY_FLOOR);
    let mut out =
        CurvatureSymmetries { skew_first_pair: 0.0, skew_last_pair: 0.0, pair_exchange: 0.0, first_bianchi: 0.0 };
    for i in 0..DIM {
        for j in 0..DIM {
            for k in 0..DIM {
                for l in 0..DIM {
                    let v = r.get(i, j, k, l);
                    out.skew_first_pair = out.skew_first_pair.max((v + r.get(j, i, k, l)).abs());
                    out.skew_last_pair = out.skew_last_pair.max((v + r.get(i, j, l, k)).abs());
                    out.pair_exchange = out.pair_exchange.max((v - r.get(k, l, i, j)).abs());
                    out.first_bianchi = out.first_bianchi.max((v + r.get(j, k, i, l) + r.get(k, i, j, l)).abs());
                }
            }
        }
    }
    out.skew_first_pair /= scale;
    out.skew_last_pair /= scale;
    out.pair_exchange /= scale;
    out.first_bianchi /= scale;
    out
}

/// Compares `∇P` with the Leibniz expansion `Q∘∇Q + ∇Q∘Q`, normalized by
/// `max(floor, |∇P|, |∇Q||Q|)`.
pub fn leibniz_residual(frame: &GeometryFrame) -> f64 {
    let q = &frame.q;
    let nq = &frame.nabla_q;
    let expanded =
        T3::from_fn(|i, j, k| (0..DIM).map(|l| q[(k, l)] * nq.get(i, j, l) + nq.get(i, l, k) * q[(l, j)]).sum());
    let scale = DEGENERACY_FLOOR.max(frame.nabla_p.max_abs()).max(nq.max_abs() * q.max_abs());
    (frame.nabla_p - expanded).max_abs() / scale
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(lo, hi)| format!("[{lo}, {hi}]")).collect();
        write!(f, "{}", parts.join(" x "))
    }
}
