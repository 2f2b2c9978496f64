//! Staikova-Gribachev classification of `(M, P = Q^2, g)`.
//!
//! At each point the (0,3) tensors
//!
//! ```text
//! F(x, y, z)  = g((∇_x P) y, z)      α(z)  = g^ij F(e_i, e_j, z)
//! F̄(x, y, z) = g((∇_x Q) y, z)      ᾱ(z) = g^ij F̄(e_i, e_j, z)
//! ```
//!
//! are assembled, and every class condition is evaluated twice: once from
//! `F` directly and once through the `F̄` characterization. Residuals are
//! max-norms of the difference between the two sides, divided by a scale so
//! they are dimensionless and unchanged under a constant rescaling of `g`:
//!
//! * tensor conditions on `F`/`F̄`: `max(floor, |g| |∇P|)`
//! * Lee-form conditions: `max(floor, |∇P|)`
//! * the `(∇_x Q) Q y = -Q (∇_x Q) y` condition: `max(floor, |∇Q|)`
//!
//! The text that introduces `ᾱ` calls it `α`; here the contraction of `F̄`
//! is always `alpha_bar` and the contraction of `F` is always `alpha`.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    curvature_symmetries, frame_at, leibniz_residual, metricity_residual, torsion_residual, GeometryFrame,
    ManifoldSpec, PointError, DEGENERACY_FLOOR,
};
use crate::sampling::{sample_with, SamplingError};
use crate::tensor::{Mat4, Vec4, DIM, T3};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_POINTS: usize = 50;

/// `F`, `F̄` and their Lee forms at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointTensors {
    pub f: T3,
    pub fbar: T3,
    pub alpha: Vec4,
    pub alpha_bar: Vec4,
    pub frame: GeometryFrame,
}

impl PointTensors {
    pub fn from_frame(frame: GeometryFrame) -> PointTensors {
        let f = frame.nabla_p.lower(&frame.g);
        let fbar = frame.nabla_q.lower(&frame.g);
        let alpha = f.contract_lee(&frame.ginv);
        let alpha_bar = fbar.contract_lee(&frame.ginv);
        PointTensors { f, fbar, alpha, alpha_bar, frame }
    }

    pub fn q(&self) -> &Mat4 {
        &self.frame.q
    }

    pub fn q2(&self) -> Mat4 {
        self.frame.q * self.frame.q
    }

    pub fn q3(&self) -> Mat4 {
        self.frame.q.powi(3)
    }

    /// `|g| |∇P|` without the floor.
    pub fn raw_scale(&self) -> f64 {
        self.frame.g.max_abs() * self.frame.nabla_p.max_abs()
    }

    pub fn is_degenerate(&self) -> bool {
        self.raw_scale() < DEGENERACY_FLOOR
    }

    /// Normalization for tensor-valued class conditions.
    pub fn scale(&self) -> f64 {
        self.raw_scale().max(DEGENERACY_FLOOR)
    }

    fn lee_scale(&self) -> f64 {
        self.frame.nabla_p.max_abs().max(DEGENERACY_FLOOR)
    }

    fn identity_scale(&self) -> f64 {
        let nabla = self.frame.nabla_p.max_abs().max(self.frame.nabla_q.max_abs());
        (self.frame.g.max_abs() * nabla).max(DEGENERACY_FLOOR)
    }

    /// `F̄(x, y, Q³z) + F̄(x, Qy, z)`, which equals `F(x, y, z)`.
    pub fn f_from_fbar(&self) -> T3 {
        let q = *self.q();
        let q3 = self.q3();
        self.fbar.compose_slots([None, None, Some(&q3)]) + self.fbar.compose_slots([None, Some(&q), None])
    }

    /// `ᾱ(Q³z) + g^ij F̄(e_i, Qe_j, z)`, which equals `α(z)`.
    pub fn alpha_from_fbar(&self) -> Vec4 {
        let q3 = self.q3();
        let shifted = self.fbar.compose_slots([None, Some(self.q()), None]).contract_lee(&self.frame.ginv);
        Vec4::from_fn(|k| (0..DIM).map(|a| self.alpha_bar[a] * q3[(a, k)]).sum::<f64>() + shifted[k])
    }
}

pub fn point_tensors(spec: &ManifoldSpec, point: &Vec4) -> Result<PointTensors, PointError> {
    frame_at(spec, point).map(PointTensors::from_frame)
}

/// `(1/4)(g(x,y)α(z) + g(x,z)α(y) + s·g(x,Py)α(Pz) + s·g(x,Pz)α(Py))`.
fn w1_rhs(g: &Mat4, p: &Mat4, alpha: &Vec4, sign: f64) -> T3 {
    let gp = *g * *p;
    let alpha_p = Vec4::from_fn(|k| (0..DIM).map(|a| alpha[a] * p[(a, k)]).sum());
    T3::from_fn(|i, j, k| {
        0.25 * (g[(i, j)] * alpha[k]
            + g[(i, k)] * alpha[j]
            + sign * (gp[(i, j)] * alpha_p[k] + gp[(i, k)] * alpha_p[j]))
    })
}

/// `F(x, y, z) = 0`.
pub fn residual_w0(t: &PointTensors) -> f64 {
    if t.frame.nabla_p.max_abs() == 0.0 {
        return 0.0;
    }
    t.f.max_abs() / t.scale()
}

/// `F(x,y,z) = (1/4)(g(x,y)α(z) + g(x,z)α(y) − g(x,Py)α(Pz) − g(x,Pz)α(Py))`.
pub fn residual_w1(t: &PointTensors) -> f64 {
    let rhs = w1_rhs(&t.frame.g, &t.frame.p, &t.alpha, -1.0);
    (t.f - rhs).max_abs() / t.scale()
}

/// `F(x,y,Pz) + F(y,z,Px) + F(z,x,Py) = 0` and `α = 0`.
pub fn residual_w2(t: &PointTensors) -> f64 {
    let cyclic = t.f.compose_slots([None, None, Some(&t.frame.p)]).cyclic_sum();
    (cyclic.max_abs() / t.scale()).max(t.alpha.max_abs() / t.lee_scale())
}

/// `F(x,y,z) + F(y,z,x) + F(z,x,y) = 0`.
pub fn residual_w3(t: &PointTensors) -> f64 {
    t.f.cyclic_sum().max_abs() / t.scale()
}

/// `(∇_x Q) Q y + Q (∇_x Q) y = 0`.
pub fn residual_fs(t: &PointTensors) -> f64 {
    let nq = &t.frame.nabla_q;
    let q = t.q();
    let scale = nq.max_abs();
    if scale == 0.0 {
        return 0.0;
    }
    let lhs = T3::from_fn(|i, j, k| (0..DIM).map(|l| nq.get(i, l, k) * q[(l, j)] + q[(k, l)] * nq.get(i, j, l)).sum());
    lhs.max_abs() / scale.max(DEGENERACY_FLOOR)
}

fn w1_bar_with_sign(t: &PointTensors, sign: f64) -> f64 {
    let rhs = w1_rhs(&t.frame.g, &t.q2(), &t.alpha, sign);
    let tensor = (t.f_from_fbar() - rhs).max_abs() / t.scale();
    let lee = (t.alpha_from_fbar() - t.alpha).max_abs() / t.lee_scale();
    tensor.max(lee)
}

/// W1 through `F̄`: `F̄(x,y,Q³z) + F̄(x,Qy,z)` against the W1 right-hand side
/// with `P = Q²`, together with `ᾱ(Q³z) + g^ij F̄(e_i,Qe_j,z) = α(z)`.
///
/// The `P` terms carry a minus sign here, matching the `F` condition.
/// [`residual_w1_bar_as_printed`] uses a plus sign on those terms.
pub fn residual_w1_bar(t: &PointTensors) -> f64 {
    w1_bar_with_sign(t, -1.0)
}

/// Variant of [`residual_w1_bar`] with `+ g(x,Q²y)α(Q²z) + g(x,Q²z)α(Q²y)`.
pub fn residual_w1_bar_as_printed(t: &PointTensors) -> f64 {
    w1_bar_with_sign(t, 1.0)
}

/// W2 through `F̄`, using `F(x,y,Pz) = F̄(x,y,Qz) + F̄(x,Qy,Q²z)` in the
/// cyclic sum, plus `α = 0` with `α` recovered from `F̄`.
pub fn residual_w2_bar(t: &PointTensors) -> f64 {
    let q = *t.q();
    let q2 = t.q2();
    let f_p = t.fbar.compose_slots([None, None, Some(&q)]) + t.fbar.compose_slots([None, Some(&q), Some(&q2)]);
    let cyclic = f_p.cyclic_sum().max_abs() / t.scale();
    cyclic.max(t.alpha_from_fbar().max_abs() / t.lee_scale())
}

/// W3 through `F̄`: cyclic sum of `F̄(x,y,Q³z) + F̄(x,Qy,z)`.
pub fn residual_w3_bar(t: &PointTensors) -> f64 {
    t.f_from_fbar().cyclic_sum().max_abs() / t.scale()
}

/// W3 through `F̄` with the last summand taken as `F̄(z,Qx,Qy)` instead of
/// `F̄(z,Qx,y)`.
pub fn residual_w3_bar_as_printed(t: &PointTensors) -> f64 {
    let q = *t.q();
    let q3 = t.q3();
    let h = t.f_from_fbar();
    let zxy = t.fbar.compose_slots([None, None, Some(&q3)]) + t.fbar.compose_slots([None, Some(&q), Some(&q)]);
    let sum = h + h.permute([1, 2, 0]) + zxy.permute([2, 0, 1]);
    sum.max_abs() / t.scale()
}

/// Named checks evaluated by [`identity_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    /// `g(Qx, Qy) = g(x, y)`
    QIsometry,
    /// `g(Px, Py) = g(x, y)`
    PIsometry,
    /// `∇P = Q∘∇Q + ∇Q∘Q`
    Leibniz,
    Torsion,
    Metricity,
    CurvatureSkewFirst,
    CurvatureSkewLast,
    CurvaturePairExchange,
    FirstBianchi,
    /// `F̄(x,y,z) + F̄(x,Qy,Qz) = F(x,y,Qz)`
    F14,
    /// `F̄(x,y,Q³z) + F̄(x,Qy,z) = F(x,y,z)`
    F15,
    /// `F(x,y,z) = F(x,z,y)`
    F16,
    /// `F(x,Py,Pz) = −F(x,y,z)`
    F17,
    /// `F̄(x,y,Q³z) + F̄(x,Qy,z) = F̄(x,z,Q³y) + F̄(x,Qz,y)`
    F18,
    /// `Σ_{m=0..3} F̄(x,Q^m y,Q^m z) = 0`
    F19,
    /// `F̄(x,y,Qz) = −F̄(x,z,Qy)`
    F20,
    /// `F̄(x,y,Q³z) = −F̄(x,Q²z,Qy)`
    F21,
    /// `ᾱ(Q³z) + g^ij F̄(e_i,Qe_j,z) = α(z)`
    LeeFromFbar,
    /// `R(x,y,Qz,Qu) = R(x,y,z,u)`, only checked where `∇Q = 0`.
    CurvatureQInvariant,
    /// `R(x,y,Pz,Pu) = R(x,y,z,u)`, only checked where `∇Q = 0`.
    CurvaturePInvariant,
}

impl Identity {
    /// Identities that follow from compatibility and metricity alone and so
    /// must hold at every admissible point.
    pub const UNIVERSAL: [Identity; 8] = [
        Identity::F14,
        Identity::F15,
        Identity::F16,
        Identity::F17,
        Identity::F18,
        Identity::F19,
        Identity::F20,
        Identity::F21,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::QIsometry => "q_isometry",
            Identity::PIsometry => "p_isometry",
            Identity::Leibniz => "leibniz",
            Identity::Torsion => "torsion",
            Identity::Metricity => "metricity",
            Identity::CurvatureSkewFirst => "curvature_skew_first",
            Identity::CurvatureSkewLast => "curvature_skew_last",
            Identity::CurvaturePairExchange => "curvature_pair_exchange",
            Identity::FirstBianchi => "first_bianchi",
            Identity::F14 => "f14",
            Identity::F15 => "f15",
            Identity::F16 => "f16",
            Identity::F17 => "f17",
            Identity::F18 => "f18",
            Identity::F19 => "f19",
            Identity::F20 => "f20",
            Identity::F21 => "f21",
            Identity::LeeFromFbar => "lee_from_fbar",
            Identity::CurvatureQInvariant => "curvature_q_invariant",
            Identity::CurvaturePInvariant => "curvature_p_invariant",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Normalized residual per identity.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdentityReport(pub BTreeMap<Identity, f64>);

impl IdentityReport {
    pub fn get(&self, id: Identity) -> Option<f64> {
        self.0.get(&id).copied()
    }

    pub fn max_universal(&self) -> f64 {
        Identity::UNIVERSAL.iter().filter_map(|&id| self.get(id)).fold(0.0, f64::max)
    }

    fn merge_max(&mut self, other: &IdentityReport) {
        for (&id, &v) in &other.0 {
            let e = self.0.entry(id).or_insert(v);
            *e = e.max(v);
        }
    }
}

pub fn identity_suite(t: &PointTensors) -> IdentityReport {
    let fr = &t.frame;
    let q = *t.q();
    let q2 = t.q2();
    let q3 = t.q3();
    let p = fr.p;
    let fbar = &t.fbar;
    let f = &t.f;
    let scale = t.identity_scale();
    let norm = |x: T3| x.max_abs() / scale;
    let mut out = BTreeMap::new();

    let g_scale = fr.g.max_abs().max(DEGENERACY_FLOOR);
    out.insert(Identity::QIsometry, (q.transpose() * fr.g * q - fr.g).max_abs() / g_scale);
    out.insert(Identity::PIsometry, (p.transpose() * fr.g * p - fr.g).max_abs() / g_scale);
    out.insert(Identity::Leibniz, leibniz_residual(fr));
    out.insert(Identity::Torsion, torsion_residual(fr));
    out.insert(Identity::Metricity, metricity_residual(fr));
    let sym = curvature_symmetries(fr);
    out.insert(Identity::CurvatureSkewFirst, sym.skew_first_pair);
    out.insert(Identity::CurvatureSkewLast, sym.skew_last_pair);
    out.insert(Identity::CurvaturePairExchange, sym.pair_exchange);
    out.insert(Identity::FirstBianchi, sym.first_bianchi);

    let f14 = *fbar + fbar.compose_slots([None, Some(&q), Some(&q)]) - f.compose_slots([None, None, Some(&q)]);
    out.insert(Identity::F14, norm(f14));
    let h = t.f_from_fbar();
    out.insert(Identity::F15, norm(h - *f));
    out.insert(Identity::F16, norm(*f - f.permute([0, 2, 1])));
    out.insert(Identity::F17, norm(f.compose_slots([None, Some(&p), Some(&p)]) + *f));
    out.insert(Identity::F18, norm(h - h.permute([0, 2, 1])));
    let f19 = (0..4u32).fold(T3::zero(), |acc, m| {
        let qm = q.powi(m);
        acc + fbar.compose_slots([None, Some(&qm), Some(&qm)])
    });
    out.insert(Identity::F19, norm(f19));
    let f_qz = fbar.compose_slots([None, None, Some(&q)]);
    out.insert(Identity::F20, norm(f_qz + f_qz.permute([0, 2, 1])));
    let f21_rhs = fbar.compose_slots([None, Some(&q2), Some(&q)]).permute([0, 2, 1]);
    out.insert(Identity::F21, norm(fbar.compose_slots([None, None, Some(&q3)]) + f21_rhs));

    let lee_scale = fr.nabla_p.max_abs().max(fr.nabla_q.max_abs()).max(DEGENERACY_FLOOR);
    out.insert(Identity::LeeFromFbar, (t.alpha_from_fbar() - t.alpha).max_abs() / lee_scale);

    if fr.nabla_q.max_abs() <= DEGENERACY_FLOOR {
        let r_scale = fr.r.max_abs().max(DEGENERACY_FLOOR);
        out.insert(Identity::CurvatureQInvariant, fr.r.compose_last_two(&q).max_abs_diff(&fr.r) / r_scale);
        out.insert(Identity::CurvaturePInvariant, fr.r.compose_last_two(&p).max_abs_diff(&fr.r) / r_scale);
    }
    IdentityReport(out)
}

/// All class residuals at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub fs: f64,
    pub w1_bar: f64,
    pub w2_bar: f64,
    pub w3_bar: f64,
    pub w1_bar_as_printed: f64,
    pub w3_bar_as_printed: f64,
}

impl Residuals {
    pub const NAMES: [&'static str; 10] =
        ["w0", "w1", "w2", "w3", "fs", "w1_bar", "w2_bar", "w3_bar", "w1_bar_as_printed", "w3_bar_as_printed"];

    pub fn evaluate(t: &PointTensors) -> Residuals {
        Residuals {
            w0: residual_w0(t),
            w1: residual_w1(t),
            w2: residual_w2(t),
            w3: residual_w3(t),
            fs: residual_fs(t),
            w1_bar: residual_w1_bar(t),
            w2_bar: residual_w2_bar(t),
            w3_bar: residual_w3_bar(t),
            w1_bar_as_printed: residual_w1_bar_as_printed(t),
            w3_bar_as_printed: residual_w3_bar_as_printed(t),
        }
    }

    pub fn to_array(&self) -> [f64; 10] {
        [
            self.w0,
            self.w1,
            self.w2,
            self.w3,
            self.fs,
            self.w1_bar,
            self.w2_bar,
            self.w3_bar,
            self.w1_bar_as_printed,
            self.w3_bar_as_printed,
        ]
    }

    pub fn from_array(a: [f64; 10]) -> Residuals {
        Residuals {
            w0: a[0],
            w1: a[1],
            w2: a[2],
            w3: a[3],
            fs: a[4],
            w1_bar: a[5],
            w2_bar: a[6],
            w3_bar: a[7],
            w1_bar_as_printed: a[8],
            w3_bar_as_printed: a[9],
        }
    }

    /// Largest disagreement between an `F` residual and its `F̄` counterpart.
    pub fn formulation_gap(&self) -> f64 {
        (self.w1 - self.w1_bar).abs().max((self.w2 - self.w2_bar).abs()).max((self.w3 - self.w3_bar).abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    /// `F` vanishes at every sample, so the condition holds only vacuously.
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub w0: Verdict,
    pub w1: Verdict,
    pub w2: Verdict,
    pub w3: Verdict,
    pub fs: Verdict,
    /// `w0 <= tol` and `fs <= tol` agree at every sample.
    pub fs_equivalent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: [f64; DIM],
    /// Candidates rejected before this point was accepted.
    pub rejected: usize,
    pub raw_scale: f64,
    pub residuals: Residuals,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identities: Option<IdentityReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: String,
    pub n_points: usize,
    pub seed: u64,
    pub tol: f64,
    pub degeneracy_floor: f64,
    pub verdicts: Verdicts,
    pub max: Residuals,
    pub mean: Residuals,
    pub max_formulation_gap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_max: Option<IdentityReport>,
    pub points: Vec<PointRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyOptions {
    pub n_points: usize,
    pub seed: u64,
    pub tol: f64,
    pub check_identities: bool,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { n_points: DEFAULT_POINTS, seed: 0, tol: DEFAULT_TOL, check_identities: true, threads: None }
    }
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

fn evaluate_point(spec: &ManifoldSpec, opts: &ClassifyOptions, index: usize) -> Result<PointRecord, SamplingError> {
    let accepted = sample_with(spec.domain(), opts.seed, index, |p| point_tensors(spec, p))?;
    let t = accepted.value;
    Ok(PointRecord {
        index,
        point: t.frame.point.0,
        rejected: accepted.rejected,
        raw_scale: t.raw_scale(),
        residuals: Residuals::evaluate(&t),
        identities: opts.check_identities.then(|| identity_suite(&t)),
    })
}

/// Samples `n_points` admissible points and aggregates residuals and
/// verdicts. Records are always in index order, independent of threading.
pub fn classify(spec: &ManifoldSpec, opts: &ClassifyOptions) -> Result<ClassReport, ClassifyError> {
    if opts.n_points == 0 {
        return Err(ClassifyError::InvalidOptions("point count must be at least 1".into()));
    }
    if !(opts.tol.is_finite() && opts.tol > 0.0) {
        return Err(ClassifyError::InvalidOptions(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.threads == Some(0) {
        return Err(ClassifyError::InvalidOptions("thread count must be at least 1".into()));
    }
    let run = || -> Vec<Result<PointRecord, SamplingError>> {
        (0..opts.n_points).into_par_iter().map(|i| evaluate_point(spec, opts, i)).collect()
    };
    let results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ClassifyError::InvalidOptions(e.to_string()))?
            .install(run),
        None => run(),
    };
    let points = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(aggregate(spec.label(), opts, points))
}

fn aggregate(label: &str, opts: &ClassifyOptions, points: Vec<PointRecord>) -> ClassReport {
    let tol = opts.tol;
    let n = points.len() as f64;
    let mut max = [0.0f64; 10];
    let mut sum = [0.0f64; 10];
    let mut gap: f64 = 0.0;
    let mut identity_max: Option<IdentityReport> = None;
    for rec in &points {
        for (k, v) in rec.residuals.to_array().into_iter().enumerate() {
            max[k] = max[k].max(v);
            sum[k] += v;
        }
        gap = gap.max(rec.residuals.formulation_gap());
        if let Some(ids) = &rec.identities {
            identity_max.get_or_insert_with(IdentityReport::default).merge_max(ids);
        }
    }

    let all_degenerate = points.iter().all(|r| r.raw_scale < DEGENERACY_FLOOR);
    let live: Vec<&PointRecord> = points.iter().filter(|r| r.raw_scale >= DEGENERACY_FLOOR).collect();
    let class_verdict = |pick: fn(&Residuals) -> f64| {
        if all_degenerate {
            Verdict::Indeterminate
        } else if live.iter().all(|r| pick(&r.residuals) <= tol) {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    };
    let holds = |ok: bool| if ok { Verdict::Holds } else { Verdict::Fails };
    let verdicts = Verdicts {
        w0: holds(all_degenerate || points.iter().all(|r| r.residuals.w0 <= tol)),
        w1: class_verdict(|r| r.w1),
        w2: class_verdict(|r| r.w2),
        w3: class_verdict(|r| r.w3),
        fs: holds(points.iter().all(|r| r.residuals.fs <= tol)),
        fs_equivalent: points.iter().all(|r| (r.residuals.w0 <= tol) == (r.residuals.fs <= tol)),
    };

    ClassReport {
        label: label.to_string(),
        n_points: points.len(),
        seed: opts.seed,
        tol,
        degeneracy_floor: DEGENERACY_FLOOR,
        verdicts,
        max: Residuals::from_array(max),
        mean: Residuals::from_array(sum.map(|s| s / n)),
        max_formulation_gap: gap,
        identity_max,
        points,
    }
}
