//! Shared corpus loading and independent numerical oracles.
//!
//! The oracles work on plain arrays and recompute everything from the metric
//! and structure expressions by central finite differences, so they share no
//! code with the library's tensor layer beyond expression evaluation.

#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use circq::cli::load_spec;
use circq::expr::Expr;
use circq::{ManifoldSpec, Vec4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type V = [f64; 4];
pub type M = [[f64; 4]; 4];
pub type T = [[[f64; 4]; 4]; 4];

pub const H: f64 = 1e-5;
pub const FLOOR: f64 = 1e-12;

pub fn specs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs")
}

pub const CORPUS: [&str; 6] = ["flat", "curved_a", "curved_b", "curved_c", "conformal", "twisted"];
pub const CURVED: [&str; 4] = ["curved_a", "curved_b", "curved_c", "twisted"];

pub fn spec_path(name: &str) -> PathBuf {
    specs_dir().join(format!("{name}.toml"))
}

pub fn load(name: &str) -> ManifoldSpec {
    load_spec(spec_path(name)).unwrap_or_else(|e| panic!("{name}: {e}")).spec
}

pub fn corpus() -> Vec<(&'static str, ManifoldSpec)> {
    CORPUS.iter().map(|&n| (n, load(n))).collect()
}

/// Up to `n` admissible points drawn uniformly from the spec's domain.
pub fn random_points(spec: &ManifoldSpec, n: usize, seed: u64) -> Vec<Vec4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.domain().0;
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 100 * n {
        tries += 1;
        let p = Vec4(std::array::from_fn(|k| {
            // keep a margin so the finite-difference stencil stays inside
            let (lo, hi) = (d[k].0 + 1e-3, d[k].1 - 1e-3);
            rng.random_range(lo..=hi)
        }));
        if circq::frame_at(spec, &p).is_ok() {
            out.push(p);
        }
    }
    out
}

pub fn eval_mat(m: &[[Expr; 4]; 4], p: &V) -> M {
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][j].evaluate(p).expect("admissible point")))
}

pub fn shifted(p: &V, k: usize, h: f64) -> V {
    let mut q = *p;
    q[k] += h;
    q
}

pub fn fd_scalar(e: &Expr, p: &V, k: usize) -> f64 {
    let a = e.evaluate(&shifted(p, k, H)).unwrap();
    let b = e.evaluate(&shifted(p, k, -H)).unwrap();
    (a - b) / (2.0 * H)
}

pub fn fd_mat(m: &[[Expr; 4]; 4], p: &V, k: usize) -> M {
    std::array::from_fn(|i| std::array::from_fn(|j| fd_scalar(&m[i][j], p, k)))
}

pub fn mat_max(m: &M) -> f64 {
    m.iter().flatten().fold(0.0, |a, &b| a.max(b.abs()))
}

pub fn t_max(t: &T) -> f64 {
    t.iter().flatten().flatten().fold(0.0, |a, &b| a.max(b.abs()))
}

pub fn matvec(m: &M, v: &V) -> V {
    std::array::from_fn(|k| (0..4).map(|j| m[k][j] * v[j]).sum())
}

pub fn dot_g(g: &M, x: &V, y: &V) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            s += x[i] * g[i][j] * y[j];
        }
    }
    s
}

pub fn basis(i: usize) -> V {
    let mut v = [0.0; 4];
    v[i] = 1.0;
    v
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn invert(m: &M) -> M {
    let mut a = *m;
    let mut inv: M = std::array::from_fn(basis);
    for c in 0..4 {
        let piv = (c..4).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        inv.swap(c, piv);
        let d = a[c][c];
        for j in 0..4 {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..4 {
            if r != c {
                let f = a[r][c];
                for j in 0..4 {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    inv
}

/// Geometry recomputed with finite-difference metric and structure jets.
pub struct Oracle {
    pub g: M,
    pub ginv: M,
    /// `gamma[i][j][k] = Γ^k_ij`
    pub gamma: T,
    pub q: M,
    pub p: M,
    /// `nabla_p[i][j]` is the vector `(∇_{e_i} P) e_j`.
    pub nabla_p: [[V; 4]; 4],
    pub nabla_q: [[V; 4]; 4],
}

impl Oracle {
    pub fn at(spec: &ManifoldSpec, point: &V) -> Oracle {
        let g = eval_mat(spec.metric(), point);
        let ginv = invert(&g);
        let dg: [M; 4] = std::array::from_fn(|k| fd_mat(spec.metric(), point, k));
        let gamma: T = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                std::array::from_fn(|k| {
                    (0..4).map(|l| 0.5 * ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j])).sum()
                })
            })
        });
        let q = eval_mat(spec.structure(), point);
        let p = eval_mat(spec.product(), point);
        let nabla = |field: &[[Expr; 4]; 4], a: &M| -> [[V; 4]; 4] {
            let da: [M; 4] = std::array::from_fn(|k| fd_mat(field, point, k));
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    // ∂_i(A e_j) + Γ(e_i, A e_j) − A Γ(e_i, e_j)
                    let col: V = std::array::from_fn(|k| a[k][j]);
                    let gij: V = std::array::from_fn(|k| gamma[i][j][k]);
                    let a_gij = matvec(a, &gij);
                    std::array::from_fn(|k| {
                        da[i][k][j] + (0..4).map(|l| gamma[i][l][k] * col[l]).sum::<f64>() - a_gij[k]
                    })
                })
            })
        };
        let nabla_p = nabla(spec.product(), &p);
        let nabla_q = nabla(spec.structure(), &q);
        Oracle { g, ginv, gamma, q, p, nabla_p, nabla_q }
    }

    /// `F(x, y, z) = g((∇_x P) y, z)` on arbitrary vectors.
    pub fn f(&self, x: &V, y: &V, z: &V) -> f64 {
        let mut w = [0.0; 4];
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    w[k] += x[i] * y[j] * self.nabla_p[i][j][k];
                }
            }
        }
        dot_g(&self.g, &w, z)
    }

    pub fn f_array(&self) -> T {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| self.f(&basis(i), &basis(j), &basis(k))))
        })
    }

    pub fn fbar_array(&self) -> T {
        std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| (0..4).map(|l| self.nabla_q[i][j][l] * self.g[l][k]).sum()))
        })
    }

    pub fn nabla_p_max(&self) -> f64 {
        self.nabla_p.iter().flatten().flatten().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// A trilinear form given by its components, evaluated on arbitrary vectors.
pub fn tri(f: &T, x: &V, y: &V, z: &V) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                s += f[i][j][k] * x[i] * y[j] * z[k];
            }
        }
    }
    s
}

/// Inputs to the brute-force class conditions.
pub struct ClassData<'a> {
    pub f: &'a T,
    pub g: &'a M,
    pub ginv: &'a M,
    pub p: &'a M,
    pub nabla_p_max: f64,
}

impl ClassData<'_> {
    fn scale(&self) -> f64 {
        (mat_max(self.g) * self.nabla_p_max).max(FLOOR)
    }

    pub fn alpha(&self, z: &V) -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                s += self.ginv[i][j] * tri(self.f, &basis(i), &basis(j), z);
            }
        }
        s
    }

    fn max_over_basis(&self, cond: impl Fn(&V, &V, &V) -> f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    worst = worst.max(cond(&basis(i), &basis(j), &basis(k)).abs());
                }
            }
        }
        worst
    }

    pub fn w1(&self) -> f64 {
        let f = self.f;
        let g = self.g;
        let raw = self.max_over_basis(|x, y, z| {
            let (py, pz) = (matvec(self.p, y), matvec(self.p, z));
            let rhs = dot_g(g, x, y) * self.alpha(z) + dot_g(g, x, z) * self.alpha(y)
                - dot_g(g, x, &py) * self.alpha(&pz)
                - dot_g(g, x, &pz) * self.alpha(&py);
            tri(f, x, y, z) - 0.25 * rhs
        });
        raw / self.scale()
    }

    pub fn w2(&self) -> f64 {
        let f = self.f;
        let p = self.p;
        let cyclic = self.max_over_basis(|x, y, z| {
            tri(f, x, y, &matvec(p, z)) + tri(f, y, z, &matvec(p, x)) + tri(f, z, x, &matvec(p, y))
        });
        let lee = (0..4).map(|k| self.alpha(&basis(k)).abs()).fold(0.0, f64::max);
        (cyclic / self.scale()).max(lee / self.nabla_p_max.max(FLOOR))
    }

    pub fn w3(&self) -> f64 {
        let f = self.f;
        let raw = self.max_over_basis(|x, y, z| tri(f, x, y, z) + tri(f, y, z, x) + tri(f, z, x, y));
        raw / self.scale()
    }
}

/// `|a − b| / max(1, |a|)`
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}

/// Strips the `timestamp` line from a machine report.
pub fn strip_timestamp(s: &str) -> String {
    s.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}
