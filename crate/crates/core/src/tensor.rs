//! Dense component arrays over the 4-dimensional tangent fiber.
//!
//! Index conventions, all 0-based in code (`e_1..e_4` of the text are axes
//! `0..3`):
//!
//! * [`Mat4`] `m[k][j]` is the `k`-th component of `m e_j`, so a (1,1)
//!   field `Q^k_j` is stored as `q[k][j]` and `apply(Q, v)_k = Σ_j q[k][j] v_j`.
//!   A metric `g_ij` is stored as `g[i][j]`.
//! * [`T3`] `t[i][j][k]` is `T(e_i, e_j, e_k)` for (0,3) tensors such as `F`.
//!   Christoffel symbols `Γ^k_ij` and covariant derivatives `(∇_i Q)^k_j`
//!   are also stored as `[i][j][k]`.
//! * [`T4`] `r[i][j][k][l]` is `R(e_i, e_j, e_k, e_l)`.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec4(pub [f64; DIM]);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat4(pub [[f64; DIM]; DIM]);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct T3(pub [[[f64; DIM]; DIM]; DIM]);

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct T4(pub [[[[f64; DIM]; DIM]; DIM]; DIM]);

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("matrix is singular (|det| = {det:e}, threshold {threshold:e})")]
pub struct SingularError {
    pub det: f64,
    pub threshold: f64,
}

impl Vec4 {
    pub fn zero() -> Self {
        Vec4([0.0; DIM])
    }

    pub fn basis(i: usize) -> Self {
        let mut v = [0.0; DIM];
        v[i] = 1.0;
        Vec4(v)
    }

    pub fn from_fn(f: impl Fn(usize) -> f64) -> Self {
        Vec4(std::array::from_fn(f))
    }

    pub fn dot(&self, other: &Vec4) -> f64 {
        (0..DIM).map(|i| self.0[i] * other.0[i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, rhs: Vec4) -> Vec4 {
        Vec4::from_fn(|i| self.0[i] - rhs.0[i])
    }
}

impl Mat4 {
    pub fn zero() -> Self {
        Mat4([[0.0; DIM]; DIM])
    }

    pub fn identity() -> Self {
        Mat4::from_fn(|i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(f: impl Fn(usize, usize) -> f64) -> Self {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    /// Circulant matrix whose rows are successive right cyclic shifts of
    /// `first_row`: `m[i][j] = first_row[(j - i) mod 4]`.
    pub fn circulant(first_row: [f64; DIM]) -> Self {
        Mat4::from_fn(|i, j| first_row[(j + DIM - i) % DIM])
    }

    pub fn transpose(&self) -> Self {
        Mat4::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> f64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn column(&self, j: usize) -> Vec4 {
        Vec4::from_fn(|k| self.0[k][j])
    }

    pub fn mat_mul(&self, other: &Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| (0..DIM).map(|k| self.0[i][k] * other.0[k][j]).sum())
    }

    pub fn apply(&self, v: &Vec4) -> Vec4 {
        Vec4::from_fn(|k| (0..DIM).map(|j| self.0[k][j] * v.0[j]).sum())
    }

    pub fn powi(&self, n: u32) -> Mat4 {
        (0..n).fold(Mat4::identity(), |acc, _| acc.mat_mul(self))
    }

    /// Bilinear form `g(x, y) = x^T g y`.
    pub fn bilinear(&self, x: &Vec4, y: &Vec4) -> f64 {
        x.dot(&self.apply(y))
    }

    /// Leading principal minors of orders 1 to 4.
    pub fn leading_minors(&self) -> [f64; DIM] {
        std::array::from_fn(|n| {
            let size = n + 1;
            let mut m = [[0.0; DIM]; DIM];
            for (i, row) in m.iter_mut().enumerate().take(size) {
                row[..size].copy_from_slice(&self.0[i][..size]);
            }
            lu_determinant(m, size)
        })
    }

    pub fn determinant(&self) -> f64 {
        lu_determinant(self.0, DIM)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    ///
    /// Fails when `|det| < 1e-12 * scale^4`, `scale` being the largest
    /// absolute entry.
    pub fn inverse(&self) -> Result<Mat4, SingularError> {
        let scale = self.max_abs();
        let threshold = 1e-12 * scale.powi(4);
        let mut a = self.0;
        let mut inv = Mat4::identity().0;
        let mut det = 1.0;
        for col in 0..DIM {
            let pivot = (col..DIM).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap_or(col);
            if a[pivot][col] == 0.0 {
                return Err(SingularError { det: 0.0, threshold });
            }
            if pivot != col {
                a.swap(pivot, col);
                inv.swap(pivot, col);
                det = -det;
            }
            let d = a[col][col];
            det *= d;
            for j in 0..DIM {
                a[col][j] /= d;
                inv[col][j] /= d;
            }
            for r in 0..DIM {
                if r == col {
                    continue;
                }
                let factor = a[r][col];
                if factor == 0.0 {
                    continue;
                }
                for j in 0..DIM {
                    a[r][j] -= factor * a[col][j];
                    inv[r][j] -= factor * inv[col][j];
                }
            }
        }
        if det.abs() < threshold || scale == 0.0 {
            return Err(SingularError { det, threshold });
        }
        Ok(Mat4(inv))
    }
}

/// Determinant of the leading `size x size` block via elimination.
fn lu_determinant(mut a: [[f64; DIM]; DIM], size: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..size {
        let pivot = (col..size).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap_or(col);
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..size {
            let factor = a[r][col] / a[col][col];
            for j in col..size {
                a[r][j] -= factor * a[col][j];
            }
        }
    }
    det
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        self.mat_mul(&rhs)
    }
}

impl Sub for Mat4 {
    type Output = Mat4;
    fn sub(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] - rhs.0[i][j])
    }
}

impl Add for Mat4 {
    type Output = Mat4;
    fn add(self, rhs: Mat4) -> Mat4 {
        Mat4::from_fn(|i, j| self.0[i][j] + rhs.0[i][j])
    }
}

impl T3 {
    pub fn zero() -> Self {
        T3([[[0.0; DIM]; DIM]; DIM])
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize) -> f64) -> Self {
        T3(std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k)))))
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0[i][j][k]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, c: f64) -> T3 {
        T3::from_fn(|i, j, k| c * self.0[i][j][k])
    }

    /// `T(a e_i, b e_j, c e_k)`, i.e. each slot pre-composed with an
    /// endomorphism; `None` leaves the slot alone.
    pub fn compose_slots(&self, maps: [Option<&Mat4>; 3]) -> T3 {
        let mut out = *self;
        for (slot, map) in maps.iter().enumerate() {
            if let Some(m) = map {
                out = out.compose_slot(slot, m);
            }
        }
        out
    }

    fn compose_slot(&self, slot: usize, m: &Mat4) -> T3 {
        T3::from_fn(|i, j, k| {
            (0..DIM)
                .map(|a| {
                    let (idx, col) = match slot {
                        0 => ((a, j, k), i),
                        1 => ((i, a, k), j),
                        _ => ((i, j, a), k),
                    };
                    m.0[a][col] * self.0[idx.0][idx.1][idx.2]
                })
                .sum()
        })
    }

    /// Reorders arguments: `out(e_i, e_j, e_k) = T(args)` where `args` is
    /// `(e_i, e_j, e_k)` permuted so that argument `n` of `T` is the input
    /// index `order[n]`. `order = [1, 2, 0]` gives `T(y, z, x)`.
    pub fn permute(&self, order: [usize; 3]) -> T3 {
        T3::from_fn(|i, j, k| {
            let idx = [i, j, k];
            self.0[idx[order[0]]][idx[order[1]]][idx[order[2]]]
        })
    }

    /// `T(x,y,z) + T(y,z,x) + T(z,x,y)`.
    pub fn cyclic_sum(&self) -> T3 {
        *self + self.permute([1, 2, 0]) + self.permute([2, 0, 1])
    }

    /// Lowers the last (upper) index with the metric:
    /// `out[i][j][m] = Σ_k g[k][m] t[i][j][k]`.
    pub fn lower(&self, g: &Mat4) -> T3 {
        T3::from_fn(|i, j, m| (0..DIM).map(|k| g.0[k][m] * self.0[i][j][k]).sum())
    }

    /// Lee form: `α_k = Σ_{i,j} ginv[i][j] t[i][j][k]`.
    pub fn contract_lee(&self, ginv: &Mat4) -> Vec4 {
        Vec4::from_fn(|k| {
            let mut acc = 0.0;
            for i in 0..DIM {
                for j in 0..DIM {
                    acc += ginv.0[i][j] * self.0[i][j][k];
                }
            }
            acc
        })
    }
}

impl Add for T3 {
    type Output = T3;
    fn add(self, rhs: T3) -> T3 {
        T3::from_fn(|i, j, k| self.0[i][j][k] + rhs.0[i][j][k])
    }
}

impl Sub for T3 {
    type Output = T3;
    fn sub(self, rhs: T3) -> T3 {
        T3::from_fn(|i, j, k| self.0[i][j][k] - rhs.0[i][j][k])
    }
}

impl Neg for T3 {
    type Output = T3;
    fn neg(self) -> T3 {
        self.scale(-1.0)
    }
}

impl T4 {
    pub fn zero() -> Self {
        T4([[[[0.0; DIM]; DIM]; DIM]; DIM])
    }

    pub fn from_fn(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        T4(std::array::from_fn(|i| {
            std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| f(i, j, k, l))))
        }))
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.0[i][j][k][l]
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().flatten().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `R(x, y, M z, M u)`: the endomorphism applied to the last two slots.
    pub fn compose_last_two(&self, m: &Mat4) -> T4 {
        T4::from_fn(|i, j, k, l| {
            let mut acc = 0.0;
            for a in 0..DIM {
                for b in 0..DIM {
                    acc += m.0[a][k] * m.0[b][l] * self.0[i][j][a][b];
                }
            }
            acc
        })
    }

    pub fn max_abs_diff(&self, other: &T4) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                for k in 0..DIM {
                    for l in 0..DIM {
                        m = m.max((self.0[i][j][k][l] - other.0[i][j][k][l]).abs());
                    }
                }
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shift() -> Mat4 {
        Mat4([[0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0], [1.0, 0.0, 0.0, 0.0]])
    }

    #[test]
    fn shift_squared_is_the_product_structure() {
        let p = shift() * shift();
        let mut expected = Mat4::zero();
        for (i, j) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            expected[(i, j)] = 1.0;
        }
        assert_eq!(p, expected);
        assert_eq!(p * p, Mat4::identity());
        assert_eq!(shift().powi(4), Mat4::identity());
    }

    #[test]
    fn inverse_of_identity() {
        assert_eq!(Mat4::identity().inverse().unwrap(), Mat4::identity());
    }

    #[test]
    fn inverse_of_constant_circulant() {
        // Oracle: the system couples axes {0,2} and {1,3} through [[2,1],[1,2]],
        // whose inverse is [[2,-1],[-1,2]]/3.
        let inv = Mat4::circulant([2.0, 0.0, 1.0, 0.0]).inverse().unwrap();
        let expected = Mat4::circulant([2.0 / 3.0, 0.0, -1.0 / 3.0, 0.0]);
        assert!((inv - expected).max_abs() < 1e-15);
    }

    #[test]
    fn zero_matrix_is_singular() {
        assert!(Mat4::zero().inverse().is_err());
        let rank3 = Mat4::from_fn(|i, j| if i == 3 { 0.0 } else { (i * 4 + j) as f64 + 1.0 });
        assert!(rank3.inverse().is_err());
    }

    #[test]
    fn determinant_and_minors() {
        let g = Mat4::circulant([2.0, 0.0, 1.0, 0.0]);
        assert!((g.determinant() - 9.0).abs() < 1e-12);
        let minors = g.leading_minors();
        assert_eq!(minors[0], 2.0);
        assert!((minors[1] - 4.0).abs() < 1e-12);
        assert!((minors[2] - 6.0).abs() < 1e-12);
        assert!((minors[3] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn apply_shift_to_first_basis_vector() {
        assert_eq!(shift().apply(&Vec4::basis(0)), Vec4::basis(3));
    }

    #[test]
    fn lee_contraction() {
        assert_eq!(T3::zero().contract_lee(&Mat4::identity()), Vec4::zero());
        let mut f = T3::zero();
        f.0[0][0][2] = 1.0;
        assert_eq!(f.contract_lee(&Mat4::identity()), Vec4([0.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn lowering() {
        let g = Mat4::circulant([2.0, 0.3, 1.0, 0.3]);
        assert_eq!(T3::zero().lower(&g), T3::zero());
        let t = T3::from_fn(|i, j, k| (i * 16 + j * 4 + k) as f64);
        assert_eq!(t.lower(&Mat4::identity()), t);
    }

    #[test]
    fn permute_and_cyclic_sum() {
        let t = T3::from_fn(|i, j, k| (i * 16 + j * 4 + k) as f64);
        let yzx = t.permute([1, 2, 0]);
        assert_eq!(yzx.get(0, 1, 2), t.get(1, 2, 0));
        let c = t.cyclic_sum();
        assert_eq!(c.get(0, 1, 3), t.get(0, 1, 3) + t.get(1, 3, 0) + t.get(3, 0, 1));
    }

    #[test]
    fn compose_slots_evaluates_on_mapped_vectors() {
        let t = T3::from_fn(|i, j, k| ((i + 1) * (j + 2) * (k + 3)) as f64 + (i * j) as f64);
        let q = shift();
        let out = t.compose_slots([None, Some(&q), Some(&q)]);
        // Qe_j is the column e_{j-1 mod 4}
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    assert_eq!(out.get(i, j, k), t.get(i, (j + 3) % 4, (k + 3) % 4));
                }
            }
        }
    }
}
