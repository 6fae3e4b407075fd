//! Exact inertia of a symmetric rational matrix by symmetric Gaussian
//! congruence. Zero pivots are repaired either by a symmetric swap with a
//! later nonzero diagonal entry or by the 2×2 fix `e_t ← e_t + e_j`, which
//! turns a zero diagonal with nonzero `A[t][j]` into the pivot `2·A[t][j]`.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Signature {
    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.zero
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.zero == 0
    }
}

/// `Pᵀ·Q·P = diag(diagonal)` with `P` invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct Congruence {
    pub transform: Vec<Vec<BigRational>>,
    pub diagonal: Vec<BigRational>,
}

impl Congruence {
    pub fn signature(&self) -> Signature {
        let mut s = Signature { positive: 0, negative: 0, zero: 0 };
        for d in &self.diagonal {
            if d.is_positive() {
                s.positive += 1;
            } else if d.is_negative() {
                s.negative += 1;
            } else {
                s.zero += 1;
            }
        }
        s
    }
}

pub fn check_symmetric(matrix: &[Vec<BigRational>]) -> Result<()> {
    let n = matrix.len();
    for row in matrix {
        if row.len() != n {
            return Err(Error::LengthMismatch { expected: n, actual: row.len() });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix[i][j] != matrix[j][i] {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

struct Work {
    a: Vec<Vec<BigRational>>,
    p: Vec<Vec<BigRational>>,
}

impl Work {
    fn swap(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        for row in &mut self.a {
            row.swap(i, j);
        }
        for row in &mut self.p {
            row.swap(i, j);
        }
    }

    /// `e_j ← e_j + s·e_i`: column then row update of A, column update of P.
    fn add_scaled(&mut self, j: usize, i: usize, s: &BigRational) {
        let n = self.a.len();
        for r in 0..n {
            let v = &self.a[r][i] * s;
            self.a[r][j] += v;
        }
        for c in 0..n {
            let v = &self.a[i][c] * s;
            self.a[j][c] += v;
        }
        for row in &mut self.p {
            let v = &row[i] * s;
            row[j] += v;
        }
    }
}

pub fn congruence_diagonalize(matrix: &[Vec<BigRational>]) -> Result<Congruence> {
    check_symmetric(matrix)?;
    let n = matrix.len();
    let mut p = vec![vec![BigRational::zero(); n]; n];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = BigRational::one();
    }
    let mut w = Work { a: matrix.to_vec(), p };

    for t in 0..n {
        if w.a[t][t].is_zero() {
            if let Some(j) = ((t + 1)..n).find(|&j| !w.a[j][j].is_zero()) {
                w.swap(t, j);
            } else if let Some(j) = ((t + 1)..n).find(|&j| !w.a[t][j].is_zero()) {
                w.add_scaled(t, j, &BigRational::one());
            } else {
                continue;
            }
        }
        let pivot = w.a[t][t].clone();
        for j in (t + 1)..n {
            if w.a[t][j].is_zero() {
                continue;
            }
            let factor = -(&w.a[t][j] / &pivot);
            w.add_scaled(j, t, &factor);
        }
    }

    let diagonal = (0..n).map(|i| w.a[i][i].clone()).collect();
    Ok(Congruence { transform: w.p, diagonal })
}

/// Counts of positive, negative and zero entries in a congruence
/// diagonalization; independent of the diagonalization chosen.
pub fn signature_of(matrix: &[Vec<BigRational>]) -> Result<Signature> {
    congruence_diagonalize(matrix).map(|c| c.signature())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational;
    use crate::sampling::trial_rng;
    use rand::Rng;

    fn mat(rows: &[&[i64]]) -> Vec<Vec<BigRational>> {
        rows.iter().map(|r| r.iter().map(|&v| rational(v, 1)).collect()).collect()
    }

    fn transpose_mul(p: &[Vec<BigRational>], q: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
        // Pᵀ Q P
        let n = q.len();
        let mut qp = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    qp[i][j] += &q[i][k] * &p[k][j];
                }
            }
        }
        let mut out = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i][j] += &p[k][i] * &qp[k][j];
                }
            }
        }
        out
    }

    #[test]
    fn diagonal_examples() {
        let s = signature_of(&mat(&[&[1, 0, 0], &[0, -1, 0], &[0, 0, -1]])).unwrap();
        assert_eq!(s, Signature { positive: 1, negative: 2, zero: 0 });
        let id: Vec<Vec<BigRational>> = (0..4)
            .map(|i| (0..4).map(|j| rational((i == j) as i64, 1)).collect())
            .collect();
        assert_eq!(signature_of(&id).unwrap(), Signature { positive: 4, negative: 0, zero: 0 });
    }

    #[test]
    fn zero_diagonal_needs_two_by_two_fix() {
        // [[0,1],[1,0]] has eigenvalues ±1
        let s = signature_of(&mat(&[&[0, 1], &[1, 0]])).unwrap();
        assert_eq!(s, Signature { positive: 1, negative: 1, zero: 0 });
        let s = signature_of(&mat(&[&[0, 0, 1], &[0, 0, 0], &[1, 0, 0]])).unwrap();
        assert_eq!(s, Signature { positive: 1, negative: 1, zero: 1 });
    }

    #[test]
    fn rejects_non_symmetric() {
        assert_eq!(
            signature_of(&mat(&[&[1, 2], &[3, 4]])),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        );
    }

    #[test]
    fn transform_diagonalizes_exactly() {
        for trial in 0..200 {
            let mut rng = trial_rng(11, "congruence", trial);
            let n = rng.random_range(1..=6);
            let mut q = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for j in i..n {
                    // sparse entries exercise the zero-pivot paths
                    let v = if rng.random_bool(0.4) {
                        rational(0, 1)
                    } else {
                        rational(rng.random_range(-9..=9), rng.random_range(1..=4))
                    };
                    q[i][j] = v.clone();
                    q[j][i] = v;
                }
            }
            let c = congruence_diagonalize(&q).unwrap();
            let d = transpose_mul(&c.transform, &q);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { c.diagonal[i].clone() } else { BigRational::zero() };
                    assert_eq!(d[i][j], expect, "trial {trial} entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn matches_eigenvalue_sign_oracle() {
        let mut checked = 0;
        for trial in 0..400 {
            let mut rng = trial_rng(5, "eigen-oracle", trial);
            let n = 5;
            let mut q = vec![vec![BigRational::zero(); n]; n];
            let mut f = nalgebra::DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = rational(rng.random_range(-20..=20), rng.random_range(1..=5));
                    let vf = num_traits::ToPrimitive::to_f64(&v).unwrap();
                    q[i][j] = v.clone();
                    q[j][i] = v;
                    f[(i, j)] = vf;
                    f[(j, i)] = vf;
                }
            }
            let eig = nalgebra::SymmetricEigen::new(f).eigenvalues;
            if eig.iter().any(|l| l.abs() < 1e-3) {
                continue;
            }
            checked += 1;
            let pos = eig.iter().filter(|&&l| l > 0.0).count();
            let s = signature_of(&q).unwrap();
            assert_eq!(s, Signature { positive: pos, negative: n - pos, zero: 0 }, "trial {trial}");
        }
        assert!(checked > 300);
    }
}
