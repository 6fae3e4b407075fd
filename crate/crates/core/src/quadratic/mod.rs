//! Quadratic forms `q(x) = xᵀQx`, their length `l = √q`, and the forward
//! and reverse Hlawka margins they induce.
//!
//! Positive definite forms satisfy the forward Hlawka inequality on all of
//! `Rⁿ`. The Minkowski form `diag(1, −1, …, −1)` satisfies the reverse
//! inequality on the closed future cone. Mixed signatures `(k, n−k)` with
//! `2 ≤ k ≤ n−1` admit cones where both fail; see [`counterexample`].

pub mod counterexample;
pub mod signature;

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_len, cmp_ge, vec_add, Scalar, TolerancePolicy};
use crate::relation::{HlawkaInstance, WeightedFunctional};
use crate::sampling::trial_rng;

pub use counterexample::{build_mixed_counterexample, MixedCounterexample};
pub use signature::{congruence_diagonalize, signature_of, Congruence, Signature};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    matrix: Vec<Vec<BigRational>>,
    float_matrix: Vec<Vec<f64>>,
    signature: Signature,
}

impl QuadraticForm {
    pub fn new(matrix: Vec<Vec<BigRational>>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(Error::Parameter("form dimension must be positive".into()));
        }
        let signature = signature_of(&matrix)?;
        let float_matrix = matrix
            .iter()
            .map(|row| row.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
            .collect();
        Ok(QuadraticForm { matrix, float_matrix, signature })
    }

    /// Builds a form from scalar entries, all of which must be rational.
    pub fn from_scalars(rows: &[Vec<Scalar>]) -> Result<Self> {
        let matrix = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        v.as_rational().cloned().ok_or_else(|| {
                            Error::Parameter(format!("form entries must be rational, got {v}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(matrix)
    }

    pub fn diagonal(entries: &[i64]) -> Result<Self> {
        let n = entries.len();
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigRational::from_integer(entries[i].into()) } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        Self::new(matrix)
    }

    /// The identity form on `Rⁿ`.
    pub fn euclidean(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1; n])
    }

    /// `diag(1, −1, …, −1)` on `Rⁿ`.
    pub fn minkowski(n: usize) -> Result<Self> {
        Self::split(n, 1)
    }

    /// `diag(1 ×k, −1 ×(n−k))`.
    pub fn split(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::Parameter(format!("k = {k} exceeds n = {n}")));
        }
        let entries: Vec<i64> = (0..n).map(|i| if i < k { 1 } else { -1 }).collect();
        Self::diagonal(&entries)
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<BigRational>] {
        &self.matrix
    }

    pub fn matrix_scalars(&self) -> Vec<Vec<Scalar>> {
        self.matrix
            .iter()
            .map(|row| row.iter().cloned().map(Scalar::Rat).collect())
            .collect()
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn is_positive_definite(&self) -> bool {
        self.signature.positive == self.dim()
    }

    pub fn is_canonical_minkowski(&self) -> bool {
        let n = self.dim();
        n >= 2
            && (0..n).all(|i| {
                (0..n).all(|j| {
                    let v = &self.matrix[i][j];
                    match (i == j, i) {
                        (false, _) => v.is_zero(),
                        (true, 0) => v.is_one(),
                        (true, _) => *v == -BigRational::one(),
                    }
                })
            })
    }

    /// `xᵀQy`; exact unless either argument carries floats.
    pub fn bilinear(&self, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
        let n = self.dim();
        check_len(n, x.len())?;
        check_len(n, y.len())?;
        if x.iter().chain(y).all(|v| !v.is_exact()) {
            let xf: Vec<f64> = x.iter().map(Scalar::to_f64).collect();
            let yf: Vec<f64> = y.iter().map(Scalar::to_f64).collect();
            let mut acc = 0.0;
            for (i, row) in self.float_matrix.iter().enumerate() {
                let qy: f64 = row.iter().zip(&yf).map(|(q, v)| q * v).sum();
                acc += xf[i] * qy;
            }
            return Ok(Scalar::F64(acc));
        }
        let mut acc = Scalar::zero();
        for (i, row) in self.matrix.iter().enumerate() {
            let mut qy = Scalar::zero();
            for (q, v) in row.iter().zip(y) {
                if !q.is_zero() {
                    qy = qy + Scalar::Rat(q.clone()) * v;
                }
            }
            acc = acc + &x[i] * qy;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &[Scalar]) -> Result<Scalar> {
        self.bilinear(x, x)
    }

    /// `l(x) = √q(x)`; domain error when `q(x) < 0`.
    pub fn length(&self, x: &[Scalar]) -> Result<Scalar> {
        self.eval(x)?.sqrt()
    }

    pub fn cone_vector(&self, coords: Vec<Scalar>) -> Result<ConeVector> {
        let q_value = self.eval(&coords)?;
        Ok(ConeVector { coords, q_value })
    }
}

/// A vector with its cached quadratic value under the owning form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeVector {
    pub coords: Vec<Scalar>,
    pub q_value: Scalar,
}

impl ConeVector {
    pub fn length(&self) -> Result<Scalar> {
        self.q_value.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Reverse,
}

/// `q(x+y+z) + q(x) + q(y) + q(z) − q(x+y) − q(x+z) − q(y+z)`; zero for
/// every quadratic form.
pub fn four_point_residual(form: &QuadraticForm, x: &[Scalar], y: &[Scalar], z: &[Scalar]) -> Result<Scalar> {
    let xy = vec_add(x, y);
    let xz = vec_add(x, z);
    let yz = vec_add(y, z);
    let xyz = vec_add(&xy, z);
    let lhs = form.eval(&xyz)? + form.eval(x)? + form.eval(y)? + form.eval(z)?;
    let rhs = form.eval(&xy)? + form.eval(&xz)? + form.eval(&yz)?;
    Ok(lhs - rhs)
}

fn require_minkowski(form: &QuadraticForm) -> Result<()> {
    if form.is_canonical_minkowski() {
        Ok(())
    } else {
        Err(Error::UnsupportedForm(
            "future cone is defined only for the canonical form diag(1, -1, ..., -1); \
             map the form to canonical coordinates first"
                .into(),
        ))
    }
}

/// Strict: `q(x) > 0 ∧ x₁ > 0`. Closed: `q(x) ≥ 0 ∧ x₁ ≥ 0`, with the
/// default tolerance band on float inputs.
pub fn future_cone_contains(form: &QuadraticForm, x: &[Scalar], closed: bool) -> Result<bool> {
    require_minkowski(form)?;
    let q = form.eval(x)?;
    let zero = Scalar::zero();
    if closed {
        let policy = TolerancePolicy::default();
        Ok(cmp_ge(&q, &zero, &policy)?.not_failed() && cmp_ge(&x[0], &zero, &policy)?.not_failed())
    } else {
        if q.is_nan() || x[0].is_nan() {
            return Err(Error::NaN("future_cone_contains"));
        }
        Ok(q.sign() == Some(Ordering::Greater) && x[0].sign() == Some(Ordering::Greater))
    }
}

fn require_closed_cone(form: &QuadraticForm, named: &[(&'static str, &[Scalar])]) -> Result<()> {
    require_minkowski(form)?;
    for &(name, v) in named {
        if !future_cone_contains(form, v, true)? {
            return Err(Error::OutsideCone { name });
        }
    }
    Ok(())
}

/// `(xᵀQy)² − q(x)·q(y)`, nonnegative on the closed future cone.
pub fn azteca_margin(form: &QuadraticForm, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
    require_closed_cone(form, &[("x", x), ("y", y)])?;
    Ok(form.bilinear(x, y)?.square() - form.eval(x)? * form.eval(y)?)
}

/// `l(x+y) − l(x) − l(y)`, nonnegative on the closed future cone.
pub fn reverse_triangle_margin(form: &QuadraticForm, x: &[Scalar], y: &[Scalar]) -> Result<Scalar> {
    require_closed_cone(form, &[("x", x), ("y", y)])?;
    Ok(form.length(&vec_add(x, y))? - form.length(x)? - form.length(y)?)
}

/// The seven lengths of a triple: singles, pairwise sums, total.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripleLengths {
    /// `l(x), l(y), l(z)`
    pub singles: [Scalar; 3],
    /// `l(y+z), l(z+x), l(x+y)`: the complement of each single in the total
    pub complements: [Scalar; 3],
    /// `l(x+y+z)`
    pub total: Scalar,
}

impl TripleLengths {
    pub fn compute(form: &QuadraticForm, x: &[Scalar], y: &[Scalar], z: &[Scalar]) -> Result<Self> {
        let xy = vec_add(x, y);
        let yz = vec_add(y, z);
        let zx = vec_add(z, x);
        let xyz = vec_add(&xy, z);
        Ok(TripleLengths {
            singles: [form.length(x)?, form.length(y)?, form.length(z)?],
            complements: [form.length(&yz)?, form.length(&zx)?, form.length(&xy)?],
            total: form.length(&xyz)?,
        })
    }

    /// `l(x) + l(y) + l(z) + l(x+y+z) − l(x+y) − l(y+z) − l(z+x)`.
    pub fn forward_expression(&self) -> Scalar {
        let lhs: Scalar = self.singles.iter().sum::<Scalar>() + &self.total;
        let rhs: Scalar = self.complements.iter().sum();
        lhs - rhs
    }
}

/// The forward Hlawka expression for any form on which the seven lengths
/// are defined, with no signature precondition.
pub fn hlawka_expression(form: &QuadraticForm, x: &[Scalar], y: &[Scalar], z: &[Scalar]) -> Result<Scalar> {
    Ok(TripleLengths::compute(form, x, y, z)?.forward_expression())
}

/// Forward requires a positive definite form; Reverse requires the
/// canonical Minkowski form with all three vectors in the closed future
/// cone. A nonnegative margin means the corresponding inequality holds.
pub fn hlawka_margin(
    form: &QuadraticForm,
    x: &[Scalar],
    y: &[Scalar],
    z: &[Scalar],
    direction: Direction,
) -> Result<Scalar> {
    match direction {
        Direction::Forward => {
            if !form.is_positive_definite() {
                let s = form.signature();
                return Err(Error::UnsupportedForm(format!(
                    "forward margin needs signature ({}, 0), got ({}, {}, {})",
                    form.dim(),
                    s.positive,
                    s.negative,
                    s.zero
                )));
            }
            hlawka_expression(form, x, y, z)
        }
        Direction::Reverse => {
            require_closed_cone(form, &[("x", x), ("y", y), ("z", z)])?;
            Ok(-hlawka_expression(form, x, y, z)?)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TripleInstance {
    Instance(Box<HlawkaInstance>),
    /// `a = l(x) + l(y) + l(z) = 0`: every length vanishes and the
    /// inequality holds with equality.
    Degenerate,
}

/// Relation instance on Ω = {1, 2, 3} with unit weights, `f∘η` the single
/// lengths, `f∘ξ` the complementary pair lengths, `a = Σ l(single)` and
/// `b = l(x+y+z)`. Its two-form vanishes and its one-form is the forward
/// Hlawka expression.
pub fn instance_from_triple(
    form: &QuadraticForm,
    x: &[Scalar],
    y: &[Scalar],
    z: &[Scalar],
) -> Result<TripleInstance> {
    let lengths = TripleLengths::compute(form, x, y, z)?;
    let a: Scalar = lengths.singles.iter().sum();
    if a.is_zero() {
        return Ok(TripleInstance::Degenerate);
    }
    let instance = HlawkaInstance::new(
        WeightedFunctional::counting(3)?,
        lengths.singles.to_vec(),
        lengths.complements.to_vec(),
        a,
        lengths.total,
    )?;
    Ok(TripleInstance::Instance(Box::new(instance)))
}

/// Deterministic strict future-cone samples for `diag(1, −1, …, −1)`: the
/// spatial part `s` is uniform in `[−1, 1]ⁿ⁻¹`, `u` uniform in `(0, 1]`, and
/// the time coordinate is `‖s‖·(1 + u) + u`.
pub fn sample_future_cone(n: usize, count: usize, seed: u64) -> Result<Vec<ConeVector>> {
    if n < 2 {
        return Err(Error::Parameter(format!("future cone needs n >= 2, got {n}")));
    }
    if count == 0 {
        return Err(Error::Parameter("count must be positive".into()));
    }
    let form = QuadraticForm::minkowski(n)?;
    (0..count)
        .map(|i| {
            let mut rng = trial_rng(seed, "future_cone", i as u64);
            form.cone_vector(future_cone_point(&mut rng, n))
        })
        .collect()
}

/// One strict future-cone point in `Rⁿ`.
pub fn future_cone_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Scalar> {
    let spatial: Vec<f64> = (1..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
    // (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let norm = spatial.iter().map(|s| s * s).sum::<f64>().sqrt();
    std::iter::once(norm * (1.0 + u) + u)
        .chain(spatial)
        .map(Scalar::F64)
        .collect()
}
