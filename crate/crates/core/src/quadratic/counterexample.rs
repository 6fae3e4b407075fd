//! Mixed-signature forms `diag(1 ×k, −1 ×(n−k))`, `2 ≤ k ≤ n−1`, on which
//! neither the forward nor the reverse Hlawka inequality survives.
//!
//! Generators (with `ε` small):
//!
//! ```text
//! v1 = v2 = (1, 1, ε, …, ε | 1, ε, …, ε)   k entries | n−k entries
//! v3 = (1, 1, ε, …, ε)
//! v4 = (2, 1, ε, …, ε)
//! v5 = (1, 2, ε, …, ε)
//! ```
//!
//! On `(v1, v2, v3)` the forward inequality fails; on `(v3, v4, v5)` the
//! reverse one fails. All five generators have `q > 0`.

use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::Rng;
use serde::Serialize;

use super::{hlawka_expression, QuadraticForm};
use crate::error::{Error, Result};
use crate::numerics::Scalar;
use crate::sampling::trial_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedCounterexample {
    pub n: usize,
    pub k: usize,
    pub epsilon: Scalar,
    #[serde(skip)]
    pub form: QuadraticForm,
    /// `v1 … v5`
    pub generators: Vec<Vec<Scalar>>,
    pub q_values: Vec<Scalar>,
    /// Forward Hlawka margin on `(v1, v2, v3)`; negative.
    pub forward_margin_a: Scalar,
    /// Reverse Hlawka margin on `(v3, v4, v5)`; negative.
    pub reverse_margin_b: Scalar,
}

impl MixedCounterexample {
    pub fn triple_a(&self) -> [&[Scalar]; 3] {
        [&self.generators[0], &self.generators[1], &self.generators[2]]
    }

    pub fn triple_b(&self) -> [&[Scalar]; 3] {
        [&self.generators[2], &self.generators[3], &self.generators[4]]
    }

    /// Forward expression on `(v3, v4, v5)`: positive when the reverse
    /// inequality fails.
    pub fn reverse_failure_b(&self) -> Scalar {
        -self.reverse_margin_b.clone()
    }

    /// Samples positive combinations `Σ tᵢ vᵢ` with `tᵢ ∈ (0, 1]` and counts
    /// how many have `q ≤ 0`. Universal containment is not certified.
    pub fn sampled_containment(&self, samples: usize, seed: u64) -> Result<ContainmentCheck> {
        let gens: Vec<Vec<f64>> = self
            .generators
            .iter()
            .map(|g| g.iter().map(Scalar::to_f64).collect())
            .collect();
        let mut failures = 0;
        let mut min_q = f64::INFINITY;
        for i in 0..samples {
            let mut rng = trial_rng(seed, "mixed_cone", i as u64);
            let mut point = vec![0.0; self.n];
            for g in &gens {
                let t = 1.0 - rng.random::<f64>();
                for (p, c) in point.iter_mut().zip(g) {
                    *p += t * c;
                }
            }
            let q = self.form.eval(&point.into_iter().map(Scalar::F64).collect::<Vec<_>>())?.to_f64();
            min_q = min_q.min(q);
            if q <= 0.0 {
                failures += 1;
            }
        }
        Ok(ContainmentCheck { samples, failures, min_q })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentCheck {
    pub samples: usize,
    pub failures: usize,
    pub min_q: f64,
}

pub fn build_mixed_counterexample(n: usize, k: usize, epsilon: &BigRational) -> Result<MixedCounterexample> {
    if k < 2 || k + 1 > n {
        return Err(Error::Parameter(format!("need 2 <= k <= n - 1, got n = {n}, k = {k}")));
    }
    if !epsilon.is_positive() || *epsilon >= BigRational::one() {
        return Err(Error::Parameter(format!("need 0 < epsilon < 1, got {epsilon}")));
    }
    let eps = Scalar::Rat(epsilon.clone());
    let one = Scalar::one();
    let two = Scalar::int(2);
    let lead = |a: &Scalar, b: &Scalar| -> Vec<Scalar> {
        let mut v = vec![a.clone(), b.clone()];
        v.resize(n, eps.clone());
        v
    };

    let mut v1 = vec![one.clone(), one.clone()];
    v1.resize(k, eps.clone());
    v1.push(one.clone());
    v1.resize(n, eps.clone());
    let v3 = lead(&one, &one);
    let v4 = lead(&two, &one);
    let v5 = lead(&one, &two);
    let generators = vec![v1.clone(), v1, v3, v4, v5];

    let form = QuadraticForm::split(n, k)?;
    let q_values = generators.iter().map(|g| form.eval(g)).collect::<Result<Vec<_>>>()?;
    if let Some(i) = q_values.iter().position(|q| q.sign() != Some(std::cmp::Ordering::Greater)) {
        return Err(Error::Domain(format!("generator v{} has q <= 0", i + 1)));
    }
    let forward_margin_a = hlawka_expression(&form, &generators[0], &generators[1], &generators[2])?;
    let reverse_margin_b = -hlawka_expression(&form, &generators[2], &generators[3], &generators[4])?;

    Ok(MixedCounterexample {
        n,
        k,
        epsilon: eps,
        form,
        generators,
        q_values,
        forward_margin_a,
        reverse_margin_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rational;

    #[test]
    fn layout_n4_k2() {
        let c = build_mixed_counterexample(4, 2, &rational(1, 100)).unwrap();
        let e = Scalar::ratio(1, 100);
        let one = Scalar::one();
        assert_eq!(c.generators[0], vec![one.clone(), one.clone(), one.clone(), e.clone()]);
        assert_eq!(c.generators[0], c.generators[1]);
        assert_eq!(c.generators[2], vec![one.clone(), one.clone(), e.clone(), e.clone()]);
        assert_eq!(c.generators[3], vec![Scalar::int(2), one.clone(), e.clone(), e.clone()]);
        assert_eq!(c.generators[4], vec![one.clone(), Scalar::int(2), e.clone(), e]);
        // q(v1) = 1 + 1 − 1 − ε²
        assert_eq!(c.q_values[0], Scalar::ratio(9999, 10000));
        assert!(c.q_values.iter().all(|q| q.to_f64() > 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        let e = rational(1, 100);
        assert!(build_mixed_counterexample(4, 1, &e).is_err());
        assert!(build_mixed_counterexample(4, 4, &e).is_err());
        assert!(build_mixed_counterexample(2, 2, &e).is_err());
        assert!(build_mixed_counterexample(4, 2, &rational(0, 1)).is_err());
        assert!(build_mixed_counterexample(4, 2, &rational(3, 2)).is_err());
    }

    #[test]
    fn positive_span_stays_positive_on_samples() {
        let c = build_mixed_counterexample(5, 3, &rational(1, 100)).unwrap();
        let check = c.sampled_containment(1000, 3).unwrap();
        assert_eq!(check.failures, 0);
        assert!(check.min_q > 0.0);
    }
}
