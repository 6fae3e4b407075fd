//! The one-form / two-form relation over a finite index set.
//!
//! A [`HlawkaInstance`] carries a nonnegative-weight functional `T` on
//! `R^Ω`, the evaluated images `f∘η` and `f∘ξ`, and the controls `a`, `b`.
//! From these we build
//!
//! ```text
//! c  = (2/a)·T(f∘η)
//! C₁ = (T(1) − c)·b  + T(f∘η)  − T(f∘ξ)
//! C₂ = (T(1) − c)·b² + T((f∘η)²) − T((f∘ξ)²)
//! ```
//!
//! and the product identity
//! `T((a − f∘η − f∘ξ)(f∘η + b − f∘ξ)) = C₁·(a + b) − C₂`, which ties the
//! sign of `C₁` to the sign of `C₂` under the summation and difference
//! controls.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{check_len, cmp_eq, cmp_ge, Scalar, TolerancePolicy, Verdict};

/// `T(v) = Σ_ω w_ω v_ω` with every weight nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedFunctional {
    weights: Vec<Scalar>,
    total: Scalar,
}

impl WeightedFunctional {
    pub fn new(weights: Vec<Scalar>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInstance("index set must be nonempty".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            match w.sign() {
                Some(Ordering::Less) => {
                    return Err(Error::InvalidInstance(format!("weight {i} is negative ({w})")))
                }
                None => return Err(Error::NaN("weight")),
                _ => {}
            }
        }
        let total = weights.iter().sum();
        Ok(WeightedFunctional { weights, total })
    }

    /// Unit weights on `n` points.
    pub fn counting(n: usize) -> Result<Self> {
        Self::new(vec![Scalar::one(); n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    /// `T(1)`.
    pub fn total(&self) -> &Scalar {
        &self.total
    }

    pub fn apply(&self, v: &[Scalar]) -> Result<Scalar> {
        check_len(self.weights.len(), v.len())?;
        Ok(self.weights.iter().zip(v).map(|(w, x)| w * x).sum())
    }
}

/// `T(v)`; see [`WeightedFunctional::apply`].
pub fn t_apply(functional: &WeightedFunctional, v: &[Scalar]) -> Result<Scalar> {
    functional.apply(v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HlawkaInstance {
    functional: WeightedFunctional,
    f_eta: Vec<Scalar>,
    f_xi: Vec<Scalar>,
    a: Scalar,
    b: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Forms {
    pub c: Scalar,
    pub c1: Scalar,
    pub c2: Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumMode {
    /// `f∘η + f∘ξ ≤ a` on the checked set.
    #[serde(rename = "LEQ_a")]
    LeqA,
    /// `f∘η + f∘ξ ≥ a` on the checked set.
    #[serde(rename = "GEQ_a")]
    GeqA,
    #[serde(rename = "Neither")]
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Controls {
    /// LEQ_a is reported when both summation controls hold (all sums equal a).
    pub sum_mode: SumMode,
    pub leq_a: bool,
    pub geq_a: bool,
    pub diff_ok: bool,
}

impl HlawkaInstance {
    pub fn new(
        functional: WeightedFunctional,
        f_eta: Vec<Scalar>,
        f_xi: Vec<Scalar>,
        a: Scalar,
        b: Scalar,
    ) -> Result<Self> {
        check_len(functional.len(), f_eta.len())?;
        check_len(functional.len(), f_xi.len())?;
        if f_eta.iter().chain(&f_xi).chain([&a, &b]).any(Scalar::is_nan) {
            return Err(Error::NaN("instance"));
        }
        if a.is_zero() {
            return Err(Error::InvalidInstance("a must be nonzero".into()));
        }
        if (&a + &b).sign() != Some(Ordering::Greater) {
            return Err(Error::InvalidInstance(format!("a + b must be positive (a = {a}, b = {b})")));
        }
        Ok(HlawkaInstance { functional, f_eta, f_xi, a, b })
    }

    pub fn functional(&self) -> &WeightedFunctional {
        &self.functional
    }

    pub fn f_eta(&self) -> &[Scalar] {
        &self.f_eta
    }

    pub fn f_xi(&self) -> &[Scalar] {
        &self.f_xi
    }

    pub fn a(&self) -> &Scalar {
        &self.a
    }

    pub fn b(&self) -> &Scalar {
        &self.b
    }

    pub fn is_exact(&self) -> bool {
        self.functional.weights.iter()
            .chain(&self.f_eta)
            .chain(&self.f_xi)
            .chain([&self.a, &self.b])
            .all(Scalar::is_exact)
    }

    fn t(&self, v: &[Scalar]) -> Scalar {
        // lengths were validated at construction
        self.functional.weights.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    pub fn compute_forms(&self) -> Forms {
        let t_eta = self.t(&self.f_eta);
        let t_xi = self.t(&self.f_xi);
        let eta_sq: Vec<Scalar> = self.f_eta.iter().map(Scalar::square).collect();
        let xi_sq: Vec<Scalar> = self.f_xi.iter().map(Scalar::square).collect();
        let c = (Scalar::int(2) * &t_eta)
            .try_div(&self.a)
            .expect("a != 0 is a constructor invariant");
        let slack = self.functional.total() - &c;
        let c1 = &slack * &self.b + &t_eta - &t_xi;
        let c2 = &slack * self.b.square() + self.t(&eta_sq) - self.t(&xi_sq);
        Forms { c, c1, c2 }
    }

    /// `T((a − f∘η − f∘ξ)(f∘η + b − f∘ξ)) − [C₁(a + b) − C₂]`.
    pub fn identity_residual(&self) -> Scalar {
        let product: Vec<Scalar> = self
            .f_eta
            .iter()
            .zip(&self.f_xi)
            .map(|(e, x)| (&self.a - e - x) * (e + &self.b - x))
            .collect();
        let Forms { c1, c2, .. } = self.compute_forms();
        self.t(&product) - (c1 * (&self.a + &self.b) - c2)
    }

    /// Indices where `b + f∘η − f∘ξ` is nonzero (beyond tolerance for floats).
    pub fn active_indices(&self, policy: &TolerancePolicy) -> Vec<usize> {
        (0..self.f_eta.len())
            .filter(|&i| {
                let gap = &self.b + &self.f_eta[i] - &self.f_xi[i];
                cmp_eq(&gap, &Scalar::zero(), policy).map_or(true, |v| v == Verdict::Fails)
            })
            .collect()
    }

    /// Summation and difference controls over Ω, or over the active set
    /// `{ω : b + f∘η(ω) − f∘ξ(ω) ≠ 0}` when `restrict` is set. Marginal
    /// float comparisons count as satisfied.
    pub fn check_controls(&self, restrict: bool, policy: &TolerancePolicy) -> Result<Controls> {
        let indices: Vec<usize> = if restrict {
            self.active_indices(policy)
        } else {
            (0..self.f_eta.len()).collect()
        };
        let (mut leq_a, mut geq_a, mut diff_ok) = (true, true, true);
        for i in indices {
            let (e, x) = (&self.f_eta[i], &self.f_xi[i]);
            let sum = e + x;
            leq_a &= cmp_ge(&self.a, &sum, policy)?.not_failed();
            geq_a &= cmp_ge(&sum, &self.a, policy)?.not_failed();
            diff_ok &= cmp_ge(&self.b, &(x - e), policy)?.not_failed();
        }
        let sum_mode = if leq_a {
            SumMode::LeqA
        } else if geq_a {
            SumMode::GeqA
        } else {
            SumMode::Neither
        };
        Ok(Controls { sum_mode, leq_a, geq_a, diff_ok })
    }

    pub fn adjudicate(&self, restrict: bool, policy: &TolerancePolicy) -> Result<RelationReport> {
        let forms = self.compute_forms();
        let controls = self.check_controls(restrict, policy)?;
        let identity_residual = self.identity_residual();
        let zero = Scalar::zero();
        let mut implications = Vec::new();
        let mut notes = Vec::new();

        if !controls.diff_ok {
            notes.push("difference control unmet".to_string());
        }
        if controls.diff_ok && controls.leq_a {
            implications.push(Implication::evaluate(
                Rule::TwoFormNonnegImpliesOneFormNonneg,
                cmp_ge(&forms.c2, &zero, policy)?,
                cmp_ge(&forms.c1, &zero, policy)?,
            ));
            implications.push(Implication::evaluate(
                Rule::OneFormNonposImpliesTwoFormNonpos,
                cmp_ge(&zero, &forms.c1, policy)?,
                cmp_ge(&zero, &forms.c2, policy)?,
            ));
        }
        if controls.diff_ok && controls.geq_a {
            implications.push(Implication::evaluate(
                Rule::OneFormNonnegImpliesTwoFormNonneg,
                cmp_ge(&forms.c1, &zero, policy)?,
                cmp_ge(&forms.c2, &zero, policy)?,
            ));
            implications.push(Implication::evaluate(
                Rule::TwoFormNonposImpliesOneFormNonpos,
                cmp_ge(&zero, &forms.c2, policy)?,
                cmp_ge(&zero, &forms.c1, policy)?,
            ));
        }
        if implications.is_empty() {
            notes.push("controls unmet".to_string());
        }
        Ok(RelationReport {
            forms,
            controls,
            restricted: restrict,
            identity_residual,
            implications,
            notes,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// C₂ ≥ 0 ⇒ C₁ ≥ 0 (summation control ≤ a).
    TwoFormNonnegImpliesOneFormNonneg,
    /// C₁ ≤ 0 ⇒ C₂ ≤ 0 (summation control ≤ a).
    OneFormNonposImpliesTwoFormNonpos,
    /// C₁ ≥ 0 ⇒ C₂ ≥ 0 (summation control ≥ a).
    OneFormNonnegImpliesTwoFormNonneg,
    /// C₂ ≤ 0 ⇒ C₁ ≤ 0 (summation control ≥ a).
    TwoFormNonposImpliesOneFormNonpos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Premise fails; nothing to check.
    Vacuous,
    Confirmed,
    /// Conclusion sits inside the tolerance band.
    Marginal,
    /// Premise only marginal and conclusion fails: not a certified violation.
    Inconclusive,
    Falsified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Implication {
    pub rule: Rule,
    pub premise: Verdict,
    pub conclusion: Option<Verdict>,
    pub outcome: Outcome,
}

impl Implication {
    fn evaluate(rule: Rule, premise: Verdict, conclusion: Verdict) -> Self {
        let (conclusion, outcome) = match (premise, conclusion) {
            (Verdict::Fails, _) => (None, Outcome::Vacuous),
            (_, Verdict::Holds) => (Some(conclusion), Outcome::Confirmed),
            (_, Verdict::Marginal) => (Some(conclusion), Outcome::Marginal),
            (Verdict::Holds, Verdict::Fails) => (Some(conclusion), Outcome::Falsified),
            (Verdict::Marginal, Verdict::Fails) => (Some(conclusion), Outcome::Inconclusive),
        };
        Implication { rule, premise, conclusion, outcome }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub forms: Forms,
    pub controls: Controls,
    pub restricted: bool,
    pub identity_residual: Scalar,
    pub implications: Vec<Implication>,
    pub notes: Vec<String>,
}

impl RelationReport {
    pub fn falsified(&self) -> bool {
        self.implications.iter().any(|i| i.outcome == Outcome::Falsified)
    }

    pub fn fired(&self) -> impl Iterator<Item = &Implication> {
        self.implications.iter().filter(|i| i.outcome != Outcome::Vacuous)
    }

    pub fn controls_met(&self) -> bool {
        !self.implications.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<Scalar> {
        v.iter().map(|&x| Scalar::int(x)).collect()
    }

    fn instance(w: &[i64], eta: &[i64], xi: &[i64], a: i64, b: i64) -> HlawkaInstance {
        HlawkaInstance::new(
            WeightedFunctional::new(ints(w)).unwrap(),
            ints(eta),
            ints(xi),
            Scalar::int(a),
            Scalar::int(b),
        )
        .unwrap()
    }

    fn classical() -> HlawkaInstance {
        instance(&[1, 1, 1], &[1, 1, 1], &[2, 2, 2], 3, 3)
    }

    #[test]
    fn t_apply_examples() {
        let w = WeightedFunctional::counting(3).unwrap();
        assert_eq!(t_apply(&w, &ints(&[1, 1, 1])).unwrap(), Scalar::int(3));
        let z = WeightedFunctional::new(ints(&[0, 0, 0])).unwrap();
        assert_eq!(t_apply(&z, &ints(&[4, -9, 2])).unwrap(), Scalar::zero());
        let w = WeightedFunctional::new(vec![Scalar::ratio(1, 2), Scalar::ratio(1, 3), Scalar::ratio(1, 6)])
            .unwrap();
        assert_eq!(t_apply(&w, &ints(&[6, 6, 6])).unwrap(), Scalar::int(6));
        assert_eq!(
            t_apply(&w, &ints(&[1, 2])),
            Err(Error::LengthMismatch { expected: 3, actual: 2 })
        );
    }

    #[test]
    fn functional_rejects_negative_weights() {
        assert!(WeightedFunctional::new(ints(&[1, -1])).is_err());
        assert!(WeightedFunctional::new(vec![]).is_err());
    }

    #[test]
    fn constructor_rejects_degenerate_controls() {
        let w = || WeightedFunctional::counting(1).unwrap();
        let err = HlawkaInstance::new(w(), ints(&[1]), ints(&[1]), Scalar::zero(), Scalar::one());
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
        let err = HlawkaInstance::new(w(), ints(&[1]), ints(&[1]), Scalar::int(2), Scalar::int(-2));
        assert!(matches!(err, Err(Error::InvalidInstance(_))));
        let err = HlawkaInstance::new(w(), ints(&[1, 2]), ints(&[1]), Scalar::int(2), Scalar::int(2));
        assert!(matches!(err, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn classical_forms() {
        let f = classical().compute_forms();
        assert_eq!(f.c, Scalar::int(2));
        assert_eq!(f.c1, Scalar::zero());
        assert_eq!(f.c2, Scalar::zero());
    }

    #[test]
    fn zero_images() {
        let inst = instance(&[1, 1, 1], &[0, 0, 0], &[0, 0, 0], 1, 1);
        let f = inst.compute_forms();
        assert_eq!((f.c, f.c1, f.c2), (Scalar::zero(), Scalar::int(3), Scalar::int(3)));
        assert_eq!(inst.identity_residual(), Scalar::zero());
    }

    #[test]
    fn controls_examples() {
        let p = TolerancePolicy::default();
        let c = classical().check_controls(false, &p).unwrap();
        assert_eq!((c.sum_mode, c.diff_ok), (SumMode::LeqA, true));

        let c = instance(&[1], &[5], &[5], 1, 1).check_controls(false, &p).unwrap();
        assert_eq!((c.sum_mode, c.diff_ok), (SumMode::GeqA, true));

        let c = instance(&[1, 1], &[0, 5], &[1, 0], 4, 10).check_controls(false, &p).unwrap();
        assert_eq!((c.sum_mode, c.diff_ok), (SumMode::Neither, true));
    }

    #[test]
    fn restriction_drops_inactive_indices() {
        let p = TolerancePolicy::default();
        // index 1 has b + η − ξ = 0, so its oversized sum is ignored when restricted
        let inst = instance(&[1, 1], &[0, 1], &[1, 4], 4, 3);
        assert_eq!(inst.check_controls(false, &p).unwrap().sum_mode, SumMode::Neither);
        assert_eq!(inst.active_indices(&p), vec![0]);
        assert_eq!(inst.check_controls(true, &p).unwrap().sum_mode, SumMode::LeqA);
    }

    #[test]
    fn adjudicate_classical() {
        let r = classical().adjudicate(false, &TolerancePolicy::default()).unwrap();
        assert_eq!(r.controls.sum_mode, SumMode::LeqA);
        let first = &r.implications[0];
        assert_eq!(first.rule, Rule::TwoFormNonnegImpliesOneFormNonneg);
        assert_eq!(first.outcome, Outcome::Confirmed);
        assert!(!r.falsified());
        assert_eq!(r.identity_residual, Scalar::zero());
    }

    #[test]
    fn adjudicate_neither_mode_fires_nothing() {
        let r = instance(&[1, 1], &[0, 5], &[1, 0], 4, 10)
            .adjudicate(false, &TolerancePolicy::default())
            .unwrap();
        assert!(r.implications.is_empty());
        assert!(r.notes.iter().any(|n| n == "controls unmet"));
    }

    #[test]
    fn identity_residual_is_exact_on_rationals() {
        let inst = HlawkaInstance::new(
            WeightedFunctional::new(vec![Scalar::ratio(3, 7), Scalar::ratio(5, 2)]).unwrap(),
            vec![Scalar::ratio(-9, 4), Scalar::ratio(11, 3)],
            vec![Scalar::ratio(1, 5), Scalar::ratio(-2, 9)],
            Scalar::ratio(-3, 2),
            Scalar::ratio(7, 3),
        )
        .unwrap();
        assert_eq!(inst.identity_residual(), Scalar::zero());
    }

    #[test]
    fn falsification_outcome_logic() {
        use Verdict::*;
        let o = |p, c| Implication::evaluate(Rule::TwoFormNonnegImpliesOneFormNonneg, p, c).outcome;
        assert_eq!(o(Fails, Fails), Outcome::Vacuous);
        assert_eq!(o(Holds, Fails), Outcome::Falsified);
        assert_eq!(o(Marginal, Fails), Outcome::Inconclusive);
        assert_eq!(o(Holds, Marginal), Outcome::Marginal);
        assert_eq!(o(Marginal, Holds), Outcome::Confirmed);
    }
}
