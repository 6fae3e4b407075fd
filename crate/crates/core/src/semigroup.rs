//! Power-scaled Hlawka inequalities on abelian semigroups:
//!
//! ```text
//! F(x+y)^(1/2^k) + F(y+z)^(1/2^k) + F(z+x)^(1/2^k)
//!     ≤ F(x)^(1/2^k) + F(y)^(1/2^k) + F(z)^(1/2^k) + F(x+y+z)^(1/2^k)
//! ```
//!
//! together with the propagation rules in `k` for strong subadditive and
//! superadditive `F`, the `⋄ₖ` operation on `L^p`, finite measure spaces
//! under `∪` / `△`, and subadditive functions on groups.

use std::cmp::Ordering;
use std::fmt::Debug;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integral::ConcaveMap;
use crate::numerics::{cmp_ge, norm, pow_half_k, Scalar, TolerancePolicy, Verdict};

/// Default bound on `|k|` used by the sampled suites.
pub const DEFAULT_K_LIMIT: i32 = 4;

/// An abelian semigroup with a nonnegative valuation `F`.
pub trait Semigroup {
    type Element: Clone + Debug;

    fn combine(&self, x: &Self::Element, y: &Self::Element) -> Self::Element;

    fn valuation(&self, x: &Self::Element) -> Result<Scalar>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if p.is_finite() && p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(Error::Parameter(format!("L^p exponent must be >= 1, got {p}")))
        }
    }
}

/// `‖v‖_p`; scaled by the largest entry to keep high powers in range.
pub fn lp_norm(v: &[f64], p: LpExponent) -> f64 {
    let m = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    match p {
        LpExponent::Infinity => m,
        _ if m == 0.0 => 0.0,
        LpExponent::Finite(p) => m * v.iter().map(|x| (x.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Vectors in `R^m` under addition with `F = ‖·‖_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LpSpace {
    pub exponent: LpExponent,
}

impl Semigroup for LpSpace {
    type Element = Vec<f64>;

    fn combine(&self, x: &Vec<f64>, y: &Vec<f64>) -> Vec<f64> {
        x.iter().zip(y).map(|(a, b)| a + b).collect()
    }

    fn valuation(&self, x: &Vec<f64>) -> Result<Scalar> {
        Ok(Scalar::F64(lp_norm(x, self.exponent)))
    }
}

/// Subset of a ground set of at most 64 points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeasurableSet(pub u64);

impl MeasurableSet {
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut bits = 0u64;
        for &i in indices {
            if i >= 64 {
                return Err(Error::Parameter(format!("set index {i} outside a 64-point ground set")));
            }
            bits |= 1 << i;
        }
        Ok(MeasurableSet(bits))
    }

    pub fn union(self, other: Self) -> Self {
        MeasurableSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        MeasurableSet(self.0 & other.0)
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        MeasurableSet(self.0 ^ other.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetOp {
    Union,
    SymmDiff,
}

/// Subsets of `{0, …, n−1}` under `∪` or `△`, with `F = μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    weights: Vec<Scalar>,
    op: SetOp,
}

impl MeasureSpace {
    pub fn new(weights: Vec<Scalar>, op: SetOp) -> Result<Self> {
        if weights.is_empty() || weights.len() > 64 {
            return Err(Error::Parameter(format!(
                "ground set must have 1..=64 points, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || w.sign() == Some(Ordering::Less)) {
            return Err(Error::Parameter(format!("measure weights must be >= 0, got {w}")));
        }
        Ok(MeasureSpace { weights, op })
    }

    pub fn ground_size(&self) -> usize {
        self.weights.len()
    }

    pub fn op(&self) -> SetOp {
        self.op
    }

    pub fn measure(&self, set: MeasurableSet) -> Result<Scalar> {
        if self.weights.len() < 64 && set.0 >> self.weights.len() != 0 {
            return Err(Error::Domain(format!("set {:#x} leaves the ground set", set.0)));
        }
        Ok(self
            .weights
            .iter()
            .enumerate()
            .filter(|(i, _)| set.0 >> i & 1 == 1)
            .map(|(_, w)| w)
            .sum())
    }
}

impl Semigroup for MeasureSpace {
    type Element = MeasurableSet;

    fn combine(&self, x: &MeasurableSet, y: &MeasurableSet) -> MeasurableSet {
        match self.op {
            SetOp::Union => x.union(*y),
            SetOp::SymmDiff => x.symmetric_difference(*y),
        }
    }

    fn valuation(&self, x: &MeasurableSet) -> Result<Scalar> {
        self.measure(*x)
    }
}

/// `[0, ∞)` under addition with `F(x) = x^power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NonnegReals {
    pub power: u32,
}

impl Semigroup for NonnegReals {
    type Element = Scalar;

    fn combine(&self, x: &Scalar, y: &Scalar) -> Scalar {
        x + y
    }

    fn valuation(&self, x: &Scalar) -> Result<Scalar> {
        if x.sign() == Some(Ordering::Less) {
            return Err(Error::Domain(format!("{x} is not a nonnegative real")));
        }
        Ok(x.powi(self.power))
    }
}

/// `R^d` under addition with `F = S(‖·‖)` (absolute value when `d = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SubadditiveGroup {
    pub s: ConcaveMap,
}

impl Semigroup for SubadditiveGroup {
    type Element = Vec<Scalar>;

    fn combine(&self, x: &Vec<Scalar>, y: &Vec<Scalar>) -> Vec<Scalar> {
        x.iter().zip(y).map(|(a, b)| a + b).collect()
    }

    fn valuation(&self, x: &Vec<Scalar>) -> Result<Scalar> {
        self.s.apply(&norm(x))
    }
}

fn checked_valuation<G: Semigroup>(g: &G, x: &G::Element) -> Result<Scalar> {
    let v = g.valuation(x)?;
    if v.is_nan() || v.sign() == Some(Ordering::Less) {
        return Err(Error::Domain(format!("valuation must be nonnegative, got {v} at {x:?}")));
    }
    Ok(v)
}

/// RHS − LHS of the `2^k`-scaled inequality.
pub fn hlawka_power_margin<G: Semigroup>(
    g: &G,
    x: &G::Element,
    y: &G::Element,
    z: &G::Element,
    k: i32,
) -> Result<Scalar> {
    let xy = g.combine(x, y);
    let yz = g.combine(y, z);
    let zx = g.combine(z, x);
    let xyz = g.combine(&xy, z);
    let f = |e: &G::Element| checked_valuation(g, e).and_then(|v| pow_half_k(&v, k));
    Ok(f(x)? + f(y)? + f(z)? + f(&xyz)? - f(&xy)? - f(&yz)? - f(&zx)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Additivity<E> {
    Holds,
    Violated { x: E, y: E },
}

impl<E> Additivity<E> {
    pub fn holds(&self) -> bool {
        matches!(self, Additivity::Holds)
    }
}

/// `F(x)+F(y) ≥ F(x+y)` and `F(x)+F(x+y) ≥ F(y)` on every pair.
pub fn check_strong_subadditive<G: Semigroup>(
    g: &G,
    pairs: &[(G::Element, G::Element)],
    policy: &TolerancePolicy,
) -> Result<Additivity<G::Element>> {
    for (x, y) in pairs {
        let (fx, fy) = (checked_valuation(g, x)?, checked_valuation(g, y)?);
        let fxy = checked_valuation(g, &g.combine(x, y))?;
        if cmp_ge(&(&fx + &fy), &fxy, policy)? == Verdict::Fails || cmp_ge(&(&fx + &fxy), &fy, policy)? == Verdict::Fails {
            return Ok(Additivity::Violated { x: x.clone(), y: y.clone() });
        }
    }
    Ok(Additivity::Holds)
}

/// `F(x)+F(y) ≤ F(x+y)` on every pair.
pub fn check_superadditive<G: Semigroup>(
    g: &G,
    pairs: &[(G::Element, G::Element)],
    policy: &TolerancePolicy,
) -> Result<Additivity<G::Element>> {
    for (x, y) in pairs {
        let fsum = checked_valuation(g, x)? + checked_valuation(g, y)?;
        let fxy = checked_valuation(g, &g.combine(x, y))?;
        if cmp_ge(&fxy, &fsum, policy)? == Verdict::Fails {
            return Ok(Additivity::Violated { x: x.clone(), y: y.clone() });
        }
    }
    Ok(Additivity::Holds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Propagates upward from `k0 ≥ −1`.
    StrongSubadditive,
    /// Propagates downward from `k0 ≤ 0`.
    Superadditive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationViolation {
    pub triple: usize,
    pub k: i32,
    pub margin: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropagationReport {
    pub branch: Branch,
    pub k0: i32,
    pub ks: Vec<i32>,
    pub triples: usize,
    /// Triples whose margin at `k0` is nonnegative.
    pub premise_held: usize,
    pub conclusions_checked: usize,
    /// Conclusion failures under a premise that held only within tolerance.
    pub inconclusive: usize,
    pub violations: Vec<PropagationViolation>,
}

impl PropagationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Pairs on which the propagation rule leans: each pair of a triple and
/// each single against the sum of the other two.
fn derived_pairs<G: Semigroup>(g: &G, triples: &[[G::Element; 3]]) -> Vec<(G::Element, G::Element)> {
    let mut pairs = Vec::with_capacity(triples.len() * 6);
    for [x, y, z] in triples {
        for (a, b, c) in [(x, y, z), (y, z, x), (z, x, y)] {
            pairs.push((a.clone(), b.clone()));
            pairs.push((c.clone(), g.combine(a, b)));
        }
    }
    pairs
}

/// For each triple whose margin at `k0` is nonnegative, checks the margin
/// at every `k` in `ks`.
pub fn propagate_check<G: Semigroup>(
    g: &G,
    triples: &[[G::Element; 3]],
    branch: Branch,
    k0: i32,
    ks: &[i32],
    policy: &TolerancePolicy,
) -> Result<PropagationReport> {
    let in_range = match branch {
        Branch::StrongSubadditive => k0 >= -1 && ks.iter().all(|&k| k >= k0),
        Branch::Superadditive => k0 <= 0 && ks.iter().all(|&k| k <= k0),
    };
    if !in_range {
        return Err(Error::Parameter(format!("k0 = {k0} and ks = {ks:?} do not fit the {branch:?} branch")));
    }
    let pairs = derived_pairs(g, triples);
    let pre = match branch {
        Branch::StrongSubadditive => check_strong_subadditive(g, &pairs, policy)?,
        Branch::Superadditive => check_superadditive(g, &pairs, policy)?,
    };
    if let Additivity::Violated { x, y } = pre {
        return Err(Error::Premise {
            index: 0,
            detail: format!("{branch:?} fails on ({x:?}, {y:?})"),
        });
    }

    let zero = Scalar::zero();
    let mut report = PropagationReport {
        branch,
        k0,
        ks: ks.to_vec(),
        triples: triples.len(),
        premise_held: 0,
        conclusions_checked: 0,
        inconclusive: 0,
        violations: Vec::new(),
    };
    for (i, [x, y, z]) in triples.iter().enumerate() {
        let premise = cmp_ge(&hlawka_power_margin(g, x, y, z, k0)?, &zero, policy)?;
        if premise == Verdict::Fails {
            continue;
        }
        report.premise_held += 1;
        for &k in ks {
            let margin = hlawka_power_margin(g, x, y, z, k)?;
            report.conclusions_checked += 1;
            if cmp_ge(&margin, &zero, policy)? == Verdict::Fails {
                if premise == Verdict::Holds {
                    report.violations.push(PropagationViolation { triple: i, k, margin });
                } else {
                    report.inconclusive += 1;
                }
            }
        }
    }
    Ok(report)
}

/// Inclusion–exclusion bookkeeping for three sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureResiduals {
    /// `Σμ(single) − Σμ(pairwise ∪) + μ(A∪B∪C) − μ(A∩B∩C)`
    pub union: Scalar,
    /// `Σμ(single) − Σμ(pairwise △) + μ(A△B△C) − 4μ(A∩B∩C)`
    pub symm_diff: Scalar,
    pub triple_intersection: Scalar,
}

/// Coefficient of `μ(A∩B∩C)` in the symmetric-difference identity: a point
/// of `A∩B∩C` counts three times among the singles and once more in
/// `A△B△C`.
pub const SYMM_DIFF_TRIPLE_COEFFICIENT: i64 = 4;

pub fn measure_identity_residuals(
    weights: &[Scalar],
    a: MeasurableSet,
    b: MeasurableSet,
    c: MeasurableSet,
) -> Result<MeasureResiduals> {
    let space = MeasureSpace::new(weights.to_vec(), SetOp::Union)?;
    let mu = |s: MeasurableSet| space.measure(s);
    let singles = mu(a)? + mu(b)? + mu(c)?;
    let cap = mu(a.intersection(b).intersection(c))?;
    let union = &singles - mu(a.union(b))? - mu(b.union(c))? - mu(c.union(a))? + mu(a.union(b).union(c))? - &cap;
    let sd = |x: MeasurableSet, y: MeasurableSet| mu(x.symmetric_difference(y));
    let symm_diff = &singles - sd(a, b)? - sd(b, c)? - sd(c, a)? + mu(a.symmetric_difference(b).symmetric_difference(c))?
        - Scalar::int(SYMM_DIFF_TRIPLE_COEFFICIENT) * &cap;
    Ok(MeasureResiduals { union, symm_diff, triple_intersection: cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiamondOrder {
    Finite(u32),
    Infinity,
}

impl DiamondOrder {
    /// `2^k`, or `None` at infinity.
    pub fn scale(self) -> Option<f64> {
        match self {
            DiamondOrder::Finite(k) => Some(2f64.powi(k as i32)),
            DiamondOrder::Infinity => None,
        }
    }
}

/// Pointwise `(a^(2^k) + b^(2^k))^(1/2^k)`; `a + b` at `k = 0`,
/// `max(|a|, |b|)` at `k = ∞`.
pub fn diamond(a: &[f64], b: &[f64], k: DiamondOrder) -> Result<Vec<f64>> {
    crate::numerics::check_len(a.len(), b.len())?;
    match k {
        DiamondOrder::Finite(0) => Ok(a.iter().zip(b).map(|(x, y)| x + y).collect()),
        DiamondOrder::Infinity => Ok(a.iter().zip(b).map(|(x, y)| x.abs().max(y.abs())).collect()),
        DiamondOrder::Finite(k) => {
            if let Some(v) = a.iter().chain(b).find(|v| **v < 0.0 || v.is_nan()) {
                return Err(Error::Domain(format!("diamond of order {k} needs nonnegative entries, got {v}")));
            }
            let e = 2f64.powi(k as i32);
            Ok(a.iter()
                .zip(b)
                .map(|(&x, &y)| {
                    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
                    if hi == 0.0 {
                        0.0
                    } else {
                        hi * (1.0 + (lo / hi).powf(e)).powf(1.0 / e)
                    }
                })
                .collect())
        }
    }
}

/// `‖a‖+‖b‖+‖c‖+‖a⋄b⋄c‖ − ‖a⋄b‖ − ‖b⋄c‖ − ‖c⋄a‖` in `L^p`.
pub fn diamond_hlawka_margin(p: LpExponent, k: DiamondOrder, a: &[f64], b: &[f64], c: &[f64]) -> Result<Scalar> {
    let ab = diamond(a, b, k)?;
    let bc = diamond(b, c, k)?;
    let ca = diamond(c, a, k)?;
    let abc = diamond(&ab, c, k)?;
    let n = |v: &[f64]| lp_norm(v, p);
    Ok(Scalar::F64(n(a) + n(b) + n(c) + n(&abc) - n(&ab) - n(&bc) - n(&ca)))
}

/// For each triple, "`S²` inequality ⇒ `S` inequality" on
/// `F = S(‖·‖)`: the strong subadditive branch from `k0 = −1` to `k = 0`.
pub fn ressel_check(s: &ConcaveMap, triples: &[[Vec<Scalar>; 3]], policy: &TolerancePolicy) -> Result<PropagationReport> {
    s.validate()?;
    let group = SubadditiveGroup { s: s.clone() };
    propagate_check(&group, triples, Branch::StrongSubadditive, -1, &[0], policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::trial_rng;
    use rand::Rng;

    fn p() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn set(ix: &[usize]) -> MeasurableSet {
        MeasurableSet::from_indices(ix).unwrap()
    }

    fn counting(n: usize, op: SetOp) -> MeasureSpace {
        MeasureSpace::new(vec![Scalar::one(); n], op).unwrap()
    }

    #[test]
    fn counting_measure_singletons() {
        let m = counting(3, SetOp::Union);
        let margin = hlawka_power_margin(&m, &set(&[0]), &set(&[1]), &set(&[2]), 1).unwrap();
        // 3 + √3 − 3√2
        assert!((margin.to_f64() - 0.4894101204495911).abs() < 1e-12);
        assert_eq!(hlawka_power_margin(&m, &set(&[0]), &set(&[1]), &set(&[2]), 0).unwrap(), Scalar::zero());
    }

    #[test]
    fn zero_valuation_triple() {
        let m = counting(3, SetOp::Union);
        let e = MeasurableSet(0);
        for k in -2..=3 {
            assert!(hlawka_power_margin(&m, &e, &e, &e, k).unwrap().is_zero());
        }
    }

    #[test]
    fn l2_matches_euclidean_forward_margin() {
        let l2 = LpSpace { exponent: LpExponent::Finite(2.0) };
        let (x, y, z) = (vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, -1.0]);
        // ‖x+y‖ = √2 makes this an equality case
        assert!(hlawka_power_margin(&l2, &x, &y, &z, 0).unwrap().to_f64().abs() < 1e-15);
        let z = vec![1.0, 1.0];
        let m = hlawka_power_margin(&l2, &x, &y, &z, 0).unwrap().to_f64();
        assert!((m - 0.3562911697466111).abs() < 1e-12);
    }

    #[test]
    fn negative_valuation_is_rejected() {
        struct Signed;
        impl Semigroup for Signed {
            type Element = i64;
            fn combine(&self, x: &i64, y: &i64) -> i64 {
                x + y
            }
            fn valuation(&self, x: &i64) -> Result<Scalar> {
                Ok(Scalar::int(*x))
            }
        }
        assert!(matches!(hlawka_power_margin(&Signed, &1, &-3, &1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn additivity_examples() {
        let union = counting(4, SetOp::Union);
        let pairs: Vec<_> = (0..16u64).flat_map(|a| (0..16u64).map(move |b| (MeasurableSet(a), MeasurableSet(b)))).collect();
        assert!(check_strong_subadditive(&union, &pairs, &p()).unwrap().holds());
        assert_eq!(
            check_superadditive(&union, &[(set(&[1]), set(&[1]))], &p()).unwrap(),
            Additivity::Violated { x: set(&[1]), y: set(&[1]) }
        );

        let sq = NonnegReals { power: 2 };
        let one = Scalar::one();
        assert_eq!(
            check_strong_subadditive(&sq, &[(one.clone(), one.clone())], &p()).unwrap(),
            Additivity::Violated { x: one.clone(), y: one.clone() }
        );
        let grid: Vec<_> = (0..10).flat_map(|a| (0..10).map(move |b| (Scalar::ratio(a, 3), Scalar::ratio(b, 2)))).collect();
        assert!(check_superadditive(&sq, &grid, &p()).unwrap().holds());
        assert!(check_superadditive(&NonnegReals { power: 1 }, &grid, &p()).unwrap().holds());

        let mut lp_pairs = Vec::new();
        for i in 0..300 {
            let mut rng = trial_rng(2, "lp-pairs", i);
            let v = |rng: &mut rand_chacha::ChaCha8Rng| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<f64>>();
            lp_pairs.push((v(&mut rng), v(&mut rng)));
        }
        for e in [LpExponent::Finite(1.0), LpExponent::Finite(1.5), LpExponent::Finite(3.0), LpExponent::Infinity] {
            assert!(check_strong_subadditive(&LpSpace { exponent: e }, &lp_pairs, &p()).unwrap().holds());
        }
    }

    #[test]
    fn combine_is_associative_and_commutative() {
        for op in [SetOp::Union, SetOp::SymmDiff] {
            let m = counting(6, op);
            for i in 0..200 {
                let mut rng = trial_rng(4, "assoc", i);
                let [a, b, c] = [0; 3].map(|_| MeasurableSet(rng.random_range(0..64)));
                assert_eq!(m.combine(&a, &b), m.combine(&b, &a));
                assert_eq!(m.combine(&m.combine(&a, &b), &c), m.combine(&a, &m.combine(&b, &c)));
            }
        }
    }

    #[test]
    fn propagation_branch_ranges() {
        let m = counting(3, SetOp::Union);
        let t = [[set(&[0]), set(&[1]), set(&[2])]];
        assert!(propagate_check(&m, &t, Branch::StrongSubadditive, -2, &[0], &p()).is_err());
        assert!(propagate_check(&m, &t, Branch::StrongSubadditive, 1, &[0], &p()).is_err());
        assert!(propagate_check(&m, &t, Branch::Superadditive, 1, &[0], &p()).is_err());
        let sq = NonnegReals { power: 2 };
        let t = [[Scalar::one(), Scalar::one(), Scalar::one()]];
        assert!(matches!(
            propagate_check(&sq, &t, Branch::StrongSubadditive, 0, &[1], &p()),
            Err(Error::Premise { .. })
        ));
    }

    #[test]
    fn propagation_measures_and_squares() {
        for op in [SetOp::Union, SetOp::SymmDiff] {
            let m = counting(5, op);
            let mut triples = Vec::new();
            for a in (0..32).step_by(3) {
                for b in (0..32).step_by(5) {
                    for c in 0..32 {
                        triples.push([MeasurableSet(a), MeasurableSet(b), MeasurableSet(c)]);
                    }
                }
            }
            let r = propagate_check(&m, &triples, Branch::StrongSubadditive, 0, &[0, 1, 2, 3, 4], &p()).unwrap();
            assert_eq!(r.premise_held, triples.len());
            assert!(r.is_clean(), "{op:?}: {:?}", r.violations.first());
        }

        let sq = NonnegReals { power: 2 };
        let triples: Vec<_> = (0..200)
            .map(|i| {
                let mut rng = trial_rng(9, "squares", i);
                [0; 3].map(|_| Scalar::ratio(rng.random_range(0..50), rng.random_range(1..8)))
            })
            .collect();
        let r = propagate_check(&sq, &triples, Branch::Superadditive, 0, &[-3, -2, -1, 0], &p()).unwrap();
        // (x+y)² + (y+z)² + (z+x)² = x² + y² + z² + (x+y+z)²
        assert_eq!(r.premise_held, triples.len());
        assert!(r.is_clean());
    }

    #[test]
    fn measure_identities_exhaustive() {
        let mut rng = trial_rng(1, "weights", 0);
        let weights: Vec<Scalar> = (0..5).map(|_| Scalar::ratio(rng.random_range(0..30), rng.random_range(1..9))).collect();
        for a in 0..32 {
            for b in 0..32 {
                for c in 0..32 {
                    let (a, b, c) = (MeasurableSet(a), MeasurableSet(b), MeasurableSet(c));
                    let r = measure_identity_residuals(&weights, a, b, c).unwrap();
                    assert!(r.union.is_zero() && r.symm_diff.is_zero(), "{a:?} {b:?} {c:?}");
                }
            }
        }
        let one = [Scalar::one(), Scalar::one()];
        let r = measure_identity_residuals(&one, set(&[0]), set(&[0]), set(&[0])).unwrap();
        assert_eq!(r.triple_intersection, Scalar::one());
        assert!(r.union.is_zero() && r.symm_diff.is_zero());
    }

    #[test]
    fn measure_rejects_bad_inputs() {
        assert!(MeasureSpace::new(vec![Scalar::int(-1)], SetOp::Union).is_err());
        assert!(MeasureSpace::new(vec![Scalar::one(); 65], SetOp::Union).is_err());
        assert!(counting(3, SetOp::Union).measure(set(&[5])).is_err());
        assert!(MeasurableSet::from_indices(&[64]).is_err());
    }

    #[test]
    fn diamond_examples() {
        assert_eq!(diamond(&[1.0, 2.0], &[3.0, 4.0], DiamondOrder::Finite(0)).unwrap(), vec![4.0, 6.0]);
        assert_eq!(diamond(&[1.0, 5.0], &[3.0, 2.0], DiamondOrder::Infinity).unwrap(), vec![3.0, 5.0]);
        assert_eq!(diamond(&[3.0, 0.0], &[4.0, 0.0], DiamondOrder::Finite(1)).unwrap(), vec![5.0, 0.0]);
        assert!(diamond(&[-1.0], &[1.0], DiamondOrder::Finite(1)).is_err());
    }

    #[test]
    fn diamond_is_associative_and_commutative() {
        for k in [DiamondOrder::Finite(0), DiamondOrder::Finite(1), DiamondOrder::Finite(3), DiamondOrder::Infinity] {
            for i in 0..200 {
                let mut rng = trial_rng(6, "diamond", i);
                let [a, b, c] = [0; 3].map(|_| (0..3).map(|_| rng.random_range(0.0..4.0)).collect::<Vec<f64>>());
                let ab_c = diamond(&diamond(&a, &b, k).unwrap(), &c, k).unwrap();
                let a_bc = diamond(&a, &diamond(&b, &c, k).unwrap(), k).unwrap();
                let ba = diamond(&b, &a, k).unwrap();
                for j in 0..3 {
                    assert!((ab_c[j] - a_bc[j]).abs() < 1e-12 * (1.0 + ab_c[j]));
                    assert_eq!(ba[j], diamond(&a, &b, k).unwrap()[j]);
                }
            }
        }
    }

    #[test]
    fn diamond_norm_substitution_identity() {
        // ‖a⋄ₖb‖_{2^k p} = ‖a^{2^k} + b^{2^k}‖_p^{1/2^k}
        for i in 0..200 {
            let mut rng = trial_rng(8, "substitution", i);
            let k = rng.random_range(0..=3u32);
            let p = rng.random_range(1.0..2.0);
            let e = 2f64.powi(k as i32);
            let [a, b] = [0; 2].map(|_| (0..4).map(|_| rng.random_range(0.0..3.0)).collect::<Vec<f64>>());
            let lhs = lp_norm(&diamond(&a, &b, DiamondOrder::Finite(k)).unwrap(), LpExponent::Finite(e * p));
            let powered: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.powf(e) + y.powf(e)).collect();
            let rhs = lp_norm(&powered, LpExponent::Finite(p)).powf(1.0 / e);
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn power_mean_is_nonincreasing() {
        for &(a, b) in &[(0.5, 2.0), (1.0, 1.0), (3.0, 0.1), (7.0, 7.5)] {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let t = i as f64 * 0.05;
                let v = (f64::powf(a, t) + f64::powf(b, t)).powf(1.0 / t);
                assert!(v <= prev * (1.0 + 1e-14), "a={a} b={b} t={t}");
                prev = v;
            }
        }
    }

    #[test]
    fn diamond_margin_examples() {
        let a = [1.0, 2.0, 0.5];
        let m = diamond_hlawka_margin(LpExponent::Finite(2.0), DiamondOrder::Finite(1), &a, &a, &a).unwrap().to_f64();
        let n = |v: &[f64]| lp_norm(v, LpExponent::Finite(2.0));
        let aa = diamond(&a, &a, DiamondOrder::Finite(1)).unwrap();
        let aaa = diamond(&aa, &a, DiamondOrder::Finite(1)).unwrap();
        assert!((m - (3.0 * n(&a) + n(&aaa) - 3.0 * n(&aa))).abs() < 1e-12);

        let (x, y, z) = ([1.0, 0.0], [0.0, 1.0], [1.0, 1.0]);
        let m = diamond_hlawka_margin(LpExponent::Finite(2.0), DiamondOrder::Finite(0), &x, &y, &z).unwrap();
        assert!((m.to_f64() - 0.3562911697466111).abs() < 1e-12);
    }

    #[test]
    fn ressel_examples() {
        let euclid: Vec<[Vec<Scalar>; 3]> = (0..200)
            .map(|i| {
                let mut rng = trial_rng(3, "ressel", i);
                [0; 3].map(|_| (0..3).map(|_| Scalar::float(rng.random_range(-3.0..3.0))).collect())
            })
            .collect();
        let r = ressel_check(&ConcaveMap::Identity, &euclid, &p()).unwrap();
        assert!(r.is_clean());
        // the two-form at S = identity is the exact quadratic identity
        assert_eq!(r.premise_held, euclid.len());

        let mut ints = Vec::new();
        for x in -5..=5 {
            for y in -5..=5 {
                for z in -5..=5 {
                    ints.push([vec![Scalar::int(x)], vec![Scalar::int(y)], vec![Scalar::int(z)]]);
                }
            }
        }
        let r = ressel_check(&ConcaveMap::Sqrt, &ints, &p()).unwrap();
        assert!(r.is_clean());
        assert!(r.premise_held > 0);

        let zero_s = ConcaveMap::CappedLinear { cap: Scalar::ratio(1, 1_000_000) };
        let tiny: Vec<[Vec<Scalar>; 3]> = vec![[vec![Scalar::zero()], vec![Scalar::zero()], vec![Scalar::zero()]]];
        let r = ressel_check(&zero_s, &tiny, &p()).unwrap();
        assert!(r.is_clean() && r.premise_held == 1);
    }
}
