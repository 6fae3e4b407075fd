//! Random and designed instances shared by the campaign and the test
//! suites. Every generator draws only from the supplied RNG.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::integral::{aggregate, ConcaveMap, DiscreteMeasure, GroupmainInstance, VectorFunction};
use crate::numerics::{rational, Scalar, TolerancePolicy};
use crate::quadratic::signature::Signature;
use crate::quadratic::QuadraticForm;
use crate::relation::{HlawkaInstance, SumMode, WeightedFunctional};
use crate::sampling::{nonneg_rational_in, rational_in, rational_vec};

pub fn gaussian_vec<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Scalar> {
    (0..n).map(|_| Scalar::F64(rng.sample(StandardNormal))).collect()
}

/// Nonnegative floats in `[0, hi)`.
pub fn nonneg_f64_vec<R: Rng + ?Sized>(rng: &mut R, n: usize, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.0..hi)).collect()
}

pub fn random_symmetric_form<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<QuadraticForm> {
    let mut m = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = rational(rng.random_range(-9..=9), rng.random_range(1..=6));
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    QuadraticForm::new(m)
}

/// `PᵀDP` with `D` diagonal in `{−3, …, 3}` and `P` unit upper triangular,
/// returned with the signature of `D`.
pub fn congruent_form<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<(QuadraticForm, Signature)> {
    let d: Vec<BigRational> = (0..n).map(|_| rational(rng.random_range(-3..=3), 1)).collect();
    let mut p = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        p[i][i] = BigRational::one();
        for entry in p[i].iter_mut().skip(i + 1) {
            *entry = rational(rng.random_range(-5..=5), rng.random_range(1..=3));
        }
    }
    let mut q = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            for (k, dk) in d.iter().enumerate() {
                q[i][j] += &p[k][i] * dk * &p[k][j];
            }
        }
    }
    let mut sig = Signature { positive: 0, negative: 0, zero: 0 };
    for x in &d {
        match x.cmp(&BigRational::zero()) {
            std::cmp::Ordering::Greater => sig.positive += 1,
            std::cmp::Ordering::Less => sig.negative += 1,
            std::cmp::Ordering::Equal => sig.zero += 1,
        }
    }
    Ok((QuadraticForm::new(q)?, sig))
}

/// Nonnegative rational weights; roughly one in six is zero.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Scalar> {
    (0..n)
        .map(|_| {
            if rng.random_bool(1.0 / 6.0) {
                Scalar::zero()
            } else {
                nonneg_rational_in(rng, 4, 5)
            }
        })
        .collect()
}

/// Exact instance with no control constraints.
pub fn random_relation_instance<R: Rng + ?Sized>(rng: &mut R) -> Result<HlawkaInstance> {
    let n = rng.random_range(1..=6);
    let functional = WeightedFunctional::new(random_weights(rng, n))?;
    loop {
        let eta = rational_vec(rng, n, 6, 7);
        let xi = rational_vec(rng, n, 6, 7);
        let a = rational_in(rng, 10, 7);
        let b = rational_in(rng, 10, 7);
        if let Ok(inst) = HlawkaInstance::new(functional.clone(), eta, xi, a, b) {
            return Ok(inst);
        }
    }
}

#[derive(Debug, Clone)]
pub struct ControlledInstance {
    pub instance: HlawkaInstance,
    pub mode: SumMode,
    /// Controls hold only on `{b + f∘η − f∘ξ ≠ 0}`.
    pub restrict: bool,
}

/// Exact instance satisfying the difference control and one summation
/// control, either on all of Ω or only on the active set.
pub fn control_satisfying_instance<R: Rng + ?Sized>(rng: &mut R) -> Result<ControlledInstance> {
    let n = rng.random_range(1..=6);
    let functional = WeightedFunctional::new(random_weights(rng, n))?;
    let mode = if rng.random_bool(0.5) { SumMode::LeqA } else { SumMode::GeqA };
    let restrict = rng.random_bool(0.25);
    loop {
        let b = nonneg_rational_in(rng, 5, 7);
        let eta = rational_vec(rng, n, 5, 7);
        let mut xi = Vec::with_capacity(n);
        let mut active = Vec::with_capacity(n);
        for e in &eta {
            // ξ − η ≤ b; δ = 0 makes the index inactive
            let delta = if rng.random_bool(0.2) { Scalar::zero() } else { nonneg_rational_in(rng, 5, 7) };
            active.push(!delta.is_zero());
            xi.push(e + &b - delta);
        }
        let sums: Vec<Scalar> = eta.iter().zip(&xi).zip(&active).filter(|(_, &act)| act || !restrict).map(|((e, x), _)| e + x).collect();
        let slack = nonneg_rational_in(rng, 3, 7);
        let a = match (mode, sums.is_empty()) {
            (_, true) => rational_in(rng, 10, 7),
            (SumMode::LeqA, false) => sums.iter().fold(sums[0].clone(), |m, s| m.max(s)) + slack,
            (_, false) => sums.iter().fold(sums[0].clone(), |m, s| m.min(s)) - slack,
        };
        let mut eta = eta;
        if restrict {
            // inactive indices may break the summation control freely, as
            // long as ξ = η + b keeps them inactive
            for (i, act) in active.iter().enumerate() {
                if !act && rng.random_bool(0.5) {
                    let shift = rational_in(rng, 20, 3);
                    eta[i] = &eta[i] + &shift;
                    xi[i] = &xi[i] + &shift;
                }
            }
        }
        if let Ok(instance) = HlawkaInstance::new(functional.clone(), eta, xi, a, b) {
            return Ok(ControlledInstance { instance, mode, restrict });
        }
    }
}

pub fn random_measure<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DiscreteMeasure> {
    let mut w = random_weights(rng, n);
    if w.iter().all(Scalar::is_zero) {
        w[0] = Scalar::one();
    }
    DiscreteMeasure::new(w)
}

pub fn random_vector_function<R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<VectorFunction> {
    VectorFunction::new((0..n).map(|_| rational_vec(rng, d, 3, 4)).collect())
}

pub fn random_permutation<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Instance whose premise holds: `A` is the largest requirement scaled by
/// a factor in `[1, 2]`.
pub fn premise_satisfying_groupmain<R: Rng + ?Sized>(
    rng: &mut R,
    s: &ConcaveMap,
    policy: &TolerancePolicy,
) -> Result<GroupmainInstance> {
    let n = rng.random_range(1..=6);
    let d = rng.random_range(1..=3);
    let measure = random_measure(rng, n)?;
    let g = random_vector_function(rng, n, d)?;
    let t_g = if rng.random_bool(0.5) { aggregate(&measure, &g)? } else { rational_vec(rng, d, 3, 4) };
    let probe = GroupmainInstance::new(measure.clone(), g.clone(), t_g.clone(), s.clone(), Scalar::one())?;
    let reqs = probe.premise_requirements(policy)?;
    let top = reqs.iter().map(|(_, r)| r.clone()).fold(Scalar::zero(), |m, r| m.max(&r));
    let a = if top.sign() == Some(std::cmp::Ordering::Greater) {
        top * (Scalar::one() + nonneg_rational_in(rng, 1, 8))
    } else {
        Scalar::one()
    };
    GroupmainInstance::new(measure, g, t_g, s.clone(), a)
}

/// Instance whose premise fails at exactly one atom, returned alongside
/// that atom. `S` must be unbounded; an outlier `ĝ(w) = 10⁴·𝒯g` at a
/// positive atom `w` dominates every other requirement.
pub fn designed_groupmain_violator<R: Rng + ?Sized>(
    rng: &mut R,
    s: &ConcaveMap,
    policy: &TolerancePolicy,
) -> Result<(GroupmainInstance, usize)> {
    let n = rng.random_range(2..=6);
    let d = rng.random_range(1..=3);
    let mut weights = random_weights(rng, n);
    let w = rng.random_range(0..n);
    weights[w] = Scalar::one() + nonneg_rational_in(rng, 2, 5);
    let measure = DiscreteMeasure::new(weights)?;
    let mut t_g: Vec<Scalar> = (0..d).map(|_| Scalar::int(rng.random_range(-3..=3))).collect();
    if t_g.iter().all(Scalar::is_zero) {
        t_g[0] = Scalar::one();
    }
    let mut rows: Vec<Vec<Scalar>> = (0..n).map(|_| rational_vec(rng, d, 3, 4)).collect();
    rows[w] = t_g.iter().map(|x| x * Scalar::int(10_000)).collect();
    let g = VectorFunction::new(rows)?;
    let probe = GroupmainInstance::new(measure.clone(), g.clone(), t_g.clone(), s.clone(), Scalar::one())?;
    let top = probe
        .premise_requirements(policy)?
        .into_iter()
        .filter(|(i, _)| *i != w)
        .map(|(_, r)| r)
        .fold(Scalar::zero(), |m, r| m.max(&r));
    let a = if top.is_zero() { Scalar::one() } else { top * (Scalar::one() + nonneg_rational_in(rng, 1, 8)) };
    Ok((GroupmainInstance::new(measure, g, t_g, s.clone(), a)?, w))
}
