//! Hlawka inequalities over a discrete measure with vector-valued
//! functions in `R^d`.
//!
//! `T(v) = Σ μᵢ vᵢ` plays the role of the scalar integral and
//! [`aggregate`] (`Σ μᵢ f(i)`) the vector-valued one. Every margin here is
//! "right-hand side minus left-hand side" of the asserted inequality, so a
//! nonnegative margin means it holds.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    check_len, cmp_eq, cmp_ge, dot, norm, norm_sq, vec_scale, vec_sub, Scalar, TolerancePolicy, Verdict,
};
use crate::relation::{HlawkaInstance, Outcome, WeightedFunctional};

/// Finite measure given by nonnegative atom weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure(WeightedFunctional);

impl DiscreteMeasure {
    pub fn new(weights: Vec<Scalar>) -> Result<Self> {
        WeightedFunctional::new(weights).map(DiscreteMeasure)
    }

    pub fn counting(n: usize) -> Result<Self> {
        WeightedFunctional::counting(n).map(DiscreteMeasure)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[Scalar] {
        self.0.weights()
    }

    /// `μ(Ω)`
    pub fn total(&self) -> &Scalar {
        self.0.total()
    }

    /// `T(v) = Σ μᵢ vᵢ`
    pub fn integrate(&self, v: &[Scalar]) -> Result<Scalar> {
        self.0.apply(v)
    }

    pub fn functional(&self) -> &WeightedFunctional {
        &self.0
    }

    pub fn is_uniform(&self) -> bool {
        let w = self.weights();
        w.iter().all(|x| x.compare(&w[0]) == Some(Ordering::Equal))
    }

    fn positive_atoms(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights()
            .iter()
            .enumerate()
            .filter(|(_, w)| w.sign() == Some(Ordering::Greater))
            .map(|(i, _)| i)
    }
}

/// Values `f(ω) ∈ R^d` for each atom.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorFunction {
    values: Vec<Vec<Scalar>>,
    dim: usize,
}

impl VectorFunction {
    pub fn new(values: Vec<Vec<Scalar>>) -> Result<Self> {
        let dim = values
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidInstance("vector function needs at least one value".into()))?;
        if dim == 0 {
            return Err(Error::InvalidInstance("vector dimension must be at least 1".into()));
        }
        for v in &values {
            check_len(dim, v.len())?;
        }
        Ok(VectorFunction { values, dim })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[Vec<Scalar>] {
        &self.values
    }

    pub fn at(&self, i: usize) -> &[Scalar] {
        &self.values[i]
    }

    /// Pointwise Euclidean norms.
    pub fn norms(&self) -> Vec<Scalar> {
        self.values.iter().map(|v| norm(v)).collect()
    }

    /// `ω ↦ ‖c·f(ω) − v‖`
    fn shifted_norms(&self, c: &Scalar, v: &[Scalar]) -> Vec<Scalar> {
        self.values.iter().map(|x| norm(&vec_sub(&vec_scale(c, x), v))).collect()
    }
}

/// Concave `S: [0, ∞) → [0, ∞)` from a closed set of built-ins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConcaveMap {
    Identity,
    Sqrt,
    /// `u^alpha` with `alpha ∈ (0, 1]`.
    Power { alpha: f64 },
    /// `min(u, cap)` with `cap > 0`.
    CappedLinear { cap: Scalar },
}

impl ConcaveMap {
    pub fn validate(&self) -> Result<()> {
        match self {
            ConcaveMap::Power { alpha } if !(*alpha > 0.0 && *alpha <= 1.0) => {
                Err(Error::Parameter(format!("power exponent must lie in (0, 1], got {alpha}")))
            }
            ConcaveMap::CappedLinear { cap } if cap.sign() != Some(Ordering::Greater) => {
                Err(Error::Parameter(format!("cap must be positive, got {cap}")))
            }
            _ => Ok(()),
        }
    }

    pub fn apply(&self, u: &Scalar) -> Result<Scalar> {
        if u.sign() == Some(Ordering::Less) {
            return Err(Error::Domain(format!("concave map applied to negative value {u}")));
        }
        match self {
            ConcaveMap::Identity => Ok(u.clone()),
            ConcaveMap::Sqrt => u.sqrt(),
            ConcaveMap::Power { alpha } if *alpha == 1.0 => Ok(u.clone()),
            ConcaveMap::Power { alpha } => Ok(Scalar::F64(u.to_f64().powf(*alpha))),
            ConcaveMap::CappedLinear { cap } => Ok(u.min(cap)),
        }
    }

    /// Every built-in, with representative parameters.
    pub fn builtins() -> [ConcaveMap; 4] {
        [
            ConcaveMap::Identity,
            ConcaveMap::Sqrt,
            ConcaveMap::Power { alpha: 0.75 },
            ConcaveMap::CappedLinear { cap: Scalar::int(3) },
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ConcaveMap::Identity => "identity",
            ConcaveMap::Sqrt => "sqrt",
            ConcaveMap::Power { .. } => "power",
            ConcaveMap::CappedLinear { .. } => "capped_linear",
        }
    }
}

/// `Σ μᵢ f(i)`
pub fn aggregate(measure: &DiscreteMeasure, vf: &VectorFunction) -> Result<Vec<Scalar>> {
    check_len(measure.len(), vf.len())?;
    let mut acc = vec![Scalar::zero(); vf.dim()];
    for (w, v) in measure.weights().iter().zip(vf.values()) {
        for (a, x) in acc.iter_mut().zip(v) {
            *a = &*a + w * x;
        }
    }
    Ok(acc)
}

/// Whether `−v = α·direction` for some `α ≥ 0`, via the Cauchy–Schwarz
/// equality test `‖v‖·‖d‖ = ⟨−v, d⟩` (exact on rationals).
pub fn on_negative_ray(v: &[Scalar], direction: &[Scalar], policy: &TolerancePolicy) -> Result<bool> {
    let u: Vec<Scalar> = v.iter().map(|x| -x).collect();
    let d_sq = norm_sq(direction);
    let u_sq = norm_sq(&u);
    if cmp_eq(&d_sq, &Scalar::zero(), policy)? == Verdict::Holds {
        return Ok(cmp_eq(&u_sq, &Scalar::zero(), policy)? == Verdict::Holds);
    }
    let ip = dot(&u, direction);
    if ip.sign() == Some(Ordering::Less) && cmp_ge(&ip, &Scalar::zero(), policy)? == Verdict::Fails {
        return Ok(false);
    }
    if ip.is_exact() && u_sq.is_exact() && d_sq.is_exact() {
        return Ok(ip.sign() != Some(Ordering::Less) && ip.square() == &u_sq * &d_sq);
    }
    let gap = (&u_sq * &d_sq).sqrt()? - &ip.max(&Scalar::zero());
    Ok(cmp_ge(&Scalar::zero(), &gap, policy)?.not_failed())
}

/// A premise that failed at atom `index`: `bound ≥ required` did not hold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PremiseViolation {
    pub index: usize,
    pub bound: Scalar,
    pub required: Scalar,
}

impl From<PremiseViolation> for Error {
    fn from(v: PremiseViolation) -> Error {
        Error::Premise {
            index: v.index,
            detail: format!("bound {} < required {}", v.bound, v.required),
        }
    }
}

fn into_result(v: Option<PremiseViolation>) -> Result<()> {
    v.map_or(Ok(()), |v| Err(v.into()))
}

/// Checks `bound ≥ required(ω)` at every positive atom off the negative ray
/// of `direction`.
fn pointwise_premise(
    measure: &DiscreteMeasure,
    values: &VectorFunction,
    direction: &[Scalar],
    bound: &Scalar,
    required: impl Fn(usize) -> Scalar,
    policy: &TolerancePolicy,
) -> Result<Option<PremiseViolation>> {
    for i in measure.positive_atoms() {
        if on_negative_ray(values.at(i), direction, policy)? {
            continue;
        }
        let req = required(i);
        if cmp_ge(bound, &req, policy)? == Verdict::Fails {
            return Ok(Some(PremiseViolation { index: i, bound: bound.clone(), required: req }));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupmainInstance {
    measure: DiscreteMeasure,
    g_hat: VectorFunction,
    cal_t_g: Vec<Scalar>,
    s: ConcaveMap,
    a: Scalar,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupmainMargins {
    pub two_form_margin: Scalar,
    pub one_form_margin: Scalar,
    pub c: Scalar,
}

impl GroupmainMargins {
    /// Status of "two-form margin ≥ 0 ⇒ one-form margin ≥ 0".
    pub fn outcome(&self, policy: &TolerancePolicy) -> Result<Outcome> {
        let zero = Scalar::zero();
        let premise = cmp_ge(&self.two_form_margin, &zero, policy)?;
        let conclusion = cmp_ge(&self.one_form_margin, &zero, policy)?;
        Ok(match (premise, conclusion) {
            (Verdict::Fails, _) => Outcome::Vacuous,
            (_, Verdict::Holds) => Outcome::Confirmed,
            (_, Verdict::Marginal) => Outcome::Marginal,
            (Verdict::Holds, Verdict::Fails) => Outcome::Falsified,
            (Verdict::Marginal, Verdict::Fails) => Outcome::Inconclusive,
        })
    }
}

impl GroupmainInstance {
    pub fn new(
        measure: DiscreteMeasure,
        g_hat: VectorFunction,
        cal_t_g: Vec<Scalar>,
        s: ConcaveMap,
        a: Scalar,
    ) -> Result<Self> {
        check_len(measure.len(), g_hat.len())?;
        check_len(g_hat.dim(), cal_t_g.len())?;
        s.validate()?;
        if a.is_zero() {
            return Err(Error::InvalidInstance("A must be nonzero".into()));
        }
        let s_t = s.apply(&norm(&cal_t_g))?;
        if a.sign() != Some(Ordering::Greater) && s_t.sign() != Some(Ordering::Greater) {
            return Err(Error::InvalidInstance("need A > 0 or S(|Tg|) > 0".into()));
        }
        Ok(GroupmainInstance { measure, g_hat, cal_t_g, s, a })
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }

    pub fn g_hat(&self) -> &VectorFunction {
        &self.g_hat
    }

    pub fn cal_t_g(&self) -> &[Scalar] {
        &self.cal_t_g
    }

    pub fn concave(&self) -> &ConcaveMap {
        &self.s
    }

    pub fn a(&self) -> &Scalar {
        &self.a
    }

    /// `(S|ĝ(ω)|, S|ĝ(ω) − 𝒯g|)` for every atom, and `S|𝒯g|`.
    fn images(&self) -> Result<(Vec<Scalar>, Vec<Scalar>, Scalar)> {
        let s_g = self
            .g_hat
            .values()
            .iter()
            .map(|v| self.s.apply(&norm(v)))
            .collect::<Result<Vec<_>>>()?;
        let s_d = self
            .g_hat
            .values()
            .iter()
            .map(|v| self.s.apply(&norm(&vec_sub(v, &self.cal_t_g))))
            .collect::<Result<Vec<_>>>()?;
        let s_t = self.s.apply(&norm(&self.cal_t_g))?;
        Ok((s_g, s_d, s_t))
    }

    /// At each positive atom where `S|ĝ(ω)| + S|𝒯g| ≠ S|ĝ(ω) − 𝒯g|`,
    /// requires `A ≥ S|ĝ(ω)| + S|𝒯g − ĝ(ω)|`.
    pub fn premises(&self, policy: &TolerancePolicy) -> Result<Option<PremiseViolation>> {
        for (index, required) in self.premise_requirements(policy)? {
            if cmp_ge(&self.a, &required, policy)? == Verdict::Fails {
                return Ok(Some(PremiseViolation { index, bound: self.a.clone(), required }));
            }
        }
        Ok(None)
    }

    /// `(ω, S|ĝ(ω)| + S|𝒯g − ĝ(ω)|)` for each positive atom where the
    /// premise applies.
    pub fn premise_requirements(&self, policy: &TolerancePolicy) -> Result<Vec<(usize, Scalar)>> {
        let (s_g, s_d, s_t) = self.images()?;
        let mut out = Vec::new();
        for i in self.measure.positive_atoms() {
            if cmp_eq(&(&s_g[i] + &s_t), &s_d[i], policy)? == Verdict::Fails {
                out.push((i, &s_g[i] + &s_d[i]));
            }
        }
        Ok(out)
    }

    pub fn margins(&self, policy: &TolerancePolicy) -> Result<GroupmainMargins> {
        into_result(self.premises(policy)?)?;
        let (s_g, s_d, s_t) = self.images()?;
        let t = |v: &[Scalar]| self.measure.integrate(v);
        let sq = |v: &[Scalar]| v.iter().map(Scalar::square).collect::<Vec<_>>();
        let t_sg = t(&s_g)?;
        let c = (Scalar::int(2) * &t_sg).try_div(&self.a)?;
        let slack = self.measure.total() - &c;
        let one_form_margin = &slack * &s_t + &t_sg - t(&s_d)?;
        let two_form_margin = &slack * s_t.square() + t(&sq(&s_g))? - t(&sq(&s_d))?;
        Ok(GroupmainMargins { two_form_margin, one_form_margin, c })
    }

    /// The same quantities phrased as a relation instance: `f∘η = S|ĝ|`,
    /// `f∘ξ = S|𝒯g − ĝ|`, `a = A`, `b = S|𝒯g|`.
    pub fn as_relation_instance(&self) -> Result<HlawkaInstance> {
        let (s_g, s_d, s_t) = self.images()?;
        HlawkaInstance::new(self.measure.functional().clone(), s_g, s_d, self.a.clone(), s_t)
    }
}

pub fn groupmain_premises(instance: &GroupmainInstance, policy: &TolerancePolicy) -> Result<Option<PremiseViolation>> {
    instance.premises(policy)
}

pub fn groupmain_margins(instance: &GroupmainInstance, policy: &TolerancePolicy) -> Result<GroupmainMargins> {
    instance.margins(policy)
}

/// `T(|f − 𝒯f|²) − [T(|f|²) + |𝒯f|²·(T(1) − 2)]`, with `𝒯f` the aggregate
/// of `f`; zero exactly on rational inputs.
pub fn inner_identity_residual(measure: &DiscreteMeasure, f: &VectorFunction) -> Result<Scalar> {
    let tf = aggregate(measure, f)?;
    let diff_sq: Vec<Scalar> = f.values().iter().map(|v| norm_sq(&vec_sub(v, &tf))).collect();
    let f_sq: Vec<Scalar> = f.values().iter().map(|v| norm_sq(v)).collect();
    let lhs = measure.integrate(&diff_sq)?;
    let rhs = measure.integrate(&f_sq)? + norm_sq(&tf) * (measure.total() - Scalar::int(2));
    Ok(lhs - rhs)
}

fn require_nonzero(v: &[Scalar], what: &str, policy: &TolerancePolicy) -> Result<()> {
    if cmp_eq(&norm_sq(v), &Scalar::zero(), policy)? == Verdict::Holds {
        Err(Error::InvalidInstance(format!("{what} must be nonzero")))
    } else {
        Ok(())
    }
}

/// `(μ(Ω) − C)‖∫f‖ + ∫‖g‖ − ∫‖g − ∫f‖` with `C = 2∫‖g‖ / ∫‖f‖`.
///
/// Requires nonzero aggregates, `∫f/∫‖f‖ = ∫g/∫‖g‖`, and
/// `∫‖f‖ ≥ ‖g(ω)‖ + ‖g(ω) − ∫f‖` wherever `−g(ω)` is off the ray of `∫f`.
pub fn integral_hlawka_margin(
    measure: &DiscreteMeasure,
    f: &VectorFunction,
    g: &VectorFunction,
    policy: &TolerancePolicy,
) -> Result<Scalar> {
    check_len(f.dim(), g.dim())?;
    let int_f = aggregate(measure, f)?;
    let int_g = aggregate(measure, g)?;
    require_nonzero(&int_f, "integral of f", policy)?;
    require_nonzero(&int_g, "integral of g", policy)?;
    let mass_f = measure.integrate(&f.norms())?;
    let g_norms = g.norms();
    let mass_g = measure.integrate(&g_norms)?;
    for (j, (a, b)) in int_f.iter().zip(&int_g).enumerate() {
        // ∫f·∫‖g‖ = ∫g·∫‖f‖ componentwise
        if cmp_eq(&(a * &mass_g), &(b * &mass_f), policy)? == Verdict::Fails {
            return Err(Error::InvalidInstance(format!(
                "normalized integrals of f and g differ in component {j}"
            )));
        }
    }
    let shifted = g.shifted_norms(&Scalar::one(), &int_f);
    into_result(pointwise_premise(
        measure,
        g,
        &int_f,
        &mass_f,
        |i| &g_norms[i] + &shifted[i],
        policy,
    )?)?;
    let c = (Scalar::int(2) * &mass_g).try_div(&mass_f)?;
    Ok((measure.total() - c) * norm(&int_f) + mass_g - measure.integrate(&shifted)?)
}

/// `(μ(Ω) − 2t)‖∫f‖ + t∫‖f‖ − ∫‖t·f − ∫f‖`, under
/// `∫‖f‖ ≥ t‖f(ω)‖ + ‖t·f(ω) − ∫f‖` off the negative ray of `∫f`.
pub fn t_variant_margin(
    measure: &DiscreteMeasure,
    f: &VectorFunction,
    t: &Scalar,
    policy: &TolerancePolicy,
) -> Result<Scalar> {
    if t.sign() != Some(Ordering::Greater) && !t.is_zero() {
        return Err(Error::Parameter(format!("t must be >= 0, got {t}")));
    }
    let int_f = aggregate(measure, f)?;
    let f_norms = f.norms();
    let mass_f = measure.integrate(&f_norms)?;
    let shifted = f.shifted_norms(t, &int_f);
    into_result(pointwise_premise(
        measure,
        f,
        &int_f,
        &mass_f,
        |i| t * &f_norms[i] + &shifted[i],
        policy,
    )?)?;
    let two_t = Scalar::int(2) * t;
    Ok((measure.total() - two_t) * norm(&int_f) + t * mass_f - measure.integrate(&shifted)?)
}

/// `(μ(Ω) − 2)‖∫f‖ + ∫‖f̄‖ − ∫‖f̄ − ∫f‖` with `f̄ = f ∘ permutation`.
/// Nontrivial permutations need uniform weights.
pub fn rearrangement_margin(
    measure: &DiscreteMeasure,
    f: &VectorFunction,
    permutation: &[usize],
    policy: &TolerancePolicy,
) -> Result<Scalar> {
    check_len(f.len(), permutation.len())?;
    let mut seen = vec![false; permutation.len()];
    for &p in permutation {
        if p >= seen.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Parameter(format!("{permutation:?} is not a permutation")));
        }
    }
    let identity = permutation.iter().enumerate().all(|(i, &p)| i == p);
    if !identity && !measure.is_uniform() {
        return Err(Error::Parameter(
            "a nontrivial rearrangement needs an exchangeable (uniform) measure".into(),
        ));
    }
    let int_f = aggregate(measure, f)?;
    let mass_f = measure.integrate(&f.norms())?;
    let f_bar = VectorFunction::new(permutation.iter().map(|&p| f.at(p).to_vec()).collect())?;
    let bar_norms = f_bar.norms();
    let shifted = f_bar.shifted_norms(&Scalar::one(), &int_f);
    into_result(pointwise_premise(
        measure,
        &f_bar,
        &int_f,
        &mass_f,
        |i| &bar_norms[i] + &shifted[i],
        policy,
    )?)?;
    Ok((measure.total() - Scalar::int(2)) * norm(&int_f) + measure.integrate(&bar_norms)?
        - measure.integrate(&shifted)?)
}

/// Which premise [`weighted_variant_margin`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightedPremise {
    /// `Σμⱼ‖xⱼ‖ ≥ λ‖xᵢ‖ + ‖λxᵢ − Σμⱼxⱼ‖`, the t-variant premise on the
    /// atoms `{1..n}` with weights `μᵢ`.
    #[default]
    Unweighted,
    /// `Σμⱼ‖xⱼ‖ ≥ λμᵢ‖xᵢ‖ + ‖λxᵢ − Σμⱼxⱼ‖`. Too weak: admits instances with
    /// a negative margin (see tests).
    AtomWeighted,
}

/// `(Σμᵢ − 2λ)‖Σμᵢxᵢ‖ + λΣμᵢ‖xᵢ‖ − Σμᵢ‖λxᵢ − Σμⱼxⱼ‖`; the premise is
/// enforced at every index.
pub fn weighted_variant_margin(
    mu: &[Scalar],
    xs: &[Vec<Scalar>],
    lambda: &Scalar,
    premise: WeightedPremise,
    policy: &TolerancePolicy,
) -> Result<Scalar> {
    if lambda.sign() == Some(Ordering::Less) {
        return Err(Error::Parameter(format!("lambda must be >= 0, got {lambda}")));
    }
    let measure = DiscreteMeasure::new(mu.to_vec())?;
    let f = VectorFunction::new(xs.to_vec())?;
    let s = aggregate(&measure, &f)?;
    let x_norms = f.norms();
    let mass = measure.integrate(&x_norms)?;
    let shifted = f.shifted_norms(lambda, &s);
    for i in 0..f.len() {
        let scale = match premise {
            WeightedPremise::Unweighted => lambda.clone(),
            WeightedPremise::AtomWeighted => lambda * &mu[i],
        };
        let required = scale * &x_norms[i] + &shifted[i];
        if cmp_ge(&mass, &required, policy)? == Verdict::Fails {
            return Err(PremiseViolation { index: i, bound: mass, required }.into());
        }
    }
    let two_l = Scalar::int(2) * lambda;
    Ok((measure.total() - two_l) * norm(&s) + lambda * mass - measure.integrate(&shifted)?)
}

/// `(1−λ)(‖x‖+‖y‖+‖z‖) + (1+2λ)‖x+y+z‖ − ‖λx+y+z‖ − ‖x+λy+z‖ − ‖x+y+λz‖`
/// for `λ ∈ [0, 1]`.
pub fn lambda_margin(x: &[Scalar], y: &[Scalar], z: &[Scalar], lambda: &Scalar) -> Result<Scalar> {
    let one = Scalar::one();
    if lambda.sign() == Some(Ordering::Less) || lambda.compare(&one) == Some(Ordering::Greater) {
        return Err(Error::Parameter(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    check_len(x.len(), y.len())?;
    check_len(x.len(), z.len())?;
    let s: Vec<Scalar> = x.iter().zip(y).zip(z).map(|((a, b), c)| a + b + c).collect();
    // λv + (s − v)
    let lifted = |v: &[Scalar]| -> Scalar {
        let w: Vec<Scalar> = v.iter().zip(&s).map(|(a, t)| t - a + lambda * a).collect();
        norm(&w)
    };
    let lhs = (&one - lambda) * (norm(x) + norm(y) + norm(z)) + (&one + Scalar::int(2) * lambda) * norm(&s);
    Ok(lhs - lifted(x) - lifted(y) - lifted(z))
}
