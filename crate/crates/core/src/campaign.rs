//! Seeded verification campaigns.
//!
//! A suite is a list of properties; each property runs a number of
//! independent trials whose RNG is derived from `(seed, "suite/property",
//! trial)`. Trials run in parallel and are collected in index order, so a
//! report depends on the configuration alone.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::generators as gen;
use crate::integral::{
    inner_identity_residual, integral_hlawka_margin, lambda_margin, rearrangement_margin, t_variant_margin,
    weighted_variant_margin, ConcaveMap, DiscreteMeasure, VectorFunction, WeightedPremise,
};
use crate::numerics::{cmp_eq, cmp_ge, rational, Scalar, TolerancePolicy, Verdict};
use crate::quadratic::counterexample::build_mixed_counterexample;
use crate::quadratic::{
    azteca_margin, four_point_residual, future_cone_point, hlawka_margin, instance_from_triple,
    reverse_triangle_margin, Direction, QuadraticForm, TripleInstance,
};
use crate::relation::Outcome;
use crate::sampling::{nonneg_rational_in, rational_vec, trial_rng};
use crate::semigroup::{
    diamond_hlawka_margin, hlawka_power_margin, measure_identity_residuals, propagate_check, ressel_check, Branch,
    DiamondOrder, LpExponent, LpSpace, MeasurableSet, MeasureSpace, NonnegReals, PropagationReport, SetOp,
};

pub const REPORT_SCHEMA: &str = "hlawka-report/1";
pub const DEFAULT_TRIALS: usize = 1000;
pub const EXPECTED_LABEL: &str = "expected (known counterexample)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Identities,
    Relation,
    Quadratic,
    Semigroup,
    Integral,
    Counterexample,
    All,
}

impl Suite {
    pub const CONCRETE: [Suite; 6] = [
        Suite::Identities,
        Suite::Relation,
        Suite::Quadratic,
        Suite::Semigroup,
        Suite::Integral,
        Suite::Counterexample,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Relation => "relation",
            Suite::Quadratic => "quadratic",
            Suite::Semigroup => "semigroup",
            Suite::Integral => "integral",
            Suite::Counterexample => "counterexample",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::CONCRETE.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::CONCRETE
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown suite {s:?}")))
    }
}

impl Serialize for Suite {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn serialize_ratio<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignParams {
    /// Largest dimension for the exact quadratic-form suites.
    pub max_dim: usize,
    pub counterexample_n: usize,
    pub counterexample_k: usize,
    #[serde(serialize_with = "serialize_ratio")]
    pub counterexample_eps: BigRational,
}

impl Default for CampaignParams {
    fn default() -> Self {
        CampaignParams { max_dim: 8, counterexample_n: 4, counterexample_k: 2, counterexample_eps: rational(1, 100) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: TolerancePolicy,
    pub params: CampaignParams,
}

impl CampaignConfig {
    pub fn new(suite: Suite, trials: usize, seed: u64, tolerance: TolerancePolicy) -> Result<Self> {
        if trials == 0 {
            return Err(Error::Parameter("trials must be positive".into()));
        }
        Ok(CampaignConfig { suite, trials, seed, tolerance, params: CampaignParams::default() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be positive".into()));
        }
        if !(1..=16).contains(&self.params.max_dim) {
            return Err(Error::Parameter(format!("max_dim must lie in 1..=16, got {}", self.params.max_dim)));
        }
        let p = &self.params;
        build_mixed_counterexample(p.counterexample_n, p.counterexample_k, &p.counterexample_eps).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Falsification {
    pub property: String,
    pub trial: u64,
    pub expected: bool,
    pub label: String,
    pub instance: Value,
    pub margins: Value,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PropertyTally {
    pub property: String,
    pub checked: u64,
    /// Includes vacuous trials (premise not met).
    pub holds: u64,
    pub vacuous: u64,
    pub marginal: u64,
    pub falsified: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub tally: PropertyTally,
    pub falsifications: Vec<Falsification>,
    /// Trials of an expected-failure property that did not fail.
    pub missing_expected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checked: u64,
    pub holds: u64,
    pub marginal: u64,
    pub falsifications: Vec<Falsification>,
    pub properties: Vec<PropertyTally>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub tolerance: Tolerances,
    pub params: CampaignParams,
    pub suites: Vec<SuiteReport>,
    pub unexpected_falsifications: usize,
    pub missing_expected: Vec<String>,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.unexpected_falsifications == 0 && self.missing_expected.is_empty()
    }

    /// 0 when clean, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.is_clean() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Result of one trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Holds,
    /// A premise was not met; counted as holding.
    Vacuous,
    Marginal,
    Falsified { instance: Value, margins: Value },
}

pub struct Ctx<'a> {
    pub seed: u64,
    pub policy: &'a TolerancePolicy,
    pub params: &'a CampaignParams,
}

type TrialFn = fn(&mut ChaCha8Rng, u64, &Ctx) -> Result<TrialOutcome>;

#[derive(Clone, Copy)]
enum Count {
    Trials,
    Fixed(u64),
}

#[derive(Clone, Copy)]
struct Property {
    name: &'static str,
    count: Count,
    expect_failure: bool,
    run: TrialFn,
}

const fn prop(name: &'static str, run: TrialFn) -> Property {
    Property { name, count: Count::Trials, expect_failure: false, run }
}

fn properties(suite: Suite) -> Vec<Property> {
    match suite {
        Suite::Identities => vec![
            prop("four_point_identity", identities::four_point),
            prop("relation_identity", identities::relation),
            prop("inner_product_identity", identities::inner),
            prop("measure_identities", identities::measure),
        ],
        Suite::Relation => vec![prop("one_two_form_relation", relation::soundness)],
        Suite::Quadratic => vec![
            prop("forward_gaussian", quadratic::forward),
            prop("reverse_future_cone", quadratic::reverse),
            prop("azteca_future_cone", quadratic::azteca),
            prop("reverse_triangle_future_cone", quadratic::reverse_triangle),
            prop("signature_congruence", quadratic::signature),
            prop("future_cone_relation", quadratic::cone_relation),
        ],
        Suite::Semigroup => vec![
            Property { count: Count::Fixed(32 * 32 * 32), ..prop("measure_union_exhaustive", semigroup::union) },
            Property { count: Count::Fixed(32 * 32 * 32), ..prop("measure_symm_diff_exhaustive", semigroup::symm_diff) },
            prop("lp_propagation", semigroup::lp),
            prop("squares_propagation", semigroup::squares),
            prop("diamond_margin", semigroup::diamond),
            prop("ressel_integers_sqrt", semigroup::ressel_integers),
            prop("ressel_vectors", semigroup::ressel_vectors),
        ],
        Suite::Integral => vec![
            prop("groupmain_implication", integral::groupmain),
            prop("groupmain_matches_relation", integral::groupmain_relation),
            prop("designed_violator_rejected", integral::designed_violator),
            prop("t_variant_matches_integral", integral::t_matches_integral),
            prop("triple_matches_quadratic", integral::triple_matches_quadratic),
            prop("integral_margin", integral::integral_margin),
            prop("t_variant_margin", integral::t_variant),
            prop("rearrangement_margin", integral::rearrangement),
            prop("weighted_variant_margin", integral::weighted),
            prop("lambda_margin", integral::lambda),
        ],
        Suite::Counterexample => vec![
            Property { count: Count::Fixed(1), expect_failure: true, ..prop("mixed_forward", counter::forward) },
            Property { count: Count::Fixed(1), expect_failure: true, ..prop("mixed_reverse", counter::reverse) },
            Property { count: Count::Fixed(1), ..prop("mixed_generators_positive", counter::generators) },
            prop("mixed_positive_span", counter::positive_span),
        ],
        Suite::All => Suite::CONCRETE.into_iter().flat_map(properties).collect(),
    }
}

/// Property names of a suite, in execution order.
pub fn property_names(suite: Suite) -> Vec<&'static str> {
    properties(suite).iter().map(|p| p.name).collect()
}

fn execute(suite: Suite, p: &Property, trials: usize, seed: u64, policy: &TolerancePolicy, params: &CampaignParams) -> PropertyReport {
    let count = match p.count {
        Count::Trials => trials as u64,
        Count::Fixed(n) => n,
    };
    let stream = format!("{}/{}", suite.name(), p.name);
    let ctx = Ctx { seed, policy, params };
    let outcomes: Vec<TrialOutcome> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, &stream, i);
            (p.run)(&mut rng, i, &ctx).unwrap_or_else(|e| TrialOutcome::Falsified {
                instance: Value::Null,
                margins: json!({ "error": e.to_string() }),
            })
        })
        .collect();

    let mut report = PropertyReport {
        tally: PropertyTally { property: p.name.to_string(), ..Default::default() },
        falsifications: Vec::new(),
        missing_expected: Vec::new(),
    };
    for (i, outcome) in outcomes.into_iter().enumerate() {
        let t = &mut report.tally;
        t.checked += 1;
        match outcome {
            TrialOutcome::Holds | TrialOutcome::Vacuous if p.expect_failure => {
                t.holds += 1;
                report.missing_expected.push(format!("{stream}#{i}"));
            }
            TrialOutcome::Holds => t.holds += 1,
            TrialOutcome::Vacuous => {
                t.holds += 1;
                t.vacuous += 1;
            }
            TrialOutcome::Marginal => t.marginal += 1,
            TrialOutcome::Falsified { instance, margins } => {
                t.falsified += 1;
                report.falsifications.push(Falsification {
                    property: p.name.to_string(),
                    trial: i as u64,
                    expected: p.expect_failure,
                    label: if p.expect_failure { EXPECTED_LABEL.to_string() } else { "unexpected".to_string() },
                    instance,
                    margins,
                });
            }
        }
    }
    report
}

/// Runs one named property with `trials` trials (fixed-size properties
/// ignore `trials`).
pub fn run_property(
    suite: Suite,
    name: &str,
    trials: usize,
    seed: u64,
    policy: &TolerancePolicy,
    params: &CampaignParams,
) -> Result<PropertyReport> {
    let p = properties(suite)
        .into_iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::Parameter(format!("suite {suite} has no property {name:?}")))?;
    Ok(execute(suite, &p, trials, seed, policy, params))
}

pub fn run_campaign(config: &CampaignConfig) -> Result<Report> {
    config.validate()?;
    let mut suites = Vec::new();
    let mut missing_expected = Vec::new();
    for suite in config.suite.expand() {
        let mut sr = SuiteReport { suite, checked: 0, holds: 0, marginal: 0, falsifications: Vec::new(), properties: Vec::new() };
        for p in properties(suite) {
            let pr = execute(suite, &p, config.trials, config.seed, &config.tolerance, &config.params);
            sr.checked += pr.tally.checked;
            sr.holds += pr.tally.holds;
            sr.marginal += pr.tally.marginal;
            sr.falsifications.extend(pr.falsifications);
            sr.properties.push(pr.tally);
            missing_expected.extend(pr.missing_expected);
        }
        suites.push(sr);
    }
    let unexpected_falsifications = suites.iter().flat_map(|s| &s.falsifications).filter(|f| !f.expected).count();
    Ok(Report {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        trials: config.trials,
        tolerance: Tolerances { abs_tol: config.tolerance.abs_tol(), rel_tol: config.tolerance.rel_tol() },
        params: config.params.clone(),
        suites,
        unexpected_falsifications,
        missing_expected,
    })
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// `margin ≥ 0` under the policy.
fn judge(margin: &Scalar, policy: &TolerancePolicy, instance: impl FnOnce() -> Value) -> Result<TrialOutcome> {
    Ok(match cmp_ge(margin, &Scalar::zero(), policy)? {
        Verdict::Holds => TrialOutcome::Holds,
        Verdict::Marginal => TrialOutcome::Marginal,
        Verdict::Fails => TrialOutcome::Falsified { instance: instance(), margins: json!({ "margin": margin }) },
    })
}

/// Exact zero.
fn judge_zero(residual: &Scalar, instance: impl FnOnce() -> Value) -> TrialOutcome {
    if residual.is_exact() && residual.is_zero() {
        TrialOutcome::Holds
    } else {
        TrialOutcome::Falsified { instance: instance(), margins: json!({ "residual": residual }) }
    }
}

/// `|x − y|` within the policy band.
fn judge_close(x: &Scalar, y: &Scalar, policy: &TolerancePolicy, instance: impl FnOnce() -> Value) -> Result<TrialOutcome> {
    Ok(match cmp_eq(x, y, policy)? {
        Verdict::Fails => TrialOutcome::Falsified { instance: instance(), margins: json!({ "left": x, "right": y }) },
        _ => TrialOutcome::Holds,
    })
}

fn from_outcome(o: Outcome, instance: impl FnOnce() -> Value, margins: impl FnOnce() -> Value) -> TrialOutcome {
    match o {
        Outcome::Vacuous => TrialOutcome::Vacuous,
        Outcome::Confirmed => TrialOutcome::Holds,
        Outcome::Marginal | Outcome::Inconclusive => TrialOutcome::Marginal,
        Outcome::Falsified => TrialOutcome::Falsified { instance: instance(), margins: margins() },
    }
}

fn from_propagation(r: PropagationReport, instance: impl FnOnce() -> Value) -> TrialOutcome {
    if !r.violations.is_empty() {
        TrialOutcome::Falsified { instance: instance(), margins: to_json(&r.violations) }
    } else if r.inconclusive > 0 {
        TrialOutcome::Marginal
    } else if r.premise_held == 0 {
        TrialOutcome::Vacuous
    } else {
        TrialOutcome::Holds
    }
}

/// Premise errors make a trial vacuous; other errors propagate.
fn premise_vacuous(r: Result<Scalar>) -> Result<Option<Scalar>> {
    match r {
        Ok(m) => Ok(Some(m)),
        Err(Error::Premise { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

mod identities {
    use super::*;
    use crate::integral::DiscreteMeasure;

    pub fn four_point(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = rng.random_range(1..=ctx.params.max_dim);
        let form = gen::random_symmetric_form(rng, n)?;
        let [x, y, z] = [0; 3].map(|_| rational_vec(rng, n, 5, 6));
        let r = four_point_residual(&form, &x, &y, &z)?;
        Ok(judge_zero(&r, || json!({ "Q": form.matrix_scalars(), "x": x, "y": y, "z": z })))
    }

    pub fn relation(rng: &mut ChaCha8Rng, _: u64, _: &Ctx) -> Result<TrialOutcome> {
        let inst = gen::random_relation_instance(rng)?;
        Ok(judge_zero(&inst.identity_residual(), || to_json(&inst)))
    }

    pub fn inner(rng: &mut ChaCha8Rng, _: u64, _: &Ctx) -> Result<TrialOutcome> {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=4);
        let m = DiscreteMeasure::new(gen::random_weights(rng, n))?;
        let f = gen::random_vector_function(rng, n, d)?;
        let r = inner_identity_residual(&m, &f)?;
        Ok(judge_zero(&r, || json!({ "weights": m.weights(), "f": f.values() })))
    }

    pub fn measure(rng: &mut ChaCha8Rng, _: u64, _: &Ctx) -> Result<TrialOutcome> {
        let w: Vec<Scalar> = (0..5).map(|_| nonneg_rational_in(rng, 9, 7)).collect();
        let [a, b, c] = [0; 3].map(|_| MeasurableSet(rng.random_range(0..32)));
        let r = measure_identity_residuals(&w, a, b, c)?;
        let ok = [&r.union, &r.symm_diff].iter().all(|x| x.is_exact() && x.is_zero());
        Ok(if ok {
            TrialOutcome::Holds
        } else {
            TrialOutcome::Falsified { instance: json!({ "weights": w, "sets": [a, b, c] }), margins: to_json(&r) }
        })
    }
}

mod relation {
    use super::*;

    pub fn soundness(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let c = gen::control_satisfying_instance(rng)?;
        let report = c.instance.adjudicate(c.restrict, ctx.policy)?;
        let instance = || json!({ "instance": c.instance, "restrict": c.restrict });
        if !report.controls_met() {
            return Ok(TrialOutcome::Falsified { instance: instance(), margins: json!({ "error": "generator broke the controls" }) });
        }
        let worst = report.implications.iter().map(|i| i.outcome).max_by_key(|o| match o {
            Outcome::Vacuous => 0,
            Outcome::Confirmed => 1,
            Outcome::Marginal | Outcome::Inconclusive => 2,
            Outcome::Falsified => 3,
        });
        Ok(from_outcome(worst.unwrap_or(Outcome::Vacuous), instance, || to_json(&report)))
    }
}

mod quadratic {
    use super::*;

    const FORWARD_DIMS: [usize; 4] = [1, 2, 3, 8];
    const CONE_DIMS: [usize; 4] = [2, 3, 4, 8];

    fn cone_points(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<Scalar>> {
        (0..count).map(|_| future_cone_point(rng, n)).collect()
    }

    pub fn forward(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = FORWARD_DIMS[i as usize % 4];
        let form = QuadraticForm::euclidean(n)?;
        let [x, y, z] = [0; 3].map(|_| gen::gaussian_vec(rng, n));
        let m = hlawka_margin(&form, &x, &y, &z, Direction::Forward)?;
        judge(&m, ctx.policy, || json!({ "n": n, "x": x, "y": y, "z": z }))
    }

    pub fn reverse(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = CONE_DIMS[i as usize % 4];
        let form = QuadraticForm::minkowski(n)?;
        let p = cone_points(rng, n, 3);
        let m = hlawka_margin(&form, &p[0], &p[1], &p[2], Direction::Reverse)?;
        judge(&m, ctx.policy, || json!({ "n": n, "triple": p }))
    }

    pub fn azteca(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = CONE_DIMS[i as usize % 4];
        let form = QuadraticForm::minkowski(n)?;
        let p = cone_points(rng, n, 2);
        let m = azteca_margin(&form, &p[0], &p[1])?;
        judge(&m, ctx.policy, || json!({ "n": n, "pair": p }))
    }

    pub fn reverse_triangle(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = CONE_DIMS[i as usize % 4];
        let form = QuadraticForm::minkowski(n)?;
        let p = cone_points(rng, n, 2);
        let m = reverse_triangle_margin(&form, &p[0], &p[1])?;
        judge(&m, ctx.policy, || json!({ "n": n, "pair": p }))
    }

    pub fn signature(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = rng.random_range(1..=ctx.params.max_dim);
        let (form, planted) = gen::congruent_form(rng, n)?;
        Ok(if form.signature() == planted {
            TrialOutcome::Holds
        } else {
            TrialOutcome::Falsified {
                instance: json!({ "Q": form.matrix_scalars() }),
                margins: json!({ "planted": planted, "computed": form.signature() }),
            }
        })
    }

    pub fn cone_relation(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = CONE_DIMS[i as usize % 4];
        let form = QuadraticForm::minkowski(n)?;
        let p = cone_points(rng, n, 3);
        match instance_from_triple(&form, &p[0], &p[1], &p[2])? {
            TripleInstance::Degenerate => Ok(TrialOutcome::Vacuous),
            TripleInstance::Instance(inst) => {
                let report = inst.adjudicate(false, ctx.policy)?;
                Ok(if report.falsified() {
                    TrialOutcome::Falsified { instance: json!({ "n": n, "triple": p }), margins: to_json(&report) }
                } else {
                    TrialOutcome::Holds
                })
            }
        }
    }
}

mod semigroup {
    use super::*;

    const K_UP: [i32; 5] = [0, 1, 2, 3, 4];

    fn exhaustive(op: SetOp, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let mut wrng = trial_rng(ctx.seed, "semigroup/measure_weights", 0);
        let w: Vec<Scalar> = (0..5).map(|_| nonneg_rational_in(&mut wrng, 9, 7)).collect();
        let space = MeasureSpace::new(w, op)?;
        let (a, b, c) = (MeasurableSet(i >> 10), MeasurableSet((i >> 5) & 31), MeasurableSet(i & 31));
        let mut worst = TrialOutcome::Holds;
        for k in K_UP {
            let m = hlawka_power_margin(&space, &a, &b, &c, k)?;
            match judge(&m, ctx.policy, || json!({ "op": op, "sets": [a, b, c], "k": k }))? {
                f @ TrialOutcome::Falsified { .. } => return Ok(f),
                TrialOutcome::Marginal => worst = TrialOutcome::Marginal,
                _ => {}
            }
        }
        Ok(worst)
    }

    pub fn union(_: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        exhaustive(SetOp::Union, i, ctx)
    }

    pub fn symm_diff(_: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        exhaustive(SetOp::SymmDiff, i, ctx)
    }

    pub fn lp(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let p = [1.0, 1.5, 2.0][i as usize % 3];
        let d = rng.random_range(1..=4);
        let t = [0; 3].map(|_| (0..d).map(|_| rng.random_range(-5.0..5.0)).collect::<Vec<f64>>());
        let space = LpSpace { exponent: LpExponent::Finite(p) };
        let r = propagate_check(&space, std::slice::from_ref(&t), Branch::StrongSubadditive, 0, &K_UP, ctx.policy)?;
        Ok(from_propagation(r, || json!({ "p": p, "triple": t })))
    }

    pub fn squares(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let t = [0; 3].map(|_| nonneg_rational_in(rng, 20, 7));
        let r = propagate_check(&NonnegReals { power: 2 }, std::slice::from_ref(&t), Branch::Superadditive, 0, &[-3, -2, -1, 0], ctx.policy)?;
        Ok(from_propagation(r, || json!({ "triple": t })))
    }

    pub fn diamond(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let c = i as usize % 10;
        let (k, p) = if c == 9 {
            (DiamondOrder::Infinity, LpExponent::Infinity)
        } else {
            let k = (c / 3) as u32;
            let e = 2f64.powi(k as i32);
            (DiamondOrder::Finite(k), LpExponent::Finite([e, 1.5 * e, 2.0 * e][c % 3]))
        };
        let d = rng.random_range(1..=4);
        let [a, b, cc] = [0; 3].map(|_| gen::nonneg_f64_vec(rng, d, 5.0));
        let m = diamond_hlawka_margin(p, k, &a, &b, &cc)?;
        judge(&m, ctx.policy, || json!({ "k": k, "p": p, "a": a, "b": b, "c": cc }))
    }

    pub fn ressel_integers(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let t = [0; 3].map(|_| vec![Scalar::int(rng.random_range(-5..=5))]);
        let r = ressel_check(&ConcaveMap::Sqrt, std::slice::from_ref(&t), ctx.policy)?;
        Ok(from_propagation(r, || json!({ "triple": t })))
    }

    pub fn ressel_vectors(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let s = ConcaveMap::builtins()[i as usize % 4].clone();
        let d = rng.random_range(1..=3);
        let t = [0; 3].map(|_| rational_vec(rng, d, 4, 4));
        let r = ressel_check(&s, std::slice::from_ref(&t), ctx.policy)?;
        Ok(from_propagation(r, || json!({ "S": s, "triple": t })))
    }
}

mod integral {
    use super::*;

    const UNBOUNDED: usize = 4;

    fn unbounded_map(i: u64) -> ConcaveMap {
        match i as usize % UNBOUNDED {
            0 => ConcaveMap::Identity,
            1 => ConcaveMap::Sqrt,
            2 => ConcaveMap::Power { alpha: 0.75 },
            _ => ConcaveMap::CappedLinear { cap: Scalar::int(1_000_000) },
        }
    }

    pub fn groupmain(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let s = ConcaveMap::builtins()[i as usize % 4].clone();
        let inst = gen::premise_satisfying_groupmain(rng, &s, ctx.policy)?;
        let m = inst.margins(ctx.policy)?;
        Ok(from_outcome(m.outcome(ctx.policy)?, || to_json(&inst), || to_json(&m)))
    }

    pub fn groupmain_relation(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let s = ConcaveMap::builtins()[i as usize % 4].clone();
        let inst = gen::premise_satisfying_groupmain(rng, &s, ctx.policy)?;
        let m = inst.margins(ctx.policy)?;
        let forms = inst.as_relation_instance()?.compute_forms();
        let agree = [(&m.c, &forms.c), (&m.one_form_margin, &forms.c1), (&m.two_form_margin, &forms.c2)]
            .iter()
            .map(|(x, y)| cmp_eq(x, y, ctx.policy))
            .collect::<Result<Vec<_>>>()?;
        Ok(if agree.iter().all(|v| *v == Verdict::Holds) {
            TrialOutcome::Holds
        } else {
            TrialOutcome::Falsified { instance: to_json(&inst), margins: json!({ "groupmain": m, "relation": forms }) }
        })
    }

    pub fn designed_violator(rng: &mut ChaCha8Rng, i: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let s = unbounded_map(i);
        let (inst, w) = gen::designed_groupmain_violator(rng, &s, ctx.policy)?;
        let found = inst.premises(ctx.policy)?;
        Ok(match &found {
            Some(v) if v.index == w => TrialOutcome::Holds,
            _ => TrialOutcome::Falsified { instance: to_json(&inst), margins: json!({ "planted": w, "found": found }) },
        })
    }

    fn measure_and_f(rng: &mut ChaCha8Rng) -> Result<(DiscreteMeasure, VectorFunction)> {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=4);
        Ok((gen::random_measure(rng, n)?, gen::random_vector_function(rng, n, d)?))
    }

    pub fn t_matches_integral(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let (m, f) = measure_and_f(rng)?;
        let instance = || json!({ "weights": m.weights(), "f": f.values() });
        let via_t = premise_vacuous(t_variant_margin(&m, &f, &Scalar::one(), ctx.policy))?;
        let direct = match integral_hlawka_margin(&m, &f, &f, ctx.policy) {
            Err(Error::InvalidInstance(_)) => return Ok(TrialOutcome::Vacuous),
            r => premise_vacuous(r)?,
        };
        match (via_t, direct) {
            (None, None) => Ok(TrialOutcome::Vacuous),
            (Some(a), Some(b)) => judge_close(&a, &b, ctx.policy, instance),
            (a, b) => Ok(TrialOutcome::Falsified { instance: instance(), margins: json!({ "t_variant": a, "integral": b }) }),
        }
    }

    pub fn triple_matches_quadratic(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let d = rng.random_range(1..=4);
        let rows: Vec<Vec<Scalar>> = (0..3).map(|_| rational_vec(rng, d, 3, 4)).collect();
        let m = DiscreteMeasure::counting(3)?;
        let f = VectorFunction::new(rows.clone())?;
        let integral = t_variant_margin(&m, &f, &Scalar::one(), ctx.policy)?;
        let form = QuadraticForm::euclidean(d)?;
        let quad = hlawka_margin(&form, &rows[0], &rows[1], &rows[2], Direction::Forward)?;
        judge_close(&integral, &quad, ctx.policy, || json!({ "triple": rows }))
    }

    pub fn integral_margin(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=4);
        let w = nonneg_rational_in(rng, 3, 4) + Scalar::ratio(1, 4);
        let m = DiscreteMeasure::new(vec![w; n])?;
        let f = gen::random_vector_function(rng, n, d)?;
        let perm = gen::random_permutation(rng, n);
        let scale = nonneg_rational_in(rng, 3, 4) + Scalar::ratio(1, 4);
        let g = VectorFunction::new(perm.iter().map(|&p| f.at(p).iter().map(|x| x * &scale).collect()).collect())?;
        let instance = || json!({ "weights": m.weights(), "f": f.values(), "g": g.values() });
        match integral_hlawka_margin(&m, &f, &g, ctx.policy) {
            Err(Error::InvalidInstance(_)) | Err(Error::Premise { .. }) => Ok(TrialOutcome::Vacuous),
            r => judge(&r?, ctx.policy, instance),
        }
    }

    pub fn t_variant(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let (m, f) = measure_and_f(rng)?;
        let t = nonneg_rational_in(rng, 2, 8);
        match premise_vacuous(t_variant_margin(&m, &f, &t, ctx.policy))? {
            None => Ok(TrialOutcome::Vacuous),
            Some(margin) => judge(&margin, ctx.policy, || json!({ "weights": m.weights(), "f": f.values(), "t": t })),
        }
    }

    pub fn rearrangement(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=4);
        let m = DiscreteMeasure::new(vec![nonneg_rational_in(rng, 3, 4) + Scalar::ratio(1, 4); n])?;
        let f = gen::random_vector_function(rng, n, d)?;
        let perm = gen::random_permutation(rng, n);
        match premise_vacuous(rearrangement_margin(&m, &f, &perm, ctx.policy))? {
            None => Ok(TrialOutcome::Vacuous),
            Some(margin) => judge(&margin, ctx.policy, || json!({ "weights": m.weights(), "f": f.values(), "perm": perm })),
        }
    }

    pub fn weighted(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let n = rng.random_range(1..=6);
        let d = rng.random_range(1..=4);
        let mut mu = gen::random_weights(rng, n);
        if mu.iter().all(Scalar::is_zero) {
            mu[0] = Scalar::one();
        }
        let xs: Vec<Vec<Scalar>> = (0..n).map(|_| rational_vec(rng, d, 3, 4)).collect();
        let lambda = nonneg_rational_in(rng, 2, 8);
        match premise_vacuous(weighted_variant_margin(&mu, &xs, &lambda, WeightedPremise::Unweighted, ctx.policy))? {
            None => Ok(TrialOutcome::Vacuous),
            Some(margin) => judge(&margin, ctx.policy, || json!({ "mu": mu, "x": xs, "lambda": lambda })),
        }
    }

    pub fn lambda(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let d = rng.random_range(1..=4);
        let [x, y, z] = [0; 3].map(|_| rational_vec(rng, d, 3, 4));
        let l = nonneg_rational_in(rng, 1, 8);
        let m = lambda_margin(&x, &y, &z, &l)?;
        judge(&m, ctx.policy, || json!({ "x": x, "y": y, "z": z, "lambda": l }))
    }
}

mod counter {
    use super::*;
    use crate::quadratic::counterexample::MixedCounterexample;

    fn build(ctx: &Ctx) -> Result<MixedCounterexample> {
        let p = ctx.params;
        build_mixed_counterexample(p.counterexample_n, p.counterexample_k, &p.counterexample_eps)
    }

    fn instance(c: &MixedCounterexample, triple: [&[Scalar]; 3]) -> Value {
        json!({ "n": c.n, "k": c.k, "epsilon": c.epsilon, "triple": triple })
    }

    pub fn forward(_: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let c = build(ctx)?;
        judge(&c.forward_margin_a, ctx.policy, || instance(&c, c.triple_a()))
    }

    pub fn reverse(_: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let c = build(ctx)?;
        judge(&c.reverse_margin_b, ctx.policy, || instance(&c, c.triple_b()))
    }

    pub fn generators(_: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let c = build(ctx)?;
        Ok(if c.q_values.iter().all(|q| q.sign() == Some(std::cmp::Ordering::Greater)) {
            TrialOutcome::Holds
        } else {
            TrialOutcome::Falsified { instance: to_json(&c.generators), margins: to_json(&c.q_values) }
        })
    }

    pub fn positive_span(rng: &mut ChaCha8Rng, _: u64, ctx: &Ctx) -> Result<TrialOutcome> {
        let c = build(ctx)?;
        let mut point = vec![Scalar::zero(); c.n];
        let mut coeffs = Vec::with_capacity(5);
        for g in &c.generators {
            let t = Scalar::ratio(rng.random_range(1..=16), 16);
            for (p, x) in point.iter_mut().zip(g) {
                *p = &*p + &t * x;
            }
            coeffs.push(t);
        }
        let q = c.form.eval(&point)?;
        Ok(if q.sign() == Some(std::cmp::Ordering::Greater) {
            TrialOutcome::Holds
        } else {
            TrialOutcome::Falsified { instance: json!({ "coefficients": coeffs }), margins: json!({ "q": q }) }
        })
    }
}
