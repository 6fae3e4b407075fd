//! Single-instance verification from JSON files.
//!
//! Schemas, by kind:
//!
//! ```text
//! relation   {"weights": [s], "f_eta": [s], "f_xi": [s], "a": s, "b": s, "restrict": bool?}
//! quadratic  {"Q": [[s]], "vectors": {"x": [s], "y": [s], "z": [s]}, "direction": "forward"|"reverse"}
//! semigroup  {"carrier": "lp"|"measure"|"nonneg", "p": number|"inf"?, "op": "union"|"symmdiff"?,
//!             "weights": [s]?, "power": int?, "k": int, "triple": [e, e, e]}
//! integral   {"weights": [s], "f": [[s]], "g": [[s]]?, "S": {"kind": …}?, "A": s?, "Tg": [s]?,
//!             "t": s?, "perm": [int]?}
//! ```
//!
//! A scalar `s` is `{"rat": "p/q"}`, `{"f64": x}`, a string literal
//! (`"p/q"`, integer, or decimal) or a JSON number. Semigroup elements are
//! float vectors (`lp`), index lists (`measure`) or scalars (`nonneg`).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::integral::{
    aggregate, inner_identity_residual, integral_hlawka_margin, rearrangement_margin, t_variant_margin, ConcaveMap,
    DiscreteMeasure, GroupmainInstance, VectorFunction,
};
use crate::numerics::{cmp_ge, Scalar, TolerancePolicy, Verdict};
use crate::quadratic::{hlawka_expression, hlawka_margin, instance_from_triple, Direction, QuadraticForm, TripleInstance};
use crate::relation::{HlawkaInstance, WeightedFunctional};
use crate::semigroup::{
    hlawka_power_margin, measure_identity_residuals, LpExponent, LpSpace, MeasurableSet, MeasureSpace, NonnegReals,
    SetOp,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceKind {
    Relation,
    Quadratic,
    Semigroup,
    Integral,
}

impl InstanceKind {
    pub const ALL: [InstanceKind; 4] =
        [InstanceKind::Relation, InstanceKind::Quadratic, InstanceKind::Semigroup, InstanceKind::Integral];

    pub fn name(self) -> &'static str {
        match self {
            InstanceKind::Relation => "relation",
            InstanceKind::Quadratic => "quadratic",
            InstanceKind::Semigroup => "semigroup",
            InstanceKind::Integral => "integral",
        }
    }
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InstanceKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown instance kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub kind: InstanceKind,
    /// An asserted inequality or implication failed beyond tolerance.
    pub falsified: bool,
    pub breakdown: Value,
}

impl VerifyReport {
    pub fn exit_code(&self) -> i32 {
        i32::from(self.falsified)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))
}

pub fn verify_instance(path: &Path, kind: InstanceKind, policy: &TolerancePolicy) -> Result<VerifyReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    verify_str(&text, &path.display().to_string(), kind, policy)
}

/// As [`verify_instance`] on in-memory text; `origin` prefixes parse errors.
pub fn verify_str(text: &str, origin: &str, kind: InstanceKind, policy: &TolerancePolicy) -> Result<VerifyReport> {
    let (falsified, breakdown) = match kind {
        InstanceKind::Relation => relation(parse(text, origin)?, policy)?,
        InstanceKind::Quadratic => quadratic(parse(text, origin)?, policy)?,
        InstanceKind::Semigroup => semigroup(parse(text, origin)?, policy)?,
        InstanceKind::Integral => integral(parse(text, origin)?, policy)?,
    };
    Ok(VerifyReport {
        schema: crate::campaign::REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        kind,
        falsified,
        breakdown,
    })
}

/// Error strings stand in for margins whose preconditions fail.
fn outcome<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => json!({ "value": v }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn fails(margin: &Scalar, policy: &TolerancePolicy) -> Result<bool> {
    Ok(cmp_ge(margin, &Scalar::zero(), policy)? == Verdict::Fails)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationFile {
    weights: Vec<Scalar>,
    f_eta: Vec<Scalar>,
    f_xi: Vec<Scalar>,
    a: Scalar,
    b: Scalar,
    #[serde(default)]
    restrict: bool,
}

fn relation(file: RelationFile, policy: &TolerancePolicy) -> Result<(bool, Value)> {
    let inst = HlawkaInstance::new(WeightedFunctional::new(file.weights)?, file.f_eta, file.f_xi, file.a, file.b)?;
    let report = inst.adjudicate(file.restrict, policy)?;
    let breakdown = json!({
        "c": report.forms.c,
        "C1": report.forms.c1,
        "C2": report.forms.c2,
        "controls": report.controls,
        "restricted": report.restricted,
        "active_indices": inst.active_indices(policy),
        "identity_residual": report.identity_residual,
        "implications": report.implications,
        "notes": report.notes,
    });
    Ok((report.falsified(), breakdown))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Triple {
    x: Vec<Scalar>,
    y: Vec<Scalar>,
    z: Vec<Scalar>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticFile {
    #[serde(rename = "Q")]
    q: Vec<Vec<Scalar>>,
    vectors: Triple,
    direction: Direction,
}

fn quadratic(file: QuadraticFile, policy: &TolerancePolicy) -> Result<(bool, Value)> {
    let form = QuadraticForm::from_scalars(&file.q)?;
    let Triple { x, y, z } = &file.vectors;
    let q_values = [form.eval(x)?, form.eval(y)?, form.eval(z)?];
    let margin = hlawka_margin(&form, x, y, z, file.direction);
    let falsified = match &margin {
        Ok(m) => fails(m, policy)?,
        Err(_) => false,
    };
    let relation = match instance_from_triple(&form, x, y, z) {
        Ok(TripleInstance::Instance(inst)) => {
            let f = inst.compute_forms();
            json!({ "c": f.c, "C1": f.c1, "C2": f.c2, "a": inst.a(), "b": inst.b() })
        }
        Ok(TripleInstance::Degenerate) => json!("degenerate"),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let breakdown = json!({
        "signature": form.signature(),
        "direction": file.direction,
        "q_values": q_values,
        "expression": outcome(hlawka_expression(&form, x, y, z)),
        "margin": outcome(margin),
        "relation_instance": relation,
    });
    Ok((falsified, breakdown))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Carrier {
    Lp,
    Measure,
    Nonneg,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ExponentLit {
    Number(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SemigroupFile {
    carrier: Carrier,
    p: Option<ExponentLit>,
    op: Option<String>,
    weights: Option<Vec<Scalar>>,
    power: Option<u32>,
    k: i32,
    triple: [Value; 3],
}

fn elements<T: DeserializeOwned>(triple: [Value; 3]) -> Result<[T; 3]> {
    let [a, b, c] = triple;
    let one = |v: Value| serde_json::from_value(v).map_err(|e| Error::Parse(format!("triple element: {e}")));
    Ok([one(a)?, one(b)?, one(c)?])
}

fn semigroup(file: SemigroupFile, policy: &TolerancePolicy) -> Result<(bool, Value)> {
    let k = file.k;
    let (margin, asserted, extra) = match file.carrier {
        Carrier::Lp => {
            let exponent = match file.p {
                None => return Err(Error::Parse("lp carrier needs \"p\"".into())),
                Some(ExponentLit::Number(p)) => LpExponent::finite(p)?,
                Some(ExponentLit::Text(t)) if t == "inf" => LpExponent::Infinity,
                Some(ExponentLit::Text(t)) => return Err(Error::Parse(format!("bad exponent {t:?}"))),
            };
            let [x, y, z] = elements::<Vec<f64>>(file.triple)?;
            let m = hlawka_power_margin(&LpSpace { exponent }, &x, &y, &z, k)?;
            // holds for p ∈ [1, 2] and k ≥ 0
            let asserted = matches!(exponent, LpExponent::Finite(p) if p <= 2.0) && k >= 0;
            (m, asserted, Value::Null)
        }
        Carrier::Measure => {
            let op = match file.op.as_deref() {
                None | Some("union") => SetOp::Union,
                Some("symmdiff") | Some("symm_diff") => SetOp::SymmDiff,
                Some(o) => return Err(Error::Parse(format!("unknown set operation {o:?}"))),
            };
            let weights = file.weights.ok_or_else(|| Error::Parse("measure carrier needs \"weights\"".into()))?;
            let sets = elements::<Vec<usize>>(file.triple)?;
            let [a, b, c] = [0, 1, 2].map(|i| MeasurableSet::from_indices(&sets[i]));
            let (a, b, c) = (a?, b?, c?);
            let space = MeasureSpace::new(weights.clone(), op)?;
            let m = hlawka_power_margin(&space, &a, &b, &c, k)?;
            let residuals = measure_identity_residuals(&weights, a, b, c)?;
            (m, k >= 0, json!({ "op": op, "identity_residuals": residuals }))
        }
        Carrier::Nonneg => {
            let power = file.power.unwrap_or(1);
            let [x, y, z] = elements::<Scalar>(file.triple)?;
            let m = hlawka_power_margin(&NonnegReals { power }, &x, &y, &z, k)?;
            let asserted = power == 1 || (power >= 2 && k <= 0);
            (m, asserted, json!({ "power": power }))
        }
    };
    let falsified = asserted && fails(&margin, policy)?;
    let breakdown = json!({ "k": k, "margin": margin, "asserted": asserted, "details": extra });
    Ok((falsified, breakdown))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegralFile {
    weights: Vec<Scalar>,
    f: Vec<Vec<Scalar>>,
    g: Option<Vec<Vec<Scalar>>>,
    #[serde(rename = "S")]
    s: Option<ConcaveMap>,
    #[serde(rename = "A")]
    a: Option<Scalar>,
    #[serde(rename = "Tg")]
    t_g: Option<Vec<Scalar>>,
    t: Option<Scalar>,
    perm: Option<Vec<usize>>,
}

fn integral(file: IntegralFile, policy: &TolerancePolicy) -> Result<(bool, Value)> {
    let measure = DiscreteMeasure::new(file.weights)?;
    let f = VectorFunction::new(file.f)?;
    let g = match file.g {
        Some(rows) => VectorFunction::new(rows)?,
        None => f.clone(),
    };
    let int_f = aggregate(&measure, &f)?;
    let mut falsified = false;
    let mut check = |r: Result<Scalar>| -> Result<Value> {
        if let Ok(m) = &r {
            falsified |= fails(m, policy)?;
        }
        Ok(outcome(r))
    };
    let integral_margin = check(integral_hlawka_margin(&measure, &f, &g, policy))?;
    let t_margin = match &file.t {
        Some(t) => check(t_variant_margin(&measure, &f, t, policy))?,
        None => Value::Null,
    };
    let rearranged = match &file.perm {
        Some(p) => check(rearrangement_margin(&measure, &f, p, policy))?,
        None => Value::Null,
    };
    let groupmain = match (file.s, file.a) {
        (Some(s), Some(a)) => {
            let inst = GroupmainInstance::new(measure.clone(), g.clone(), file.t_g.unwrap_or(int_f.clone()), s, a)?;
            let premise = inst.premises(policy)?;
            match inst.margins(policy) {
                Ok(m) => {
                    let o = m.outcome(policy)?;
                    // without the premise a failed conclusion refutes nothing
                    falsified |= premise.is_none() && o == crate::relation::Outcome::Falsified;
                    json!({ "premise_violation": premise, "margins": m, "outcome": o })
                }
                Err(e) => json!({ "premise_violation": premise, "error": e.to_string() }),
            }
        }
        (None, None) => Value::Null,
        _ => return Err(Error::Parse("\"S\" and \"A\" must be given together".into())),
    };
    let breakdown = json!({
        "aggregate_f": int_f,
        "inner_identity_residual": inner_identity_residual(&measure, &f)?,
        "integral_margin": integral_margin,
        "t_variant_margin": t_margin,
        "rearrangement_margin": rearranged,
        "groupmain": groupmain,
    });
    Ok((falsified, breakdown))
}
