//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the lines show up in plain `cargo test` output.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use hlawka_core::campaign::{run_property, CampaignParams, PropertyReport, Suite};
use hlawka_core::numerics::rational;
use hlawka_core::quadratic::build_mixed_counterexample;
use hlawka_core::sampling::{nonneg_rational_in, trial_rng};
use hlawka_core::semigroup::{
    measure_identity_residuals, propagate_check, Branch, MeasurableSet, MeasureSpace, SetOp,
};
use hlawka_core::{Scalar, TolerancePolicy};

const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    title: &'static str,
    /// Stated runtime bound; exceeding it fails the criterion.
    budget: Option<Duration>,
    run: fn() -> Outcome,
}

fn policy() -> TolerancePolicy {
    TolerancePolicy::default()
}

/// Runs a campaign property and demands zero falsifications and the exact
/// trial count.
fn clean(suite: Suite, name: &str, trials: usize) -> Result<PropertyReport, String> {
    let r = run_property(suite, name, trials, SEED, &policy(), &CampaignParams::default()).map_err(|e| e.to_string())?;
    if let Some(f) = r.falsifications.first() {
        return Err(format!(
            "{name}: {} falsification(s), first at trial {}: {}",
            r.falsifications.len(),
            f.trial,
            f.margins
        ));
    }
    if r.tally.checked != trials as u64 {
        return Err(format!("{name}: checked {} of {trials}", r.tally.checked));
    }
    Ok(r)
}

/// Like [`clean`], and additionally requires exact verdicts only.
fn exact(suite: Suite, name: &str, trials: usize) -> Result<PropertyReport, String> {
    let r = clean(suite, name, trials)?;
    if r.tally.marginal != 0 {
        return Err(format!("{name}: {} marginal verdicts on an exact identity", r.tally.marginal));
    }
    Ok(r)
}

fn exact_identities() -> Outcome {
    for name in ["four_point_identity", "relation_identity", "inner_product_identity"] {
        exact(Suite::Identities, name, 10_000)?;
    }
    Ok("3 x 10^4 exact residuals, all zero".into())
}

fn relation_soundness() -> Outcome {
    let r = clean(Suite::Relation, "one_two_form_relation", 100_000)?;
    let fired = r.tally.checked - r.tally.vacuous;
    if fired == 0 {
        return Err("every instance was vacuous".into());
    }
    Ok(format!("10^5 instances, {fired} non-vacuous, {} marginal", r.tally.marginal))
}

fn quadratic_margins() -> Outcome {
    // four dimensions cycle by trial index: 10^4 per dimension
    let mut marginal = 0;
    for name in ["forward_gaussian", "reverse_future_cone", "azteca_future_cone", "reverse_triangle_future_cone"] {
        marginal += clean(Suite::Quadratic, name, 40_000)?.tally.marginal;
    }
    Ok(format!("4 margins x 4 dims x 10^4 triples, min margin >= -1e-9 ({marginal} within tolerance of 0)"))
}

/// Forward margin on `(v1, v2, v3)` and forward expression on `(v3, v4, v5)`
/// at `ε = 1/100`, from an independent float evaluation.
const MIXED_ORACLE: [(usize, usize, f64, f64); 10] = [
    (3, 2, -0.13342691192657963, 0.08945898298801191),
    (4, 2, -0.13343130521631874, 0.08945743693899377),
    (4, 3, -0.13342251906493452, 0.08946052881779165),
    (5, 2, -0.13343569893422202, 0.08945589067070525),
    (5, 3, -0.13342691192657874, 0.08945898298801191),
    (5, 4, -0.1334181266313177, 0.08946207442836052),
    (6, 2, -0.13344009308035965, 0.08945434418311304),
    (6, 3, -0.13343130521631785, 0.08945743693899377),
    (6, 4, -0.1334225190649354, 0.08946052881779165),
    (6, 5, -0.13341373462565542, 0.08946361981975137),
];

fn counterexample() -> Outcome {
    let eps = rational(1, 100);
    let strict = -1e3 * policy().abs_tol();
    let mut worst = f64::NEG_INFINITY;
    let mut covered = 0;
    for n in 3..=6 {
        for k in 2..n {
            let cx = build_mixed_counterexample(n, k, &eps).map_err(|e| format!("n={n} k={k}: {e}"))?;
            let fwd = cx.forward_margin_a.to_f64();
            let rev = cx.reverse_margin_b.to_f64();
            if !(fwd < -1e-6 && fwd < strict && rev < -1e-6 && rev < strict) {
                return Err(format!("n={n} k={k}: margins {fwd} / {rev} not strictly negative"));
            }
            if let Some(q) = cx.q_values.iter().find(|q| q.sign() != Some(std::cmp::Ordering::Greater)) {
                return Err(format!("n={n} k={k}: generator with q = {q}"));
            }
            let &(_, _, want_fwd, want_expr) = MIXED_ORACLE
                .iter()
                .find(|o| o.0 == n && o.1 == k)
                .ok_or(format!("no oracle row for n={n} k={k}"))?;
            let expr = cx.reverse_failure_b().to_f64();
            if (fwd - want_fwd).abs() > 1e-12 || (expr - want_expr).abs() > 1e-12 {
                return Err(format!("n={n} k={k}: ({fwd}, {expr}) differs from oracle ({want_fwd}, {want_expr})"));
            }
            worst = worst.max(fwd.max(rev));
            covered += 1;
        }
    }
    Ok(format!("{covered} (n,k) pairs, oracle match 1e-12, largest margin {worst:.4e}"))
}

fn random_weights(stream: &str) -> Vec<Scalar> {
    let mut rng = trial_rng(SEED, stream, 0);
    (0..5).map(|_| nonneg_rational_in(&mut rng, 9, 7)).collect()
}

fn all_triples() -> impl Iterator<Item = [MeasurableSet; 3]> {
    (0u64..32 * 32 * 32).map(|i| [MeasurableSet(i >> 10), MeasurableSet((i >> 5) & 31), MeasurableSet(i & 31)])
}

fn measure_identities() -> Outcome {
    let mut printed_coefficient_refuted = 0;
    let mut weight_draws = 0;
    for draw in 0..4 {
        let w = random_weights(&format!("acceptance/measure_identities/{draw}"));
        for [a, b, c] in all_triples() {
            let r = measure_identity_residuals(&w, a, b, c).map_err(|e| e.to_string())?;
            if !(r.union.is_exact() && r.union.is_zero() && r.symm_diff.is_exact() && r.symm_diff.is_zero()) {
                return Err(format!("weights {w:?}, sets {a:?} {b:?} {c:?}: residuals {r:?}"));
            }
            // coefficient 3 leaves μ(A∩B∩C) over
            let printed = &r.symm_diff + &r.triple_intersection;
            if !printed.is_zero() {
                printed_coefficient_refuted += 1;
            }
        }
        weight_draws += 1;
    }
    if printed_coefficient_refuted == 0 {
        return Err("the △ identity with coefficient 3 was never refuted".into());
    }
    Ok(format!(
        "{weight_draws} weight draws x 32^3 triples exact; △ bookkeeping uses 4μ(A∩B∩C), coefficient 3 refuted on {printed_coefficient_refuted}"
    ))
}

fn propagation() -> Outcome {
    let mut detail = Vec::new();
    for op in [SetOp::Union, SetOp::SymmDiff] {
        let space = MeasureSpace::new(random_weights(&format!("acceptance/propagation/{op:?}")), op)
            .map_err(|e| e.to_string())?;
        let triples: Vec<[MeasurableSet; 3]> = all_triples().collect();
        let r = propagate_check(&space, &triples, Branch::StrongSubadditive, 0, &[0, 1, 2, 3, 4], &policy())
            .map_err(|e| e.to_string())?;
        if !r.is_clean() {
            return Err(format!("{op:?}: {:?}", r.violations.first()));
        }
        detail.push(format!("{op:?} {}/{} premises", r.premise_held, r.triples));
    }
    // one p per trial, all k per trial: 10^3 triples per (p, k)
    clean(Suite::Semigroup, "lp_propagation", 3_000)?;
    clean(Suite::Semigroup, "squares_propagation", 1_000)?;
    detail.push("L^p 3 x 10^3, x^2 10^3".into());
    Ok(detail.join(", "))
}

fn diamond() -> Outcome {
    // ten configurations cycle by trial index
    let r = clean(Suite::Semigroup, "diamond_margin", 10_000)?;
    Ok(format!("10 configurations x 10^3 triples, {} marginal", r.tally.marginal))
}

fn integral() -> Outcome {
    let g = clean(Suite::Integral, "groupmain_implication", 10_000)?;
    let fired = g.tally.checked - g.tally.vacuous;
    if fired == 0 {
        return Err("groupmain premise never met".into());
    }
    clean(Suite::Integral, "t_variant_matches_integral", 10_000)?;
    clean(Suite::Integral, "triple_matches_quadratic", 10_000)?;
    let v = clean(Suite::Integral, "designed_violator_rejected", 100)?;
    if v.tally.holds != 100 {
        return Err(format!("only {} of 100 violators rejected with the planted witness", v.tally.holds));
    }
    Ok(format!("groupmain 10^4 ({fired} non-vacuous), t-variant and triple 10^4 each, 100/100 violators"))
}

fn determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("hlawka-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut reports = Vec::new();
    let mut slowest = Duration::ZERO;
    for run in 0..2 {
        let out = dir.join(format!("run{run}.json"));
        let start = Instant::now();
        let status = Command::new(env!("CARGO_BIN_EXE_hlawka"))
            .args(["campaign", "--suite", "all", "--seed", "42", "--json"])
            .arg(&out)
            .stderr(std::process::Stdio::null())
            .status()
            .map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        if !status.success() {
            return Err(format!("run {run} exited with {status}"));
        }
        reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let _ = std::fs::remove_dir_all(&dir);
    if reports[0] != reports[1] {
        return Err("reports differ".into());
    }
    if slowest >= Duration::from_secs(60) {
        return Err(format!("campaign took {slowest:.1?}"));
    }
    Ok(format!("{} identical bytes, slowest run {slowest:.1?}", reports[0].len()))
}

fn main() -> ExitCode {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { id: 1, title: "exact identities", budget: secs(10), run: exact_identities },
        Criterion { id: 2, title: "one/two-form relation soundness", budget: secs(10), run: relation_soundness },
        Criterion { id: 3, title: "forward and reverse quadratic margins", budget: secs(20), run: quadratic_margins },
        Criterion { id: 4, title: "mixed-signature counterexample", budget: None, run: counterexample },
        Criterion { id: 5, title: "measure identities, exhaustive", budget: secs(10), run: measure_identities },
        Criterion { id: 6, title: "power propagation", budget: None, run: propagation },
        Criterion { id: 7, title: "diamond margins", budget: None, run: diamond },
        Criterion { id: 8, title: "integral suite", budget: None, run: integral },
        Criterion { id: 9, title: "campaign determinism", budget: None, run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let mut outcome = (c.run)();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(budget)) = (&outcome, c.budget) {
            if elapsed > budget {
                outcome = Err(format!("took {elapsed:.1?}, budget {budget:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {} ({detail}; {elapsed:.1?})", c.id, c.title),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {} ({why}; {elapsed:.1?})", c.id, c.title);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
