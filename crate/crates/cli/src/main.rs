use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use serde_json::json;

use hlawka_core::campaign::{run_campaign, CampaignConfig, Report, Suite, DEFAULT_TRIALS, REPORT_SCHEMA};
use hlawka_core::instance::{verify_instance, InstanceKind};
use hlawka_core::quadratic::build_mixed_counterexample;
use hlawka_core::{Error, Scalar, TolerancePolicy};

/// Randomized and exact checks of Hlawka-type inequalities.
#[derive(Parser)]
#[command(name = "hlawka", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Tolerance {
    /// Absolute tolerance for float comparisons.
    #[arg(long, default_value_t = 1e-9)]
    tol_abs: f64,
    /// Relative tolerance for float comparisons.
    #[arg(long, default_value_t = 1e-12)]
    tol_rel: f64,
}

impl Tolerance {
    fn policy(&self) -> Result<TolerancePolicy, Error> {
        TolerancePolicy::new(self.tol_abs, self.tol_rel)
    }
}

#[derive(Args)]
struct MixedParams {
    /// Ambient dimension of the mixed-signature form.
    #[arg(long, default_value_t = 4)]
    n: usize,
    /// Number of positive squares, 2 <= k <= n - 1.
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Perturbation as an exact rational `P/Q`.
    #[arg(long, default_value = "1/100")]
    eps: String,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one instance file and print its breakdown.
    Verify {
        file: PathBuf,
        #[arg(long)]
        kind: InstanceKind,
        #[command(flatten)]
        tolerance: Tolerance,
    },
    /// Run a seeded campaign and emit a JSON report.
    Campaign {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        tolerance: Tolerance,
        /// Largest dimension for the quadratic-form suites.
        #[arg(long, default_value_t = 8)]
        max_dim: usize,
        #[command(flatten)]
        mixed: MixedParams,
        /// Write the report here instead of stdout.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rebuild the mixed-signature counterexample and report its margins.
    Counterexample {
        #[command(flatten)]
        mixed: MixedParams,
        #[command(flatten)]
        tolerance: Tolerance,
    },
}

/// Exit status 2 covers usage, parse and invariant errors.
fn fail(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

/// Prints a report; a closed pipe downstream is not an error.
fn emit(text: &str) -> io::Result<()> {
    match writeln!(io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e),
        _ => Ok(()),
    }
}

fn parse_eps(text: &str) -> Result<BigRational, Error> {
    match text.parse::<Scalar>()? {
        Scalar::Rat(r) => Ok(r),
        Scalar::F64(_) => Err(Error::Parameter(format!("eps must be an exact rational P/Q, got {text:?}"))),
    }
}

fn summarize(report: &Report) {
    for s in &report.suites {
        let expected = s.falsifications.iter().filter(|f| f.expected).count();
        eprintln!(
            "{:<15} checked {:>7}  holds {:>7}  marginal {:>4}  falsified {:>3} ({} expected)",
            s.suite.name(),
            s.checked,
            s.holds,
            s.marginal,
            s.falsifications.len(),
            expected
        );
    }
    for m in &report.missing_expected {
        eprintln!("missing expected falsification: {m}");
    }
    eprintln!(
        "{}",
        if report.is_clean() { "OK" } else { "UNEXPECTED RESULTS" }
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { file, kind, tolerance } => {
            let policy = match tolerance.policy() {
                Ok(p) => p,
                Err(e) => return fail(e),
            };
            match verify_instance(&file, kind, &policy) {
                Ok(report) => {
                    if let Err(e) = emit(&report.to_json()) {
                        return fail(e);
                    }
                    eprintln!("{}: {}", kind, if report.falsified { "FALSIFIED" } else { "OK" });
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => fail(e),
            }
        }
        Command::Campaign { suite, trials, seed, tolerance, max_dim, mixed, json } => {
            let config = (|| {
                let mut config = CampaignConfig::new(suite, trials, seed, tolerance.policy()?)?;
                config.params.max_dim = max_dim;
                config.params.counterexample_n = mixed.n;
                config.params.counterexample_k = mixed.k;
                config.params.counterexample_eps = parse_eps(&mixed.eps)?;
                config.validate()?;
                Ok::<_, Error>(config)
            })();
            let report = match config.and_then(|c| run_campaign(&c)) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let text = report.to_json();
            match json {
                Some(path) => {
                    if let Err(e) = fs::write(&path, text + "\n") {
                        return fail(format!("{}: {e}", path.display()));
                    }
                }
                None => {
                    if let Err(e) = emit(&text) {
                        return fail(e);
                    }
                }
            }
            summarize(&report);
            ExitCode::from(report.exit_code() as u8)
        }
        Command::Counterexample { mixed, tolerance } => {
            let built = parse_eps(&mixed.eps)
                .and_then(|eps| Ok((tolerance.policy()?, build_mixed_counterexample(mixed.n, mixed.k, &eps)?)));
            let (policy, cx) = match built {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            // strict reproduction: both failures beyond 10^3 absolute tolerances
            let threshold = -1e3 * policy.abs_tol();
            let forward_fails = cx.forward_margin_a.to_f64() < threshold;
            let reverse_fails = cx.reverse_margin_b.to_f64() < threshold;
            let reproduced = forward_fails && reverse_fails;
            let out = json!({
                "schema": REPORT_SCHEMA,
                "version": env!("CARGO_PKG_VERSION"),
                "kind": "counterexample",
                "counterexample": cx,
                "signature": cx.form.signature(),
                "threshold": threshold,
                "forward_fails": forward_fails,
                "reverse_fails": reverse_fails,
                "reproduced": reproduced,
            });
            if let Err(e) = emit(&serde_json::to_string_pretty(&out).expect("report serializes")) {
                return fail(e);
            }
            eprintln!(
                "n={} k={} eps={}: forward margin {:.6e}, reverse margin {:.6e}: {}",
                cx.n,
                cx.k,
                cx.epsilon,
                cx.forward_margin_a.to_f64(),
                cx.reverse_margin_b.to_f64(),
                if reproduced { "reproduced" } else { "NOT reproduced" }
            );
            ExitCode::from(u8::from(!reproduced))
        }
    }
}
