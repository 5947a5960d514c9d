//! Acceptance criteria A1-A12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.
//!
//! `ACCEPTANCE_ONLY=A3,A7` restricts the run; `ACCEPTANCE_SEED` overrides
//! the master seed.

use std::process::ExitCode;

use sis_extinction::validate::{run_criterion, ValidateOptions, CRITERIA};

fn main() -> ExitCode {
    let mut opts = ValidateOptions::default();
    if let Ok(seed) = std::env::var("ACCEPTANCE_SEED") {
        opts.seed = seed.parse().expect("ACCEPTANCE_SEED must be an integer");
    }
    let only: Option<Vec<String>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').map(|id| id.trim().to_ascii_uppercase()).collect());

    let mut failures = Vec::new();
    for id in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.iter().any(|x| x == id)) {
            continue;
        }
        let verdict = run_criterion(id, &opts);
        println!("{}", verdict.summary_line());
        for check in &verdict.checks {
            let mark = if check.pass { "ok " } else { "BAD" };
            println!(
                "       {mark} {}: {:.6e} vs {:.6e}",
                check.name, check.measured, check.threshold
            );
        }
        if !verdict.pass {
            failures.push(id);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed {}", failures.join(", "));
        ExitCode::FAILURE
    }
}
