//! Acceptance suite: one line per criterion, then a hard assertion.

use std::io::Write;

use stratawave_core::verify::{run_acceptance, AcceptanceOptions};

#[test]
fn acceptance_criteria() {
    let report = run_acceptance(&AcceptanceOptions::default());
    // straight to the stream so the lines survive libtest's output capture
    let mut err = std::io::stderr().lock();
    for c in &report.criteria {
        writeln!(err, "{}", c.line()).unwrap();
    }
    drop(err);
    let failed: Vec<&str> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
