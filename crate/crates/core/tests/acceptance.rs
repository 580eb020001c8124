//! Acceptance battery: every criterion must pass at its stated tolerance.
//! Run with `cargo test --test acceptance -- --nocapture` to see one line
//! per criterion.

use tfm_core::suite::run_suite;

#[test]
fn acceptance_criteria() {
    let report = run_suite();
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let failed: Vec<String> = report
        .criteria
        .iter()
        .filter(|c| !c.pass)
        .map(|c| c.line())
        .collect();
    assert!(
        report.pass,
        "acceptance criteria failed:\n{}",
        failed.join("\n")
    );
}
