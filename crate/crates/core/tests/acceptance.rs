//! The full verification battery as a single gate: every numbered check
//! must pass. Run with `--nocapture` to see one line per check.

#[test]
fn all_verification_checks_pass() {
    let outcomes = ergraph::verify::run_all();
    assert_eq!(outcomes.len(), 12);
    let mut failed = Vec::new();
    for outcome in &outcomes {
        println!("{}", outcome.line());
        if !outcome.passed {
            failed.push(outcome.line());
        }
    }
    assert!(
        failed.is_empty(),
        "{} of {} checks failed:\n{}",
        failed.len(),
        outcomes.len(),
        failed.join("\n")
    );
}
