//! Acceptance gate: runs every criterion and prints one pass/fail line per
//! criterion. Run with `cargo test -p distgl --test acceptance -- --nocapture`
//! to see the lines for passing criteria too.

use distgl::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let results = run_all();
    assert_eq!(results.len(), 11, "expected all 11 criteria to report");
    let mut failed = Vec::new();
    for r in &results {
        println!("{}", r.line());
        if !r.passed {
            failed.push(r.line());
        }
    }
    assert!(
        failed.is_empty(),
        "{} acceptance criteria failed:\n{}",
        failed.len(),
        failed.join("\n")
    );
}
