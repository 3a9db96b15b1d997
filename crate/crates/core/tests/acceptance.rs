//! Acceptance suite: runs every criterion and prints one pass/fail line per
//! criterion. The suite itself lives in the library (`redop_core::suite`) so
//! the CLI selftest runs the identical checks.

use redop_core::suite;

#[test]
fn acceptance_criteria() {
    let report = suite::run(0x5eed);
    for c in &report.criteria {
        println!(
            "criterion {:>2}  {}  {} [{} checks, {:.0} ms]",
            c.id,
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.checks.checks.len(),
            c.runtime_ms
        );
    }
    let mut failures = Vec::new();
    for c in &report.criteria {
        for ch in &c.checks.checks {
            if !ch.passed() {
                failures.push(format!("criterion {}: {}", c.id, ch.human_line()));
            }
        }
    }
    assert!(
        report.passed(),
        "acceptance failures:\n{}",
        failures.join("\n")
    );
}
