use std::io::Write;

use gentropy::acceptance::{run_suite, DEFAULT_SEED};

#[test]
fn acceptance_criteria() {
    let results = run_suite("all", DEFAULT_SEED).expect("suite runs");
    // Direct handle writes are not captured by the harness.
    let mut err = std::io::stderr().lock();
    writeln!(err).unwrap();
    for r in &results {
        writeln!(err, "{}", r.line()).unwrap();
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
