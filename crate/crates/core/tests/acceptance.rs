use std::io::Write;
use std::time::{Duration, Instant};

use delta_forge::acceptance::{run_acceptance, run_criterion, Profile};
use delta_forge::sampling::DEFAULT_SEED;

/// Wall-clock ceilings for the criteria that carry one.
fn time_limit(id: u8) -> Option<Duration> {
    match id {
        1 => Some(Duration::from_secs(5)),
        6 => Some(Duration::from_secs(60)),
        _ => None,
    }
}

#[test]
fn acceptance_full_profile() {
    let mut failures = Vec::new();
    for id in 1..=12u8 {
        let start = Instant::now();
        let outcome = run_criterion(id, Profile::Full, DEFAULT_SEED);
        let elapsed = start.elapsed();
        let in_time = time_limit(id).map_or(true, |limit| elapsed < limit);
        let pass = outcome.pass && in_time;
        // straight to the stderr handle so the lines survive test output capture
        writeln!(
            std::io::stderr(),
            "criterion {:>2} {}  {} ({} checks, {:.2} s{}) {}",
            id,
            if pass { "PASS" } else { "FAIL" },
            outcome.title,
            outcome.checks,
            elapsed.as_secs_f64(),
            time_limit(id).map_or(String::new(), |l| format!(", limit {} s", l.as_secs())),
            outcome.detail
        )
        .unwrap();
        if !pass {
            failures.push(id);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}

#[test]
fn quick_profile_report_is_reproducible() {
    let a = run_acceptance(Profile::Quick, 42);
    let b = run_acceptance(Profile::Quick, 42);
    assert!(a.pass(), "{:#}", a.to_json());
    assert_eq!(
        serde_json::to_string(&a.to_json()).unwrap(),
        serde_json::to_string(&b.to_json()).unwrap()
    );
}
