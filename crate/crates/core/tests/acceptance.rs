//! Runs every acceptance criterion and prints one line per criterion.
//! Set `GRADED_NORMS_QUICK=1` for the reduced trial counts.

use std::process::ExitCode;

use graded_norms::suite::{criteria, run_one, SuiteConfig};

fn main() -> ExitCode {
    let config = SuiteConfig {
        quick: std::env::var_os("GRADED_NORMS_QUICK").is_some(),
        ..SuiteConfig::default()
    };
    let mut failed = 0;
    for (id, name, _) in criteria() {
        match run_one(id, &config) {
            Ok(Some(r)) => {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!(
                    "criterion {id:>2} {name:<24} {status}  {} checks, {} failures, {:.1}s: {}",
                    r.checks,
                    r.failure_count,
                    r.elapsed.as_secs_f64(),
                    r.summary
                );
                for f in &r.failures {
                    println!("    {f}");
                }
                failed += usize::from(!r.passed);
            }
            Ok(None) => unreachable!("criterion ids come from the suite"),
            Err(e) => {
                println!("criterion {id:>2} {name:<24} FAIL  error: {e}");
                failed += 1;
            }
        }
    }
    println!("{} of {} criteria passed", criteria().len() - failed, criteria().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
