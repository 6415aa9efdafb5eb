//! Runs every acceptance criterion at full scale and prints one line each.

use std::process::ExitCode;

use lsl_core::verification::{run_all, VerifyOptions};

fn main() -> ExitCode {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .expect("thread pool");
    let results = pool.install(|| run_all(&VerifyOptions::default()));
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
