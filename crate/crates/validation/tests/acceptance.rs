use std::process::ExitCode;

use multistep_validation::checks;

fn main() -> ExitCode {
    let mut failed = 0;
    for check in checks() {
        let r = check.execute();
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status} {:<30} {:>8.2}s  {}",
            r.id,
            r.name,
            r.elapsed.as_secs_f64(),
            r.detail
        );
        if !r.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", checks().len() - failed, checks().len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
