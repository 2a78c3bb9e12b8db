//! Runs every acceptance criterion and prints one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::ExitCode;

use adiashort::verification::{acceptance_report, phase_jump_check};

fn main() -> ExitCode {
    let report = match acceptance_report() {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL acceptance runs: {e}");
            return ExitCode::FAILURE;
        }
    };
    for c in &report.criteria {
        println!("{}", c.line());
    }
    let mut ok = report.passed && report.criteria.len() == 8;

    // a mis-sized pulse must be caught by the phase-jump check
    match phase_jump_check(0.5) {
        Ok(c) if !c.passed && (c.measured - PI / 2.0).abs() < 1e-6 => {
            println!("PASS tampered pulse widths rejected (measured {:.6} rad)", c.measured);
        }
        other => {
            println!("FAIL tampered pulse widths not rejected: {other:?}");
            ok = false;
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
