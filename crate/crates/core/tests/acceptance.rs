//! Acceptance suite: one PASS/FAIL line per criterion, then the measurements.

use std::process::ExitCode;

use cone_deform::acceptance::{run_acceptance, AcceptanceOptions};

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temporary directory");
    let report = run_acceptance(&AcceptanceOptions {
        out_dir: dir.path().to_path_buf(),
    });
    for c in &report.criteria {
        println!("{}", c.line());
    }
    println!();
    for c in &report.criteria {
        println!("{}", c.id);
        for m in &c.measurements {
            let rel = if m.lower { ">=" } else { "<=" };
            let tag = if m.passed { "ok" } else { "FAILED" };
            println!("    {tag:<7} {} = {:.3e} ({rel} {:.1e})", m.name, m.value, m.bound);
        }
        for n in &c.notes {
            println!("    note: {n}");
        }
    }
    let passed = report.criteria.len() == 8 && report.passed;
    println!("\nacceptance: {}", if passed { "all criteria passed" } else { "FAILED" });
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
