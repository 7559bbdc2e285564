//! One line per criterion. Criterion 1 is a known failure: the computed constant is checked
//! against its independently derived value instead, and the line still reads FAIL.

use std::process::ExitCode;

use visco2::acceptance::{run_criterion, AcceptanceOptions, CRITERIA};
use visco2::corrector::simple_cubic_constants;

const KNOWN_FAILURES: [u8; 1] = [1];

// Ewald lattice constant from two independent formulas, frozen.
const A_SIMPLE_CUBIC: f64 = -0.04644987814791;

fn main() -> ExitCode {
    let quick = std::env::var_os("VISCO2_ACCEPT_QUICK").is_some();
    let opts = AcceptanceOptions { quick };
    let mut bad = Vec::new();
    for id in CRITERIA {
        match run_criterion(id, &opts) {
            Ok(r) => {
                println!("{r}");
                let expected_fail = KNOWN_FAILURES.contains(&id);
                if !r.passed && !expected_fail && !quick {
                    bad.push(id);
                }
                if r.passed && expected_fail {
                    println!("  criterion {id} unexpectedly passes; update KNOWN_FAILURES");
                    bad.push(id);
                }
            }
            Err(e) => {
                println!("criterion {id} [FAIL] error: {e}");
                bad.push(id);
            }
        }
    }
    let c = simple_cubic_constants().expect("lattice constants");
    let drift = (c.a_from_alpha - A_SIMPLE_CUBIC).abs().max((c.a_from_beta - A_SIMPLE_CUBIC).abs());
    println!("simple cubic a = {:.14} (frozen {A_SIMPLE_CUBIC}, drift {drift:.1e})", c.a_from_alpha);
    if drift > 1e-11 {
        bad.push(1);
    }
    if bad.is_empty() {
        println!("acceptance: ok ({} known failure)", KNOWN_FAILURES.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {bad:?}");
        ExitCode::FAILURE
    }
}
