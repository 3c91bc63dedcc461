//! One line per acceptance criterion; exits non-zero if any criterion fails.

use starkit::verify::{run, SUITES};

fn main() {
    let mut failed = 0;
    for id in 1..=SUITES.len() {
        let suite = run(id);
        let status = if suite.passed() { "PASS" } else { "FAIL" };
        let detail = match suite.worst() {
            Some(c) => format!(" [{}: {:.3e} vs {:.0e}]", c.name, c.value, c.tol),
            None => String::new(),
        };
        println!("{status} criterion {id:>2} {:<17} {} ({:.2}s){detail}", suite.name, suite.title, suite.seconds);
        if std::env::var_os("ACCEPTANCE_VERBOSE").is_some() {
            for c in &suite.checks {
                println!("        {c}");
            }
        }
        if !suite.passed() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", SUITES.len() - failed, SUITES.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
