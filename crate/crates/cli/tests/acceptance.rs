//! One PASS/FAIL line per acceptance criterion, followed by the individual checks.
//! Exits non-zero when any criterion fails.

use std::process::Command;

use mapcone_cli::verify::{self, BatteryConfig, Check};

type Criterion = (u8, &'static str, fn(&BatteryConfig) -> Vec<Check>);

const CRITERIA: [Criterion; 8] = [
    (1, "Choi calculus identities", verify::choi_calculus),
    (2, "coefficient identities", verify::coefficient_identities),
    (
        3,
        "determinant polynomial and gradient",
        verify::determinant_calculus,
    ),
    (
        4,
        "singular families, ranks, kernels, completeness",
        verify::singular_structure,
    ),
    (
        5,
        "block positivity and witness sanity",
        verify::witness_sanity,
    ),
    (6, "PPT baseline", verify::ppt_baseline),
    (
        7,
        "local inequivalence certificates",
        verify::local_inequivalence,
    ),
    (
        8,
        "moduli-preserving classification",
        verify::moduli_classification,
    ),
];

fn report(criterion: u8, title: &str, checks: &[Check]) -> bool {
    let ok = checks.iter().all(|c| c.passed);
    println!(
        "{} criterion {criterion}: {title}",
        if ok { "PASS" } else { "FAIL" }
    );
    for c in checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        print!(
            "    [{mark}] {}: measured {:e}, tolerance {:e}",
            c.name, c.measured, c.tolerance
        );
        if !c.detail.is_empty() {
            print!(" ({})", c.detail);
        }
        println!();
    }
    ok
}

/// Exit code and the `criterion_3` pass flag of a `verify-paper` run.
fn verify_paper(extra: &[&str]) -> (Option<i32>, Option<bool>) {
    let out = Command::new(env!("CARGO_BIN_EXE_mapcone"))
        .arg("verify-paper")
        .args(extra)
        .env_remove("MAPCONE_SEED")
        .env_remove("MAPCONE_TOL_EIGEN")
        .output()
        .expect("binary runs");
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap_or_default();
    (out.status.code(), report["pass"]["criterion_3"].as_bool())
}

fn main() {
    let cfg = BatteryConfig::standard(0);
    let mut all = true;
    for (n, title, run) in CRITERIA {
        all &= report(n, title, &run(&cfg));
    }

    let (clean, clean_c3) = verify_paper(&[]);
    let (mutated, mutated_c3) = verify_paper(&["--mutate", "flip-d"]);
    let checks = vec![
        Check {
            criterion: 9,
            name: "verify-paper exits 0".into(),
            passed: clean == Some(0),
            measured: clean.map_or(f64::NAN, f64::from),
            tolerance: 0.0,
            detail: String::new(),
        },
        Check {
            criterion: 9,
            name: "flipping the D_t sign makes verify-paper exit 1".into(),
            passed: mutated == Some(1),
            measured: mutated.map_or(f64::NAN, f64::from),
            tolerance: 1.0,
            detail: String::new(),
        },
        Check {
            criterion: 9,
            name: "the flipped sign is caught by criterion 3 and only under the mutation".into(),
            passed: clean_c3 == Some(true) && mutated_c3 == Some(false),
            measured: f64::from(u8::from(mutated_c3 == Some(false))),
            tolerance: 1.0,
            detail: format!("criterion_3 clean: {clean_c3:?}, mutated: {mutated_c3:?}"),
        },
    ];
    all &= report(9, "end-to-end verify-paper", &checks);

    if !all {
        println!("acceptance: some criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
