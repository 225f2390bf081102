//! End-to-end checks of the verification suite, including the negative
//! control: a corrupted certificate constant must be caught.

use qtrunc::verify::{any_failed, run_suite, SuiteConfig, SuiteSystem};

fn small_config() -> SuiteConfig {
    SuiteConfig {
        seed: 4242,
        k_values: vec![1.0, 3.0],
        fields_per_k: 2,
        samples: 300,
        horizon: std::f64::consts::PI,
        systems: vec![
            SuiteSystem {
                system: "rotor".into(),
                dimension: 24,
                psi0_level: 1,
                c_override: None,
                checks: vec!["gronwall".into(), "appendix".into(), "duhamel".into()],
                duhamel_dimension: Some(12),
            },
            SuiteSystem {
                system: "oscillator".into(),
                dimension: 40,
                psi0_level: 1,
                c_override: None,
                checks: vec!["gronwall".into()],
                duhamel_dimension: None,
            },
        ],
    }
}

#[test]
fn healthy_suite_passes_everywhere() {
    let reports = run_suite(&small_config()).unwrap();
    // (fields_per_k + probe) per K value: rotor 3 checks, oscillator 1
    assert_eq!(reports.len(), 2 * 3 * 3 + 2 * 3);
    assert!(!any_failed(&reports), "unexpected failures: {reports:#?}");
    // deterministic ordering by (check, system, ...)
    let mut sorted = reports.clone();
    sorted.sort_by(|a, b| {
        (&a.check, &a.system, a.dimension, &a.field_label)
            .cmp(&(&b.check, &b.system, b.dimension, &b.field_label))
    });
    for (a, b) in reports.iter().zip(&sorted) {
        assert_eq!(a.check, b.check);
        assert_eq!(a.field_label, b.field_label);
    }
}

#[test]
fn suite_is_reproducible() {
    let a = run_suite(&small_config()).unwrap();
    let b = run_suite(&small_config()).unwrap();
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    assert_eq!(ja, jb);
}

#[test]
fn corrupted_growth_constant_is_detected() {
    let mut config = small_config();
    config.systems.truncate(1);
    config.systems[0].c_override = Some(0.1);
    config.systems[0].checks = vec!["gronwall".into()];
    let reports = run_suite(&config).unwrap();
    assert!(
        any_failed(&reports),
        "C=0.1 should break the energy-growth check: {reports:#?}"
    );
}
