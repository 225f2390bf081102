//! Grid and property checks for the dimension estimates.

use proptest::prelude::*;
use qtrunc::bounds::{
    oscillator_condition_ln, refined_dimension_oscillator, refined_dimension_rotor,
    refined_tail_bound, rotor_condition_ln, rough_dimension, FieldBudget, RoughN,
};
use qtrunc::field::ControlField;
use qtrunc::system::builtin_rotor;
use qtrunc::verify::seeded_field;

/// 20×20 logarithmic grid over K ∈ [0.1, 5], ε ∈ [1e-12, 1e-1].
fn grid() -> Vec<(f64, f64)> {
    let ks: Vec<f64> = (0..20)
        .map(|i| 0.1 * (5.0f64 / 0.1).powf(i as f64 / 19.0))
        .collect();
    let eps: Vec<f64> = (0..20)
        .map(|i| 1e-12 * (1e-1 / 1e-12f64).powf(i as f64 / 19.0))
        .collect();
    ks.iter().flat_map(|&k| eps.iter().map(move |&e| (k, e))).collect()
}

#[test]
fn refined_dimensions_are_minimal_on_the_grid() {
    for (k, eps) in grid() {
        let ln_eps = eps.ln();
        let n = refined_dimension_rotor(k, eps).unwrap();
        assert!(rotor_condition_ln(n, k) <= ln_eps);
        if n > 1 {
            assert!(
                rotor_condition_ln(n - 1, k) > ln_eps,
                "rotor minimality broken at K={k}, eps={eps}, N={n}"
            );
        }
        let n = refined_dimension_oscillator(k, eps).unwrap();
        assert!(oscillator_condition_ln(n, k) < ln_eps);
        if n > 1 {
            assert!(
                oscillator_condition_ln(n - 1, k) >= ln_eps,
                "oscillator minimality broken at K={k}, eps={eps}, N={n}"
            );
        }
    }
}

#[test]
fn refined_dimensions_are_monotone_in_k_and_eps() {
    let ks: Vec<f64> = (0..20).map(|i| 0.1 + i as f64 * (5.0 - 0.1) / 19.0).collect();
    let eps: Vec<f64> = (0..20)
        .map(|i| 1e-12 * (1e-1 / 1e-12f64).powf(i as f64 / 19.0))
        .collect();
    // nondecreasing in K at fixed eps
    for &e in &eps {
        let mut prev = 0u64;
        for &k in &ks {
            let n = refined_dimension_rotor(k, e).unwrap();
            assert!(n >= prev, "rotor dimension dropped in K at eps={e}");
            prev = n;
        }
        let mut prev = 0u64;
        for &k in &ks {
            let n = refined_dimension_oscillator(k, e).unwrap();
            assert!(n >= prev, "oscillator dimension dropped in K at eps={e}");
            prev = n;
        }
    }
    // nonincreasing in eps at fixed K
    for &k in &ks {
        let mut prev = u64::MAX;
        for &e in &eps {
            let n = refined_dimension_rotor(k, e).unwrap();
            assert!(n <= prev, "rotor dimension grew in eps at K={k}");
            prev = n;
        }
    }
}

#[test]
fn rough_dimension_is_monotone_and_clears_its_threshold() {
    let rotor = builtin_rotor();
    let ks: Vec<f64> = (0..12).map(|i| 0.1 + i as f64 * 0.35).collect();
    let eps: Vec<f64> = (0..12).map(|i| 1e-8 * (1e-1 / 1e-8f64).powf(i as f64 / 11.0)).collect();
    for &e in &eps {
        let mut prev = 0u64;
        for &k in &ks {
            let budget = FieldBudget::new(k, 1.0).unwrap();
            let n = match rough_dimension(&rotor, &budget, 1.0, e).unwrap() {
                RoughN::Level(n) => n,
                RoughN::Overflow { .. } => panic!("unexpected overflow on this grid"),
            };
            assert!(n >= prev, "rough dimension dropped in K at eps={e}");
            prev = n;
            // minimality of the inversion against the threshold
            let theta = (k * (0.75 * k).exp() / e).powi(2);
            let e_n = n as f64 * n as f64;
            assert!(e_n > theta);
            if n > 1 {
                let prev = (n - 1) as f64;
                assert!(prev * prev <= theta);
            }
        }
    }
}

#[test]
fn log_domain_matches_direct_evaluation_when_representable() {
    // direct route: exact f64 factorial products, p ≤ 20
    let mut factorial = vec![1.0f64];
    for p in 1..=20u64 {
        factorial.push(factorial[p as usize - 1] * p as f64);
    }
    for p in 0..=20u64 {
        for i in 0..=25 {
            let k = 0.2 * i as f64;
            for &c in &[0.5, 1.0, 0.25] {
                let direct = (2.0 * c * k).powi(p as i32) / factorial[p as usize];
                let log_domain = refined_tail_bound(p, k, c);
                let err = (log_domain - direct).abs();
                assert!(
                    err <= 1e-12 * direct.max(1e-300),
                    "p={p}, K={k}, c={c}: log {log_domain} vs direct {direct}"
                );
            }
        }
    }
}

#[test]
fn tail_bound_decreases_once_p_exceeds_twice_ck() {
    for &(k, c) in &[(3.0f64, 0.5f64), (5.0, 0.5), (2.0, 1.0), (4.0, 0.25)] {
        let start = (2.0 * c * k).ceil() as u64 + 1;
        for p in start..start + 30 {
            assert!(
                refined_tail_bound(p + 1, k, c) < refined_tail_bound(p, k, c),
                "not decreasing at p={p}, K={k}, c={c}"
            );
        }
    }
}

/// Recursive quadrature for the ordered iterated integral
/// ∫_{0≤s_p≤…≤s_1≤t} Π|u(s_i)| ds on a piecewise-constant |u|: integrate
/// I_p(t) = ∫₀ᵗ |u(s)| I_{p−1}(s) ds step by step with Simpson's rule on a
/// subgrid of each constant piece.
fn iterated_integral(field: &ControlField, p: usize) -> f64 {
    let subdiv = 64usize;
    let dt = field.dt() / subdiv as f64;
    let n_nodes = field.len() * subdiv + 1;
    let abs_u = |idx: usize| -> f64 {
        // value on the piece containing node idx (right-continuous)
        let piece = (idx / subdiv).min(field.len() - 1);
        field.samples()[piece].abs()
    };
    let mut prev = vec![1.0f64; n_nodes]; // I_0 ≡ 1
    for _ in 1..=p {
        let mut next = vec![0.0f64; n_nodes];
        for i in 1..n_nodes {
            // trapezoid on [t_{i-1}, t_i]; |u| constant on the subinterval
            let u_mid = abs_u(i - 1);
            next[i] = next[i - 1] + 0.5 * dt * u_mid * (prev[i - 1] + prev[i]);
        }
        prev = next;
    }
    *prev.last().unwrap()
}

#[test]
fn ordered_integral_identity_matches_quadrature() {
    let field = seeded_field(11, 40, 0.05, 2.4).unwrap();
    let k_total = field.l1_norm();
    let mut factorial = 1.0;
    for p in 1..=4usize {
        factorial *= p as f64;
        let closed_form = k_total.powi(p as i32) / factorial;
        let quadrature = iterated_integral(&field, p);
        let rel = (closed_form - quadrature).abs() / closed_form;
        assert!(
            rel < 1e-6,
            "p={p}: closed form {closed_form} vs quadrature {quadrature} (rel {rel})"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotor_minimality_random_points(
        k in 0.05f64..6.0,
        log_eps in -14.0f64..-0.5,
    ) {
        let eps = 10f64.powf(log_eps);
        let n = refined_dimension_rotor(k, eps).unwrap();
        prop_assert!(rotor_condition_ln(n, k) <= eps.ln());
        if n > 1 {
            prop_assert!(rotor_condition_ln(n - 1, k) > eps.ln());
        }
    }

    #[test]
    fn oscillator_dimension_monotone_in_eps_random(
        k in 0.1f64..5.0,
        log_eps in -12.0f64..-1.0,
    ) {
        let eps = 10f64.powf(log_eps);
        let tighter = refined_dimension_oscillator(k, eps * 0.1).unwrap();
        let looser = refined_dimension_oscillator(k, eps).unwrap();
        prop_assert!(tighter >= looser);
    }

    #[test]
    fn tabulated_spectra_reject_decreasing_energies(
        mut energies in proptest::collection::vec(0.0f64..100.0, 4..20),
        swap_at in 1usize..3,
    ) {
        use qtrunc::system::load_system;
        energies.sort_by(f64::total_cmp);
        energies.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        prop_assume!(energies.len() >= 4);
        prop_assume!(energies[0] > 0.0);
        let n = energies.len();
        let coupling: Vec<f64> = vec![0.0; n - 1];
        let make_json = |es: &[f64]| {
            format!(
                r#"{{"name":"t","spectrum":{{"kind":"table","energies":{es:?},"first_index":1}},
                    "coupling":{{"kind":"tridiagonal","super":{coupling:?}}},
                    "certificate":{{"k":1,"C":10.0,"d":1.0,"verified_up_to":{n}}}}}"#
            )
        };
        // sorted table loads
        prop_assert!(load_system(&make_json(&energies)).is_ok());
        // breaking the order is rejected
        let idx = swap_at.min(energies.len() - 2);
        energies.swap(idx, idx + 1);
        prop_assert!(load_system(&make_json(&energies)).is_err());
    }
}
