use approx::assert_relative_eq;
use proptest::prelude::*;

use aoi_mec_core::analytic::{
    appendix_oracles, coefficients, maoi_for_ratio, maoi_local, maoi_partial, maoi_partial_with_fallback, maoi_remote,
    prob_local_dominates, prob_remote_dominates, Scheme, STABILITY_MARGIN,
};
use aoi_mec_core::rates::{
    edge_delay, local_delay, offload_delay, PartialRates, PlatformProfile, ServiceRates, TaskProfile,
};
use aoi_mec_core::Error;

/// Classical M/M/1 FCFS age, written in terms of the load.
fn mm1_age(mu: f64, xi: f64) -> f64 {
    let rho = xi / mu;
    (1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / mu
}

fn stable_partial() -> impl Strategy<Value = (PartialRates, f64, f64)> {
    (0.05f64..0.95, 0.2f64..5.0, 0.2f64..5.0, 0.2f64..5.0, 0.05f64..0.9).prop_map(|(beta, mu_l, mu_t, mu_e, load)| {
        let rates = PartialRates { mu_l, mu_t, mu_e };
        let cap = (mu_l / (1.0 - beta)).min(mu_t / beta).min(mu_e / beta);
        (rates, beta, load * cap)
    })
}

proptest! {
    #[test]
    fn service_rates_invert_the_delays(g in 0.1f64..10.0, k in 0.1f64..10.0, h in 0.1f64..10.0, beta in 0.01f64..0.99) {
        let r = ServiceRates::from_delays(g, k, h, beta, 0.5).unwrap();
        let p = r.partial().unwrap();
        assert_relative_eq!(p.mu_l * (1.0 - beta) * g, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.mu_t * beta * k, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.mu_e * beta * h, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r.pure_local(), 1.0 / g, epsilon = 1e-12);
    }

    #[test]
    fn delays_follow_cycle_and_bit_counts(
        bits in 1e5f64..1e7,
        cycles in 100.0f64..2000.0,
        f_ue in 1e8f64..5e9,
        n in 1u32..60,
        theta in 0.05f64..1.0,
        tau in 0.1f64..10.0,
    ) {
        let task = TaskProfile { mean_size_bits: bits, cycles_per_bit: cycles, ..TaskProfile::default() };
        let plat = PlatformProfile { ue_cpu_hz: f_ue, ues_per_bs: n, ..PlatformProfile::default() };
        assert_relative_eq!(local_delay(&task, &plat), cycles * bits / f_ue, max_relative = 1e-12);
        assert_relative_eq!(edge_delay(&task, &plat), cycles * bits * f64::from(n) / plat.bs_cpu_hz, max_relative = 1e-12);
        let rate = plat.total_bandwidth_hz / f64::from(n) * (1.0 + tau).log2() * theta;
        assert_relative_eq!(offload_delay(&task, &plat, tau, theta).unwrap(), bits / rate, max_relative = 1e-12);
    }

    #[test]
    fn local_form_is_the_classical_queue(mu in 0.1f64..10.0, load in 0.01f64..0.99) {
        let xi = load * mu;
        let r = maoi_local(mu, xi).unwrap();
        prop_assert_eq!(r.scheme, Scheme::Local);
        assert_relative_eq!(r.maoi, mm1_age(mu, xi), max_relative = 1e-10);
    }

    #[test]
    fn remote_form_reduces_to_local_for_a_fast_edge(mu_t in 0.2f64..5.0, load in 0.05f64..0.9) {
        let xi = load * mu_t;
        let remote = maoi_remote(mu_t, 1e9 * mu_t, xi).unwrap().maoi;
        assert_relative_eq!(remote, mm1_age(mu_t, xi), max_relative = 1e-6);
    }

    #[test]
    fn second_stage_never_lowers_age(mu_t in 0.2f64..5.0, mu_e in 0.2f64..5.0, load in 0.05f64..0.95) {
        let xi = load * mu_t.min(mu_e);
        let remote = maoi_remote(mu_t, mu_e, xi).unwrap().maoi;
        prop_assert!(remote >= maoi_local(mu_t, xi).unwrap().maoi - 1e-12);
        prop_assert!(remote >= maoi_local(mu_e, xi).unwrap().maoi - 1e-12);
        prop_assert!(remote > 1.0 / xi + 1.0 / mu_t + 1.0 / mu_e - 1e-12);
    }

    #[test]
    fn remote_form_is_finite_with_equal_stages(mu in 0.2f64..5.0, load in 0.05f64..0.95) {
        let xi = load * mu;
        let at = maoi_remote(mu, mu, xi).unwrap().maoi;
        let near = maoi_remote(mu, mu * (1.0 + 1e-7), xi).unwrap().maoi;
        prop_assert!(at.is_finite());
        assert_relative_eq!(at, near, max_relative = 1e-5);
    }

    #[test]
    fn pure_schemes_are_unimodal_in_rate(mu_t in 0.2f64..5.0, mu_e in 0.2f64..5.0) {
        let local = |x: f64| maoi_local(mu_t, x).unwrap().maoi;
        let remote = |x: f64| maoi_remote(mu_t, mu_e, x).unwrap().maoi;
        for (f, cap) in [(&local as &dyn Fn(f64) -> f64, mu_t), (&remote, mu_t.min(mu_e))] {
            let v: Vec<f64> = (1..200).map(|i| f(cap * i as f64 / 200.0)).collect();
            let k = v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            prop_assert!(k > 0 && k < v.len() - 1, "minimum on the grid edge");
            prop_assert!(v[..=k].windows(2).all(|w| w[1] <= w[0]));
            prop_assert!(v[k..].windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn stability_matches_the_three_load_caps(
        beta in 0.05f64..0.95,
        mu_l in 0.2f64..5.0,
        mu_t in 0.2f64..5.0,
        mu_e in 0.2f64..5.0,
        xi in 0.01f64..10.0,
    ) {
        let r = PartialRates { mu_l, mu_t, mu_e };
        let cap = 1.0 - STABILITY_MARGIN;
        let stable = (1.0 - beta) * xi / mu_l <= cap && beta * xi / mu_t <= cap && beta * xi / mu_e <= cap;
        match coefficients(&r, xi, beta) {
            Ok(c) => {
                prop_assert!(stable);
                prop_assert!(c.chi_l > 0.0 && c.chi_t > 0.0 && c.chi_e > 0.0);
            }
            Err(Error::Instability { load, .. }) => {
                prop_assert!(!stable);
                prop_assert!(load > cap);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn branch_probabilities_are_complementary((r, beta, xi) in stable_partial()) {
        let c = coefficients(&r, xi, beta).unwrap();
        let p = prob_local_dominates(&c);
        prop_assert!(p > 0.0 && p < 1.0);
        assert_relative_eq!(p + prob_remote_dominates(&c), 1.0, epsilon = 1e-14);
        let rep = maoi_partial(&r, xi, beta).unwrap();
        assert_relative_eq!(rep.p_local_dominates + rep.p_remote_dominates, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn local_dominance_is_a_laplace_transform((r, beta, xi) in stable_partial()) {
        // The local system time is Exp(chi_l) and the remote one is the
        // sum of Exp(chi_t) and Exp(chi_e); P(local last) = E[exp(-chi_l T_remote)].
        let c = coefficients(&r, xi, beta).unwrap();
        let lt = c.chi_t / (c.chi_t + c.chi_l) * c.chi_e / (c.chi_e + c.chi_l);
        assert_relative_eq!(prob_local_dominates(&c), lt, max_relative = 1e-12);
    }

    #[test]
    fn appendix_probabilities_lie_in_the_unit_interval((r, beta, xi) in stable_partial()) {
        let o = appendix_oracles(&r, xi, beta).unwrap();
        for p in [o.p_local_dominates, o.p_busy_on_arrival, o.p_idle_on_arrival, o.p_y_positive, o.p_y_negative, o.p_local_and_busy] {
            prop_assert!((0.0..=1.0).contains(&p), "probability {p}");
        }
        assert_relative_eq!(o.p_busy_on_arrival + o.p_idle_on_arrival, 1.0, epsilon = 1e-12);
        assert_relative_eq!(o.p_y_positive + o.p_y_negative, 1.0, epsilon = 1e-12);
        assert_relative_eq!(o.p_busy_on_arrival, (1.0 - beta) * xi / r.mu_l, max_relative = 1e-12);
    }

    #[test]
    fn fallback_only_changes_singular_inputs((r, beta, xi) in stable_partial()) {
        prop_assume!((r.mu_t - r.mu_e).abs() > 1e-3);
        let direct = maoi_partial(&r, xi, beta).unwrap().maoi;
        let fallback = maoi_partial_with_fallback(&r, xi, beta).unwrap().maoi;
        prop_assert_eq!(direct, fallback);
    }

    #[test]
    fn endpoint_routing_uses_the_pure_forms(g in 0.2f64..5.0, k in 0.2f64..5.0, h in 0.2f64..5.0, load in 0.05f64..0.9) {
        let local = ServiceRates::from_delays(g, k, h, 0.0, 1.0).unwrap();
        let xi = load / g;
        prop_assert_eq!(maoi_for_ratio(&local, xi).unwrap().maoi, maoi_local(1.0 / g, xi).unwrap().maoi);
        let remote = ServiceRates::from_delays(g, k, h, 1.0, 1.0).unwrap();
        let xi = load / k.max(h);
        prop_assert_eq!(maoi_for_ratio(&remote, xi).unwrap().maoi, maoi_remote(1.0 / k, 1.0 / h, xi).unwrap().maoi);
    }
}

#[test]
fn singular_stage_rates_are_reported() {
    let r = PartialRates {
        mu_l: 1.0,
        mu_t: 2.0,
        mu_e: 2.0,
    };
    assert!(matches!(maoi_partial(&r, 0.3, 0.5), Err(Error::Singularity(_))));
    let nudged = maoi_partial_with_fallback(&r, 0.3, 0.5).unwrap().maoi;
    let near = maoi_partial(
        &PartialRates {
            mu_e: 2.0 * (1.0 + 1e-6),
            ..r
        },
        0.3,
        0.5,
    )
    .unwrap()
    .maoi;
    assert_eq!(nudged, near);
}

#[test]
fn partial_form_rejects_pure_ratios() {
    let r = PartialRates {
        mu_l: 1.0,
        mu_t: 2.0,
        mu_e: 3.0,
    };
    assert_eq!(maoi_partial(&r, 0.3, 0.0).unwrap_err(), Error::NotPartial(0.0));
    assert_eq!(maoi_partial(&r, 0.3, 1.0).unwrap_err(), Error::NotPartial(1.0));
}

#[test]
fn unstable_inputs_name_the_queue() {
    let r = PartialRates {
        mu_l: 0.5,
        mu_t: 2.0,
        mu_e: 3.0,
    };
    match maoi_partial(&r, 1.0, 0.4) {
        Err(Error::Instability { constraint, .. }) => assert!(constraint.contains("local")),
        other => panic!("expected instability, got {other:?}"),
    }
}

proptest! {
    #[test]
    fn partial_age_exceeds_the_generation_gap((r, beta, xi) in stable_partial()) {
        prop_assume!((r.mu_t - r.mu_e).abs() > 1e-3);
        let m = maoi_partial(&r, xi, beta).unwrap().maoi;
        prop_assert!(m > 1.0 / xi, "maoi {m} below 1/xi {}", 1.0 / xi);
    }
}
