use lps_core::analytic::{
    egalitarian_loss, erlang_b, limited_ps_probs, truncate_unlimited, unlimited_ps_head,
    unlimited_ps_prob, zero_inflated_fcfd_probs, ServiceRateProfile,
};
use lps_core::stochastic::ArrivalRates;
use proptest::prelude::*;

fn profile_from(raw: &[f64]) -> ServiceRateProfile {
    let mut c = vec![1.0];
    c.extend(raw.iter().skip(1).copied());
    ServiceRateProfile::new(c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn limited_distribution_is_normalized(
        n in 1usize..25,
        lambdas in prop::collection::vec(0.0f64..20.0, 25),
        c in prop::collection::vec(0.05f64..2.0, 25),
        b in 0.05f64..3.0,
    ) {
        let rates = ArrivalRates::new(lambdas[..=n].to_vec()).unwrap();
        let profile = profile_from(&c[..n]);
        let d = limited_ps_probs(n, &rates, b, &profile).unwrap();
        prop_assert_eq!(d.p.len(), n + 1);
        prop_assert!(d.p.iter().all(|p| (0.0..=1.0).contains(p)));
        prop_assert!((d.p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn truncating_the_unlimited_twin_gives_the_limited_system(
        n in 1usize..15,
        lambda in 0.01f64..8.0,
        c in prop::collection::vec(0.1f64..2.0, 15),
    ) {
        let rates = ArrivalRates::constant(n, lambda).unwrap();
        let profile = profile_from(&c[..n]);
        let direct = limited_ps_probs(n, &rates, 1.0, &profile).unwrap();
        let head = unlimited_ps_head(&rates, 1.0, &profile).unwrap();
        let via_twin = truncate_unlimited(&head).unwrap();
        for (a, b) in direct.p.iter().zip(&via_twin.p) {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn unlimited_tail_sums_to_top_level(n in 1usize..8, lambda in 0.05f64..4.0) {
        let rates = ArrivalRates::constant(n, lambda).unwrap();
        let profile = ServiceRateProfile::egalitarian(n).unwrap();
        let top = limited_ps_probs(n, &rates, 1.0, &profile).unwrap().loss();
        let mut tail = 0.0;
        let mut i = n;
        loop {
            let p = unlimited_ps_prob(&rates, 1.0, &profile, i).unwrap();
            tail += p;
            i += 1;
            if p < 1e-18 && i > n + 10 {
                break;
            }
        }
        prop_assert!((tail - top).abs() < 1e-12, "{tail} vs {top}");
    }

    #[test]
    fn egalitarian_loss_is_a_probability_increasing_in_load(
        n in 1usize..30,
        lambda in 0.01f64..15.0,
    ) {
        let p = egalitarian_loss(n, lambda, 1.0).unwrap();
        let q = egalitarian_loss(n, lambda * 1.1, 1.0).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        prop_assert!(q >= p);
    }

    #[test]
    fn exponential_fcfd_with_unit_rates_is_erlang(n in 1usize..20, lambda in 0.01f64..10.0) {
        let rates = ArrivalRates::constant(n, lambda).unwrap();
        let unit = ServiceRateProfile::unit(n).unwrap();
        let loss = zero_inflated_fcfd_probs(n, &rates, 1.0, 1.0, &unit).unwrap().loss();
        let b = erlang_b(n, lambda).unwrap();
        prop_assert!((loss - b).abs() < 1e-12, "{loss} vs {b}");
    }
}

#[test]
fn heavy_load_stays_finite() {
    // n rho = 800 is beyond the range of exp()
    let p = egalitarian_loss(800, 1.0, 1.0).unwrap();
    assert!(p.is_finite() && p > 0.0 && p < 1.0, "{p}");
    let rates = ArrivalRates::constant(800, 1.0).unwrap();
    let d = limited_ps_probs(
        800,
        &rates,
        1.0,
        &ServiceRateProfile::egalitarian(800).unwrap(),
    )
    .unwrap();
    assert!((d.loss() - p).abs() < 1e-12);
}

#[test]
fn zero_input_keeps_system_empty() {
    let rates = ArrivalRates::constant(3, 0.0).unwrap();
    let d = limited_ps_probs(3, &rates, 1.0, &ServiceRateProfile::egalitarian(3).unwrap()).unwrap();
    assert_eq!(d.p, vec![1.0, 0.0, 0.0, 0.0]);
}
