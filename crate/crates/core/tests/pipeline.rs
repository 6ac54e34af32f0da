use colornoise::correlations::h_function;
use colornoise::dynamics::{evolve_series, resolve_rates, Scenario, ScenarioConfig, TimeGrid, Topology};
use colornoise::mc::{compare, estimate_correlations, McConfig};
use colornoise::rtn::dephasing_factor;
use colornoise::spectra::RateDistribution;

fn config(scenario: Scenario, topology: Topology, alpha: f64) -> ScenarioConfig {
    let dist = RateDistribution::with_default_range(alpha).unwrap();
    ScenarioConfig::new(scenario, topology, dist, 8, TimeGrid::uniform(6.0, 25).unwrap(), 7)
}

#[test]
fn explicit_rates_give_the_telegraph_product() {
    let mut c = config(Scenario::FixedCollection, Topology::Separate, 1.0);
    c.fixed_rates = Some(vec![0.5, 3.0]);
    let series = evolve_series(&c).unwrap();
    for (&t, &coeff) in c.time_grid.times().iter().zip(&series.coefficients) {
        let d = dephasing_factor(0.5, 2.0, t) * dephasing_factor(3.0, 2.0, t);
        assert!((coeff - d * d).abs() < 1e-12, "t={t}");
    }
}

#[test]
fn series_points_follow_the_coefficient() {
    for scenario in [Scenario::SingleRandomFluctuator, Scenario::FixedCollection, Scenario::RandomRateCollection] {
        let series = evolve_series(&config(scenario, Topology::Common, 2.0)).unwrap();
        for (p, &c) in series.points.iter().zip(&series.coefficients) {
            assert_eq!(p.negativity, c.abs());
            assert!((p.discord - h_function(c).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn sampled_rates_are_reproducible_and_in_range() {
    let c = config(Scenario::FixedCollection, Topology::Separate, 1.5);
    let a = resolve_rates(&c);
    assert_eq!(a, resolve_rates(&c));
    let b = a.qubit_b.as_ref().unwrap();
    assert_eq!(a.qubit_a.len(), 8);
    assert_ne!(&a.qubit_a, b);
    assert!(a.qubit_a.iter().chain(b).all(|g| (1e-4..=1e4).contains(g)));
}

#[test]
fn config_round_trips_through_serde() {
    let c = config(Scenario::RandomRateCollection, Topology::Separate, 1.0);
    let text = serde_json::to_string(&c).unwrap();
    let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, c);
    assert!(serde_json::from_str::<ScenarioConfig>(&text.replace("[0.0,", "[-1.0,")).is_err());
}

#[test]
fn monte_carlo_agrees_with_the_closed_form() {
    let c = config(Scenario::FixedCollection, Topology::Common, 2.0);
    let analytic = evolve_series(&c).unwrap();
    let mc = estimate_correlations(&McConfig::new(c, 20_000)).unwrap();
    let checks = compare(&analytic, &mc, 4.0).unwrap();
    assert!(checks.iter().all(|p| p.passed()), "{checks:?}");
}
