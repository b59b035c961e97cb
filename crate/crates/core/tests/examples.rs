//! Runs every example's `run_example` and checks what it reports.

#[path = "../examples/autocorrelation_sweep.rs"]
mod autocorrelation_sweep;
#[path = "../examples/density_approx.rs"]
mod density_approx;
#[path = "../examples/fixture_a.rs"]
mod fixture_a;
#[path = "../examples/simulate_tape.rs"]
mod simulate_tape;
#[path = "../examples/volatility_routes.rs"]
mod volatility_routes;
#[path = "../examples/vwap_vawar.rs"]
mod vwap_vawar;
#[path = "../examples/whale_contrast.rs"]
mod whale_contrast;

#[test]
fn fixture_a_values() {
    let r = fixture_a::run_example().unwrap();
    assert!((r.return_moments[0] - 1.2).abs() < 1e-12);
    assert!((r.sigma_r2 - 0.56).abs() < 1e-12);
    assert!(r.sigma_pa2 < 0.0);
}

#[test]
fn vwap_differs_from_plain_mean_but_stays_in_range() {
    let rows = vwap_vawar::run_example().unwrap();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert!(row.vwap > 0.0 && row.vawar > 0.0);
        assert!((row.vwap / row.plain_mean_price - 1.0).abs() < 0.2);
    }
    assert!(rows.iter().any(|r| r.vawar != r.plain_mean_return));
}

#[test]
fn volatility_routes_agree_with_negative_dispersion() {
    let found = volatility_routes::run_example().unwrap();
    assert_eq!(found.len(), 5);
    for (pa, v) in found {
        assert!(pa < 0.0);
        let scale = v.via_moments.abs().max(1e-18);
        assert!((v.via_values - v.via_moments).abs() <= 1e-9 * scale.max(1e-12));
        assert!((v.via_prices - v.via_moments).abs() <= 1e-9 * scale.max(1e-12));
    }
}

#[test]
fn autocorrelation_recovers_near_the_period() {
    let sweep = autocorrelation_sweep::run_example().unwrap();
    let at = |s: usize| sweep.iter().find(|(x, _)| *x == s).unwrap().1;
    let half = autocorrelation_sweep::PERIOD as usize / 2;
    assert!(at(0) > 0.0);
    assert!(at(half) < at(0));
    assert!(at(2 * half) > at(half));
}

#[test]
fn densities_normalize() {
    let grids = density_approx::run_example().unwrap();
    for g in &grids {
        assert!((g.integral() - 1.0).abs() < 1e-8);
        assert!(
            g.moment_residuals().iter().all(|r| r.abs() < 1e-6),
            "{:?}",
            g.moment_residuals()
        );
    }
}

#[test]
fn whale_dominates_weighted_return() {
    let rows = whale_contrast::run_example().unwrap();
    let (_, big) = rows.last().unwrap();
    assert!((big.frequency_mean - 1.0).abs() < 1e-3);
    assert!((big.vawar - 1.1).abs() < 1e-6);
    assert!(rows.windows(2).all(|w| w[1].1.gap > w[0].1.gap));
}

#[test]
fn simulated_tape_round_trips() {
    let (tape, back) = simulate_tape::run_example().unwrap();
    assert_eq!(tape, back);
    assert_eq!(back.epsilon(), 0.5);
}
