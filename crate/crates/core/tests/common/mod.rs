//! Shared helpers for the integration tests: seeded random cases and
//! scale-aware comparisons.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tradestats::oracle::OracleLags;
use tradestats::synth::{generate, random_config, GenConfig, PriceModel, VolumeModel};
use tradestats::{TradeTape, WindowSpec};

pub const FIXTURE_A_CSV: &str = "time,price,volume\n0,2,10\n1,2,5\n2,4,10\n3,2,5\n";

pub fn fixture_a() -> TradeTape {
    TradeTape::from_price_volume(&[2.0, 2.0, 4.0, 2.0], &[10.0, 5.0, 10.0, 5.0], 1.0).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One randomized (tape, window, lags) case. The second window of a pair
/// starts `lags.j` ticks before the first.
#[derive(Debug, Clone)]
pub struct Case {
    pub seed: u64,
    pub config: GenConfig,
    pub tape: TradeTape,
    pub window: WindowSpec,
    pub lags: OracleLags,
}

/// Builds the case for `seed` with window length `count`.
pub fn case_with_count(seed: u64, count: usize) -> Case {
    let mut r = rng(seed);
    let l1 = r.random_range(1..=4);
    let l2 = r.random_range(1..=4);
    let j = r.random_range(0..=8);
    let start = l1.max(j + l2) + r.random_range(0..3);
    let ticks = start + count + r.random_range(0..3);
    let mut config = random_config(&mut r, ticks);
    match r.random_range(0..6) {
        0 => {
            config.price = PriceModel::Cycle {
                base: r.random_range(1.0..50.0),
                amplitude: r.random_range(0.01..0.5),
                period: r.random_range(3.0..20.0),
            }
        }
        1 => {
            config.volume = VolumeModel::OneWhale {
                base: r.random_range(1.0..10.0),
                whale: r.random_range(1e3..1e6),
                position: r.random_range(0..ticks),
            }
        }
        _ => {}
    }
    let tape = generate(&config).unwrap();
    Case {
        seed,
        config,
        tape,
        window: WindowSpec::new(start, count),
        lags: OracleLags { l1, l2, j },
    }
}

/// Case for `seed` with a window length drawn from `[2, 64]`.
pub fn random_case(seed: u64) -> Case {
    let count = rng(seed ^ 0x9e37_79b9_7f4a_7c15).random_range(2..=64);
    case_with_count(seed, count)
}

/// `|a - b| / max(|a|, |b|, scale)`: relative difference, measured against
/// `scale` when the compared values come from cancelling terms of that size.
pub fn rel_diff(a: f64, b: f64, scale: f64) -> f64 {
    let denom = a.abs().max(b.abs()).max(scale.abs());
    if denom == 0.0 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

/// Tracks the worst relative difference seen and the case that produced it.
#[derive(Debug, Default)]
pub struct Worst {
    pub value: f64,
    pub label: String,
    pub checks: usize,
}

impl Worst {
    pub fn record(&mut self, diff: f64, label: impl FnOnce() -> String) {
        self.checks += 1;
        if diff > self.value || diff.is_nan() {
            self.value = if diff.is_nan() { f64::INFINITY } else { diff };
            self.label = label();
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.value <= tol
    }
}

use tradestats::correlations::{
    adjprice_volume_sq_corr, paired_expectation, return_price_corr, same_day_two_lag_autocorr,
    CorrelationReport, PairedKind, PairedWindows,
};
use tradestats::moments::{freq_moment, return_series, MomentReport, ReturnForm};
use tradestats::oracle::{oracle, Statistic};
use tradestats::LagSpec;

/// Evaluates `stat` through the library's main path.
pub fn main_path(case: &Case, stat: Statistic) -> f64 {
    use Statistic::*;
    let tape = &case.tape;
    let lags = case.lags;
    let w = tape.resolve(case.window, LagSpec::lag(lags.l1)).unwrap();
    let single = |n: u32| MomentReport::compute(&w, n).unwrap();
    let idx = |n: u32| n as usize - 1;
    let pair = || PairedWindows::from_shift(tape, case.window, lags.l1, lags.l2, lags.j).unwrap();
    let expect = |kind, n, m| paired_expectation(&pair(), kind, n, m).unwrap();
    match stat {
        ValueMoment(n) => single(n).value_moments[idx(n)],
        VolumeMoment(n) => single(n).volume_moments[idx(n)],
        PriceMoment(n) => single(n).price_moments[idx(n)],
        AdjValueMoment(n) => single(n).adj_value_moments[idx(n)],
        AdjPriceMoment(n) => single(n).adj_price_moments[idx(n)],
        ReturnMoment(n) => single(n).return_moments[idx(n)],
        FreqReturnMoment(n) => freq_moment(&return_series(&w, ReturnForm::Ratio), n).unwrap(),
        SigmaC => single(2).sigma_c2,
        SigmaCa => single(2).sigma_ca2,
        SigmaU => single(2).sigma_u2,
        SigmaP => single(2).sigma_p2,
        SigmaPa => single(2).sigma_pa2,
        SigmaR => single(2).sigma_r2,
        CrossValue(n, m) => expect(PairedKind::ValueValue, n, m),
        CrossAdjValue(n, m) => expect(PairedKind::AdjvalueAdjvalue, n, m),
        CrossVolume(n, m) => expect(PairedKind::VolumeVolume, n, m),
        CrossPrice(n, m) => expect(PairedKind::PricePrice, n, m),
        CrossAdjPrice(n, m) => expect(PairedKind::AdjpriceAdjprice, n, m),
        CrossValueVolume(n, m) => expect(PairedKind::ValueVolume, n, m),
        CrossAdjValueVolume(n, m) => expect(PairedKind::AdjvalueVolume, n, m),
        CrossReturn => CorrelationReport::compute(&pair()).cross_return,
        CorrC => CorrelationReport::compute(&pair()).corr_c,
        CorrCa => CorrelationReport::compute(&pair()).corr_ca,
        CorrU => CorrelationReport::compute(&pair()).corr_u,
        CorrP => CorrelationReport::compute(&pair()).corr_p,
        CorrPa => CorrelationReport::compute(&pair()).corr_pa,
        CorrR => CorrelationReport::compute(&pair()).corr_r,
        CorrRU => CorrelationReport::compute(&pair()).corr_ru,
        CorrRP(n, m) => return_price_corr(&pair(), n, m).unwrap().closed_form,
        CorrCaU => CorrelationReport::compute(&pair()).corr_cau,
        CorrPaU2 => adjprice_volume_sq_corr(&w).closed_form,
        SameDayApprox => {
            assert_eq!(lags.j, 0, "same-day statistics need a zero shift");
            same_day_two_lag_autocorr(&w, lags.l1, lags.l2)
                .unwrap()
                .approx
        }
    }
}

/// Size of the terms that cancel inside `stat`, used as the comparison scale.
pub fn cancellation_scale(case: &Case, stat: Statistic) -> f64 {
    use Statistic::*;
    let first = |s| oracle(&case.tape, case.window, case.lags, s).unwrap();
    let second_window = WindowSpec::new(case.window.start - case.lags.j, case.window.count);
    let second = |s| {
        let lags = tradestats::oracle::OracleLags::single(case.lags.l2);
        oracle(&case.tape, second_window, lags, s).unwrap()
    };
    match stat {
        SigmaC => first(ValueMoment(2)),
        SigmaCa => first(AdjValueMoment(2)),
        SigmaU => first(VolumeMoment(2)),
        SigmaP => first(PriceMoment(2)),
        SigmaPa => first(AdjPriceMoment(2)),
        SigmaR => first(ReturnMoment(2)),
        CorrC => first(CrossValue(1, 1)),
        CorrCa => first(CrossAdjValue(1, 1)),
        CorrU => first(CrossVolume(1, 1)),
        CorrP => first(CrossPrice(1, 1)),
        CorrPa => first(CrossAdjPrice(1, 1)),
        CorrR => first(CrossReturn),
        CorrRU => first(ReturnMoment(1)) * second(VolumeMoment(1)),
        CorrRP(n, m) => first(ReturnMoment(n)) * second(PriceMoment(m)),
        CorrCaU => first(CrossAdjValueVolume(1, 1)),
        CorrPaU2 => first(AdjPriceMoment(1)) * first(VolumeMoment(2)),
        _ => 0.0,
    }
}
