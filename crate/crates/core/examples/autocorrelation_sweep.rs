//! Return autocorrelation against the shift between two windows, on a tape
//! whose prices follow a slow cycle. The correlation rises again near
//! multiples of the period.

use std::error::Error;

use tradestats::correlations::{return_autocorr, PairedWindows};
use tradestats::synth::{generate, GenConfig, PriceModel, VolumeModel};
use tradestats::WindowSpec;

pub const PERIOD: f64 = 40.0;

pub fn run_example() -> Result<Vec<(usize, f64)>, Box<dyn Error>> {
    let tape = generate(&GenConfig {
        ticks: 600,
        seed: 9,
        epsilon: 1.0,
        price: PriceModel::Cycle {
            base: 50.0,
            amplitude: 0.2,
            period: PERIOD,
        },
        volume: VolumeModel::HeavyTail {
            scale: 1.0,
            shape: 3.0,
        },
        coupling: 0.0,
    })?;
    let window = WindowSpec::new(200, 300);
    let mut sweep = Vec::new();
    for shift in (0..=120).step_by(10) {
        let pair = PairedWindows::from_shift(&tape, window, 5, 5, shift)?;
        let routes = return_autocorr(&pair);
        println!("shift {shift:>3}  corr_r {:+.6e}", routes.value());
        sweep.push((shift, routes.value()));
    }
    Ok(sweep)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
