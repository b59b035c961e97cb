//! A thousand small trades at an unchanged price and one large trade at a 10%
//! gain. Counting trades puts the average gross return near 1; weighting
//! by value puts it near 1.1 once the large trade dominates.

use std::error::Error;

use tradestats::synth::{weighting_contrast, whale_tape, WeightingContrast};
use tradestats::LagSpec;

pub fn run_example() -> Result<Vec<(f64, WeightingContrast)>, Box<dyn Error>> {
    let mut out = Vec::new();
    for whale in [1e2, 1e4, 1e6, 1e9] {
        let (tape, window) = whale_tape(1000, 1.0, whale, 1.1)?;
        let c = weighting_contrast(&tape.resolve(window, LagSpec::lag(1))?)?;
        println!(
            "whale value {whale:>8.0e}: frequency mean {:.6}, value-weighted {:.6}, gap {:+.6}",
            c.frequency_mean, c.vawar, c.gap
        );
        out.push((whale, c));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
