//! The four-trade reference tape: every single-window statistic for the
//! window of ticks 1..=3 at lag 1.
//!
//! Run with `cargo run --example fixture_a`.

use std::error::Error;

use tradestats::moments::{dispersions, return_volatility, vwap, MomentReport};
use tradestats::{LagSpec, TradeTape, WindowSpec};

pub fn run_example() -> Result<MomentReport, Box<dyn Error>> {
    let tape = TradeTape::from_price_volume(&[2.0, 2.0, 4.0, 2.0], &[10.0, 5.0, 10.0, 5.0], 1.0)?;
    let w = tape.resolve(WindowSpec::new(1, 3), LagSpec::lag(1))?;
    let report = MomentReport::compute(&w, 2)?;

    println!("VWAP                {}", vwap(&w));
    println!("VaWAR (r_1)         {}", report.return_moments[0]);
    println!("r_2                 {}", report.return_moments[1]);
    let vol = return_volatility(&w);
    println!(
        "sigma_r^2           {} (moments) {} (values) {} (prices)",
        vol.via_moments, vol.via_values, vol.via_prices
    );
    let d = dispersions(&w);
    println!(
        "sigma_pa^2          {}   <- negative: not a variance",
        d.adj_price
    );
    Ok(report)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
