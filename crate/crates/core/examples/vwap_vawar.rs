//! Volume-weighted average price and value-weighted average return on a
//! synthetic random walk, swept across sliding windows.

use std::error::Error;

use tradestats::moments::{freq_moment, return_moment, return_series, vwap, ReturnForm};
use tradestats::synth::{generate, GenConfig};
use tradestats::{LagSpec, WindowSpec};

pub struct Row {
    pub start: usize,
    pub vwap: f64,
    pub plain_mean_price: f64,
    pub vawar: f64,
    pub plain_mean_return: f64,
}

pub fn run_example() -> Result<Vec<Row>, Box<dyn Error>> {
    let config = GenConfig::from_json(
        r#"{"ticks": 400, "seed": 42,
            "price": {"kind": "walk", "start": 100, "log_vol": 0.01},
            "volume": {"kind": "heavy_tail", "scale": 10, "shape": 1.8},
            "coupling": 1.5}"#,
    )?;
    let tape = generate(&config)?;

    let mut rows = Vec::new();
    println!(
        "{:>5} {:>12} {:>12} {:>12} {:>12}",
        "start", "vwap", "mean price", "vawar", "mean return"
    );
    for start in (5..=300).step_by(59) {
        let w = tape.resolve(WindowSpec::new(start, 100), LagSpec::lag(5))?;
        let prices: Vec<f64> = w.prices().collect();
        let row = Row {
            start,
            vwap: vwap(&w),
            plain_mean_price: freq_moment(&prices, 1)?,
            vawar: return_moment(&w, 1)?,
            plain_mean_return: freq_moment(&return_series(&w, ReturnForm::Ratio), 1)?,
        };
        println!(
            "{:>5} {:>12.6} {:>12.6} {:>12.8} {:>12.8}",
            row.start, row.vwap, row.plain_mean_price, row.vawar, row.plain_mean_return
        );
        rows.push(row);
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
