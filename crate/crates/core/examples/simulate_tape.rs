//! Generate a tape from a JSON config, write it as CSV, read it back and
//! check that nothing changed. Pass a path to keep the file.

use std::error::Error;

use tradestats::synth::{generate, GenConfig};
use tradestats::tape::{ingest_inferred, ValueColumn};
use tradestats::TradeTape;

pub const CONFIG: &str = r#"{
    "ticks": 50, "seed": 1234, "epsilon": 0.5,
    "price": {"kind": "walk", "start": 12.5, "log_vol": 0.05},
    "volume": {"kind": "one_whale", "base": 3, "whale": 4000, "position": 17},
    "coupling": -2.0
}"#;

pub fn run_example() -> Result<(TradeTape, TradeTape), Box<dyn Error>> {
    let config = GenConfig::from_json(CONFIG)?;
    let tape = generate(&config)?;
    let mut csv = Vec::new();
    tape.write_csv(&mut csv, ValueColumn::WithValue)?;
    let back = ingest_inferred(csv.as_slice(), ValueColumn::WithValue)?;
    println!(
        "{} ticks, epsilon {}, round trip identical: {}",
        back.len(),
        back.epsilon(),
        back == tape
    );
    print!(
        "{}",
        String::from_utf8_lossy(&csv)
            .lines()
            .take(4)
            .collect::<Vec<_>>()
            .join("\n")
    );
    println!("\n...");
    Ok((tape, back))
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    let (tape, _) = run_example()?;
    if let Some(path) = std::env::args().nth(1) {
        tape.write_csv(std::fs::File::create(&path)?, ValueColumn::WithValue)?;
        println!("wrote {path}");
    }
    Ok(())
}
