//! Return volatility three ways (from return moments, from value moments,
//! from price moments) on tapes where the adjusted-price dispersion is
//! negative, so that the three agree only because the algebra does.

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tradestats::moments::{dispersions, return_volatility, VolatilityRoutes};
use tradestats::synth::{generate, random_config};
use tradestats::{LagSpec, WindowSpec};

pub fn run_example() -> Result<Vec<(f64, VolatilityRoutes)>, Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut found = Vec::new();
    let mut tried = 0;
    while found.len() < 5 && tried < 500 {
        tried += 1;
        let tape = generate(&random_config(&mut rng, 12))?;
        let w = tape.resolve(WindowSpec::new(2, 10), LagSpec::lag(2))?;
        let pa = dispersions(&w).adj_price;
        if pa < 0.0 {
            let v = return_volatility(&w);
            println!(
                "sigma_pa^2 = {pa:+.4e}   sigma_r^2 = {:.12e} / {:.12e} / {:.12e}",
                v.via_moments, v.via_values, v.via_prices
            );
            found.push((pa, v));
        }
    }
    println!(
        "{} of {tried} windows had a negative adjusted-price dispersion",
        found.len()
    );
    Ok(found)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example().map(|_| ())
}
