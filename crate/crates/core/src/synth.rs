//! Seeded synthetic trade tapes and the frequency-versus-value weighting
//! contrast.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Pareto};
use serde::{Deserialize, Serialize};

use crate::error::{StatsError, SynthError};
use crate::moments::{freq_moment, return_moment, return_series, ReturnForm};
use crate::tape::{ResolvedWindow, TradeTape, WindowSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PriceModel {
    Constant {
        price: f64,
    },
    /// `pᵢ = pᵢ₋₁ · exp(s·zᵢ)`, `zᵢ ~ N(0, 1)`
    Walk {
        start: f64,
        log_vol: f64,
    },
    /// `pᵢ = base · (1 + amplitude · sin(2πi / period))`
    Cycle {
        base: f64,
        amplitude: f64,
        period: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeModel {
    Constant {
        volume: f64,
    },
    /// Pareto with the given scale (minimum) and tail shape.
    HeavyTail {
        scale: f64,
        shape: f64,
    },
    /// Every trade has volume `base` except the one at `position`.
    OneWhale {
        base: f64,
        whale: f64,
        position: usize,
    },
}

/// Generator configuration, accepted as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub ticks: usize,
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub price: PriceModel,
    pub volume: VolumeModel,
    /// Volumes are multiplied by `exp(coupling · ln(pᵢ / pᵢ₋₁))`.
    #[serde(default)]
    pub coupling: f64,
}

fn default_epsilon() -> f64 {
    1.0
}

impl GenConfig {
    pub fn from_json(text: &str) -> Result<Self, SynthError> {
        serde_json::from_str(text).map_err(|e| SynthError::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidConfig(msg));
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.ticks == 0 {
            return bad("ticks must be positive".into());
        }
        if !positive(self.epsilon) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !self.coupling.is_finite() {
            return bad("coupling must be finite".into());
        }
        match self.price {
            PriceModel::Constant { price } if !positive(price) => {
                return bad(format!("price {price}"))
            }
            PriceModel::Walk { start, log_vol }
                if !positive(start) || !(log_vol.is_finite() && log_vol >= 0.0) =>
            {
                return bad(format!("walk start {start}, log_vol {log_vol}"))
            }
            PriceModel::Cycle {
                base,
                amplitude,
                period,
            } if !positive(base)
                || amplitude.is_nan()
                || amplitude.abs() >= 1.0
                || !positive(period) =>
            {
                return bad(format!(
                    "cycle base {base}, amplitude {amplitude}, period {period}"
                ))
            }
            _ => {}
        }
        match self.volume {
            VolumeModel::Constant { volume } if !positive(volume) => {
                return bad(format!("volume {volume}"))
            }
            VolumeModel::HeavyTail { scale, shape } if !positive(scale) || !positive(shape) => {
                return bad(format!("heavy tail scale {scale}, shape {shape}"))
            }
            VolumeModel::OneWhale {
                base,
                whale,
                position,
            } if !positive(base) || !positive(whale) || position >= self.ticks => {
                return bad(format!(
                    "whale base {base}, whale {whale}, position {position}"
                ))
            }
            _ => {}
        }
        Ok(())
    }
}

/// Deterministic in `(config, seed)`; values are `price × volume`.
pub fn generate(config: &GenConfig) -> Result<TradeTape, SynthError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.ticks;

    let prices: Vec<f64> = match config.price {
        PriceModel::Constant { price } => vec![price; n],
        PriceModel::Walk { start, log_vol } => {
            let normal = Normal::new(0.0, 1.0).expect("unit normal");
            let mut p = start;
            (0..n)
                .map(|i| {
                    if i > 0 {
                        p *= (log_vol * normal.sample(&mut rng)).exp();
                    }
                    p
                })
                .collect()
        }
        PriceModel::Cycle {
            base,
            amplitude,
            period,
        } => (0..n)
            .map(|i| {
                base * (1.0 + amplitude * (2.0 * std::f64::consts::PI * i as f64 / period).sin())
            })
            .collect(),
    };

    let mut volumes: Vec<f64> = match config.volume {
        VolumeModel::Constant { volume } => vec![volume; n],
        VolumeModel::HeavyTail { scale, shape } => {
            let pareto =
                Pareto::new(scale, shape).map_err(|e| SynthError::InvalidConfig(e.to_string()))?;
            (0..n).map(|_| pareto.sample(&mut rng)).collect()
        }
        VolumeModel::OneWhale {
            base,
            whale,
            position,
        } => {
            let mut v = vec![base; n];
            v[position] = whale;
            v
        }
    };

    if config.coupling != 0.0 {
        for i in 1..n {
            volumes[i] *= (config.coupling * (prices[i] / prices[i - 1]).ln()).exp();
        }
    }
    Ok(TradeTape::from_price_volume(
        &prices,
        &volumes,
        config.epsilon,
    )?)
}

/// Random configuration for property and oracle tests: a log-normal walk with
/// volumes drawn from one of the volume models.
pub fn random_config<R: Rng>(rng: &mut R, ticks: usize) -> GenConfig {
    let price = PriceModel::Walk {
        start: rng.random_range(0.5..200.0),
        log_vol: rng.random_range(0.005..0.2),
    };
    let volume = match rng.random_range(0..3) {
        0 => VolumeModel::Constant {
            volume: rng.random_range(1.0..1000.0),
        },
        1 => VolumeModel::HeavyTail {
            scale: rng.random_range(1.0..100.0),
            shape: rng.random_range(1.5..4.0),
        },
        _ => VolumeModel::HeavyTail {
            scale: rng.random_range(0.1..10.0),
            shape: rng.random_range(2.5..6.0),
        },
    };
    GenConfig {
        ticks,
        seed: rng.random(),
        epsilon: 1.0,
        price,
        volume,
        coupling: if rng.random_bool(0.5) {
            rng.random_range(-3.0..3.0)
        } else {
            0.0
        },
    }
}

/// Tape of `small_count` trades of value `small_value` with unit return,
/// followed by one trade of value `whale_value` with return `whale_return`,
/// and the lag-1 window covering all of them.
pub fn whale_tape(
    small_count: usize,
    small_value: f64,
    whale_value: f64,
    whale_return: f64,
) -> Result<(TradeTape, WindowSpec), SynthError> {
    if small_count == 0 || !(small_value > 0.0 && whale_value > 0.0 && whale_return > 0.0) {
        return Err(SynthError::InvalidConfig(
            "whale tape needs positive sizes".into(),
        ));
    }
    let base_price = 1.0;
    let mut prices = vec![base_price; small_count + 1];
    let mut volumes = vec![small_value / base_price; small_count + 1];
    let whale_price = base_price * whale_return;
    prices.push(whale_price);
    volumes.push(whale_value / whale_price);
    let tape = TradeTape::from_price_volume(&prices, &volumes, 1.0)?;
    Ok((tape, WindowSpec::new(1, small_count + 1)))
}

/// Plain average of returns against the value-weighted average return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightingContrast {
    pub frequency_mean: f64,
    pub vawar: f64,
    /// `vawar - frequency_mean`
    pub gap: f64,
}

pub fn weighting_contrast(w: &ResolvedWindow<'_>) -> Result<WeightingContrast, StatsError> {
    let frequency_mean = freq_moment(&return_series(w, ReturnForm::Ratio), 1)?;
    let vawar = return_moment(w, 1)?;
    Ok(WeightingContrast {
        frequency_mean,
        vawar,
        gap: vawar - frequency_mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::LagSpec;

    fn config(price: PriceModel, volume: VolumeModel, ticks: usize) -> GenConfig {
        GenConfig {
            ticks,
            seed: 7,
            epsilon: 1.0,
            price,
            volume,
            coupling: 0.0,
        }
    }

    #[test]
    fn constant_tape() {
        let tape = generate(&config(
            PriceModel::Constant { price: 2.0 },
            VolumeModel::Constant { volume: 10.0 },
            8,
        ))
        .unwrap();
        assert_eq!(tape.len(), 8);
        assert!(tape
            .ticks()
            .iter()
            .all(|t| t.price == 2.0 && t.volume == 10.0 && t.value == 20.0));
    }

    #[test]
    fn deterministic_under_seed() {
        let cfg = config(
            PriceModel::Walk {
                start: 10.0,
                log_vol: 0.05,
            },
            VolumeModel::HeavyTail {
                scale: 1.0,
                shape: 2.0,
            },
            50,
        );
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 8;
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn flat_walk_is_constant() {
        let tape = generate(&config(
            PriceModel::Walk {
                start: 3.0,
                log_vol: 0.0,
            },
            VolumeModel::Constant { volume: 1.0 },
            20,
        ))
        .unwrap();
        assert!(tape.ticks().iter().all(|t| t.price == 3.0));
    }

    #[test]
    fn invalid_configs() {
        let bad = config(
            PriceModel::Constant { price: -1.0 },
            VolumeModel::Constant { volume: 1.0 },
            4,
        );
        assert!(matches!(generate(&bad), Err(SynthError::InvalidConfig(_))));
        let bad = config(
            PriceModel::Constant { price: 1.0 },
            VolumeModel::OneWhale {
                base: 1.0,
                whale: 5.0,
                position: 4,
            },
            4,
        );
        assert!(matches!(generate(&bad), Err(SynthError::InvalidConfig(_))));
        assert!(GenConfig::from_json("{\"ticks\": 3}").is_err());
    }

    #[test]
    fn json_config() {
        let cfg = GenConfig::from_json(
            r#"{"ticks": 16, "seed": 3,
                "price": {"kind": "cycle", "base": 10, "amplitude": 0.1, "period": 8},
                "volume": {"kind": "one_whale", "base": 1, "whale": 1000, "position": 5}}"#,
        )
        .unwrap();
        assert_eq!(cfg.epsilon, 1.0);
        let tape = generate(&cfg).unwrap();
        assert_eq!(tape.volume(5), 1000.0);
        assert!((tape.price(2) - 11.0).abs() < 1e-12);
    }

    #[test]
    fn whale_contrast() {
        let (tape, window) = whale_tape(1000, 1.0, 1e9, 1.1).unwrap();
        let w = tape.resolve(window, LagSpec::lag(1)).unwrap();
        let c = weighting_contrast(&w).unwrap();
        assert!((c.frequency_mean - 1001.1 / 1001.0).abs() < 1e-12);
        let expected = (1000.0 + 1e9) / (1000.0 + 1e9 / 1.1);
        assert!((c.vawar - expected).abs() < 1e-12);
        assert!((c.gap - (expected - 1001.1 / 1001.0)).abs() < 1e-12);
    }

    #[test]
    fn uniform_weights_close_the_gap() {
        let tape = generate(&config(
            PriceModel::Constant { price: 5.0 },
            VolumeModel::Constant { volume: 2.0 },
            10,
        ))
        .unwrap();
        let w = tape
            .resolve(WindowSpec::new(2, 6), LagSpec::lag(2))
            .unwrap();
        let c = weighting_contrast(&w).unwrap();
        assert_eq!((c.frequency_mean, c.vawar, c.gap), (1.0, 1.0, 0.0));
    }
}
