//! Single-window statistics: frequency moments of values and volumes,
//! volume-weighted price moments, adjusted values, value-weighted return
//! moments and return volatility.
//!
//! Prices are divided by the window VWAP and volumes by the mean volume
//! before being raised to powers; results are rescaled afterwards. Every
//! return moment is a ratio of two value sums with the same scale, so the
//! normalization cancels exactly there.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::StatsError;
use crate::tape::ResolvedWindow;

/// Default maximum moment order.
pub const DEFAULT_ORDER_CAP: u32 = 8;

/// `(1/N) Σ xᵢⁿ`.
pub fn freq_moment(xs: &[f64], n: u32) -> Result<f64, StatsError> {
    if xs.is_empty() {
        return Err(StatsError::EmptySeries);
    }
    if n == 0 {
        return Err(StatsError::OrderZero);
    }
    if n > DEFAULT_ORDER_CAP {
        warn!("moment order {n} exceeds the default cap {DEFAULT_ORDER_CAP}");
    }
    let len = xs.len() as f64;
    let scale = xs.iter().map(|x| x.abs()).sum::<f64>() / len;
    if scale == 0.0 || !scale.is_finite() {
        return Ok(xs.iter().map(|x| x.powi(n as i32)).sum::<f64>() / len);
    }
    let sum: f64 = xs.iter().map(|x| (x / scale).powi(n as i32)).sum();
    Ok(scale.powi(n as i32) * sum / len)
}

/// Normalized window data shared by all single-window estimators.
#[derive(Debug, Clone)]
pub(crate) struct WindowKernel {
    /// Price scale (window VWAP).
    pub price_scale: f64,
    /// Volume scale (mean window volume).
    pub volume_scale: f64,
    pub values: Vec<f64>,
    pub adj_values: Vec<f64>,
    pub volumes: Vec<f64>,
}

impl WindowKernel {
    pub fn new(w: &ResolvedWindow<'_>) -> Self {
        let n = w.count() as f64;
        let total_volume: f64 = w.volumes().sum();
        let total_value: f64 = w.values().sum();
        let price_scale = total_value / total_volume;
        let volume_scale = total_volume / n;
        Self::with_scales(w, price_scale, volume_scale)
    }

    pub fn with_scales(w: &ResolvedWindow<'_>, price_scale: f64, volume_scale: f64) -> Self {
        let value_scale = price_scale * volume_scale;
        let volumes: Vec<f64> = w.volumes().map(|u| u / volume_scale).collect();
        let values = w.values().map(|c| c / value_scale).collect();
        let adj_values = w
            .lagged_prices()
            .zip(&volumes)
            .map(|(p, u)| p / price_scale * u)
            .collect();
        WindowKernel {
            price_scale,
            volume_scale,
            values,
            adj_values,
            volumes,
        }
    }

    pub fn len(&self) -> f64 {
        self.values.len() as f64
    }

    pub fn value_scale(&self) -> f64 {
        self.price_scale * self.volume_scale
    }

    /// Normalized frequency moments: Ĉ(n), Ĉa(n), Û(n).
    pub fn norm_value(&self, n: u32) -> f64 {
        power_sum(&self.values, n) / self.len()
    }

    pub fn norm_adj_value(&self, n: u32) -> f64 {
        power_sum(&self.adj_values, n) / self.len()
    }

    pub fn norm_volume(&self, n: u32) -> f64 {
        power_sum(&self.volumes, n) / self.len()
    }

    pub fn value_moment(&self, n: u32) -> f64 {
        self.value_scale().powi(n as i32) * self.norm_value(n)
    }

    pub fn adj_value_moment(&self, n: u32) -> f64 {
        self.value_scale().powi(n as i32) * self.norm_adj_value(n)
    }

    pub fn volume_moment(&self, n: u32) -> f64 {
        self.volume_scale.powi(n as i32) * self.norm_volume(n)
    }

    pub fn price_moment(&self, n: u32) -> f64 {
        self.price_scale.powi(n as i32) * power_sum(&self.values, n) / power_sum(&self.volumes, n)
    }

    pub fn adj_price_moment(&self, n: u32) -> f64 {
        self.price_scale.powi(n as i32) * power_sum(&self.adj_values, n)
            / power_sum(&self.volumes, n)
    }

    pub fn return_moment(&self, n: u32) -> f64 {
        power_sum(&self.values, n) / power_sum(&self.adj_values, n)
    }

    pub fn volatility(&self) -> VolatilityRoutes {
        let r1 = self.return_moment(1);
        let r2 = self.return_moment(2);
        let via_moments = r2 - r1 * r1;

        // Value route in normalized units; the formula is homogeneous of degree 0.
        let (c1, c2) = (self.norm_value(1), self.norm_value(2));
        let (ca1, ca2) = (self.norm_adj_value(1), self.norm_adj_value(2));
        let s_c = c2 - c1 * c1;
        let s_ca = ca2 - ca1 * ca1;
        let via_values = (s_c * ca1 * ca1 - s_ca * c1 * c1) / (ca1 * ca1 * ca2);

        // Price route, prices in units of the window VWAP.
        let (u1, u2) = (self.norm_volume(1), self.norm_volume(2));
        let (p1, p2) = (c1 / u1, c2 / u2);
        let (pa1, pa2) = (ca1 / u1, ca2 / u2);
        let s_p = p2 - p1 * p1;
        let s_pa = pa2 - pa1 * pa1;
        let via_prices = (s_p * pa1 * pa1 - s_pa * p1 * p1) / (pa1 * pa1 * pa2);

        VolatilityRoutes {
            via_moments,
            via_values,
            via_prices,
        }
    }

    pub fn dispersions(&self) -> Dispersions {
        let k = self.value_scale();
        let v = self.volume_scale;
        let ps = self.price_scale;
        let (c1, c2) = (self.norm_value(1), self.norm_value(2));
        let (ca1, ca2) = (self.norm_adj_value(1), self.norm_adj_value(2));
        let (u1, u2) = (self.norm_volume(1), self.norm_volume(2));
        let (p1, p2) = (c1 / u1, c2 / u2);
        let (pa1, pa2) = (ca1 / u1, ca2 / u2);
        Dispersions {
            value: k * k * (c2 - c1 * c1),
            adj_value: k * k * (ca2 - ca1 * ca1),
            volume: v * v * (u2 - u1 * u1),
            price: ps * ps * (p2 - p1 * p1),
            adj_price: ps * ps * (pa2 - pa1 * pa1),
        }
    }
}

pub(crate) fn power_sum(xs: &[f64], n: u32) -> f64 {
    xs.iter().map(|x| x.powi(n as i32)).sum()
}

fn check_order(w: &ResolvedWindow<'_>, n: u32) -> Result<(), StatsError> {
    if n == 0 {
        return Err(StatsError::OrderZero);
    }
    if n > DEFAULT_ORDER_CAP {
        warn!("moment order {n} exceeds the default cap {DEFAULT_ORDER_CAP}");
    }
    if n as usize > w.count() {
        warn!("moment order {n} exceeds the window size {}", w.count());
    }
    Ok(())
}

/// Value moment `C(t;n) = (1/N) Σ Cⁿ(tᵢ)`.
pub fn value_moment(w: &ResolvedWindow<'_>, n: u32) -> Result<f64, StatsError> {
    check_order(w, n)?;
    Ok(WindowKernel::new(w).value_moment(n))
}

/// Volume moment `U(t;n) = (1/N) Σ Uⁿ(tᵢ)`.
pub fn volume_moment(w: &ResolvedWindow<'_>, n: u32) -> Result<f64, StatsError> {
    check_order(w, n)?;
    Ok(WindowKernel::new(w).volume_moment(n))
}

/// Market-based price moment `Σ pⁿUⁿ / Σ Uⁿ`; `n = 1` is the VWAP.
pub fn price_moment(w: &ResolvedWindow<'_>, n: u32) -> Result<f64, StatsError> {
    check_order(w, n)?;
    Ok(WindowKernel::new(w).price_moment(n))
}

/// Volume-weighted average price of the window.
pub fn vwap(w: &ResolvedWindow<'_>) -> f64 {
    WindowKernel::new(w).price_scale
}

/// Adjusted values `p(tᵢ - τ)·U(tᵢ)` for each tick of the window.
pub fn adjusted_value_series(w: &ResolvedWindow<'_>) -> Vec<f64> {
    w.lagged_prices()
        .zip(w.volumes())
        .map(|(p, u)| p * u)
        .collect()
}

/// Order-`n` moments of the adjusted value and of the lagged price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustedMoments {
    /// `C_a(t,τ;n) = (1/N) Σ C_aⁿ(tᵢ,τ)`
    pub value: f64,
    /// `p_a(t,τ;n) = Σ pⁿ(tᵢ-τ)Uⁿ(tᵢ) / Σ Uⁿ(tᵢ)`
    pub price: f64,
}

pub fn adjusted_moments(w: &ResolvedWindow<'_>, n: u32) -> Result<AdjustedMoments, StatsError> {
    check_order(w, n)?;
    let k = WindowKernel::new(w);
    Ok(AdjustedMoments {
        value: k.adj_value_moment(n),
        price: k.adj_price_moment(n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnForm {
    /// `p(tᵢ) / p(tᵢ - τ)`
    Ratio,
    /// ratio minus one
    Conventional,
    /// `ln p(tᵢ) - ln p(tᵢ - τ)`
    Log,
}

pub fn return_series(w: &ResolvedWindow<'_>, form: ReturnForm) -> Vec<f64> {
    w.prices()
        .zip(w.lagged_prices())
        .map(|(p, prev)| match form {
            ReturnForm::Ratio => p / prev,
            ReturnForm::Conventional => p / prev - 1.0,
            ReturnForm::Log => p.ln() - prev.ln(),
        })
        .collect()
}

/// Value-weighted return moment `r(t,τ;n) = C(t;n) / C_a(t,τ;n)`.
/// For `n = 1` this is the value weighted average return (VaWAR).
pub fn return_moment(w: &ResolvedWindow<'_>, n: u32) -> Result<f64, StatsError> {
    check_order(w, n)?;
    Ok(WindowKernel::new(w).return_moment(n))
}

/// Return volatility computed from return moments, from value dispersions and
/// from price dispersions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolatilityRoutes {
    pub via_moments: f64,
    pub via_values: f64,
    pub via_prices: f64,
}

impl VolatilityRoutes {
    pub fn sigma_r2(&self) -> f64 {
        self.via_moments
    }
}

pub fn return_volatility(w: &ResolvedWindow<'_>) -> VolatilityRoutes {
    WindowKernel::new(w).volatility()
}

/// Second moment minus squared first moment for each series. The price
/// entries use volume-power weights that change with the order, so they can
/// be negative; they are never clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersions {
    pub value: f64,
    pub adj_value: f64,
    pub volume: f64,
    pub price: f64,
    pub adj_price: f64,
}

pub fn dispersions(w: &ResolvedWindow<'_>) -> Dispersions {
    WindowKernel::new(w).dispersions()
}

/// All order-`n` statistics of one window, `n = 1..=order_max`.
///
/// Arrays are indexed by order starting at order 1 (element 0 is `n = 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub start: usize,
    pub count: usize,
    pub lag: usize,
    pub order_max: u32,
    #[serde(rename = "C_n")]
    pub value_moments: Vec<f64>,
    #[serde(rename = "U_n")]
    pub volume_moments: Vec<f64>,
    #[serde(rename = "p_n")]
    pub price_moments: Vec<f64>,
    #[serde(rename = "Ca_n")]
    pub adj_value_moments: Vec<f64>,
    #[serde(rename = "pa_n")]
    pub adj_price_moments: Vec<f64>,
    #[serde(rename = "r_n")]
    pub return_moments: Vec<f64>,
    #[serde(rename = "sigma_C2")]
    pub sigma_c2: f64,
    #[serde(rename = "sigma_Ca2")]
    pub sigma_ca2: f64,
    #[serde(rename = "sigma_U2")]
    pub sigma_u2: f64,
    #[serde(rename = "sigma_p2")]
    pub sigma_p2: f64,
    #[serde(rename = "sigma_pa2")]
    pub sigma_pa2: f64,
    #[serde(rename = "sigma_r2")]
    pub sigma_r2: f64,
}

impl MomentReport {
    pub fn compute(w: &ResolvedWindow<'_>, order_max: u32) -> Result<Self, StatsError> {
        check_order(w, order_max)?;
        let k = WindowKernel::new(w);
        let orders = 1..=order_max;
        let d = k.dispersions();
        Ok(MomentReport {
            start: w.start(),
            count: w.count(),
            lag: w.lag(),
            order_max,
            value_moments: orders.clone().map(|n| k.value_moment(n)).collect(),
            volume_moments: orders.clone().map(|n| k.volume_moment(n)).collect(),
            price_moments: orders.clone().map(|n| k.price_moment(n)).collect(),
            adj_value_moments: orders.clone().map(|n| k.adj_value_moment(n)).collect(),
            adj_price_moments: orders.clone().map(|n| k.adj_price_moment(n)).collect(),
            return_moments: orders.map(|n| k.return_moment(n)).collect(),
            sigma_c2: d.value,
            sigma_ca2: d.adj_value,
            sigma_u2: d.volume,
            sigma_p2: d.price,
            sigma_pa2: d.adj_price,
            sigma_r2: k.volatility().sigma_r2(),
        })
    }

    /// CSV header for [`MomentReport::csv_row`] at a given maximum order.
    pub fn csv_header(order_max: u32) -> Vec<String> {
        let mut h: Vec<String> = ["start", "count", "lag"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for key in ["C", "U", "p", "Ca", "pa", "r"] {
            h.extend((1..=order_max).map(|n| format!("{key}_{n}")));
        }
        h.extend(
            [
                "sigma_C2",
                "sigma_Ca2",
                "sigma_U2",
                "sigma_p2",
                "sigma_pa2",
                "sigma_r2",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        h
    }

    pub fn csv_row(&self) -> Vec<String> {
        let mut row = vec![
            self.start.to_string(),
            self.count.to_string(),
            self.lag.to_string(),
        ];
        for series in [
            &self.value_moments,
            &self.volume_moments,
            &self.price_moments,
            &self.adj_value_moments,
            &self.adj_price_moments,
            &self.return_moments,
        ] {
            row.extend(series.iter().map(|x| crate::tape::fmt_f64(*x)));
        }
        row.extend(
            [
                self.sigma_c2,
                self.sigma_ca2,
                self.sigma_u2,
                self.sigma_p2,
                self.sigma_pa2,
                self.sigma_r2,
            ]
            .iter()
            .map(|x| crate::tape::fmt_f64(*x)),
        );
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{LagSpec, TradeTape, WindowSpec};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    fn fixture_a() -> TradeTape {
        TradeTape::from_price_volume(&[2.0, 2.0, 4.0, 2.0], &[10.0, 5.0, 10.0, 5.0], 1.0).unwrap()
    }

    fn constant(price: f64, volume: f64, len: usize) -> TradeTape {
        TradeTape::from_price_volume(&vec![price; len], &vec![volume; len], 1.0).unwrap()
    }

    #[test]
    fn freq_moment_examples() {
        assert_eq!(freq_moment(&[10.0, 40.0, 10.0], 1).unwrap(), 20.0);
        assert!(rel(freq_moment(&[5.0, 10.0, 5.0], 2).unwrap(), 50.0) < 1e-15);
        assert_eq!(freq_moment(&[3.5; 7], 1).unwrap(), 3.5);
        assert!(matches!(freq_moment(&[], 1), Err(StatsError::EmptySeries)));
        assert!(matches!(freq_moment(&[1.0], 0), Err(StatsError::OrderZero)));
    }

    #[test]
    fn fixture_a_window_values() {
        let tape = fixture_a();
        let w = tape
            .resolve(WindowSpec::new(1, 3), LagSpec::lag(1))
            .unwrap();
        assert_eq!(adjusted_value_series(&w), vec![10.0, 20.0, 20.0]);
        assert_eq!(return_series(&w, ReturnForm::Ratio), vec![1.0, 2.0, 0.5]);
        assert_eq!(
            return_series(&w, ReturnForm::Conventional),
            vec![0.0, 1.0, -0.5]
        );
        assert!(rel(price_moment(&w, 1).unwrap(), 3.0) < 1e-15);
        assert!(rel(price_moment(&w, 2).unwrap(), 12.0) < 1e-15);
        let a1 = adjusted_moments(&w, 1).unwrap();
        let a2 = adjusted_moments(&w, 2).unwrap();
        assert!(rel(a1.value, 50.0 / 3.0) < 1e-15 && rel(a1.price, 2.5) < 1e-15);
        assert!(rel(a2.value, 300.0) < 1e-15 && rel(a2.price, 6.0) < 1e-15);
        assert!(rel(return_moment(&w, 1).unwrap(), 1.2) < 1e-15);
        assert!(rel(return_moment(&w, 2).unwrap(), 2.0) < 1e-15);
    }

    #[test]
    fn fixture_a_volatility_and_dispersions() {
        let tape = fixture_a();
        let w = tape
            .resolve(WindowSpec::new(1, 3), LagSpec::lag(1))
            .unwrap();
        let v = return_volatility(&w);
        for x in [v.via_moments, v.via_values, v.via_prices] {
            assert!(rel(x, 0.56) < 1e-13, "{x}");
        }
        let d = dispersions(&w);
        assert!(rel(d.value, 200.0) < 1e-13);
        assert!(rel(d.adj_value, 200.0 / 9.0) < 1e-13);
        assert!(rel(d.volume, 50.0 / 9.0) < 1e-13);
        assert!(rel(d.price, 3.0) < 1e-13);
        assert!(rel(d.adj_price, -0.25) < 1e-13);
        assert!(d.adj_price < 0.0);
    }

    #[test]
    fn constant_tapes() {
        let tape = constant(2.5, 4.0, 12);
        let w = tape
            .resolve(WindowSpec::new(3, 6), LagSpec::lag(2))
            .unwrap();
        for n in 1..=5 {
            assert!(rel(price_moment(&w, n).unwrap(), 2.5f64.powi(n as i32)) < 1e-14);
            assert!(
                rel(
                    adjusted_moments(&w, n).unwrap().price,
                    2.5f64.powi(n as i32)
                ) < 1e-14
            );
            assert!(rel(return_moment(&w, n).unwrap(), 1.0) < 1e-15);
        }
        assert_eq!(adjusted_value_series(&w), vec![10.0; 6]);
        assert!(return_series(&w, ReturnForm::Log).iter().all(|&r| r == 0.0));
        let v = return_volatility(&w);
        assert!(
            v.via_moments.abs() < 1e-15 && v.via_values.abs() < 1e-15 && v.via_prices.abs() < 1e-15
        );
        let d = dispersions(&w);
        for x in [d.value, d.adj_value, d.volume, d.price, d.adj_price] {
            assert!(x.abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn repeated_trade_return_powers() {
        let tape = TradeTape::from_price_volume(&[2.0, 2.0, 3.0, 3.0], &[4.0, 4.0, 4.0, 4.0], 1.0)
            .unwrap();
        let w = tape
            .resolve(WindowSpec::new(2, 2), LagSpec::lag(2))
            .unwrap();
        for n in 1..=6 {
            assert!(rel(return_moment(&w, n).unwrap(), 1.5f64.powi(n as i32)) < 1e-14);
        }
    }

    #[test]
    fn report_matches_individual_ops() {
        let tape = fixture_a();
        let w = tape
            .resolve(WindowSpec::new(1, 3), LagSpec::lag(1))
            .unwrap();
        let r = MomentReport::compute(&w, 3).unwrap();
        assert_eq!(r.return_moments.len(), 3);
        assert!(rel(r.sigma_r2, 0.56) < 1e-13);
        assert!(rel(r.price_moments[0], 3.0) < 1e-15);
        for n in 0..3 {
            assert!(rel(r.value_moments[n], r.price_moments[n] * r.volume_moments[n]) < 1e-12);
            assert!(
                rel(
                    r.adj_value_moments[n],
                    r.adj_price_moments[n] * r.volume_moments[n]
                ) < 1e-12
            );
        }
        assert_eq!(MomentReport::csv_header(3).len(), r.csv_row().len());
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("r_n").is_some() && json.get("sigma_pa2").is_some());
    }
}
