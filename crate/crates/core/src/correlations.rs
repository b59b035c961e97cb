//! Cross-window product expectations and the correlations built on them:
//! return autocorrelation (value and price forms), return-volume and
//! return-price correlations, and the adjusted-price / squared-volume
//! correlation.
//!
//! A pair couples element `i` of the first window with element `i` of the
//! second, which sits `shift` ticks earlier. Expectations of values, volumes
//! and adjusted values are plain averages; expectations involving returns or
//! prices are weighted exactly as their defining sums state. "Correlation"
//! here means product expectation minus product of means (a covariance-like
//! quantity, not normalized).
//!
//! Every routine evaluates in units where the first window's VWAP and mean
//! volume are 1, then rescales.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::StatsError;
use crate::moments::WindowKernel;
use crate::tape::{fmt_f64, ResolvedWindow, TradeTape, WindowSpec};

/// Two equal-length windows paired element by element.
#[derive(Debug, Clone, Copy)]
pub struct PairedWindows<'a> {
    first: ResolvedWindow<'a>,
    second: ResolvedWindow<'a>,
}

impl<'a> PairedWindows<'a> {
    pub fn new(first: ResolvedWindow<'a>, second: ResolvedWindow<'a>) -> Result<Self, StatsError> {
        if !std::ptr::eq(first.tape(), second.tape()) {
            return Err(StatsError::DifferentTapes);
        }
        if first.count() != second.count() {
            return Err(StatsError::MismatchedWindows(first.count(), second.count()));
        }
        if second.start() > first.start() {
            return Err(StatsError::NegativeShift);
        }
        Ok(PairedWindows { first, second })
    }

    /// First window at `window` with lag `lag1`; second window `shift` ticks
    /// earlier with lag `lag2`.
    pub fn from_shift(
        tape: &'a TradeTape,
        window: WindowSpec,
        lag1: usize,
        lag2: usize,
        shift: usize,
    ) -> Result<Self, StatsError> {
        let first = ResolvedWindow::new(tape, window, lag1)?;
        let start2 = window.start.checked_sub(shift).ok_or(
            crate::error::TapeError::InsufficientHistory {
                start: window.start,
                lag: shift,
            },
        )?;
        let second = ResolvedWindow::new(tape, WindowSpec::new(start2, window.count), lag2)?;
        Self::new(first, second)
    }

    /// A window paired with itself (zero shift, same lag).
    pub fn self_paired(w: ResolvedWindow<'a>) -> Self {
        PairedWindows {
            first: w,
            second: w,
        }
    }

    pub fn first(&self) -> &ResolvedWindow<'a> {
        &self.first
    }

    pub fn second(&self) -> &ResolvedWindow<'a> {
        &self.second
    }

    pub fn shift(&self) -> usize {
        self.first.start() - self.second.start()
    }

    /// The same pair with the two windows swapped (only meaningful for zero shift).
    pub fn swapped(&self) -> Self {
        PairedWindows {
            first: self.second,
            second: self.first,
        }
    }
}

/// Which product expectation [`paired_expectation`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairedKind {
    ValueValue,
    AdjvalueAdjvalue,
    VolumeVolume,
    PricePrice,
    AdjpriceAdjprice,
    ValueVolume,
    AdjvalueVolume,
}

struct PairKernel {
    a: WindowKernel,
    b: WindowKernel,
    /// price ratios of the first window
    ret_a: Vec<f64>,
    /// prices of the second window divided by the price scale
    price_b: Vec<f64>,
    ret_b: Vec<f64>,
}

impl PairKernel {
    fn new(pair: &PairedWindows<'_>) -> Self {
        let a = WindowKernel::new(&pair.first);
        let b = WindowKernel::with_scales(&pair.second, a.price_scale, a.volume_scale);
        let ratios = |w: &ResolvedWindow<'_>| -> Vec<f64> {
            w.prices()
                .zip(w.lagged_prices())
                .map(|(p, q)| p / q)
                .collect()
        };
        let price_b = pair.second.prices().map(|p| p / a.price_scale).collect();
        PairKernel {
            ret_a: ratios(&pair.first),
            ret_b: ratios(&pair.second),
            price_b,
            a,
            b,
        }
    }

    fn n(&self) -> f64 {
        self.a.len()
    }

    fn cross(x: &[f64], n: u32, y: &[f64], m: u32) -> f64 {
        x.iter()
            .zip(y)
            .map(|(a, b)| a.powi(n as i32) * b.powi(m as i32))
            .sum()
    }

    /// Normalized-unit expectation and the scale factor that restores units.
    fn expectation(&self, kind: PairedKind, n: u32, m: u32) -> (f64, f64) {
        let (a, b) = (&self.a, &self.b);
        let k = a.value_scale();
        let v = a.volume_scale;
        let p = a.price_scale;
        let len = self.n();
        let pw = |s: f64, e: u32| s.powi(e as i32);
        match kind {
            PairedKind::ValueValue => (Self::cross(&a.values, n, &b.values, m) / len, pw(k, n + m)),
            PairedKind::AdjvalueAdjvalue => (
                Self::cross(&a.adj_values, n, &b.adj_values, m) / len,
                pw(k, n + m),
            ),
            PairedKind::VolumeVolume => (
                Self::cross(&a.volumes, n, &b.volumes, m) / len,
                pw(v, n + m),
            ),
            PairedKind::ValueVolume => (
                Self::cross(&a.values, n, &b.volumes, m) / len,
                pw(k, n) * pw(v, m),
            ),
            PairedKind::AdjvalueVolume => (
                Self::cross(&a.adj_values, n, &b.volumes, m) / len,
                pw(k, n) * pw(v, m),
            ),
            PairedKind::PricePrice => (
                Self::cross(&a.values, n, &b.values, m) / Self::cross(&a.volumes, n, &b.volumes, m),
                pw(p, n + m),
            ),
            PairedKind::AdjpriceAdjprice => (
                Self::cross(&a.adj_values, n, &b.adj_values, m)
                    / Self::cross(&a.volumes, n, &b.volumes, m),
                pw(p, n + m),
            ),
        }
    }

    fn norm(&self, kind: PairedKind) -> f64 {
        self.expectation(kind, 1, 1).0
    }

    fn autocorr(&self) -> AutocorrRoutes {
        let (a, b) = (&self.a, &self.b);
        let (c1, c2) = (a.norm_value(1), b.norm_value(1));
        let (ca1, ca2) = (a.norm_adj_value(1), b.norm_adj_value(1));
        let (u1, u2) = (a.norm_volume(1), b.norm_volume(1));
        let (r1, r2) = (c1 / ca1, c2 / ca2);

        let c_cross = self.norm(PairedKind::ValueValue);
        let ca_cross = self.norm(PairedKind::AdjvalueAdjvalue);
        let corr_c = c_cross - c1 * c2;
        let corr_ca = ca_cross - ca1 * ca2;
        let value_form = (corr_c - r1 * r2 * corr_ca) / ca_cross;

        let p_cross = self.norm(PairedKind::PricePrice);
        let pa_cross = self.norm(PairedKind::AdjpriceAdjprice);
        let (p1, p2) = (c1 / u1, c2 / u2);
        let (pa1, pa2) = (ca1 / u1, ca2 / u2);
        let corr_p = p_cross - p1 * p2;
        let corr_pa = pa_cross - pa1 * pa2;
        let price_form = (pa1 * pa2 * corr_p - p1 * p2 * corr_pa) / (pa_cross * pa1 * pa2);

        // weighted product expectation of returns, weights C_a·C_a,2
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..a.values.len() {
            let w = a.adj_values[i] * b.adj_values[i];
            num += self.ret_a[i] * self.ret_b[i] * w;
            den += w;
        }
        let weighted = |r: &[f64], wts: &[f64]| -> f64 {
            r.iter().zip(wts).map(|(x, w)| x * w).sum::<f64>() / wts.iter().sum::<f64>()
        };
        let definitional =
            num / den - weighted(&self.ret_a, &a.adj_values) * weighted(&self.ret_b, &b.adj_values);

        AutocorrRoutes {
            value_form,
            price_form,
            definitional,
        }
    }

    fn return_volume(&self) -> ReturnVolumeRoutes {
        let (a, b) = (&self.a, &self.b);
        let v = a.volume_scale;
        let (c1, ca1, u1) = (a.norm_value(1), a.norm_adj_value(1), a.norm_volume(1));
        let u2 = b.norm_volume(1);
        let corr_cu = self.norm(PairedKind::ValueVolume) - c1 * u2;
        let closed_form = corr_cu / ca1;
        let price_form = corr_cu / ((ca1 / u1) * u1);

        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..a.values.len() {
            num += self.ret_a[i] * b.volumes[i] * a.adj_values[i];
            den += a.adj_values[i];
        }
        let r1 = c1 / ca1;
        let definitional = num / den - r1 * u2;
        ReturnVolumeRoutes {
            closed_form: v * closed_form,
            price_form: v * price_form,
            definitional: v * definitional,
        }
    }

    fn return_price(&self, n: u32, m: u32) -> RouteCheck {
        let (a, b) = (&self.a, &self.b);
        let scale = a.price_scale.powi(m as i32);
        // The two correlations below are differences of products that agree
        // to many digits once n, m > 1, so they are formed in double-double.
        let len = self.n();
        let mean = |x: &[f64], k: u32| Dd::sum(x.iter().map(|v| Dd::new(*v).powi(k))) / len;
        let cross = |x: &[f64], y: &[f64]| {
            Dd::sum(
                x.iter()
                    .zip(y)
                    .map(|(u, v)| Dd::new(*u).powi(n) * Dd::new(*v).powi(m)),
            ) / len
        };
        let c_nm = cross(&a.values, &b.values);
        let cau_nm = cross(&a.adj_values, &b.volumes);
        let (cn, ca_n) = (mean(&a.values, n), mean(&a.adj_values, n));
        let (c2m, u2m) = (mean(&b.values, m), mean(&b.volumes, m));
        let r_n = cn / ca_n;
        let p2_m = c2m / u2m;
        let corr_c = c_nm - cn * c2m;
        let corr_cau = cau_nm - ca_n * u2m;
        let closed_form = ((corr_c - r_n * p2_m * corr_cau) / cau_nm).to_f64();
        let (r_n, p2_m) = (r_n.to_f64(), p2_m.to_f64());

        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..a.values.len() {
            let w = a.adj_values[i].powi(n as i32) * b.volumes[i].powi(m as i32);
            num += self.ret_a[i].powi(n as i32) * self.price_b[i].powi(m as i32) * w;
            den += w;
        }
        let definitional = num / den - r_n * p2_m;
        RouteCheck {
            closed_form: scale * closed_form,
            definitional: scale * definitional,
        }
    }
}

/// Product expectation of the given kind at degrees `(n, m)`.
pub fn paired_expectation(
    pair: &PairedWindows<'_>,
    kind: PairedKind,
    n: u32,
    m: u32,
) -> Result<f64, StatsError> {
    if n == 0 || m == 0 {
        return Err(StatsError::OrderZero);
    }
    let (x, scale) = PairKernel::new(pair).expectation(kind, n, m);
    Ok(x * scale)
}

/// Return autocorrelation from trade values, from market-based prices, and
/// from the weighted product of returns directly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AutocorrRoutes {
    pub value_form: f64,
    pub price_form: f64,
    pub definitional: f64,
}

impl AutocorrRoutes {
    pub fn value(&self) -> f64 {
        self.value_form
    }
}

pub fn return_autocorr(pair: &PairedWindows<'_>) -> AutocorrRoutes {
    PairKernel::new(pair).autocorr()
}

/// Same-window autocorrelation between returns at two lags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SameDayAutocorr {
    /// exact value including the adjusted-value correlation term
    pub exact: f64,
    /// `σ_C² / (C_a(t,τ;1)·C_a(t,τ₂;1))`, valid when that term vanishes
    pub approx: f64,
    /// `exact - approx`
    pub residual: f64,
}

pub fn same_day_two_lag_autocorr(
    w: &ResolvedWindow<'_>,
    lag1: usize,
    lag2: usize,
) -> Result<SameDayAutocorr, StatsError> {
    let first = w.with_lag(lag1)?;
    let second = w.with_lag(lag2)?;
    let pair = PairedWindows::new(first, second)?;
    let kernel = PairKernel::new(&pair);
    let exact = kernel.autocorr().value_form;
    let (a, b) = (&kernel.a, &kernel.b);
    let sigma_c = a.norm_value(2) - a.norm_value(1).powi(2);
    let approx = sigma_c / (a.norm_adj_value(1) * b.norm_adj_value(1));
    Ok(SameDayAutocorr {
        exact,
        approx,
        residual: exact - approx,
    })
}

/// A correlation evaluated by a closed form and by its defining expectations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RouteCheck {
    pub closed_form: f64,
    pub definitional: f64,
}

impl RouteCheck {
    pub fn value(&self) -> f64 {
        self.closed_form
    }
}

/// Return-volume correlation: closed form `corr_CU / C_a(t,τ;1)`, the same
/// with `C_a = p_a·U`, and the weighted definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnVolumeRoutes {
    pub closed_form: f64,
    pub price_form: f64,
    pub definitional: f64,
}

impl ReturnVolumeRoutes {
    pub fn value(&self) -> f64 {
        self.closed_form
    }
}

pub fn return_volume_corr(pair: &PairedWindows<'_>) -> ReturnVolumeRoutes {
    PairKernel::new(pair).return_volume()
}

/// Correlation between the `n`-th power of returns in the first window and
/// the `m`-th power of prices in the second.
pub fn return_price_corr(
    pair: &PairedWindows<'_>,
    n: u32,
    m: u32,
) -> Result<RouteCheck, StatsError> {
    if n == 0 || m == 0 {
        return Err(StatsError::OrderZero);
    }
    Ok(PairKernel::new(pair).return_price(n, m))
}

/// Correlation between the lagged price and the squared volume of the same
/// tick: `corr_CaU - p_a(t,τ;1)·σ_U²` against the direct
/// `E[p(tᵢ-τ)U²(tᵢ)] - p_a(t,τ;1)·U(t;2)`.
pub fn adjprice_volume_sq_corr(w: &ResolvedWindow<'_>) -> RouteCheck {
    let k = WindowKernel::new(w);
    let scale = k.price_scale * k.volume_scale * k.volume_scale;
    let len = k.len();
    let (ca1, u1, u2) = (k.norm_adj_value(1), k.norm_volume(1), k.norm_volume(2));
    let pa1 = ca1 / u1;
    let e_cau = PairKernel::cross(&k.adj_values, 1, &k.volumes, 1) / len;
    let corr_cau = e_cau - ca1 * u1;
    let sigma_u = u2 - u1 * u1;
    let closed_form = corr_cau - pa1 * sigma_u;

    let lagged: Vec<f64> = w.lagged_prices().map(|p| p / k.price_scale).collect();
    let e_pu2 = lagged
        .iter()
        .zip(&k.volumes)
        .map(|(p, u)| p * u * u)
        .sum::<f64>()
        / len;
    let definitional = e_pu2 - pa1 * u2;
    RouteCheck {
        closed_form: scale * closed_form,
        definitional: scale * definitional,
    }
}

/// Product expectations and correlations of a pair at degree one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub shift: usize,
    pub lag1: usize,
    pub lag2: usize,
    /// `C(t;t₂)`
    pub cross_value: f64,
    /// `C_a(t,τ;t₂,τ₂)`
    pub cross_adj_value: f64,
    /// `U(t;t₂)`
    pub cross_volume: f64,
    /// `p(t;t₂)`
    pub cross_price: f64,
    /// `p_a(t,τ;t₂,τ₂)`
    pub cross_adj_price: f64,
    /// `r(t,τ;t₂,τ₂) = C(t;t₂) / C_a(t,τ;t₂,τ₂)`
    pub cross_return: f64,
    pub corr_c: f64,
    pub corr_ca: f64,
    pub corr_u: f64,
    pub corr_p: f64,
    pub corr_pa: f64,
    pub corr_r: f64,
    pub corr_r_price_form: f64,
    #[serde(rename = "corr_rU")]
    pub corr_ru: f64,
    pub corr_rp: f64,
    #[serde(rename = "corr_CaU")]
    pub corr_cau: f64,
    /// Extension: `corr_r / sqrt(σ_r²(first)·σ_r²(second))`; `None` when
    /// either volatility is not positive.
    pub corr_r_normalized: Option<f64>,
}

impl CorrelationReport {
    pub fn compute(pair: &PairedWindows<'_>) -> Self {
        let kernel = PairKernel::new(pair);
        let (a, b) = (&kernel.a, &kernel.b);
        let k = a.value_scale();
        let v = a.volume_scale;
        let p = a.price_scale;

        let c_cross = kernel.norm(PairedKind::ValueValue);
        let ca_cross = kernel.norm(PairedKind::AdjvalueAdjvalue);
        let u_cross = kernel.norm(PairedKind::VolumeVolume);
        let p_cross = kernel.norm(PairedKind::PricePrice);
        let pa_cross = kernel.norm(PairedKind::AdjpriceAdjprice);
        let cau = kernel.norm(PairedKind::AdjvalueVolume);

        let (c1, c2) = (a.norm_value(1), b.norm_value(1));
        let (ca1, ca2) = (a.norm_adj_value(1), b.norm_adj_value(1));
        let (u1, u2) = (a.norm_volume(1), b.norm_volume(1));
        let auto = kernel.autocorr();
        let sigma_a = a.volatility().sigma_r2();
        let sigma_b = b.volatility().sigma_r2();
        let corr_r_normalized =
            (sigma_a > 0.0 && sigma_b > 0.0).then(|| auto.value_form / (sigma_a * sigma_b).sqrt());

        CorrelationReport {
            shift: pair.shift(),
            lag1: pair.first.lag(),
            lag2: pair.second.lag(),
            cross_value: k * k * c_cross,
            cross_adj_value: k * k * ca_cross,
            cross_volume: v * v * u_cross,
            cross_price: p * p * p_cross,
            cross_adj_price: p * p * pa_cross,
            cross_return: c_cross / ca_cross,
            corr_c: k * k * (c_cross - c1 * c2),
            corr_ca: k * k * (ca_cross - ca1 * ca2),
            corr_u: v * v * (u_cross - u1 * u2),
            corr_p: p * p * (p_cross - (c1 / u1) * (c2 / u2)),
            corr_pa: p * p * (pa_cross - (ca1 / u1) * (ca2 / u2)),
            corr_r: auto.value_form,
            corr_r_price_form: auto.price_form,
            corr_ru: kernel.return_volume().closed_form,
            corr_rp: kernel.return_price(1, 1).closed_form,
            corr_cau: k * v * (cau - ca1 * u2),
            corr_r_normalized,
        }
    }
}

/// One line of a correlation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub j: usize,
    pub l1: usize,
    pub l2: usize,
    pub n: u32,
    pub m: u32,
    pub statistic: String,
    pub value_form: Option<f64>,
    pub price_form: Option<f64>,
    pub definitional: Option<f64>,
}

impl SweepRow {
    pub const HEADER: [&'static str; 9] = [
        "j",
        "l1",
        "l2",
        "n",
        "m",
        "statistic",
        "value_form",
        "price_form",
        "definitional",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        vec![
            self.j.to_string(),
            self.l1.to_string(),
            self.l2.to_string(),
            self.n.to_string(),
            self.m.to_string(),
            self.statistic.clone(),
            opt(self.value_form),
            opt(self.price_form),
            opt(self.definitional),
        ]
    }

    /// Rows for `corr_r`, `corr_rU` and `corr_rp(n, m)` of one pair.
    pub fn for_pair(pair: &PairedWindows<'_>, n: u32, m: u32) -> Result<Vec<SweepRow>, StatsError> {
        let kernel = PairKernel::new(pair);
        let (j, l1, l2) = (pair.shift(), pair.first.lag(), pair.second.lag());
        let auto = kernel.autocorr();
        let ru = kernel.return_volume();
        if n == 0 || m == 0 {
            return Err(StatsError::OrderZero);
        }
        let rp = kernel.return_price(n, m);
        let row = |statistic: &str, n, m, value_form, price_form, definitional| SweepRow {
            j,
            l1,
            l2,
            n,
            m,
            statistic: statistic.to_string(),
            value_form,
            price_form,
            definitional,
        };
        Ok(vec![
            row(
                "corr_r",
                1,
                1,
                Some(auto.value_form),
                Some(auto.price_form),
                Some(auto.definitional),
            ),
            row(
                "corr_rU",
                1,
                1,
                Some(ru.closed_form),
                Some(ru.price_form),
                Some(ru.definitional),
            ),
            row(
                "corr_rp",
                n,
                m,
                Some(rp.closed_form),
                None,
                Some(rp.definitional),
            ),
        ])
    }
}
