//! Reference implementations evaluated straight from the defining sums.
//!
//! Nothing here shares code with [`crate::moments`] or
//! [`crate::correlations`]: every statistic is a literal loop over raw tape
//! fields, without rescaling. Use it as ground truth in tests.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::OracleError;
use crate::tape::{TradeTape, WindowSpec};

/// Lags and pair shift for an oracle request.
///
/// The first window uses lag `l1`. Pair statistics compare it with a second
/// window of the same length that starts `j` ticks earlier and uses lag `l2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLags {
    pub l1: usize,
    pub l2: usize,
    pub j: usize,
}

impl OracleLags {
    pub fn single(lag: usize) -> Self {
        OracleLags {
            l1: lag,
            l2: lag,
            j: 0,
        }
    }
}

/// Statistics the oracle knows. Orders are carried in the variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    ValueMoment(u32),
    VolumeMoment(u32),
    PriceMoment(u32),
    AdjValueMoment(u32),
    AdjPriceMoment(u32),
    ReturnMoment(u32),
    FreqReturnMoment(u32),
    SigmaC,
    SigmaCa,
    SigmaU,
    SigmaP,
    SigmaPa,
    SigmaR,
    CrossValue(u32, u32),
    CrossAdjValue(u32, u32),
    CrossVolume(u32, u32),
    CrossPrice(u32, u32),
    CrossAdjPrice(u32, u32),
    CrossValueVolume(u32, u32),
    CrossAdjValueVolume(u32, u32),
    CrossReturn,
    CorrC,
    CorrCa,
    CorrU,
    CorrP,
    CorrPa,
    CorrR,
    CorrRU,
    CorrRP(u32, u32),
    CorrCaU,
    CorrPaU2,
    SameDayApprox,
}

const FIXED: [(&str, Statistic); 19] = [
    ("sigma_C2", Statistic::SigmaC),
    ("sigma_Ca2", Statistic::SigmaCa),
    ("sigma_U2", Statistic::SigmaU),
    ("sigma_p2", Statistic::SigmaP),
    ("sigma_pa2", Statistic::SigmaPa),
    ("sigma_r2", Statistic::SigmaR),
    ("cross_r", Statistic::CrossReturn),
    ("corr_C", Statistic::CorrC),
    ("corr_Ca", Statistic::CorrCa),
    ("corr_U", Statistic::CorrU),
    ("corr_p", Statistic::CorrP),
    ("corr_pa", Statistic::CorrPa),
    ("corr_r", Statistic::CorrR),
    ("corr_rU", Statistic::CorrRU),
    ("corr_CaU", Statistic::CorrCaU),
    ("corr_paU2", Statistic::CorrPaU2),
    ("sameday_approx", Statistic::SameDayApprox),
    ("vwap", Statistic::PriceMoment(1)),
    ("vawar", Statistic::ReturnMoment(1)),
];

impl Statistic {
    /// Every statistic with orders up to `max_order`.
    pub fn catalogue(max_order: u32) -> Vec<Statistic> {
        use Statistic::*;
        let mut out = Vec::new();
        for n in 1..=max_order {
            out.extend([
                ValueMoment(n),
                VolumeMoment(n),
                PriceMoment(n),
                AdjValueMoment(n),
                AdjPriceMoment(n),
                ReturnMoment(n),
                FreqReturnMoment(n),
            ]);
            for m in 1..=max_order {
                out.extend([
                    CrossValue(n, m),
                    CrossAdjValue(n, m),
                    CrossVolume(n, m),
                    CrossPrice(n, m),
                    CrossAdjPrice(n, m),
                    CrossValueVolume(n, m),
                    CrossAdjValueVolume(n, m),
                    CorrRP(n, m),
                ]);
            }
        }
        out.extend(FIXED.iter().take(17).map(|(_, s)| *s));
        out
    }

    /// Whether the statistic reads the second window of a pair.
    pub fn is_paired(&self) -> bool {
        use Statistic::*;
        matches!(
            self,
            CrossValue(..)
                | CrossAdjValue(..)
                | CrossVolume(..)
                | CrossPrice(..)
                | CrossAdjPrice(..)
                | CrossValueVolume(..)
                | CrossAdjValueVolume(..)
                | CrossReturn
                | CorrC
                | CorrCa
                | CorrU
                | CorrP
                | CorrPa
                | CorrR
                | CorrRU
                | CorrRP(..)
                | CorrCaU
                | SameDayApprox
        )
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Statistic::*;
        if let Some((name, _)) = FIXED.iter().take(17).find(|(_, s)| s == self) {
            return f.write_str(name);
        }
        match self {
            ValueMoment(n) => write!(f, "C_{n}"),
            VolumeMoment(n) => write!(f, "U_{n}"),
            PriceMoment(n) => write!(f, "p_{n}"),
            AdjValueMoment(n) => write!(f, "Ca_{n}"),
            AdjPriceMoment(n) => write!(f, "pa_{n}"),
            ReturnMoment(n) => write!(f, "r_{n}"),
            FreqReturnMoment(n) => write!(f, "freq_r_{n}"),
            CrossValue(n, m) => write!(f, "cross_C_{n}_{m}"),
            CrossAdjValue(n, m) => write!(f, "cross_Ca_{n}_{m}"),
            CrossVolume(n, m) => write!(f, "cross_U_{n}_{m}"),
            CrossPrice(n, m) => write!(f, "cross_p_{n}_{m}"),
            CrossAdjPrice(n, m) => write!(f, "cross_pa_{n}_{m}"),
            CrossValueVolume(n, m) => write!(f, "cross_CU_{n}_{m}"),
            CrossAdjValueVolume(n, m) => write!(f, "cross_CaU_{n}_{m}"),
            CorrRP(n, m) => write!(f, "corr_rp_{n}_{m}"),
            _ => unreachable!("fixed names handled above"),
        }
    }
}

impl FromStr for Statistic {
    type Err = OracleError;

    /// Accepts the names produced by `Display`, e.g. `r_2`, `cross_pa_1_3`,
    /// `corr_rp_2_1`, `sigma_pa2`, plus the aliases `vwap` and `vawar`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        use Statistic::*;
        if let Some((_, stat)) = FIXED.iter().find(|(name, _)| *name == s) {
            return Ok(*stat);
        }
        let unknown = || OracleError::UnknownStatistic(s.to_string());
        let order = |t: &str| t.parse::<u32>().ok().filter(|&n| n >= 1);

        let singles: [(&str, Single); 7] = [
            ("freq_r_", FreqReturnMoment),
            ("Ca_", AdjValueMoment),
            ("pa_", AdjPriceMoment),
            ("C_", ValueMoment),
            ("U_", VolumeMoment),
            ("p_", PriceMoment),
            ("r_", ReturnMoment),
        ];
        for (prefix, make) in singles {
            if let Some(rest) = s.strip_prefix(prefix) {
                return order(rest).map(make).ok_or_else(unknown);
            }
        }
        let pairs: [(&str, Pair); 8] = [
            ("cross_CaU_", CrossAdjValueVolume),
            ("cross_CU_", CrossValueVolume),
            ("cross_Ca_", CrossAdjValue),
            ("cross_pa_", CrossAdjPrice),
            ("cross_C_", CrossValue),
            ("cross_U_", CrossVolume),
            ("cross_p_", CrossPrice),
            ("corr_rp_", CorrRP),
        ];
        for (prefix, make) in pairs {
            if let Some(rest) = s.strip_prefix(prefix) {
                let (n, m) = rest.split_once('_').ok_or_else(unknown)?;
                return match (order(n), order(m)) {
                    (Some(n), Some(m)) => Ok(make(n, m)),
                    _ => Err(unknown()),
                };
            }
        }
        Err(unknown())
    }
}

type Single = fn(u32) -> Statistic;
type Pair = fn(u32, u32) -> Statistic;

/// Raw columns of one window: prices, lagged prices and volumes.
struct Raw {
    p: Vec<f64>,
    p_lag: Vec<f64>,
    u: Vec<f64>,
}

fn raw(tape: &TradeTape, start: usize, count: usize, lag: usize) -> Result<Raw, OracleError> {
    if count < 2 || lag == 0 || start < lag || start + count > tape.len() {
        return Err(OracleError::Window(format!(
            "start {start}, count {count}, lag {lag} on {} ticks",
            tape.len()
        )));
    }
    let mut out = Raw {
        p: Vec::with_capacity(count),
        p_lag: Vec::with_capacity(count),
        u: Vec::with_capacity(count),
    };
    for i in start..start + count {
        out.p.push(tape.ticks()[i].price);
        out.p_lag.push(tape.ticks()[i - lag].price);
        out.u.push(tape.ticks()[i].volume);
    }
    Ok(out)
}

fn pw(x: f64, n: u32) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

/// `(1/N) Σ xᵢⁿ`
fn mean_pow(x: &[f64], n: u32) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += pw(*v, n);
    }
    s / x.len() as f64
}

/// `(1/N) Σ xᵢⁿ yᵢᵐ`
fn mean_cross(x: &[f64], n: u32, y: &[f64], m: u32) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        s += pw(x[i], n) * pw(y[i], m);
    }
    s / x.len() as f64
}

/// `Σ vᵢ wᵢ / Σ wᵢ`
fn weighted(v: &[f64], w: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..v.len() {
        num += v[i] * w[i];
        den += w[i];
    }
    num / den
}

fn values(x: &Raw) -> Vec<f64> {
    x.p.iter().zip(&x.u).map(|(p, u)| p * u).collect()
}

fn adj_values(x: &Raw) -> Vec<f64> {
    x.p_lag.iter().zip(&x.u).map(|(p, u)| p * u).collect()
}

fn returns(x: &Raw) -> Vec<f64> {
    x.p.iter().zip(&x.p_lag).map(|(p, q)| p / q).collect()
}

fn powers(x: &[f64], n: u32) -> Vec<f64> {
    x.iter().map(|v| pw(*v, n)).collect()
}

/// `Σ pⁿUⁿ / Σ Uⁿ`
fn price_moment(p: &[f64], u: &[f64], n: u32) -> f64 {
    let pn: Vec<f64> = p.iter().map(|v| pw(*v, n)).collect();
    weighted(&pn, &powers(u, n))
}

fn return_moment(x: &Raw, n: u32) -> f64 {
    weighted(&powers(&returns(x), n), &powers(&adj_values(x), n))
}

/// `Σ xⁿyᵐ UⁿU₂ᵐ / Σ UⁿU₂ᵐ`
fn market_cross(x: &[f64], n: u32, ux: &[f64], y: &[f64], m: u32, uy: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..x.len() {
        let w = pw(ux[i], n) * pw(uy[i], m);
        num += pw(x[i], n) * pw(y[i], m) * w;
        den += w;
    }
    num / den
}

/// Evaluate `stat` on `window` of `tape` from its definition.
pub fn oracle(
    tape: &TradeTape,
    window: WindowSpec,
    lags: OracleLags,
    stat: Statistic,
) -> Result<f64, OracleError> {
    use Statistic::*;
    let a = raw(tape, window.start, window.count, lags.l1)?;
    if !stat.is_paired() {
        let c = values(&a);
        let ca = adj_values(&a);
        let var = |x: &[f64]| mean_pow(x, 2) - pw(mean_pow(x, 1), 2);
        return Ok(match stat {
            ValueMoment(n) => mean_pow(&c, n),
            VolumeMoment(n) => mean_pow(&a.u, n),
            PriceMoment(n) => price_moment(&a.p, &a.u, n),
            AdjValueMoment(n) => mean_pow(&ca, n),
            AdjPriceMoment(n) => price_moment(&a.p_lag, &a.u, n),
            ReturnMoment(n) => return_moment(&a, n),
            FreqReturnMoment(n) => mean_pow(&returns(&a), n),
            SigmaC => var(&c),
            SigmaCa => var(&ca),
            SigmaU => var(&a.u),
            SigmaP => price_moment(&a.p, &a.u, 2) - pw(price_moment(&a.p, &a.u, 1), 2),
            SigmaPa => price_moment(&a.p_lag, &a.u, 2) - pw(price_moment(&a.p_lag, &a.u, 1), 2),
            SigmaR => return_moment(&a, 2) - pw(return_moment(&a, 1), 2),
            CorrPaU2 => {
                let mut s = 0.0;
                for i in 0..a.u.len() {
                    s += a.p_lag[i] * a.u[i] * a.u[i];
                }
                s / a.u.len() as f64 - price_moment(&a.p_lag, &a.u, 1) * mean_pow(&a.u, 2)
            }
            _ => unreachable!("paired statistics handled below"),
        });
    }

    if window.start < lags.j {
        return Err(OracleError::Window(format!(
            "shift {} exceeds window start {}",
            lags.j, window.start
        )));
    }
    let b = raw(tape, window.start - lags.j, window.count, lags.l2)?;
    let (c, c2) = (values(&a), values(&b));
    let (ca, ca2) = (adj_values(&a), adj_values(&b));
    let corr = |x: &[f64], y: &[f64]| mean_cross(x, 1, y, 1) - mean_pow(x, 1) * mean_pow(y, 1);

    Ok(match stat {
        CrossValue(n, m) => mean_cross(&c, n, &c2, m),
        CrossAdjValue(n, m) => mean_cross(&ca, n, &ca2, m),
        CrossVolume(n, m) => mean_cross(&a.u, n, &b.u, m),
        CrossValueVolume(n, m) => mean_cross(&c, n, &b.u, m),
        CrossAdjValueVolume(n, m) => mean_cross(&ca, n, &b.u, m),
        CrossPrice(n, m) => market_cross(&a.p, n, &a.u, &b.p, m, &b.u),
        CrossAdjPrice(n, m) => market_cross(&a.p_lag, n, &a.u, &b.p_lag, m, &b.u),
        CrossReturn => {
            let (r, r2) = (returns(&a), returns(&b));
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..r.len() {
                let w = ca[i] * ca2[i];
                num += r[i] * r2[i] * w;
                den += w;
            }
            num / den
        }
        CorrC => corr(&c, &c2),
        CorrCa => corr(&ca, &ca2),
        CorrU => corr(&a.u, &b.u),
        CorrP => {
            market_cross(&a.p, 1, &a.u, &b.p, 1, &b.u)
                - price_moment(&a.p, &a.u, 1) * price_moment(&b.p, &b.u, 1)
        }
        CorrPa => {
            market_cross(&a.p_lag, 1, &a.u, &b.p_lag, 1, &b.u)
                - price_moment(&a.p_lag, &a.u, 1) * price_moment(&b.p_lag, &b.u, 1)
        }
        CorrR => {
            let (r, r2) = (returns(&a), returns(&b));
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..r.len() {
                let w = ca[i] * ca2[i];
                num += r[i] * r2[i] * w;
                den += w;
            }
            num / den - return_moment(&a, 1) * return_moment(&b, 1)
        }
        CorrRU => {
            let r = returns(&a);
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..r.len() {
                num += r[i] * b.u[i] * ca[i];
                den += ca[i];
            }
            num / den - return_moment(&a, 1) * mean_pow(&b.u, 1)
        }
        CorrRP(n, m) => {
            let r = returns(&a);
            let (mut num, mut den) = (0.0, 0.0);
            for i in 0..r.len() {
                let w = pw(ca[i], n) * pw(b.u[i], m);
                num += pw(r[i], n) * pw(b.p[i], m) * w;
                den += w;
            }
            num / den - return_moment(&a, n) * price_moment(&b.p, &b.u, m)
        }
        CorrCaU => corr(&ca, &b.u),
        SameDayApprox => {
            let sigma_c = mean_pow(&c, 2) - pw(mean_pow(&c, 1), 2);
            sigma_c / (mean_pow(&ca, 1) * mean_pow(&ca2, 1))
        }
        _ => unreachable!("single-window statistics handled above"),
    })
}

/// `n`-th derivative of `f` at 0 for `n = 1..=max_order`, from central
/// differences at steps `h, h/2, h/4, h/8` combined by Richardson
/// extrapolation.
pub fn derivatives_at_zero<F>(f: F, max_order: usize, h: f64) -> Vec<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    const LEVELS: usize = 4;
    (1..=max_order)
        .map(|n| {
            let mut table: Vec<Complex64> = (0..LEVELS)
                .map(|level| central_difference(&f, n, h / (1 << level) as f64))
                .collect();
            // the error expands in even powers of the step
            for k in 1..LEVELS {
                let factor = 4f64.powi(k as i32);
                for level in (k..LEVELS).rev() {
                    table[level] = (factor * table[level] - table[level - 1]) / (factor - 1.0);
                }
            }
            table[LEVELS - 1]
        })
        .collect()
}

/// `δⁿf(0)/hⁿ = Σₖ (-1)ᵏ C(n,k) f((n/2 − k)h) / hⁿ`
fn central_difference<F>(f: &F, n: usize, h: f64) -> Complex64
where
    F: Fn(f64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for k in 0..=n {
        let x = (n as f64 / 2.0 - k as f64) * h;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += f(x) * (sign * binom);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    acc / h.powi(n as i32)
}

/// Moments implied by derivatives of a characteristic function:
/// `r_n = Q⁽ⁿ⁾(0) / iⁿ`.
pub fn moments_from_derivatives(derivs: &[Complex64]) -> Vec<f64> {
    derivs
        .iter()
        .enumerate()
        .map(|(idx, d)| {
            let n = idx + 1;
            let i_n = Complex64::i().powu(n as u32);
            (d / i_n).re
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture_a() -> TradeTape {
        TradeTape::from_price_volume(&[2.0, 2.0, 4.0, 2.0], &[10.0, 5.0, 10.0, 5.0], 1.0).unwrap()
    }

    fn at(stat: &str) -> f64 {
        let lags = OracleLags::single(1);
        oracle(
            &fixture_a(),
            WindowSpec::new(1, 3),
            lags,
            stat.parse().unwrap(),
        )
        .unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-13 * b.abs().max(1.0)
    }

    #[test]
    fn fixture_a_single_window() {
        for (name, expected) in [
            ("vawar", 1.2),
            ("r_2", 2.0),
            ("sigma_r2", 0.56),
            ("vwap", 3.0),
            ("p_2", 12.0),
            ("C_1", 20.0),
            ("C_2", 600.0),
            ("U_1", 20.0 / 3.0),
            ("U_2", 50.0),
            ("Ca_1", 50.0 / 3.0),
            ("Ca_2", 300.0),
            ("pa_1", 2.5),
            ("pa_2", 6.0),
            ("sigma_C2", 200.0),
            ("sigma_Ca2", 200.0 / 9.0),
            ("sigma_U2", 50.0 / 9.0),
            ("sigma_p2", 3.0),
            ("sigma_pa2", -0.25),
            ("freq_r_1", 3.5 / 3.0),
            ("corr_paU2", -25.0 / 3.0),
        ] {
            assert!(
                close(at(name), expected),
                "{name}: {} vs {expected}",
                at(name)
            );
        }
    }

    #[test]
    fn fixture_a_self_paired() {
        for (name, expected) in [
            ("corr_rp_1_1", 54.0 / 35.0),
            ("corr_rU", 2.0),
            ("corr_r", 0.56),
            ("cross_C_1_1", 600.0),
            ("cross_p_1_1", 12.0),
            ("cross_CaU_1_1", 350.0 / 3.0),
            ("corr_CaU", 50.0 / 9.0),
            ("corr_C", 200.0),
        ] {
            assert!(
                close(at(name), expected),
                "{name}: {} vs {expected}",
                at(name)
            );
        }
    }

    #[test]
    fn names_round_trip() {
        for stat in Statistic::catalogue(3) {
            assert_eq!(stat.to_string().parse::<Statistic>().unwrap(), stat);
        }
        for bad in ["r_0", "r_x", "corr_rp_1", "nope", "cross_C_1_0"] {
            assert!(matches!(
                bad.parse::<Statistic>(),
                Err(OracleError::UnknownStatistic(_))
            ));
        }
    }

    #[test]
    fn window_errors() {
        let tape = fixture_a();
        let r = oracle(
            &tape,
            WindowSpec::new(0, 3),
            OracleLags::single(1),
            Statistic::SigmaR,
        );
        assert!(matches!(r, Err(OracleError::Window(_))));
        let lags = OracleLags { l1: 1, l2: 1, j: 2 };
        assert!(oracle(&tape, WindowSpec::new(1, 3), lags, Statistic::CorrR).is_err());
    }

    #[test]
    fn derivatives_of_a_gaussian_characteristic_function() {
        let (mu, var) = (1.2f64, 0.56f64);
        let f = |x: f64| (Complex64::new(-0.5 * var * x * x, mu * x)).exp();
        let moments = moments_from_derivatives(&derivatives_at_zero(f, 4, 0.2));
        let exact = [
            mu,
            mu * mu + var,
            mu.powi(3) + 3.0 * mu * var,
            mu.powi(4) + 6.0 * mu * mu * var + 3.0 * var * var,
        ];
        for (got, want) in moments.iter().zip(exact) {
            assert!((got - want).abs() < 1e-7 * want, "{got} vs {want}");
        }
    }
}
