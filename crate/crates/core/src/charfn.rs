//! Moment-matched characteristic functions and the densities obtained by
//! inverting them.
//!
//! From the first `m` return moments we build the truncated Taylor series
//! `R_m(x) = 1 + Σ iⁿ/n! rₙ xⁿ` and the integrable exponential form
//!
//! ```text
//! Q_m(x) = exp{ Σ_{n=1..m} iⁿ/n! aₙ xⁿ - b x^{2q} },   b >= 0, 2q > m
//! ```
//!
//! The damping term has vanishing derivatives of order `< 2q` at the origin,
//! so matching `d^n Q_m / (iⁿ dxⁿ)(0) = rₙ` for `n <= m` makes the `aₙ` the
//! cumulants of the moment sequence. The density is
//! `μ_m(r) = (1/2π) ∫ Q_m(x) e^{-ixr} dx`, evaluated by the trapezoid rule
//! on a uniform grid.

use std::f64::consts::PI;
use std::io::Write;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CharFnError;
use crate::tape::fmt_f64;

/// `|Q_m|` threshold that decides the quadrature extent.
pub const EDGE_THRESHOLD: f64 = 1e-12;

/// Default number of x-grid points.
pub const DEFAULT_X_POINTS: usize = 1 << 14;

/// Default number of r-grid points (odd, so the centre is a grid point).
pub const DEFAULT_R_POINTS: usize = 4097;

/// Largest share of `Σ (1 + |r − a₁|/spread)^m |μ|` allowed in the outer
/// tenth of the grid on each side before [`CharFnApprox::density`] widens it.
pub const TAIL_TOLERANCE: f64 = 1e-10;

/// Edge share above which [`CharFnApprox::density`] warns after giving up.
const FLOOR_WARNING: f64 = 1e-7;

/// Solves `rₙ = Σ_{k=1..n} C(n-1,k-1) aₖ r_{n-k}` (with `r₀ = 1`) for the
/// coefficients `a₁..a_m`.
pub fn moments_to_coeffs(moments: &[f64]) -> Result<Vec<f64>, CharFnError> {
    if moments.is_empty() {
        return Err(CharFnError::OrderZero);
    }
    if let Some(i) = moments.iter().position(|x| !x.is_finite()) {
        return Err(CharFnError::NonFiniteMoment(i + 1));
    }
    let r = |k: usize| if k == 0 { 1.0 } else { moments[k - 1] };
    let mut coeffs: Vec<f64> = Vec::with_capacity(moments.len());
    for n in 1..=moments.len() {
        let mut acc = r(n);
        let mut binom = 1.0; // C(n-1, k-1)
        for k in 1..n {
            acc -= binom * coeffs[k - 1] * r(n - k);
            binom = binom * (n - k) as f64 / k as f64;
        }
        coeffs.push(acc);
    }
    Ok(coeffs)
}

/// Inverse of [`moments_to_coeffs`].
pub fn coeffs_to_moments(coeffs: &[f64]) -> Vec<f64> {
    let mut moments: Vec<f64> = Vec::with_capacity(coeffs.len());
    for n in 1..=coeffs.len() {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for k in 1..=n {
            let prev = if n == k { 1.0 } else { moments[n - k - 1] };
            acc += binom * coeffs[k - 1] * prev;
            binom = binom * (n - k) as f64 / k as f64;
        }
        moments.push(acc);
    }
    moments
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharFnForm {
    Taylor,
    Exponential,
}

/// How the damping pair `(b, q)` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    /// `q = ⌊m/2⌋ + 1`; `b` just large enough that `b x^{2q}` dominates every
    /// growing or oscillating term beyond the natural x-scale `1/σ`.
    Auto,
    Fixed {
        b: f64,
        q: Option<u32>,
    },
}

/// An m-approximation of the return characteristic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharFnApprox {
    moments: Vec<f64>,
    coeffs: Vec<f64>,
    damping: f64,
    damping_exponent: u32,
}

impl CharFnApprox {
    pub fn from_moments(moments: &[f64]) -> Result<Self, CharFnError> {
        Self::with_damping(moments, Damping::Auto)
    }

    pub fn with_damping(moments: &[f64], damping: Damping) -> Result<Self, CharFnError> {
        let coeffs = moments_to_coeffs(moments)?;
        Self::build(moments.to_vec(), coeffs, damping)
    }

    /// Builds from coefficients `a₁..a_m` directly.
    pub fn from_coeffs(coeffs: &[f64], damping: Damping) -> Result<Self, CharFnError> {
        if coeffs.is_empty() {
            return Err(CharFnError::OrderZero);
        }
        if let Some(i) = coeffs.iter().position(|x| !x.is_finite()) {
            return Err(CharFnError::NonFiniteMoment(i + 1));
        }
        Self::build(coeffs_to_moments(coeffs), coeffs.to_vec(), damping)
    }

    fn build(moments: Vec<f64>, coeffs: Vec<f64>, damping: Damping) -> Result<Self, CharFnError> {
        let m = coeffs.len();
        let default_q = (m / 2 + 1) as u32;
        let (b, q) = match damping {
            Damping::Auto => (auto_damping(&coeffs, default_q), default_q),
            Damping::Fixed { b, q } => (b, q.unwrap_or(default_q)),
        };
        if !(b.is_finite() && b >= 0.0) || 2 * q as usize <= m {
            return Err(CharFnError::InvalidDamping { b, q, m });
        }
        Ok(CharFnApprox {
            moments,
            coeffs,
            damping: b,
            damping_exponent: q,
        })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `b`
    pub fn damping(&self) -> f64 {
        self.damping
    }

    /// `q`
    pub fn damping_exponent(&self) -> u32 {
        self.damping_exponent
    }

    pub fn eval(&self, x: f64, form: CharFnForm) -> Complex64 {
        match form {
            CharFnForm::Taylor => Complex64::new(1.0, 0.0) + i_series(&self.moments, x),
            CharFnForm::Exponential => {
                let q2 = 2 * self.damping_exponent as i32;
                (i_series(&self.coeffs, x) - self.damping * x.powi(q2)).exp()
            }
        }
    }

    /// `ln |Q_m(x)|`
    pub fn log_modulus(&self, x: f64) -> f64 {
        let q2 = 2 * self.damping_exponent as i32;
        i_series(&self.coeffs, x).re - self.damping * x.powi(q2)
    }

    /// Whether `|Q_m|` decays at infinity.
    pub fn is_integrable(&self) -> bool {
        if self.damping > 0.0 {
            return true;
        }
        // the highest even-order term with a nonzero coefficient must be decaying
        let mut sign = 0.0;
        for (idx, a) in self.coeffs.iter().enumerate() {
            let n = idx + 1;
            if n % 2 == 0 && *a != 0.0 {
                sign = if n % 4 == 0 { *a } else { -*a };
            }
        }
        sign < 0.0
    }

    /// Scale of the density in r: `max(√a₂, b^{1/2q})`, or 1 when both vanish.
    pub fn spread(&self) -> f64 {
        let gauss = self
            .coeffs
            .get(1)
            .copied()
            .filter(|&a| a > 0.0)
            .map_or(0.0, f64::sqrt);
        let damp = if self.damping > 0.0 {
            self.damping
                .powf(1.0 / (2.0 * self.damping_exponent as f64))
        } else {
            0.0
        };
        let s = gauss.max(damp);
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Grid centred on the mean with half-width `10 × spread`.
    pub fn default_grid(&self) -> GridSpec {
        let centre = self.coeffs[0];
        let half = 10.0 * self.spread();
        GridSpec {
            r_min: centre - half,
            r_max: centre + half,
            r_points: DEFAULT_R_POINTS,
            x_points: DEFAULT_X_POINTS,
            x_extent: None,
        }
    }

    /// Inverts on the default grid, doubling its width (at a fixed r-step)
    /// until the outer bands hold a negligible share of the moment-weighted
    /// mass, or until widening stops helping because that share has hit the
    /// round-off floor. Damped approximations can ring far beyond ten spreads.
    pub fn density(&self) -> Result<DensityGrid, CharFnError> {
        const MAX_WIDENINGS: usize = 6;
        let mut spec = self.default_grid();
        let centre = self.coeffs[0];
        let mut best = self.invert(&spec)?;
        for _ in 0..MAX_WIDENINGS {
            if best.tail_share() < TAIL_TOLERANCE {
                return Ok(best);
            }
            let half = spec.r_max - centre;
            spec.r_min = centre - 2.0 * half;
            spec.r_max = centre + 2.0 * half;
            spec.r_points = 2 * (spec.r_points - 1) + 1;
            let wider = self.invert(&spec)?;
            if wider.tail_share() >= best.tail_share() {
                break;
            }
            best = wider;
        }
        if best.tail_share() > FLOOR_WARNING {
            warn!(
                "density grid still carries {:e} of its weighted mass at the edges",
                best.tail_share()
            );
        }
        Ok(best)
    }

    /// Smallest `X` such that `|Q_m(x)| < EDGE_THRESHOLD` for all `x >= X`.
    pub fn quadrature_extent(&self) -> Result<f64, CharFnError> {
        if !self.is_integrable() {
            return Err(CharFnError::NotIntegrable);
        }
        let threshold = EDGE_THRESHOLD.ln();
        let scale = 1.0 / self.spread();
        let mut hi = scale;
        loop {
            let here = self.log_modulus(hi);
            if here < threshold - 5.0 && self.log_modulus(2.0 * hi) < here {
                break;
            }
            hi *= 2.0;
            if hi > 1e9 * scale || !here.is_finite() {
                return Err(CharFnError::QuadratureDivergence {
                    extent: hi,
                    edge_modulus: here.exp(),
                });
            }
        }
        const SCAN: usize = 8192;
        let step = hi / SCAN as f64;
        let last_above = (0..=SCAN)
            .rev()
            .find(|&k| self.log_modulus(k as f64 * step) >= threshold)
            .unwrap_or(0);
        Ok((last_above + 1) as f64 * step)
    }

    /// Numerical Fourier inversion onto the r-grid of `spec`.
    pub fn invert(&self, spec: &GridSpec) -> Result<DensityGrid, CharFnError> {
        spec.validate()?;
        if !self.is_integrable() {
            return Err(CharFnError::NotIntegrable);
        }
        let extent = match spec.x_extent {
            Some(x) => {
                let edge = self.log_modulus(x).exp();
                if edge.is_nan() || edge >= EDGE_THRESHOLD {
                    return Err(CharFnError::QuadratureDivergence {
                        extent: x,
                        edge_modulus: edge,
                    });
                }
                x
            }
            None => self.quadrature_extent()?,
        };

        // trapezoid on [0, X]; Hermitian symmetry covers [-X, 0]
        let half = spec.x_points / 2;
        let h = extent / half as f64;
        let samples: Vec<Complex64> = (0..=half)
            .map(|k| self.eval(k as f64 * h, CharFnForm::Exponential))
            .collect();
        let r_step = (spec.r_max - spec.r_min) / (spec.r_points - 1) as f64;
        let r: Vec<f64> = (0..spec.r_points)
            .map(|j| spec.r_min + j as f64 * r_step)
            .collect();
        let density: Vec<f64> = r
            .iter()
            .map(|&rv| trapezoid_inverse(&samples, h, rv))
            .collect();

        let grid = DensityGrid::new(self.clone(), spec.clone(), extent, r, density, r_step);
        // ignore quadrature noise around zero
        let (_, peak) = grid.peak();
        if grid.min_density < -1e-10 * peak {
            warn!(
                "m = {} density has negative lobes (mass {:e}, minimum {:e})",
                self.order(),
                grid.negative_mass,
                grid.min_density
            );
        }
        Ok(grid)
    }
}

fn trapezoid_inverse(samples: &[Complex64], h: f64, r: f64) -> f64 {
    const RESEED: usize = 64;
    let last = samples.len() - 1;
    let step = Complex64::cis(-h * r);
    let mut rot = Complex64::new(1.0, 0.0);
    let mut acc = 0.0;
    for (k, q) in samples.iter().enumerate() {
        if k % RESEED == 0 {
            rot = Complex64::cis(-(k as f64) * h * r);
        }
        let term = (q * rot).re;
        acc += if k == 0 || k == last {
            0.5 * term
        } else {
            term
        };
        rot *= step;
    }
    acc * h / PI
}

/// `Σ_{n=1..m} iⁿ/n! cₙ xⁿ`
fn i_series(c: &[f64], x: f64) -> Complex64 {
    let mut re = 0.0;
    let mut im = 0.0;
    let mut term = 1.0; // xⁿ/n!
    for (idx, cn) in c.iter().enumerate() {
        let n = idx + 1;
        term *= x / n as f64;
        let t = cn * term;
        match n % 4 {
            0 => re += t,
            1 => im += t,
            2 => re -= t,
            _ => im -= t,
        }
    }
    Complex64::new(re, im)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Default damping for exponent `q`.
///
/// Two requirements, whichever needs the larger `b`:
/// - at `x = 1/σ` the damping term matches every coefficient term of order
///   three and up (and the second-order term when `a₂ ≤ 0`);
/// - `|Q_m(x)|` stays under a Gaussian envelope of variance scale `|a₂|`,
///   so even-order terms with growing sign cannot push the modulus up
///   (see [`envelope_damping`]).
///
/// Neither changes moments up to order `m`, which only depend on derivatives
/// of order `< 2q` at the origin.
fn auto_damping(coeffs: &[f64], q: u32) -> f64 {
    let m = coeffs.len();
    if m == 2 && coeffs[1] > 0.0 {
        return 0.0;
    }
    let sigma = match coeffs.get(1) {
        Some(&a2) if a2 != 0.0 => a2.abs().sqrt(),
        // no second cumulant: take the scale from the higher ones
        _ => coeffs
            .iter()
            .enumerate()
            .skip(2)
            .map(|(idx, a)| (a.abs() / factorial(idx + 1)).powf(1.0 / (idx + 1) as f64))
            .filter(|v| *v > 0.0)
            .fold(None, |acc: Option<f64>, v| {
                Some(acc.map_or(v, |a| a.max(v)))
            })
            .unwrap_or(1.0),
    };
    let s = 1.0 / sigma;
    let two_q = 2 * q as i32;
    let mut b: f64 = 0.0;
    for (idx, a) in coeffs.iter().enumerate() {
        let n = idx + 1;
        let include = n >= 3 || (n == 2 && *a <= 0.0);
        if include && *a != 0.0 {
            b = b.max(a.abs() / factorial(n) * s.powi(n as i32 - two_q));
        }
    }
    if m >= 2 {
        b = b.max(envelope_damping(coeffs, q, sigma));
    }
    b
}

/// Smallest `b` with `Re ln Q_m(x) ≤ c − σ²x²/4` for all `x`:
/// `sup_x [P(x) − c + σ²x²/4] / x^{2q}` where `P` is the even part of the
/// series. With `a₂ > 0`, `σ² = a₂` and `c = 0`. When `a₂ ≤ 0` (possible for
/// value-weighted returns) `|Q|` exceeds 1 near the origin whatever the
/// damping, so the envelope allows `c = 1` at the scale `σ² = |a₂|`.
fn envelope_damping(coeffs: &[f64], q: u32, sigma: f64) -> f64 {
    let two_q = 2 * q as i32;
    let offset = if coeffs[1] > 0.0 { 0.0 } else { 1.0 };
    let g = |x: f64| {
        let mut acc = sigma * sigma * x * x / 4.0 - offset;
        for (idx, a) in coeffs.iter().enumerate() {
            let n = idx + 1;
            if n % 2 == 0 {
                let sign = if n % 4 == 0 { 1.0 } else { -1.0 };
                acc += sign * a * x.powi(n as i32) / factorial(n);
            }
        }
        acc / x.powi(two_q)
    };
    // log-spaced scan over x·σ ∈ [1e-4, 1e4], then golden-section refinement
    const SCAN: usize = 4000;
    let ln_lo = (1e-4 / sigma).ln();
    let ln_hi = (1e4 / sigma).ln();
    let at = |k: usize| (ln_lo + (ln_hi - ln_lo) * k as f64 / SCAN as f64).exp();
    let best = (0..=SCAN)
        .max_by(|&i, &j| g(at(i)).total_cmp(&g(at(j))))
        .unwrap_or(0);
    let (mut lo, mut hi) = (at(best.saturating_sub(1)), at((best + 1).min(SCAN)));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if g(x1) < g(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let peak = g(at(best)).max(g(0.5 * (lo + hi)));
    peak.max(0.0)
}

/// Sampling plan for [`CharFnApprox::invert`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    pub x_points: usize,
    /// Half-width of the x-grid; chosen from the edge threshold when `None`.
    pub x_extent: Option<f64>,
}

impl GridSpec {
    fn validate(&self) -> Result<(), CharFnError> {
        if !(self.r_min.is_finite() && self.r_max.is_finite() && self.r_max > self.r_min) {
            return Err(CharFnError::InvalidGrid(format!(
                "need r_min < r_max, got {} and {}",
                self.r_min, self.r_max
            )));
        }
        if self.r_points < 2 {
            return Err(CharFnError::InvalidGrid("need at least 2 r points".into()));
        }
        if self.x_points < 16 || !self.x_points.is_multiple_of(2) {
            return Err(CharFnError::InvalidGrid(
                "x points must be even and at least 16".into(),
            ));
        }
        if let Some(x) = self.x_extent {
            if !(x.is_finite() && x > 0.0) {
                return Err(CharFnError::InvalidGrid(format!(
                    "x extent must be positive, got {x}"
                )));
            }
        }
        Ok(())
    }
}

/// A sampled m-approximation density.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub approx: CharFnApprox,
    pub spec: GridSpec,
    /// x-grid half-width actually used
    pub x_extent: f64,
    pub r: Vec<f64>,
    pub density: Vec<f64>,
    pub step: f64,
    /// `∫ μ dr - 1`
    pub normalization_residual: f64,
    /// `∫ min(μ, 0) dr`
    pub negative_mass: f64,
    pub min_density: f64,
}

impl DensityGrid {
    fn new(
        approx: CharFnApprox,
        spec: GridSpec,
        x_extent: f64,
        r: Vec<f64>,
        density: Vec<f64>,
        step: f64,
    ) -> Self {
        let integral = density.iter().sum::<f64>() * step;
        let negative_mass = density.iter().map(|d| d.min(0.0)).sum::<f64>() * step;
        let min_density = density.iter().copied().fold(f64::INFINITY, f64::min);
        DensityGrid {
            approx,
            spec,
            x_extent,
            r,
            density,
            step,
            normalization_residual: integral - 1.0,
            negative_mass,
            min_density,
        }
    }

    pub fn integral(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.step
    }

    /// `Σ rⁿ μ(r) Δr`
    pub fn moment(&self, n: u32) -> f64 {
        self.r
            .iter()
            .zip(&self.density)
            .map(|(r, d)| r.powi(n as i32) * d)
            .sum::<f64>()
            * self.step
    }

    /// Relative deviation of each grid moment from the source moment.
    pub fn moment_residuals(&self) -> Vec<f64> {
        self.approx
            .moments()
            .iter()
            .enumerate()
            .map(|(i, target)| {
                (self.moment(i as u32 + 1) - target) / target.abs().max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// Share of the moment-weighted absolute mass in the outer tenth of the
    /// grid on each side.
    pub fn tail_share(&self) -> f64 {
        let centre = self.approx.coeffs[0];
        let spread = self.approx.spread();
        let m = self.approx.order() as i32;
        let band = self.r.len() / 10;
        let (mut tail, mut total) = (0.0, 0.0);
        for (i, (r, d)) in self.r.iter().zip(&self.density).enumerate() {
            let w = (1.0 + (r - centre).abs() / spread).powi(m) * d.abs();
            total += w;
            if i < band || i + band >= self.r.len() {
                tail += w;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    /// Grid point with the largest density.
    pub fn peak(&self) -> (f64, f64) {
        let (i, d) =
            self.density
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &d)| {
                    if d > best.1 {
                        (i, d)
                    } else {
                        best
                    }
                });
        (self.r[i], d)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["r", "density"])?;
        for (r, d) in self.r.iter().zip(&self.density) {
            out.write_record([fmt_f64(*r), fmt_f64(*d)])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> DensitySidecar {
        DensitySidecar {
            schema_version: crate::SCHEMA_VERSION,
            m: self.approx.order(),
            moments: self.approx.moments().to_vec(),
            a_n: self.approx.coeffs().to_vec(),
            b: self.approx.damping(),
            q: self.approx.damping_exponent(),
            grid: SidecarGrid {
                r_min: self.spec.r_min,
                r_max: self.spec.r_max,
                r_points: self.spec.r_points,
                r_step: self.step,
                x_points: self.spec.x_points,
                x_extent: self.x_extent,
            },
            normalization_residual: self.normalization_residual,
            moment_residuals: self.moment_residuals(),
            negative_mass: self.negative_mass,
        }
    }
}

/// JSON metadata written next to a density CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySidecar {
    pub schema_version: u32,
    pub m: usize,
    pub moments: Vec<f64>,
    pub a_n: Vec<f64>,
    pub b: f64,
    pub q: u32,
    pub grid: SidecarGrid,
    pub normalization_residual: f64,
    pub moment_residuals: Vec<f64>,
    pub negative_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub r_points: usize,
    pub r_step: f64,
    pub x_points: usize,
    pub x_extent: f64,
}

/// Closed-form density of the two-moment approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian2 {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian2 {
    pub fn new(mean: f64, variance: f64) -> Result<Self, CharFnError> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(CharFnError::NonPositiveVariance(variance));
        }
        Ok(Gaussian2 { mean, variance })
    }

    pub fn eval(&self, r: f64) -> f64 {
        let d = r - self.mean;
        (-d * d / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }
}

pub fn gaussian2_density(mean: f64, variance: f64) -> Result<Gaussian2, CharFnError> {
    Gaussian2::new(mean, variance)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    /// Cumulants of a discrete law from central moments.
    fn discrete_cumulants(points: &[(f64, f64)]) -> [f64; 4] {
        let mean: f64 = points.iter().map(|(x, p)| x * p).sum();
        let central = |k: i32| {
            points
                .iter()
                .map(|(x, p)| (x - mean).powi(k) * p)
                .sum::<f64>()
        };
        let (m2, m3, m4) = (central(2), central(3), central(4));
        [mean, m2, m3, m4 - 3.0 * m2 * m2]
    }

    fn discrete_moments(points: &[(f64, f64)], m: i32) -> Vec<f64> {
        (1..=m)
            .map(|k| points.iter().map(|(x, p)| x.powi(k) * p).sum())
            .collect()
    }

    const LAW: [(f64, f64); 3] = [(0.9, 0.25), (1.0, 0.5), (1.2, 0.25)];

    #[test]
    fn coefficients_from_fixture_moments() {
        let a = moments_to_coeffs(&[1.2, 2.0]).unwrap();
        assert!(rel(a[0], 1.2) < 1e-15);
        assert!(rel(a[1], 0.56) < 1e-14);
        assert!(matches!(
            moments_to_coeffs(&[]),
            Err(CharFnError::OrderZero)
        ));
    }

    #[test]
    fn point_mass_has_no_higher_coefficients() {
        let c: f64 = 1.7;
        let moments: Vec<f64> = (1..=6).map(|n| c.powi(n)).collect();
        let a = moments_to_coeffs(&moments).unwrap();
        assert!(rel(a[0], c) < 1e-15);
        for x in &a[1..] {
            assert!(x.abs() < 1e-12, "{x}");
        }
    }

    #[test]
    fn coefficients_match_discrete_cumulants() {
        let a = moments_to_coeffs(&discrete_moments(&LAW, 4)).unwrap();
        let k = discrete_cumulants(&LAW);
        for i in 0..4 {
            assert!((a[i] - k[i]).abs() < 1e-13, "{i}: {} vs {}", a[i], k[i]);
        }
        let back = coeffs_to_moments(&a);
        for (x, y) in back.iter().zip(discrete_moments(&LAW, 4)) {
            assert!(rel(*x, y) < 1e-14);
        }
    }

    #[test]
    fn evaluation_forms() {
        let q = CharFnApprox::from_moments(&[1.2, 2.0]).unwrap();
        assert_eq!(q.damping(), 0.0);
        assert_eq!(q.damping_exponent(), 2);
        for form in [CharFnForm::Taylor, CharFnForm::Exponential] {
            assert_eq!(q.eval(0.0, form), Complex64::new(1.0, 0.0));
        }
        let z = q.eval(1.0, CharFnForm::Exponential);
        let expected = Complex64::new(1.2f64.cos(), 1.2f64.sin()) * (-0.28f64).exp();
        assert!((z - expected).norm() < 1e-15);
        let t = q.eval(0.5, CharFnForm::Taylor);
        assert!((t - Complex64::new(1.0 - 0.25, 0.6)).norm() < 1e-15);

        let zero = CharFnApprox::from_coeffs(&[0.0, 0.0, 0.0], Damping::Fixed { b: 0.3, q: None })
            .unwrap();
        for x in [-1.5, 0.2, 2.0] {
            let v = zero.eval(x, CharFnForm::Exponential);
            assert!(v.im.abs() < 1e-16);
            assert!(rel(v.re, (-0.3 * x.powi(4)).exp()) < 1e-15);
        }
    }

    #[test]
    fn damping_validation() {
        assert!(matches!(
            CharFnApprox::with_damping(&[1.0, 2.0, 5.0], Damping::Fixed { b: 0.1, q: Some(1) }),
            Err(CharFnError::InvalidDamping { .. })
        ));
        assert!(matches!(
            CharFnApprox::with_damping(&[1.0], Damping::Fixed { b: -1.0, q: None }),
            Err(CharFnError::InvalidDamping { .. })
        ));
        let q = CharFnApprox::from_moments(&[1.0]).unwrap();
        assert!(matches!(q.density(), Err(CharFnError::NotIntegrable)));
        let neg =
            CharFnApprox::from_coeffs(&[1.0, -0.5], Damping::Fixed { b: 0.0, q: None }).unwrap();
        assert!(matches!(
            neg.quadrature_extent(),
            Err(CharFnError::NotIntegrable)
        ));
    }

    #[test]
    fn gaussian_inversion_matches_closed_form() {
        let q = CharFnApprox::from_moments(&[1.2, 2.0]).unwrap();
        let grid = q.density().unwrap();
        let g = gaussian2_density(1.2, 0.56).unwrap();
        let worst = grid
            .r
            .iter()
            .zip(&grid.density)
            .map(|(r, d)| (d - g.eval(*r)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
        let (peak_r, peak) = grid.peak();
        assert!((peak_r - 1.2).abs() < 1e-12);
        assert!((peak - 0.533109).abs() < 1e-6);
        assert!(grid.normalization_residual.abs() < 1e-6);
        for res in grid.moment_residuals() {
            assert!(res.abs() < 1e-6);
        }
    }

    #[test]
    fn damped_first_order_density_is_symmetric() {
        let q = CharFnApprox::with_damping(&[0.8], Damping::Fixed { b: 0.02, q: None }).unwrap();
        let grid = q.density().unwrap();
        let n = grid.r.len();
        for j in 0..n / 2 {
            assert!((grid.density[j] - grid.density[n - 1 - j]).abs() < 1e-10);
        }
        assert!(rel(grid.moment(1), 0.8) < 1e-8);
    }

    #[test]
    fn fourth_order_round_trip() {
        let moments = discrete_moments(&LAW, 4);
        let q = CharFnApprox::from_moments(&moments).unwrap();
        assert!(q.damping() > 0.0);
        let grid = q.density().unwrap();
        assert!(
            grid.normalization_residual.abs() < 1e-6,
            "{}",
            grid.normalization_residual
        );
        for (n, res) in grid.moment_residuals().iter().enumerate() {
            assert!(res.abs() < 1e-4, "order {}: {res}", n + 1);
        }
    }

    #[test]
    fn gaussian_closed_form() {
        let g = gaussian2_density(1.2, 0.56).unwrap();
        assert!((g.eval(1.2) - 1.0 / (2.0 * PI * 0.56).sqrt()).abs() < 1e-15);
        assert!((g.eval(1.2) - 0.533109).abs() < 1e-6);
        assert!((g.eval(1.2 + 0.37) - g.eval(1.2 - 0.37)).abs() < 1e-15);
        let h = 1e-3;
        let total: f64 = (-20_000..=20_000)
            .map(|k| g.eval(1.2 + k as f64 * h))
            .sum::<f64>()
            * h;
        assert!((total - 1.0).abs() < 1e-9);
        assert!(matches!(
            gaussian2_density(0.0, 0.0),
            Err(CharFnError::NonPositiveVariance(_))
        ));
    }

    #[test]
    fn negative_second_cumulant_stays_bounded() {
        // r2 < r1^2: a value-weighted "variance" below zero
        let r = [
            1.0037108179301066,
            1.0072044526656663,
            1.0013370614146169,
            0.9793160020283713,
        ];
        let q = CharFnApprox::from_moments(&r).unwrap();
        assert!(q.coeffs()[1] < 0.0);
        let sigma2 = -q.coeffs()[1];
        for k in 1..400 {
            let x = k as f64 * 0.25;
            assert!(
                q.log_modulus(x) <= 1.0 - sigma2 * x * x / 4.0 + 1e-12,
                "x = {x}"
            );
        }
        let grid = q.density().unwrap();
        assert!((grid.integral() - 1.0).abs() < 1e-10);
        assert!(
            grid.moment_residuals().iter().all(|e| e.abs() < 1e-9),
            "{:?}",
            grid.moment_residuals()
        );
        assert!(grid.sidecar().negative_mass < 0.0);
    }
}
