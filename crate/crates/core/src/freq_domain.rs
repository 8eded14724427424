//! Frequency-domain estimators of the bivariate Hurst exponent built on the
//! (Daniell-smoothed) cross-periodogram
//!
//! ```text
//! I_xy(λ_j) = (1/2πT) · (Σ_t x_t e^{−iλ_j t}) · (Σ_t y_t e^{iλ_j t}),   λ_j = 2πj/T, j = 1..⌊T/2⌋
//! ```
//!
//! * APE – averaged periodogram: ratio of cumulative cross-spectra at
//!   `⌊qm⌋` and `m` frequencies.
//! * XPE – OLS of `log|I_xy(λ_j)|` on `log λ_j` over the lowest `m`
//!   frequencies; `|I_xy| ∝ λ^{1−2H}`.
//! * LXW – local cross-Whittle: minimiser of
//!   `R(H) = log((1/m) Σ λ_j^{2H−1}|I_xy(λ_j)|) − (2H−1)/m · Σ log λ_j`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ols_slope;
use crate::scalar::Real;
use crate::series_gen::SeriesPair;

pub const MIN_PERIODOGRAM_LEN: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct CrossPeriodogram<T> {
    frequencies: Vec<T>,
    values: Vec<Complex<T>>,
    span: usize,
    smoothed: bool,
}

impl<T: Real> CrossPeriodogram<T> {
    /// Builds a periodogram from explicit values at the Fourier frequencies
    /// `2πj/len`, `j = 1..=values.len()`.
    pub fn from_values(len: usize, values: Vec<Complex<T>>) -> Result<Self> {
        if values.is_empty() || values.len() > len / 2 {
            return Err(Error::invalid(format!(
                "{} ordinates do not fit the {} Fourier frequencies of length {len}",
                values.len(),
                len / 2
            )));
        }
        let frequencies = fourier_frequencies(len, values.len());
        Ok(Self { frequencies, values, span: 0, smoothed: false })
    }

    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn moduli(&self) -> Vec<T> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_smoothed(&self) -> bool {
        self.smoothed
    }

    pub fn span(&self) -> usize {
        self.span
    }

    pub fn smoothed(&self, span: usize) -> Self {
        daniell_smooth(self, span)
    }

    fn check_bandwidth(&self, m: usize, min: usize) -> Result<()> {
        if m < min || m > self.len() {
            return Err(Error::invalid(format!(
                "bandwidth {m} outside {min}..={}",
                self.len()
            )));
        }
        Ok(())
    }
}

fn fourier_frequencies<T: Real>(len: usize, count: usize) -> Vec<T> {
    (1..=count)
        .map(|j| T::lit(2.0 * PI * j as f64 / len as f64))
        .collect()
}

fn dft<T: Real>(planner: &mut FftPlanner<T>, series: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = series.iter().map(|&v| Complex::new(v, T::zero())).collect();
    planner.plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Raw cross-periodogram of two equal-length series.
pub fn cross_periodogram_raw<T: Real>(x: &[T], y: &[T]) -> Result<CrossPeriodogram<T>> {
    if x.len() != y.len() {
        return Err(Error::invalid("series differ in length"));
    }
    let len = x.len();
    if len < MIN_PERIODOGRAM_LEN {
        return Err(Error::invalid(format!("cross-periodogram needs length >= 8, got {len}")));
    }
    let mut planner = FftPlanner::new();
    let wx = dft(&mut planner, x);
    let wy = dft(&mut planner, y);
    // The FFT indexes time from 0 rather than 1; the phase e^{−iλ_j} is
    // common to both transforms and cancels in the product.
    let norm = T::lit(2.0 * PI * len as f64);
    let values = (1..=len / 2).map(|j| wx[j] * wy[j].conj() / norm).collect();
    CrossPeriodogram::from_values(len, values)
}

pub fn cross_periodogram<T: Real>(pair: &SeriesPair<T>) -> Result<CrossPeriodogram<T>> {
    cross_periodogram_raw(pair.x(), pair.y())
}

/// Modified Daniell weights for half-width `p`: `2p + 1` taps, interior
/// `1/(2p)`, ends `1/(4p)`.
pub fn daniell_weights<T: Real>(p: usize) -> Vec<T> {
    if p == 0 {
        return vec![T::one()];
    }
    let inner = T::one() / T::count(2 * p);
    let end = inner / T::lit(2.0);
    (0..=2 * p)
        .map(|k| if k == 0 || k == 2 * p { end } else { inner })
        .collect()
}

/// Applies a modified Daniell window of half-width `p` across frequencies.
/// Near the ends of the spectrum the window is truncated and the remaining
/// weights renormalised to sum to one.
pub fn daniell_smooth<T: Real>(pg: &CrossPeriodogram<T>, p: usize) -> CrossPeriodogram<T> {
    if p == 0 {
        return pg.clone();
    }
    let weights = daniell_weights::<T>(p);
    let n = pg.values.len();
    let values = (0..n)
        .map(|j| {
            let lo = j.saturating_sub(p);
            let hi = (j + p).min(n - 1);
            let (acc, wsum) = (lo..=hi).fold(
                (Complex::new(T::zero(), T::zero()), T::zero()),
                |(acc, wsum), k| {
                    let w = weights[k + p - j];
                    (acc + pg.values[k] * w, wsum + w)
                },
            );
            acc / wsum
        })
        .collect();
    CrossPeriodogram {
        frequencies: pg.frequencies.clone(),
        values,
        span: p,
        smoothed: true,
    }
}

/// Partial sum `Σ_{j=1}^{j_upper} I_xy(λ_j)`.
pub fn cumulative_cross_spectrum<T: Real>(pg: &CrossPeriodogram<T>, j_upper: usize) -> Result<Complex<T>> {
    pg.check_bandwidth(j_upper, 1)?;
    Ok(pg.values[..j_upper]
        .iter()
        .fold(Complex::new(T::zero(), T::zero()), |acc, &v| acc + v))
}

/// Which real quantity of the cumulative cross-spectrum enters the APE ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApeMode {
    /// `Σ |I_xy(λ_j)|`: cumulative cross-amplitude spectrum.
    #[default]
    SumOfModuli,
    /// `|Σ I_xy(λ_j)|`: modulus of the complex cumulative sum.
    ModulusOfSum,
    /// `Re Σ I_xy(λ_j)`: cumulative co-spectrum.
    RealPart,
}

/// Shared configuration of the three frequency-domain estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreqEstimatorConfig {
    /// Fixed bandwidth; `None` uses `⌊T · m_fraction⌋`.
    pub m: Option<usize>,
    pub m_fraction: f64,
    pub q: f64,
    /// Daniell half-width.
    pub span: usize,
    pub search_lo: f64,
    pub search_hi: f64,
    pub ape_mode: ApeMode,
}

impl Default for FreqEstimatorConfig {
    fn default() -> Self {
        Self {
            m: None,
            m_fraction: 0.1,
            q: 0.5,
            span: 2,
            search_lo: 0.01,
            search_hi: 1.5,
            ape_mode: ApeMode::default(),
        }
    }
}

impl FreqEstimatorConfig {
    /// Restricts the cross-Whittle search to `(1/2, 1]`.
    pub fn with_half_open_search(mut self) -> Self {
        self.search_lo = 0.5 + 1e-9;
        self.search_hi = 1.0;
        self
    }

    pub fn bandwidth(&self, len: usize) -> Result<usize> {
        let m = self
            .m
            .unwrap_or_else(|| (len as f64 * self.m_fraction).floor() as usize);
        if m < 1 || m > len / 2 {
            return Err(Error::invalid(format!("bandwidth {m} outside 1..={}", len / 2)));
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::invalid(format!("q must lie in (0, 1), got {}", self.q)));
        }
        if !(self.search_lo < self.search_hi) || !self.search_lo.is_finite() || !self.search_hi.is_finite() {
            return Err(Error::invalid("search interval must satisfy lo < hi"));
        }
        if !(self.m_fraction > 0.0 && self.m_fraction <= 0.5) && self.m.is_none() {
            return Err(Error::invalid("m_fraction must lie in (0, 0.5]"));
        }
        Ok(())
    }

    /// Smoothed cross-periodogram of `pair` and the bandwidth for its length.
    pub fn smoothed_periodogram<T: Real>(&self, pair: &SeriesPair<T>) -> Result<(CrossPeriodogram<T>, usize)> {
        self.validate()?;
        let m = self.bandwidth(pair.len())?;
        Ok((cross_periodogram(pair)?.smoothed(self.span), m))
    }
}

fn ape_level<T: Real>(pg: &CrossPeriodogram<T>, upto: usize, mode: ApeMode) -> Result<T> {
    let level = match mode {
        ApeMode::SumOfModuli => pg.values[..upto].iter().map(|c| c.norm()).sum::<T>(),
        ApeMode::ModulusOfSum => cumulative_cross_spectrum(pg, upto)?.norm(),
        ApeMode::RealPart => cumulative_cross_spectrum(pg, upto)?.re,
    };
    if !(level > T::zero()) {
        return Err(Error::estimation(format!(
            "cumulative cross-spectrum up to j = {upto} is not positive ({level})"
        )));
    }
    Ok(level)
}

/// APE on a prepared periodogram:
/// `Ĥ = 1 − log(F(⌊qm⌋) / F(m)) / (2 log q)`.
pub fn ape_from_periodogram<T: Real>(pg: &CrossPeriodogram<T>, m: usize, q: f64, mode: ApeMode) -> Result<T> {
    pg.check_bandwidth(m, 1)?;
    let lower = (q * m as f64).floor() as usize;
    if lower < 1 {
        return Err(Error::invalid(format!("⌊q·m⌋ = 0 for q = {q}, m = {m}")));
    }
    let ratio = ape_level(pg, lower, mode)? / ape_level(pg, m, mode)?;
    Ok(T::one() - ratio.ln() / (T::lit(2.0) * T::lit(q).ln()))
}

pub fn ape_estimate<T: Real>(pair: &SeriesPair<T>, cfg: &FreqEstimatorConfig) -> Result<T> {
    let (pg, m) = cfg.smoothed_periodogram(pair)?;
    ape_from_periodogram(&pg, m, cfg.q, cfg.ape_mode)
}

/// XPE on a prepared periodogram: `Ĥ = (1 − b)/2` with `b` the log–log slope
/// of `|I_xy|` over the lowest `m` frequencies (zero ordinates dropped).
pub fn xpe_from_periodogram<T: Real>(pg: &CrossPeriodogram<T>, m: usize) -> Result<T> {
    pg.check_bandwidth(m, 3)?;
    let (xs, ys): (Vec<T>, Vec<T>) = pg.frequencies[..m]
        .iter()
        .zip(&pg.values[..m])
        .filter(|(_, v)| v.norm() > T::zero())
        .map(|(&f, v)| (f.ln(), v.norm().ln()))
        .unzip();
    if xs.len() < 3 {
        return Err(Error::estimation("fewer than 3 nonzero cross-periodogram ordinates"));
    }
    let b = ols_slope(&xs, &ys)?;
    Ok((T::one() - b) / T::lit(2.0))
}

pub fn xpe_estimate<T: Real>(pair: &SeriesPair<T>, cfg: &FreqEstimatorConfig) -> Result<T> {
    let (pg, m) = cfg.smoothed_periodogram(pair)?;
    xpe_from_periodogram(&pg, m)
}

/// Cross-Whittle objective `R(H)` over the lowest `m` frequencies.
pub fn lxw_objective<T: Real>(pg: &CrossPeriodogram<T>, h: T, m: usize) -> Result<T> {
    pg.check_bandwidth(m, 2)?;
    let moduli: Vec<T> = pg.values[..m].iter().map(|c| c.norm()).collect();
    if moduli.iter().all(|&v| v == T::zero()) {
        return Err(Error::estimation("all cross-periodogram moduli are zero"));
    }
    let logs: Vec<T> = pg.frequencies[..m].iter().map(|f| f.ln()).collect();
    Ok(objective_value(&moduli, &logs, h))
}

fn objective_value<T: Real>(moduli: &[T], log_freqs: &[T], h: T) -> T {
    let m = T::count(moduli.len());
    let e = T::lit(2.0) * h - T::one();
    let weighted = moduli
        .iter()
        .zip(log_freqs)
        .map(|(&v, &l)| (e * l).exp() * v)
        .sum::<T>()
        / m;
    weighted.ln() - e * log_freqs.iter().copied().sum::<T>() / m
}

const LXW_GRID_STEP: f64 = 0.01;
const LXW_TOL: f64 = 1e-6;

/// LXW on a prepared periodogram: argmin of [`lxw_objective`] over
/// `[lo, hi]` by a 0.01-step grid scan followed by golden-section search
/// between the neighbours of the best grid point.
pub fn lxw_from_periodogram<T: Real>(pg: &CrossPeriodogram<T>, m: usize, lo: f64, hi: f64) -> Result<T> {
    if !(lo < hi) {
        return Err(Error::invalid("search interval must satisfy lo < hi"));
    }
    pg.check_bandwidth(m, 2)?;
    let moduli: Vec<T> = pg.values[..m].iter().map(|c| c.norm()).collect();
    if moduli.iter().all(|&v| v == T::zero()) {
        return Err(Error::estimation("all cross-periodogram moduli are zero"));
    }
    let logs: Vec<T> = pg.frequencies[..m].iter().map(|f| f.ln()).collect();
    let r = |h: f64| objective_value(&moduli, &logs, T::lit(h)).as_f64();

    let steps = ((hi - lo) / LXW_GRID_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| (lo + k as f64 * LXW_GRID_STEP).min(hi))
        .collect();
    let (best, _) = grid
        .iter()
        .enumerate()
        .map(|(k, &h)| (k, r(h)))
        .fold((0, f64::INFINITY), |acc, (k, v)| if v < acc.1 { (k, v) } else { acc });
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let h = golden_section(r, a, b, LXW_TOL);
    if !h.is_finite() {
        return Err(Error::estimation("cross-Whittle objective is not finite"));
    }
    Ok(T::lit(h))
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn lxw_estimate<T: Real>(pair: &SeriesPair<T>, cfg: &FreqEstimatorConfig) -> Result<T> {
    let (pg, m) = cfg.smoothed_periodogram(pair)?;
    lxw_from_periodogram(&pg, m, cfg.search_lo, cfg.search_hi)
}
