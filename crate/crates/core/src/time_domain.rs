//! Time-domain estimators of the bivariate Hurst exponent: detrended
//! cross-correlation analysis (DCCA), detrending moving-average
//! cross-correlation analysis (DMCA) and height cross-correlation analysis
//! (HXA).
//!
//! All three work on the profiles of the two series and reduce to a
//! log–log OLS slope of a covariance-type fluctuation against scale. DCCA and
//! DMCA fluctuations scale as `s^{2H}`; the HXA height covariance of the
//! increments also scales as `τ^{2H}` (independent random-walk profiles give
//! `τ^1`).
//!
//! For a cross pair the local covariances change sign. Averaging them signed
//! and then taking `|F²|` makes the fluctuation of independent series scale
//! as `s^{3/2}` (a mean of `T/s` random-sign terms of size `s`), which reads
//! as `H = 0.75`. [`Aggregation::Absolute`], the default, averages the
//! absolute products of residuals instead, the same way HXA treats its
//! increments, so that independent series give 0.5. Fits always use
//! `|value|` and drop exact zeros.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::ols_slope;
use crate::scalar::Real;
use crate::series_gen::{profile, SeriesPair};

/// Arithmetic grid of integer scales `s_min, s_min + step, …, ≤ s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScaleGrid {
    s_min: usize,
    s_max: usize,
    step: usize,
}

impl ScaleGrid {
    pub const MIN_SCALE: usize = 4;
    pub const MIN_POINTS: usize = 3;

    pub fn new(s_min: usize, s_max: usize, step: usize) -> Result<Self> {
        if s_min < Self::MIN_SCALE {
            return Err(Error::invalid(format!("smallest scale must be >= 4, got {s_min}")));
        }
        if step == 0 {
            return Err(Error::invalid("scale step must be >= 1"));
        }
        let grid = Self { s_min, s_max, step };
        if grid.len() < Self::MIN_POINTS {
            return Err(Error::invalid(format!(
                "scale grid {s_min}..={s_max} step {step} has fewer than 3 scales"
            )));
        }
        Ok(grid)
    }

    /// DCCA grid `{10, 20, …, ⌊T/5⌋}`.
    pub fn dcca_default(len: usize) -> Result<Self> {
        DccaConfig::default().grid(len)
    }

    /// DMCA grid `{11, 13, …, 1 + ⌊T/5⌋}` with the upper end rounded down to odd.
    pub fn dmca_default(len: usize) -> Result<Self> {
        DmcaConfig::default().grid(len)
    }

    pub fn s_min(&self) -> usize {
        self.s_min
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        if self.s_max < self.s_min {
            0
        } else {
            (self.s_max - self.s_min) / self.step + 1
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scales(&self) -> impl Iterator<Item = usize> + '_ {
        (self.s_min..=self.s_max).step_by(self.step)
    }

    fn check_fits(&self, len: usize) -> Result<()> {
        if self.s_max > len {
            return Err(Error::ScaleTooLarge(format!(
                "largest scale {} exceeds series length {len}",
                self.s_max
            )));
        }
        Ok(())
    }
}

/// How products of detrended residuals are combined into `F²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean of `|r_x r_y|`; always non-negative.
    #[default]
    Absolute,
    /// Mean of `r_x r_y`.
    Signed,
}

impl Aggregation {
    fn apply<T: Real>(self, v: T) -> T {
        match self {
            Aggregation::Absolute => v.abs(),
            Aggregation::Signed => v,
        }
    }
}

/// DCCA grid rule: `s_min, s_min + step, …, ⌊T·max_fraction⌋`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DccaConfig {
    pub s_min: usize,
    pub step: usize,
    pub max_fraction: f64,
    pub aggregation: Aggregation,
}

impl Default for DccaConfig {
    fn default() -> Self {
        Self { s_min: 10, step: 10, max_fraction: 0.2, aggregation: Aggregation::Absolute }
    }
}

impl DccaConfig {
    pub fn grid(&self, len: usize) -> Result<ScaleGrid> {
        let s_max = (len as f64 * self.max_fraction).floor() as usize;
        ScaleGrid::new(self.s_min, s_max, self.step)
    }
}

/// DMCA grid rule: odd windows `k_min, k_min + step, …, 1 + ⌊T·max_fraction⌋`
/// (upper end rounded down to odd).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DmcaConfig {
    pub k_min: usize,
    pub step: usize,
    pub max_fraction: f64,
    pub aggregation: Aggregation,
}

impl Default for DmcaConfig {
    fn default() -> Self {
        Self { k_min: 11, step: 2, max_fraction: 0.2, aggregation: Aggregation::Absolute }
    }
}

impl DmcaConfig {
    pub fn grid(&self, len: usize) -> Result<ScaleGrid> {
        if self.k_min.is_multiple_of(2) || !self.step.is_multiple_of(2) {
            return Err(Error::invalid("DMCA windows must be odd: odd k_min and even step"));
        }
        let mut k_max = 1 + (len as f64 * self.max_fraction).floor() as usize;
        if k_max.is_multiple_of(2) {
            k_max -= 1;
        }
        ScaleGrid::new(self.k_min, k_max.min(len), self.step)
    }
}

/// HXA settings: slopes are fitted over `τ = 1..=τ_max` for every `τ_max` in
/// `tau_max_lo..=tau_max_hi` and averaged; `nu` is the time resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HxaConfig {
    pub tau_max_lo: usize,
    pub tau_max_hi: usize,
    pub nu: usize,
}

impl Default for HxaConfig {
    fn default() -> Self {
        Self { tau_max_lo: 5, tau_max_hi: 20, nu: 1 }
    }
}

impl HxaConfig {
    fn validate(&self, len: usize) -> Result<()> {
        if self.tau_max_lo < 3 || self.tau_max_lo > self.tau_max_hi {
            return Err(Error::invalid(format!(
                "tau_max range {}..={} must satisfy 3 <= lo <= hi",
                self.tau_max_lo, self.tau_max_hi
            )));
        }
        if self.nu == 0 {
            return Err(Error::invalid("time resolution nu must be >= 1"));
        }
        if 4 * self.tau_max_hi > len {
            return Err(Error::ScaleTooLarge(format!(
                "tau_max {} exceeds a quarter of the series length {len}",
                self.tau_max_hi
            )));
        }
        Ok(())
    }
}

/// Fluctuation (or height covariance) as a function of scale.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationCurve<T> {
    points: Vec<(usize, T)>,
}

impl<T: Real> FluctuationCurve<T> {
    pub fn new(points: Vec<(usize, T)>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("curve scales must be strictly increasing"));
        }
        if points.iter().any(|&(s, v)| s == 0 || !v.is_finite()) {
            return Err(Error::estimation("curve has a zero scale or a non-finite value"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(usize, T)] {
        &self.points
    }

    /// Sub-curve with scales `<= max_scale`.
    pub fn truncated(&self, max_scale: usize) -> Self {
        Self { points: self.points.iter().copied().filter(|&(s, _)| s <= max_scale).collect() }
    }
}

/// OLS slope of `log|value|` on `log scale`. Points with a zero value are
/// skipped; fewer than three usable points is an error.
pub fn loglog_fit<T: Real>(curve: &FluctuationCurve<T>) -> Result<T> {
    let (xs, ys): (Vec<T>, Vec<T>) = curve
        .points()
        .iter()
        .filter(|(_, v)| *v != T::zero())
        .map(|&(s, v)| (T::count(s).ln(), v.abs().ln()))
        .unzip();
    if xs.len() < ScaleGrid::MIN_POINTS {
        return Err(Error::estimation(format!(
            "only {} usable points in log-log fit, need 3",
            xs.len()
        )));
    }
    ols_slope(&xs, &ys)
}

fn check_profiles<T>(x: &[T], y: &[T]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::invalid("profiles differ in length"));
    }
    Ok(())
}

/// Residuals of the OLS line through `values` against `0, 1, …`.
fn linear_residuals<T: Real>(values: &[T], out: &mut Vec<T>) {
    let n = T::count(values.len());
    let t_mean = (n - T::one()) / T::lit(2.0);
    let v_mean = values.iter().copied().sum::<T>() / n;
    let (stv, stt) = values.iter().enumerate().fold((T::zero(), T::zero()), |(stv, stt), (i, &v)| {
        let dt = T::count(i) - t_mean;
        (stv + dt * (v - v_mean), stt + dt * dt)
    });
    let slope = stv / stt;
    out.clear();
    out.extend(
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| v - v_mean - slope * (T::count(i) - t_mean)),
    );
}

/// DCCA detrended covariance `F²(s)`: the average over non-overlapping boxes
/// of length `s` (anchored at the start, remainder discarded) of the mean
/// product of linear-fit residuals. With [`Aggregation::Signed`] it may be
/// negative for a cross pair.
pub fn dcca_fluctuation<T: Real>(x_profile: &[T], y_profile: &[T], s: usize, agg: Aggregation) -> Result<T> {
    check_profiles(x_profile, y_profile)?;
    if s < 3 {
        return Err(Error::invalid(format!("DCCA box length must be >= 3, got {s}")));
    }
    let boxes = x_profile.len() / s;
    if boxes == 0 {
        return Err(Error::ScaleTooLarge(format!(
            "box length {s} exceeds series length {}",
            x_profile.len()
        )));
    }
    let mut rx = Vec::with_capacity(s);
    let mut ry = Vec::with_capacity(s);
    let s_t = T::count(s);
    let total = x_profile
        .chunks_exact(s)
        .zip(y_profile.chunks_exact(s))
        .map(|(bx, by)| {
            linear_residuals(bx, &mut rx);
            linear_residuals(by, &mut ry);
            rx.iter().zip(&ry).map(|(&a, &b)| agg.apply(a * b)).sum::<T>() / s_t
        })
        .sum::<T>();
    Ok(total / T::count(boxes))
}

pub fn dcca_curve<T: Real>(
    x_profile: &[T],
    y_profile: &[T],
    grid: &ScaleGrid,
    agg: Aggregation,
) -> Result<FluctuationCurve<T>> {
    check_profiles(x_profile, y_profile)?;
    grid.check_fits(x_profile.len())?;
    let points = grid
        .scales()
        .map(|s| dcca_fluctuation(x_profile, y_profile, s, agg).map(|f| (s, f)))
        .collect::<Result<Vec<_>>>()?;
    FluctuationCurve::new(points)
}

/// DCCA estimate: half the log–log slope of `|F²(s)|`.
pub fn dcca_estimate<T: Real>(pair: &SeriesPair<T>, grid: &ScaleGrid, agg: Aggregation) -> Result<T> {
    dcca_from_profiles(&profile(pair.x()), &profile(pair.y()), grid, agg)
}

pub fn dcca_from_profiles<T: Real>(
    x_profile: &[T],
    y_profile: &[T],
    grid: &ScaleGrid,
    agg: Aggregation,
) -> Result<T> {
    Ok(loglog_fit(&dcca_curve(x_profile, y_profile, grid, agg)?)? / T::lit(2.0))
}

/// Centred moving-average residuals `X_t − MA_κ(X)_t` at the positions
/// where a full window fits.
fn moving_average_residuals<T: Real>(values: &[T], prefix: &[T], kappa: usize, out: &mut Vec<T>) {
    let half = (kappa - 1) / 2;
    let k_t = T::count(kappa);
    out.clear();
    out.extend((half..values.len() - half).map(|t| {
        let ma = (prefix[t + half + 1] - prefix[t - half]) / k_t;
        values[t] - ma
    }));
}

fn prefix_sums<T: Real>(values: &[T]) -> Vec<T> {
    std::iter::once(T::zero())
        .chain(values.iter().scan(T::zero(), |acc, &v| {
            *acc = *acc + v;
            Some(*acc)
        }))
        .collect()
}

fn check_window(kappa: usize, len: usize) -> Result<()> {
    if kappa.is_multiple_of(2) || kappa < 3 {
        return Err(Error::invalid(format!("moving-average window must be odd and >= 3, got {kappa}")));
    }
    if kappa > len {
        return Err(Error::ScaleTooLarge(format!("window {kappa} exceeds series length {len}")));
    }
    Ok(())
}

/// DMCA detrended covariance `F²(κ)`: mean over the `T − κ + 1` positions
/// of the product of residuals from a centred, unweighted moving average of
/// odd length `κ`; no partial windows.
pub fn dmca_fluctuation<T: Real>(x_profile: &[T], y_profile: &[T], kappa: usize, agg: Aggregation) -> Result<T> {
    check_profiles(x_profile, y_profile)?;
    check_window(kappa, x_profile.len())?;
    let (px, py) = (prefix_sums(x_profile), prefix_sums(y_profile));
    let mut buf = (Vec::new(), Vec::new());
    Ok(dmca_with_prefix(x_profile, y_profile, (&px, &py), kappa, agg, &mut buf))
}

fn dmca_with_prefix<T: Real>(
    x: &[T],
    y: &[T],
    (px, py): (&[T], &[T]),
    kappa: usize,
    agg: Aggregation,
    (rx, ry): &mut (Vec<T>, Vec<T>),
) -> T {
    moving_average_residuals(x, px, kappa, rx);
    moving_average_residuals(y, py, kappa, ry);
    let n = T::count(x.len() - kappa + 1);
    rx.iter().zip(ry.iter()).map(|(&a, &b)| agg.apply(a * b)).sum::<T>() / n
}

pub fn dmca_curve<T: Real>(
    x_profile: &[T],
    y_profile: &[T],
    grid: &ScaleGrid,
    agg: Aggregation,
) -> Result<FluctuationCurve<T>> {
    check_profiles(x_profile, y_profile)?;
    grid.check_fits(x_profile.len())?;
    for kappa in grid.scales() {
        check_window(kappa, x_profile.len())?;
    }
    let (px, py) = (prefix_sums(x_profile), prefix_sums(y_profile));
    let mut buf = (Vec::new(), Vec::new());
    let points = grid
        .scales()
        .map(|k| (k, dmca_with_prefix(x_profile, y_profile, (&px, &py), k, agg, &mut buf)))
        .collect();
    FluctuationCurve::new(points)
}

/// DMCA estimate: half the log–log slope of `|F²(κ)|`.
pub fn dmca_estimate<T: Real>(pair: &SeriesPair<T>, grid: &ScaleGrid, agg: Aggregation) -> Result<T> {
    dmca_from_profiles(&profile(pair.x()), &profile(pair.y()), grid, agg)
}

pub fn dmca_from_profiles<T: Real>(
    x_profile: &[T],
    y_profile: &[T],
    grid: &ScaleGrid,
    agg: Aggregation,
) -> Result<T> {
    Ok(loglog_fit(&dmca_curve(x_profile, y_profile, grid, agg)?)? / T::lit(2.0))
}

/// Height covariance `K(τ)`: mean of `|ΔτX_t · ΔτY_t|` over
/// `t = ν, 2ν, …` with `t + τ ≤ T` (one-based), normalised by the number of
/// terms actually used.
pub fn hxa_covariance<T: Real>(x_profile: &[T], y_profile: &[T], tau: usize, nu: usize) -> Result<T> {
    check_profiles(x_profile, y_profile)?;
    if tau == 0 || nu == 0 {
        return Err(Error::invalid("tau and nu must be >= 1"));
    }
    let len = x_profile.len();
    // one-based t ∈ {ν, 2ν, …} with t + τ ≤ T  →  zero-based i = t − 1
    let (sum, count) = (nu..)
        .step_by(nu)
        .take_while(|&t| t + tau <= len)
        .map(|t| t - 1)
        .fold((T::zero(), 0usize), |(sum, count), i| {
            let dx = x_profile[i + tau] - x_profile[i];
            let dy = y_profile[i + tau] - y_profile[i];
            (sum + (dx * dy).abs(), count + 1)
        });
    if count == 0 {
        return Err(Error::ScaleTooLarge(format!("no increments of lag {tau} fit in length {len}")));
    }
    Ok(sum / T::count(count))
}

pub fn hxa_curve<T: Real>(x_profile: &[T], y_profile: &[T], tau_max: usize, nu: usize) -> Result<FluctuationCurve<T>> {
    let points = (1..=tau_max)
        .map(|tau| hxa_covariance(x_profile, y_profile, tau, nu).map(|k| (tau, k)))
        .collect::<Result<Vec<_>>>()?;
    FluctuationCurve::new(points)
}

/// HXA estimate: the mean over `τ_max` of half the log–log slope of `K(τ)`
/// on `τ = 1..=τ_max`.
pub fn hxa_estimate<T: Real>(pair: &SeriesPair<T>, cfg: &HxaConfig) -> Result<T> {
    hxa_from_profiles(&profile(pair.x()), &profile(pair.y()), cfg)
}

pub fn hxa_from_profiles<T: Real>(x_profile: &[T], y_profile: &[T], cfg: &HxaConfig) -> Result<T> {
    check_profiles(x_profile, y_profile)?;
    cfg.validate(x_profile.len())?;
    let curve = hxa_curve(x_profile, y_profile, cfg.tau_max_hi, cfg.nu)?;
    let slopes = (cfg.tau_max_lo..=cfg.tau_max_hi)
        .map(|tau_max| loglog_fit(&curve.truncated(tau_max)))
        .collect::<Result<Vec<_>>>()?;
    let n = T::count(slopes.len());
    Ok(slopes.into_iter().sum::<T>() / n / T::lit(2.0))
}
