//! Simulated input series: the two heavy-tail settings, standardization,
//! profiles and an exact fractional Gaussian noise generator used as a
//! known-H reference.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stable_dist::StableParams;

/// Scale of the stable legs, `γ = √2/2`, which makes the α = 2 leg a unit
/// variance Gaussian.
pub const STABLE_LEG_GAMMA: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SettingTag {
    /// `x` standard Gaussian, `y` α-stable.
    #[serde(rename = "I")]
    SettingI,
    /// Both legs α-stable with the same α.
    #[serde(rename = "II")]
    SettingII,
}

impl SettingTag {
    pub const ALL: [SettingTag; 2] = [SettingTag::SettingI, SettingTag::SettingII];

    pub fn as_str(self) -> &'static str {
        match self {
            SettingTag::SettingI => "I",
            SettingTag::SettingII => "II",
        }
    }
}

impl fmt::Display for SettingTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SettingTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "1" | "i" => Ok(SettingTag::SettingI),
            "II" | "2" | "ii" => Ok(SettingTag::SettingII),
            other => Err(Error::invalid(format!("unknown setting `{other}` (expected I or II)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSetting<T> {
    pub tag: SettingTag,
    pub alpha: T,
}

impl<T: Real> SimulationSetting<T> {
    pub fn new(tag: SettingTag, alpha: T) -> Result<Self> {
        // validates α once, up front
        StableParams::symmetric(alpha, T::lit(STABLE_LEG_GAMMA))?;
        Ok(Self { tag, alpha })
    }

    fn stable_leg(&self) -> Result<StableParams<T>> {
        StableParams::symmetric(self.alpha, T::lit(STABLE_LEG_GAMMA))
    }
}

/// Provenance attached to a pair.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairMeta {
    pub setting: Option<SettingTag>,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesPair<T> {
    x: Vec<T>,
    y: Vec<T>,
    pub meta: PairMeta,
}

impl<T: Real> SeriesPair<T> {
    pub fn new(x: Vec<T>, y: Vec<T>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::invalid(format!(
                "series lengths differ: {} vs {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::invalid("series must have at least 2 observations"));
        }
        Ok(Self { x, y, meta: PairMeta::default() })
    }

    pub fn with_meta(mut self, meta: PairMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same pair with legs exchanged.
    pub fn swapped(&self) -> Self {
        Self { x: self.y.clone(), y: self.x.clone(), meta: self.meta.clone() }
    }

    pub fn into_parts(self) -> (Vec<T>, Vec<T>) {
        (self.x, self.y)
    }
}

/// Draws one pair for `setting`, both legs standardized.
///
/// Each leg is drawn from its own generator split off `rng`, so the legs are
/// independent and the `y` leg does not depend on how many draws `x` used.
pub fn generate_pair<T: Real, R: Rng + ?Sized>(
    setting: &SimulationSetting<T>,
    len: usize,
    rng: &mut R,
) -> Result<SeriesPair<T>> {
    if len < 2 {
        return Err(Error::invalid("series length must be at least 2"));
    }
    let stable = setting.stable_leg()?;
    let mut x_rng = ChaCha8Rng::from_seed(rng.random());
    let mut y_rng = ChaCha8Rng::from_seed(rng.random());

    let x_raw = match setting.tag {
        SettingTag::SettingI => gaussian_noise(len, &mut x_rng),
        SettingTag::SettingII => stable.sample(len, &mut x_rng),
    };
    let y_raw = stable.sample(len, &mut y_rng);

    let pair = SeriesPair::new(standardize(&x_raw)?, standardize(&y_raw)?)?;
    Ok(pair.with_meta(PairMeta {
        setting: Some(setting.tag),
        alpha: Some(setting.alpha.as_f64()),
        seed: None,
    }))
}

/// i.i.d. standard normal draws.
pub fn gaussian_noise<T: Real, R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<T> {
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            T::lit(z)
        })
        .collect()
}

/// Centres the series and scales it to unit variance (denominator `T`).
pub fn standardize<T: Real>(series: &[T]) -> Result<Vec<T>> {
    if series.len() < 2 {
        return Err(Error::DegenerateSeries("fewer than 2 observations".into()));
    }
    let n = T::count(series.len());
    let mean = series.iter().copied().sum::<T>() / n;
    let var = series.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    // a constant series can leave rounding residue of order (n ε max|x|)²
    let max_abs = series.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let floor = n * T::epsilon() * max_abs;
    if !(var > floor * floor) || !var.is_finite() {
        return Err(Error::DegenerateSeries(format!("variance is {var}")));
    }
    let sd = var.sqrt();
    Ok(series.iter().map(|&v| (v - mean) / sd).collect())
}

/// Cumulative sum of deviations from the sample mean.
pub fn profile<T: Real>(series: &[T]) -> Vec<T> {
    if series.is_empty() {
        return Vec::new();
    }
    let mean = series.iter().copied().sum::<T>() / T::count(series.len());
    series
        .iter()
        .scan(T::zero(), |acc, &v| {
            *acc = *acc + (v - mean);
            Some(*acc)
        })
        .collect()
}

/// Autocovariance of unit-variance fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance<T: Real>(hurst: T, k: usize) -> T {
    let two_h = T::lit(2.0) * hurst;
    let k = T::count(k);
    let half = T::lit(0.5);
    half * ((k + T::one()).powf(two_h) - T::lit(2.0) * k.powf(two_h) + (k - T::one()).abs().powf(two_h))
}

/// Fractional Gaussian noise of length `len` by circulant embedding
/// (Davies–Harte). The output is an exact draw from the stationary Gaussian
/// law with autocovariance [`fgn_autocovariance`].
pub fn fgn_generate<T: Real, R: Rng + ?Sized>(hurst: T, len: usize, rng: &mut R) -> Result<Vec<T>> {
    if !(hurst > T::zero() && hurst < T::one()) {
        return Err(Error::invalid(format!("Hurst exponent must lie in (0, 1), got {hurst}")));
    }
    if len < 2 {
        return Err(Error::invalid("series length must be at least 2"));
    }
    let n = len;
    let size = 2 * n;

    // first row of the 2n circulant: γ(0..=n) followed by γ(n-1..=1)
    let mut row: Vec<Complex<T>> = (0..=n)
        .chain((1..n).rev())
        .map(|k| Complex::new(fgn_autocovariance(hurst, k), T::zero()))
        .collect();
    debug_assert_eq!(row.len(), size);

    let mut planner = FftPlanner::<T>::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);

    let max_eig = row.iter().map(|c| c.re).fold(T::zero(), T::max);
    let floor = -T::lit(1e-8) * max_eig.max(T::one());
    let mut eig = Vec::with_capacity(size);
    for (k, c) in row.iter().enumerate() {
        if c.re < floor {
            return Err(Error::Embedding(format!(
                "negative circulant eigenvalue {} at index {k}",
                c.re
            )));
        }
        eig.push(c.re.max(T::zero()));
    }

    let size_t = T::count(size);
    let mut w = vec![Complex::new(T::zero(), T::zero()); size];
    let mut normal = || T::lit(StandardNormal.sample(rng));
    w[0] = Complex::new((eig[0] / size_t).sqrt() * normal(), T::zero());
    w[n] = Complex::new((eig[n] / size_t).sqrt() * normal(), T::zero());
    let twice_size = T::lit(2.0) * size_t;
    for k in 1..n {
        let scale = (eig[k] / twice_size).sqrt();
        let z = Complex::new(scale * normal(), scale * normal());
        w[k] = z;
        w[size - k] = z.conj();
    }
    fft.process(&mut w);
    Ok(w.into_iter().take(n).map(|c| c.re).collect())
}
