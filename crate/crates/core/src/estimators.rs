//! Uniform front end over the six estimators.

use std::cell::OnceCell;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freq_domain::{
    ape_from_periodogram, lxw_from_periodogram, xpe_from_periodogram, CrossPeriodogram,
    FreqEstimatorConfig,
};
use crate::scalar::Real;
use crate::series_gen::{profile, SeriesPair};
use crate::time_domain::{
    dcca_from_profiles, dmca_from_profiles, hxa_from_profiles, DccaConfig, DmcaConfig, HxaConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimatorId {
    Dcca,
    Dmca,
    Hxa,
    Ape,
    Xpe,
    Lxw,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 6] = [
        EstimatorId::Dcca,
        EstimatorId::Dmca,
        EstimatorId::Hxa,
        EstimatorId::Ape,
        EstimatorId::Xpe,
        EstimatorId::Lxw,
    ];
    pub const TIME_DOMAIN: [EstimatorId; 3] = [EstimatorId::Dcca, EstimatorId::Dmca, EstimatorId::Hxa];
    pub const FREQ_DOMAIN: [EstimatorId; 3] = [EstimatorId::Ape, EstimatorId::Xpe, EstimatorId::Lxw];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Dcca => "dcca",
            EstimatorId::Dmca => "dmca",
            EstimatorId::Hxa => "hxa",
            EstimatorId::Ape => "ape",
            EstimatorId::Xpe => "xpe",
            EstimatorId::Lxw => "lxw",
        }
    }

    pub fn is_time_domain(self) -> bool {
        matches!(self, EstimatorId::Dcca | EstimatorId::Dmca | EstimatorId::Hxa)
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        EstimatorId::ALL
            .into_iter()
            .find(|id| id.as_str() == lower)
            .ok_or_else(|| Error::invalid(format!("unknown estimator `{s}`")))
    }
}

/// Tuning of all six estimators.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorConfig {
    pub dcca: DccaConfig,
    pub dmca: DmcaConfig,
    pub hxa: HxaConfig,
    pub freq: FreqEstimatorConfig,
}

impl EstimatorConfig {
    pub fn estimate<T: Real>(&self, id: EstimatorId, pair: &SeriesPair<T>) -> Result<T> {
        PreparedPair::new(pair, self).estimate(id)
    }
}

/// A pair with its profiles and smoothed cross-periodogram computed on first
/// use, so several estimators can share them.
pub struct PreparedPair<'a, T: Real> {
    pair: &'a SeriesPair<T>,
    cfg: &'a EstimatorConfig,
    profiles: OnceCell<(Vec<T>, Vec<T>)>,
    periodogram: OnceCell<Result<(CrossPeriodogram<T>, usize), String>>,
}

impl<'a, T: Real> PreparedPair<'a, T> {
    pub fn new(pair: &'a SeriesPair<T>, cfg: &'a EstimatorConfig) -> Self {
        Self { pair, cfg, profiles: OnceCell::new(), periodogram: OnceCell::new() }
    }

    fn profiles(&self) -> (&[T], &[T]) {
        let (x, y) = self
            .profiles
            .get_or_init(|| (profile(self.pair.x()), profile(self.pair.y())));
        (x, y)
    }

    fn periodogram(&self) -> Result<(&CrossPeriodogram<T>, usize)> {
        match self
            .periodogram
            .get_or_init(|| self.cfg.freq.smoothed_periodogram(self.pair).map_err(|e| e.to_string()))
        {
            Ok((pg, m)) => Ok((pg, *m)),
            Err(msg) => Err(Error::invalid(msg.clone())),
        }
    }

    pub fn estimate(&self, id: EstimatorId) -> Result<T> {
        let len = self.pair.len();
        let cfg = self.cfg;
        let h = match id {
            EstimatorId::Dcca => {
                let (x, y) = self.profiles();
                dcca_from_profiles(x, y, &cfg.dcca.grid(len)?, cfg.dcca.aggregation)?
            }
            EstimatorId::Dmca => {
                let (x, y) = self.profiles();
                dmca_from_profiles(x, y, &cfg.dmca.grid(len)?, cfg.dmca.aggregation)?
            }
            EstimatorId::Hxa => {
                let (x, y) = self.profiles();
                hxa_from_profiles(x, y, &cfg.hxa)?
            }
            EstimatorId::Ape => {
                let (pg, m) = self.periodogram()?;
                ape_from_periodogram(pg, m, cfg.freq.q, cfg.freq.ape_mode)?
            }
            EstimatorId::Xpe => {
                let (pg, m) = self.periodogram()?;
                xpe_from_periodogram(pg, m)?
            }
            EstimatorId::Lxw => {
                let (pg, m) = self.periodogram()?;
                lxw_from_periodogram(pg, m, cfg.freq.search_lo, cfg.freq.search_hi)?
            }
        };
        if !h.is_finite() {
            return Err(Error::estimation(format!("{id} produced a non-finite estimate")));
        }
        Ok(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freq_domain::{ape_estimate, lxw_estimate, xpe_estimate};
    use crate::series_gen::gaussian_noise;
    use crate::time_domain::{dcca_estimate, dmca_estimate, hxa_estimate, Aggregation, ScaleGrid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ids_round_trip() {
        for id in EstimatorId::ALL {
            assert_eq!(id.as_str().parse::<EstimatorId>().unwrap(), id);
        }
        assert_eq!("DCCA".parse::<EstimatorId>().unwrap(), EstimatorId::Dcca);
        assert!("foo".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn dispatch_matches_direct_calls() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pair = SeriesPair::<f64>::new(gaussian_noise(1000, &mut rng), gaussian_noise(1000, &mut rng)).unwrap();
        let cfg = EstimatorConfig::default();
        let prepared = PreparedPair::new(&pair, &cfg);
        let direct = [
            dcca_estimate(&pair, &ScaleGrid::dcca_default(1000).unwrap(), Aggregation::Absolute).unwrap(),
            dmca_estimate(&pair, &ScaleGrid::dmca_default(1000).unwrap(), Aggregation::Absolute).unwrap(),
            hxa_estimate(&pair, &HxaConfig::default()).unwrap(),
            ape_estimate(&pair, &cfg.freq).unwrap(),
            xpe_estimate(&pair, &cfg.freq).unwrap(),
            lxw_estimate(&pair, &cfg.freq).unwrap(),
        ];
        for (id, expected) in EstimatorId::ALL.into_iter().zip(direct) {
            assert_eq!(prepared.estimate(id).unwrap(), expected, "{id}");
        }
    }

    #[test]
    fn short_series_fail_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pair = SeriesPair::<f64>::new(gaussian_noise(40, &mut rng), gaussian_noise(40, &mut rng)).unwrap();
        let cfg = EstimatorConfig::default();
        assert!(cfg.estimate(EstimatorId::Dcca, &pair).is_err());
        assert!(cfg.estimate(EstimatorId::Xpe, &pair).is_ok());
    }
}
