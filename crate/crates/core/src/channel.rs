//! Scenario parameters and i.i.d. Rayleigh block-fading channel draws.

use crate::combining::CombinerKind;
use crate::hardware::{self, DistortionMode};
use crate::numerics::{from_db, Complex64, ComplexMatrix, RngStream};
use crate::se::DiagScope;
use crate::{Error, Result};

/// All parameters of one uplink scenario.
///
/// Powers are linear. `boff_db` is the only dB quantity and is converted by
/// [`ScenarioConfig::boff_linear`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    /// BS antennas.
    pub m: usize,
    /// Single-antenna UEs.
    pub k: usize,
    /// Per-UE transmit power.
    pub p: f64,
    /// Receiver noise power.
    pub sigma2: f64,
    /// Amplifier nonlinearity level (1/3 is the worst case).
    pub alpha: f64,
    pub boff_db: f64,
    /// UE hardware quality; 1 means ideal UE transmitters.
    pub kappa: f64,
    pub combiner: CombinerKind,
    pub distortion_mode: DistortionMode,
    pub diag_scope: DiagScope,
    pub trials: usize,
    pub seed: u64,
    /// Optional per-UE large-scale fading; all ones when `None`.
    pub path_loss: Option<Vec<f64>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            m: 200,
            k: 1,
            p: 1.0,
            sigma2: 1.0,
            alpha: 1.0 / 3.0,
            boff_db: 7.0,
            kappa: 0.99,
            combiner: CombinerKind::DaMmse,
            distortion_mode: DistortionMode::Full,
            diag_scope: DiagScope::Both,
            trials: 2000,
            seed: 1,
            path_loss: None,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::invalid("M", self.m, ">= 1"));
        }
        if self.k < 1 {
            return Err(Error::invalid("K", self.k, ">= 1"));
        }
        if !(self.p > 0.0 && self.p.is_finite()) {
            return Err(Error::invalid("p", self.p, "finite value > 0"));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid("sigma2", self.sigma2, "finite value > 0"));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", self.alpha, "finite value >= 0"));
        }
        if !(self.boff_db >= 0.0 && self.boff_db.is_finite()) {
            return Err(Error::invalid("boff_db", self.boff_db, "finite value >= 0 dB"));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return Err(Error::invalid("kappa", self.kappa, "[0,1]"));
        }
        if self.trials < 1 {
            return Err(Error::invalid("trials", self.trials, ">= 1"));
        }
        if let Some(beta) = &self.path_loss {
            if beta.len() != self.k {
                return Err(Error::invalid(
                    "path_loss",
                    format!("{} entries", beta.len()),
                    &format!("exactly K = {} entries", self.k),
                ));
            }
            if let Some(bad) = beta.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
                return Err(Error::invalid("path_loss", bad, "finite values > 0"));
            }
        }
        Ok(())
    }

    pub fn boff_linear(&self) -> f64 {
        from_db(self.boff_db)
    }

    /// Large-scale fading of UE `k`.
    pub fn large_scale(&self, k: usize) -> f64 {
        self.path_loss.as_ref().map_or(1.0, |b| b[k])
    }

    /// Average received power per antenna, `E{|u_m|²} = p·Σβ_k` (= pK by default).
    pub fn average_rx_power(&self) -> f64 {
        self.p * (0..self.k).map(|k| self.large_scale(k)).sum::<f64>()
    }

    /// Third-order coefficient `a` shared by all antennas.
    pub fn amplifier_coeff(&self) -> f64 {
        hardware::amplifier_coeff_for_power(self.alpha, self.boff_db, self.average_rx_power())
    }
}

/// One channel draw `H` (M×K) and its conditional signal covariance
/// `C_uu = p·H·Hᴴ`.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub c_uu: ComplexMatrix,
    pub p: f64,
}

impl ChannelRealization {
    pub fn from_channel(h: ComplexMatrix, p: f64) -> Self {
        let c_uu = (&h * h.adjoint()) * Complex64::new(p, 0.0);
        Self { h, c_uu, p }
    }

    pub fn antennas(&self) -> usize {
        self.h.nrows()
    }

    pub fn users(&self) -> usize {
        self.h.ncols()
    }
}

/// Draws `h_k ~ CN(0, β_k·I_M)` independently for every UE.
pub fn sample_channel(cfg: &ScenarioConfig, rng: &mut RngStream) -> Result<ChannelRealization> {
    cfg.validate()?;
    let mut h = ComplexMatrix::zeros(cfg.m, cfg.k);
    for k in 0..cfg.k {
        let scale = cfg.large_scale(k).sqrt();
        for m in 0..cfg.m {
            h[(m, k)] = rng.complex_gaussian() * scale;
        }
    }
    Ok(ChannelRealization::from_channel(h, cfg.p))
}

/// Same diagonal, zero off-diagonal.
pub fn diag_of(c: &ComplexMatrix) -> ComplexMatrix {
    debug_assert!(c.is_square());
    ComplexMatrix::from_diagonal(&c.diagonal())
}
