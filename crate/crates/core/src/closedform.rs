//! Closed-form distortion moments for the third-order amplifier under
//! i.i.d. Rayleigh fading with MR combining. All functions take the back-off
//! in dB and convert it once; everything else is linear.

use crate::numerics::{from_db, Complex64};
use crate::{Error, Result};

fn scale(alpha: f64, boff_db: f64, p: f64) -> f64 {
    let b = from_db(boff_db);
    2.0 * alpha * alpha * p / (b * b)
}

/// `E{h_kᴴC_ηηh_k} / E{‖h_k‖²}` including the cross-antenna correlation:
/// `(2α²p/b²)(K + 6 + 9/K + 4/K² + 2M(K+1)/K²)`.
pub fn lemma2_correlated(alpha: f64, boff_db: f64, p: f64, m: usize, k: usize) -> f64 {
    let (m, k) = (m as f64, k as f64);
    scale(alpha, boff_db, p) * (k + 6.0 + 9.0 / k + 4.0 / (k * k) + 2.0 * m * (k + 1.0) / (k * k))
}

/// Same moment with `C_ηη` replaced by its diagonal:
/// `(2α²p/b²)(K + 6 + 11/K + 6/K²)`. Does not depend on M.
pub fn lemma2_uncorrelated(alpha: f64, boff_db: f64, p: f64, k: usize) -> f64 {
    let k = k as f64;
    scale(alpha, boff_db, p) * (k + 6.0 + 11.0 / k + 6.0 / (k * k))
}

/// Correlated over uncorrelated distortion power, `1 + 2(M−1)/((K+2)(K+3))`.
/// Independent of the amplifier parameters.
pub fn distortion_ratio(m: usize, k: usize) -> f64 {
    let (m, k) = (m as f64, k as f64);
    1.0 + 2.0 * (m - 1.0) / ((k + 2.0) * (k + 3.0))
}

/// `E{|h_kᴴDh_k|²} / E{‖h_k‖²}`; multiplied by `p(1−κ)` it is the UE
/// transmit-distortion power seen through MR combining.
pub fn ue_distortion_moment(alpha: f64, boff_db: f64, m: usize, k: usize) -> f64 {
    let b = from_db(boff_db);
    let (m, k) = (m as f64, k as f64);
    (m + 1.0) - 4.0 * alpha * (m * k + k + m + 3.0) / (b * k)
        + 4.0 * alpha * alpha * (m * k * k + 8.0 * k + 11.0 + 2.0 * m * k + k * k + m) / (b * b * k * k)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SignalToDistortion {
    /// Linear amplifier (`α = 0`).
    NoDistortion,
    Ratio(f64),
}

impl SignalToDistortion {
    pub fn value(self) -> f64 {
        match self {
            Self::NoDistortion => f64::INFINITY,
            Self::Ratio(r) => r,
        }
    }
}

/// Per-antenna signal-to-distortion ratio of the amplifier,
/// `[D C_uu Dᴴ]_ii / [C_ηη]_ii = b²(1 − 2α/b)² / (2α²)` when `ρ_ii = pK`.
pub fn lna_signal_to_distortion(alpha: f64, boff_db: f64) -> Result<SignalToDistortion> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", alpha, "finite value >= 0"));
    }
    if alpha == 0.0 {
        return Ok(SignalToDistortion::NoDistortion);
    }
    let b = from_db(boff_db);
    let gain = 1.0 - 2.0 * alpha / b;
    Ok(SignalToDistortion::Ratio(b * b * gain * gain / (2.0 * alpha * alpha)))
}

/// Correlation coefficient of the distortion given that of the signal:
/// `ξ_η = |ξ_u|²·ξ_u`.
pub fn distortion_corr_coeff(xi_u: Complex64) -> Result<Complex64> {
    if !(xi_u.norm() <= 1.0 + 1e-12) {
        return Err(Error::Domain(format!("|xi_u| = {} exceeds 1", xi_u.norm())));
    }
    Ok(xi_u * xi_u.norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosedFormReport {
    pub corr_distortion: f64,
    pub uncorr_distortion: f64,
    pub ratio: f64,
    pub ue_moment: f64,
    pub lna_sdr: SignalToDistortion,
}

pub fn closed_form_report(alpha: f64, boff_db: f64, p: f64, m: usize, k: usize) -> Result<ClosedFormReport> {
    if m < 1 || k < 1 {
        return Err(Error::invalid("M/K", format!("{m}/{k}"), ">= 1"));
    }
    Ok(ClosedFormReport {
        corr_distortion: lemma2_correlated(alpha, boff_db, p, m, k),
        uncorr_distortion: lemma2_uncorrelated(alpha, boff_db, p, k),
        ratio: distortion_ratio(m, k),
        ue_moment: ue_distortion_moment(alpha, boff_db, m, k),
        lna_sdr: lna_signal_to_distortion(alpha, boff_db)?,
    })
}
