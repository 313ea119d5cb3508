//! Per-antenna memoryless receiver nonlinearities and their Bussgang
//! decomposition `z = D·u + η`.
//!
//! For the third-order AM-AM model `g(u) = u − a|u|²u` both pieces have
//! closed forms given the signal covariance `C_uu = [ρ_ij]`:
//!
//! ```text
//! d_m      = 1 − 2·a_m·ρ_mm
//! [C_ηη]_ij = 2·a_i·a_j·|ρ_ij|²·ρ_ij      (= 2A(C_uu ⊙ C_uu* ⊙ C_uu)A)
//! ```
//!
//! For any other map the decomposition is estimated by sampling
//! `u ~ CN(0, C_uu)` ([`empirical_bussgang`]).

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::channel::{ChannelRealization, ScenarioConfig};
use crate::numerics::{from_db, Complex64, ComplexMatrix, ComplexVector, CorrelatedSampler, RngStream};
use crate::{Error, Result};

/// Deterministic per-antenna map `(antenna index, input) -> output`.
pub type AntennaMap = Arc<dyn Fn(usize, Complex64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
pub enum NonlinearityModel {
    /// `g_m(u) = u`.
    Ideal,
    /// `g_m(u) = u − a_m|u|²u`, one non-negative coefficient per antenna.
    ThirdOrder { a: Vec<f64> },
    Custom(AntennaMap),
}

impl fmt::Debug for NonlinearityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ideal => write!(f, "Ideal"),
            Self::ThirdOrder { a } => f.debug_struct("ThirdOrder").field("a", a).finish(),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl NonlinearityModel {
    pub fn third_order(a: Vec<f64>) -> Result<Self> {
        if let Some(bad) = a.iter().find(|x| !(**x >= 0.0 && x.is_finite())) {
            return Err(Error::invalid("a", bad, "finite coefficients >= 0"));
        }
        Ok(Self::ThirdOrder { a })
    }

    /// Same coefficient on every one of `m` antennas.
    pub fn third_order_uniform(a: f64, m: usize) -> Result<Self> {
        Self::third_order(vec![a; m])
    }

    pub fn custom<F>(map: F) -> Self
    where
        F: Fn(usize, Complex64) -> Complex64 + Send + Sync + 'static,
    {
        Self::Custom(Arc::new(map))
    }

    #[inline]
    pub fn apply_at(&self, antenna: usize, u: Complex64) -> Complex64 {
        match self {
            Self::Ideal => u,
            Self::ThirdOrder { a } => u - u * (a[antenna] * u.norm_sqr()),
            Self::Custom(map) => map(antenna, u),
        }
    }
}

/// Element-wise `z_m = g_m(u_m)`.
pub fn apply_nonlinearity(model: &NonlinearityModel, u: &ComplexVector) -> Result<ComplexVector> {
    if let NonlinearityModel::ThirdOrder { a } = model {
        if a.len() != u.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} antennas",
                a.len(),
                u.len()
            )));
        }
    }
    Ok(ComplexVector::from_iterator(
        u.len(),
        u.iter().enumerate().map(|(m, &x)| model.apply_at(m, x)),
    ))
}

/// `a = α / (b_off · E{|u_m|²})` with `b_off` given in dB.
pub fn amplifier_coeff_for_power(alpha: f64, boff_db: f64, avg_power: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    alpha / (from_db(boff_db) * avg_power)
}

/// Coefficient for i.i.d. Rayleigh fading, where `E{|u_m|²} = pK`.
pub fn amplifier_gain_coeff(alpha: f64, boff_db: f64, p: f64, k: usize) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid("alpha", alpha, "finite value >= 0"));
    }
    if !(boff_db >= 0.0 && boff_db.is_finite()) {
        return Err(Error::invalid("boff_db", boff_db, "finite value >= 0 dB"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid("p", p, "finite value > 0"));
    }
    if k < 1 {
        return Err(Error::invalid("K", k, ">= 1"));
    }
    Ok(amplifier_coeff_for_power(alpha, boff_db, p * k as f64))
}

/// Which distortion covariance a computation uses: the exact one, or its
/// diagonal (cross-antenna correlation neglected).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DistortionMode {
    Full,
    Diagonal,
}

impl DistortionMode {
    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Diagonal => "diagonal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Some(Self::Full),
            "diagonal" | "diag" => Some(Self::Diagonal),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BussgangMode {
    Analytic,
    Empirical,
}

/// `D = diag(d_1..d_M)` and the distortion covariance `C_ηη`.
#[derive(Clone, Debug)]
pub struct BussgangDecomposition {
    pub gains: ComplexVector,
    pub c_eta: ComplexMatrix,
    pub mode: BussgangMode,
}

impl BussgangDecomposition {
    pub fn d_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.gains)
    }

    /// `D·H`, i.e. every row of `h` scaled by its antenna gain.
    pub fn effective_channel(&self, h: &ComplexMatrix) -> ComplexMatrix {
        let mut g = h.clone();
        for (mut row, d) in g.row_iter_mut().zip(self.gains.iter()) {
            row *= *d;
        }
        g
    }

    pub fn c_eta_for(&self, mode: DistortionMode) -> ComplexMatrix {
        match mode {
            DistortionMode::Full => self.c_eta.clone(),
            DistortionMode::Diagonal => ComplexMatrix::from_diagonal(&self.c_eta.diagonal()),
        }
    }
}

fn check_coeffs(a: &[f64], c_uu: &ComplexMatrix) -> Result<()> {
    if !c_uu.is_square() || a.len() != c_uu.nrows() {
        return Err(Error::Shape(format!(
            "{} coefficients for a {}x{} covariance",
            a.len(),
            c_uu.nrows(),
            c_uu.ncols()
        )));
    }
    Ok(())
}

/// `d_m = 1 − 2·a_m·ρ_mm` (real).
pub fn bussgang_gain_third_order(a: &[f64], c_uu: &ComplexMatrix) -> Result<ComplexVector> {
    check_coeffs(a, c_uu)?;
    Ok(ComplexVector::from_iterator(
        a.len(),
        a.iter()
            .enumerate()
            .map(|(m, &am)| Complex64::new(1.0 - 2.0 * am * c_uu[(m, m)].re, 0.0)),
    ))
}

/// `[C_ηη]_ij = 2·a_i·a_j·|ρ_ij|²·ρ_ij`.
pub fn distortion_covariance_third_order(a: &[f64], c_uu: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_coeffs(a, c_uu)?;
    let n = a.len();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| {
        let rho = c_uu[(i, j)];
        rho * (2.0 * a[i] * a[j] * rho.norm_sqr())
    }))
}

pub fn analytic_bussgang(a: &[f64], c_uu: &ComplexMatrix) -> Result<BussgangDecomposition> {
    Ok(BussgangDecomposition {
        gains: bussgang_gain_third_order(a, c_uu)?,
        c_eta: distortion_covariance_third_order(a, c_uu)?,
        mode: BussgangMode::Analytic,
    })
}

/// Analytic decomposition for a scenario's third-order amplifier on one
/// channel draw. `a` comes from the unconditional average power, `ρ_mm`
/// from the realization.
pub fn third_order_bussgang(cfg: &ScenarioConfig, ch: &ChannelRealization) -> Result<BussgangDecomposition> {
    let a = vec![cfg.amplifier_coeff(); ch.antennas()];
    analytic_bussgang(&a, &ch.c_uu)
}

/// Sample-based decomposition plus diagnostics.
#[derive(Clone, Debug)]
pub struct EmpiricalBussgang {
    pub decomposition: BussgangDecomposition,
    /// `Ê{η̂·uᴴ}` with `η̂ = z − D̂u`; vanishes as the sample count grows.
    pub eta_u_cross: ComplexMatrix,
    /// Standard error of each `d̂_m`.
    pub gain_stderr: DVector<f64>,
    pub n_samples: usize,
}

pub const MIN_EMPIRICAL_SAMPLES: usize = 1000;

/// Estimates `D` and `C_ηη` by drawing `u ~ CN(0, C_uu)` and pushing it
/// through the model.
///
/// `d̂_m = Ê{g_m(u_m)u_m*} / Ê{|u_m|²}` and `Ĉ_ηη = Ê{η̂·η̂ᴴ}` with
/// `η̂ = z − D̂u`, expanded in the accumulated sample moments. Antennas with
/// `ρ_mm = 0` get `d̂_m = 0`.
pub fn empirical_bussgang(
    model: &NonlinearityModel,
    c_uu: &ComplexMatrix,
    n_samples: usize,
    rng: &mut RngStream,
) -> Result<EmpiricalBussgang> {
    if n_samples < MIN_EMPIRICAL_SAMPLES {
        return Err(Error::invalid("n_samples", n_samples, ">= 1000"));
    }
    let mut sampler = CorrelatedSampler::new(c_uu)?;
    let m = sampler.dim();
    if let NonlinearityModel::ThirdOrder { a } = model {
        check_coeffs(a, c_uu)?;
    }

    let one = Complex64::new(1.0, 0.0);
    let mut u = ComplexVector::zeros(m);
    let mut z = ComplexVector::zeros(m);
    let mut czz = ComplexMatrix::zeros(m, m);
    let mut czu = ComplexMatrix::zeros(m, m);
    let mut cuu = ComplexMatrix::zeros(m, m);
    let mut gain_sq = DVector::<f64>::zeros(m);
    for _ in 0..n_samples {
        sampler.sample_into(rng, &mut u);
        for i in 0..m {
            z[i] = model.apply_at(i, u[i]);
            gain_sq[i] += (z[i] * u[i].conj()).norm_sqr();
        }
        czz.gerc(one, &z, &z, one);
        czu.gerc(one, &z, &u, one);
        cuu.gerc(one, &u, &u, one);
    }
    let inv_n = Complex64::new(1.0 / n_samples as f64, 0.0);
    czz *= inv_n;
    czu *= inv_n;
    cuu *= inv_n;

    let mut gains = ComplexVector::zeros(m);
    let mut gain_stderr = DVector::<f64>::zeros(m);
    for i in 0..m {
        let rho = cuu[(i, i)].re;
        if c_uu[(i, i)].re > 0.0 && rho > 0.0 {
            let mean = czu[(i, i)];
            gains[i] = mean / rho;
            let var = (gain_sq[i] / n_samples as f64 - mean.norm_sqr()).max(0.0);
            gain_stderr[i] = (var / n_samples as f64).sqrt() / rho;
        }
    }
    let d = ComplexMatrix::from_diagonal(&gains);
    let eta_u_cross = &czu - &d * &cuu;
    let c_eta = &czz - &d * czu.adjoint() - &czu * d.adjoint() + &d * &cuu * d.adjoint();
    Ok(EmpiricalBussgang {
        decomposition: BussgangDecomposition {
            gains,
            c_eta,
            mode: BussgangMode::Empirical,
        },
        eta_u_cross,
        gain_stderr,
        n_samples,
    })
}

/// Probability that a CN(0, ρ) input exceeds the monotone region
/// `|u| ≤ 1/√(3a)` of the third-order model: `exp(−1/(3aρ))`.
pub fn clip_probability(a: f64, rho_mm: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::invalid("a", a, "finite value >= 0"));
    }
    if !(rho_mm > 0.0 && rho_mm.is_finite()) {
        return Err(Error::invalid("rho_mm", rho_mm, "finite value > 0"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok((-1.0 / (3.0 * a * rho_mm)).exp())
}

/// Correlation coefficient `c_ij / √(c_ii·c_jj)`, or `None` if either
/// diagonal entry is zero.
pub fn correlation_coefficient(c: &ComplexMatrix, i: usize, j: usize) -> Option<Complex64> {
    let norm = (c[(i, i)].re * c[(j, j)].re).sqrt();
    (norm > 0.0).then(|| c[(i, j)] / norm)
}
