//! Instantaneous SINRs, per-realization SE lower bounds and ergodic SE.
//!
//! With effective channel `G = D·H` (columns `g_i`) and distortion
//! covariance `C_ηη`, UE `k` combined with `v` sees
//!
//! ```text
//! γ_k  =      p|vᴴg_k|²  / (Σ_{i≠k} p|vᴴg_i|²                    + vᴴC_ηηv + σ²‖v‖²)
//! γ'_k =    κ·p|vᴴg_k|²  / (Σ_{i≠k} p|vᴴg_i|² + (1−κ)p|vᴴg_k|²  + vᴴC_ηηv + σ²‖v‖²)
//! ```
//!
//! and `log₂(1 + γ)` lower-bounds the mutual information for that draw.
//! Ergodic SE averages the bound over independent channel draws.

use crate::channel::{sample_channel, ChannelRealization, ScenarioConfig};
use crate::combining::{build_combiner, CombinerKind};
use crate::hardware::{third_order_bussgang, BussgangDecomposition, DistortionMode};
use crate::numerics::{mean_and_stderr, quad_form, Cholesky, Complex64, ComplexMatrix, ComplexVector, RngStream};
use crate::parallel::{try_map_indexed, Execution};
use crate::{Error, Result};

/// Where the diagonal approximation of `C_ηη` is applied when
/// [`DistortionMode::Diagonal`] is selected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagScope {
    /// Combiner construction and SINR evaluation.
    Both,
    /// Only the SINR evaluation; the combiner still sees the full `C_ηη`.
    SinrOnly,
}

impl DiagScope {
    pub fn name(self) -> &'static str {
        match self {
            Self::Both => "both",
            Self::SinrOnly => "sinr_only",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "both" => Some(Self::Both),
            "sinr_only" | "sinr-only" => Some(Self::SinrOnly),
            _ => None,
        }
    }

    /// Covariance variant the combiner should be built from.
    pub fn combiner_mode(self, mode: DistortionMode) -> DistortionMode {
        match (mode, self) {
            (DistortionMode::Diagonal, DiagScope::Both) => DistortionMode::Diagonal,
            _ => DistortionMode::Full,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SinrVariant {
    /// Ideal UE transmitters.
    IdealUe,
    /// UE transmit distortion with quality κ.
    ImpairedUe,
}

/// Everything the SINR expressions need for one channel draw.
#[derive(Clone, Debug)]
pub struct LinkModel {
    /// Effective channel `D·H`.
    pub g: ComplexMatrix,
    pub c_eta: ComplexMatrix,
    pub p: f64,
    pub sigma2: f64,
}

/// Pieces of the SINR for one combining vector.
struct Terms {
    desired: f64,
    interference: f64,
    distortion: f64,
    noise: f64,
}

impl LinkModel {
    pub fn new(h: &ComplexMatrix, bd: &BussgangDecomposition, mode: DistortionMode, p: f64, sigma2: f64) -> Self {
        Self {
            g: bd.effective_channel(h),
            c_eta: bd.c_eta_for(mode),
            p,
            sigma2,
        }
    }

    pub fn users(&self) -> usize {
        self.g.ncols()
    }

    fn check(&self, v: &ComplexVector, k: usize) -> Result<()> {
        if k >= self.users() {
            return Err(Error::Domain(format!("UE index {k} out of range 0..{}", self.users())));
        }
        if v.len() != self.g.nrows() {
            return Err(Error::Shape(format!(
                "combining vector has length {}, expected {}",
                v.len(),
                self.g.nrows()
            )));
        }
        if v.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::Domain(format!("zero combining vector for UE {k}")));
        }
        Ok(())
    }

    fn terms(&self, v: &ComplexVector, k: usize) -> Terms {
        let mut desired = 0.0;
        let mut interference = 0.0;
        for (i, g_i) in self.g.column_iter().enumerate() {
            let gain = self.p * v.dotc(&g_i).norm_sqr();
            if i == k {
                desired = gain;
            } else {
                interference += gain;
            }
        }
        Terms {
            desired,
            interference,
            distortion: quad_form(v, &self.c_eta),
            noise: self.sigma2 * v.norm_squared(),
        }
    }

    pub fn sinr_ideal_ue(&self, v: &ComplexVector, k: usize) -> Result<f64> {
        self.check(v, k)?;
        let t = self.terms(v, k);
        Ok(t.desired / (t.interference + t.distortion + t.noise))
    }

    pub fn sinr_impaired_ue(&self, v: &ComplexVector, kappa: f64, k: usize) -> Result<f64> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::invalid("kappa", kappa, "[0,1]"));
        }
        self.check(v, k)?;
        let t = self.terms(v, k);
        Ok(kappa * t.desired / (t.interference + (1.0 - kappa) * t.desired + t.distortion + t.noise))
    }

    /// `γ_k = p·g_kᴴ(Σ_{i≠k} p·g_i·g_iᴴ + C_ηη + σ²I)⁻¹g_k`, the maximum of
    /// the ideal-UE SINR over all combining vectors. Factorizes the
    /// interference-plus-noise matrix of UE `k` directly.
    pub fn sinr_optimal(&self, k: usize) -> Result<f64> {
        if k >= self.users() {
            return Err(Error::Domain(format!("UE index {k} out of range 0..{}", self.users())));
        }
        let m = self.g.nrows();
        let mut r = self.c_eta.clone();
        for i in 0..m {
            r[(i, i)] += self.sigma2;
        }
        for (i, g_i) in self.g.column_iter().enumerate() {
            if i != k {
                r.gerc(Complex64::new(self.p, 0.0), &g_i, &g_i, Complex64::new(1.0, 0.0));
            }
        }
        let g_k = self.g.column(k).into_owned();
        let mut x = g_k.clone();
        Cholesky::new(&r)?.solve_in_place(x.as_mut_slice());
        Ok(self.p * g_k.dotc(&x).re)
    }
}

fn link_for(h: &ComplexMatrix, d: &ComplexVector, c_eta: &ComplexMatrix, p: f64, sigma2: f64) -> LinkModel {
    let mut g = h.clone();
    for (mut row, dm) in g.row_iter_mut().zip(d.iter()) {
        row *= *dm;
    }
    LinkModel {
        g,
        c_eta: c_eta.clone(),
        p,
        sigma2,
    }
}

/// Ideal-UE SINR of UE `k` for combining vector `v`; `d` holds the Bussgang gains.
pub fn sinr_ideal_ue(
    v: &ComplexVector,
    h: &ComplexMatrix,
    d: &ComplexVector,
    c_eta: &ComplexMatrix,
    p: f64,
    sigma2: f64,
    k: usize,
) -> Result<f64> {
    link_for(h, d, c_eta, p, sigma2).sinr_ideal_ue(v, k)
}

pub fn sinr_optimal(h: &ComplexMatrix, d: &ComplexVector, c_eta: &ComplexMatrix, p: f64, sigma2: f64, k: usize) -> Result<f64> {
    link_for(h, d, c_eta, p, sigma2).sinr_optimal(k)
}

#[allow(clippy::too_many_arguments)]
pub fn sinr_impaired_ue(
    v: &ComplexVector,
    h: &ComplexMatrix,
    d: &ComplexVector,
    c_eta: &ComplexMatrix,
    p: f64,
    sigma2: f64,
    kappa: f64,
    k: usize,
) -> Result<f64> {
    link_for(h, d, c_eta, p, sigma2).sinr_impaired_ue(v, kappa, k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SinrReport {
    pub gamma: Vec<f64>,
    /// `log₂(1 + γ)` per UE.
    pub se: Vec<f64>,
    pub variant: SinrVariant,
    pub distortion_mode: DistortionMode,
    /// Set when the diagonal approximation was used: the value approximates
    /// the bound rather than being an achievable rate itself.
    pub approx: bool,
}

impl SinrReport {
    pub fn mean_se(&self) -> f64 {
        self.se.iter().sum::<f64>() / self.se.len() as f64
    }
}

/// One (combiner, distortion mode) evaluation cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub combiner: CombinerKind,
    pub mode: DistortionMode,
}

/// Evaluates several cells on one channel draw, sharing its Bussgang
/// decomposition.
pub fn evaluate_cells(
    cfg: &ScenarioConfig,
    ch: &ChannelRealization,
    bd: &BussgangDecomposition,
    cells: &[Cell],
) -> Result<Vec<SinrReport>> {
    let variant = if cfg.kappa == 1.0 {
        SinrVariant::IdealUe
    } else {
        SinrVariant::ImpairedUe
    };
    cells
        .iter()
        .map(|cell| {
            let comb_mode = cfg.diag_scope.combiner_mode(cell.mode);
            let combiner = build_combiner(cell.combiner, &ch.h, bd, comb_mode, cfg.p, cfg.sigma2)?;
            let link = LinkModel::new(&ch.h, bd, cell.mode, cfg.p, cfg.sigma2);
            let mut gamma = Vec::with_capacity(ch.users());
            for k in 0..ch.users() {
                let v = combiner.v.column(k).into_owned();
                let g = match variant {
                    SinrVariant::IdealUe => link.sinr_ideal_ue(&v, k)?,
                    SinrVariant::ImpairedUe => link.sinr_impaired_ue(&v, cfg.kappa, k)?,
                };
                if !g.is_finite() {
                    return Err(Error::NonFinite("SINR"));
                }
                gamma.push(g);
            }
            let se = gamma.iter().map(|g| (1.0 + g).log2()).collect();
            Ok(SinrReport {
                gamma,
                se,
                variant,
                distortion_mode: cell.mode,
                approx: cell.mode == DistortionMode::Diagonal,
            })
        })
        .collect()
}

/// SINRs of one channel draw for the scenario's combiner and mode.
pub fn evaluate_realization(cfg: &ScenarioConfig, ch: &ChannelRealization) -> Result<SinrReport> {
    let bd = third_order_bussgang(cfg, ch)?;
    let cell = Cell {
        combiner: cfg.combiner,
        mode: cfg.distortion_mode,
    };
    Ok(evaluate_cells(cfg, ch, &bd, &[cell])?.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicResult {
    pub cell: Cell,
    /// Mean SE per UE over trials.
    pub mean_se: Vec<f64>,
    /// Standard error of each entry of `mean_se`.
    pub stderr: Vec<f64>,
    /// `per_trial[t][k]`, kept for paired comparisons between cells.
    pub per_trial: Vec<Vec<f64>>,
    pub trials: usize,
    pub variant: SinrVariant,
    pub approx: bool,
    pub config: ScenarioConfig,
}

impl ErgodicResult {
    /// Per-trial average over UEs.
    pub fn trial_means(&self) -> Vec<f64> {
        self.per_trial
            .iter()
            .map(|se| se.iter().sum::<f64>() / se.len() as f64)
            .collect()
    }

    /// SE per UE averaged over UEs, and its standard error.
    pub fn se_per_ue(&self) -> (f64, f64) {
        mean_and_stderr(&self.trial_means())
    }
}

/// Stream index of trial `trial` within stream group `group`.
pub fn trial_stream(group: u32, trial: usize) -> u64 {
    (u64::from(group) << 32) | trial as u64
}

/// Ergodic SE for several cells on common channel draws.
///
/// Trial `t` draws its channel from `RngStream(cfg.seed, trial_stream(group, t))`,
/// so every cell sees the same realizations and the result is independent
/// of `exec` and of the thread count.
pub fn ergodic_se_cells(cfg: &ScenarioConfig, cells: &[Cell], group: u32, exec: Execution) -> Result<Vec<ErgodicResult>> {
    cfg.validate()?;
    if cells.is_empty() {
        return Err(Error::EmptyDimension("cell list"));
    }
    let reports = try_map_indexed(cfg.trials, exec, |t| {
        let mut rng = RngStream::new(cfg.seed, trial_stream(group, t));
        let ch = sample_channel(cfg, &mut rng)?;
        let bd = third_order_bussgang(cfg, &ch)?;
        evaluate_cells(cfg, &ch, &bd, cells)
    })?;

    Ok(cells
        .iter()
        .enumerate()
        .map(|(c, cell)| {
            let per_trial: Vec<Vec<f64>> = reports.iter().map(|r| r[c].se.clone()).collect();
            let (mean_se, stderr) = (0..cfg.k)
                .map(|k| {
                    let column: Vec<f64> = per_trial.iter().map(|se| se[k]).collect();
                    mean_and_stderr(&column)
                })
                .unzip();
            let first = &reports[0][c];
            ErgodicResult {
                cell: *cell,
                mean_se,
                stderr,
                per_trial,
                trials: cfg.trials,
                variant: first.variant,
                approx: first.approx,
                config: ScenarioConfig {
                    combiner: cell.combiner,
                    distortion_mode: cell.mode,
                    ..cfg.clone()
                },
            }
        })
        .collect())
}

pub fn ergodic_se_with(cfg: &ScenarioConfig, exec: Execution) -> Result<ErgodicResult> {
    let cell = Cell {
        combiner: cfg.combiner,
        mode: cfg.distortion_mode,
    };
    Ok(ergodic_se_cells(cfg, &[cell], 0, exec)?.remove(0))
}

/// Ergodic SE for the scenario's combiner and distortion mode.
pub fn ergodic_se(cfg: &ScenarioConfig) -> Result<ErgodicResult> {
    ergodic_se_with(cfg, Execution::default())
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let (mean, stderr) = mean_and_stderr(xs);
        Self { mean, stderr }
    }

    /// `|mean − target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.mean - target).abs() / self.stderr
    }
}

/// Sampled distortion powers seen through MR combining, each normalized by
/// `E{‖h_k‖²}`: `h_kᴴC_ηηh_k`, `h_kᴴC_ηη^diag h_k` and `|h_kᴴDh_k|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistortionMoments {
    pub correlated: Estimate,
    pub uncorrelated: Estimate,
    pub ue_moment: Estimate,
    pub trials: usize,
}

/// Monte Carlo counterpart of the closed-form distortion moments. Each trial
/// averages over all UEs of one draw; the standard error is taken across
/// trials.
pub fn distortion_moments_mc(cfg: &ScenarioConfig, trials: usize, group: u32, exec: Execution) -> Result<DistortionMoments> {
    cfg.validate()?;
    if trials < 2 {
        return Err(Error::invalid("trials", trials, ">= 2"));
    }
    let samples = try_map_indexed(trials, exec, |t| {
        let mut rng = RngStream::new(cfg.seed, trial_stream(group, t));
        let ch = sample_channel(cfg, &mut rng)?;
        let bd = third_order_bussgang(cfg, &ch)?;
        let (mut corr, mut uncorr, mut ue) = (0.0, 0.0, 0.0);
        for k in 0..cfg.k {
            let h_k = ch.h.column(k).into_owned();
            let norm = cfg.m as f64 * cfg.large_scale(k);
            corr += quad_form(&h_k, &bd.c_eta) / norm;
            uncorr += h_k
                .iter()
                .zip(bd.c_eta.diagonal().iter())
                .map(|(h, c)| c.re * h.norm_sqr())
                .sum::<f64>()
                / norm;
            let hdh: Complex64 = h_k.iter().zip(bd.gains.iter()).map(|(h, d)| d * h.norm_sqr()).sum();
            ue += hdh.norm_sqr() / norm;
        }
        let kf = cfg.k as f64;
        Ok([corr / kf, uncorr / kf, ue / kf])
    })?;
    let col = |i: usize| Estimate::from_samples(&samples.iter().map(|s| s[i]).collect::<Vec<_>>());
    Ok(DistortionMoments {
        correlated: col(0),
        uncorrelated: col(1),
        ue_moment: col(2),
        trials,
    })
}
