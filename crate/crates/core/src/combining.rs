//! Receive combiners: MR, distortion-aware MR and distortion-aware MMSE.

use crate::hardware::{BussgangDecomposition, DistortionMode};
use crate::numerics::{Cholesky, Complex64, ComplexMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CombinerKind {
    /// `v_k = h_k / √E{‖h_k‖²}`; ignores the hardware entirely.
    Mr,
    /// `v_k = D·h_k / ‖D·h_k‖`.
    DaMr,
    /// SINR-maximizing combiner that whitens interference, distortion and noise.
    DaMmse,
}

impl CombinerKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mr => "MR",
            Self::DaMr => "DA-MR",
            Self::DaMmse => "DA-MMSE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().replace('_', "-").as_str() {
            "MR" => Some(Self::Mr),
            "DA-MR" | "DAMR" => Some(Self::DaMr),
            "DA-MMSE" | "DAMMSE" => Some(Self::DaMmse),
            _ => None,
        }
    }
}

/// Combining vectors as the columns of an M×K matrix.
#[derive(Clone, Debug)]
pub struct CombinerSet {
    pub v: ComplexMatrix,
    pub kind: CombinerKind,
    /// Distortion covariance variant the combiner was built from. Only
    /// meaningful for DA-MMSE; the MR variants never look at `C_ηη`.
    pub mode: DistortionMode,
}

/// `v_k = h_k/√M`, using `E{‖h_k‖²} = M` for unit-variance Rayleigh fading.
pub fn mr_combiner(h: &ComplexMatrix) -> CombinerSet {
    let scale = 1.0 / (h.nrows() as f64).sqrt();
    CombinerSet {
        v: h * Complex64::new(scale, 0.0),
        kind: CombinerKind::Mr,
        mode: DistortionMode::Full,
    }
}

/// Unit-norm columns along `D·h_k`.
pub fn da_mr_combiner(h: &ComplexMatrix, bd: &BussgangDecomposition) -> Result<CombinerSet> {
    let mut v = bd.effective_channel(h);
    for (k, mut col) in v.column_iter_mut().enumerate() {
        let norm = col.norm();
        if !(norm > 0.0) {
            return Err(Error::DegenerateCombiner { ue: k });
        }
        col /= Complex64::new(norm, 0.0);
    }
    Ok(CombinerSet {
        v,
        kind: CombinerKind::DaMr,
        mode: DistortionMode::Full,
    })
}

/// `v_k = p·(Σ_{i≠k} p·g_i·g_iᴴ + C_ηη + σ²I)⁻¹·g_k` for every column `g_k`
/// of the effective channel `G = D·H`.
///
/// All K vectors come from one factorization of the full matrix
/// `R = p·G·Gᴴ + C_ηη + σ²I`: with `x_k = R⁻¹g_k`, the rank-one downdate
/// gives `R_k⁻¹g_k = x_k / (1 − p·g_kᴴx_k)` exactly.
pub fn da_mmse_vectors(g: &ComplexMatrix, c_eta: &ComplexMatrix, p: f64, sigma2: f64) -> Result<ComplexMatrix> {
    let m = g.nrows();
    if c_eta.nrows() != m || c_eta.ncols() != m {
        return Err(Error::Shape(format!(
            "distortion covariance is {}x{}, expected {m}x{m}",
            c_eta.nrows(),
            c_eta.ncols()
        )));
    }
    let mut r = (g * g.adjoint()) * Complex64::new(p, 0.0) + c_eta;
    for i in 0..m {
        r[(i, i)] += sigma2;
    }
    let chol = Cholesky::new(&r)?;
    let mut x = chol.solve(g)?;
    for (k, mut col) in x.column_iter_mut().enumerate() {
        let t = g.column(k).dotc(&col).re * p;
        let denom = 1.0 - t;
        if !(denom > 0.0) {
            return Err(Error::NonFinite("DA-MMSE downdate"));
        }
        col *= Complex64::new(p / denom, 0.0);
    }
    Ok(x)
}

/// DA-MMSE combiner built from the `mode` variant of `C_ηη`.
pub fn da_mmse_combiner(
    h: &ComplexMatrix,
    bd: &BussgangDecomposition,
    mode: DistortionMode,
    p: f64,
    sigma2: f64,
) -> Result<CombinerSet> {
    let g = bd.effective_channel(h);
    let v = da_mmse_vectors(&g, &bd.c_eta_for(mode), p, sigma2)?;
    Ok(CombinerSet {
        v,
        kind: CombinerKind::DaMmse,
        mode,
    })
}

pub fn build_combiner(
    kind: CombinerKind,
    h: &ComplexMatrix,
    bd: &BussgangDecomposition,
    mode: DistortionMode,
    p: f64,
    sigma2: f64,
) -> Result<CombinerSet> {
    match kind {
        CombinerKind::Mr => Ok(mr_combiner(h)),
        CombinerKind::DaMr => da_mr_combiner(h, bd),
        CombinerKind::DaMmse => da_mmse_combiner(h, bd, mode, p, sigma2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_channel, ScenarioConfig};
    use crate::hardware::{analytic_bussgang, third_order_bussgang, BussgangMode};
    use crate::numerics::{hpd_solve, ComplexVector, RngStream};
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn ideal(m: usize) -> BussgangDecomposition {
        BussgangDecomposition {
            gains: ComplexVector::from_element(m, c(1.0)),
            c_eta: ComplexMatrix::zeros(m, m),
            mode: BussgangMode::Analytic,
        }
    }

    fn scenario(m: usize, k: usize, seed: u64) -> (ScenarioConfig, crate::channel::ChannelRealization) {
        let cfg = ScenarioConfig {
            m,
            k,
            ..Default::default()
        };
        let ch = sample_channel(&cfg, &mut RngStream::new(seed, 0)).unwrap();
        (cfg, ch)
    }

    #[test]
    fn names_round_trip() {
        for kind in [CombinerKind::Mr, CombinerKind::DaMr, CombinerKind::DaMmse] {
            assert_eq!(CombinerKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(CombinerKind::parse("da_mmse"), Some(CombinerKind::DaMmse));
        assert_eq!(CombinerKind::parse("zf"), None);
    }

    #[test]
    fn mr_scalar_and_norms() {
        let h = ComplexMatrix::from_element(1, 1, c(1.0));
        assert_eq!(mr_combiner(&h).v[(0, 0)], c(1.0));
        let (_, ch) = scenario(16, 3, 1);
        let set = mr_combiner(&ch.h);
        for k in 0..3 {
            assert_relative_eq!(set.v.column(k).norm_squared(), ch.h.column(k).norm_squared() / 16.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn mr_norm_is_one_on_average() {
        let cfg = ScenarioConfig { m: 32, k: 1, ..Default::default() };
        let trials = 10_000;
        let mean = (0..trials)
            .map(|t| {
                let ch = sample_channel(&cfg, &mut RngStream::new(2, t)).unwrap();
                mr_combiner(&ch.h).v.column(0).norm_squared()
            })
            .sum::<f64>()
            / trials as f64;
        assert!((mean - 1.0).abs() < 0.02, "{mean}");
    }

    #[test]
    fn da_mr_properties() {
        let (cfg, ch) = scenario(8, 3, 3);
        let base = da_mr_combiner(&ch.h, &ideal(8)).unwrap();
        for k in 0..3 {
            let expected = ch.h.column(k) / c(ch.h.column(k).norm());
            assert!((base.v.column(k) - expected).norm() < 1e-14);
        }
        let mut scaled = ideal(8);
        scaled.gains *= c(0.7);
        let s = da_mr_combiner(&ch.h, &scaled).unwrap();
        assert!((s.v - &base.v).norm() < 1e-14);

        let bd = third_order_bussgang(&cfg, &ch).unwrap();
        let set = da_mr_combiner(&ch.h, &bd).unwrap();
        for k in 0..3 {
            assert_relative_eq!(set.v.column(k).norm(), 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn da_mr_zero_channel_is_degenerate() {
        let mut h = ComplexMatrix::from_element(3, 2, c(1.0));
        h.column_mut(1).fill(c(0.0));
        assert!(matches!(da_mr_combiner(&h, &ideal(3)), Err(Error::DegenerateCombiner { ue: 1 })));
    }

    #[test]
    fn single_user_no_distortion_is_matched_filter() {
        let (_, ch) = scenario(6, 1, 4);
        let set = da_mmse_combiner(&ch.h, &ideal(6), DistortionMode::Full, 1.0, 0.5).unwrap();
        let v = set.v.column(0);
        let h = ch.h.column(0);
        let ratio = v[0] / h[0];
        assert!((v - h * ratio).norm() / v.norm() < 1e-12);
    }

    #[test]
    fn matches_per_user_solve() {
        let (cfg, ch) = scenario(8, 3, 5);
        let bd = third_order_bussgang(&cfg, &ch).unwrap();
        for mode in [DistortionMode::Full, DistortionMode::Diagonal] {
            let set = da_mmse_combiner(&ch.h, &bd, mode, cfg.p, cfg.sigma2).unwrap();
            assert_eq!(set.mode, mode);
            let g = bd.effective_channel(&ch.h);
            let ce = bd.c_eta_for(mode);
            for k in 0..3 {
                let mut rk = ce.clone() + ComplexMatrix::identity(8, 8) * c(cfg.sigma2);
                for i in (0..3).filter(|&i| i != k) {
                    rk += g.column(i) * g.column(i).adjoint() * c(cfg.p);
                }
                let direct = hpd_solve(&rk, &g.columns(k, 1).into_owned()).unwrap() * c(cfg.p);
                let err = (set.v.column(k) - direct.column(0)).norm() / direct.norm();
                assert!(err < 1e-10, "k={k}: {err}");
            }
        }
    }

    #[test]
    fn ideal_hardware_is_standard_mmse() {
        let (cfg, ch) = scenario(8, 3, 6);
        let alpha0 = ScenarioConfig { alpha: 0.0, ..cfg.clone() };
        let bd = third_order_bussgang(&alpha0, &ch).unwrap();
        assert_eq!(bd.c_eta.norm(), 0.0);
        let set = da_mmse_combiner(&ch.h, &bd, DistortionMode::Full, 1.0, 1.0).unwrap();
        // standard multi-user MMSE: (p·HHᴴ + σ²I)⁻¹·h_k, up to per-column scale
        let r = &ch.h * ch.h.adjoint() + ComplexMatrix::identity(8, 8);
        let std = r.try_inverse().unwrap() * &ch.h;
        for k in 0..3 {
            let v = set.v.column(k);
            let s = std.column(k);
            let ratio = v[0] / s[0];
            assert!((v - s * ratio).norm() / v.norm() < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let g = ComplexMatrix::from_element(4, 2, c(1.0));
        assert!(matches!(
            da_mmse_vectors(&g, &ComplexMatrix::zeros(3, 3), 1.0, 1.0),
            Err(Error::Shape(_))
        ));
        let a = [0.1; 4];
        let bad = analytic_bussgang(&a, &ComplexMatrix::identity(3, 3));
        assert!(bad.is_err());
    }
}
