//! Complex linear-algebra kernel and reproducible random streams.
//!
//! Matrices are `nalgebra` dynamic matrices of `Complex64`. Only the handful
//! of operations the simulator needs live here: a Hermitian positive-definite
//! solve (hand-rolled Cholesky so failures can report their pivot), a
//! Hermitian eigendecomposition, the Moore-Penrose pseudoinverse, a PSD
//! square root for correlated sampling, and deterministic aggregation.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub use nalgebra::Complex;
pub type Complex64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance on the most negative eigenvalue of a PSD input.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues below this fraction of the largest one are treated as zero by
/// the pseudoinverse.
pub const PINV_RCOND: f64 = 1e-12;

/// A seeded random stream identified by `(master_seed, stream_index)`.
///
/// Backed by ChaCha8 with the stream index mapped onto ChaCha's native
/// 64-bit stream counter, so two streams with the same seed never overlap
/// and the sequence does not depend on the platform or on thread layout.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// One CN(0, 1) draw: independent real and imaginary parts of variance 1/2.
    #[inline]
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let re = self.standard_normal();
        let im = self.standard_normal();
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

/// `n` i.i.d. CN(0, 1) samples.
pub fn sample_standard_complex_gaussian(n: usize, rng: &mut RngStream) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::EmptyDimension("sample length"));
    }
    Ok(ComplexVector::from_fn(n, |_, _| rng.complex_gaussian()))
}

/// `‖C − Cᴴ‖_F / ‖C‖_F`, or 0 for the zero matrix.
pub fn hermitian_defect(c: &ComplexMatrix) -> f64 {
    let norm = c.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (c - c.adjoint()).norm() / norm
}

fn check_hermitian(c: &ComplexMatrix, what: &str) -> Result<()> {
    if !c.is_square() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    if c.nrows() == 0 {
        return Err(Error::EmptyDimension("matrix"));
    }
    let defect = hermitian_defect(c);
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::Shape(format!(
            "{what} is not Hermitian (relative defect {defect:e})"
        )));
    }
    Ok(())
}

fn check_finite_matrix(m: &ComplexMatrix, op: &'static str) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(op))
    }
}

/// Eigendecomposition of a Hermitian matrix: real eigenvalues (unsorted)
/// and unitary eigenvectors as columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn new(c: &ComplexMatrix) -> Result<Self> {
        check_hermitian(c, "input")?;
        check_finite_matrix(c, "eigendecomposition input")?;
        // Symmetrize so round-off in the lower triangle does not leak in.
        let sym = (c + c.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Rebuilds `U · diag(f(λ)) · Uᴴ`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let s = f(lambda);
            scaled.column_mut(j).scale_mut(s);
        }
        &scaled * self.eigenvectors.adjoint()
    }

    fn check_psd(&self) -> Result<()> {
        let max = self.max_eigenvalue().max(0.0);
        let min = self.min_eigenvalue();
        let tolerance = PSD_TOL * max;
        if min < -tolerance {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tolerance,
            });
        }
        Ok(())
    }
}

/// Square-root factor `L` with `L·Lᴴ = C` for a Hermitian PSD `C`.
///
/// Uses the eigendecomposition rather than Cholesky because signal
/// covariances are rank-deficient whenever there are fewer users than
/// antennas. The factor is `U·diag(√λ)`, not the symmetric square root.
pub fn psd_sqrt(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = HermitianEigen::new(c)?;
    eig.check_psd()?;
    let mut factor = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        factor.column_mut(j).scale_mut(lambda.max(0.0).sqrt());
    }
    Ok(factor)
}

/// Draws from CN(0, C) through a precomputed square-root factor.
#[derive(Clone, Debug)]
pub struct CorrelatedSampler {
    factor: ComplexMatrix,
    scratch: ComplexVector,
}

impl CorrelatedSampler {
    pub fn new(c: &ComplexMatrix) -> Result<Self> {
        let factor = psd_sqrt(c)?;
        let n = factor.ncols();
        Ok(Self {
            factor,
            scratch: ComplexVector::zeros(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    /// Writes one sample into `out` (length must equal `dim()`).
    pub fn sample_into(&mut self, rng: &mut RngStream, out: &mut ComplexVector) {
        for w in self.scratch.iter_mut() {
            *w = rng.complex_gaussian();
        }
        self.factor.mul_to(&self.scratch, out);
    }

    pub fn sample(&mut self, rng: &mut RngStream) -> ComplexVector {
        let mut out = ComplexVector::zeros(self.dim());
        self.sample_into(rng, &mut out);
        out
    }
}

/// One draw of CN(0, C).
pub fn correlated_gaussian_sample(c: &ComplexMatrix, rng: &mut RngStream) -> Result<ComplexVector> {
    Ok(CorrelatedSampler::new(c)?.sample(rng))
}

/// Lower-triangular Cholesky factor of a Hermitian positive-definite matrix,
/// stored row-major so the inner products in both the factorization and the
/// triangular solves run over contiguous slices.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<Complex64>,
}

#[inline]
fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // Σ a_k · conj(b_k), split into real arithmetic so it vectorizes.
    let (mut re, mut im) = (0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        re += x.re * y.re + x.im * y.im;
        im += x.im * y.re - x.re * y.im;
    }
    Complex64::new(re, im)
}

impl Cholesky {
    /// Reads only the lower triangle of `a`.
    pub fn new(a: &ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!(
                "Cholesky input must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows();
        if n == 0 {
            return Err(Error::EmptyDimension("matrix"));
        }
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let (head, tail) = l.split_at_mut(i * n);
                let row_i = &mut tail[..n];
                let row_j: &[Complex64] = if j == i { &*row_i } else { &head[j * n..j * n + n] };
                let s = a[(i, j)] - dot_conj(&row_i[..j], &row_j[..j]);
                if i == j {
                    let d = s.re;
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(Error::Factorization { pivot: i, value: d });
                    }
                    row_i[i] = Complex64::new(d.sqrt(), 0.0);
                } else {
                    let ljj = head[j * n + j].re;
                    row_i[j] = s / ljj;
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A·x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        // L·y = b
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            let mut s = b[i];
            for (lik, yk) in row.iter().zip(&b[..i]) {
                s -= lik * yk;
            }
            b[i] = s / self.l[i * n + i].re;
        }
        // Lᴴ·x = y, column sweep over rows of L.
        for i in (0..n).rev() {
            let xi = b[i] / self.l[i * n + i].re;
            b[i] = xi;
            let row = &self.l[i * n..i * n + i];
            for (yk, lik) in b[..i].iter_mut().zip(row) {
                *yk -= lik.conj() * xi;
            }
        }
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if b.nrows() != self.n {
            return Err(Error::Shape(format!(
                "right-hand side has {} rows, expected {}",
                b.nrows(),
                self.n
            )));
        }
        let mut x = b.clone();
        for mut col in x.column_iter_mut() {
            self.solve_in_place(col.as_mut_slice());
        }
        check_finite_matrix(&x, "Hermitian solve")?;
        Ok(x)
    }

    /// `L` as a dense matrix.
    pub fn factor(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| self.l[i * self.n + j])
    }
}

/// Solves `A·X = B` for Hermitian positive-definite `A`.
pub fn hpd_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Cholesky::new(a)?.solve(b)
}

/// Moore-Penrose pseudoinverse of a Hermitian PSD matrix; eigenvalues below
/// `PINV_RCOND · λ_max` are dropped.
pub fn pseudo_inverse(c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = HermitianEigen::new(c)?;
    let cutoff = PINV_RCOND * eig.max_eigenvalue().max(0.0);
    let pinv = eig.map(|lambda| if lambda > cutoff && lambda > 0.0 { 1.0 / lambda } else { 0.0 });
    check_finite_matrix(&pinv, "pseudoinverse")?;
    Ok(pinv)
}

/// Real part of `vᴴ·A·v`.
pub fn quad_form(v: &ComplexVector, a: &ComplexMatrix) -> f64 {
    let vs = v.as_slice();
    let n = vs.len();
    debug_assert_eq!(a.nrows(), n);
    let data = a.as_slice();
    let mut acc = 0.0;
    for (j, vj) in vs.iter().enumerate() {
        // column j of A is contiguous
        let col = &data[j * n..j * n + n];
        let t = dot_conj(col, vs); // Σ_i A_ij conj(v_i)
        acc += (t * vj).re;
    }
    acc
}

/// `vᴴ·w`.
pub fn inner(v: &ComplexVector, w: &ComplexVector) -> Complex64 {
    dot_conj(w.as_slice(), v.as_slice())
}

/// Keeps only the diagonal of a square matrix.
pub fn diagonal_part(c: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_diagonal(&c.diagonal())
}

/// Pairwise (cascade) summation. The result depends only on the order of
/// `xs`, never on how the values were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Sample mean and standard error of the mean.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}
