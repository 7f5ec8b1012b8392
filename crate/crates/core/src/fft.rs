//! Multi-dimensional transforms between grid samples and Fourier coefficients.
//!
//! The one-dimensional kernel is pluggable through [`FftBackend`]. The crate
//! ships [`Radix2`], a portable iterative Cooley–Tukey transform; the `ipm-lab`
//! crate provides a `rustfft`-backed implementation for speed. Backends are
//! immutable after construction, so a plan can be shared across threads.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::Grid;
use crate::math;

/// Unnormalised in-place 1D DFT of fixed length, applied to every contiguous
/// chunk of `len()` values in the buffer.
///
/// `forward` uses the kernel `e^{-2πi jk/n}`, `inverse` uses `e^{+2πi jk/n}`;
/// neither scales.
pub trait FftBackend: Send + Sync {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn forward(&self, data: &mut [Complex64]);
    fn inverse(&self, data: &mut [Complex64]);
}

/// Iterative radix-2 transform with precomputed twiddles.
pub struct Radix2 {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Radix2 {
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "radix-2 length must be a power of two");
        let twiddles = (0..n / 2)
            .map(|j| {
                let a = -math::TWO_PI * j as f64 / n as f64;
                Complex64::new(math::cos(a), math::sin(a))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        Radix2 { n, twiddles, bitrev }
    }

    fn run(&self, chunk: &mut [Complex64], inverse: bool) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                chunk.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for j in 0..half {
                    let w = self.twiddles[j * stride];
                    let w = if inverse { w.conj() } else { w };
                    let u = chunk[start + j];
                    let v = chunk[start + j + half] * w;
                    chunk[start + j] = u + v;
                    chunk[start + j + half] = u - v;
                }
            }
            size *= 2;
        }
    }
}

impl FftBackend for Radix2 {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, data: &mut [Complex64]) {
        for chunk in data.chunks_exact_mut(self.n) {
            self.run(chunk, false);
        }
    }

    fn inverse(&self, data: &mut [Complex64]) {
        for chunk in data.chunks_exact_mut(self.n) {
            self.run(chunk, true);
        }
    }
}

/// Transform plan for one grid.
///
/// Coefficients follow `f(x) = Σ_k f̂(k) e^{ik·x}` with grid points
/// `x_j = -π + jΔ`, so `f̂(k) = N^{-d} (-1)^{Σk} DFT(f)(k)`.
#[derive(Clone)]
pub struct FftPlan {
    grid: Grid,
    backend: Arc<dyn FftBackend>,
    sign: Vec<f64>,
}

impl core::fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FftPlan").field("grid", &self.grid).finish()
    }
}

#[derive(Clone, Copy)]
enum Direction {
    Forward,
    Inverse,
}

impl FftPlan {
    /// Plan backed by the built-in radix-2 kernel.
    pub fn new(grid: Grid) -> Self {
        Self::build(grid, Arc::new(Radix2::new(grid.n())))
    }

    pub fn with_backend(grid: Grid, backend: Arc<dyn FftBackend>) -> Result<Self> {
        if backend.len() != grid.n() {
            return Err(Error::config(alloc::format!(
                "backend length {} does not match grid size {}",
                backend.len(),
                grid.n()
            )));
        }
        Ok(Self::build(grid, backend))
    }

    fn build(grid: Grid, backend: Arc<dyn FftBackend>) -> Self {
        let sign = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                if idx.iter().sum::<usize>() % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            })
            .collect();
        FftPlan { grid, backend, sign }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    /// Samples `f` at every grid point. The closure receives `[x, y, z]`
    /// (the last entry is 0 in 2D).
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        let g = self.grid;
        (0..g.len())
            .map(|flat| {
                let idx = g.unflatten(flat);
                let mut x = [0.0; 3];
                for a in 0..g.dim() {
                    x[a] = g.coordinate(idx[a]);
                }
                f(x)
            })
            .collect()
    }

    /// Physical samples to Hermitian Fourier coefficients.
    pub fn forward(&self, values: &[f64]) -> Result<SpectralField> {
        if values.len() != self.grid.len() {
            return Err(Error::config(alloc::format!(
                "array of length {} does not match grid with {} points",
                values.len(),
                self.grid.len()
            )));
        }
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, Direction::Forward);
        let scale = 1.0 / self.grid.len() as f64;
        for (c, s) in data.iter_mut().zip(&self.sign) {
            *c *= scale * s;
        }
        Ok(SpectralField::from_parts(self.grid, data))
    }

    /// Convenience: sample `f` and transform.
    pub fn project(&self, f: impl Fn([f64; 3]) -> f64) -> SpectralField {
        let values = self.sample(f);
        self.forward(&values).expect("sampled array matches grid")
    }

    /// Fourier coefficients to physical samples (real part; the imaginary
    /// residue of a Hermitian field is rounding noise).
    pub fn inverse(&self, field: &SpectralField) -> Vec<f64> {
        self.check_grid(field);
        let mut data = self.signed_copy(field.coeffs());
        self.transform(&mut data, Direction::Inverse);
        data.into_iter().map(|c| c.re).collect()
    }

    /// Inverse-transforms two Hermitian fields with a single complex
    /// transform by packing them as `a + i b`.
    pub fn inverse_pair(&self, a: &SpectralField, b: &SpectralField) -> (Vec<f64>, Vec<f64>) {
        self.check_grid(a);
        self.check_grid(b);
        let mut data: Vec<Complex64> = a
            .coeffs()
            .iter()
            .zip(b.coeffs())
            .zip(&self.sign)
            .map(|((x, y), s)| (x + Complex64::i() * y) * s)
            .collect();
        self.transform(&mut data, Direction::Inverse);
        data.into_iter().map(|c| (c.re, c.im)).unzip()
    }

    fn check_grid(&self, field: &SpectralField) {
        assert_eq!(field.grid(), self.grid, "field grid does not match plan grid");
    }

    fn signed_copy(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        coeffs.iter().zip(&self.sign).map(|(c, s)| c * s).collect()
    }

    fn run_backend(&self, data: &mut [Complex64], dir: Direction) {
        match dir {
            Direction::Forward => self.backend.forward(data),
            Direction::Inverse => self.backend.inverse(data),
        }
    }

    fn transform(&self, data: &mut [Complex64], dir: Direction) {
        let n = self.grid.n();
        let dim = self.grid.dim();
        // Last axis is contiguous.
        self.run_backend(data, dir);
        if dim == 1 {
            return;
        }
        let mut scratch = vec![Complex64::new(0.0, 0.0); data.len()];
        for axis in 0..dim - 1 {
            let stride = n.pow((dim - 1 - axis) as u32);
            let outer = data.len() / (n * stride);
            // Gather lines along `axis` into contiguous rows of `scratch`.
            for o in 0..outer {
                let block = o * n * stride;
                for j in 0..n {
                    let src = &data[block + j * stride..block + (j + 1) * stride];
                    for (inner, v) in src.iter().enumerate() {
                        scratch[(o * stride + inner) * n + j] = *v;
                    }
                }
            }
            self.run_backend(&mut scratch, dir);
            for o in 0..outer {
                let block = o * n * stride;
                for j in 0..n {
                    let dst = &mut data[block + j * stride..block + (j + 1) * stride];
                    for (inner, v) in dst.iter_mut().enumerate() {
                        *v = scratch[(o * stride + inner) * n + j];
                    }
                }
            }
        }
    }
}
