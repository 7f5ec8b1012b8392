//! Uniform periodic grids on `[-π, π)^d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{PI, TWO_PI};

/// A periodic grid with `n` points per axis in dimension 2 or 3.
///
/// Flat indices are row-major with axis 0 (`x`) slowest. The same layout is
/// used for physical samples and for Fourier coefficients, where FFT index
/// `i` along an axis carries wavenumber `i` for `i < n/2` and `i - n`
/// otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::config(alloc::format!(
                "grid dimension must be 2 or 3, got {dim}"
            )));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::config(alloc::format!(
                "points per axis must be a power of two and at least 8, got {n}"
            )));
        }
        Ok(Grid { dim, n })
    }

    pub fn two_d(n: usize) -> Result<Self> {
        Self::new(2, n)
    }

    pub fn three_d(n: usize) -> Result<Self> {
        Self::new(3, n)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total number of points (and of Fourier coefficients).
    #[inline]
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        TWO_PI / self.n as f64
    }

    /// Lebesgue measure of the torus, `(2π)^d`.
    #[inline]
    pub fn volume(&self) -> f64 {
        libm::pow(TWO_PI, self.dim as f64)
    }

    /// Index of the vertical axis (`y` in 2D, `z` in 3D).
    #[inline]
    pub fn vertical_axis(&self) -> usize {
        self.dim - 1
    }

    /// Physical coordinate of grid index `i` along any axis.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        -PI + i as f64 * self.spacing()
    }

    /// Signed wavenumber of FFT index `i`, in `[-n/2, n/2)`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    #[inline]
    pub fn is_nyquist_index(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// Per-axis indices of a flat index; unused trailing entries are 0.
    #[inline]
    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        match self.dim {
            2 => [flat / n, flat % n, 0],
            _ => [flat / (n * n), (flat / n) % n, flat % n],
        }
    }

    #[inline]
    pub fn flatten(&self, idx: [usize; 3]) -> usize {
        let n = self.n;
        match self.dim {
            2 => idx[0] * n + idx[1],
            _ => (idx[0] * n + idx[1]) * n + idx[2],
        }
    }

    /// Wavevector of a flat coefficient index; the third entry is 0 in 2D.
    #[inline]
    pub fn wavevector(&self, flat: usize) -> [i64; 3] {
        let idx = self.unflatten(flat);
        let mut k = [0i64; 3];
        for (a, ka) in k.iter_mut().enumerate().take(self.dim) {
            *ka = self.wavenumber(idx[a]);
        }
        k
    }

    /// True when any component of the mode sits on a Nyquist plane.
    #[inline]
    pub fn touches_nyquist(&self, flat: usize) -> bool {
        let idx = self.unflatten(flat);
        idx[..self.dim].iter().any(|&i| self.is_nyquist_index(i))
    }

    /// Flat index of wavevector `k`, if it lies in `[-n/2, n/2)^d`.
    pub fn index_of(&self, k: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            if k[a] < -half || k[a] >= half {
                return None;
            }
            idx[a] = k[a].rem_euclid(self.n as i64) as usize;
        }
        if self.dim == 2 && k[2] != 0 {
            return None;
        }
        Some(self.flatten(idx))
    }

    /// Flat index of the mode `-k` (Nyquist components map to themselves).
    #[inline]
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let idx = self.unflatten(flat);
        let mut out = [0usize; 3];
        for a in 0..self.dim {
            out[a] = (self.n - idx[a]) % self.n;
        }
        self.flatten(out)
    }

    /// Largest retained wavenumber magnitude under the 2/3 rule: a quadratic
    /// product of fields supported in `|k_j| ≤ K` aliases nothing back into
    /// that band when `3K < n`.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        ((self.n - 1) / 3) as i64
    }

    /// True when every component satisfies `|k_j| ≤ dealias_cutoff()`.
    #[inline]
    pub fn is_retained(&self, flat: usize) -> bool {
        let k = self.wavevector(flat);
        let c = self.dealias_cutoff();
        k[..self.dim].iter().all(|&kj| kj.abs() <= c)
    }
}

#[inline]
pub fn norm_sq(k: [i64; 3]) -> f64 {
    (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64
}
