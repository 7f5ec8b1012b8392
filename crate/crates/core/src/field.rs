use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Fourier coefficients of a real scalar field on a periodic grid.
///
/// Coefficients are stored in the grid's row-major FFT order. Real-valued
/// fields satisfy `coeff(-k) = conj(coeff(k))`; constructors that take raw
/// coefficients do not enforce this, see [`SpectralField::hermitian_defect`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::config(alloc::format!(
                "{} coefficients do not match grid with {} modes",
                coeffs.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, coeffs })
    }

    pub(crate) fn from_parts(grid: Grid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralField { grid, coeffs }
    }

    /// Field with the listed modes set (and their conjugates, so the result
    /// is real). Later entries overwrite earlier ones.
    pub fn from_modes(grid: Grid, modes: &[([i64; 3], Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(k, a) in modes {
            let i = grid.index_of(k).ok_or_else(|| {
                Error::config(alloc::format!("wavevector {k:?} lies outside the grid band"))
            })?;
            let j = grid.conjugate_index(i);
            if i == j {
                f.coeffs[i] = Complex64::new(a.re, 0.0);
            } else {
                f.coeffs[i] = a;
                f.coeffs[j] = a.conj();
            }
        }
        Ok(f)
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, k: [i64; 3]) -> Option<Complex64> {
        self.grid.index_of(k).map(|i| self.coeffs[i])
    }

    /// Spatial mean (the `k = 0` coefficient).
    #[inline]
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// `max_k |coeff(-k) - conj(coeff(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.coeffs.len())
            .map(|i| {
                let j = self.grid.conjugate_index(i);
                (self.coeffs[j] - self.coeffs[i].conj()).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `(2π)^d Σ_k |f̂(k)|²`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.volume() * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_norm_sq())
    }

    /// `∫ f g` for real fields.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid);
        self.grid.volume()
            * self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a * b.conj()).re)
                .sum::<f64>()
    }

    pub fn scaled(&self, alpha: f64) -> SpectralField {
        SpectralField::from_parts(self.grid, self.coeffs.iter().map(|c| c * alpha).collect())
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * alpha;
        }
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(1.0, other);
        out
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn dealias(&mut self) {
        let g = self.grid;
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            if !g.is_retained(i) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    pub fn is_dealiased(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(i, c)| self.grid.is_retained(i) || *c == Complex64::new(0.0, 0.0))
    }

    /// Largest coefficient difference, relative to `max(1, |self|_max)`.
    pub fn max_rel_diff(&self, other: &SpectralField) -> f64 {
        assert_eq!(self.grid, other.grid);
        let scale = self.max_abs().max(other.max_abs()).max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::FftPlan;
    use crate::math::PI;

    #[test]
    fn from_modes_is_hermitian_and_real() {
        let g = Grid::two_d(16).unwrap();
        let f = SpectralField::from_modes(
            g,
            &[([1, 2, 0], Complex64::new(0.3, -0.7)), ([0, 3, 0], Complex64::new(1.0, 0.0))],
        )
        .unwrap();
        assert_eq!(f.hermitian_defect(), 0.0);
        let plan = FftPlan::new(g);
        let x = plan.sample(|x| 0.6 * (x[0] + 2.0 * x[1]).cos() + 1.4 * (x[0] + 2.0 * x[1]).sin() + 2.0 * (3.0 * x[1]).cos());
        let v = plan.inverse(&f);
        for (a, b) in x.iter().zip(&v) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn l2_norm_of_sine() {
        let plan = FftPlan::new(Grid::two_d(16).unwrap());
        let f = plan.project(|x| x[0].sin());
        assert!((f.l2_norm_sq() - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn out_of_band_mode_is_rejected() {
        let g = Grid::two_d(8).unwrap();
        assert!(SpectralField::from_modes(g, &[([5, 0, 0], Complex64::new(1.0, 0.0))]).is_err());
    }
}
