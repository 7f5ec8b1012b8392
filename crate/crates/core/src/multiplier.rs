//! Fourier multipliers: Riesz transforms, `R = ∂ₓₓ(-Δ)⁻¹`, fractional
//! derivatives and the linear semigroup symbol.

use alloc::boxed::Box;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{norm_sq, Grid};
use crate::math;

type Symbol = dyn Fn([i64; 3]) -> Complex64 + Send + Sync;

/// A symbol on integer wavevectors together with an explicit value for the
/// `k = 0` mode.
///
/// Symbols that are odd in some component cannot keep a real field real on a
/// Nyquist plane (where `k` and `-k` coincide), so such multipliers drop
/// Nyquist modes; see [`FourierMultiplier::dropping_nyquist`].
pub struct FourierMultiplier {
    symbol: Box<Symbol>,
    zero_mode: Complex64,
    drop_nyquist: bool,
}

impl core::fmt::Debug for FourierMultiplier {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FourierMultiplier")
            .field("zero_mode", &self.zero_mode)
            .field("drop_nyquist", &self.drop_nyquist)
            .finish_non_exhaustive()
    }
}

#[inline]
fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `-i k_j / |k|`.
pub fn riesz_symbol(axis: usize, k: [i64; 3]) -> Complex64 {
    Complex64::new(0.0, -(k[axis] as f64) / math::sqrt(norm_sq(k)))
}

/// `k₁²/|k|²`: the positive operator `-R₁²` whose exponential is the
/// linearised semigroup.
pub fn damping_symbol(k: [i64; 3]) -> f64 {
    (k[0] * k[0]) as f64 / norm_sq(k)
}

impl FourierMultiplier {
    pub fn from_fn(symbol: impl Fn([i64; 3]) -> Complex64 + Send + Sync + 'static) -> Self {
        FourierMultiplier {
            symbol: Box::new(symbol),
            zero_mode: c(0.0),
            drop_nyquist: false,
        }
    }

    pub fn real(symbol: impl Fn([i64; 3]) -> f64 + Send + Sync + 'static) -> Self {
        Self::from_fn(move |k| c(symbol(k)))
    }

    pub fn with_zero_mode(mut self, value: Complex64) -> Self {
        self.zero_mode = value;
        self
    }

    pub fn dropping_nyquist(mut self) -> Self {
        self.drop_nyquist = true;
        self
    }

    pub fn identity() -> Self {
        Self::real(|_| 1.0).with_zero_mode(c(1.0))
    }

    /// Riesz transform `R_j` (axis 0 is `R₁`).
    pub fn riesz(axis: usize) -> Self {
        Self::from_fn(move |k| riesz_symbol(axis, k)).dropping_nyquist()
    }

    /// `R = ∂ₓₓ(-Δ)⁻¹ = R₁²`, symbol `-k₁²/|k|²`.
    pub fn r_operator() -> Self {
        Self::real(|k| -damping_symbol(k))
    }

    /// `Λ^s = (-Δ)^{s/2}`, symbol `|k|^s`.
    pub fn lambda(s: f64) -> Self {
        Self::real(move |k| math::powf(norm_sq(k), 0.5 * s))
    }

    /// Spectral derivative `∂_axis`, symbol `i k_axis`.
    pub fn derivative(axis: usize) -> Self {
        Self::from_fn(move |k| Complex64::new(0.0, k[axis] as f64)).dropping_nyquist()
    }

    /// `e^{R₁² t}`: symbol `e^{-k₁²/|k|² t}`; the mean is left unchanged.
    pub fn semigroup(t: f64) -> Self {
        Self::real(move |k| math::exp(-damping_symbol(k) * t)).with_zero_mode(c(1.0))
    }

    /// Evaluates the symbol on every mode of `grid`.
    pub fn tabulate(&self, grid: Grid) -> Result<Vec<Complex64>> {
        (0..grid.len())
            .map(|i| {
                if i == 0 {
                    return Ok(self.zero_mode);
                }
                if self.drop_nyquist && grid.touches_nyquist(i) {
                    return Ok(c(0.0));
                }
                let k = grid.wavevector(i);
                let s = (self.symbol)(k);
                if s.re.is_finite() && s.im.is_finite() {
                    Ok(s)
                } else {
                    Err(Error::NonFiniteSymbol { k })
                }
            })
            .collect()
    }

    /// `out(k) = symbol(k) · in(k)`.
    pub fn apply(&self, f: &SpectralField) -> Result<SpectralField> {
        let table = self.tabulate(f.grid())?;
        Ok(apply_table(&table, f))
    }

    /// Composition `self ∘ other` (symbols multiply).
    pub fn then(self, other: FourierMultiplier) -> FourierMultiplier {
        let zero = self.zero_mode * other.zero_mode;
        let drop = self.drop_nyquist || other.drop_nyquist;
        let (a, b) = (self.symbol, other.symbol);
        FourierMultiplier {
            symbol: Box::new(move |k| a(k) * b(k)),
            zero_mode: zero,
            drop_nyquist: drop,
        }
    }
}

/// Multiplies coefficients by a tabulated symbol.
pub fn apply_table(table: &[Complex64], f: &SpectralField) -> SpectralField {
    let coeffs = f.coeffs().iter().zip(table).map(|(a, s)| a * s).collect();
    SpectralField::from_coeffs(f.grid(), coeffs).expect("table matches grid")
}

/// Multiplies coefficients by a tabulated real symbol.
pub fn apply_real_table(table: &[f64], f: &SpectralField) -> SpectralField {
    let coeffs = f.coeffs().iter().zip(table).map(|(a, s)| a * s).collect();
    SpectralField::from_coeffs(f.grid(), coeffs).expect("table matches grid")
}
