//! Seeded random fields.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::field::SpectralField;
use crate::grid::{norm_sq, Grid};
use crate::math;

/// Deterministic uniform source on `[0, 1)`.
pub struct Uniform(ChaCha8Rng);

impl Uniform {
    pub fn new(seed: u64) -> Self {
        Uniform(ChaCha8Rng::seed_from_u64(seed))
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.sample();
        let u2 = self.sample();
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(math::TWO_PI * u2)
    }
}

/// Real field with independent coefficients on every non-Nyquist mode
/// (standard normal real and imaginary parts), Hermitian by construction.
pub fn white_field(grid: Grid, seed: u64) -> SpectralField {
    band_field(grid, seed, |_| 1.0, |_| true, Sampling::Gaussian)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Gaussian real and imaginary parts scaled by the amplitude profile.
    Gaussian,
    /// Uniform magnitude in `[0, 1)` times the profile, uniform phase.
    UniformMagnitude,
    /// Magnitude exactly equal to the profile, uniform phase.
    FixedMagnitude,
}

/// Random real field whose coefficients are drawn on the modes accepted by
/// `support` and scaled by `amplitude(k)`. Modes are visited in flat-index
/// order and each conjugate pair is drawn once, so results depend only on
/// the seed and the grid.
pub fn band_field(
    grid: Grid,
    seed: u64,
    amplitude: impl Fn([i64; 3]) -> f64,
    support: impl Fn([i64; 3]) -> bool,
    sampling: Sampling,
) -> SpectralField {
    let mut rng = Uniform::new(seed);
    let mut f = SpectralField::zeros(grid);
    for i in 1..grid.len() {
        let j = grid.conjugate_index(i);
        if j < i || grid.touches_nyquist(i) {
            continue;
        }
        let k = grid.wavevector(i);
        let (a, b) = match sampling {
            Sampling::Gaussian => (rng.normal(), rng.normal()),
            Sampling::UniformMagnitude | Sampling::FixedMagnitude => {
                let m = if sampling == Sampling::UniformMagnitude { rng.sample() } else { 1.0 };
                let phase = math::TWO_PI * rng.sample();
                (m * math::cos(phase), m * math::sin(phase))
            }
        };
        if !support(k) {
            continue;
        }
        let c = Complex64::new(a, b) * amplitude(k);
        f.coeffs_mut()[i] = c;
        f.coeffs_mut()[j] = c.conj();
    }
    f
}

/// Uniform-magnitude random field on the disc `0 < |k| ≤ radius`.
pub fn disc_field(grid: Grid, seed: u64, radius: f64) -> SpectralField {
    band_field(grid, seed, |_| 1.0, |k| norm_sq(k) <= radius * radius, Sampling::UniformMagnitude)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fields_are_real_and_reproducible() {
        let g = Grid::two_d(16).unwrap();
        let a = white_field(g, 7);
        let b = white_field(g, 7);
        assert_eq!(a, b);
        assert_eq!(a.hermitian_defect(), 0.0);
        assert_ne!(a, white_field(g, 8));
    }

    #[test]
    fn disc_field_respects_support() {
        let g = Grid::three_d(16).unwrap();
        let f = disc_field(g, 3, 3.0);
        for (i, c) in f.coeffs().iter().enumerate() {
            if norm_sq(g.wavevector(i)) > 9.0 || i == 0 {
                assert_eq!(c.norm(), 0.0);
            }
        }
        assert!(f.max_abs() > 0.0);
    }
}
