//! The linearised semigroup: exact multiplier propagation on the torus,
//! polar-quadrature norms on the whole space, the sharpness families and the
//! variable-coefficient evolution `∂ₜρ = (1 - G(y, t)) R₁²ρ`.

mod perturbed;
mod whole_space;

pub use perturbed::{perturbed_propagate, PerturbationCoefficient, PerturbedEvolution, DEFAULT_DELTA};
pub use whole_space::{
    sharpness_concentrated, sharpness_radial, whole_space_norm, ConcentratedSharpness, RadialAngularSpec,
    WholeSpaceNorm, Weight,
};

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::grid::{norm_sq, Grid};
use crate::math;

/// `|k_h|²/|k|²`: the damping rate of mode `k` under the linearisation
/// around `Ω = vert`. Horizontal means `k₁` in 2D and `(k₁, k₂)` in 3D.
pub fn damping_rate(grid: Grid, k: [i64; 3]) -> f64 {
    let v = grid.dim() - 1;
    let h: i64 = (0..v).map(|a| k[a] * k[a]).sum();
    if h == 0 {
        0.0
    } else {
        h as f64 / norm_sq(k)
    }
}

/// Table of `e^{-rate(k)·t}` over the grid.
pub fn propagator_table(grid: Grid, t: f64) -> Vec<f64> {
    (0..grid.len()).map(|i| math::exp(-damping_rate(grid, grid.wavevector(i)) * t)).collect()
}

/// Exact linear evolution `ρ̂(t, k) = e^{-|k_h|²/|k|² t} ρ̂₀(k)`.
pub fn torus_propagate(rho0: &SpectralField, t: f64) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::Domain(alloc::format!("propagation time must be nonnegative, got {t}")));
    }
    let table = propagator_table(rho0.grid(), t);
    Ok(crate::multiplier::apply_real_table(&table, rho0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::FftPlan;
    use num_complex::Complex64;

    #[test]
    fn examples() {
        let g = Grid::two_d(16).unwrap();
        let plan = FftPlan::new(g);
        let sx = plan.project(|p| p[0].sin());
        let sy = plan.project(|p| p[1].sin());
        assert_eq!(torus_propagate(&sx, 0.0).unwrap(), sx);
        assert_eq!(torus_propagate(&sy, 7.5).unwrap(), sy);
        let out = torus_propagate(&sx, 1.0).unwrap();
        assert!(out.max_rel_diff(&sx.scaled((-1.0f64).exp())) < 1e-15);
        assert!(matches!(torus_propagate(&sx, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn three_d_rate_uses_both_horizontal_axes() {
        let g = Grid::three_d(8).unwrap();
        assert!((damping_rate(g, [1, 1, 1]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(damping_rate(g, [0, 0, 3]), 0.0);
        let f = SpectralField::from_modes(g, &[([0, 2, 1], Complex64::new(1.0, 0.0))]).unwrap();
        let out = torus_propagate(&f, 2.0).unwrap();
        assert!((out.coeff([0, 2, 1]).unwrap().re - (-1.6f64).exp()).abs() < 1e-15);
    }
}
