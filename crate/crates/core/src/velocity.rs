//! Darcy velocity of the density and the horizontal-mean splitting.
//!
//! 2D: `û₁ = -(k₁k₂/|k|²) ρ̂`, `û₂ = (k₁²/|k|²) ρ̂`.
//! 3D: `û₁ = -(k₁k₃/|k|²) ρ̂`, `û₂ = -(k₂k₃/|k|²) ρ̂`, `û₃ = ((k₁²+k₂²)/|k|²) ρ̂`.
//!
//! All components vanish on the mean mode and on Nyquist planes, which keeps
//! each component real and exactly divergence free mode by mode.

use alloc::vec::Vec;

use crate::field::SpectralField;
use crate::grid::{norm_sq, Grid};

/// Real velocity symbols, one table per component.
#[allow(clippy::needless_range_loop)]
pub fn velocity_symbols(grid: Grid) -> Vec<Vec<f64>> {
    let dim = grid.dim();
    let mut tables = alloc::vec![alloc::vec![0.0; grid.len()]; dim];
    for i in 1..grid.len() {
        if grid.touches_nyquist(i) {
            continue;
        }
        let k = grid.wavevector(i);
        let inv = 1.0 / norm_sq(k);
        let v = dim - 1;
        let mut horizontal = 0.0;
        for a in 0..v {
            tables[a][i] = -((k[a] * k[v]) as f64) * inv;
            horizontal += (k[a] * k[a]) as f64;
        }
        tables[v][i] = horizontal * inv;
    }
    tables
}

/// Velocity components for a density field of either dimension.
pub fn velocity(rho: &SpectralField) -> Vec<SpectralField> {
    velocity_symbols(rho.grid())
        .iter()
        .map(|t| crate::multiplier::apply_real_table(t, rho))
        .collect()
}

pub fn velocity_2d(rho: &SpectralField) -> (SpectralField, SpectralField) {
    assert_eq!(rho.grid().dim(), 2, "velocity_2d needs a 2D field");
    let mut u = velocity(rho);
    let u2 = u.pop().unwrap();
    let u1 = u.pop().unwrap();
    (u1, u2)
}

pub fn velocity_3d(rho: &SpectralField) -> (SpectralField, SpectralField, SpectralField) {
    assert_eq!(rho.grid().dim(), 3, "velocity_3d needs a 3D field");
    let mut u = velocity(rho);
    let u3 = u.pop().unwrap();
    let u2 = u.pop().unwrap();
    let u1 = u.pop().unwrap();
    (u1, u2, u3)
}

/// `max_k |k · û(k)|`.
pub fn divergence_defect(u: &[SpectralField]) -> f64 {
    let g = u[0].grid();
    (0..g.len())
        .map(|i| {
            let k = g.wavevector(i);
            u.iter()
                .enumerate()
                .map(|(a, f)| f.coeffs()[i] * k[a] as f64)
                .sum::<num_complex::Complex64>()
                .norm()
        })
        .fold(0.0, f64::max)
}

/// True for modes with zero horizontal wavenumber (`k₁ = 0` in 2D,
/// `k₁ = k₂ = 0` in 3D): the horizontally averaged part of a field.
#[inline]
pub fn is_vertical_mode(grid: Grid, flat: usize) -> bool {
    let idx = grid.unflatten(flat);
    idx[..grid.dim() - 1].iter().all(|&i| i == 0)
}

/// Splits `ρ = ρ̄ + ρ̃` where `ρ̃` is the horizontal average (a function of
/// the vertical coordinate only) and `ρ̄` carries the remaining modes.
pub fn bar_tilde_split(rho: &SpectralField) -> (SpectralField, SpectralField) {
    let g = rho.grid();
    let mut bar = rho.clone();
    let mut tilde = SpectralField::zeros(g);
    for (i, c) in rho.coeffs().iter().enumerate() {
        if is_vertical_mode(g, i) {
            tilde.coeffs_mut()[i] = *c;
            bar.coeffs_mut()[i] = num_complex::Complex64::new(0.0, 0.0);
        }
    }
    (bar, tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::FftPlan;
    use num_complex::Complex64;

    fn close(a: &SpectralField, b: &SpectralField, tol: f64) -> bool {
        a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn x_independent_density_is_at_rest() {
        let p = FftPlan::new(Grid::two_d(16).unwrap());
        let rho = p.project(|x| x[1].sin() + 0.3 * (4.0 * x[1]).cos() + 1.0);
        let (u1, u2) = velocity_2d(&rho);
        assert_eq!(u1.max_abs(), 0.0);
        assert_eq!(u2.max_abs(), 0.0);
    }

    #[test]
    fn sin_x_drives_vertical_velocity() {
        let p = FftPlan::new(Grid::two_d(16).unwrap());
        let rho = p.project(|x| x[0].sin());
        let (u1, u2) = velocity_2d(&rho);
        assert!(u1.max_abs() < 1e-16);
        assert!(close(&u2, &rho, 1e-16));
    }

    #[test]
    fn diagonal_mode_symbols() {
        let p = FftPlan::new(Grid::two_d(16).unwrap());
        let rho = p.project(|x| (x[0] + x[1]).cos());
        let (u1, u2) = velocity_2d(&rho);
        assert!(close(&u1, &rho.scaled(-0.5), 1e-16));
        assert!(close(&u2, &rho.scaled(0.5), 1e-16));
    }

    #[test]
    fn three_d_symbols() {
        let p = FftPlan::new(Grid::three_d(8).unwrap());
        let rho = p.project(|x| (2.0 * x[2]).cos() - x[2].sin());
        for u in velocity(&rho) {
            assert_eq!(u.max_abs(), 0.0);
        }
        let rho = p.project(|x| x[0].sin());
        let (u1, u2, u3) = velocity_3d(&rho);
        assert!(u1.max_abs() < 1e-16 && u2.max_abs() < 1e-16);
        assert!(close(&u3, &rho, 1e-16));
        let rho = p.project(|x| (x[0] + x[2]).cos());
        let (u1, u2, u3) = velocity_3d(&rho);
        assert!(close(&u1, &rho.scaled(-0.5), 1e-16));
        assert!(u2.max_abs() < 1e-16);
        assert!(close(&u3, &rho.scaled(0.5), 1e-16));
    }

    #[test]
    fn split_examples() {
        let p = FftPlan::new(Grid::two_d(16).unwrap());
        let a = p.project(|x| x[1].sin());
        let b = p.project(|x| (x[0] + x[1]).sin());
        let (bar, tilde) = bar_tilde_split(&a);
        assert!(bar.max_abs() < 1e-16 && close(&tilde, &a, 0.0));
        let (bar, tilde) = bar_tilde_split(&b);
        assert!(tilde.max_abs() < 1e-16 && close(&bar, &b, 1e-16));
        let (bar, tilde) = bar_tilde_split(&a.add(&b));
        assert!(close(&bar, &b, 1e-15) && close(&tilde, &a, 1e-15));
    }

    #[test]
    fn split_is_exact_partition() {
        let g = Grid::three_d(8).unwrap();
        let rho = SpectralField::from_modes(
            g,
            &[
                ([1, 0, 2], Complex64::new(0.5, 0.1)),
                ([0, 0, 3], Complex64::new(-0.2, 0.4)),
                ([0, 1, 1], Complex64::new(1.0, 0.0)),
            ],
        )
        .unwrap();
        let (bar, tilde) = bar_tilde_split(&rho);
        assert_eq!(bar.add(&tilde), rho);
        assert!(tilde.coeff([0, 0, 3]).unwrap().norm() > 0.0);
        assert_eq!(tilde.coeff([0, 1, 1]).unwrap().norm(), 0.0);
    }
}
