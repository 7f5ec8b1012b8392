//! Numerical core for the inviscid incompressible porous medium (IPM) equation
//! on periodic domains.
//!
//! The crate is `no_std` with `alloc`. It carries everything that is pure
//! computation: periodic grids and Fourier transforms, multiplier algebra,
//! the linearised semigroups (torus, whole space, variable coefficient),
//! linear-stability quadratic forms, the dealiased pseudo-spectral solver for
//! the perturbation equations around a stratified profile, and the numerical
//! oracles for the calculus lemmas used by the decay arguments.
//!
//! File formats, the command-line front end and the `rustfft` backend live in
//! the `ipm-lab` companion crate.
//!
//! Conventions used throughout:
//!
//! * The domain is `[-π, π)^d`, `d ∈ {2, 3}`. Axis 0 is `x`, the last axis is
//!   the vertical coordinate (`y` in 2D, `z` in 3D).
//! * Coefficients are normalised so that `f(x) = Σ_k f̂(k) e^{ik·x}`; then
//!   `‖f‖²_{L²} = (2π)^d Σ_k |f̂(k)|²`.
//! * Velocity is `û_vert(k) = (|k_h|²/|k|²) ρ̂(k)` and the perturbation equation
//!   is `∂ₜρ + u·∇ρ = -Ω'(vert)·u_vert`, which makes the linearisation around
//!   an increasing profile damping.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;

pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod linear;
pub mod math;
pub mod multiplier;
pub mod norms;
pub mod oracles;
pub mod quadrature;
pub mod random;
pub mod solver;
pub mod stability;
pub mod velocity;

pub use error::{Error, Result};
pub use fft::{FftBackend, FftPlan, Radix2};
pub use field::SpectralField;
pub use grid::Grid;
pub use multiplier::FourierMultiplier;
pub use norms::{grad_linf, sobolev_norm, SobolevIndex};
pub use velocity::{bar_tilde_split, velocity, velocity_2d, velocity_3d};

pub use num_complex::Complex64;
