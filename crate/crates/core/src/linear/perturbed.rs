//! Variable-coefficient linear evolution `∂ₜρ = (1 - G(vert, t)) R₁²ρ`,
//! where `R₁²` damps every mode with nonzero horizontal wavenumber.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{FftBackend, FftPlan, Radix2};
use crate::field::SpectralField;
use crate::math::{self, PI, TWO_PI};
use crate::stability::Omega;
use crate::velocity::is_vertical_mode;

use super::damping_rate;

/// Default smallness threshold for the coefficient certificate.
pub const DEFAULT_DELTA: f64 = 0.05;
/// Highest derivative order in the certificate norm.
pub const CERTIFICATE_ORDER: usize = 11;
/// Tolerated relative `L²` growth per step before a step is rejected.
pub const GROWTH_TOLERANCE: f64 = 1e-6;

const CERTIFICATE_SAMPLES: usize = 256;
const CERTIFICATE_TIMES: usize = 17;

type Coefficient = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// The coefficient `G(vert, t)` together with its smallness threshold.
#[derive(Clone)]
pub struct PerturbationCoefficient {
    g: Arc<Coefficient>,
    delta: f64,
}

impl core::fmt::Debug for PerturbationCoefficient {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PerturbationCoefficient").field("delta", &self.delta).finish_non_exhaustive()
    }
}

impl PerturbationCoefficient {
    pub fn new(g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        PerturbationCoefficient { g: Arc::new(g), delta: DEFAULT_DELTA }
    }

    pub fn zero() -> Self {
        Self::new(|_, _| 0.0)
    }

    /// Time-independent coefficient given by a periodic series in `vert`.
    pub fn from_omega(omega: Omega) -> Self {
        Self::new(move |v, _| omega.derivative(0, v))
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn eval(&self, v: f64, t: f64) -> f64 {
        (self.g)(v, t)
    }

    /// `max_{j ≤ 11} sup |∂^j_vert G|` over 256 uniform samples in `vert`
    /// and 17 times spread over `[0, horizon]`, with derivatives taken
    /// spectrally from the samples. Fourier coefficients below `1e-13` of
    /// the largest are discarded as rounding noise.
    pub fn certificate(&self, horizon: f64) -> f64 {
        let m = CERTIFICATE_SAMPLES;
        let fft = Radix2::new(m);
        let mut worst: f64 = 0.0;
        for ti in 0..CERTIFICATE_TIMES {
            let t = horizon * ti as f64 / (CERTIFICATE_TIMES - 1) as f64;
            let mut hat: Vec<Complex64> =
                (0..m).map(|j| Complex64::new(self.eval(-PI + TWO_PI * j as f64 / m as f64, t), 0.0)).collect();
            fft.forward(&mut hat);
            let peak = hat.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (j, c) in hat.iter_mut().enumerate() {
                if c.norm() < 1e-13 * peak || j == m / 2 {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            for order in 0..=CERTIFICATE_ORDER {
                let mut d: Vec<Complex64> = hat
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let k = if j <= m / 2 { j as f64 } else { j as f64 - m as f64 };
                        c * Complex64::new(0.0, k).powu(order as u32)
                    })
                    .collect();
                fft.inverse(&mut d);
                let sup = d.iter().map(|c| c.re.abs()).fold(0.0, f64::max) / m as f64;
                worst = worst.max(sup);
            }
        }
        worst
    }

    /// Passes when the certificate is at most `δ` (up to `1e-9` relative
    /// rounding).
    pub fn certify(&self, horizon: f64) -> Result<f64> {
        let c = self.certificate(horizon);
        if c > self.delta * (1.0 + 1e-9) {
            return Err(Error::Precondition(alloc::format!(
                "coefficient certificate {c:.6e} exceeds threshold {:.6e}",
                self.delta
            )));
        }
        Ok(c)
    }

    fn sup(&self, horizon: f64) -> f64 {
        let mut s: f64 = 0.0;
        for ti in 0..CERTIFICATE_TIMES {
            let t = horizon * ti as f64 / (CERTIFICATE_TIMES - 1) as f64;
            for j in 0..CERTIFICATE_SAMPLES {
                s = s.max(self.eval(-PI + TWO_PI * j as f64 / CERTIFICATE_SAMPLES as f64, t).abs());
            }
        }
        s
    }
}

/// Time stepper for the perturbed evolution (classical RK4, fixed `dt`).
pub struct PerturbedEvolution {
    plan: FftPlan,
    rates: Vec<f64>,
    coeff: PerturbationCoefficient,
    rho: SpectralField,
    t: f64,
    dt: f64,
    steps: u64,
    max_growth: f64,
}

impl core::fmt::Debug for PerturbedEvolution {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("PerturbedEvolution")
            .field("t", &self.t)
            .field("dt", &self.dt)
            .field("steps", &self.steps)
            .finish_non_exhaustive()
    }
}

impl PerturbedEvolution {
    /// Checks that `ρ₀` has no horizontally averaged part and that the
    /// coefficient certificate over `[0, horizon]` is below `δ`. With
    /// `dt = None` the step is `min(0.5, 2.5/(1 + sup|G|))`.
    pub fn new(
        plan: FftPlan,
        rho0: SpectralField,
        coeff: PerturbationCoefficient,
        dt: Option<f64>,
        horizon: f64,
    ) -> Result<Self> {
        let grid = plan.grid();
        if rho0.grid() != grid {
            return Err(Error::Config("initial field grid does not match the plan".into()));
        }
        let scale = rho0.max_abs();
        let tilde = (0..grid.len())
            .filter(|&i| is_vertical_mode(grid, i))
            .map(|i| rho0.coeffs()[i].norm())
            .fold(0.0, f64::max);
        if tilde > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition(alloc::format!(
                "initial data has a horizontal-mean part of size {tilde:.3e}; it must vanish"
            )));
        }
        coeff.certify(horizon)?;
        let dt = match dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => dt,
            Some(dt) => return Err(Error::Config(alloc::format!("dt must be positive, got {dt}"))),
            None => f64::min(0.5, 2.5 / (1.0 + coeff.sup(horizon))),
        };
        let rates = (0..grid.len()).map(|i| damping_rate(grid, grid.wavevector(i))).collect();
        Ok(PerturbedEvolution {
            plan,
            rates,
            coeff,
            rho: rho0,
            t: 0.0,
            dt,
            steps: 0,
            max_growth: 1.0,
        })
    }

    pub fn state(&self) -> &SpectralField {
        &self.rho
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Largest per-step ratio `‖ρₙ₊₁‖/‖ρₙ‖` seen so far.
    pub fn max_growth(&self) -> f64 {
        self.max_growth
    }

    /// Largest modulus among horizontally averaged coefficients.
    pub fn horizontal_mean_defect(&self) -> f64 {
        let g = self.rho.grid();
        (0..g.len())
            .filter(|&i| is_vertical_mode(g, i))
            .map(|i| self.rho.coeffs()[i].norm())
            .fold(0.0, f64::max)
    }

    fn rhs(&self, rho: &SpectralField, t: f64) -> SpectralField {
        let g = rho.grid();
        let mut r2 = rho.clone();
        for (c, rate) in r2.coeffs_mut().iter_mut().zip(&self.rates) {
            *c *= -rate;
        }
        let mut phys = self.plan.inverse(&r2);
        let va = g.vertical_axis();
        let factors: Vec<f64> = (0..g.n()).map(|j| 1.0 - self.coeff.eval(g.coordinate(j), t)).collect();
        for (i, v) in phys.iter_mut().enumerate() {
            *v *= factors[g.unflatten(i)[va]];
        }
        self.plan.forward(&phys).expect("grid-sized array")
    }

    pub fn step(&mut self) -> Result<()> {
        self.step_by(self.dt)
    }

    fn step_by(&mut self, h: f64) -> Result<()> {
        let t = self.t;
        let y = &self.rho;
        let k1 = self.rhs(y, t);
        let mut s = y.clone();
        s.add_scaled(0.5 * h, &k1);
        let k2 = self.rhs(&s, t + 0.5 * h);
        let mut s = y.clone();
        s.add_scaled(0.5 * h, &k2);
        let k3 = self.rhs(&s, t + 0.5 * h);
        let mut s = y.clone();
        s.add_scaled(h, &k3);
        let k4 = self.rhs(&s, t + h);
        let mut next = y.clone();
        next.add_scaled(h / 6.0, &k1);
        next.add_scaled(h / 3.0, &k2);
        next.add_scaled(h / 3.0, &k3);
        next.add_scaled(h / 6.0, &k4);

        let before = y.l2_norm();
        let after = next.l2_norm();
        if !after.is_finite() {
            return Err(Error::BlowUp { t: t + h, max_coeff: next.max_abs() });
        }
        let growth = if before > 0.0 { after / before } else { 1.0 };
        if growth > 1.0 + GROWTH_TOLERANCE {
            return Err(Error::Stability {
                t,
                reason: alloc::format!("L2 norm grew by a factor {growth:.9} in one step of size {h}"),
            });
        }
        self.max_growth = self.max_growth.max(growth);
        self.rho = next;
        self.t = t + h;
        self.steps += 1;
        Ok(())
    }

    /// Steps until `t_target`, shortening the final step to land on it.
    pub fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target - 1e-12 * t_target.max(1.0) {
            let h = self.dt.min(t_target - self.t);
            self.step_by(h)?;
        }
        Ok(())
    }
}

/// Evolves `ρ₀` to time `t` with the radix-2 transform. `dt = None` picks
/// the default step.
pub fn perturbed_propagate(
    rho0: &SpectralField,
    coeff: &PerturbationCoefficient,
    t: f64,
    dt: Option<f64>,
) -> Result<SpectralField> {
    if !(t >= 0.0) {
        return Err(Error::Domain(alloc::format!("propagation time must be nonnegative, got {t}")));
    }
    let plan = FftPlan::new(rho0.grid());
    let mut evo = PerturbedEvolution::new(plan, rho0.clone(), coeff.clone(), dt, t)?;
    // Equal steps so the final step is not a sliver.
    let steps = math::ceil(t / evo.dt).max(1.0);
    evo.dt = t / steps;
    if t > 0.0 {
        evo.advance_to(t)?;
    }
    Ok(evo.rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::linear::torus_propagate;

    fn data(g: Grid) -> SpectralField {
        SpectralField::from_modes(
            g,
            &[
                ([1, 0, 0], Complex64::new(0.5, 0.2)),
                ([1, 3, 0], Complex64::new(0.0, 1.0)),
                ([-2, 1, 0], Complex64::new(0.3, 0.0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_coefficient_matches_exact_propagator() {
        let g = Grid::two_d(16).unwrap();
        let rho = data(g);
        let out = perturbed_propagate(&rho, &PerturbationCoefficient::zero(), 10.0, Some(0.02)).unwrap();
        let exact = torus_propagate(&rho, 10.0).unwrap();
        let err = out.sub(&exact).max_abs() / rho.max_abs();
        assert!(err < 1e-8, "err = {err}");
    }

    #[test]
    fn rejects_horizontal_mean_and_large_coefficients() {
        let g = Grid::two_d(16).unwrap();
        let sy = FftPlan::new(g).project(|p| p[1].sin() * (1.0 + p[0].cos()));
        let c = PerturbationCoefficient::zero();
        assert!(matches!(perturbed_propagate(&sy, &c, 1.0, None), Err(Error::Precondition(_))));
        let big = PerturbationCoefficient::from_omega(Omega::sine(0.2));
        assert!(matches!(perturbed_propagate(&data(g), &big, 1.0, None), Err(Error::Precondition(_))));
    }

    #[test]
    fn certificate_of_a_sine() {
        let c = PerturbationCoefficient::from_omega(Omega::sine(0.05));
        assert!((c.certificate(1.0) - 0.05).abs() < 1e-12);
        let c2 = PerturbationCoefficient::new(|y, _| 0.01 * (2.0 * y).cos());
        // 2^11 · 0.01
        assert!((c2.certificate(1.0) - 20.48).abs() < 1e-8);
    }

    #[test]
    fn mean_preserved_and_norm_monotone() {
        let g = Grid::two_d(32).unwrap();
        let coeff = PerturbationCoefficient::from_omega(Omega::sine(0.05));
        let plan = FftPlan::new(g);
        let mut evo = PerturbedEvolution::new(plan, data(g), coeff, None, 50.0).unwrap();
        let mut prev = evo.state().l2_norm();
        while evo.time() < 50.0 {
            evo.step().unwrap();
            let now = evo.state().l2_norm();
            assert!(now <= prev * (1.0 + 1e-14));
            prev = now;
        }
        assert!(evo.horizontal_mean_defect() < 1e-12);
    }
}
