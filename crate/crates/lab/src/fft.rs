//! `rustfft`-backed transforms for the core `FftPlan`.

use std::sync::Arc;

use ipm_core::{Complex64, FftBackend, FftPlan, Grid};
use rustfft::{Fft, FftPlanner};

pub struct RustFft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl RustFft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        RustFft {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }
}

impl FftBackend for RustFft {
    fn len(&self) -> usize {
        self.n
    }

    fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
    }
}

/// Plan on `grid` using `rustfft`.
pub fn plan(grid: Grid) -> FftPlan {
    FftPlan::with_backend(grid, Arc::new(RustFft::new(grid.n()))).expect("backend length matches grid")
}
