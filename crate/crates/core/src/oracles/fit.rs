use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Result of fitting `value ≈ constant · (1 + t)^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub constant: f64,
    pub window: (f64, f64),
    /// Coefficient of determination of the log-log least-squares line.
    pub quality: f64,
    pub samples: usize,
}

/// Least-squares line through `(ln(1+t), ln value)` for the samples with
/// `t` in the closed window.
pub fn fit_power_law(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let (t_min, t_max) = window;
    if !(t_min < t_max) {
        return Err(Error::Fit {
            reason: alloc::format!("empty window [{t_min}, {t_max}]"),
            offending: Vec::new(),
        });
    }
    let picked: Vec<usize> = series
        .iter()
        .enumerate()
        .filter(|(_, (t, _))| *t >= t_min && *t <= t_max)
        .map(|(i, _)| i)
        .collect();
    let offending: Vec<usize> = picked
        .iter()
        .copied()
        .filter(|&i| !(series[i].1 > 0.0) || !series[i].1.is_finite())
        .collect();
    if !offending.is_empty() {
        return Err(Error::Fit {
            reason: "non-positive or non-finite values in window".into(),
            offending,
        });
    }
    if picked.len() < 8 {
        return Err(Error::Fit {
            reason: alloc::format!("{} samples in window, at least 8 required", picked.len()),
            offending: Vec::new(),
        });
    }
    let n = picked.len() as f64;
    let xs: Vec<f64> = picked.iter().map(|&i| math::ln(1.0 + series[i].0)).collect();
    let ys: Vec<f64> = picked.iter().map(|&i| math::ln(series[i].1)).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit {
            reason: "all samples share one time".into(),
            offending: Vec::new(),
        });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let quality = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        exponent: slope,
        constant: math::exp(intercept),
        window,
        quality,
        samples: picked.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(c: f64, p: f64) -> Vec<(f64, f64)> {
        math::geomspace(1.0, 1e4, 40).into_iter().map(|t| (t, c * (1.0 + t).powf(p))).collect()
    }

    #[test]
    fn exact_on_pure_power_laws() {
        let f = fit_power_law(&synthetic(1.0, -0.25), (1.0, 1e4)).unwrap();
        assert!((f.exponent + 0.25).abs() < 1e-6);
        let f = fit_power_law(&synthetic(5.0, -1.25), (1.0, 1e4)).unwrap();
        assert!((f.exponent + 1.25).abs() < 1e-10);
        assert!((f.constant - 5.0).abs() < 1e-4);
        assert!((f.quality - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_values_with_indices() {
        let mut s = synthetic(1.0, -1.0);
        s[3].1 = 0.0;
        s[7].1 = -2.0;
        match fit_power_law(&s, (0.0, 1e5)) {
            Err(Error::Fit { offending, .. }) => assert_eq!(offending, alloc::vec![3, 7]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn needs_eight_samples_and_a_window() {
        let s = synthetic(1.0, -1.0);
        assert!(fit_power_law(&s[..7], (0.0, 1e5)).is_err());
        assert!(fit_power_law(&s, (10.0, 10.0)).is_err());
    }
}
