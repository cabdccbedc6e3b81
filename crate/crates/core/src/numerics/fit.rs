//! Ordinary least-squares line fits with Student-t confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Half-width of the 95% confidence interval on the slope.
    pub slope_ci95: f64,
    pub residual_rms: f64,
    pub points: usize,
}

impl LineFit {
    pub fn slope_interval(&self) -> (f64, f64) {
        (self.slope - self.slope_ci95, self.slope + self.slope_ci95)
    }

    pub fn slope_ci_contains(&self, value: f64) -> bool {
        // rounding slack for exact fits, whose interval has zero width
        let slack = 1e-9 * self.slope.abs().max(1.0);
        let (lo, hi) = self.slope_interval();
        lo - slack <= value && value <= hi + slack
    }
}

/// Fit `y = intercept + slope * x`. Returns `None` for fewer than two
/// points or degenerate abscissae.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    let (slope_stderr, intercept_stderr, slope_ci95) = if n > 2 {
        let s2 = ssr / (nf - 2.0);
        let se_slope = (s2 / sxx).sqrt();
        let se_icpt = (s2 * (1.0 / nf + mx * mx / sxx)).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map(|d| d.inverse_cdf(0.975))
            .unwrap_or(1.96);
        (se_slope, se_icpt, t * se_slope)
    } else {
        (0.0, 0.0, 0.0)
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        slope_ci95,
        residual_rms: (ssr / nf).sqrt(),
        points: n,
    })
}

/// Fit `log y = log c + p log x`, returning the exponent fit. Non-positive
/// samples are dropped.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(xi, yi)| **xi > 0.0 && **yi > 0.0)
        .map(|(xi, yi)| (xi.ln(), yi.ln()))
        .unzip();
    fit_line(&lx, &ly)
}
