//! Quantum spectra against the reduced semiclassical predictions: Weyl
//! counting, weak traces, the periods seen by the smoothed trace, and the
//! phase carried by each period.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{reduced_period_set, PeriodEntry};
use crate::error::{Error, Result};
use crate::groups::{trivial_multiplicity, GroupKind, GroupModel};
use crate::hamiltonian::{HamiltonianModel, Potential};
use crate::numerics::fit::{fit_line, LineFit};
use crate::phase::PhasePoint;
use crate::quantum::{
    count_in_window, smoothed_trace_of, time_signal, Bump, SectorQuery, SpectrumSource, TraceWindows,
};
use crate::reduction::{liouville_mass, orbit_dimension_k0, reduced_phase_integral, reduced_volume, LiouvilleMethod};

/// A symmetry sector of a confining Schrödinger Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub group: GroupKind,
    pub n: i64,
    pub potential: Potential,
}

impl Sector {
    pub fn new(group: GroupKind, n: i64, potential: Potential) -> Self {
        Self { group, n, potential }
    }

    pub fn query(&self, h: f64) -> SectorQuery {
        SectorQuery::new(self.group, self.n, h, self.potential)
    }

    pub fn model(&self) -> HamiltonianModel {
        HamiltonianModel::for_group(self.group, self.potential)
    }

    /// [ρ_χ|_{H₀} : 𝟙] at a regular point of Ω₀.
    pub fn multiplicity(&self) -> Result<usize> {
        let group = GroupModel::new(self.group);
        let d = self.group.config_dim();
        let mut x = vec![0.0; d];
        x[0] = 1.0;
        if self.group == GroupKind::So2Axial {
            x[2] = 0.3;
        }
        let xi: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        let stabilizer = group.stabilizer_of(&PhasePoint::new(x, xi))?;
        trivial_multiplicity(&group.character(self.n)?, &stabilizer)
    }
}

/// Leading term C·h^p of an asymptotic expansion, with the factors that
/// make up C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeylPrediction {
    /// p = k₀ − d (+1 for the smoothed trace).
    pub exponent: f64,
    pub coefficient: f64,
    pub k0: usize,
    pub dim: usize,
    pub degree: usize,
    pub multiplicity: usize,
    /// The phase-space side: Vol_red, ∫f(H̃)dσ_red or the Liouville mass.
    pub phase_integral: f64,
    pub phase_integral_error: f64,
}

impl WeylPrediction {
    fn assemble(sector: &Sector, extra_order: i32, prefactor: f64, integral: f64, integral_error: f64) -> Result<Self> {
        let group = GroupModel::new(sector.group);
        let k0 = orbit_dimension_k0(&group);
        let dim = sector.group.config_dim();
        let degree = group.character(sector.n)?.degree();
        let multiplicity = sector.multiplicity()?;
        let exponent = k0 as i32 - dim as i32 + extra_order;
        let coefficient = (2.0 * PI).powi(k0 as i32 - dim as i32) * prefactor * degree as f64 * integral * multiplicity as f64;
        Ok(Self {
            exponent: exponent as f64,
            coefficient,
            k0,
            dim,
            degree,
            multiplicity,
            phase_integral: integral,
            phase_integral_error: integral_error,
        })
    }

    /// (2π)^{k₀−d} d_χ Vol_red(H̃⁻¹(I)) [ρ_χ|_{H₀} : 𝟙].
    pub fn counting(sector: &Sector, e1: f64, e2: f64) -> Result<Self> {
        let vol = reduced_volume(&GroupModel::new(sector.group), &sector.model(), e1, e2)?;
        Self::assemble(sector, 0, 1.0, vol.value, vol.error)
    }

    /// (2π)^{k₀−d} d_χ ∫ f(H̃) dσ_red [ρ_χ|_{H₀} : 𝟙].
    pub fn weak_trace(sector: &Sector, f: &Bump) -> Result<Self> {
        let (lo, hi) = f.support();
        let integral = reduced_phase_integral(&GroupModel::new(sector.group), &sector.model(), |e| f.eval(e), lo, hi)?;
        Self::assemble(sector, 0, 1.0, integral, 0.0)
    }

    /// (2π)^{k₀−d} (d_χ/2π) f̂(0) ψ(E) ∫dL_{H̃,E} [ρ_χ|_{H₀} : 𝟙], at order
    /// h^{k₀−d+1}.
    pub fn smoothed_trace(sector: &Sector, energy: f64, windows: &TraceWindows) -> Result<Self> {
        let mass = liouville_mass(
            &GroupModel::new(sector.group),
            &sector.model(),
            energy,
            None,
            LiouvilleMethod::VolumeDerivative,
        )?;
        let prefactor = windows.f_hat_at_zero() * windows.psi.eval(energy) * (2.0 * PI).powi(-1);
        // (2πh)^{k₀−d+1}/(2πh) · (2π)… collects to the same power of 2π
        Self::assemble(sector, 1, prefactor * 2.0 * PI, mass, 0.0)
    }

    /// The same prediction with the character degree d_χ left out.
    pub fn without_degree(&self) -> Self {
        Self {
            coefficient: self.coefficient / self.degree as f64,
            degree: 1,
            ..self.clone()
        }
    }

    pub fn at(&self, h: f64) -> f64 {
        self.coefficient * h.powf(self.exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative error allowed on the coefficient at the smallest h.
    pub coefficient_rel: f64,
    /// Absolute error allowed on the fitted exponent.
    pub exponent_abs: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            coefficient_rel: 0.05,
            exponent_abs: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: String,
    pub prediction: WeylPrediction,
    pub h: Vec<f64>,
    pub measured: Vec<f64>,
    /// Numerical uncertainty of each measurement (eigenvalue errors, window
    /// ties).
    pub measured_errors: Vec<f64>,
    pub predicted: Vec<f64>,
    pub relative_errors: Vec<f64>,
    /// Fit of log(measured) against log h.
    pub fit: Option<LineFit>,
    pub fitted_exponent: Option<f64>,
    pub fitted_coefficient: Option<f64>,
    /// |measured/h^p − C|/C at the smallest h.
    pub coefficient_error: f64,
    pub exponent_error: Option<f64>,
    pub exponent_ci_contains: bool,
    /// Whether the coefficient is part of the pass rule.
    pub coefficient_checked: bool,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl VerificationReport {
    /// Power-law rate of |relative error| against h, using only the points
    /// whose error exceeds its numerical uncertainty.
    pub fn error_rate(&self) -> Option<LineFit> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .h
            .iter()
            .zip(&self.relative_errors)
            .zip(self.measured_errors.iter().zip(&self.predicted))
            .filter(|((_, rel), (err, pred))| rel.abs() > 0.0 && rel.abs() * pred.abs() > 3.0 * **err)
            .map(|((h, rel), _)| (h.ln(), rel.abs().ln()))
            .unzip();
        if x.len() < 3 {
            return None;
        }
        fit_line(&x, &y)
    }
}

/// Compares measurements over an h-sweep with a prediction.
pub fn assess(
    kind: &str,
    prediction: &WeylPrediction,
    h: &[f64],
    measured: &[f64],
    measured_errors: &[f64],
    tolerances: Tolerances,
    check_coefficient: bool,
) -> VerificationReport {
    let predicted: Vec<f64> = h.iter().map(|&h| prediction.at(h)).collect();
    let relative_errors: Vec<f64> = measured
        .iter()
        .zip(&predicted)
        .map(|(m, p)| if *p == 0.0 { if *m == 0.0 { 0.0 } else { f64::INFINITY } } else { (m - p) / p })
        .collect();
    let mut notes = Vec::new();
    let (lx, ly): (Vec<f64>, Vec<f64>) = h
        .iter()
        .zip(measured)
        .filter(|(_, m)| **m > 0.0)
        .map(|(h, m)| (h.ln(), m.ln()))
        .unzip();
    if lx.len() < h.len() {
        notes.push(format!("{} non-positive measurements left out of the fit", h.len() - lx.len()));
    }
    let fit = fit_line(&lx, &ly);
    // a decade, up to rounding in geometric sweeps
    let span = h.iter().copied().fold(f64::MIN, f64::max) / h.iter().copied().fold(f64::MAX, f64::min) * (1.0 + 1e-9);
    if h.len() < 5 || span < 10.0 {
        notes.push(format!("{} values of h spanning a factor {span:.1}; exponent fits need 5 over a decade", h.len()));
    }
    let h_min_idx = h
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let coefficient_error = relative_errors.get(h_min_idx).copied().unwrap_or(f64::INFINITY).abs();
    let exponent_error = fit.map(|f| (f.slope - prediction.exponent).abs());
    let exponent_ci_contains = fit.is_some_and(|f| f.slope_ci_contains(prediction.exponent));
    let empty = prediction.coefficient == 0.0 && measured.iter().all(|&m| m == 0.0);
    let exponent_ok = exponent_error.is_some_and(|e| e <= tolerances.exponent_abs) && exponent_ci_contains;
    let coefficient_ok = !check_coefficient || coefficient_error <= tolerances.coefficient_rel;
    let pass = empty || (exponent_ok && coefficient_ok && h.len() >= 5 && span >= 10.0);
    if empty {
        notes.push("empty window: prediction and measurement both vanish".into());
    }
    VerificationReport {
        kind: kind.to_string(),
        prediction: prediction.clone(),
        h: h.to_vec(),
        measured: measured.to_vec(),
        measured_errors: measured_errors.to_vec(),
        predicted,
        relative_errors,
        fit,
        fitted_exponent: fit.map(|f| f.slope),
        fitted_coefficient: fit.map(|f| f.intercept.exp()),
        coefficient_error,
        exponent_error,
        exponent_ci_contains,
        coefficient_checked: check_coefficient,
        tolerances,
        pass,
        notes,
    }
}

/// h values c·ratio^k from `h_max` down to `h_min`, inclusive.
pub fn geometric_h(h_max: f64, h_min: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![h_max];
    }
    let ratio = (h_min / h_max).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| h_max * ratio.powi(k as i32)).collect()
}

fn sorted_decreasing(h_list: &[f64]) -> Result<Vec<f64>> {
    if h_list.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
        return Err(Error::config("h", "every h must be positive and finite"));
    }
    let mut h = h_list.to_vec();
    h.sort_by(|a, b| b.total_cmp(a));
    Ok(h)
}

/// N_{I,χ}(h) against the Weyl prediction over an h-sweep.
pub fn weyl_verify<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    e1: f64,
    e2: f64,
    h_list: &[f64],
    tolerances: Tolerances,
    source: &S,
) -> Result<VerificationReport> {
    let prediction = WeylPrediction::counting(sector, e1, e2)?;
    let h = sorted_decreasing(h_list)?;
    let counts: Vec<(f64, f64, Option<String>)> = h
        .par_iter()
        .map(|&h| -> Result<_> {
            let margin = 0.05 * (e2 - e1).max(0.1);
            let spectrum = source.spectrum(&sector.query(h), e1 - margin, e2 + margin)?;
            match count_in_window(&spectrum, e1, e2) {
                Ok(n) => Ok((n as f64, 0.0, None)),
                Err(Error::Ambiguity { eigenvalue, low, high, .. }) => Ok((
                    0.5 * (low + high) as f64,
                    0.5 * (high - low) as f64,
                    Some(format!("h = {h}: level {eigenvalue} on the window edge, count in [{low}, {high}]")),
                )),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let measured: Vec<f64> = counts.iter().map(|c| c.0).collect();
    let errors: Vec<f64> = counts.iter().map(|c| c.1).collect();
    let mut report = assess("weyl", &prediction, &h, &measured, &errors, tolerances, true);
    report.notes.extend(counts.into_iter().filter_map(|c| c.2));
    Ok(report)
}

/// Tr f(Ĥ_χ) against the weak-trace prediction over an h-sweep.
pub fn weak_verify<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    f: &Bump,
    h_list: &[f64],
    tolerances: Tolerances,
    source: &S,
) -> Result<VerificationReport> {
    let prediction = WeylPrediction::weak_trace(sector, f)?;
    let h = sorted_decreasing(h_list)?;
    let (lo, hi) = f.support();
    let slope = bump_lipschitz(f);
    let values: Vec<(f64, f64)> = h
        .par_iter()
        .map(|&h| -> Result<_> {
            let spectrum = source.spectrum(&sector.query(h), lo, hi)?;
            let trace = weak_trace_of_spectrum(&spectrum, f);
            let err = spectrum.degree as f64 * spectrum.errors.iter().sum::<f64>() * slope;
            Ok((trace, err))
        })
        .collect::<Result<_>>()?;
    let measured: Vec<f64> = values.iter().map(|v| v.0).collect();
    let errors: Vec<f64> = values.iter().map(|v| v.1).collect();
    Ok(assess("weak", &prediction, &h, &measured, &errors, tolerances, true))
}

fn weak_trace_of_spectrum(spectrum: &crate::quantum::Spectrum, f: &Bump) -> f64 {
    crate::quantum::weak_trace_of(spectrum, |e| f.eval(e))
}

/// sup |f′| of the bump, by sampling.
fn bump_lipschitz(f: &Bump) -> f64 {
    let (lo, hi) = f.support();
    let n = 2000;
    let dx = (hi - lo) / n as f64;
    (0..n)
        .map(|k| ((f.eval(lo + (k + 1) as f64 * dx) - f.eval(lo + k as f64 * dx)) / dx).abs())
        .fold(0.0, f64::max)
}

/// Tr f(Ĥ_χ) for one h.
pub fn weak_trace_at<S: SpectrumSource + ?Sized>(sector: &Sector, f: &Bump, h: f64, source: &S) -> Result<f64> {
    let (lo, hi) = f.support();
    Ok(weak_trace_of_spectrum(&source.spectrum(&sector.query(h), lo, hi)?, f))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub t: f64,
    /// |Y(t)| / |Y(0)|.
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakMatch {
    pub period: PeriodEntry,
    pub peak: Option<Peak>,
    pub deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakReport {
    pub energy: f64,
    pub h: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Δt ≈ h/δE with δE the width of supp ψ.
    pub resolution: f64,
    pub threshold: f64,
    pub peaks: Vec<Peak>,
    pub matches: Vec<PeakMatch>,
    /// Peaks not within Δt of any reduced period.
    pub unmatched: Vec<Peak>,
    pub warning: Option<String>,
    pub pass: bool,
}

impl PeakReport {
    /// Peaks with t in (a, b).
    pub fn peaks_in(&self, a: f64, b: f64) -> Vec<Peak> {
        self.peaks.iter().copied().filter(|p| p.t > a && p.t < b).collect()
    }

    /// The peak closest to `t`, if one lies within Δt.
    pub fn peak_near(&self, t: f64) -> Option<Peak> {
        self.peaks
            .iter()
            .copied()
            .filter(|p| (p.t - t).abs() <= self.resolution)
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// Relative height above which a local maximum of |Y| counts as a peak.
pub const PEAK_THRESHOLD: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSearch {
    pub energy: f64,
    pub h: f64,
    pub t_max: f64,
    /// Lower end of the search; `None` uses four resolution widths.
    pub t_min: Option<f64>,
    pub psi_half_width: f64,
}

impl PeakSearch {
    pub fn new(energy: f64, h: f64, t_max: f64) -> Self {
        Self {
            energy,
            h,
            t_max,
            t_min: None,
            psi_half_width: 0.1,
        }
    }
}

/// Local maxima of |Y(t; h)| on (t_min, T_max] matched against the reduced
/// period set at E.
pub fn gutzwiller_peaks<S: SpectrumSource + ?Sized>(sector: &Sector, search: &PeakSearch, source: &S) -> Result<PeakReport> {
    let psi = Bump::new(search.energy, search.psi_half_width);
    let (lo, hi) = psi.support();
    let spectrum = source.spectrum(&sector.query(search.h), lo, hi)?;
    let resolution = search.h / (hi - lo);
    let t_min = search.t_min.unwrap_or(4.0 * resolution);
    let dt = resolution / 20.0;
    let steps = ((search.t_max + resolution) / dt).ceil() as usize;
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let signal: Vec<f64> = time_signal(&spectrum, search.h, search.energy, &psi, &times)
        .into_iter()
        .map(|c| c.norm())
        .collect();
    let reference = signal[0];
    let periods = reduced_period_set(&sector.model(), search.energy, search.t_max)?
        .into_iter()
        .filter(|p| p.t0 > 0.0)
        .collect::<Vec<_>>();
    let mut peaks = Vec::new();
    if reference > 0.0 {
        for k in 1..signal.len() - 1 {
            let (a, b, c) = (signal[k - 1], signal[k], signal[k + 1]);
            if b >= a && b > c && b >= PEAK_THRESHOLD * reference {
                // vertex of the parabola through the three samples
                let denom = a - 2.0 * b + c;
                let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
                let t = times[k] + shift * dt;
                let height = (b - 0.25 * (a - c) * shift) / reference;
                if t > t_min && t <= search.t_max {
                    peaks.push(Peak { t, height });
                }
            }
        }
    }
    let matches: Vec<PeakMatch> = periods
        .iter()
        .map(|p| {
            let peak = peaks
                .iter()
                .copied()
                .filter(|pk| (pk.t - p.t0).abs() <= resolution)
                .min_by(|a, b| (a.t - p.t0).abs().total_cmp(&(b.t - p.t0).abs()));
            PeakMatch {
                period: *p,
                peak,
                deviation: peak.map(|pk| pk.t - p.t0),
            }
        })
        .collect();
    let unmatched: Vec<Peak> = peaks
        .iter()
        .copied()
        .filter(|pk| periods.iter().all(|p| (pk.t - p.t0).abs() > resolution))
        .collect();
    let min_gap = periods
        .windows(2)
        .map(|w| w[1].t0 - w[0].t0)
        .filter(|g| *g > 1e-9)
        .fold(f64::INFINITY, f64::min);
    let warning = (2.0 * resolution > min_gap).then(|| {
        format!("resolution {resolution:.3} cannot separate periods {min_gap:.3} apart; decrease h")
    });
    let pass = warning.is_none()
        && matches.iter().filter(|m| m.period.t0 > t_min).all(|m| m.peak.is_some())
        && unmatched.is_empty();
    Ok(PeakReport {
        energy: search.energy,
        h: search.h,
        t_min,
        t_max: search.t_max,
        resolution,
        threshold: PEAK_THRESHOLD,
        peaks,
        matches,
        unmatched,
        warning,
        pass,
    })
}

/// G_χ(h) over an h-sweep, in the order given.
pub fn smoothed_trace_sweep<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    energy: f64,
    windows: &TraceWindows,
    h: &[f64],
    source: &S,
) -> Result<Vec<Complex64>> {
    let (lo, hi) = windows.psi.support();
    h.par_iter()
        .map(|&h| {
            let spectrum = source.spectrum(&sector.query(h), lo, hi)?;
            Ok(smoothed_trace_of(&spectrum, h, energy, windows).value)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionEstimate {
    pub energy: f64,
    pub t0: f64,
    pub h: Vec<f64>,
    pub amplitudes: Vec<f64>,
    /// arg G_χ(h), unwrapped along increasing 1/h.
    pub phases: Vec<f64>,
    /// Slope of the phase against 1/h.
    pub action: Option<f64>,
    pub action_ci95: Option<f64>,
    /// S_γ(t₀) of the reduced period closest to t₀.
    pub classical: Option<PeriodEntry>,
    pub relative_error: Option<f64>,
    /// Noise floor at each h, scaled by the Weyl amplitude there.
    pub noise_floor: Vec<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

/// Relative tolerance on Ŝ.
pub const ACTION_TOLERANCE: f64 = 0.01;

/// Amplitudes below this fraction of the Weyl amplitude |G| (f̂ centred on
/// t = 0) are treated as noise. Period contributions are of the same order
/// in h as the Weyl term; window leakage at desk-scale h sits near 1e-3.
pub const NOISE_FLOOR: f64 = 1e-2;

/// Ŝ from the phase of G_χ(h) against 1/h, with the default windows
/// centred at t₀.
pub fn action_regression<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    energy: f64,
    t0: f64,
    h_list: &[f64],
    source: &S,
) -> Result<ActionEstimate> {
    action_regression_with(sector, energy, &TraceWindows::new(energy, t0), h_list, NOISE_FLOOR, source)
}

pub fn action_regression_with<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    energy: f64,
    windows: &TraceWindows,
    h_list: &[f64],
    noise_floor: f64,
    source: &S,
) -> Result<ActionEstimate> {
    let t0 = windows.f_hat.centre;
    let h = sorted_decreasing(h_list)?;
    if h.len() < 3 {
        return Err(Error::config("h", "action regression needs at least three values of h"));
    }
    let mut at_zero = *windows;
    at_zero.f_hat.centre = 0.0;
    let (lo, hi) = windows.psi.support();
    let pairs: Vec<(Complex64, f64)> = h
        .par_iter()
        .map(|&h| -> Result<_> {
            let spectrum = source.spectrum(&sector.query(h), lo, hi)?;
            Ok((
                smoothed_trace_of(&spectrum, h, energy, windows).value,
                smoothed_trace_of(&spectrum, h, energy, &at_zero).value.norm(),
            ))
        })
        .collect::<Result<_>>()?;
    let values: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let floors: Vec<f64> = pairs.iter().map(|p| noise_floor * p.1).collect();
    let amplitudes: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let half_width = windows.f_hat.half_width;
    let classical = reduced_period_set(&sector.model(), energy, t0.abs() + half_width)?
        .into_iter()
        .filter(|p| (p.t0 - t0).abs() < half_width)
        .min_by(|a, b| (a.t0 - t0).abs().total_cmp(&(b.t0 - t0).abs()));

    let below = amplitudes.iter().zip(&floors).filter(|(a, f)| a < f).count();
    if 2 * below > amplitudes.len() {
        return Ok(ActionEstimate {
            energy,
            t0,
            h,
            amplitudes,
            phases: Vec::new(),
            action: None,
            action_ci95: None,
            classical,
            relative_error: None,
            noise_floor: floors,
            pass: false,
            note: Some("amplitude below the noise floor; no slope reported".into()),
        });
    }

    // h decreasing means 1/h increasing
    let mut phases = Vec::with_capacity(values.len());
    let mut prev = values[0].arg();
    let mut offset = 0.0;
    phases.push(prev);
    for v in &values[1..] {
        let raw = v.arg();
        let mut jump = raw - prev;
        while jump > PI {
            jump -= 2.0 * PI;
            offset -= 2.0 * PI;
        }
        while jump < -PI {
            jump += 2.0 * PI;
            offset += 2.0 * PI;
        }
        phases.push(raw + offset);
        prev = raw;
    }
    let inv_h: Vec<f64> = h.iter().map(|h| 1.0 / h).collect();
    let fit = fit_line(&inv_h, &phases).ok_or_else(|| Error::config("h", "degenerate h list"))?;
    // the unwrap is only unambiguous if each step advances the phase by < π;
    // an aliased sweep shows up against the classical action or as residuals
    let action_scale = classical.map_or(fit.slope.abs(), |c| c.action.abs().max(fit.slope.abs()));
    for w in inv_h.windows(2) {
        if (w[1] - w[0]) * action_scale >= PI || fit.residual_rms > 0.5 {
            return Err(Error::PhaseUnwrap {
                step: w[1] - w[0],
                action: action_scale,
            });
        }
    }
    let relative_error = classical.map(|c| (fit.slope - c.action).abs() / c.action.abs());
    Ok(ActionEstimate {
        energy,
        t0,
        h,
        amplitudes,
        phases,
        action: Some(fit.slope),
        action_ci95: Some(fit.slope_ci95),
        classical,
        relative_error,
        noise_floor: floors,
        pass: relative_error.is_some_and(|e| e <= ACTION_TOLERANCE),
        note: classical.is_none().then(|| "no reduced period near t0".to_string()),
    })
}

/// |G_χ(h)| against h with the default windows. With t₀ = 0 both the order
/// h^{k₀−d+1} and its coefficient are checked; for t₀ ≠ 0 only the order.
pub fn order_verify_oscillation<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    energy: f64,
    t0: f64,
    h_list: &[f64],
    tolerances: Tolerances,
    source: &S,
) -> Result<VerificationReport> {
    order_verify_with(sector, energy, &TraceWindows::new(energy, t0), h_list, tolerances, source)
}

pub fn order_verify_with<S: SpectrumSource + ?Sized>(
    sector: &Sector,
    energy: f64,
    windows: &TraceWindows,
    h_list: &[f64],
    tolerances: Tolerances,
    source: &S,
) -> Result<VerificationReport> {
    let t0 = windows.f_hat.centre;
    let prediction = WeylPrediction::smoothed_trace(sector, energy, windows)?;
    let h = sorted_decreasing(h_list)?;
    let measured: Vec<f64> = smoothed_trace_sweep(sector, energy, windows, &h, source)?
        .iter()
        .map(|v| v.norm())
        .collect();
    let errors = vec![0.0; h.len()];
    let weyl_case = t0 == 0.0;
    let kind = if weyl_case { "oscillation-weyl" } else { "oscillation-period" };
    let mut report = assess(kind, &prediction, &h, &measured, &errors, tolerances, weyl_case);
    if !weyl_case {
        report.notes.push("amplitude constant measured, not predicted".into());
    }
    Ok(report)
}
