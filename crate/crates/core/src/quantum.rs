//! Reduced radial Schrödinger operators per symmetry sector, their spectra,
//! counting functions and spectral traces.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groups::{GroupKind, IrreducibleCharacter};
use crate::hamiltonian::Potential;
use crate::numerics::tridiag::SymTridiagonal;

/// How grids are sized for a target h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    /// Points per local de Broglie wavelength used when sizing grids.
    pub points_per_wavelength: f64,
    /// Hard floor, in points per wavelength, below which assembly fails.
    pub floor_points_per_wavelength: f64,
    pub min_points: usize,
    /// Required WKB decay ∫√(V₀ − E)dr / h between the outer turning point
    /// and r_max.
    pub decay: f64,
    /// Rerun at half resolution and extrapolate.
    pub richardson: bool,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            points_per_wavelength: 120.0,
            floor_points_per_wavelength: 40.0,
            min_points: 2000,
            decay: 30.0,
            richardson: true,
        }
    }
}

/// Radial operator −h²(∂²_r + ((d−1)/r)∂_r) + h² c_n/r² + V₀(r) on
/// L²(ℝ₊, r^{d−1}dr) with Dirichlet condition at r_max.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedOperatorSpec {
    /// Dimension of configuration space (2 or 3).
    pub dim: usize,
    /// Angular quantum number: n for SO(2), ℓ for SO(3).
    pub sector: i64,
    pub h: f64,
    pub potential: Potential,
    pub r_max: f64,
    pub n_grid: usize,
    /// Top of the energy window the grid must resolve.
    pub e_top: f64,
}

impl ReducedOperatorSpec {
    /// Sizes r_max and the grid for eigenvalues up to `e_top`.
    pub fn for_window(dim: usize, sector: i64, h: f64, potential: Potential, e_top: f64, policy: &GridPolicy) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::config("h", format!("h must be positive, got {h}")));
        }
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidArgument(format!("radial operators exist for d = 2, 3, not {dim}")));
        }
        if dim == 3 && sector < 0 {
            return Err(Error::config("sector", "SO(3) sectors are labelled by n ≥ 0"));
        }
        potential.validate()?;
        let r_max = decay_radius(&potential, e_top, h, policy.decay)?;
        let kinetic = (e_top - potential.minimum()).max(h);
        let wavelengths = r_max * kinetic.sqrt() / (2.0 * PI * h);
        let n_grid = ((policy.points_per_wavelength * wavelengths).ceil() as usize).max(policy.min_points);
        Ok(Self {
            dim,
            sector,
            h,
            potential,
            r_max,
            n_grid,
            e_top,
        })
    }

    /// N ≥ max(min_points, floor_ppw · r_max √E / (2πh)).
    pub fn resolution_floor(&self, policy: &GridPolicy) -> usize {
        let kinetic = (self.e_top - self.potential.minimum()).max(self.h);
        let floor = policy.floor_points_per_wavelength * self.r_max * kinetic.sqrt() / (2.0 * PI * self.h);
        (floor.ceil() as usize).max(policy.min_points)
    }

    /// Centrifugal coefficient c_n: n² for d = 2, n(n+1) for d = 3.
    pub fn centrifugal(&self) -> f64 {
        let n = self.sector as f64;
        match self.dim {
            2 => n * n,
            _ => n * (n + 1.0),
        }
    }

    pub fn with_grid(&self, n_grid: usize) -> Self {
        Self { n_grid, ..*self }
    }

    /// Content hash of every field that influences the operator.
    pub fn content_hash(&self) -> String {
        let key = format!(
            "d={};n={};h={:e};V={};rmax={:e};N={};etop={:e}",
            self.dim,
            self.sector,
            self.h,
            self.potential.id(),
            self.r_max,
            self.n_grid,
            self.e_top
        );
        hex::encode(Sha256::digest(key.as_bytes()))
    }
}

/// Smallest r beyond the outer turning point of `e_top` where the WKB decay
/// exponent ∫√(V₀ − e_top)dr / h reaches `decay`.
fn decay_radius(potential: &Potential, e_top: f64, h: f64, decay: f64) -> Result<f64> {
    let start = if e_top > potential.minimum() {
        potential
            .allowed_intervals(e_top)?
            .last()
            .map(|c| c.outer)
            .unwrap_or(0.0)
    } else {
        potential.confining_radius(e_top)?
    };
    let step = (1e-3 * start.max(1e-2)).max(1e-6);
    let mut r = start;
    let mut acc = 0.0;
    let mut prev = 0.0;
    while acc / h < decay {
        r += step;
        let cur = (potential.value(r) - e_top).max(0.0).sqrt();
        acc += 0.5 * (prev + cur) * step;
        prev = cur;
        if r > 1e6 {
            return Err(Error::NoTurningPoint {
                energy: e_top,
                reason: "potential too flat to bound the grid".into(),
            });
        }
    }
    Ok(r)
}

/// Assembles the operator in conservative flux form on cell centres
/// r_i = (i − ½)Δr, symmetrized by the weights r^{d−1}.
pub fn build_reduced_operator(spec: &ReducedOperatorSpec, policy: &GridPolicy) -> Result<SymTridiagonal> {
    let floor = spec.resolution_floor(policy);
    if spec.n_grid < floor {
        return Err(Error::Grid {
            points: spec.n_grid,
            floor,
            h: spec.h,
        });
    }
    Ok(assemble(spec))
}

pub(crate) fn assemble(spec: &ReducedOperatorSpec) -> SymTridiagonal {
    let n = spec.n_grid;
    let dr = spec.r_max / n as f64;
    let h2 = spec.h * spec.h;
    let c = spec.centrifugal();
    let weight = |r: f64| r.powi(spec.dim as i32 - 1);
    let scale = h2 / (dr * dr);
    let centre = |i: usize| (i as f64 + 0.5) * dr;
    let diag = (0..n)
        .map(|i| {
            let r = centre(i);
            let w_minus = weight(i as f64 * dr);
            let w_plus = weight((i as f64 + 1.0) * dr);
            scale * (w_minus + w_plus) / weight(r) + h2 * c / (r * r) + spec.potential.value(r)
        })
        .collect();
    let off = (0..n.saturating_sub(1))
        .map(|i| {
            let w_face = weight((i as f64 + 1.0) * dr);
            -scale * w_face / (weight(centre(i)) * weight(centre(i + 1))).sqrt()
        })
        .collect();
    SymTridiagonal::new(diag, off)
}

/// Eigenvalues of one radial operator with per-eigenvalue error estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub errors: Vec<f64>,
    /// d_χ: each radial level carries this multiplicity in the sector.
    pub degree: usize,
    pub window: (f64, f64),
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    fn merge(parts: Vec<Spectrum>, degree: usize, window: (f64, f64)) -> Spectrum {
        let mut pairs: Vec<(f64, f64)> = parts
            .into_iter()
            .flat_map(|s| s.eigenvalues.into_iter().zip(s.errors))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Spectrum {
            eigenvalues: pairs.iter().map(|p| p.0).collect(),
            errors: pairs.iter().map(|p| p.1).collect(),
            degree,
            window,
        }
    }
}

/// Floor on error estimates, relative to |E|.
const ERROR_FLOOR: f64 = 1e-14;

/// All eigenvalues of the spec's operator in [lo, hi], with error estimates.
///
/// With Richardson enabled the grid is rerun at N/2 and N/4; levels are
/// matched by global index, the value is (4E_N − E_{N/2})/3, and its error
/// is estimated by the difference from the same extrapolation one level
/// coarser.
pub fn eigen_spectrum(spec: &ReducedOperatorSpec, lo: f64, hi: f64, policy: &GridPolicy) -> Result<Spectrum> {
    if hi > spec.e_top + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "window top {hi} exceeds the resolved energy {}",
            spec.e_top
        )));
    }
    let fine = build_reduced_operator(spec, policy)?;
    // discretization shifts levels by far less than this pad
    let pad = 1e-3 * (hi - lo).abs().max(spec.h);
    let indices = fine.index_range(lo - pad, (hi + pad).min(spec.e_top + pad));
    let values = fine.eigenvalues_by_index(indices.clone());
    let (eigenvalues, errors): (Vec<f64>, Vec<f64>) = if policy.richardson {
        let half = assemble(&spec.with_grid(spec.n_grid / 2)).eigenvalues_by_index(indices.clone());
        let quarter = assemble(&spec.with_grid(spec.n_grid / 4)).eigenvalues_by_index(indices);
        values
            .iter()
            .zip(half.iter().zip(&quarter))
            .map(|(&f, (&m, &c))| {
                let r1 = (4.0 * f - m) / 3.0;
                let r2 = (4.0 * m - c) / 3.0;
                (r1, (r1 - r2).abs().max(ERROR_FLOOR * r1.abs()))
            })
            .unzip()
    } else {
        let errors = values.iter().map(|v| ERROR_FLOOR * v.abs().max(1.0)).collect();
        (values, errors)
    };
    if eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("eigenvalue bisection produced a non-finite value".into()));
    }
    let (eigenvalues, errors) = eigenvalues
        .into_iter()
        .zip(errors)
        .filter(|(v, _)| *v >= lo && *v <= hi)
        .unzip();
    Ok(Spectrum {
        eigenvalues,
        errors,
        degree: 1,
        window: (lo, hi),
    })
}

/// A symmetry sector χ of one of the quantum-capable groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorQuery {
    pub group: GroupKind,
    pub sector: i64,
    pub h: f64,
    pub potential: Potential,
}

impl SectorQuery {
    pub fn new(group: GroupKind, sector: i64, h: f64, potential: Potential) -> Self {
        Self {
            group,
            sector,
            h,
            potential,
        }
    }

    pub fn character(&self) -> Result<IrreducibleCharacter> {
        IrreducibleCharacter::new(self.group, self.sector)
    }

    /// Radial operators whose spectra make up the sector below `e_top`.
    ///
    /// SO(2) and SO(3) sectors are a single radial operator; a cyclic sector n
    /// is the sum of the SO(2) sectors m ≡ n (mod N).
    pub fn radial_specs(&self, e_top: f64, policy: &GridPolicy) -> Result<Vec<ReducedOperatorSpec>> {
        match self.group {
            GroupKind::So2Planar => Ok(vec![ReducedOperatorSpec::for_window(
                2,
                self.sector,
                self.h,
                self.potential,
                e_top,
                policy,
            )?]),
            GroupKind::So3 => Ok(vec![ReducedOperatorSpec::for_window(
                3,
                self.sector,
                self.h,
                self.potential,
                e_top,
                policy,
            )?]),
            GroupKind::Cyclic(order) => {
                let order = order as i64;
                let base = self.sector.rem_euclid(order);
                let mut specs = Vec::new();
                // m = base, base − N, base + N, base − 2N, ... until the
                // centrifugal barrier lifts the ground state above e_top
                let mut ms: Vec<i64> = Vec::new();
                for j in 0.. {
                    let candidates = [base + j * order, base - (j + 1) * order];
                    let mut any = false;
                    for m in candidates {
                        let spec = ReducedOperatorSpec::for_window(2, m, self.h, self.potential, e_top, policy)?;
                        let op = assemble(&spec.with_grid(spec.n_grid.min(4000)));
                        // lowest eigenvalue is above the window once the
                        // Sturm count at e_top vanishes with margin
                        if op.count_below(e_top + 0.05 * e_top.abs().max(1.0)) > 0 {
                            any = true;
                            ms.push(m);
                            specs.push(spec);
                        }
                    }
                    if !any {
                        break;
                    }
                }
                Ok(specs)
            }
            GroupKind::So2Axial => Err(Error::Unsupported(
                "cylindrical symmetry is treated classically only".into(),
            )),
        }
    }

    /// Spectrum of Ĥ_χ in [lo, hi) with its multiplicity d_χ.
    pub fn spectrum(&self, lo: f64, hi: f64, policy: &GridPolicy) -> Result<Spectrum> {
        let degree = self.character()?.degree();
        let parts = self
            .radial_specs(hi, policy)?
            .iter()
            .map(|spec| eigen_spectrum(spec, lo, hi, policy))
            .collect::<Result<Vec<_>>>()?;
        Ok(Spectrum::merge(parts, degree, (lo, hi)))
    }
}

/// Anything that can produce sector spectra: the solver itself, or a cache
/// in front of it.
pub trait SpectrumSource: Sync {
    fn spectrum(&self, query: &SectorQuery, lo: f64, hi: f64) -> Result<Spectrum>;
}

impl SpectrumSource for GridPolicy {
    fn spectrum(&self, query: &SectorQuery, lo: f64, hi: f64) -> Result<Spectrum> {
        query.spectrum(lo, hi, self)
    }
}

/// d_χ × #{E_j ∈ [e1, e2]}; ambiguous when a level sits within its error
/// bar of either edge.
pub fn count_in_window(spectrum: &Spectrum, e1: f64, e2: f64) -> Result<usize> {
    let mut low = 0;
    let mut high = 0;
    let mut tie = None;
    for (&v, &err) in spectrum.eigenvalues.iter().zip(&spectrum.errors) {
        let surely_in = v - err >= e1 && v + err <= e2;
        let maybe_in = v + err >= e1 && v - err <= e2;
        if surely_in {
            low += 1;
        }
        if maybe_in {
            high += 1;
            if !surely_in {
                tie.get_or_insert((v, err));
            }
        }
    }
    let d = spectrum.degree;
    match tie {
        Some((eigenvalue, error)) => Err(Error::Ambiguity {
            eigenvalue,
            error,
            low: d * low,
            high: d * high,
        }),
        None => Ok(d * low),
    }
}

/// N_{I,χ}(h).
pub fn counting_function(query: &SectorQuery, e1: f64, e2: f64, policy: &GridPolicy) -> Result<usize> {
    if e1 > e2 {
        return Err(Error::InvalidArgument(format!("empty window [{e1}, {e2}]")));
    }
    let margin = 0.05 * (e2 - e1).max(0.1);
    let spectrum = query.spectrum(e1 - margin, e2 + margin, policy)?;
    count_in_window(&spectrum, e1, e2)
}

/// Σ_j d_χ f(E_j) over the levels in `spectrum`.
pub fn weak_trace_of<F: Fn(f64) -> f64>(spectrum: &Spectrum, f: F) -> f64 {
    spectrum.degree as f64 * spectrum.eigenvalues.iter().map(|&e| f(e)).sum::<f64>()
}

/// Tr f(Ĥ_χ) for f supported in [lo, hi].
pub fn weak_trace<F: Fn(f64) -> f64>(query: &SectorQuery, f: F, lo: f64, hi: f64, policy: &GridPolicy) -> Result<f64> {
    let spectrum = query.spectrum(lo, hi, policy)?;
    Ok(weak_trace_of(&spectrum, f))
}

/// Smooth bump exp(1 − 1/(1 − u²)) on |u| < 1, equal to 1 at its centre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub centre: f64,
    pub half_width: f64,
}

impl Bump {
    pub fn new(centre: f64, half_width: f64) -> Self {
        Self { centre, half_width }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.centre) / self.half_width;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.centre - self.half_width, self.centre + self.half_width)
    }
}

/// Energy cutoff ψ and time window f̂ for the smoothed trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceWindows {
    pub psi: Bump,
    pub f_hat: Bump,
    /// Trapezoid nodes for f(s) = (1/2π)∫ f̂(t) e^{ist} dt.
    pub quadrature_points: usize,
}

impl TraceWindows {
    pub fn new(energy: f64, t_centre: f64) -> Self {
        Self {
            psi: Bump::new(energy, 0.1),
            f_hat: Bump::new(t_centre, 0.3),
            quadrature_points: 2001,
        }
    }

    /// f(s) by fixed-grid inversion of f̂.
    pub fn f(&self, s: f64) -> Complex64 {
        let (a, b) = self.f_hat.support();
        let m = self.quadrature_points.max(3);
        let dt = (b - a) / (m - 1) as f64;
        // the bump and all its derivatives vanish at both ends, so the
        // trapezoid rule converges faster than any power of dt
        let sum: Complex64 = (1..m - 1)
            .map(|k| {
                let t = a + k as f64 * dt;
                Complex64::from_polar(self.f_hat.eval(t), s * t)
            })
            .sum();
        sum * dt / (2.0 * PI)
    }

    pub fn f_hat_at_zero(&self) -> f64 {
        self.f_hat.eval(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedTrace {
    pub h: f64,
    pub energy: f64,
    /// G_χ(h) = Σ_j d_χ ψ(E_j) f((E − E_j)/h).
    pub value: Complex64,
}

/// G_χ(h) from a spectrum covering supp ψ.
pub fn smoothed_trace_of(spectrum: &Spectrum, h: f64, energy: f64, windows: &TraceWindows) -> SmoothedTrace {
    let d = spectrum.degree as f64;
    let value = spectrum
        .eigenvalues
        .iter()
        .map(|&e| {
            let w = windows.psi.eval(e);
            if w == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                windows.f((energy - e) / h) * (d * w)
            }
        })
        .sum();
    SmoothedTrace { h, energy, value }
}

/// Y(t; h) = Σ_j d_χ ψ(E_j) e^{i(E − E_j)t/h} at each t.
pub fn time_signal(spectrum: &Spectrum, h: f64, energy: f64, psi: &Bump, times: &[f64]) -> Vec<Complex64> {
    let d = spectrum.degree as f64;
    let terms: Vec<(f64, f64)> = spectrum
        .eigenvalues
        .iter()
        .map(|&e| (d * psi.eval(e), (energy - e) / h))
        .filter(|(w, _)| *w != 0.0)
        .collect();
    times
        .iter()
        .map(|&t| terms.iter().map(|&(w, s)| Complex64::from_polar(w, s * t)).sum())
        .collect()
}

/// G_χ(h) and the time signal on `times` for a sector.
pub fn smoothed_trace(
    query: &SectorQuery,
    energy: f64,
    windows: &TraceWindows,
    times: &[f64],
    policy: &GridPolicy,
) -> Result<(SmoothedTrace, Vec<Complex64>)> {
    let (lo, hi) = windows.psi.support();
    let spectrum = query.spectrum(lo, hi, policy)?;
    Ok((
        smoothed_trace_of(&spectrum, query.h, energy, windows),
        time_signal(&spectrum, query.h, energy, &windows.psi, times),
    ))
}

/// Exact oscillator levels in a sector: 2h(2k + |n| + 1) for d = 2 and
/// h(4k + 2n + 3) for d = 3, with V₀ = r².
pub fn harmonic_levels(dim: usize, sector: i64, h: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|k| {
            let k = k as f64;
            match dim {
                2 => 2.0 * h * (2.0 * k + sector.unsigned_abs() as f64 + 1.0),
                _ => h * (4.0 * k + 2.0 * sector as f64 + 3.0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dim: usize, n: i64, h: f64, e_top: f64) -> ReducedOperatorSpec {
        ReducedOperatorSpec::for_window(dim, n, h, Potential::harmonic(), e_top, &GridPolicy::default()).unwrap()
    }

    #[test]
    fn d3_s_wave_has_bare_potential() {
        let s = spec(3, 0, 0.1, 1.0);
        assert_eq!(s.centrifugal(), 0.0);
    }

    #[test]
    fn lowest_level_d2_n1_converges_to_four() {
        let policy = GridPolicy::default();
        let s = spec(2, 1, 1.0, 5.0);
        let sp = eigen_spectrum(&s, 0.0, 5.0, &policy).unwrap();
        assert!((sp.eigenvalues[0] - 4.0).abs() < 1e-8, "{:?}", sp.eigenvalues);
        let mut prev = f64::INFINITY;
        for n in [500, 1000, 2000] {
            let err = (assemble(&s.with_grid(n)).eigenvalue(0).unwrap() - 4.0).abs();
            assert!(err < prev / 3.0);
            prev = err;
        }
    }

    #[test]
    fn assembled_matrix_is_symmetric_by_construction() {
        let op = assemble(&spec(2, 0, 0.1, 1.0).with_grid(100));
        assert_eq!(op.off_diag().len(), 99);
    }

    #[test]
    fn oscillator_window_d2() {
        let policy = GridPolicy::default();
        let s = spec(2, 0, 0.05, 1.5);
        let sp = eigen_spectrum(&s, 0.5, 1.5, &policy).unwrap();
        let exact = harmonic_levels(2, 0, 0.05, 40);
        // 0.5 and 1.5 are themselves levels and may land on either side
        let interior = exact.iter().filter(|&&e| e > 0.5 + 1e-6 && e < 1.5 - 1e-6).count();
        assert!(sp.len() >= interior && sp.len() <= interior + 2);
        for a in &sp.eigenvalues {
            assert!(exact.iter().any(|b| (a - b).abs() < 1e-6), "{a}");
        }
        let empty = eigen_spectrum(&s, -1.0, 0.05, &policy).unwrap();
        assert!(empty.is_empty());
        let op = build_reduced_operator(&s, &policy).unwrap();
        assert_eq!(op.count_below(1.5) - op.count_below(0.5), sp.len());
    }

    #[test]
    fn grid_floor_is_enforced() {
        let s = spec(2, 0, 0.01, 2.0);
        let err = build_reduced_operator(&s.with_grid(100), &GridPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::Grid { .. }));
    }

    #[test]
    fn harmonic_counts() {
        let policy = GridPolicy::default();
        let q = SectorQuery::new(GroupKind::So2Planar, 0, 0.01, Potential::harmonic());
        assert_eq!(counting_function(&q, 1.0, 2.0, &policy).unwrap(), 25);
        assert_eq!(counting_function(&q, 1.51, 1.51, &policy).unwrap(), 0);
        let q3 = SectorQuery::new(GroupKind::So3, 1, 0.02, Potential::harmonic());
        let radial = q3.spectrum(0.9, 2.1, &policy).unwrap();
        let c = count_in_window(&radial, 1.0, 2.0).unwrap();
        let plain = radial.eigenvalues.iter().filter(|&&e| (1.0..=2.0).contains(&e)).count();
        assert_eq!(c, 3 * plain);
    }

    #[test]
    fn ambiguity_on_edge_levels() {
        let policy = GridPolicy::default();
        let q = SectorQuery::new(GroupKind::So2Planar, 0, 0.05, Potential::harmonic());
        // 0.1·(2k+1) hits 1.1 exactly at k = 5
        match counting_function(&q, 0.45, 1.1, &policy) {
            Err(Error::Ambiguity { low, high, .. }) => assert_eq!((low, high), (3, 4)),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn sectors_plus_minus_agree() {
        let policy = GridPolicy::default();
        let a = SectorQuery::new(GroupKind::So2Planar, 2, 0.05, Potential::anharmonic(1.0)).spectrum(0.0, 2.0, &policy).unwrap();
        let b = SectorQuery::new(GroupKind::So2Planar, -2, 0.05, Potential::anharmonic(1.0)).spectrum(0.0, 2.0, &policy).unwrap();
        assert_eq!(a.eigenvalues, b.eigenvalues);
    }

    #[test]
    fn cyclic_sector_collects_congruent_so2_sectors() {
        let policy = GridPolicy::default();
        let h = 0.05;
        let q = SectorQuery::new(GroupKind::Cyclic(3), 1, h, Potential::harmonic());
        let sp = q.spectrum(0.0, 1.0, &policy).unwrap();
        let mut exact: Vec<f64> = (-20i64..=20)
            .filter(|m| m.rem_euclid(3) == 1)
            .flat_map(|m| harmonic_levels(2, m, h, 20))
            .filter(|&e| e < 1.0)
            .collect();
        exact.sort_by(f64::total_cmp);
        assert_eq!(sp.len(), exact.len());
        for (a, b) in sp.eigenvalues.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn variational_monotonicity() {
        let policy = GridPolicy::default();
        let pot = Potential::anharmonic(1.0);
        let lower = SectorQuery::new(GroupKind::So2Planar, 1, 0.05, pot).spectrum(0.0, 3.0, &policy).unwrap();
        let upper = SectorQuery::new(GroupKind::So2Planar, 1, 0.05, pot.shifted(0.1)).spectrum(0.0, 3.1, &policy).unwrap();
        for (a, b) in lower.eigenvalues.iter().zip(&upper.eigenvalues) {
            assert!(b > a);
        }
    }

    #[test]
    fn single_level_trace() {
        let sp = Spectrum {
            eigenvalues: vec![1.02],
            errors: vec![1e-12],
            degree: 1,
            window: (0.9, 1.1),
        };
        let w = TraceWindows::new(1.0, 0.0);
        let g = smoothed_trace_of(&sp, 0.01, 1.0, &w);
        let expected = w.f((1.0 - 1.02) / 0.01) * w.psi.eval(1.02);
        assert!((g.value - expected).norm() < 1e-15);
        let zero = TraceWindows {
            f_hat: Bump::new(0.0, 1e-300),
            ..w
        };
        assert!(smoothed_trace_of(&sp, 0.01, 1.0, &zero).value.norm() < 1e-250);
    }

    #[test]
    fn fourier_inversion_matches_adaptive_quadrature() {
        use crate::numerics::quad::{integrate, QuadTolerance};
        let w = TraceWindows::new(1.0, 0.4);
        let (a, b) = w.f_hat.support();
        for s in [0.0, 1.7, -12.0, 60.0] {
            let tol = QuadTolerance::absolute(1e-14);
            let re = integrate(|t| w.f_hat.eval(t) * (s * t).cos(), a, b, tol).unwrap().value;
            let im = integrate(|t| w.f_hat.eval(t) * (s * t).sin(), a, b, tol).unwrap().value;
            let oracle = Complex64::new(re, im) / (2.0 * PI);
            assert!((w.f(s) - oracle).norm() < 1e-12, "s={s}: {} vs {oracle}", w.f(s));
        }
    }

    #[test]
    fn harmonic_signal_peaks_at_quarter_turns() {
        let h = 0.01;
        let sp = Spectrum {
            eigenvalues: harmonic_levels(2, 0, h, 200),
            errors: vec![1e-12; 200],
            degree: 1,
            window: (0.0, 10.0),
        };
        let psi = Bump::new(1.0, 0.1);
        let y = time_signal(&sp, h, 1.0, &psi, &[0.0, PI / 2.0, PI / 4.0]);
        assert!((y[1].norm() - y[0].norm()).abs() < 1e-9);
        assert!(y[2].norm() < 0.2 * y[0].norm());
    }
}

