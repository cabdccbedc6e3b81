//! Radial potential catalog and the invariant Hamiltonians H = |ξ|² + V.
//!
//! Potentials are stored as functions of q = r², which keeps them smooth
//! through the origin and gives ∇V(x) = 2 U′(|x|²) x directly.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupKind;
use crate::phase::{dot, PhasePoint};

/// Radial profile V₀, plus a constant offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    /// k r²
    Harmonic { k: f64 },
    /// r² + λ r⁴
    Anharmonic { lambda: f64 },
    /// (r² − a²)²
    DoubleWell { a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    pub kind: PotentialKind,
    #[serde(default)]
    pub offset: f64,
}

impl Potential {
    pub fn harmonic() -> Self {
        Self::new(PotentialKind::Harmonic { k: 1.0 })
    }

    pub fn anharmonic(lambda: f64) -> Self {
        Self::new(PotentialKind::Anharmonic { lambda })
    }

    pub fn double_well(a: f64) -> Self {
        Self::new(PotentialKind::DoubleWell { a })
    }

    pub fn new(kind: PotentialKind) -> Self {
        Self { kind, offset: 0.0 }
    }

    pub fn shifted(self, delta: f64) -> Self {
        Self {
            offset: self.offset + delta,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            PotentialKind::Harmonic { k } => k > 0.0 && k.is_finite(),
            PotentialKind::Anharmonic { lambda } => lambda >= 0.0 && lambda.is_finite(),
            PotentialKind::DoubleWell { a } => a > 0.0 && a.is_finite(),
        };
        if ok && self.offset.is_finite() {
            Ok(())
        } else {
            Err(Error::config("potential", format!("parameters of {self} are not confining")))
        }
    }

    /// Stable identifier used in cache keys and reports.
    pub fn id(&self) -> String {
        let base = match self.kind {
            PotentialKind::Harmonic { k } => format!("harmonic(k={k:e})"),
            PotentialKind::Anharmonic { lambda } => format!("anharmonic(lambda={lambda:e})"),
            PotentialKind::DoubleWell { a } => format!("doublewell(a={a:e})"),
        };
        if self.offset == 0.0 {
            base
        } else {
            format!("{base}+{:e}", self.offset)
        }
    }

    /// U(q) with V₀(r) = U(r²).
    pub fn of_q(&self, q: f64) -> f64 {
        self.offset
            + match self.kind {
                PotentialKind::Harmonic { k } => k * q,
                PotentialKind::Anharmonic { lambda } => q + lambda * q * q,
                PotentialKind::DoubleWell { a } => (q - a * a).powi(2),
            }
    }

    /// (α, β, γ) with U(q) = α + β q + γ q²; every catalog profile is
    /// quadratic in q.
    pub fn q_coefficients(&self) -> (f64, f64, f64) {
        let (a, b, c) = match self.kind {
            PotentialKind::Harmonic { k } => (0.0, k, 0.0),
            PotentialKind::Anharmonic { lambda } => (0.0, 1.0, lambda),
            PotentialKind::DoubleWell { a } => (a.powi(4), -2.0 * a * a, 1.0),
        };
        (a + self.offset, b, c)
    }

    /// U′(q).
    pub fn dq(&self, q: f64) -> f64 {
        match self.kind {
            PotentialKind::Harmonic { k } => k,
            PotentialKind::Anharmonic { lambda } => 1.0 + 2.0 * lambda * q,
            PotentialKind::DoubleWell { a } => 2.0 * (q - a * a),
        }
    }

    /// U″(q).
    pub fn dq2(&self, _q: f64) -> f64 {
        match self.kind {
            PotentialKind::Harmonic { .. } => 0.0,
            PotentialKind::Anharmonic { lambda } => 2.0 * lambda,
            PotentialKind::DoubleWell { .. } => 2.0,
        }
    }

    /// V₀ at a signed radius.
    pub fn value(&self, r: f64) -> f64 {
        self.of_q(r * r)
    }

    /// V₀′ at a signed radius.
    pub fn derivative(&self, r: f64) -> f64 {
        2.0 * r * self.dq(r * r)
    }

    /// V₀″ at a signed radius.
    pub fn second_derivative(&self, r: f64) -> f64 {
        let q = r * r;
        2.0 * self.dq(q) + 4.0 * q * self.dq2(q)
    }

    pub fn minimum(&self) -> f64 {
        self.critical_values()
            .into_iter()
            .fold(self.value(0.0), f64::min)
    }

    /// Critical values of V₀ on [0, ∞), including the value at the origin
    /// where the quotient chart degenerates.
    pub fn critical_values(&self) -> Vec<f64> {
        let mut values = vec![self.value(0.0)];
        // scan U′ on a q grid reaching past every catalog stationary point
        let q_max = match self.kind {
            PotentialKind::DoubleWell { a } => 4.0 * a * a + 4.0,
            _ => 4.0,
        };
        let n = 4096;
        let grid: Vec<f64> = (0..=n).map(|i| q_max * i as f64 / n as f64).collect();
        for w in grid.windows(2) {
            let (fa, fb) = (self.dq(w[0]), self.dq(w[1]));
            if fa == 0.0 && w[0] > 0.0 {
                values.push(self.of_q(w[0]));
            } else if fa * fb < 0.0 {
                let q = bisect(|q| self.dq(q), w[0], w[1]);
                values.push(self.of_q(q));
            }
        }
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        values
    }

    /// Radius beyond which V₀ > `e` and increasing.
    pub fn confining_radius(&self, e: f64) -> Result<f64> {
        let mut r: f64 = 1.0;
        for _ in 0..200 {
            if self.value(r) > e && self.derivative(r) > 0.0 && self.dq(r * r) > 0.0 {
                let beyond_critical = match self.kind {
                    PotentialKind::DoubleWell { a } => r > a,
                    _ => true,
                };
                if beyond_critical {
                    return Ok(r);
                }
            }
            r *= 2.0;
        }
        Err(Error::NoTurningPoint {
            energy: e,
            reason: "potential does not confine at this energy".into(),
        })
    }

    /// Connected components of {r ≥ 0 : V₀(r) < E}.
    pub fn allowed_intervals(&self, e: f64) -> Result<Vec<AllowedInterval>> {
        let r_hi = self.confining_radius(e)?;
        let f = |r: f64| self.value(r) - e;
        let n = 4000;
        let mut grid = vec![0.0];
        let lo = 1e-6 * r_hi;
        grid.extend((0..=n).map(|i| lo * (r_hi / lo).powf(i as f64 / n as f64)));
        grid.extend((1..n).map(|i| r_hi * i as f64 / n as f64));
        // wells sit at stationary points of V₀; include them so narrow wells are bracketed
        let (_, beta, gamma) = self.q_coefficients();
        if gamma > 0.0 && beta < 0.0 {
            grid.push((-beta / (2.0 * gamma)).sqrt());
        }
        grid.sort_by(f64::total_cmp);
        let mut intervals = Vec::new();
        let mut start = if f(0.0) < 0.0 { Some(0.0) } else { None };
        for w in grid.windows(2) {
            let (fa, fb) = (f(w[0]), f(w[1]));
            if fa >= 0.0 && fb < 0.0 {
                start = Some(self.polish_root(e, bisect(f, w[0], w[1])));
            } else if fa < 0.0 && fb >= 0.0 {
                let end = self.polish_root(e, bisect(f, w[0], w[1]));
                let begin = start.take().expect("entered the allowed region before leaving it");
                intervals.push(AllowedInterval {
                    inner: begin,
                    outer: end,
                    crosses_origin: begin == 0.0,
                });
            }
        }
        if start.is_some() {
            return Err(Error::NoTurningPoint {
                energy: e,
                reason: "classically allowed region is unbounded".into(),
            });
        }
        if intervals.is_empty() {
            return Err(Error::NoTurningPoint {
                energy: e,
                reason: "energy lies below the potential".into(),
            });
        }
        Ok(intervals)
    }
}

impl Potential {
    /// One Newton step on V₀(r) = E after bisection.
    fn polish_root(&self, e: f64, r: f64) -> f64 {
        let d = self.derivative(r);
        if d == 0.0 {
            return r;
        }
        let next = r - (self.value(r) - e) / d;
        if (next - r).abs() <= 1e-10 * r.abs().max(1e-3) {
            next
        } else {
            r
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// A component [inner, outer] of the classically allowed radii. When
/// `crosses_origin` is set, `inner` is 0 and the motion passes through r = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllowedInterval {
    pub inner: f64,
    pub outer: f64,
    pub crosses_origin: bool,
}

/// Bisection on a bracketing interval, to 1e-12 relative or 1e-14 absolute.
pub(crate) fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    if fa == 0.0 {
        return a;
    }
    let sa = fa.signum();
    while (b - a) > 1e-12 * a.abs().max(b.abs()).max(1e-2) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Rotational geometry of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Geometry {
    /// V = V₀(|x|).
    Spherical,
    /// V = V₀(|x′|) + x₃², x′ = (x₁, x₂).
    Cylindrical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianModel {
    pub dim: usize,
    pub potential: Potential,
    pub geometry: Geometry,
}

impl HamiltonianModel {
    pub fn spherical(dim: usize, potential: Potential) -> Self {
        Self {
            dim,
            potential,
            geometry: Geometry::Spherical,
        }
    }

    pub fn cylindrical(potential: Potential) -> Self {
        Self {
            dim: 3,
            potential,
            geometry: Geometry::Cylindrical,
        }
    }

    /// The natural invariant Hamiltonian for a catalog group.
    pub fn for_group(group: GroupKind, potential: Potential) -> Self {
        match group {
            GroupKind::So2Axial => Self::cylindrical(potential),
            other => Self::spherical(other.config_dim(), potential),
        }
    }

    pub fn potential_at(&self, x: &[f64]) -> f64 {
        match self.geometry {
            Geometry::Spherical => self.potential.of_q(dot(x, x)),
            Geometry::Cylindrical => self.potential.of_q(x[0] * x[0] + x[1] * x[1]) + x[2] * x[2],
        }
    }

    pub fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        match self.geometry {
            Geometry::Spherical => {
                let s = 2.0 * self.potential.dq(dot(x, x));
                for (o, xi) in out.iter_mut().zip(x) {
                    *o = s * xi;
                }
            }
            Geometry::Cylindrical => {
                let s = 2.0 * self.potential.dq(x[0] * x[0] + x[1] * x[1]);
                out[0] = s * x[0];
                out[1] = s * x[1];
                out[2] = 2.0 * x[2];
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        self.gradient_into(x, &mut g);
        g
    }

    /// H(x, ξ) = |ξ|² + V(x).
    pub fn energy(&self, z: &PhasePoint) -> f64 {
        dot(&z.xi, &z.xi) + self.potential_at(&z.x)
    }

    /// H̃(r, p) = p² + V₀(r).
    pub fn reduced_energy(&self, r: f64, p: f64) -> f64 {
        p * p + self.potential.value(r)
    }

    /// Critical values of the reduced Hamiltonian (and of the degenerate
    /// origin of the quotient).
    pub fn critical_values(&self) -> Vec<f64> {
        self.potential.critical_values()
    }

    /// Fails when [e1, e2] contains a critical value.
    pub fn check_window(&self, e1: f64, e2: f64) -> Result<()> {
        if let Some(&c) = self
            .critical_values()
            .iter()
            .find(|&&c| c >= e1 - 1e-12 && c <= e2 + 1e-12)
        {
            return Err(Error::DegenerateWindow { e1, e2, critical: c });
        }
        Ok(())
    }
}
