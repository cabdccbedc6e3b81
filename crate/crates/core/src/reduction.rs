//! Momentum map, the zero level Ω₀, the reduced chart (r, p), and reduced
//! volumes and Liouville masses.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupKind, GroupModel};
use crate::hamiltonian::{AllowedInterval, Geometry, HamiltonianModel};
use crate::numerics::quad::{integrate, integrate_endpoint_regular, QuadTolerance};
use crate::phase::{dot, PhasePoint};

/// Absolute tolerance on the momentum-map residual for membership in Ω₀.
pub const OMEGA0_TOL: f64 = 1e-10;

/// F_A(z) = ½⟨J M(A) z, z⟩ = xᵀ A ξ for each generator A.
pub fn momentum_map(group: &GroupModel, z: &PhasePoint) -> Vec<f64> {
    let x = DVector::from_column_slice(&z.x);
    let xi = DVector::from_column_slice(&z.xi);
    group.generators().iter().map(|a| x.dot(&(a * &xi))).collect()
}

/// ‖𝔽(z)‖.
pub fn omega0_residual(group: &GroupModel, z: &PhasePoint) -> f64 {
    momentum_map(group, z).iter().map(|f| f * f).sum::<f64>().sqrt()
}

/// Jacobian of 𝔽, one row (A ξ, ᵗA x) per generator.
pub fn momentum_jacobian(group: &GroupModel, z: &PhasePoint) -> DMatrix<f64> {
    let d = z.dim();
    let x = DVector::from_column_slice(&z.x);
    let xi = DVector::from_column_slice(&z.xi);
    let mut jac = DMatrix::zeros(group.lie_dim(), 2 * d);
    for (i, a) in group.generators().iter().enumerate() {
        let dx = a * &xi;
        let dxi = a.transpose() * &x;
        for k in 0..d {
            jac[(i, k)] = dx[k];
            jac[(i, d + k)] = dxi[k];
        }
    }
    jac
}

/// Numerical rank of D𝔽(z); on the regular part of Ω₀ this equals k₀, so
/// that dim Ω₀ = 2d − k₀.
pub fn momentum_jacobian_rank(group: &GroupModel, z: &PhasePoint) -> usize {
    let jac = momentum_jacobian(group, z);
    if jac.nrows() == 0 {
        return 0;
    }
    let sv = jac.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * max).count()
}

pub fn orbit_dimension_k0(group: &GroupModel) -> usize {
    group.orbit_dimension()
}

/// Riemannian volume of the orbit G(z) for z in the regular part of Ω₀.
pub fn orbit_volume(group: &GroupModel, z: &PhasePoint) -> f64 {
    let speed_sq = |a: &DMatrix<f64>| {
        let ax = a * DVector::from_column_slice(&z.x);
        let axi = a * DVector::from_column_slice(&z.xi);
        ax.norm_squared() + axi.norm_squared()
    };
    match group.kind() {
        // exp(tA) has period 2π√2 for a unit generator
        GroupKind::So2Planar | GroupKind::So2Axial => 2.0 * PI * SQRT_2 * speed_sq(&group.generators()[0]).sqrt(),
        GroupKind::So3 => 4.0 * PI * group.generators().iter().map(speed_sq).sum::<f64>(),
        GroupKind::Cyclic(order) => order as f64,
    }
}

/// Coordinates on the reduced space: the radial chart (r, p), plus the
/// untouched vertical pair (x₃, ξ₃) for the cylindrical action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedPoint {
    pub r: f64,
    pub p: f64,
    pub vertical: Option<(f64, f64)>,
}

impl ReducedPoint {
    pub fn planar(r: f64, p: f64) -> Self {
        Self { r, p, vertical: None }
    }

    pub fn energy(&self, model: &HamiltonianModel) -> f64 {
        let v = self.vertical.map_or(0.0, |(x3, xi3)| x3 * x3 + xi3 * xi3);
        model.reduced_energy(self.r, self.p) + v
    }
}

/// The chart r > 0 is a fundamental domain for the identification
/// (r, p) ~ (−r, −p).
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedChart {
    pub group: GroupModel,
    pub model: HamiltonianModel,
}

impl ReducedChart {
    pub fn new(group: GroupModel, model: HamiltonianModel) -> Result<Self> {
        if matches!(group.kind(), GroupKind::Cyclic(_)) {
            return Err(Error::Unsupported("finite groups have no radial reduced chart".into()));
        }
        if model.dim != group.config_dim() {
            return Err(Error::InvalidArgument("model and group act in different dimensions".into()));
        }
        Ok(Self { group, model })
    }

    /// Whether the chart double-covers the quotient before restricting to r > 0.
    pub fn identifies_antipodes(&self) -> bool {
        true
    }

    pub fn project(&self, z: &PhasePoint) -> Result<ReducedPoint> {
        to_reduced_chart(&self.group, z, OMEGA0_TOL)
    }

    pub fn reduced_energy(&self, w: &ReducedPoint) -> f64 {
        w.energy(&self.model)
    }
}

/// Projects z ∈ Ω₀ to (r, p) with r = |x| (|x′| for the cylinder) and
/// p = ξ·x/|x|.
pub fn to_reduced_chart(group: &GroupModel, z: &PhasePoint, tol: f64) -> Result<ReducedPoint> {
    if z.dim() != group.config_dim() {
        return Err(Error::InvalidArgument("phase point dimension does not match the group".into()));
    }
    if matches!(group.kind(), GroupKind::Cyclic(_)) {
        return Err(Error::Unsupported("finite groups have no radial reduced chart".into()));
    }
    // stratum check first: it also rejects the origin
    group.stabilizer_of(z)?;
    let residual = omega0_residual(group, z);
    if residual >= tol {
        return Err(Error::Tolerance { residual, tol });
    }
    let (x, xi, vertical) = match group.kind() {
        GroupKind::So2Axial => (&z.x[..2], &z.xi[..2], Some((z.x[2], z.xi[2]))),
        _ => (&z.x[..], &z.xi[..], None),
    };
    let r = dot(x, x).sqrt();
    if r == 0.0 {
        // r = 0 lies on the identification line, where (0, p) ~ (0, −p)
        let p = dot(xi, xi).sqrt();
        return Ok(ReducedPoint { r: 0.0, p, vertical });
    }
    let p = dot(xi, x) / r;
    Ok(ReducedPoint { r, p, vertical })
}

/// Lifts (r, p) to Ω₀ along the unit direction `u` (|u| = 1, length 2 for
/// the cylinder, length d otherwise).
pub fn embed(group: &GroupModel, w: &ReducedPoint, u: &[f64]) -> PhasePoint {
    match group.kind() {
        GroupKind::So2Axial => {
            let (x3, xi3) = w.vertical.unwrap_or((0.0, 0.0));
            PhasePoint::new(
                vec![w.r * u[0], w.r * u[1], x3],
                vec![w.p * u[0], w.p * u[1], xi3],
            )
        }
        _ => PhasePoint::new(u.iter().map(|c| w.r * c).collect(), u.iter().map(|c| w.p * c).collect()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeMethod {
    ChartQuadrature,
    Omega0MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedVolumeResult {
    pub value: f64,
    pub method: VolumeMethod,
    pub error: f64,
}

impl ReducedVolumeResult {
    /// |a − b| within `sigmas` combined standard errors.
    pub fn agrees_with(&self, other: &Self, sigmas: f64) -> bool {
        let combined = (self.error.powi(2) + other.error.powi(2)).sqrt();
        (self.value - other.value).abs() <= sigmas * combined
    }
}

fn chart_tol() -> QuadTolerance {
    QuadTolerance {
        abs: 1e-12,
        rel: 1e-12,
        max_intervals: 4000,
    }
}

fn check_model(group: &GroupModel, model: &HamiltonianModel) -> Result<()> {
    let expected = match group.kind() {
        GroupKind::So2Axial => Geometry::Cylindrical,
        _ => Geometry::Spherical,
    };
    if model.geometry != expected || model.dim != group.config_dim() {
        return Err(Error::InvalidArgument(format!(
            "{} needs a {:?} model in dimension {}",
            group.kind(),
            expected,
            group.config_dim()
        )));
    }
    model.potential.validate()
}

/// Components of {V₀ < E}, or none when E is below the potential.
fn components(model: &HamiltonianModel, e: f64) -> Result<Vec<AllowedInterval>> {
    if e <= model.potential.minimum() {
        return Ok(Vec::new());
    }
    model.potential.allowed_intervals(e)
}

/// Reduced phase-space volume of {H̃ ≤ E}.
fn volume_below(group: &GroupModel, model: &HamiltonianModel, e: f64) -> Result<(f64, f64)> {
    let pot = model.potential;
    let mut total = 0.0;
    let mut err = 0.0;
    for c in components(model, e)? {
        let res = match group.kind() {
            GroupKind::So2Planar | GroupKind::So3 => integrate_endpoint_regular(
                |r| 2.0 * (e - pot.value(r)).max(0.0).sqrt(),
                c.inner,
                c.outer,
                chart_tol(),
            )?,
            GroupKind::So2Axial => integrate_endpoint_regular(
                |r| 4.0 * PI / 3.0 * (e - pot.value(r)).max(0.0).powf(1.5),
                c.inner,
                c.outer,
                chart_tol(),
            )?,
            GroupKind::Cyclic(order) => integrate_endpoint_regular(
                |r| 2.0 * PI * PI * r * (e - pot.value(r)).max(0.0) / order as f64,
                c.inner,
                c.outer,
                chart_tol(),
            )?,
        };
        total += res.value;
        err += res.error;
    }
    Ok((total, err))
}

/// Vol_red(H̃⁻¹([e1, e2])) by quadrature in the reduced chart.
pub fn reduced_volume(group: &GroupModel, model: &HamiltonianModel, e1: f64, e2: f64) -> Result<ReducedVolumeResult> {
    check_model(group, model)?;
    if e1 > e2 {
        return Err(Error::InvalidArgument(format!("empty window [{e1}, {e2}]")));
    }
    model.check_window(e1, e2)?;
    if e1 == e2 {
        return Ok(ReducedVolumeResult {
            value: 0.0,
            method: VolumeMethod::ChartQuadrature,
            error: 0.0,
        });
    }
    let (hi, err_hi) = volume_below(group, model, e2)?;
    let (lo, err_lo) = volume_below(group, model, e1)?;
    Ok(ReducedVolumeResult {
        value: hi - lo,
        method: VolumeMethod::ChartQuadrature,
        error: err_hi + err_lo,
    })
}

/// Uniform direction on S^{d−1} via spherical coordinates, with the
/// symbolic Jacobian of the angular parametrization.
fn angles_to_direction(dim: usize, a: f64, b: f64) -> (Vec<f64>, f64) {
    match dim {
        2 => (vec![a.cos(), a.sin()], 1.0),
        _ => (vec![a.sin() * b.cos(), a.sin() * b.sin(), a.cos()], a.sin()),
    }
}

/// Draws one sample of the box and returns its weight.
type SampleWeight<'a> = Box<dyn Fn(&mut ChaCha8Rng) -> f64 + 'a>;

/// Vol_red by sampling Ω₀ in the parametrization (r, p, angles), with each
/// sample weighted by the embedding Jacobian and 1/Vol(G(z)).
pub fn reduced_volume_monte_carlo(
    group: &GroupModel,
    model: &HamiltonianModel,
    e1: f64,
    e2: f64,
    samples: usize,
    seed: u64,
) -> Result<ReducedVolumeResult> {
    check_model(group, model)?;
    if e1 > e2 || samples < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs a window and at least two samples".into()));
    }
    model.check_window(e1, e2)?;
    let pot = model.potential;
    let r_max = pot.confining_radius(e2)?;
    let p_max = (e2 - pot.minimum()).max(0.0).sqrt();
    let v_max = e2.max(0.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let (box_volume, draw): (f64, SampleWeight<'_>) = match group.kind() {
        GroupKind::So2Planar => (
            r_max * 2.0 * p_max * 2.0 * PI,
            Box::new(|rng: &mut ChaCha8Rng| {
                let w = ReducedPoint::planar(rng.random_range(0.0..r_max), rng.random_range(-p_max..p_max));
                let (u, _) = angles_to_direction(2, rng.random_range(0.0..2.0 * PI), 0.0);
                let z = embed(group, &w, &u);
                let jac = (w.r * w.r + w.p * w.p).sqrt();
                weight(model, &z, e1, e2, jac / orbit_volume(group, &z))
            }),
        ),
        GroupKind::So3 => (
            r_max * 2.0 * p_max * PI * 2.0 * PI,
            Box::new(|rng: &mut ChaCha8Rng| {
                let w = ReducedPoint::planar(rng.random_range(0.0..r_max), rng.random_range(-p_max..p_max));
                let (u, sin_a) = angles_to_direction(3, rng.random_range(0.0..PI), rng.random_range(0.0..2.0 * PI));
                let z = embed(group, &w, &u);
                let jac = (w.r * w.r + w.p * w.p) * sin_a;
                weight(model, &z, e1, e2, jac / orbit_volume(group, &z))
            }),
        ),
        GroupKind::So2Axial => (
            r_max * 2.0 * p_max * 2.0 * PI * 4.0 * v_max * v_max,
            Box::new(|rng: &mut ChaCha8Rng| {
                let w = ReducedPoint {
                    r: rng.random_range(0.0..r_max),
                    p: rng.random_range(-p_max..p_max),
                    vertical: Some((rng.random_range(-v_max..v_max), rng.random_range(-v_max..v_max))),
                };
                let (u, _) = angles_to_direction(2, rng.random_range(0.0..2.0 * PI), 0.0);
                let z = embed(group, &w, &u);
                let jac = (w.r * w.r + w.p * w.p).sqrt();
                weight(model, &z, e1, e2, jac / orbit_volume(group, &z))
            }),
        ),
        GroupKind::Cyclic(_) => (
            (2.0 * r_max).powi(2) * (2.0 * p_max).powi(2),
            Box::new(|rng: &mut ChaCha8Rng| {
                let z = PhasePoint::new(
                    vec![rng.random_range(-r_max..r_max), rng.random_range(-r_max..r_max)],
                    vec![rng.random_range(-p_max..p_max), rng.random_range(-p_max..p_max)],
                );
                weight(model, &z, e1, e2, 1.0 / orbit_volume(group, &z))
            }),
        ),
    };

    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let w = draw(&mut rng);
        sum += w;
        sum_sq += w * w;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(ReducedVolumeResult {
        value: box_volume * mean,
        method: VolumeMethod::Omega0MonteCarlo,
        error: box_volume * (var / n).sqrt(),
    })
}

fn weight(model: &HamiltonianModel, z: &PhasePoint, e1: f64, e2: f64, w: f64) -> f64 {
    let e = model.energy(z);
    if e >= e1 && e <= e2 {
        w
    } else {
        0.0
    }
}

/// ∫_{Ω_red} f(H̃) dσ_red for `f` supported in [lo, hi].
pub fn reduced_phase_integral<F: Fn(f64) -> f64>(
    group: &GroupModel,
    model: &HamiltonianModel,
    f: F,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    check_model(group, model)?;
    let pot = model.potential;
    let tol = QuadTolerance {
        abs: 1e-11,
        rel: 1e-10,
        max_intervals: 4000,
    };
    match group.kind() {
        GroupKind::So2Planar | GroupKind::So3 => {
            let mut total = 0.0;
            for c in components(model, hi)? {
                let outer = integrate(
                    |r| {
                        let v = pot.value(r);
                        let p_hi = (hi - v).max(0.0).sqrt();
                        if p_hi == 0.0 {
                            return 0.0;
                        }
                        let inner = integrate(|p| f(p * p + v), 0.0, p_hi, tol).map(|q| q.value).unwrap_or(f64::NAN);
                        2.0 * inner
                    },
                    c.inner,
                    c.outer,
                    tol,
                )?;
                total += outer.value;
            }
            Ok(total)
        }
        _ => {
            // coarea in the energy variable
            let res = integrate(
                |e| {
                    let fe = f(e);
                    if fe == 0.0 {
                        0.0
                    } else {
                        fe * liouville_total(group, model, e).unwrap_or(f64::NAN)
                    }
                },
                lo,
                hi,
                tol,
            )?;
            Ok(res.value)
        }
    }
}

/// dVol_red(H̃ ≤ E)/dE in closed form per group, as an integral over the
/// allowed radii.
fn liouville_total(group: &GroupModel, model: &HamiltonianModel, e: f64) -> Result<f64> {
    let pot = model.potential;
    let mut total = 0.0;
    for c in components(model, e)? {
        total += match group.kind() {
            GroupKind::So2Planar | GroupKind::So3 => {
                integrate_endpoint_regular(|r| 1.0 / (e - pot.value(r)).max(0.0).sqrt(), c.inner, c.outer, chart_tol())?.value
            }
            GroupKind::So2Axial => {
                integrate_endpoint_regular(|r| 2.0 * PI * (e - pot.value(r)).max(0.0).sqrt(), c.inner, c.outer, chart_tol())?.value
            }
            GroupKind::Cyclic(order) => PI * PI * (c.outer.powi(2) - c.inner.powi(2)) / order as f64,
        };
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LiouvilleMethod {
    /// Central difference of the reduced volume in E.
    VolumeDerivative,
    /// Surface quadrature over Σ_E ∩ Ω₀ in the ambient space.
    Omega0Surface,
}

/// Observable on the reduced chart, u(r, p).
pub type ChartObservable<'a> = &'a dyn Fn(f64, f64) -> f64;

/// ∫_{Σ̃_E} u dL_{H̃,E}, with u ≡ 1 when `u` is `None`.
pub fn liouville_mass(
    group: &GroupModel,
    model: &HamiltonianModel,
    e: f64,
    u: Option<ChartObservable<'_>>,
    method: LiouvilleMethod,
) -> Result<f64> {
    check_model(group, model)?;
    let delta = 1e-3 * e.abs().max(1.0);
    model.check_window(e - delta, e + delta)?;
    match method {
        LiouvilleMethod::VolumeDerivative => match u {
            None => {
                let (hi, _) = volume_below(group, model, e + delta)?;
                let (lo, _) = volume_below(group, model, e - delta)?;
                Ok((hi - lo) / (2.0 * delta))
            }
            Some(u) => {
                chart_only(group)?;
                let hi = observable_volume_below(model, e + delta, u)?;
                let lo = observable_volume_below(model, e - delta, u)?;
                Ok((hi - lo) / (2.0 * delta))
            }
        },
        LiouvilleMethod::Omega0Surface => {
            chart_only(group)?;
            surface_liouville(group, model, e, u)
        }
    }
}

fn chart_only(group: &GroupModel) -> Result<()> {
    match group.kind() {
        GroupKind::So2Planar | GroupKind::So3 => Ok(()),
        other => Err(Error::Unsupported(format!("observable Liouville integrals for {other}"))),
    }
}

fn observable_volume_below(model: &HamiltonianModel, e: f64, u: ChartObservable<'_>) -> Result<f64> {
    let pot = model.potential;
    let tol = QuadTolerance {
        abs: 1e-13,
        rel: 1e-12,
        max_intervals: 4000,
    };
    let mut total = 0.0;
    for c in components(model, e)? {
        let res = integrate_endpoint_regular(
            |r| {
                let p_hi = (e - pot.value(r)).max(0.0).sqrt();
                if p_hi == 0.0 {
                    return 0.0;
                }
                integrate(|p| u(r, p), -p_hi, p_hi, tol).map(|q| q.value).unwrap_or(f64::NAN)
            },
            c.inner,
            c.outer,
            tol,
        )?;
        total += res.value;
    }
    Ok(total)
}

/// Ambient-space evaluation of ∫_{Σ_E∩Ω₀} u dΣ / (Vol(G(z)) ‖Π_{T_zΩ₀}∇H(z)‖).
fn surface_liouville(group: &GroupModel, model: &HamiltonianModel, e: f64, u: Option<ChartObservable<'_>>) -> Result<f64> {
    let pot = model.potential;
    let dim = group.config_dim();
    let n_theta = 512;
    let eps = 1e-5;
    let mut total = 0.0;
    for c in components(model, e)? {
        // closed curve (s(θ), p(θ)) on the reduced level set; for orbits through
        // the origin the curve covers the quotient twice.
        let (centre, half, cover) = if c.crosses_origin {
            (0.0, c.outer, 0.5)
        } else {
            (0.5 * (c.inner + c.outer), 0.5 * (c.outer - c.inner), 1.0)
        };
        let curve = |theta: f64| {
            let s = centre + half * theta.sin();
            let p = theta.cos().signum() * (e - pot.value(s)).max(0.0).sqrt();
            (s, p)
        };
        let per_theta = |theta: f64| -> f64 {
            let (s, p) = curve(theta);
            let (s_plus, p_plus) = curve(theta + eps);
            let (s_minus, p_minus) = curve(theta - eps);
            let ds = (s_plus - s_minus) / (2.0 * eps);
            let dp = (p_plus - p_minus) / (2.0 * eps);
            let obs = u.map_or(1.0, |u| if s >= 0.0 { u(s, p) } else { u(-s, -p) });
            let integrand = |a: f64, b: f64| -> f64 {
                let (dir, _) = angles_to_direction(dim, a, b);
                let (da, db) = direction_tangents(dim, a, b);
                let z = embed(group, &ReducedPoint::planar(s, p), &dir);
                let lift = |v: &[f64], cs: f64, cp: f64| -> DVector<f64> {
                    DVector::from_iterator(2 * dim, v.iter().map(|c| cs * c).chain(v.iter().map(|c| cp * c)))
                };
                let mut surface = vec![lift(&dir, ds, dp)];
                let mut tangent = vec![lift(&dir, 1.0, 0.0), lift(&dir, 0.0, 1.0)];
                for t in [Some(&da), db.as_ref()].into_iter().flatten() {
                    surface.push(lift(t, s, p));
                    tangent.push(lift(t, s, p));
                }
                let area = gram_det(&surface).sqrt();
                let mut grad = model.gradient(&z.x);
                grad.extend(z.xi.iter().map(|v| 2.0 * v));
                let grad = DVector::from_vec(grad);
                let proj = project_onto(&tangent, &grad);
                area / (orbit_volume(group, &z) * proj.norm())
            };
            let angular = match dim {
                2 => {
                    let m = 8;
                    (0..m).map(|k| integrand(2.0 * PI * k as f64 / m as f64, 0.0)).sum::<f64>() * 2.0 * PI / m as f64
                }
                _ => {
                    let m = 8;
                    (0..m)
                        .map(|k| {
                            let b = 2.0 * PI * k as f64 / m as f64;
                            integrate(|a| integrand(a, b), 0.0, PI, QuadTolerance::absolute(1e-12))
                                .map(|q| q.value)
                                .unwrap_or(f64::NAN)
                        })
                        .sum::<f64>()
                        * 2.0
                        * PI
                        / m as f64
                }
            };
            obs * angular
        };
        // periodic trapezoid, offset to avoid the turning points θ = ±π/2
        let sum: f64 = (0..n_theta)
            .map(|k| per_theta(2.0 * PI * (k as f64 + 0.5) / n_theta as f64))
            .sum();
        total += cover * sum * 2.0 * PI / n_theta as f64;
    }
    if !total.is_finite() {
        return Err(Error::Quadrature {
            achieved: f64::NAN,
            requested: 1e-12,
        });
    }
    Ok(total)
}

fn direction_tangents(dim: usize, a: f64, b: f64) -> (Vec<f64>, Option<Vec<f64>>) {
    match dim {
        2 => (vec![-a.sin(), a.cos()], None),
        _ => (
            vec![a.cos() * b.cos(), a.cos() * b.sin(), -a.sin()],
            Some(vec![-a.sin() * b.sin(), a.sin() * b.cos(), 0.0]),
        ),
    }
}

fn gram(vectors: &[DVector<f64>]) -> DMatrix<f64> {
    let n = vectors.len();
    DMatrix::from_fn(n, n, |i, j| vectors[i].dot(&vectors[j]))
}

fn gram_det(vectors: &[DVector<f64>]) -> f64 {
    gram(vectors).determinant().max(0.0)
}

fn project_onto(basis: &[DVector<f64>], v: &DVector<f64>) -> DVector<f64> {
    let g = gram(basis);
    let rhs = DVector::from_iterator(basis.len(), basis.iter().map(|b| b.dot(v)));
    let coeffs = g.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(basis.len()));
    basis.iter().zip(coeffs.iter()).fold(DVector::zeros(v.len()), |acc, (b, c)| acc + b * *c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::Potential;

    fn pt(x: &[f64], xi: &[f64]) -> PhasePoint {
        PhasePoint::new(x.to_vec(), xi.to_vec())
    }

    fn planar() -> GroupModel {
        GroupModel::new(GroupKind::So2Planar)
    }

    #[test]
    fn momentum_map_examples() {
        let f = momentum_map(&planar(), &pt(&[1.0, 0.0], &[0.0, 1.0]));
        assert!((f[0] - 1.0 / SQRT_2).abs() < 1e-15);
        assert!(momentum_map(&planar(), &PhasePoint::zeros(2))[0] == 0.0);
        let so3 = GroupModel::new(GroupKind::So3);
        let f = momentum_map(&so3, &pt(&[1.0, 2.0, -1.0], &[2.0, 4.0, -2.0]));
        assert!(f.iter().all(|v| v.abs() < 1e-15));
        let z = pt(&[1.0, 2.0, 0.5], &[-0.3, 0.7, 1.1]);
        let f = momentum_map(&so3, &z);
        let cross = [
            z.x[1] * z.xi[2] - z.x[2] * z.xi[1],
            z.x[2] * z.xi[0] - z.x[0] * z.xi[2],
            z.x[0] * z.xi[1] - z.x[1] * z.xi[0],
        ];
        for i in 0..3 {
            assert!((f[i] - cross[i] / SQRT_2).abs() < 1e-14);
        }
    }

    #[test]
    fn residual_examples() {
        let z = pt(&[1.0, 0.0], &[0.0, 1.0]);
        assert!((omega0_residual(&planar(), &z) - 1.0 / SQRT_2).abs() < 1e-15);
        let lam = 3.0;
        let r = omega0_residual(&planar(), &z.scaled(lam));
        assert!((r - lam * lam / SQRT_2).abs() < 1e-14);
        assert!(omega0_residual(&planar(), &pt(&[1.0, 2.0], &[3.0, 6.0])) < 1e-14);
    }

    #[test]
    fn chart_examples() {
        let w = to_reduced_chart(&planar(), &pt(&[2.0, 0.0], &[3.0, 0.0]), OMEGA0_TOL).unwrap();
        assert_eq!((w.r, w.p), (2.0, 3.0));
        let w = to_reduced_chart(&planar(), &pt(&[0.0, 2.0], &[0.0, -3.0]), OMEGA0_TOL).unwrap();
        assert_eq!((w.r, w.p), (2.0, -3.0));
        assert!(matches!(
            to_reduced_chart(&planar(), &pt(&[1.0, 0.0], &[0.0, 1.0]), OMEGA0_TOL),
            Err(Error::Tolerance { .. })
        ));
        let axial = GroupModel::new(GroupKind::So2Axial);
        assert!(matches!(
            to_reduced_chart(&axial, &pt(&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]), OMEGA0_TOL),
            Err(Error::Stratum(_))
        ));
        let w = to_reduced_chart(&axial, &pt(&[0.0, 2.0, 1.0], &[0.0, 1.0, 0.5]), OMEGA0_TOL).unwrap();
        assert_eq!((w.r, w.p, w.vertical), (2.0, 1.0, Some((1.0, 0.5))));
    }

    #[test]
    fn orbit_volumes() {
        let z = pt(&[3.0, 0.0], &[4.0, 0.0]);
        assert!((orbit_volume(&planar(), &z) - 10.0 * PI).abs() < 1e-12);
        let so3 = GroupModel::new(GroupKind::So3);
        let z = pt(&[0.0, 3.0, 0.0], &[0.0, 4.0, 0.0]);
        assert!((orbit_volume(&so3, &z) - 100.0 * PI).abs() < 1e-11);
    }

    #[test]
    fn dimension_count() {
        let z = pt(&[1.0, 2.0], &[0.5, 1.0]);
        assert_eq!(momentum_jacobian_rank(&planar(), &z), orbit_dimension_k0(&planar()));
        let so3 = GroupModel::new(GroupKind::So3);
        let z = pt(&[1.0, 2.0, -0.3], &[0.5, 1.0, -0.15]);
        assert_eq!(momentum_jacobian_rank(&so3, &z), 2);
        assert_eq!(orbit_dimension_k0(&GroupModel::new(GroupKind::Cyclic(4))), 0);
    }

    #[test]
    fn harmonic_volume_is_half_annulus() {
        let model = HamiltonianModel::spherical(2, Potential::harmonic());
        let v = reduced_volume(&planar(), &model, 1.0, 2.0).unwrap();
        assert!((v.value - PI / 2.0).abs() < 1e-10, "{}", v.value);
        assert_eq!(reduced_volume(&planar(), &model, 1.5, 1.5).unwrap().value, 0.0);
    }

    #[test]
    fn cyclic_volume_harmonic() {
        let g = GroupModel::new(GroupKind::Cyclic(3));
        let model = HamiltonianModel::spherical(2, Potential::harmonic());
        let v = reduced_volume(&g, &model, 1.0, 2.0).unwrap();
        // ball volumes in ℝ⁴: π²E²/2
        assert!((v.value - PI * PI * 1.5 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn cylinder_volume_closed_form() {
        let g = GroupModel::new(GroupKind::So2Axial);
        let model = HamiltonianModel::cylindrical(Potential::harmonic());
        let v = reduced_volume(&g, &model, 1.0, 2.0).unwrap();
        // (4π/3)∫(E−r²)^{3/2} dr over r>0 = (4π/3)(3π/16)E²
        let exact = PI * PI / 4.0 * (4.0 - 1.0);
        assert!((v.value - exact).abs() < 1e-9);
    }

    #[test]
    fn liouville_harmonic_both_methods() {
        let model = HamiltonianModel::spherical(2, Potential::harmonic());
        for e in [0.7, 1.3, 2.0] {
            let a = liouville_mass(&planar(), &model, e, None, LiouvilleMethod::VolumeDerivative).unwrap();
            let b = liouville_mass(&planar(), &model, e, None, LiouvilleMethod::Omega0Surface).unwrap();
            assert!((a - PI / 2.0).abs() < 1e-6, "{a}");
            assert!((b - PI / 2.0).abs() < 1e-6, "{b}");
        }
        let zero = |_: f64, _: f64| 0.0;
        let z = liouville_mass(&planar(), &model, 1.0, Some(&zero), LiouvilleMethod::VolumeDerivative).unwrap();
        assert_eq!(z, 0.0);
    }

    #[test]
    fn liouville_so3_surface_matches_derivative() {
        let g = GroupModel::new(GroupKind::So3);
        let model = HamiltonianModel::spherical(3, Potential::anharmonic(1.0));
        let a = liouville_mass(&g, &model, 1.5, None, LiouvilleMethod::VolumeDerivative).unwrap();
        let b = liouville_mass(&g, &model, 1.5, None, LiouvilleMethod::Omega0Surface).unwrap();
        assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
    }

    #[test]
    fn phase_integral_of_indicator_like_function() {
        let model = HamiltonianModel::spherical(2, Potential::harmonic());
        let v = reduced_phase_integral(&planar(), &model, |e| e, 0.0, 2.0).unwrap();
        // ∫_0^2 E · (π/2) dE = π
        assert!((v - PI).abs() < 1e-8, "{v}");
        let cyc = GroupModel::new(GroupKind::Cyclic(2));
        let v = reduced_phase_integral(&cyc, &model, |e| if e < 2.0 { 1.0 } else { 0.0 }, 0.0, 2.0).unwrap();
        assert!((v - PI * PI * 4.0 / 4.0).abs() < 1e-6, "{v}");
    }
}
