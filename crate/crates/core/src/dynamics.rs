//! Full and reduced Hamiltonian flows, reduced periodic orbits, monodromy
//! and the period set.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupModel;
use crate::hamiltonian::{AllowedInterval, HamiltonianModel, Potential};
use crate::numerics::quad::{integrate, QuadTolerance};
use crate::phase::{dot, PhasePoint};
use crate::reduction::{momentum_map, ReducedPoint};

// Omelyan–Mryglod–Folk position-extended Forest–Ruth-like coefficients.
const PEFRL_XI: f64 = 0.178_617_895_844_809_1;
const PEFRL_LAMBDA: f64 = -0.212_341_831_062_605_4;
const PEFRL_CHI: f64 = -0.066_264_582_669_818_5;
const DRIFTS: [f64; 5] = [
    PEFRL_XI,
    PEFRL_CHI,
    1.0 - 2.0 * (PEFRL_CHI + PEFRL_XI),
    PEFRL_CHI,
    PEFRL_XI,
];
const KICKS: [f64; 4] = [
    0.5 * (1.0 - 2.0 * PEFRL_LAMBDA),
    PEFRL_LAMBDA,
    PEFRL_LAMBDA,
    0.5 * (1.0 - 2.0 * PEFRL_LAMBDA),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Bound on |H(z_t) − H(z₀)| at every step.
    pub tol: f64,
    pub max_steps: usize,
    /// Number of output intervals; the trajectory has `samples + 1` points.
    pub samples: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_steps: 1 << 24,
            samples: 64,
        }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub steps: usize,
    pub dt: f64,
    pub max_energy_drift: f64,
    /// Largest change of the momentum map; zero when no group was given.
    pub max_momentum_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// ∫₀^t ξ·ẋ dt at each sample.
    pub action: Vec<f64>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectories hold at least the initial point")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedTrajectory {
    pub times: Vec<f64>,
    /// Chart points with r ≥ 0.
    pub points: Vec<ReducedPoint>,
    /// Approximate times at which the orbit passed through r = 0 and was
    /// continued by (r, p) → (−r, −p).
    pub crossings: Vec<f64>,
    pub stats: IntegratorStats,
}

/// One PEFRL step for H = |ξ|² + V(x). `force` writes ∇V. Returns ξ·Δx.
fn pefrl_step<F: FnMut(&[f64], &mut [f64])>(x: &mut [f64], xi: &mut [f64], dt: f64, force: &mut F, buf: &mut [f64]) -> f64 {
    let mut action = 0.0;
    for stage in 0..5 {
        let c = DRIFTS[stage] * dt;
        let xi_sq = dot(xi, xi);
        for (xk, pk) in x.iter_mut().zip(xi.iter()) {
            *xk += 2.0 * c * pk;
        }
        action += 2.0 * xi_sq * c;
        if stage < 4 {
            force(x, buf);
            let d = KICKS[stage] * dt;
            for (pk, gk) in xi.iter_mut().zip(buf.iter()) {
                *pk -= d * gk;
            }
        }
    }
    action
}

struct RawRun {
    times: Vec<f64>,
    xs: Vec<Vec<f64>>,
    xis: Vec<Vec<f64>>,
    action: Vec<f64>,
    stats: IntegratorStats,
    crossings: Vec<f64>,
}

/// Integrates with step doubling until the energy drift is below `opts.tol`.
fn run_adaptive<F, E, M>(
    x0: &[f64],
    xi0: &[f64],
    t_end: f64,
    opts: &FlowOptions,
    force: F,
    energy: E,
    momentum: M,
) -> Result<RawRun>
where
    F: Fn(&[f64], &mut [f64]),
    E: Fn(&[f64], &[f64]) -> f64,
    M: Fn(&[f64], &[f64]) -> Vec<f64>,
{
    let samples = opts.samples.max(1);
    if t_end == 0.0 {
        return Ok(RawRun {
            times: vec![0.0],
            xs: vec![x0.to_vec()],
            xis: vec![xi0.to_vec()],
            action: vec![0.0],
            stats: IntegratorStats {
                steps: 0,
                dt: 0.0,
                max_energy_drift: 0.0,
                max_momentum_drift: 0.0,
            },
            crossings: Vec::new(),
        });
    }
    let h0 = energy(x0, xi0);
    let f0 = momentum(x0, xi0);
    let mut per_sample = ((t_end.abs() * 64.0 / samples as f64).ceil() as usize).max(1);
    let mut last_drift = f64::INFINITY;
    loop {
        let steps = per_sample * samples;
        if steps > opts.max_steps {
            return Err(Error::StepSize {
                tol: opts.tol,
                max_steps: opts.max_steps,
                drift: last_drift,
            });
        }
        let dt = t_end / steps as f64;
        let (mut x, mut xi) = (x0.to_vec(), xi0.to_vec());
        let mut buf = vec![0.0; x.len()];
        let mut run = RawRun {
            times: vec![0.0],
            xs: vec![x.clone()],
            xis: vec![xi.clone()],
            action: vec![0.0],
            stats: IntegratorStats {
                steps,
                dt,
                max_energy_drift: 0.0,
                max_momentum_drift: 0.0,
            },
            crossings: Vec::new(),
        };
        let mut force_mut = |a: &[f64], b: &mut [f64]| force(a, b);
        let mut action = 0.0;
        let mut failed = false;
        for step in 1..=steps {
            let before = x[0];
            action += pefrl_step(&mut x, &mut xi, dt, &mut force_mut, &mut buf);
            if x.len() == 1 && (before < 0.0) != (x[0] < 0.0) {
                let frac = before / (before - x[0]);
                run.crossings.push((step as f64 - 1.0 + frac) * dt);
            }
            let drift = (energy(&x, &xi) - h0).abs();
            run.stats.max_energy_drift = run.stats.max_energy_drift.max(drift);
            if drift > opts.tol || !drift.is_finite() {
                failed = true;
                last_drift = drift;
                break;
            }
            if step % per_sample == 0 {
                let f = momentum(&x, &xi);
                let md = f.iter().zip(&f0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                run.stats.max_momentum_drift = run.stats.max_momentum_drift.max(md);
                run.times.push(step as f64 * dt);
                run.xs.push(x.clone());
                run.xis.push(xi.clone());
                run.action.push(action);
            }
        }
        if !failed {
            return Ok(run);
        }
        per_sample *= 2;
    }
}

/// Flow of H = |ξ|² + V on ℝ^{2d}, tracking the momentum map of `group`
/// when given.
pub fn integrate_full(
    model: &HamiltonianModel,
    group: Option<&GroupModel>,
    z0: &PhasePoint,
    t_end: f64,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if z0.dim() != model.dim {
        return Err(Error::InvalidArgument("initial point has the wrong dimension".into()));
    }
    let run = run_adaptive(
        &z0.x,
        &z0.xi,
        t_end,
        opts,
        |x, out| model.gradient_into(x, out),
        |x, xi| dot(xi, xi) + model.potential_at(x),
        |x, xi| match group {
            Some(g) => momentum_map(g, &PhasePoint::new(x.to_vec(), xi.to_vec())),
            None => Vec::new(),
        },
    )?;
    Ok(Trajectory {
        times: run.times,
        points: run.xs.into_iter().zip(run.xis).map(|(x, xi)| PhasePoint::new(x, xi)).collect(),
        action: run.action,
        stats: run.stats,
    })
}

/// Flow of H̃ = p² + V₀(r) on the reduced chart, continued through r = 0 by
/// the identification (r, p) ~ (−r, −p).
pub fn integrate_reduced(potential: &Potential, start: ReducedPoint, t_end: f64, opts: &FlowOptions) -> Result<ReducedTrajectory> {
    if start.r < 0.0 {
        return Err(Error::InvalidArgument("reduced trajectories start at r ≥ 0".into()));
    }
    let run = run_adaptive(
        &[start.r],
        &[start.p],
        t_end,
        opts,
        |s, out| out[0] = potential.derivative(s[0]),
        |s, p| p[0] * p[0] + potential.value(s[0]),
        |_, _| Vec::new(),
    )?;
    let points = run
        .xs
        .iter()
        .zip(&run.xis)
        .map(|(s, p)| to_chart(s[0], p[0]))
        .collect();
    Ok(ReducedTrajectory {
        times: run.times,
        points,
        crossings: run.crossings,
        stats: run.stats,
    })
}

fn to_chart(s: f64, p: f64) -> ReducedPoint {
    if s < 0.0 {
        ReducedPoint::planar(-s, -p)
    } else {
        ReducedPoint::planar(s, p)
    }
}

/// Primitive reduced periodic orbit on one component of {V₀ < E}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveOrbit {
    pub energy: f64,
    pub component: AllowedInterval,
    pub period: f64,
    /// ∮ p dr = ∫₀^T ξ·ẋ dt.
    pub action: f64,
}

fn quad_tol() -> QuadTolerance {
    QuadTolerance {
        abs: 1e-14,
        rel: 1e-13,
        max_intervals: 4000,
    }
}

/// Period and action on one component, via s = c + w sin φ. With
/// U(q) = α + βq + γq² the radicand factors exactly:
/// through the origin, E − V₀(s) = b² cos²φ (β + γ(b² + s²));
/// otherwise, E − V₀(s) = γ w² cos²φ (b + s)(s + a).
/// The cos φ factors cancel the Jacobian, leaving smooth integrands.
fn component_period_action(pot: &Potential, c: &AllowedInterval) -> Result<(f64, f64)> {
    let (_, beta, gamma) = pot.q_coefficients();
    let (a, b) = (c.inner, c.outer);
    let (centre, half, cover) = if c.crosses_origin {
        (0.0, b, 0.5)
    } else {
        (0.5 * (a + b), 0.5 * (b - a), 1.0)
    };
    // E − V₀(s) = half² cos²φ · g(s)
    let g = |s: f64| {
        if c.crosses_origin {
            beta + gamma * (b * b + s * s)
        } else {
            gamma * (b + s) * (s + a)
        }
    };
    let period = integrate(
        |phi| 1.0 / g(centre + half * phi.sin()).sqrt(),
        -0.5 * PI,
        0.5 * PI,
        quad_tol(),
    )?;
    let action = integrate(
        |phi| 2.0 * (half * phi.cos()).powi(2) * g(centre + half * phi.sin()).sqrt(),
        -0.5 * PI,
        0.5 * PI,
        quad_tol(),
    )?;
    Ok((cover * period.value, cover * action.value))
}

/// All primitive reduced orbits at energy E, one per allowed component.
pub fn reduced_orbits(model: &HamiltonianModel, e: f64) -> Result<Vec<PrimitiveOrbit>> {
    let delta = 1e-9 * e.abs().max(1.0);
    model.check_window(e - delta, e + delta)?;
    model
        .potential
        .allowed_intervals(e)?
        .into_iter()
        .map(|c| {
            let (period, action) = component_period_action(&model.potential, &c)?;
            Ok(PrimitiveOrbit {
                energy: e,
                component: c,
                period,
                action,
            })
        })
        .collect()
}

/// (T(E), S(E)) of the unique reduced orbit at energy E.
pub fn period_action(model: &HamiltonianModel, e: f64) -> Result<(f64, f64)> {
    let orbits = reduced_orbits(model, e)?;
    match orbits.as_slice() {
        [o] => Ok((o.period, o.action)),
        _ => Err(Error::InvalidArgument(format!(
            "{} reduced orbits coexist at E = {e}; use reduced_orbits",
            orbits.len()
        ))),
    }
}

/// T′(E) by central differences.
pub fn period_derivative(model: &HamiltonianModel, e: f64) -> Result<f64> {
    let delta = 1e-4 * e.abs().max(1.0);
    let (t_hi, _) = period_action(model, e + delta)?;
    let (t_lo, _) = period_action(model, e - delta)?;
    Ok((t_hi - t_lo) / (2.0 * delta))
}

/// Reduced monodromy F̃(T) of a primitive orbit, from the variational
/// equations along one period started at the outer turning point.
pub fn reduced_monodromy(potential: &Potential, orbit: &PrimitiveOrbit) -> Result<Matrix2<f64>> {
    let s0 = orbit.component.outer;
    let period = orbit.period;
    let mut steps = 4096usize;
    let mut last_err = f64::INFINITY;
    while steps <= 1 << 22 {
        let dt = period / steps as f64;
        let (mut s, mut p) = (s0, 0.0);
        // columns of the tangent map
        let mut m = Matrix2::identity();
        for _ in 0..steps {
            for stage in 0..5 {
                let c = DRIFTS[stage] * dt;
                s += 2.0 * c * p;
                for col in 0..2 {
                    m[(0, col)] += 2.0 * c * m[(1, col)];
                }
                if stage < 4 {
                    let d = KICKS[stage] * dt;
                    p -= d * potential.derivative(s);
                    let curv = potential.second_derivative(s);
                    for col in 0..2 {
                        m[(1, col)] -= d * curv * m[(0, col)];
                    }
                }
            }
        }
        let (end_s, end_p, jac) = if orbit.component.crosses_origin {
            (-s, -p, -m)
        } else {
            (s, p, m)
        };
        let err = ((end_s - s0).powi(2) + end_p.powi(2)).sqrt();
        if err < 1e-10 * s0.max(1.0) {
            return Ok(jac);
        }
        last_err = err;
        steps *= 2;
    }
    Err(Error::StepSize {
        tol: 1e-10,
        max_steps: 1 << 22,
        drift: last_err,
    })
}

/// Full orbit record: period, action, monodromy and nondegeneracy data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitData {
    pub energy: f64,
    pub period: f64,
    pub action: f64,
    pub monodromy: [[f64; 2]; 2],
    pub nondegenerate: bool,
    pub period_derivative: f64,
    pub crosses_origin: bool,
}

impl OrbitData {
    pub fn monodromy_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(
            self.monodromy[0][0],
            self.monodromy[0][1],
            self.monodromy[1][0],
            self.monodromy[1][1],
        )
    }

    pub fn trace(&self) -> f64 {
        self.monodromy_matrix().trace()
    }
}

/// Orbit data for the unique reduced orbit at E.
pub fn orbit_data(model: &HamiltonianModel, e: f64) -> Result<OrbitData> {
    let orbits = reduced_orbits(model, e)?;
    let [orbit] = orbits.as_slice() else {
        return Err(Error::InvalidArgument(format!("{} reduced orbits coexist at E = {e}", orbits.len())));
    };
    let m = reduced_monodromy(&model.potential, orbit)?;
    let period_derivative = period_derivative(model, e)?;
    let mut data = OrbitData {
        energy: e,
        period: orbit.period,
        action: orbit.action,
        monodromy: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
        nondegenerate: false,
        period_derivative,
        crosses_origin: orbit.component.crosses_origin,
    };
    data.nondegenerate = is_nondegenerate(&data, orbit.period).nondegenerate;
    Ok(data)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nondegeneracy {
    /// dim ker (F̃(t₀) − Id)² ≤ 2; automatic on a two-dimensional reduced space.
    pub nondegenerate: bool,
    pub kernel_dim: usize,
    pub period_derivative: f64,
    pub period_derivative_nonzero: bool,
}

/// Threshold below which T′(E) is reported as zero.
pub const PERIOD_DERIVATIVE_ZERO: f64 = 1e-6;

pub fn is_nondegenerate(orbit: &OrbitData, t0: f64) -> Nondegeneracy {
    let k = (t0 / orbit.period).round().max(1.0) as u32;
    let m = orbit.monodromy_matrix().pow(k);
    let a = (m - Matrix2::identity()).pow(2);
    let scale = m.norm().max(1.0);
    let rank = a.singular_values().iter().filter(|&&s| s > 1e-7 * scale).count();
    let kernel_dim = 2 - rank;
    Nondegeneracy {
        nondegenerate: kernel_dim <= 2,
        kernel_dim,
        period_derivative: orbit.period_derivative,
        period_derivative_nonzero: orbit.period_derivative.abs() > PERIOD_DERIVATIVE_ZERO,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodEntry {
    pub t0: f64,
    pub repetition: i64,
    /// Index into [`reduced_orbits`] at the same energy.
    pub orbit: usize,
    /// S(t₀) = k · S(T).
    pub action: f64,
}

/// {k·T : k ∈ ℤ∖{0}, |k·T| ≤ T_max} over every primitive orbit at E, sorted.
pub fn reduced_period_set(model: &HamiltonianModel, e: f64, t_max: f64) -> Result<Vec<PeriodEntry>> {
    let orbits = reduced_orbits(model, e)?;
    let mut out = Vec::new();
    for (idx, o) in orbits.iter().enumerate() {
        let kmax = (t_max / o.period + 1e-12).floor() as i64;
        for k in (-kmax..=kmax).filter(|&k| k != 0) {
            out.push(PeriodEntry {
                t0: k as f64 * o.period,
                repetition: k,
                orbit: idx,
                action: k as f64 * o.action,
            });
        }
    }
    out.sort_by(|a, b| a.t0.total_cmp(&b.t0));
    Ok(out)
}

/// Orbit records over an energy grid, evaluated in parallel, in input order.
pub fn orbit_catalog(model: &HamiltonianModel, energies: &[f64]) -> Vec<Result<OrbitData>> {
    energies.par_iter().map(|&e| orbit_data(model, e)).collect()
}

/// Action ∫₀^T ξ·ẋ dt along a full-space trajectory started on Ω₀ at the
/// outer turning point of the reduced orbit, in direction `u`.
pub fn trajectory_action(model: &HamiltonianModel, orbit: &PrimitiveOrbit, u: &[f64], tol: f64) -> Result<f64> {
    let z0 = PhasePoint::new(u.iter().map(|c| c * orbit.component.outer).collect(), vec![0.0; u.len()]);
    let traj = integrate_full(
        model,
        None,
        &z0,
        orbit.period,
        &FlowOptions {
            tol,
            samples: 1,
            ..FlowOptions::default()
        },
    )?;
    Ok(*traj.action.last().expect("non-empty trajectory"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowInvariants {
    pub trajectories: usize,
    pub tol: f64,
    pub max_energy_drift: f64,
    pub max_momentum_drift: f64,
    /// max |π(Φ_t z) − Φ̃_t(π z)| in the chart; `None` for finite groups.
    pub max_projection_error: Option<f64>,
}

/// Samples `count` starting points on Ω₀ with energies in `energies` and
/// follows each for time `t_end`.
pub fn flow_invariants(
    group: &GroupModel,
    potential: Potential,
    energies: (f64, f64),
    count: usize,
    t_end: f64,
    tol: f64,
    seed: u64,
) -> Result<FlowInvariants> {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let kind = group.kind();
    let model = HamiltonianModel::for_group(kind, potential);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<(PhasePoint, Option<ReducedPoint>)> = (0..count)
        .map(|_| -> Result<_> {
            let e = rng.random_range(energies.0..=energies.1);
            let outer = potential
                .allowed_intervals(e)?
                .last()
                .map(|c| c.outer)
                .ok_or(Error::NoTurningPoint {
                    energy: e,
                    reason: "energy below the potential".into(),
                })?;
            let d = model.dim;
            if let crate::groups::GroupKind::Cyclic(_) = kind {
                // Ω₀ is the whole phase space: any point with H = E
                let dir: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = dot(&dir, &dir).sqrt();
                let r = rng.random_range(0.05..0.95) * outer;
                let x: Vec<f64> = dir.iter().map(|c| r * c / n).collect();
                let speed = (e - model.potential_at(&x)).max(0.0).sqrt();
                let mut xi: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                let m = dot(&xi, &xi).sqrt();
                xi.iter_mut().for_each(|c| *c *= speed / m);
                return Ok((PhasePoint::new(x, xi), None));
            }
            let plane = if kind == crate::groups::GroupKind::So2Axial { 2 } else { d };
            let dir: Vec<f64> = (0..plane).map(|_| rng.random_range(-1.0..1.0)).collect();
            let n = dot(&dir, &dir).sqrt();
            let u: Vec<f64> = dir.iter().map(|c| c / n).collect();
            let r = rng.random_range(0.05..0.95) * outer;
            let mut avail = e - potential.value(r);
            let vertical = if kind == crate::groups::GroupKind::So2Axial {
                let share = rng.random_range(0.0..0.5) * avail;
                avail -= share;
                let angle: f64 = rng.random_range(0.0..2.0 * PI);
                Some((share.sqrt() * angle.cos(), share.sqrt() * angle.sin()))
            } else {
                None
            };
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let w = ReducedPoint {
                r,
                p: sign * avail.max(0.0).sqrt(),
                vertical,
            };
            Ok((crate::reduction::embed(group, &w, &u), Some(w)))
        })
        .collect::<Result<_>>()?;

    let opts = FlowOptions {
        tol,
        samples: 1,
        ..FlowOptions::default()
    };
    let results: Vec<(f64, f64, Option<f64>)> = starts
        .par_iter()
        .map(|(z0, w0)| -> Result<_> {
            let traj = integrate_full(&model, Some(group), z0, t_end, &opts)?;
            let projection = match w0 {
                None => None,
                Some(w0) => {
                    let reduced = integrate_reduced(&potential, ReducedPoint::planar(w0.r, w0.p), t_end, &opts)?;
                    let end = reduced.points.last().expect("non-empty trajectory");
                    let seen = crate::reduction::to_reduced_chart(group, traj.last(), 1e-8)?;
                    let mut err = (seen.r - end.r).abs().max((seen.p - end.p).abs());
                    if let (Some((x3, xi3)), Some((y3, eta3))) = (w0.vertical, seen.vertical) {
                        // the vertical factor is the oscillator ẋ₃ = 2ξ₃, ξ̇₃ = −2x₃
                        let (c, s) = ((2.0 * t_end).cos(), (2.0 * t_end).sin());
                        err = err
                            .max((y3 - (x3 * c + xi3 * s)).abs())
                            .max((eta3 - (xi3 * c - x3 * s)).abs());
                    }
                    Some(err)
                }
            };
            Ok((traj.stats.max_energy_drift, traj.stats.max_momentum_drift, projection))
        })
        .collect::<Result<_>>()?;
    let projections: Vec<f64> = results.iter().filter_map(|r| r.2).collect();
    Ok(FlowInvariants {
        trajectories: count,
        tol,
        max_energy_drift: results.iter().map(|r| r.0).fold(0.0, f64::max),
        max_momentum_drift: results.iter().map(|r| r.1).fold(0.0, f64::max),
        max_projection_error: (!projections.is_empty()).then(|| projections.iter().copied().fold(0.0, f64::max)),
    })
}
