//! Acceptance criteria, one line each. Exits non-zero if any criterion is red.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use redspec::dynamics::{flow_invariants, period_action};
use redspec::groups::{GroupKind, GroupModel};
use redspec::hamiltonian::{HamiltonianModel, Potential};
use redspec::oracle::{grid_projector_oracle, OracleConfig, OracleStatus};
use redspec::quantum::{count_in_window, harmonic_levels, smoothed_trace_of, Bump, GridPolicy, SpectrumSource, TraceWindows};
use redspec::reduction::{reduced_volume, reduced_volume_monte_carlo};
use redspec::verify::{
    action_regression, assess, geometric_h, gutzwiller_peaks, weak_verify, weyl_verify, PeakSearch, Sector, Tolerances,
    WeylPrediction,
};
use redspec::Result;

type Check = Result<(bool, String)>;
type Criterion = (&'static str, &'static str, fn() -> Check);

const SO2: GroupKind = GroupKind::So2Planar;

fn policy() -> GridPolicy {
    GridPolicy::default()
}

/// h from 0.05 down to 0.005.
fn sweep() -> Vec<f64> {
    geometric_h(0.05, 0.005, 8)
}

fn exact_spectrum() -> Check {
    let mut worst: f64 = 0.0;
    for (group, dim) in [(SO2, 2), (GroupKind::So3, 3)] {
        for n in 0..=2 {
            for h in [0.05, 0.02, 0.01] {
                let exact = harmonic_levels(dim, n, h, 50);
                let top = exact[49] + 0.5 * (exact[1] - exact[0]);
                let spectrum = Sector::new(group, n, Potential::harmonic())
                    .query(h)
                    .spectrum(0.5 * exact[0], top, &policy())?;
                if spectrum.eigenvalues.len() != 50 {
                    return Ok((false, format!("d={dim} n={n} h={h}: {} levels below {top}", spectrum.eigenvalues.len())));
                }
                for (e, x) in spectrum.eigenvalues.iter().zip(&exact) {
                    worst = worst.max((e - x).abs() / x);
                }
            }
        }
    }
    Ok((worst < 1e-6, format!("max relative error {worst:.2e} over 50 levels, d=2,3, n=0..2 (limit 1e-6)")))
}

fn weyl_counting() -> Check {
    let tol = Tolerances {
        coefficient_rel: 0.02,
        exponent_abs: 0.05,
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for (group, n) in [(SO2, 0), (GroupKind::So3, 1)] {
        let sector = Sector::new(group, n, Potential::harmonic());
        let r = weyl_verify(&sector, 1.0, 2.0, &sweep(), tol, &policy())?;
        let exponent = r.fitted_exponent.unwrap_or(f64::NAN);
        let pass = r.coefficient_error < 0.02 && (exponent + 1.0).abs() < 0.05;
        ok &= pass;
        detail.push(format!(
            "{group} n={n}: N·h err {:.2e}, exponent {exponent:.4}, d_χ={} mult={}",
            r.coefficient_error, r.prediction.degree, r.prediction.multiplicity
        ));
        if group == GroupKind::So3 {
            ok &= r.prediction.degree == 3 && r.prediction.multiplicity == 1;
            let wrong = assess("weyl", &r.prediction.without_degree(), &r.h, &r.measured, &r.measured_errors, tol, true);
            ok &= !wrong.pass;
            detail.push(format!("without d_χ: err {:.2}, pass={}", wrong.coefficient_error, wrong.pass));
        }
    }
    Ok((ok, detail.join("; ")))
}

fn anharmonic_weyl() -> Check {
    let pot = Potential::anharmonic(1.0);
    let sector = Sector::new(SO2, 0, pot);
    let group = GroupModel::new(SO2);
    let model = HamiltonianModel::for_group(SO2, pot);
    let quad = reduced_volume(&group, &model, 1.0, 2.0)?;
    let mc = reduced_volume_monte_carlo(&group, &model, 1.0, 2.0, 400_000, 11)?;
    let agree = quad.agrees_with(&mc, 3.0);
    let h = 0.005;
    let spectrum = policy().spectrum(&sector.query(h), 0.9, 2.1)?;
    let count = count_in_window(&spectrum, 1.0, 2.0)? as f64;
    let predicted = WeylPrediction::counting(&sector, 1.0, 2.0)?.at(h);
    let err = (count - predicted).abs() / predicted;
    Ok((
        agree && err < 0.05,
        format!(
            "N={count} vs {predicted:.2} (err {err:.2e}, limit 5e-2); Vol quadrature {:.6} vs Monte Carlo {:.6} ± {:.1e}",
            quad.value, mc.value, mc.error
        ),
    ))
}

fn weak_trace() -> Check {
    let f = Bump::new(1.5, 0.5);
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, pot) in [("harmonic", Potential::harmonic()), ("anharmonic", Potential::anharmonic(1.0))] {
        let r = weak_verify(&Sector::new(SO2, 0, pot), &f, &sweep(), Tolerances::default(), &policy())?;
        let rate = r.error_rate().map(|fit| fit.slope).unwrap_or(f64::NAN);
        ok &= r.coefficient_error < 0.05 && rate >= 0.8;
        detail.push(format!("{name}: err {:.2e} at h=0.005, error rate {rate:.2}", r.coefficient_error));
    }
    Ok((ok, detail.join("; ")))
}

fn periods() -> Check {
    let harmonic = Sector::new(SO2, 0, Potential::harmonic());
    let r = gutzwiller_peaks(&harmonic, &PeakSearch::new(1.0, 0.01, 5.0), &policy())?;
    let found: Vec<bool> = [0.5 * PI, PI, 1.5 * PI].iter().map(|&t| r.peak_near(t).is_some()).collect();
    let spurious = r.peaks_in(0.2, 0.5 * PI - 0.2);
    let anharmonic = Sector::new(SO2, 0, Potential::anharmonic(1.0));
    let (period, _) = period_action(&anharmonic.model(), 1.5)?;
    let a = gutzwiller_peaks(&anharmonic, &PeakSearch::new(1.5, 0.01, 5.0), &policy())?;
    let first = a.peaks.first().map(|p| p.t);
    let first_ok = first.is_some_and(|t| (t - period).abs() <= a.resolution);
    Ok((
        found.iter().all(|&b| b) && spurious.is_empty() && first_ok,
        format!(
            "harmonic peaks at π/2, π, 3π/2: {found:?}, spurious in (0.2, π/2−0.2): {}; anharmonic first peak {:?} vs T={period:.6} (Δt={:.4})",
            spurious.len(),
            first,
            a.resolution
        ),
    ))
}

fn action_phase() -> Check {
    let h = geometric_h(0.02, 0.004, 401);
    let harmonic = action_regression(&Sector::new(SO2, 0, Potential::harmonic()), 1.0, 0.5 * PI, &h, &policy())?;
    let s_h = harmonic.action.unwrap_or(f64::NAN);
    let target = PI / 4.0;
    let err_h = (s_h - target).abs() / target;
    let anharmonic = Sector::new(SO2, 0, Potential::anharmonic(1.0));
    let (period, action) = period_action(&anharmonic.model(), 1.5)?;
    let a = action_regression(&anharmonic, 1.5, period, &h, &policy())?;
    let s_a = a.action.unwrap_or(f64::NAN);
    let err_a = (s_a - action).abs() / action;
    Ok((
        err_h < 0.01 && err_a < 0.01,
        format!(
            "harmonic Ŝ={s_h:.8} vs π/4 (err {err_h:.2e}; classical S(1)={:.8}); anharmonic Ŝ={s_a:.6} vs S(1.5)={action:.6} (err {err_a:.2e}); limit 1e-2",
            harmonic.classical.map(|c| c.action).unwrap_or(f64::NAN)
        ),
    ))
}

fn off_support() -> Check {
    let h = 0.005;
    let sector = Sector::new(SO2, 0, Potential::harmonic());
    let off = TraceWindows::new(1.0, 0.8);
    let on = TraceWindows::new(1.0, period_action(&sector.model(), 1.0)?.0);
    let (lo, hi) = off.psi.support();
    let spectrum = policy().spectrum(&sector.query(h), lo, hi)?;
    let g_off = smoothed_trace_of(&spectrum, h, 1.0, &off).value.norm();
    let g_on = smoothed_trace_of(&spectrum, h, 1.0, &on).value.norm();
    let ratio = g_off / g_on;
    Ok((
        ratio < 1e-6,
        format!(
            "f̂ on [{:.1}, {:.1}] (no period), h=0.005: |G_off|/|G_on| = {ratio:.2e} (limit 1e-6)",
            off.f_hat.centre - off.f_hat.half_width,
            off.f_hat.centre + off.f_hat.half_width
        ),
    ))
}

fn projector_oracle() -> Check {
    let r = grid_projector_oracle(&OracleConfig::coarse(0.1, Potential::harmonic()), &policy())?;
    let worst = r.comparisons.iter().map(|c| c.worst_ratio).fold(0.0, f64::max);
    Ok((
        r.status == OracleStatus::Pass,
        format!(
            "status {:?}; orthogonality {:.1e}, commutator {:.1e}, worst deviation/estimate {worst:.3}",
            r.status, r.orthogonality, r.commutator
        ),
    ))
}

fn classical() -> Check {
    let tol = 1e-10;
    let mut ok = true;
    let mut detail = Vec::new();
    for group in [SO2, GroupKind::So3] {
        let inv = flow_invariants(&GroupModel::new(group), Potential::anharmonic(1.0), (1.0, 2.0), 100, 3.0, tol, 5)?;
        let proj = inv.max_projection_error.unwrap_or(f64::NAN);
        ok &= inv.max_energy_drift < 10.0 * tol && inv.max_momentum_drift < 10.0 * tol && proj < 1e-7;
        detail.push(format!(
            "{group}: drift H {:.1e}, J {:.1e}, projection {proj:.1e}",
            inv.max_energy_drift, inv.max_momentum_drift
        ));
    }
    let mut worst: f64 = 0.0;
    for pot in [Potential::harmonic(), Potential::anharmonic(1.0), Potential::double_well(1.0)] {
        let model = HamiltonianModel::for_group(SO2, pot);
        for k in 0..=10 {
            let e = 1.2 + 0.08 * k as f64;
            let step = 1e-4;
            let (t, _) = period_action(&model, e)?;
            let derivative = (period_action(&model, e + step)?.1 - period_action(&model, e - step)?.1) / (2.0 * step);
            worst = worst.max((derivative - t).abs() / t);
        }
    }
    ok &= worst < 1e-6;
    detail.push(format!("max |dS/dE − T|/T {worst:.1e}"));
    Ok((ok, detail.join("; ")))
}

fn main() -> ExitCode {
    let checks: [Criterion; 9] = [
        ("AC-1", "exact oscillator spectra", exact_spectrum),
        ("AC-2", "Weyl counting", weyl_counting),
        ("AC-3", "anharmonic Weyl", anharmonic_weyl),
        ("AC-4", "weak trace", weak_trace),
        ("AC-5", "reduced periods", periods),
        ("AC-6", "action phase", action_phase),
        ("AC-7", "off-support decay", off_support),
        ("AC-8", "projector oracle", projector_oracle),
        ("AC-9", "classical invariants", classical),
    ];
    let mut failed = 0;
    for (id, title, check) in checks {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{id} {} {title}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
