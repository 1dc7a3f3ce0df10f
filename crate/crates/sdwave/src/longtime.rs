//! Long-time constructions: bounded solutions on the whole line via the
//! m-sweep (zero data posed at t = −m, m increasing), uniqueness-contraction
//! checks on the difference energy, and periodicity / almost-periodicity
//! verification of the computed solutions.
//!
//! A caveat for long horizons: the reduced dynamics carry the exact
//! identity r″ = αr for r = ∫Ku − E, whose growing branch exp(√α·t)
//! amplifies roundoff-level inconsistencies over the full span m + T_hi.
//! Keep α small enough that exp(√α·(m + T_hi)) times machine epsilon stays
//! below the sweep tolerance, or the inter-m differences bottom out at that
//! floor instead of contracting.

use crate::basis::{ModalVector, SpectralBasis};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::inverse;
use crate::problem::ProblemSpec;
use crate::solver::{self, GalerkinState, StepperConfig, Trajectory};

/// Composite norm used for sweep and shift comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositeNorm {
    /// ‖u‖_{H¹} + ‖u_t‖_{L²}.
    H1Energy,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// Increasing start offsets; integration begins at t = −m.
    pub m_schedule: Vec<f64>,
    /// Observation window (T_lo, T_hi).
    pub window: (f64, f64),
    pub sweep_tol: f64,
    pub norm: CompositeNorm,
}

/// Per-m differences recorded by the sweep.
#[derive(Debug, Clone)]
pub struct SweepDiagnostics {
    /// m values as snapped to the time lattice.
    pub m_values: Vec<f64>,
    /// Composite-norm distance between consecutive window restrictions.
    pub diffs: Vec<f64>,
    pub converged_at_m: Option<f64>,
    /// Fitted slope of ln(diff) against m, when ≥ 2 differences exist.
    pub rate_fit: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct PeriodicityReport {
    /// The tested period after snapping to the stored lattice.
    pub omega: f64,
    pub snap_error: f64,
    /// sup over the trailing tail of ‖u(t+ω)−u(t)‖_{H¹} + ‖u_t(t+ω)−u_t(t)‖.
    pub defect: f64,
    pub converged: bool,
    /// Fitted decay rate of the shift-defect series (∞ when it vanishes).
    pub decay_rate: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AlmostPeriodReport {
    pub h: f64,
    pub snap_error: f64,
    /// sup_t ‖F_α(·,t+h) − F_α(·,t)‖_{L²} + sup_t |b(t+h) − b(t)|.
    pub forcing_defect: f64,
    /// sup_t of the composite norm of the shifted-minus-unshifted solution.
    pub solution_defect: f64,
    /// Empirical solution/forcing ratio; reported, not asserted.
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ContractionReport {
    /// Fitted decay rate of the difference, on the amplitude scale:
    /// −slope(log W̃_η)/2, comparable with modal characteristic roots.
    /// +∞ when the difference energy is identically zero.
    pub eta1: f64,
    /// Whether W̃_η was numerically non-increasing along the horizon.
    pub monotone: bool,
    pub eta: f64,
    pub fit_rms: f64,
}

/// ‖Δu‖_{H¹} + ‖Δu_t‖_{L²} between two states of one basis.
pub fn composite_distance(basis: &SpectralBasis, a: &GalerkinState, b: &GalerkinState) -> f64 {
    let dc = a.c.sub(&b.c);
    let dd = a.c_dot.sub(&b.c_dot);
    let h1: f64 = basis
        .eigenvalues
        .iter()
        .zip(&dc.coeffs)
        .map(|(lam, c)| (1.0 + lam) * c * c)
        .sum::<f64>()
        .sqrt();
    h1 + dd.norm()
}

fn snap(value: f64, lattice: f64) -> f64 {
    (value / lattice).round() * lattice
}

/// Solves from trivial data at t = −m for each m in the schedule and returns
/// the window restriction once successive restrictions agree to `sweep_tol`.
/// Starting the integration at −m realizes the forcing cutoff F_α^m exactly.
pub fn solve_whole_line(
    spec: &ProblemSpec,
    basis: &SpectralBasis,
    cfg: &SweepConfig,
    stepper: &StepperConfig,
) -> Result<(Trajectory, SweepDiagnostics)> {
    if cfg.m_schedule.len() < 2 {
        return Err(Error::InvalidArgument("m_schedule needs at least 2 entries".into()));
    }
    let lattice = stepper.dt * stepper.store_stride.max(1) as f64;
    let w_lo = snap(cfg.window.0, lattice);
    let w_hi = snap(cfg.window.1, lattice);
    if !(w_lo < w_hi) {
        return Err(Error::InvalidArgument("window must be nonempty".into()));
    }

    let zero = ModalVector::zeros(basis.n_modes);
    let mut diag = SweepDiagnostics {
        m_values: Vec::new(),
        diffs: Vec::new(),
        converged_at_m: None,
        rate_fit: None,
    };
    let mut prev: Option<Trajectory> = None;
    for &m_raw in &cfg.m_schedule {
        let m = snap(m_raw, lattice);
        if !(-m < w_lo) {
            return Err(Error::InvalidArgument(format!(
                "schedule entry m = {m} does not start before the window ({w_lo}, {w_hi})"
            )));
        }
        diag.m_values.push(m);
        let traj = solver::solve_ivp(spec, basis, -m, w_hi, &zero, &zero, stepper)?;
        let win = traj.window(w_lo, w_hi);
        if let Some(prev_win) = &prev {
            let diff = prev_win
                .states
                .iter()
                .zip(&win.states)
                .map(|(a, b)| composite_distance(basis, a, b))
                .fold(0.0, f64::max);
            diag.diffs.push(diff);
            if diff < cfg.sweep_tol {
                diag.converged_at_m = Some(m);
                if diag.diffs.len() >= 2 {
                    // diff_k is dominated by the transient of the earlier
                    // start offset m_{k−1}; regress against those.
                    let (rate, _) =
                        fit_ln_vs_m(&diag.m_values[..diag.diffs.len()], &diag.diffs);
                    diag.rate_fit = Some(rate);
                }
                return Ok((win, diag));
            }
        }
        prev = Some(win);
    }
    if diag.diffs.len() >= 2 {
        let (rate, _) = fit_ln_vs_m(&diag.m_values[..diag.diffs.len()], &diag.diffs);
        diag.rate_fit = Some(rate);
    }
    let eta = diagnostics::default_eta(spec, basis);
    let report = diagnostics::smallness_check(spec, basis, spec.alpha, eta, 0.1 * eta, None);
    Err(Error::SweepNotConverged {
        diffs: diag.diffs,
        tol: cfg.sweep_tol,
        report: Box::new(report),
    })
}

/// Least-squares slope of ln(diff) against m; returns (−slope, rms).
fn fit_ln_vs_m(m: &[f64], diffs: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = m
        .iter()
        .zip(diffs)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&mi, &d)| (mi, d.ln()))
        .collect();
    if pts.len() < 2 {
        return (f64::INFINITY, 0.0);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n)
        .sqrt();
    (-slope, rms)
}

/// Solves two IVPs and fits the decay of the difference energy W̃_η.
#[allow(clippy::too_many_arguments)]
pub fn contraction_check(
    spec: &ProblemSpec,
    basis: &SpectralBasis,
    u0a: &ModalVector,
    u1a: &ModalVector,
    u0b: &ModalVector,
    u1b: &ModalVector,
    horizon: f64,
    stepper: &StepperConfig,
) -> Result<ContractionReport> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    let ta = solver::solve_ivp(spec, basis, 0.0, horizon, u0a, u1a, stepper)?;
    let tb = solver::solve_ivp(spec, basis, 0.0, horizon, u0b, u1b, stepper)?;
    let eta = diagnostics::default_eta(spec, basis);
    let series: Vec<f64> = ta
        .states
        .iter()
        .zip(&tb.states)
        .map(|(a, b)| diagnostics::w_tilde(spec, basis, a, b, eta))
        .collect();
    let times: Vec<f64> = ta.states.iter().map(|s| s.t).collect();
    let scale = (u0a.norm() + u1a.norm() + u0b.norm() + u1b.norm()).max(1.0);
    let peak = series.iter().cloned().fold(0.0, f64::max);
    if peak <= 1e-28 * scale * scale {
        return Ok(ContractionReport { eta1: f64::INFINITY, monotone: true, eta, fit_rms: 0.0 });
    }
    let monotone = series.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-10) + 1e-250);
    let (rate, rms) = diagnostics::fit_decay_rate(&series, &times, 0.5)?;
    Ok(ContractionReport { eta1: 0.5 * rate, monotone, eta, fit_rms: rms })
}

/// Shift-defect of a stored trajectory against the proposed period ω,
/// snapped to the stored lattice. The defect is measured on the trailing
/// `tail_fraction` of the comparable range; the leading part absorbs the
/// transient.
pub fn check_periodicity(
    traj: &Trajectory,
    basis: &SpectralBasis,
    omega: f64,
    tail_fraction: f64,
    tol: f64,
) -> Result<PeriodicityReport> {
    let lattice = traj.dt_stored;
    let shift = (omega / lattice).round() as usize;
    if shift == 0 {
        return Err(Error::InvalidArgument(format!(
            "omega = {omega} is below half the stored spacing {lattice}"
        )));
    }
    let snapped = shift as f64 * lattice;
    // Index arithmetic: the lattice is exact where float spans are not.
    if traj.len() < 2 * shift + 1 {
        return Err(Error::WindowTooShort {
            span: traj.len().saturating_sub(1) as f64 * lattice,
            needed: 2.0 * snapped,
        });
    }
    let comparable = traj.len() - shift;
    let defects: Vec<f64> = (0..comparable)
        .map(|i| composite_distance(basis, &traj.states[i + shift], &traj.states[i]))
        .collect();
    let tail_start = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * (comparable - 1) as f64) as usize;
    let defect = defects[tail_start..].iter().cloned().fold(0.0, f64::max);
    let times: Vec<f64> = traj.states[..comparable].iter().map(|s| s.t).collect();
    let decay_rate = match diagnostics::fit_decay_rate(&defects, &times, tail_fraction) {
        Ok((rate, _)) => rate,
        Err(_) => f64::INFINITY, // defect identically ~0
    };
    Ok(PeriodicityReport {
        omega: snapped,
        snap_error: (snapped - omega).abs(),
        defect,
        converged: defect < tol,
        decay_rate,
    })
}

/// Evaluates how far h is from being a common almost period of the data and
/// of the whole-line solution. Both defects are returned so the
/// proportionality of the propagation argument can be examined empirically.
pub fn check_almost_period(
    spec: &ProblemSpec,
    basis: &SpectralBasis,
    h: f64,
    window: (f64, f64),
    sweep: &SweepConfig,
    stepper: &StepperConfig,
) -> Result<AlmostPeriodReport> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument("h must be positive".into()));
    }
    let lattice = stepper.dt * stepper.store_stride.max(1) as f64;
    let h_snapped = snap(h, lattice).max(lattice);
    let w_lo = snap(window.0, lattice);
    let w_hi = snap(window.1, lattice);

    let forcing_defect = forcing_shift_defect(spec, basis, h_snapped, (w_lo, w_hi))?;

    // One extended whole-line solve covers both the shifted and unshifted
    // windows on a common lattice.
    let extended = SweepConfig {
        window: (w_lo, w_hi + h_snapped),
        ..sweep.clone()
    };
    let (traj, _) = solve_whole_line(spec, basis, &extended, stepper)?;
    let shift = (h_snapped / traj.dt_stored).round() as usize;
    let comparable = traj.len().saturating_sub(shift);
    let solution_defect = (0..comparable)
        .map(|i| composite_distance(basis, &traj.states[i + shift], &traj.states[i]))
        .fold(0.0, f64::max);

    let ratio = if forcing_defect > 0.0 { solution_defect / forcing_defect } else { f64::INFINITY };
    Ok(AlmostPeriodReport {
        h: h_snapped,
        snap_error: (h_snapped - h).abs(),
        forcing_defect,
        solution_defect,
        ratio,
    })
}

/// sup_t ‖F_α(·,t+h) − F_α(·,t)‖ + sup_t |b(t+h) − b(t)| over the window.
pub fn forcing_shift_defect(
    spec: &ProblemSpec,
    basis: &SpectralBasis,
    h: f64,
    window: (f64, f64),
) -> Result<f64> {
    let tables = inverse::compute_k0(spec, basis)?;
    let samples = 2048usize;
    let mut worst_f = 0.0f64;
    let mut worst_b = 0.0f64;
    for i in 0..=samples {
        let t = window.0 + (window.1 - window.0) * i as f64 / samples as f64;
        let fa = inverse::f_alpha(&tables, spec, basis, t);
        let fb = inverse::f_alpha(&tables, spec, basis, t + h);
        worst_f = worst_f.max(fb.sub(&fa).norm());
        worst_b = worst_b.max(((spec.damping.b)(t + h) - (spec.damping.b)(t)).abs());
    }
    Ok(worst_f + worst_b)
}

/// Grid-scan helper: among the candidate shifts, the one minimizing the
/// forcing defect over the window (solution defects are left to
/// `check_almost_period` on the winner).
pub fn scan_almost_period(
    spec: &ProblemSpec,
    basis: &SpectralBasis,
    candidates: &[f64],
    window: (f64, f64),
) -> Result<(f64, f64)> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate list".into()));
    }
    let mut best = (candidates[0], f64::INFINITY);
    for &h in candidates {
        let d = forcing_shift_defect(spec, basis, h, window)?;
        if d < best.1 {
            best = (h, d);
        }
    }
    Ok(best)
}
