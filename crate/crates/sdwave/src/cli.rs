//! Command front end: one configuration file drives every pipeline stage;
//! dotted-path overrides support scripted parameter sweeps.

use std::path::PathBuf;

use crate::config::{ResolvedProblem, RunConfig};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::inverse;
use crate::io;
use crate::longtime::{self, CompositeNorm, SweepConfig};
use crate::problem;
use crate::solver::{self, StepperConfig, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliCommand {
    Validate,
    SolveIvp,
    Identify,
    FindPeriodic,
    CheckSmallness,
    MmsVerify,
    AlmostPeriodScan,
}

impl CliCommand {
    pub fn name(&self) -> &'static str {
        match self {
            CliCommand::Validate => "validate",
            CliCommand::SolveIvp => "solve-ivp",
            CliCommand::Identify => "identify",
            CliCommand::FindPeriodic => "find-periodic",
            CliCommand::CheckSmallness => "check-smallness",
            CliCommand::MmsVerify => "mms-verify",
            CliCommand::AlmostPeriodScan => "almost-period-scan",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: CliCommand,
    pub config_path: PathBuf,
    pub output_dir: PathBuf,
    /// `dotted.path=value` entries applied to the parsed config.
    pub overrides: Vec<String>,
    pub plot: bool,
}

/// Exit code for an error, as documented in the interface contract:
/// 2 config, 3 divergence/non-convergence, 4 sweep, 5 degenerate pairing.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidArgument(_) => 2,
        Error::Diverged { .. } | Error::NonConvergence { .. } => 3,
        Error::SweepNotConverged { .. } => 4,
        Error::DegenerateOverdetermination { .. } => 5,
        _ => 1,
    }
}

fn push(entries: &mut Vec<(String, String)>, key: &str, value: impl ToString) {
    entries.push((key.to_string(), value.to_string()));
}

fn echo_config(
    entries: &mut Vec<(String, String)>,
    manifest: &RunManifest,
    cfg: &RunConfig,
    resolved: &ResolvedProblem,
) {
    push(entries, "command", manifest.command.name());
    push(entries, "config", manifest.config_path.display());
    for ov in &manifest.overrides {
        push(entries, "override", ov);
    }
    push(entries, "config.domain.left", resolved.spec.domain.left);
    push(entries, "config.domain.right", resolved.spec.domain.right);
    push(entries, "config.a", resolved.spec.a);
    push(entries, "config.alpha", resolved.spec.alpha);
    push(entries, "config.alpha_defaulted", resolved.alpha_defaulted);
    push(entries, "config.n_modes", resolved.basis.n_modes);
    push(entries, "config.quad_factor", cfg.basis.quad_factor);
    push(entries, "config.dt", resolved.stepper.dt);
    push(entries, "config.nonlinear_tol", resolved.stepper.nonlinear_tol);
    push(entries, "config.store_stride", resolved.stepper.store_stride);
    push(entries, "config.lipschitz", resolved.spec.nonlinearity.lipschitz);
    push(entries, "config.b_lower", resolved.spec.damping.lower);
    push(entries, "config.b_upper", resolved.spec.damping.upper);
    push(entries, "config.b_deriv_bound", resolved.spec.damping.deriv_bound);
}

fn series_stats(series: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut sup = 0.0f64;
    let mut last = f64::NAN;
    for v in series {
        sup = sup.max(v.abs());
        last = v;
    }
    (sup, last)
}

fn trajectory_outputs(
    manifest: &RunManifest,
    resolved: &ResolvedProblem,
    traj: &Trajectory,
    entries: &mut Vec<(String, String)>,
) -> Result<Vec<(f64, f64)>> {
    let tables = inverse::compute_k0(&resolved.spec, &resolved.basis)?;
    let r = inverse::overdetermination_residual(&tables, traj);
    io::write_trajectory_csv(&manifest.output_dir.join("trajectory.csv"), traj, &r)?;
    let last = traj.states.last().expect("nonempty trajectory");
    push(entries, "steps_stored", traj.len());
    push(entries, "nonlinear_iters_mean", traj.iter_stats.mean);
    push(entries, "nonlinear_iters_max", traj.iter_stats.max);
    push(entries, "t_final", last.t);
    push(entries, "final_u_norm", last.c.norm());
    push(entries, "final_ut_norm", last.c_dot.norm());
    let (g_sup, g_last) = series_stats(traj.g_samples.iter().map(|p| p.1));
    push(entries, "g_sup", g_sup);
    push(entries, "g_final", g_last);
    let (r_sup, _) = series_stats(r.iter().map(|p| p.1));
    push(entries, "r_sup", r_sup);
    if r.len() >= 3 {
        let resid = inverse::consistency_ode_check(&r, resolved.spec.alpha, traj.dt_stored);
        push(entries, "consistency_ode_residual", resid);
    }
    if manifest.plot {
        let g_pts: Vec<(f64, f64)> = traj.g_samples.clone();
        io::plot_svg(&manifest.output_dir.join("g.svg"), "reconstructed g(t)", &[("g", &g_pts)])?;
        io::plot_svg(
            &manifest.output_dir.join("r.svg"),
            "overdetermination residual r(t)",
            &[("r", &r)],
        )?;
        let eta = diagnostics::default_eta(&resolved.spec, &resolved.basis);
        if let Ok(es) = diagnostics::energy_series(traj, &resolved.basis, &resolved.spec, eta) {
            let e_pts: Vec<(f64, f64)> =
                es.t.iter().cloned().zip(es.e_basic.iter().cloned()).collect();
            let w_pts: Vec<(f64, f64)> =
                es.t.iter().cloned().zip(es.w_eta.iter().cloned()).collect();
            io::plot_svg(
                &manifest.output_dir.join("energy.svg"),
                "energy functionals",
                &[("E", &e_pts), ("W_eta", &w_pts)],
            )?;
        }
    }
    Ok(r)
}

fn initial_data(
    cfg: &RunConfig,
    resolved: &ResolvedProblem,
) -> Result<(crate::basis::ModalVector, crate::basis::ModalVector, f64, f64)> {
    // An [mms] run starts from the exactly projected manufactured data.
    if let Some(mp) = &resolved.mms {
        let horizon = cfg.mms.as_ref().map(|m| m.horizon).unwrap_or(2.0 * std::f64::consts::PI);
        let (u0, u1) = mp.exact_modal(&resolved.basis, 0.0);
        return Ok((u0, u1, 0.0, horizon));
    }
    let init = cfg
        .initial
        .as_ref()
        .ok_or_else(|| Error::Config("missing [initial] section for a solve run".into()))?;
    let u0 = match &init.u0 {
        Some(f) => resolved.basis.project(&*f.build(resolved.spec.domain)?),
        None => crate::basis::ModalVector::zeros(resolved.basis.n_modes),
    };
    let u1 = match &init.u1 {
        Some(f) => resolved.basis.project(&*f.build(resolved.spec.domain)?),
        None => crate::basis::ModalVector::zeros(resolved.basis.n_modes),
    };
    Ok((u0, u1, init.s, init.s + init.horizon))
}

fn sweep_config(cfg: &RunConfig) -> Result<SweepConfig> {
    let s = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("missing [sweep] section".into()))?;
    Ok(SweepConfig {
        m_schedule: s.m_schedule.clone(),
        window: (s.window[0], s.window[1]),
        sweep_tol: s.tol,
        norm: CompositeNorm::H1Energy,
    })
}

/// Executes one command; artifacts land in `output_dir`.
pub fn run(manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(&manifest.output_dir)?;
    let cfg = RunConfig::load(&manifest.config_path, &manifest.overrides)?;
    let resolved = cfg.resolve()?;
    let mut entries: Vec<(String, String)> = Vec::new();
    echo_config(&mut entries, manifest, &cfg, &resolved);

    match manifest.command {
        CliCommand::Validate => {
            let report = problem::validate(&resolved.spec, cfg.validate.sample_count);
            push(&mut entries, "sample_count", cfg.validate.sample_count);
            push(&mut entries, "assumptions_ok", report.is_ok());
            for (assumption, ok) in &report.checked {
                push(&mut entries, &format!("check.{assumption}"), ok);
            }
            for v in &report.violations {
                push(
                    &mut entries,
                    &format!("violation.{}", v.assumption),
                    format!("{} ({})", v.location, v.detail),
                );
            }
            println!("{report}");
        }
        CliCommand::SolveIvp | CliCommand::Identify => {
            let (u0, u1, s, t_end) = initial_data(&cfg, &resolved)?;
            let traj = solver::solve_ivp(
                &resolved.spec,
                &resolved.basis,
                s,
                t_end,
                &u0,
                &u1,
                &resolved.stepper,
            )?;
            let _ = trajectory_outputs(manifest, &resolved, &traj, &mut entries)?;
            if manifest.command == CliCommand::Identify {
                if let Some(mp) = &resolved.mms {
                    let mut g_err = 0.0f64;
                    for (t, g) in &traj.g_samples {
                        g_err = g_err.max((g - (mp.g_star)(*t)).abs());
                    }
                    push(&mut entries, "g_error_sup", g_err);
                }
            }
        }
        CliCommand::FindPeriodic => {
            let sweep = sweep_config(&cfg)?;
            let (traj, diag) =
                longtime::solve_whole_line(&resolved.spec, &resolved.basis, &sweep, &resolved.stepper)?;
            let _ = trajectory_outputs(manifest, &resolved, &traj, &mut entries)?;
            for (m, d) in diag.m_values.iter().skip(1).zip(&diag.diffs) {
                push(&mut entries, &format!("sweep.diff_at_m_{m}"), d);
            }
            push(
                &mut entries,
                "sweep.converged_at_m",
                diag.converged_at_m.map(|m| m.to_string()).unwrap_or_else(|| "none".into()),
            );
            if let Some(rate) = diag.rate_fit {
                push(&mut entries, "sweep.rate_fit", rate);
            }
            let p = cfg
                .periodicity
                .ok_or_else(|| Error::Config("missing [periodicity] section".into()))?;
            let report = longtime::check_periodicity(
                &traj,
                &resolved.basis,
                p.omega,
                p.tail_fraction,
                p.tol,
            )?;
            push(&mut entries, "periodicity.omega", report.omega);
            push(&mut entries, "periodicity.snap_error", report.snap_error);
            push(&mut entries, "periodicity.defect", report.defect);
            push(&mut entries, "periodicity.converged", report.converged);
            push(&mut entries, "periodicity.decay_rate", report.decay_rate);
        }
        CliCommand::CheckSmallness => {
            let eta = cfg
                .smallness
                .eta
                .unwrap_or_else(|| diagnostics::default_eta(&resolved.spec, &resolved.basis));
            let eta1 = cfg.smallness.eta1.unwrap_or(0.05 * eta);
            let report = diagnostics::smallness_check(
                &resolved.spec,
                &resolved.basis,
                resolved.spec.alpha,
                eta,
                eta1,
                cfg.smallness.eps_free(),
            );
            push(&mut entries, "gamma", report.gamma);
            push(&mut entries, "eta", report.eta);
            push(&mut entries, "eta1", report.eta1);
            push(&mut entries, "norm_k", report.norm_k);
            push(&mut entries, "norm_grad_k", report.norm_grad_k);
            push(&mut entries, "norm_k0", report.norm_k0);
            push(&mut entries, "norm_truncation", report.norm_truncation);
            push(&mut entries, "free.eps0", report.free.eps0);
            push(&mut entries, "free.eps3", report.free.eps3);
            push(&mut entries, "free.eps4", report.free.eps4);
            push(&mut entries, "free.eps6", report.free.eps6);
            for (name, pair) in &report.eps {
                push(&mut entries, &format!("eps.{name}.at_alpha"), pair.at_alpha);
                push(&mut entries, &format!("eps.{name}.at_zero"), pair.at_zero);
            }
            for (name, cond) in &report.conditions {
                push(&mut entries, &format!("condition.{name}.pass"), cond.pass);
                push(&mut entries, &format!("condition.{name}.margin"), cond.margin);
            }
            push(&mut entries, "verdict", report.verdict);
            push(
                &mut entries,
                "largest_alpha",
                report.largest_alpha.map(|a| a.to_string()).unwrap_or_else(|| "none".into()),
            );
            println!("{report}");
        }
        CliCommand::MmsVerify => {
            let mp = resolved
                .mms
                .as_ref()
                .ok_or_else(|| Error::Config("mms-verify needs an [mms] section".into()))?;
            let horizon = cfg.mms.as_ref().map(|m| m.horizon).unwrap_or(2.0 * std::f64::consts::PI);
            let errs = mp.verify_end_to_end(&resolved.basis, &resolved.stepper, horizon)?;
            push(&mut entries, "mms.horizon", horizon);
            push(&mut entries, "mms.u_error_sup", errs.u);
            push(&mut entries, "mms.ut_error_sup", errs.u_t);
            push(&mut entries, "mms.g_error_sup", errs.g);
            // refinement: halve dt once and report the empirical order
            let fine = StepperConfig { dt: 0.5 * resolved.stepper.dt, ..resolved.stepper.clone() };
            let errs_fine = mp.verify_end_to_end(&resolved.basis, &fine, horizon)?;
            push(&mut entries, "mms.g_error_sup_half_dt", errs_fine.g);
            if errs_fine.g > 0.0 {
                push(&mut entries, "mms.g_order", (errs.g / errs_fine.g).log2());
            }
        }
        CliCommand::AlmostPeriodScan => {
            let section = cfg
                .almost_period
                .as_ref()
                .ok_or_else(|| Error::Config("missing [almost_period] section".into()))?;
            let sweep = sweep_config(&cfg)?;
            let candidates = section.candidate_list()?;
            let (best_h, forcing) = longtime::scan_almost_period(
                &resolved.spec,
                &resolved.basis,
                &candidates,
                sweep.window,
            )?;
            push(&mut entries, "scan.candidates", candidates.len());
            push(&mut entries, "scan.best_h", best_h);
            push(&mut entries, "scan.forcing_defect", forcing);
            let report = longtime::check_almost_period(
                &resolved.spec,
                &resolved.basis,
                best_h,
                sweep.window,
                &sweep,
                &resolved.stepper,
            )?;
            push(&mut entries, "almost_period.h", report.h);
            push(&mut entries, "almost_period.snap_error", report.snap_error);
            push(&mut entries, "almost_period.forcing_defect", report.forcing_defect);
            push(&mut entries, "almost_period.solution_defect", report.solution_defect);
            push(&mut entries, "almost_period.ratio", report.ratio);
        }
    }

    io::write_summary(&manifest.output_dir.join("summary.txt"), &entries)?;
    Ok(())
}
