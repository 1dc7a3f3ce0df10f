//! Acceptance suite: every criterion prints one pass/fail line and asserts
//! at its stated tolerance. Oracles (characteristic roots, transfer-function
//! amplitudes, manufactured solutions) are computed analytically in the
//! fixtures, independent of the implementation path under test.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdwave::basis::{build_basis, ModalVector, SpectralBasis};
use sdwave::diagnostics;
use sdwave::inverse;
use sdwave::longtime::{self, CompositeNorm, SweepConfig};
use sdwave::mms::{manufacture, ManufacturedProblem, ManufacturedSolution, TimeFn};
use sdwave::problem::{
    constant_fn, zero_space_time, DampingCoefficient, Interval, Nonlinearity, ProblemSpec,
};
use sdwave::solver::{solve_ivp, StepperConfig};

fn criterion(tag: &str, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {tag} [{}]: {name} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {tag} ({name}) failed: {detail}");
}

/// u* = sin(x) sin(t), g* = cos t, K = f1 = sin x, a = b = 1, phi = 0 on
/// (0, π). With this g*, the manufactured f₂ vanishes identically.
fn sine_mms(alpha: f64, basis: &SpectralBasis) -> ManufacturedProblem {
    let base = ProblemSpec {
        domain: Interval::new(0.0, PI).unwrap(),
        a: 1.0,
        damping: DampingCoefficient::constant(1.0),
        nonlinearity: Nonlinearity::zero(),
        f1: Arc::new(|x: f64| x.sin()),
        f2: zero_space_time(),
        f2_t: zero_space_time(),
        k: Arc::new(|x: f64| x.sin()),
        e: constant_fn(0.0),
        e_pp: constant_fn(0.0),
        alpha,
    };
    manufacture(
        &base,
        basis,
        ManufacturedSolution::single(1, TimeFn::sin(1.0)),
        TimeFn::cos(1.0),
    )
    .unwrap()
}

/// Linear fixture with the overdetermination pair on mode 2 (K = f1 = w²),
/// leaving mode 1 governed by c″ + bλ₁c′ + a²λ₁c = modal f₂ forcing.
fn mode2_gauge_spec(a: f64, damping: DampingCoefficient, forcing_amp: f64) -> ProblemSpec {
    ProblemSpec {
        domain: Interval::new(0.0, PI).unwrap(),
        a,
        damping,
        nonlinearity: Nonlinearity::zero(),
        f1: Arc::new(|x: f64| (2.0 / PI).sqrt() * (2.0 * x).sin()),
        f2: Arc::new(move |x: f64, t: f64| forcing_amp * t.cos() * (2.0 / PI).sqrt() * x.sin()),
        f2_t: Arc::new(move |x: f64, t: f64| {
            -forcing_amp * t.sin() * (2.0 / PI).sqrt() * x.sin()
        }),
        k: Arc::new(|x: f64| (2.0 / PI).sqrt() * (2.0 * x).sin()),
        e: constant_fn(0.0),
        e_pp: constant_fn(0.0),
        alpha: 0.05,
    }
}

#[test]
fn criterion_1_mms_identification_accuracy() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 16, 4).unwrap();
    let mp = sine_mms(0.01, &basis);
    let horizon = 2.0 * PI;
    let coarse = StepperConfig { dt: 1e-3, ..Default::default() };
    let errs = mp.verify_end_to_end(&basis, &coarse, horizon).unwrap();
    criterion(
        "1a",
        "g-reconstruction error at N=16, dt=1e-3 over one period",
        errs.g <= 1e-4,
        &format!("sup|g−g*| = {:.3e} (tolerance 1e-4)", errs.g),
    );
    let fine = StepperConfig { dt: 5e-4, ..Default::default() };
    let errs_fine = mp.verify_end_to_end(&basis, &fine, horizon).unwrap();
    let ratio = errs.g / errs_fine.g;
    criterion(
        "1b",
        "dt halving shrinks the g error by 4 ± 0.5",
        (ratio - 4.0).abs() <= 0.5,
        &format!("ratio = {ratio:.3} ({:.3e} → {:.3e})", errs.g, errs_fine.g),
    );
}

#[test]
fn criterion_2_reduction_consistency() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 16, 4).unwrap();
    for alpha in [0.01, 0.1] {
        let mp = sine_mms(alpha, &basis);
        let spec = &mp.derived_spec;
        let cfg = StepperConfig { dt: 1e-3, ..Default::default() };
        let (u0, u1) = mp.exact_modal(&basis, 0.0);
        let traj = solve_ivp(spec, &basis, 0.0, 2.0 * PI, &u0, &u1, &cfg).unwrap();
        let tables = inverse::compute_k0(spec, &basis).unwrap();
        let r = inverse::overdetermination_residual(&tables, &traj);
        let r_sup = r.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
        criterion(
            "2a",
            "overdetermination residual on the mms fixture",
            r_sup <= 1e-6,
            &format!("sup|r| = {r_sup:.3e} at alpha = {alpha} (tolerance 1e-6)"),
        );
        // Scale of the r-equation: the overdetermination data E and E* share
        // the magnitude sup|E|; r itself is their O(dt²) mismatch.
        let scale = traj
            .states
            .iter()
            .map(|s| (spec.e)(s.t).abs())
            .fold(0.0, f64::max)
            .max(r_sup);
        let resid = inverse::consistency_ode_check(&r, alpha, traj.dt_stored);
        let bound = 10.0 * traj.dt_stored * traj.dt_stored * scale;
        criterion(
            "2b",
            "consistency ODE residual |r''−αr| within 10·dt²·scale",
            resid <= bound,
            &format!("residual = {resid:.3e}, bound = {bound:.3e} at alpha = {alpha}"),
        );
    }
}

#[test]
fn criterion_3_alpha_independence() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 16, 4).unwrap();
    let cfg = StepperConfig { dt: 1e-3, ..Default::default() };
    let mut g_series = Vec::new();
    for alpha in [0.01, 0.1] {
        let mp = sine_mms(alpha, &basis);
        let (u0, u1) = mp.exact_modal(&basis, 0.0);
        let traj =
            solve_ivp(&mp.derived_spec, &basis, 0.0, 2.0 * PI, &u0, &u1, &cfg).unwrap();
        g_series.push(traj.g_samples);
    }
    let diff = g_series[0]
        .iter()
        .zip(&g_series[1])
        .map(|(a, b)| (a.1 - b.1).abs())
        .fold(0.0, f64::max);
    criterion(
        "3",
        "identify runs at alpha = 0.01 and 0.1 agree in g",
        diff <= 1e-5,
        &format!("sup|g_0.01 − g_0.1| = {diff:.3e} (tolerance 1e-5)"),
    );
}

#[test]
fn criterion_4_exponential_contraction() {
    // Oracle: roots of μ² + bλ₁μ + a²λ₁ = 0 with a = 1, b = 3, λ₁ = 1 are
    // (−3 ± √5)/2; the slow amplitude rate is (3 − √5)/2.
    let mu_slow = (3.0 - 5.0f64.sqrt()) / 2.0;
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 4, 4).unwrap();
    let spec = mode2_gauge_spec(1.0, DampingCoefficient::constant(3.0), 0.0);
    let stepper = StepperConfig { dt: 5e-3, ..Default::default() };
    let report = longtime::contraction_check(
        &spec,
        &basis,
        &ModalVector::unit(4, 1),
        &ModalVector::zeros(4),
        &ModalVector::zeros(4),
        &ModalVector::zeros(4),
        30.0,
        &stepper,
    )
    .unwrap();
    let rel = (report.eta1 - mu_slow).abs() / mu_slow;
    criterion(
        "4",
        "fitted contraction rate within 20% of the slow characteristic root",
        rel <= 0.2 && report.monotone,
        &format!(
            "eta1 = {:.6}, oracle = {:.6}, relative gap {:.2}%, monotone = {}",
            report.eta1,
            mu_slow,
            100.0 * rel,
            report.monotone
        ),
    );
}

#[test]
fn criterion_5_periodic_solution_construction() {
    // cos(t)-forced mode 1 with a = 1, b = 2: amplitude oracle
    // 1/√((a²λ₁−1)² + (bλ₁)²) = 1/2.
    let amplitude_oracle = 1.0 / ((1.0f64 - 1.0).powi(2) + 4.0).sqrt();
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 4, 4).unwrap();
    let spec = mode2_gauge_spec(1.0, DampingCoefficient::constant(2.0), 1.0);
    let dt = 2.0 * PI / 6400.0;
    let stepper = StepperConfig { dt, ..Default::default() };
    let sweep = SweepConfig {
        m_schedule: vec![10.0, 20.0, 40.0],
        window: (0.0, 4.0 * PI),
        sweep_tol: 1e-6,
        norm: CompositeNorm::H1Energy,
    };
    let (traj, diag) = longtime::solve_whole_line(&spec, &basis, &sweep, &stepper).unwrap();
    let geometric = diag.diffs.windows(2).all(|w| w[1] < 0.5 * w[0]);
    criterion(
        "5a",
        "whole-line sweep converges with geometrically decaying differences",
        diag.converged_at_m.is_some() && geometric,
        &format!("diffs = {:?}, converged at m = {:?}", diag.diffs, diag.converged_at_m),
    );
    let tail_start = traj.len() / 2;
    let amp = traj.states[tail_start..]
        .iter()
        .map(|s| s.c.coeffs[0].abs())
        .fold(0.0, f64::max);
    criterion(
        "5b",
        "limiting window matches the transfer-function amplitude",
        (amp - amplitude_oracle).abs() <= 1e-3,
        &format!("amplitude = {amp:.6}, oracle = {amplitude_oracle:.6}"),
    );
    let report =
        longtime::check_periodicity(&traj, &basis, 2.0 * PI, 0.5, 1e-4).unwrap();
    criterion(
        "5c",
        "periodicity defect at ω = 2π",
        report.defect <= 1e-4,
        &format!("defect = {:.3e} (tolerance 1e-4), snap error {:.1e}", report.defect, report.snap_error),
    );
}

#[test]
fn criterion_6_almost_period_propagation() {
    // Quasi-periodic damping over otherwise 2π-periodic data.
    let damping = DampingCoefficient {
        b: Arc::new(|t: f64| 2.0 + 0.1 * (t.sin() + (2.0f64.sqrt() * t).sin())),
        b_prime: Arc::new(|t: f64| 0.1 * (t.cos() + 2.0f64.sqrt() * (2.0f64.sqrt() * t).cos())),
        lower: 1.8,
        upper: 2.2,
        deriv_bound: 0.1 * (1.0 + 2.0f64.sqrt()),
    };
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 4, 4).unwrap();
    let mut spec = mode2_gauge_spec(1.0, damping, 1.0);
    // The shift h reaches ≈24π, so the sweep spans ≈128 time units; α must
    // keep exp(√α·span)·ε_machine below the sweep tolerance (the growing
    // branch of r″ = αr amplifies roundoff on long horizons).
    spec.alpha = 0.005;
    let dt = 2.0 * PI / 6400.0;
    let stepper = StepperConfig { dt, ..Default::default() };
    let window = (0.0, 4.0 * PI);
    let candidates: Vec<f64> = (1..=12).map(|k| 2.0 * PI * k as f64).collect();
    let (best_h, _) = longtime::scan_almost_period(&spec, &basis, &candidates, window).unwrap();
    let sweep = SweepConfig {
        m_schedule: vec![10.0, 20.0, 40.0],
        window,
        sweep_tol: 1e-4,
        norm: CompositeNorm::H1Energy,
    };
    let report =
        longtime::check_almost_period(&spec, &basis, best_h, window, &sweep, &stepper).unwrap();
    criterion(
        "6",
        "best-scanned h propagates: solution defect ≤ 10 × forcing defect",
        report.solution_defect <= 10.0 * report.forcing_defect,
        &format!(
            "h = {:.4}, forcing = {:.4e}, solution = {:.4e}, ratio = {:.2}",
            report.h, report.forcing_defect, report.solution_defect, report.ratio
        ),
    );
}

fn w1_scaled_spec(scale: f64, lipschitz: f64) -> ProblemSpec {
    ProblemSpec {
        domain: Interval::new(0.0, PI).unwrap(),
        a: 1.0,
        damping: DampingCoefficient::constant(1.0),
        nonlinearity: if lipschitz == 0.0 {
            Nonlinearity::zero()
        } else {
            Nonlinearity::linear(lipschitz)
        },
        f1: Arc::new(move |x: f64| scale * (2.0 / PI).sqrt() * x.sin()),
        f2: zero_space_time(),
        f2_t: zero_space_time(),
        k: Arc::new(move |x: f64| scale * (2.0 / PI).sqrt() * x.sin()),
        e: constant_fn(0.0),
        e_pp: constant_fn(0.0),
        alpha: 0.01,
    }
}

#[test]
fn criterion_7a_smallness_tiny_data_passes() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 8, 4).unwrap();
    let spec = w1_scaled_spec(1e-3, 0.0);
    let eta = diagnostics::default_eta(&spec, &basis);
    let report = diagnostics::smallness_check(&spec, &basis, 0.01, eta, 0.01 * eta, None);
    for (name, cond) in &report.conditions {
        println!("  {name}: pass = {}, margin = {:+.4e}", cond.pass, cond.margin);
    }
    // Note: the B-chain conditions carry the product ‖K₀‖·γ·‖∇K‖, which is
    // bounded below by 1 for every admissible (K, f₁) pair, so ε₈ ≥ 2a²
    // whatever the scaling; the composite verdict cannot hold as the
    // constants are defined. The assertion states the intended behavior and
    // records the gap.
    criterion(
        "7a",
        "tiny data passes every smallness condition",
        report.verdict,
        &format!(
            "verdict = {}, failing margins: {:?}",
            report.verdict,
            report
                .conditions
                .iter()
                .filter(|(_, c)| !c.pass)
                .map(|(n, c)| format!("{n}: {:.3e}", c.margin))
                .collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_7b_smallness_large_lipschitz_fails() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 8, 4).unwrap();
    let spec = w1_scaled_spec(1e-3, 1e3);
    let eta = diagnostics::default_eta(&spec, &basis);
    let report = diagnostics::smallness_check(&spec, &basis, 0.01, eta, 0.01 * eta, None);
    let get = |name: &str| {
        report.conditions.iter().find(|(n, _)| *n == name).map(|(_, c)| *c).unwrap()
    };
    let fails = !get("eps0").pass || !get("B_pos").pass;
    criterion(
        "7b",
        "L = 10³ trips eps0 or the B-condition",
        fails && !report.verdict,
        &format!(
            "eps0 margin = {:.3e}, B margin = {:.3e}",
            get("eps0").margin,
            get("B_pos").margin
        ),
    );
}

#[test]
fn criterion_7c_smallness_monotone_in_alpha_and_data() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 8, 4).unwrap();
    let spec = w1_scaled_spec(1e-3, 0.0);
    let eta = diagnostics::default_eta(&spec, &basis);
    // ε_i(α) decrease to ε_i(0) as α ↓ 0.
    let mut prev: Option<Vec<f64>> = None;
    let mut monotone = true;
    for alpha in [0.2, 0.1, 0.05, 0.01] {
        let report = diagnostics::smallness_check(&spec, &basis, alpha, eta, 0.01 * eta, None);
        let now: Vec<f64> = report.eps.iter().map(|(_, p)| p.at_alpha).collect();
        for (_, pair) in &report.eps {
            monotone &= pair.at_zero <= pair.at_alpha + 1e-12;
        }
        if let Some(p) = &prev {
            monotone &= now.iter().zip(p).all(|(n, p)| *n <= *p + 1e-12);
        }
        prev = Some(now);
    }
    // Shrinking L never flips a passing condition to failing (fixed free
    // tolerances so the comparison is like for like).
    let free = diagnostics::EpsFree { eps0: 100.0, eps3: 0.01, eps4: 0.1, eps6: 1e-4 };
    let big = diagnostics::smallness_check(
        &w1_scaled_spec(1e-3, 0.5),
        &basis,
        0.01,
        eta,
        0.01 * eta,
        Some(free),
    );
    let small = diagnostics::smallness_check(
        &w1_scaled_spec(1e-3, 0.05),
        &basis,
        0.01,
        eta,
        0.01 * eta,
        Some(free),
    );
    let no_flip = big
        .conditions
        .iter()
        .zip(&small.conditions)
        .all(|((_, cb), (_, cs))| !cb.pass || cs.pass);
    criterion(
        "7c",
        "ε-constants monotone in α; shrinking L never breaks a passing condition",
        monotone && no_flip,
        &format!("alpha-monotone = {monotone}, L-no-flip = {no_flip}"),
    );
}

#[test]
fn criterion_7d_friedrichs_values_exact() {
    let mut worst = 0.0f64;
    for (right, expect) in [(PI, 1.0), (1.0, 1.0 / PI), (2.0 * PI, 2.0)] {
        let basis = build_basis(Interval::new(0.0, right).unwrap(), 4, 4).unwrap();
        worst = worst.max((diagnostics::friedrichs_constant(&basis) - expect).abs());
    }
    criterion(
        "7d",
        "Friedrichs constants {1, 1/π, 2} exact to 1e-12",
        worst <= 1e-12,
        &format!("worst deviation = {worst:.3e}"),
    );
}

#[test]
fn criterion_8_energy_invariants() {
    // (a) W_eta ≥ 0 for 10³ seeded random states with admissible η.
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 6, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut nonneg = true;
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let a = 0.5 + 2.5 * rng.gen::<f64>();
        let b_low = 0.5 + 2.5 * rng.gen::<f64>();
        let spec = ProblemSpec {
            domain: Interval::new(0.0, PI).unwrap(),
            a,
            damping: DampingCoefficient::constant(b_low),
            nonlinearity: Nonlinearity::zero(),
            f1: Arc::new(|x: f64| x.sin()),
            f2: zero_space_time(),
            f2_t: zero_space_time(),
            k: Arc::new(|x: f64| x.sin()),
            e: constant_fn(0.0),
            e_pp: constant_fn(0.0),
            alpha: 0.01,
        };
        let bound = diagnostics::eta_bound_w(a, diagnostics::friedrichs_constant(&basis), b_low);
        let eta = rng.gen::<f64>() * bound;
        let state = sdwave::solver::GalerkinState {
            t: 0.0,
            c: ModalVector { coeffs: (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect() },
            c_dot: ModalVector { coeffs: (0..6).map(|_| rng.gen_range(-5.0..5.0)).collect() },
        };
        let zero = sdwave::solver::GalerkinState::zero(0.0, 6);
        let w = diagnostics::w_tilde(&spec, &basis, &state, &zero, eta);
        let scale = state.norm().powi(2).max(1.0);
        nonneg &= w >= -1e-12 * scale;
        worst = worst.min(w / scale);
    }
    criterion(
        "8a",
        "W_eta non-negative on 10³ random admissible-η states",
        nonneg,
        &format!("smallest normalized value = {worst:.3e}"),
    );

    // (b) Friedrichs inequality in modal arithmetic on every stored state.
    let basis16 = build_basis(Interval::new(0.0, PI).unwrap(), 16, 4).unwrap();
    let mp = sine_mms(0.01, &basis16);
    let cfg = StepperConfig { dt: 1e-3, ..Default::default() };
    let (u0, u1) = mp.exact_modal(&basis16, 0.0);
    let traj =
        solve_ivp(&mp.derived_spec, &basis16, 0.0, 2.0 * PI, &u0, &u1, &cfg).unwrap();
    let gamma = diagnostics::friedrichs_constant(&basis16);
    let friedrichs_ok = traj.states.iter().all(|st| {
        let l2 = st.c.dot(&st.c);
        let grad = basis16.grad_norm_sq(&st.c);
        l2 <= gamma * gamma * grad * (1.0 + 1e-12) + 1e-300
    });
    criterion(
        "8b",
        "Friedrichs inequality holds on every stored state (1e-12, modal)",
        friedrichs_ok,
        &format!("{} states checked", traj.len()),
    );

    // (c) Discrete energy non-increase for the unforced linear problem,
    // up to O(dt³) per step (verified at two dt values).
    let spec = mode2_gauge_spec(1.0, DampingCoefficient::constant(1.0), 0.0);
    let basis4 = build_basis(Interval::new(0.0, PI).unwrap(), 4, 4).unwrap();
    let mut ok = true;
    let mut detail = String::new();
    for dt in [1e-2, 5e-3] {
        let cfg = StepperConfig { dt, ..Default::default() };
        let u0 = ModalVector::unit(4, 1);
        let u1 = ModalVector::unit(4, 3).scaled(0.4);
        let traj = solve_ivp(&spec, &basis4, 0.0, 2.0, &u0, &u1, &cfg).unwrap();
        let energy = |st: &sdwave::solver::GalerkinState| {
            0.5 * st.c_dot.dot(&st.c_dot) + 0.5 * basis4.grad_norm_sq(&st.c)
        };
        let e0 = energy(&traj.states[0]);
        let rise = traj
            .states
            .windows(2)
            .map(|w| energy(&w[1]) - energy(&w[0]))
            .fold(0.0, f64::max);
        ok &= rise <= 10.0 * dt * dt * dt * e0;
        detail.push_str(&format!("dt={dt}: max rise {rise:.3e}; "));
    }
    criterion("8c", "discrete energy non-increasing up to O(dt³) per step", ok, &detail);
}

#[test]
fn criterion_9_uniqueness_at_desk_scale() {
    let basis = build_basis(Interval::new(0.0, PI).unwrap(), 4, 4).unwrap();
    let spec = mode2_gauge_spec(1.0, DampingCoefficient::constant(2.0), 1.0);
    let dt = 2.0 * PI / 6400.0;
    let stepper = StepperConfig { dt, ..Default::default() };
    let tol = 1e-6;
    let window = (0.0, 4.0 * PI);
    let sweep_a = SweepConfig {
        m_schedule: vec![10.0, 20.0, 40.0],
        window,
        sweep_tol: tol,
        norm: CompositeNorm::H1Energy,
    };
    let sweep_b = SweepConfig {
        m_schedule: vec![15.0, 30.0, 60.0],
        window,
        sweep_tol: tol,
        norm: CompositeNorm::H1Energy,
    };
    let (ta, _) = longtime::solve_whole_line(&spec, &basis, &sweep_a, &stepper).unwrap();
    let (tb, _) = longtime::solve_whole_line(&spec, &basis, &sweep_b, &stepper).unwrap();
    assert_eq!(ta.len(), tb.len(), "windows must share the lattice");
    let gap = ta
        .states
        .iter()
        .zip(&tb.states)
        .map(|(a, b)| longtime::composite_distance(&basis, a, b))
        .fold(0.0, f64::max);
    criterion(
        "9",
        "disjoint m-schedules agree on the window within 2·sweep_tol",
        gap <= 2.0 * tol,
        &format!("gap = {gap:.3e}, bound = {:.3e}", 2.0 * tol),
    );
}
