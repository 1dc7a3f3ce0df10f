//! Continuous problem description: coefficients, structural constants, and
//! sampled validity checks mirroring the standing assumptions (A1)–(A5).

use std::fmt;
use std::sync::Arc;

use crate::basis;
use crate::error::{Error, Result};

/// Scalar function of one real variable (time or space).
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Scalar function of (x, t).
pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Scalar function of (x, ξ).
pub type NonlinearFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

pub fn constant_fn(v: f64) -> ScalarFn {
    Arc::new(move |_| v)
}

// Debug for structs holding closures: print only the plain fields.
macro_rules! fmt_skip_fns {
    ($name:literal $(, $field:ident)*) => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            f.debug_struct($name)
                $(.field(stringify!($field), &self.$field))*
                .finish_non_exhaustive()
        }
    };
}

pub fn zero_space_time() -> SpaceTimeFn {
    Arc::new(|_, _| 0.0)
}

/// Spatial domain: a bounded open interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub left: f64,
    pub right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left < right) || !left.is_finite() || !right.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "interval requires left < right, got [{left}, {right}]"
            )));
        }
        Ok(Self { left, right })
    }

    pub fn length(&self) -> f64 {
        self.right - self.left
    }
}

/// Time-dependent strong damping coefficient with its declared bounds.
#[derive(Clone)]
pub struct DampingCoefficient {
    pub b: ScalarFn,
    pub b_prime: ScalarFn,
    /// Declared lower bound b̲ (positive under (A1)).
    pub lower: f64,
    /// Declared upper bound b̄.
    pub upper: f64,
    /// Declared bound b₁ on |b′(t)|.
    pub deriv_bound: f64,
}

impl DampingCoefficient {
    pub fn constant(value: f64) -> Self {
        Self {
            b: constant_fn(value),
            b_prime: constant_fn(0.0),
            lower: value,
            upper: value,
            deriv_bound: 0.0,
        }
    }
}

impl fmt::Debug for DampingCoefficient {
    fmt_skip_fns!("DampingCoefficient", lower, upper, deriv_bound);
}

/// x-dependent Lipschitz nonlinearity φ(x, ξ) with φ(x, 0) = 0.
#[derive(Clone)]
pub struct Nonlinearity {
    pub phi: NonlinearFn,
    /// ∂φ/∂ξ.
    pub phi_xi: NonlinearFn,
    /// Declared Lipschitz constant L in ξ.
    pub lipschitz: f64,
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Self {
            phi: Arc::new(|_, _| 0.0),
            phi_xi: Arc::new(|_, _| 0.0),
            lipschitz: 0.0,
        }
    }

    /// φ(x, ξ) = c·ξ.
    pub fn linear(c: f64) -> Self {
        Self {
            phi: Arc::new(move |_, xi| c * xi),
            phi_xi: Arc::new(move |_, _| c),
            lipschitz: c.abs(),
        }
    }

    /// φ(x, ξ) = c·sin ξ.
    pub fn sine(c: f64) -> Self {
        Self {
            phi: Arc::new(move |_, xi| c * xi.sin()),
            phi_xi: Arc::new(move |_, xi| c * xi.cos()),
            lipschitz: c.abs(),
        }
    }
}

impl fmt::Debug for Nonlinearity {
    fmt_skip_fns!("Nonlinearity", lipschitz);
}

/// Full coefficient set of the model: the data constrained by the standing
/// assumptions (A1)–(A5) plus the penalty parameter α of the
/// inverse-to-direct reduction.
#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: Interval,
    /// Wave speed factor a ≠ 0 (enters as a²).
    pub a: f64,
    pub damping: DampingCoefficient,
    pub nonlinearity: Nonlinearity,
    /// Spatial source profile multiplying the unknown g(t).
    pub f1: ScalarFn,
    /// Known source term f₂(x, t).
    pub f2: SpaceTimeFn,
    /// ∂f₂/∂t, supplied or built by `central_difference_in_t`.
    pub f2_t: SpaceTimeFn,
    /// Overdetermination weight K(x), vanishing at the endpoints.
    pub k: ScalarFn,
    /// Measured overdetermination data E(t) = ∫K u dx.
    pub e: ScalarFn,
    /// E″(t), supplied analytically where possible.
    pub e_pp: ScalarFn,
    /// Penalty parameter of the reduced direct problem, > 0.
    pub alpha: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("domain", &self.domain)
            .field("a", &self.a)
            .field("alpha", &self.alpha)
            .field("damping", &self.damping)
            .field("nonlinearity", &self.nonlinearity)
            .finish_non_exhaustive()
    }
}

/// Central-difference fallback for a missing time derivative. The step is
/// 10⁻⁴ of the given time scale.
pub fn central_difference_in_t(f: SpaceTimeFn, time_scale: f64) -> SpaceTimeFn {
    let h = 1e-4 * time_scale.abs().max(f64::MIN_POSITIVE);
    Arc::new(move |x, t| (f(x, t + h) - f(x, t - h)) / (2.0 * h))
}

/// Central-difference fallback for E″ from E.
pub fn second_difference(f: ScalarFn, time_scale: f64) -> ScalarFn {
    let h = 1e-4 * time_scale.abs().max(f64::MIN_POSITIVE);
    Arc::new(move |t| (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h))
}

/// Which standing assumption a sampled check belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    /// 0 < b̲ ≤ b(t) ≤ b̄.
    A1Bounds,
    /// |b′(t)| ≤ b₁.
    A1Derivative,
    /// φ(x, 0) = 0.
    A2Zero,
    /// |φ(x,ξ) − φ(x,η)| ≤ L|ξ−η|.
    A2Lipschitz,
    /// f₁, f₂ finite on the sampling grid.
    A3Finite,
    /// E, E″ finite; K vanishes at the endpoints.
    A4Data,
    /// ∫K f₁ dx ≠ 0 within tolerance.
    A5Pairing,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::A1Bounds => "A1 damping bounds",
            Assumption::A1Derivative => "A1 damping derivative bound",
            Assumption::A2Zero => "A2 phi(x,0)=0",
            Assumption::A2Lipschitz => "A2 Lipschitz bound",
            Assumption::A3Finite => "A3 source finiteness",
            Assumption::A4Data => "A4 overdetermination data",
            Assumption::A5Pairing => "A5 nondegenerate pairing",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct Violation {
    pub assumption: Assumption,
    /// Worst offending sample point, as (t | x | (x, ξ, η)) description.
    pub location: String,
    pub detail: String,
}

/// Outcome of the sampled assumption checks. Violations are data, not errors.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// Every assumption checked, with pass/fail.
    pub checked: Vec<(Assumption, bool)>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, ok) in &self.checked {
            writeln!(f, "{}: {}", a, if *ok { "pass" } else { "FAIL" })?;
        }
        for v in &self.violations {
            writeln!(f, "  {} violated at {}: {}", v.assumption, v.location, v.detail)?;
        }
        Ok(())
    }
}

/// Spot-checks (A1)–(A5) on deterministic sampling grids: `sample_count`
/// points in t over [−16π, 16π], in x over the domain interior, and in
/// (ξ, η) pairs over [−5, 5]. Analytic hypotheses can only be sampled, so a
/// pass is evidence, not proof.
pub fn validate(spec: &ProblemSpec, sample_count: usize) -> ValidationReport {
    assert!(sample_count >= 2, "sample_count must be at least 2");
    let n = sample_count;
    let mut report = ValidationReport::default();

    let t_grid: Vec<f64> = linspace(-16.0 * std::f64::consts::PI, 16.0 * std::f64::consts::PI, n);
    let x_grid: Vec<f64> = linspace(
        spec.domain.left + 1e-6 * spec.domain.length(),
        spec.domain.right - 1e-6 * spec.domain.length(),
        n,
    );
    let xi_grid: Vec<f64> = linspace(-5.0, 5.0, n);

    // (A1) bounds and positivity of the declared lower bound.
    {
        let mut worst: Option<(f64, f64)> = None;
        for &t in &t_grid {
            let bt = (spec.damping.b)(t);
            let slack = 1e-12 * (1.0 + spec.damping.upper.abs());
            let excess =
                (spec.damping.lower - bt).max(bt - spec.damping.upper) - slack;
            if !bt.is_finite() || excess > 0.0 {
                let e = if bt.is_finite() { excess } else { f64::INFINITY };
                if worst.is_none_or(|(_, w)| e > w) {
                    worst = Some((t, e));
                }
            }
        }
        let positive = spec.damping.lower > 0.0;
        let ok = worst.is_none() && positive;
        report.checked.push((Assumption::A1Bounds, ok));
        if let Some((t, _)) = worst {
            report.violations.push(Violation {
                assumption: Assumption::A1Bounds,
                location: format!("t = {t}"),
                detail: format!(
                    "b(t) = {} outside [{}, {}]",
                    (spec.damping.b)(t),
                    spec.damping.lower,
                    spec.damping.upper
                ),
            });
        } else if !positive {
            report.violations.push(Violation {
                assumption: Assumption::A1Bounds,
                location: "declared bounds".into(),
                detail: format!("lower bound b̲ = {} is not positive", spec.damping.lower),
            });
        }
    }

    // (A1) derivative bound.
    {
        let mut worst: Option<(f64, f64)> = None;
        for &t in &t_grid {
            let bp = (spec.damping.b_prime)(t);
            let excess = bp.abs() - spec.damping.deriv_bound
                - 1e-12 * (1.0 + spec.damping.deriv_bound);
            if !bp.is_finite() || excess > 0.0 {
                let e = if bp.is_finite() { excess } else { f64::INFINITY };
                if worst.is_none_or(|(_, w)| e > w) {
                    worst = Some((t, e));
                }
            }
        }
        report.checked.push((Assumption::A1Derivative, worst.is_none()));
        if let Some((t, _)) = worst {
            report.violations.push(Violation {
                assumption: Assumption::A1Derivative,
                location: format!("t = {t}"),
                detail: format!(
                    "|b'(t)| = {} exceeds b₁ = {}",
                    (spec.damping.b_prime)(t).abs(),
                    spec.damping.deriv_bound
                ),
            });
        }
    }

    // (A2) zero at ξ = 0 and Lipschitz bound on sampled pairs.
    {
        let mut zero_worst: Option<(f64, f64)> = None;
        let mut lip_worst: Option<(f64, f64, f64, f64)> = None;
        for &x in &x_grid {
            let at_zero = (spec.nonlinearity.phi)(x, 0.0);
            if (!at_zero.is_finite() || at_zero.abs() > 1e-10)
                && zero_worst.is_none_or(|(_, w)| at_zero.abs() > w)
            {
                zero_worst = Some((x, at_zero.abs()));
            }
            for &xi in &xi_grid {
                // Pairs (ξ, 0), (ξ, −ξ), (ξ, ξ/2) exercise different gaps.
                for eta in [0.0, -xi, 0.5 * xi] {
                    let gap = (xi - eta).abs();
                    if gap < 1e-12 {
                        continue;
                    }
                    let diff = ((spec.nonlinearity.phi)(x, xi)
                        - (spec.nonlinearity.phi)(x, eta))
                    .abs();
                    let excess = diff - spec.nonlinearity.lipschitz * gap
                        - 1e-10 * (1.0 + spec.nonlinearity.lipschitz);
                    if excess > 0.0 && lip_worst.is_none_or(|(_, _, _, w)| excess > w) {
                        lip_worst = Some((x, xi, eta, excess));
                    }
                }
            }
        }
        report.checked.push((Assumption::A2Zero, zero_worst.is_none()));
        if let Some((x, v)) = zero_worst {
            report.violations.push(Violation {
                assumption: Assumption::A2Zero,
                location: format!("x = {x}"),
                detail: format!("|phi(x, 0)| = {v}"),
            });
        }
        report.checked.push((Assumption::A2Lipschitz, lip_worst.is_none()));
        if let Some((x, xi, eta, excess)) = lip_worst {
            report.violations.push(Violation {
                assumption: Assumption::A2Lipschitz,
                location: format!("x = {x}, xi = {xi}, eta = {eta}"),
                detail: format!("|phi(x,xi) − phi(x,eta)| exceeds L|xi−eta| by {excess:.3e}"),
            });
        }
    }

    // (A3) finiteness of sources on the grid.
    {
        let mut bad: Option<String> = None;
        for &x in &x_grid {
            if !(spec.f1)(x).is_finite() {
                bad = Some(format!("f1 at x = {x}"));
                break;
            }
            for &t in &t_grid {
                if !(spec.f2)(x, t).is_finite() {
                    bad = Some(format!("f2 at (x, t) = ({x}, {t})"));
                    break;
                }
            }
        }
        report.checked.push((Assumption::A3Finite, bad.is_none()));
        if let Some(loc) = bad {
            report.violations.push(Violation {
                assumption: Assumption::A3Finite,
                location: loc,
                detail: "non-finite value".into(),
            });
        }
    }

    // (A4) E, E″ finite; K ∈ H¹₀ sampled as vanishing endpoint values.
    {
        let mut bad: Option<(String, String)> = None;
        for &t in &t_grid {
            if !(spec.e)(t).is_finite() || !(spec.e_pp)(t).is_finite() {
                bad = Some((format!("t = {t}"), "E or E'' non-finite".into()));
                break;
            }
        }
        if bad.is_none() {
            let k_scale = x_grid.iter().map(|&x| (spec.k)(x).abs()).fold(0.0, f64::max);
            let tol = 1e-8 * k_scale.max(f64::MIN_POSITIVE);
            for edge in [spec.domain.left, spec.domain.right] {
                let v = (spec.k)(edge);
                if !v.is_finite() || v.abs() > tol {
                    bad = Some((
                        format!("x = {edge}"),
                        format!("K = {v} does not vanish at the boundary"),
                    ));
                    break;
                }
            }
        }
        report.checked.push((Assumption::A4Data, bad.is_none()));
        if let Some((loc, detail)) = bad {
            report.violations.push(Violation {
                assumption: Assumption::A4Data,
                location: loc,
                detail,
            });
        }
    }

    // (A5) nondegenerate pairing, by a dedicated quadrature rule.
    {
        let quad = basis::build_basis(spec.domain, 64, 4).expect("internal quadrature");
        let k_vals: Vec<f64> = quad.quad_nodes.iter().map(|&x| (spec.k)(x)).collect();
        let f1_vals: Vec<f64> = quad.quad_nodes.iter().map(|&x| (spec.f1)(x)).collect();
        let kf1 = quad.quad_inner(&k_vals, &f1_vals);
        let scale = quad.quad_inner(&k_vals, &k_vals).sqrt()
            * quad.quad_inner(&f1_vals, &f1_vals).sqrt();
        let tol = 1e-8 * scale;
        let ok = kf1.abs() > tol;
        report.checked.push((Assumption::A5Pairing, ok));
        if !ok {
            report.violations.push(Violation {
                assumption: Assumption::A5Pairing,
                location: "∫K f1 dx".into(),
                detail: format!("|{kf1:.3e}| ≤ tolerance {tol:.3e}"),
            });
        }
    }

    report
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (a + b)];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
