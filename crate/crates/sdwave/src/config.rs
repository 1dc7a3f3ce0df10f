//! Structured configuration files. Standard coefficient families (constant,
//! trigonometric polynomials in t or x, sine-mode combinations, piecewise
//! linear tables) are named here; arbitrary callables are available only
//! through the library API.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::basis::{build_basis, SpectralBasis};
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::mms::{ManufacturedProblem, ManufacturedSolution, TimeFn, TrigTerm};
use crate::problem::{
    central_difference_in_t, second_difference, DampingCoefficient, Interval, Nonlinearity,
    ProblemSpec, ScalarFn, SpaceTimeFn,
};
use crate::solver::{Scheme, StepperConfig};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: DomainConfig,
    pub coefficients: CoefficientsConfig,
    pub damping: DampingConfig,
    #[serde(default)]
    pub nonlinearity: NonlinearityConfig,
    pub f1: SpaceFnConfig,
    pub k: SpaceFnConfig,
    #[serde(default)]
    pub f2: Vec<SeparableTermConfig>,
    pub e: Option<TimeFnConfig>,
    #[serde(default)]
    pub basis: BasisConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    pub initial: Option<InitialConfig>,
    pub sweep: Option<SweepSectionConfig>,
    pub periodicity: Option<PeriodicityConfig>,
    pub almost_period: Option<AlmostPeriodConfig>,
    #[serde(default)]
    pub smallness: SmallnessSectionConfig,
    pub mms: Option<MmsConfig>,
    #[serde(default)]
    pub validate: ValidateConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct DomainConfig {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct CoefficientsConfig {
    pub a: f64,
    /// Penalty parameter; when absent, min(0.1, largest α passing the
    /// smallness checker), falling back to 0.1 if none passes.
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TrigTermConfig {
    #[serde(default)]
    pub amp_cos: f64,
    #[serde(default)]
    pub amp_sin: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeFnConfig {
    Constant { value: f64 },
    Trig {
        #[serde(default)]
        c0: f64,
        terms: Vec<TrigTermConfig>,
    },
    /// Piecewise-linear table; derivatives by central differences.
    Piecewise { points: Vec<[f64; 2]> },
}

impl TimeFnConfig {
    pub fn build(&self) -> Result<TimeFn> {
        match self {
            TimeFnConfig::Constant { value } => Ok(TimeFn::constant(*value)),
            TimeFnConfig::Trig { c0, terms } => Ok(TimeFn::trig(
                *c0,
                terms
                    .iter()
                    .map(|t| TrigTerm { amp_cos: t.amp_cos, amp_sin: t.amp_sin, omega: t.omega })
                    .collect(),
            )),
            TimeFnConfig::Piecewise { points } => {
                let f = piecewise_linear(points)?;
                let fx: ScalarFn = f.clone();
                let d1_src: SpaceTimeFn = Arc::new(move |_x, t| fx(t));
                let d1 = central_difference_in_t(d1_src, 1.0);
                let d1: ScalarFn = Arc::new(move |t| d1(0.0, t));
                let d2 = second_difference(f.clone(), 1.0);
                Ok(TimeFn { f, d1, d2 })
            }
        }
    }

    /// (lower, upper, derivative bound) for damping-style coefficients.
    fn bounds(&self) -> Result<(f64, f64, f64)> {
        match self {
            TimeFnConfig::Constant { value } => Ok((*value, *value, 0.0)),
            TimeFnConfig::Trig { c0, terms } => {
                let amp: f64 =
                    terms.iter().map(|t| t.amp_cos.hypot(t.amp_sin)).sum();
                let deriv: f64 =
                    terms.iter().map(|t| t.omega.abs() * t.amp_cos.hypot(t.amp_sin)).sum();
                Ok((c0 - amp, c0 + amp, deriv))
            }
            TimeFnConfig::Piecewise { points } => {
                if points.len() < 2 {
                    return Err(Error::Config("piecewise table needs ≥ 2 points".into()));
                }
                let lo = points.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
                let hi = points.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
                let slope = points
                    .windows(2)
                    .map(|w| ((w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).abs())
                    .fold(0.0, f64::max);
                Ok((lo, hi, slope))
            }
        }
    }
}

fn piecewise_linear(points: &[[f64; 2]]) -> Result<ScalarFn> {
    if points.len() < 2 {
        return Err(Error::Config("piecewise table needs ≥ 2 points".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
    Ok(Arc::new(move |x| {
        if x <= pts[0][0] {
            return pts[0][1];
        }
        if x >= pts[pts.len() - 1][0] {
            return pts[pts.len() - 1][1];
        }
        let i = pts.partition_point(|p| p[0] <= x).min(pts.len() - 1);
        let (p0, p1) = (&pts[i - 1], &pts[i]);
        p0[1] + (p1[1] - p0[1]) * (x - p0[0]) / (p1[0] - p0[0])
    }))
}

#[derive(Debug, Clone, Deserialize)]
pub struct DampingConfig {
    #[serde(flatten)]
    pub shape: TimeFnConfig,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub deriv_bound: Option<f64>,
}

impl DampingConfig {
    pub fn build(&self) -> Result<DampingCoefficient> {
        let f = self.shape.build()?;
        let (lo, hi, deriv) = self.shape.bounds()?;
        Ok(DampingCoefficient {
            b: f.f,
            b_prime: f.d1,
            lower: self.lower.unwrap_or(lo),
            upper: self.upper.unwrap_or(hi),
            deriv_bound: self.deriv_bound.unwrap_or(deriv),
        })
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonlinearityConfig {
    #[default]
    Zero,
    Linear { coefficient: f64 },
    Sine { coefficient: f64 },
}

impl NonlinearityConfig {
    pub fn build(&self) -> Nonlinearity {
        match self {
            NonlinearityConfig::Zero => Nonlinearity::zero(),
            NonlinearityConfig::Linear { coefficient } => Nonlinearity::linear(*coefficient),
            NonlinearityConfig::Sine { coefficient } => Nonlinearity::sine(*coefficient),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceFnConfig {
    Constant { value: f64 },
    /// Σ amp · sin(kπ(x−left)/|Ω|) over (k, amp) pairs.
    SineModes { modes: Vec<(usize, f64)> },
    Trig {
        #[serde(default)]
        c0: f64,
        terms: Vec<TrigTermConfig>,
    },
    Piecewise { points: Vec<[f64; 2]> },
}

impl SpaceFnConfig {
    pub fn build(&self, domain: Interval) -> Result<ScalarFn> {
        match self {
            SpaceFnConfig::Constant { value } => {
                let v = *value;
                Ok(Arc::new(move |_| v))
            }
            SpaceFnConfig::SineModes { modes } => {
                let len = domain.length();
                let left = domain.left;
                let parts: Vec<(f64, f64)> = modes
                    .iter()
                    .map(|(k, amp)| (*k as f64 * std::f64::consts::PI / len, *amp))
                    .collect();
                Ok(Arc::new(move |x| {
                    parts.iter().map(|(freq, amp)| amp * (freq * (x - left)).sin()).sum()
                }))
            }
            SpaceFnConfig::Trig { c0, terms } => {
                let c0 = *c0;
                let terms: Vec<(f64, f64, f64)> =
                    terms.iter().map(|t| (t.amp_cos, t.amp_sin, t.omega)).collect();
                Ok(Arc::new(move |x| {
                    c0 + terms
                        .iter()
                        .map(|(ac, as_, om)| ac * (om * x).cos() + as_ * (om * x).sin())
                        .sum::<f64>()
                }))
            }
            SpaceFnConfig::Piecewise { points } => piecewise_linear(points),
        }
    }
}

/// One separable contribution X(x)·T(t) to f₂.
#[derive(Debug, Clone, Deserialize)]
pub struct SeparableTermConfig {
    pub x: SpaceFnConfig,
    pub t: TimeFnConfig,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default)]
pub struct BasisConfig {
    pub n_modes: usize,
    pub quad_factor: usize,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { n_modes: 16, quad_factor: 4 }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub dt: f64,
    pub nonlinear_tol: f64,
    pub max_nonlinear_iters: usize,
    pub store_stride: usize,
    pub divergence_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = StepperConfig::default();
        Self {
            dt: d.dt,
            nonlinear_tol: d.nonlinear_tol,
            max_nonlinear_iters: d.max_nonlinear_iters,
            store_stride: d.store_stride,
            divergence_factor: d.divergence_factor,
        }
    }
}

impl SolverConfig {
    pub fn build(&self) -> StepperConfig {
        StepperConfig {
            dt: self.dt,
            nonlinear_tol: self.nonlinear_tol,
            max_nonlinear_iters: self.max_nonlinear_iters,
            scheme: Scheme::ImplicitTrapezoid,
            store_stride: self.store_stride,
            divergence_factor: self.divergence_factor,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct InitialConfig {
    pub u0: Option<SpaceFnConfig>,
    pub u1: Option<SpaceFnConfig>,
    #[serde(default)]
    pub s: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SweepSectionConfig {
    pub m_schedule: Vec<f64>,
    pub window: [f64; 2],
    #[serde(default = "default_sweep_tol")]
    pub tol: f64,
}

fn default_sweep_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub struct PeriodicityConfig {
    pub omega: f64,
    #[serde(default = "default_tail")]
    pub tail_fraction: f64,
    #[serde(default = "default_periodicity_tol")]
    pub tol: f64,
}

fn default_tail() -> f64 {
    0.5
}

fn default_periodicity_tol() -> f64 {
    1e-4
}

#[derive(Debug, Clone, Deserialize)]
pub struct AlmostPeriodConfig {
    /// Explicit shift candidates, or a range h_min..h_max with step h_step.
    pub candidates: Option<Vec<f64>>,
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub h_step: Option<f64>,
}

impl AlmostPeriodConfig {
    pub fn candidate_list(&self) -> Result<Vec<f64>> {
        if let Some(c) = &self.candidates {
            if c.is_empty() {
                return Err(Error::Config("almost_period.candidates is empty".into()));
            }
            return Ok(c.clone());
        }
        match (self.h_min, self.h_max, self.h_step) {
            (Some(lo), Some(hi), Some(step)) if step > 0.0 && hi > lo => {
                let mut out = Vec::new();
                let mut h = lo;
                while h <= hi + 1e-12 {
                    out.push(h);
                    h += step;
                }
                Ok(out)
            }
            _ => Err(Error::Config(
                "almost_period needs candidates or h_min/h_max/h_step".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(default)]
pub struct SmallnessSectionConfig {
    pub eta: Option<f64>,
    pub eta1: Option<f64>,
    pub eps0: Option<f64>,
    pub eps3: Option<f64>,
    pub eps4: Option<f64>,
    pub eps6: Option<f64>,
}

impl SmallnessSectionConfig {
    pub fn eps_free(&self) -> Option<diagnostics::EpsFree> {
        match (self.eps0, self.eps3, self.eps4, self.eps6) {
            (Some(eps0), Some(eps3), Some(eps4), Some(eps6)) => {
                Some(diagnostics::EpsFree { eps0, eps3, eps4, eps6 })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct MmsModeConfig {
    pub mode: usize,
    pub coeff: TimeFnConfig,
}

#[derive(Debug, Clone, Deserialize)]
pub struct MmsConfig {
    pub modes: Vec<MmsModeConfig>,
    pub g_star: Option<TimeFnConfig>,
    #[serde(default = "default_mms_horizon")]
    pub horizon: f64,
}

fn default_mms_horizon() -> f64 {
    2.0 * std::f64::consts::PI
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default)]
pub struct ValidateConfig {
    pub sample_count: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        Self { sample_count: 32 }
    }
}

/// Fully resolved problem: spec, basis, stepper, and the echo of defaults.
pub struct ResolvedProblem {
    pub spec: ProblemSpec,
    pub basis: SpectralBasis,
    pub stepper: StepperConfig,
    /// Whether α came from the config or from the default rule.
    pub alpha_defaulted: bool,
    pub mms: Option<ManufacturedProblem>,
}

impl RunConfig {
    pub fn from_str_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut value: toml::Value =
            text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        value.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    /// Builds the problem spec, basis, and stepper; when an `[mms]` section
    /// is present the manufactured data replace f₂ and E, so oracle cases
    /// double as ordinary run configurations.
    pub fn resolve(&self) -> Result<ResolvedProblem> {
        let domain = Interval::new(self.domain.left, self.domain.right)?;
        let basis = build_basis(domain, self.basis.n_modes, self.basis.quad_factor)?;
        let damping = self.damping.build()?;
        let nonlinearity = self.nonlinearity.build();
        let f1 = self.f1.build(domain)?;
        let k = self.k.build(domain)?;

        // f₂ = Σ X_i(x)·T_i(t), with the t-derivative termwise analytic.
        let mut xs: Vec<ScalarFn> = Vec::new();
        let mut ts: Vec<TimeFn> = Vec::new();
        for term in &self.f2 {
            xs.push(term.x.build(domain)?);
            ts.push(term.t.build()?);
        }
        let (f2, f2_t): (SpaceTimeFn, SpaceTimeFn) = {
            let xs2 = xs.clone();
            let ts2: Vec<TimeFn> = ts.clone();
            let f2: SpaceTimeFn = Arc::new(move |x, t| {
                xs.iter().zip(&ts).map(|(xf, tf)| xf(x) * (tf.f)(t)).sum()
            });
            let f2_t: SpaceTimeFn = Arc::new(move |x, t| {
                xs2.iter().zip(&ts2).map(|(xf, tf)| xf(x) * (tf.d1)(t)).sum()
            });
            (f2, f2_t)
        };

        let (e, e_pp): (ScalarFn, ScalarFn) = match &self.e {
            Some(cfg) => {
                let tf = cfg.build()?;
                (tf.f, tf.d2)
            }
            None => (Arc::new(|_| 0.0), Arc::new(|_| 0.0)),
        };

        let mut spec = ProblemSpec {
            domain,
            a: self.coefficients.a,
            damping,
            nonlinearity,
            f1,
            f2,
            f2_t,
            k,
            e,
            e_pp,
            alpha: self.coefficients.alpha.unwrap_or(0.1),
        };
        let alpha_defaulted = self.coefficients.alpha.is_none();
        if alpha_defaulted {
            let eta = diagnostics::default_eta(&spec, &basis);
            let report = diagnostics::smallness_check(&spec, &basis, 0.1, eta, 0.1 * eta, None);
            spec.alpha = match report.largest_alpha {
                Some(a) => a.min(0.1),
                None => 0.1,
            };
        }

        let mms = match &self.mms {
            Some(section) => {
                let mut modes = Vec::new();
                for m in &section.modes {
                    modes.push((m.mode, m.coeff.build()?));
                }
                let g_star = match &section.g_star {
                    Some(g) => g.build()?,
                    None => TimeFn::zero(),
                };
                let mp = crate::mms::manufacture(
                    &spec,
                    &basis,
                    ManufacturedSolution { modes },
                    g_star,
                )?;
                spec = mp.derived_spec.clone();
                Some(mp)
            }
            None => None,
        };

        Ok(ResolvedProblem {
            spec,
            basis,
            stepper: self.solver.build(),
            alpha_defaulted,
            mms,
        })
    }
}

/// Applies one `dotted.path=value` override to a parsed TOML tree.
fn apply_override(root: &mut toml::Value, entry: &str) -> Result<()> {
    let (path, raw) = entry
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override '{entry}' is not key=value")))?;
    let segments: Vec<&str> = path.trim().split('.').collect();
    if segments.is_empty() {
        return Err(Error::Config(format!("override '{entry}' has an empty path")));
    }
    let parsed: toml::Value = if let Ok(i) = raw.trim().parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw.trim().parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = raw.trim().parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(raw.trim().to_string())
    };
    let mut node = root;
    for seg in &segments[..segments.len() - 1] {
        node = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("'{seg}' is not a table in '{path}'")))?
            .entry(seg.to_string())
            .or_insert_with(|| toml::Value::Table(Default::default()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::Config(format!("'{path}' does not end in a table")))?
        .insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}
