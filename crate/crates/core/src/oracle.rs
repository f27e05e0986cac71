//! Grünwald–Letnikov discretization of real- and complex-order derivatives,
//! used to check the constitutive law on sampled stress and strain paths
//! produced by the frequency-domain pipeline.
//!
//! The weights follow the binomial recurrence, so one code path serves every
//! complex order. Accuracy is first order in `dt`; the checks here certify
//! structure, not digits.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::inversion::{finite_bracket, ConjPair, QuadratureConfig};
use crate::modulus;
use crate::params::{MaterialParams, RodLength};
use crate::quadrature;
use crate::spectral::Synthesizer;

/// `w_k` of `(1 − z)^η`: `w₀ = 1`, `w_k = w_{k−1}(1 − (η + 1)/k)`.
pub fn gl_weights(order: Complex64, n: usize) -> Vec<Complex64> {
    let mut w = Vec::with_capacity(n + 1);
    w.push(Complex64::new(1.0, 0.0));
    for k in 1..=n {
        let prev = w[k - 1];
        w.push(prev * (1.0 - (order + 1.0) / k as f64));
    }
    w
}

/// Uniform samples of a causal path, `values[m] = f(m·dt)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl SampledPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("dt must be positive, got {dt}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("path values must be finite".into()));
        }
        Ok(Self { dt, values })
    }

    pub fn from_fn(dt: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..n).map(|m| f(m as f64 * dt)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// GL weights for one order and step, long enough for paths of `n + 1` samples.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlSeries {
    pub order: Complex64,
    pub dt: f64,
    pub weights: Vec<Complex64>,
}

impl GlSeries {
    pub fn new(order: Complex64, dt: f64, n: usize) -> Self {
        Self {
            order,
            dt,
            weights: gl_weights(order, n),
        }
    }

    /// `dt^{−η} Σ_{k≤m} w_k u_{m−k}` for every `m`.
    pub fn apply(&self, u: &[f64]) -> Vec<Complex64> {
        let scale = Complex64::new(self.dt, 0.0).powc(-self.order);
        let w = &self.weights;
        assert!(w.len() >= u.len(), "GL series shorter than the path");
        (0..u.len())
            .into_par_iter()
            .map(|m| {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..=m {
                    acc += w[k] * u[m - k];
                }
                acc * scale
            })
            .collect()
    }
}

/// `₀D_t^η` of a sampled path by GL.
pub fn frac_deriv_gl(path: &SampledPath, order: Complex64) -> Vec<Complex64> {
    GlSeries::new(order, path.dt, path.len()).apply(&path.values)
}

/// `½(D^{α+iβ} + D^{α−iβ})` with unit phase factors, before taking the real part.
pub fn sym_deriv_complex(path: &SampledPath, alpha: f64, beta: f64) -> Vec<Complex64> {
    let up = frac_deriv_gl(path, Complex64::new(alpha, beta));
    let down = frac_deriv_gl(path, Complex64::new(alpha, -beta));
    up.iter().zip(&down).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// Symmetrized complex-order derivative `₀D̄^{α,β}`.
pub fn sym_deriv(path: &SampledPath, alpha: f64, beta: f64) -> SampledPath {
    SampledPath {
        dt: path.dt,
        values: sym_deriv_complex(path, alpha, beta).iter().map(|v| v.re).collect(),
    }
}

/// `f + a·D^α f + 2b·D̄^{α,β} f`, the operator whose transform is
/// `1 + a s^α + b(s^{α+iβ} + s^{α−iβ})`.
fn zener_operator(path: &SampledPath, a: f64, b: f64, params: &MaterialParams) -> Vec<f64> {
    let frac = frac_deriv_gl(path, Complex64::new(params.alpha, 0.0));
    let sym = if b != 0.0 {
        sym_deriv(path, params.alpha, params.beta).values
    } else {
        vec![0.0; path.len()]
    };
    (0..path.len())
        .map(|m| path.values[m] + a * frac[m].re + 2.0 * b * sym[m])
        .collect()
}

/// Sup-norm of `LHS − RHS` of the constitutive law over interior cells,
/// relative to the sup-norm of the right-hand side.
pub fn constitutive_residual(
    sigma: &SampledPath,
    epsilon: &SampledPath,
    params: &MaterialParams,
) -> Result<f64> {
    if sigma.len() != epsilon.len() {
        return Err(Error::LengthMismatch {
            left: sigma.len(),
            right: epsilon.len(),
        });
    }
    if sigma.dt != epsilon.dt {
        return Err(Error::GridMismatch(format!(
            "stress step {} differs from strain step {}",
            sigma.dt, epsilon.dt
        )));
    }
    if sigma.len() < 3 {
        return Err(Error::Domain("need at least three samples".into()));
    }
    let lhs = zener_operator(sigma, params.a1, params.b1, params);
    let rhs = zener_operator(epsilon, params.a2, params.b2, params);
    let interior = 1..sigma.len() - 1;
    let diff = interior.clone().map(|m| (lhs[m] - rhs[m]).abs()).fold(0.0, f64::max);
    let scale = interior.map(|m| rhs[m].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok(diff / scale)
}

/// Stress produced by the strain path `epsilon` under the complex modulus
/// `P/Q`, computed in the frequency domain. The instantaneous part
/// `lim P/Q = a₂/a₁` is applied in the time domain so the synthesized
/// multiplier decays.
pub fn stress_from_strain(
    epsilon: &SampledPath,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<SampledPath> {
    cfg.check()?;
    if params.a1 == 0.0 {
        return Err(Error::Domain("stress synthesis needs a1 > 0".into()));
    }
    let n = epsilon.len();
    let t_end = epsilon.dt * n as f64;
    let s0 = cfg.bromwich_s0.unwrap_or(1.0 / t_end.max(1.0));
    let synth = Synthesizer::new(&epsilon.values, epsilon.dt, s0, 2.0 * t_end + 1.0, cfg.panel_density);
    let instant = params.a2 / params.a1;
    let ratio = |s: Complex64| {
        let (p, q) = modulus::pq_tilde(s, params);
        p / q - instant
    };
    let (re, _) = synth.column(|s| (ratio(s), ratio(s.conj())), None, 0, n);
    let values = re
        .iter()
        .zip(&epsilon.values)
        .map(|(r, e)| r + instant * e)
        .collect();
    SampledPath::new(epsilon.dt, values)
}

/// Setup of the full-system check: a smooth boundary pulse drives the rod,
/// strain comes from a central difference in `x` of the displacement, and
/// stress from integrating the equation of motion `∂ₓσ = ∂ₜₜu` inward from a
/// point the wave has not reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldCheck {
    pub dt: f64,
    pub t_end: f64,
    /// Duration of the `sin⁴` boundary pulse.
    pub pulse: f64,
    pub x0: f64,
    /// Step of the central difference in `x`.
    pub dx: f64,
    /// Kronrod panels on `[x0, X]`.
    pub panels: usize,
}

impl Default for FieldCheck {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 2.0,
            pulse: 1.0,
            x0: 0.5,
            dx: 1e-3,
            panels: 8,
        }
    }
}

/// Strain and stress paths at `x0` from the simulated field.
pub fn field_paths(
    params: &MaterialParams,
    check: &FieldCheck,
    cfg: &QuadratureConfig,
) -> Result<(SampledPath, SampledPath)> {
    cfg.check()?;
    if params.rod_length != RodLength::Infinite {
        return Err(Error::Domain("the field check uses an infinite rod".into()));
    }
    let FieldCheck { dt, t_end, pulse, x0, dx, panels } = *check;
    if !(dt > 0.0 && t_end > dt && pulse > 0.0 && x0 > dx && dx > 0.0 && panels > 0) {
        return Err(Error::Domain(format!("invalid field check {check:?}")));
    }
    let n = (t_end / dt).round() as usize + 1;
    let signal: Vec<f64> = (0..n)
        .map(|m| {
            let t = m as f64 * dt;
            if t < pulse {
                (PI * t / pulse).sin().powi(4)
            } else {
                0.0
            }
        })
        .collect();
    // beyond x_far the front has not arrived by t_end, so σ vanishes there
    let x_far = x0 + 1.1 * t_end / params.slowness_at_infinity() + 1.0;
    let reach = 2.0 * t_end + x_far + 1.0;
    let s0 = cfg.bromwich_s0.unwrap_or(1.0 / t_end.max(1.0));
    let synth = Synthesizer::new(&signal, dt, s0, reach, cfg.panel_density);
    let pair = ConjPair::new(params, cfg);
    let rod = RodLength::Infinite;

    let column = |x: f64| {
        synth
            .column(
                |s| {
                    let (m, mb) = pair.line(s);
                    (finite_bracket(s * m, x, rod), finite_bracket(s.conj() * mb, x, rod))
                },
                Some(1.0),
                0,
                n,
            )
            .0
    };
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let h = (x_far - x0) / panels as f64;
            quadrature::kronrod_rule(x0 + h * k as f64, x0 + h * (k + 1) as f64)
        })
        .collect();
    let integral = |s: Complex64, m: Complex64| {
        nodes
            .iter()
            .map(|&(xi, w)| finite_bracket(s * m, xi, rod) * w)
            .sum::<Complex64>()
    };
    let (w, (plus, minus)) = rayon::join(
        || {
            synth
                .column(
                    |s| {
                        let (m, mb) = pair.line(s);
                        (integral(s, m), integral(s.conj(), mb))
                    },
                    Some(x_far - x0),
                    0,
                    n,
                )
                .0
        },
        || rayon::join(|| column(x0 + dx), || column(x0 - dx)),
    );

    let eps: Vec<f64> = (0..n).map(|m| (plus[m] - minus[m]) / (2.0 * dx)).collect();
    // σ(x0) = −∂ₜₜ ∫_{x0}^{X} u dξ; the last sample has no right neighbour
    let mut sigma = vec![0.0; n - 1];
    for m in 1..n - 1 {
        sigma[m] = -(w[m + 1] - 2.0 * w[m] + w[m - 1]) / (dt * dt);
    }
    let mut eps = eps;
    eps.truncate(n - 1);
    Ok((SampledPath::new(dt, sigma)?, SampledPath::new(dt, eps)?))
}

/// Residuals of the three standard checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub dt: f64,
    pub elastic: f64,
    pub zener: f64,
    pub field: f64,
    pub zener_threshold: f64,
    pub field_threshold: f64,
    pub passed: bool,
}

pub const ZENER_THRESHOLD: f64 = 1e-2;
pub const FIELD_THRESHOLD: f64 = 5e-2;

/// Elastic identity, real-order Zener cross-pipeline and the full-system
/// check for `params`, all at step `dt`.
pub fn run_checks(params: &MaterialParams, dt: f64, cfg: &QuadratureConfig) -> Result<OracleReport> {
    if !(dt > 0.0 && dt < 0.1) {
        return Err(Error::Domain(format!("oracle step must lie in (0, 0.1), got {dt}")));
    }
    let n = (1.0 / dt).round() as usize + 1;

    let elastic = MaterialParams {
        a1: params.a2,
        b1: params.b2,
        ..*params
    };
    let path = SampledPath::from_fn(dt, n, |t| (3.0 * t).sin() * t)?;
    let elastic_res = constitutive_residual(&path, &path, &elastic)?;

    let zener = MaterialParams {
        b1: 0.0,
        b2: 0.0,
        rod_length: RodLength::Infinite,
        ..*params
    };
    let eps = SampledPath::from_fn(dt, n, |t| 1.0 - (-t).exp())?;
    let sigma = stress_from_strain(&eps, &zener, cfg)?;
    let zener_res = constitutive_residual(&sigma, &eps, &zener)?;

    let field_params = MaterialParams {
        rod_length: RodLength::Infinite,
        ..*params
    };
    let check = FieldCheck { dt, ..FieldCheck::default() };
    let (sigma, eps) = field_paths(&field_params, &check, cfg)?;
    let field_res = constitutive_residual(&sigma, &eps, &field_params)?;

    Ok(OracleReport {
        dt,
        elastic: elastic_res,
        zener: zener_res,
        field: field_res,
        zener_threshold: ZENER_THRESHOLD,
        field_threshold: FIELD_THRESHOLD,
        passed: elastic_res == 0.0 && zener_res < ZENER_THRESHOLD && field_res < FIELD_THRESHOLD,
    })
}
