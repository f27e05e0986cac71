//! Displacement fields `u(x, t) = (U ∗ K)(x, t)` for Dirac, Heaviside and
//! sampled boundary signals.
//!
//! Dirac and Heaviside inputs are resolved exactly: the response is the
//! kernel or its step response. A sampled signal is read as a
//! piecewise-linear function and convolved in the frequency domain, so every
//! output time uses the same node table and the result is linear in the
//! samples to rounding.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{
    self, check_grid, finite_bracket, ConjPair, Inversion, KernelValue, QuadratureConfig,
};
use crate::params::{MaterialParams, RodLength};
use crate::spectral::{self, Synthesizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Dirac,
    Heaviside,
    Sampled,
}

/// Uniform samples `values[k] = U(k·dt)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Samples {
    pub dt: f64,
    pub values: Vec<f64>,
}

/// The boundary displacement `U(t)`, multiplied by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySignal {
    pub kind: SignalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Samples>,
    #[serde(default = "unit")]
    pub scale: f64,
}

fn unit() -> f64 {
    1.0
}

impl BoundarySignal {
    pub fn dirac() -> Self {
        Self {
            kind: SignalKind::Dirac,
            samples: None,
            scale: 1.0,
        }
    }

    pub fn heaviside() -> Self {
        Self {
            kind: SignalKind::Heaviside,
            samples: None,
            scale: 1.0,
        }
    }

    pub fn sampled(dt: f64, values: Vec<f64>) -> Self {
        Self {
            kind: SignalKind::Sampled,
            samples: Some(Samples { dt, values }),
            scale: 1.0,
        }
    }

    pub fn scaled(self, scale: f64) -> Self {
        Self { scale, ..self }
    }

    pub fn check(&self) -> Result<()> {
        if !self.scale.is_finite() {
            return Err(Error::Domain(format!("signal scale must be finite, got {}", self.scale)));
        }
        match (self.kind, &self.samples) {
            (SignalKind::Sampled, Some(s)) => {
                if !(s.dt > 0.0 && s.dt.is_finite()) {
                    return Err(Error::Domain(format!("sample spacing must be positive, got {}", s.dt)));
                }
                if s.values.is_empty() || s.values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Domain("samples must be nonempty and finite".into()));
                }
                Ok(())
            }
            (SignalKind::Sampled, None) => Err(Error::Domain("sampled signal without samples".into())),
            (_, Some(_)) => Err(Error::Domain(format!("{:?} signal takes no samples", self.kind))),
            (_, None) => Ok(()),
        }
    }
}

/// Displacement on `xs × ts`, `u[i][j] = u(xs[i], ts[j])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveField {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub params_used: MaterialParams,
    pub signal_used: BoundarySignal,
    /// Dirac masses not representable on the grid, as `(x, time, weight)`.
    pub impulses: Vec<(f64, f64, f64)>,
    /// Largest imaginary residual relative to `max(1, sup|u|)`.
    pub max_imag_residual: f64,
    pub config_used: QuadratureConfig,
}

/// Response to `U = δ`, which is the kernel itself. Elastic parameters give
/// impulses.
pub fn response_dirac(
    x: f64,
    t: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    match params.rod_length {
        RodLength::Infinite => inversion::kernel_infinite(x, t, params, cfg),
        RodLength::Finite(l) => inversion::kernel_finite(x, t, l, params, cfg),
    }
}

/// Response to `U = H`. At `x = 0` this is exactly 1.
pub fn response_heaviside(
    x: f64,
    t: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<Inversion> {
    if x == 0.0 && t > 0.0 {
        return Ok(Inversion::exact(1.0));
    }
    match params.rod_length {
        RodLength::Infinite => inversion::step_infinite(x, t, params, cfg),
        RodLength::Finite(l) => inversion::step_finite(x, t, l, params, cfg),
    }
}

fn check_xs(xs: &[f64], params: &MaterialParams) -> Result<()> {
    check_grid("x", xs, true)?;
    if let RodLength::Finite(l) = params.rod_length {
        if xs[xs.len() - 1] > l {
            return Err(Error::GridMismatch(format!("x grid extends beyond the rod end {l}")));
        }
    }
    Ok(())
}

/// Sample indices of `ts` on the lattice `k·dt`.
fn lattice_indices(ts: &[f64], dt: f64) -> Result<Vec<usize>> {
    ts.iter()
        .map(|&t| {
            let k = (t / dt).round();
            if (t - k * dt).abs() <= 1e-9 * dt.max(t) {
                Ok(k as usize)
            } else {
                Err(Error::GridMismatch(format!("t = {t} is not a multiple of dt = {dt}")))
            }
        })
        .collect()
}

/// Response to a sampled signal.
pub fn response_general(
    signal: &BoundarySignal,
    xs: &[f64],
    ts: &[f64],
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<WaveField> {
    signal.check()?;
    cfg.check()?;
    let Some(samples) = signal.samples.as_ref().filter(|_| signal.kind == SignalKind::Sampled) else {
        return Err(Error::Domain("response_general needs a sampled signal".into()));
    };
    check_xs(xs, params)?;
    check_grid("t", ts, true)?;
    let dt = samples.dt;
    let idx = lattice_indices(ts, dt)?;
    let values: Vec<f64> = samples.values.iter().map(|v| v * signal.scale).collect();

    let mut max_imag: f64 = 0.0;
    let u: Vec<Vec<f64>> = if params.is_elastic_degenerate() {
        let arrivals = |x: f64, t: f64| -> Vec<(f64, f64)> {
            match params.rod_length {
                RodLength::Infinite => vec![(x, 1.0)],
                RodLength::Finite(l) if x == l => Vec::new(),
                RodLength::Finite(l) => inversion::elastic_images(x, t, l)
                    .into_iter()
                    .map(|imp| (imp.time, imp.weight))
                    .collect(),
            }
        };
        let t_end = ts[ts.len() - 1];
        xs.iter()
            .map(|&x| {
                let arr = if x == 0.0 { vec![(0.0, 1.0)] } else { arrivals(x, t_end + dt) };
                ts.iter()
                    .map(|&t| {
                        if t == 0.0 {
                            return 0.0;
                        }
                        arr.iter()
                            .map(|&(d, w)| w * spectral::interpolate(&values, dt, t - d))
                            .sum()
                    })
                    .collect()
            })
            .collect()
    } else {
        let first = idx[0];
        let count = idx[idx.len() - 1] - first + 1;
        let t_out = ts[ts.len() - 1];
        let t_sig = dt * values.len() as f64;
        let x_max = xs[xs.len() - 1];
        let speed_spread = params.slowness_at_infinity().max(1.0);
        let travel = match params.rod_length {
            RodLength::Infinite => x_max,
            RodLength::Finite(l) => inversion::image_distances(x_max, l, 1.2 * t_out / params.slowness_at_infinity() + 1.0)
                .into_iter()
                .fold(x_max, f64::max),
        };
        let reach = t_out + t_sig + travel * speed_spread + 1.0;
        let s0 = cfg.bromwich_s0.unwrap_or(1.0 / t_out.max(1.0));
        let synth = Synthesizer::new(&values, dt, s0, reach, cfg.panel_density);
        let pair = ConjPair::new(params, cfg);
        let rod = params.rod_length;
        let columns: Vec<(Vec<f64>, f64)> = xs
            .par_iter()
            .map(|&x| {
                if x == 0.0 {
                    let row = idx
                        .iter()
                        .map(|&k| if k == 0 { 0.0 } else { values.get(k).copied().unwrap_or(0.0) })
                        .collect();
                    return (row, 0.0);
                }
                let g = |s: Complex64| {
                    let (m, mb) = pair.line(s);
                    (finite_bracket(s * m, x, rod), finite_bracket(s.conj() * mb, x, rod))
                };
                let (re, im) = synth.column(g, Some(1.0), first, count);
                let row: Vec<f64> = idx
                    .iter()
                    .map(|&k| if k == 0 { 0.0 } else { re[k - first] })
                    .collect();
                let imag = idx
                    .iter()
                    .filter(|&&k| k > 0)
                    .map(|&k| im[k - first].abs())
                    .fold(0.0, f64::max);
                (row, imag)
            })
            .collect();
        let sup = columns
            .iter()
            .flat_map(|(row, _)| row.iter())
            .fold(1.0f64, |m, v| m.max(v.abs()));
        columns
            .into_iter()
            .map(|(row, imag)| {
                max_imag = max_imag.max(imag / sup);
                row
            })
            .collect()
    };
    Ok(WaveField {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        u,
        params_used: *params,
        signal_used: signal.clone(),
        impulses: Vec::new(),
        max_imag_residual: max_imag,
        config_used: *cfg,
    })
}

/// Field for any boundary signal. The `t = 0` row is zero; a Dirac input at
/// `x = 0` is recorded as an impulse rather than a grid value.
pub fn simulate(
    signal: &BoundarySignal,
    xs: &[f64],
    ts: &[f64],
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<WaveField> {
    signal.check()?;
    if signal.kind == SignalKind::Sampled {
        return response_general(signal, xs, ts, params, cfg);
    }
    check_xs(xs, params)?;
    check_grid("t", ts, true)?;
    cfg.check()?;
    let cells: Vec<(usize, usize)> = (0..xs.len())
        .flat_map(|i| (0..ts.len()).map(move |j| (i, j)))
        .collect();
    let kind = signal.kind;
    // value, imaginary residual and any (time, weight) impulses of one cell
    type Cell = (f64, f64, Vec<(f64, f64)>);
    let eval = |&(i, j): &(usize, usize)| -> Result<Cell> {
        let (x, t) = (xs[i], ts[j]);
        if t == 0.0 || (x == 0.0 && kind == SignalKind::Dirac) {
            return Ok((0.0, 0.0, Vec::new()));
        }
        let wrap = |e| Error::Cell {
            x,
            t,
            source: Box::new(e),
        };
        match kind {
            SignalKind::Heaviside => {
                let inv = response_heaviside(x, t, params, cfg).map_err(wrap)?;
                Ok((inv.value, inv.imag_residual, Vec::new()))
            }
            _ => match response_dirac(x, t, params, cfg).map_err(wrap)? {
                KernelValue::Regular(inv) => Ok((inv.value, inv.imag_residual, Vec::new())),
                KernelValue::Impulses(list) => {
                    Ok((0.0, 0.0, list.iter().map(|imp| (imp.time, imp.weight)).collect()))
                }
            },
        }
    };
    let results: Vec<Cell> = cells.par_iter().map(eval).collect::<Result<_>>()?;

    let mut u = vec![vec![0.0; ts.len()]; xs.len()];
    let mut impulses = Vec::new();
    let mut max_imag: f64 = 0.0;
    for (&(i, j), (v, im, imps)) in cells.iter().zip(&results) {
        u[i][j] = signal.scale * v;
        max_imag = max_imag.max((signal.scale * im).abs());
        if j + 1 == ts.len() {
            impulses.extend(imps.iter().map(|&(time, w)| (xs[i], time, signal.scale * w)));
        }
    }
    if kind == SignalKind::Dirac && xs[0] == 0.0 {
        impulses.insert(0, (0.0, 0.0, signal.scale));
    }
    let sup = u.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(WaveField {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        u,
        params_used: *params,
        signal_used: signal.clone(),
        impulses,
        max_imag_residual: max_imag / sup,
        config_used: *cfg,
    })
}
