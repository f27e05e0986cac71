//! Frequency-domain synthesis of responses to sampled boundary signals.
//!
//! The samples are read as a piecewise-linear signal with zero knots one cell
//! before the first and one cell after the last sample. Its Laplace transform
//! is exact: `dt·(sinh(s·dt/2)/(s·dt/2))²·Σ U_k e^{−s·k·dt}`. A response is
//! synthesized on the line `s = s0 + iτ` from a per-node multiplier, using one
//! fixed node table for every output time.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fixed quadrature nodes on `[0, end]`: geometrically graded panels on the
/// first panel, uniform panels afterwards, 15 Kronrod points each.
#[derive(Debug, Clone)]
pub(crate) struct Nodes {
    pub tau: Vec<f64>,
    pub weight: Vec<f64>,
}

impl Nodes {
    pub fn new(h: f64, end: f64) -> Self {
        let mut tau = Vec::new();
        let mut weight = Vec::new();
        let mut push_panel = |a: f64, b: f64| {
            for (x, w) in quadrature::kronrod_rule(a, b) {
                tau.push(x);
                weight.push(w);
            }
        };
        let h = h.min(end);
        push_panel(0.0, h * 2f64.powi(-40));
        for k in (0..40).rev() {
            push_panel(h * 2f64.powi(-k - 1), h * 2f64.powi(-k));
        }
        let n = ((end - h) / h).ceil().max(0.0) as usize;
        if n > 0 {
            let step = (end - h) / n as f64;
            for k in 0..n {
                let a = h + step * k as f64;
                let b = if k + 1 == n { end } else { a + step };
                push_panel(a, b);
            }
        }
        Self { tau, weight }
    }
}

/// `dt·(sinh(z)/z)²` with `z = s·dt/2`, the transform of a unit-height hat of
/// half-width `dt`.
fn hat(s: Complex64, dt: f64) -> Complex64 {
    let z = s * (0.5 * dt);
    if z.norm() < 1e-4 {
        let z2 = z * z;
        // sinh(z)/z = 1 + z²/6 + z⁴/120
        let r = 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
        return r * r * dt;
    }
    let r = z.sinh() / z;
    r * r * dt
}

/// Transform of a sampled signal at the nodes of one Bromwich line.
#[derive(Debug, Clone)]
pub(crate) struct Spectrum {
    pub s0: f64,
    pub dt: f64,
    pub nodes: Nodes,
    /// `Û(s0 + iτ_j)`.
    pub pos: Vec<Complex64>,
    /// `Û(s0 − iτ_j)`.
    pub neg: Vec<Complex64>,
    /// `dt·Σ|U_k|`.
    pub scale: f64,
}

impl Spectrum {
    pub fn new(values: &[f64], dt: f64, s0: f64, nodes: Nodes) -> Self {
        // trailing zeros add nothing to the sum
        let len = values.iter().rposition(|&u| u != 0.0).map_or(0, |k| k + 1);
        let values = &values[..len];
        let eval = |s: Complex64| {
            // Horner in z = e^{−s·dt}
            let z = (-s * dt).exp();
            let mut acc = ZERO;
            for &u in values.iter().rev() {
                acc = acc * z + u;
            }
            acc * hat(s, dt)
        };
        let pos: Vec<Complex64> = nodes
            .tau
            .iter()
            .map(|&t| eval(Complex64::new(s0, t)))
            .collect();
        // the samples are real, so the transform is conjugate-symmetric
        let neg = pos.iter().map(|v| v.conj()).collect();
        Self {
            s0,
            dt,
            nodes,
            pos,
            neg,
            scale: dt * values.iter().map(|u| u.abs()).sum::<f64>(),
        }
    }

    /// `e^{s0 t}/(2π) Σ_j w_j [Û(s_j)G(s_j)e^{iτ_j t} + Û(s̄_j)G(s̄_j)e^{−iτ_j t}]`
    /// at `t = (first + m)·dt`, `m < count`. `mult[j] = (G(s_j), G(s̄_j))`;
    /// a `None` entry marks a node whose contribution is negligible.
    /// Returns the real parts and the imaginary residuals.
    pub fn synthesize(
        &self,
        mult: &[Option<(Complex64, Complex64)>],
        first: usize,
        count: usize,
    ) -> (Vec<f64>, Vec<f64>) {
        let floor = NOISE_FLOOR * self.scale;
        let mut acc = vec![ZERO; count];
        for (j, m) in mult.iter().enumerate() {
            let Some((g, gb)) = m else { continue };
            let w = self.nodes.weight[j];
            let tau = self.nodes.tau[j];
            let a = self.pos[j] * g * w;
            let b = self.neg[j] * gb * w;
            if a.norm() + b.norm() < floor {
                continue;
            }
            // a·e^{iθ} + b·e^{−iθ} = (a + b)cos θ + i(a − b)sin θ
            let sum = a + b;
            let diff = Complex64::new(-(a - b).im, (a - b).re);
            let rot = Complex64::from_polar(1.0, tau * self.dt);
            let mut ph = ZERO;
            for (k, slot) in acc.iter_mut().enumerate() {
                if k % 256 == 0 {
                    ph = Complex64::from_polar(1.0, tau * self.dt * (first + k) as f64);
                }
                *slot += sum * ph.re + diff * ph.im;
                ph *= rot;
            }
        }
        let mut re = Vec::with_capacity(count);
        let mut im = Vec::with_capacity(count);
        for (k, v) in acc.into_iter().enumerate() {
            let scale = (self.s0 * self.dt * (first + k) as f64).exp() / (2.0 * PI);
            re.push(v.re * scale);
            im.push(v.im * scale);
        }
        (re, im)
    }
}

/// Node table plus signal transform, ready to synthesize responses for any
/// multiplier `G(s)`.
#[derive(Debug, Clone)]
pub(crate) struct Synthesizer {
    spectrum: Spectrum,
}

/// Multiplier magnitude below which a node is skipped.
const NEGLIGIBLE: f64 = 1e-30;

/// The signal's L1 norm bounds `|Û|`, and Horner summation leaves noise of
/// order `n·ε` relative to it. Node contributions below this fraction of it
/// are dropped.
const NOISE_FLOOR: f64 = 1e-14;

impl Synthesizer {
    /// `reach` bounds the phase rate `|t − t_k − (travel time)|` of the
    /// integrand; the node table ends at the first zero `2π/dt` of the hat
    /// transform.
    pub fn new(values: &[f64], dt: f64, s0: f64, reach: f64, density: f64) -> Self {
        let h = PI / reach.max(1.0) / density;
        let nodes = Nodes::new(h, 2.0 * PI / dt);
        Self {
            spectrum: Spectrum::new(values, dt, s0, nodes),
        }
    }

    /// Response to multiplier `g`, given as `(g(s), g(s̄))` at `s = s0 + iτ`.
    /// With `bound ≥ sup|g|` on the line, nodes whose contribution cannot
    /// reach the noise floor are skipped without evaluating `g`.
    pub fn column<G>(&self, g: G, bound: Option<f64>, first: usize, count: usize) -> (Vec<f64>, Vec<f64>)
    where
        G: Fn(Complex64) -> (Complex64, Complex64),
    {
        let sp = &self.spectrum;
        let floor = NOISE_FLOOR * sp.scale;
        let mult: Vec<Option<(Complex64, Complex64)>> = sp
            .nodes
            .tau
            .iter()
            .enumerate()
            .map(|(j, &t)| {
                if let Some(b) = bound {
                    let reach = (sp.pos[j].norm() + sp.neg[j].norm()) * sp.nodes.weight[j] * b;
                    if reach < floor {
                        return None;
                    }
                }
                let (a, b) = g(Complex64::new(sp.s0, t));
                if a.norm() < NEGLIGIBLE && b.norm() < NEGLIGIBLE {
                    None
                } else {
                    Some((a, b))
                }
            })
            .collect();
        sp.synthesize(&mult, first, count)
    }
}

/// Piecewise-linear reading of `values` sampled at `k·dt`, zero at `−dt` and
/// at `len·dt`.
pub(crate) fn interpolate(values: &[f64], dt: f64, t: f64) -> f64 {
    let u = t / dt;
    if u <= -1.0 || u >= values.len() as f64 {
        return 0.0;
    }
    let k = u.floor();
    let frac = u - k;
    let at = |i: f64| {
        if i < 0.0 || i >= values.len() as f64 {
            0.0
        } else {
            values[i as usize]
        }
    };
    at(k) * (1.0 - frac) + at(k + 1.0) * frac
}
