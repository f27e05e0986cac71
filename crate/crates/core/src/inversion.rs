//! Numerical inversion of the Laplace-domain solution: the relaxation kernel,
//! the infinite-rod kernel by a half-line integral along the imaginary axis,
//! and the finite-rod kernel by quadrature along a Bromwich line.
//!
//! Every inversion integrates the pair `F(s)e^{st} + F(s̄)e^{s̄t}` with both
//! terms evaluated independently, so the imaginary part of the result is a
//! measured residual rather than an assumption.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modulus::{self, ImagAxis};
use crate::params::{MaterialParams, RodLength};
use crate::quadrature::{self, HalfLine, HalfLineResult, Tail};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Half-periods used by the extrapolated tail.
const TAIL_HALF_PERIODS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Hard upper limit for the frequency variable on the imaginary axis.
    pub tau_max_cap: f64,
    /// Upper limit on the number of main-range panels.
    pub panel_max: usize,
    /// Panels per half-period of the fastest expected oscillation.
    pub panel_density: f64,
    /// Bromwich abscissa; `None` means `1/max(t, 1)`, or `1/t` for the
    /// relaxation kernel.
    pub bromwich_s0: Option<f64>,
    pub bromwich_p_max: f64,
    pub refine_depth: u32,
    /// Evaluate `F(s̄)` through the generic complex-power path instead of
    /// conjugating `F(s)`, which makes the imaginary residual meaningful.
    pub track_imag_residual: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            tau_max_cap: 4e6,
            panel_max: 2_000_000,
            panel_density: 1.0,
            bromwich_s0: None,
            bromwich_p_max: 4e6,
            refine_depth: 8,
            track_imag_residual: true,
        }
    }
}

impl QuadratureConfig {
    pub fn check(&self) -> Result<()> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol > 0.0
            && self.tau_max_cap >= 1e2
            && self.panel_max >= 1
            && self.panel_density > 0.0
            && self.bromwich_s0.is_none_or(|s| s > 0.0)
            && self.bromwich_p_max > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("invalid quadrature config {self:?}")))
        }
    }

    /// Same settings with twice the panel density and twice the frequency caps.
    pub fn doubled(&self) -> Self {
        Self {
            panel_density: 2.0 * self.panel_density,
            panel_max: 2 * self.panel_max,
            tau_max_cap: 2.0 * self.tau_max_cap,
            bromwich_p_max: 2.0 * self.bromwich_p_max,
            ..*self
        }
    }

    fn s0(&self, t: f64) -> f64 {
        self.bromwich_s0.unwrap_or(1.0 / t.max(1.0))
    }
}

/// A numerically inverted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inversion {
    pub value: f64,
    /// Imaginary part left over after folding the conjugate pair.
    pub imag_residual: f64,
    /// Quadrature plus truncation error estimate.
    pub error: f64,
    /// Upper end of the frequency range integrated.
    pub cutoff: f64,
    pub evaluations: usize,
}

impl Inversion {
    pub(crate) fn exact(value: f64) -> Self {
        Self {
            value,
            imag_residual: 0.0,
            error: 0.0,
            cutoff: 0.0,
            evaluations: 0,
        }
    }

    fn from_half_line(r: HalfLineResult, offset: f64, scale: f64, tail_bound: f64) -> Self {
        Self {
            value: offset + scale * r.value.re,
            imag_residual: scale * r.value.im,
            error: scale * (r.error + tail_bound),
            cutoff: r.end,
            evaluations: r.evaluations,
        }
    }
}

/// A point on the time axis carrying a Dirac mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Impulse {
    pub time: f64,
    pub weight: f64,
}

/// Kernel value: an ordinary number, or (for elastic parameters) the Dirac
/// masses that arrive up to the requested time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum KernelValue {
    Regular(Inversion),
    Impulses(Vec<Impulse>),
}

impl KernelValue {
    pub fn regular(&self) -> Option<f64> {
        match self {
            KernelValue::Regular(inv) => Some(inv.value),
            KernelValue::Impulses(_) => None,
        }
    }

    pub fn inversion(&self) -> Option<&Inversion> {
        match self {
            KernelValue::Regular(inv) => Some(inv),
            KernelValue::Impulses(_) => None,
        }
    }
}

/// `L(t) = delta_weight·δ(t) + regular`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelaxationKernel {
    pub delta_weight: f64,
    pub regular: Inversion,
}

/// `M` at `s` and at `s̄`.
pub(crate) struct ConjPair<'a> {
    params: &'a MaterialParams,
    axis: ImagAxis,
    honest: bool,
}

impl<'a> ConjPair<'a> {
    pub(crate) fn new(params: &'a MaterialParams, cfg: &QuadratureConfig) -> Self {
        Self {
            params,
            axis: ImagAxis::new(params),
            honest: cfg.track_imag_residual,
        }
    }

    /// `(M(iτ), M(−iτ))`.
    #[inline]
    fn imag(&self, tau: f64) -> (Complex64, Complex64) {
        let m = self.axis.m_unchecked(tau);
        let mb = if self.honest {
            modulus::m_unchecked(Complex64::new(0.0, -tau), self.params)
        } else {
            m.conj()
        };
        (m, mb)
    }

    /// `(M(s), M(s̄))` for `s` off the imaginary axis.
    #[inline]
    pub(crate) fn line(&self, s: Complex64) -> (Complex64, Complex64) {
        let m = modulus::m_unchecked(s, self.params);
        let mb = if self.honest {
            modulus::m_unchecked(s.conj(), self.params)
        } else {
            m.conj()
        };
        (m, mb)
    }
}

pub(crate) fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {v}")))
    }
}

/// `−τ·Im M(iτ)`, the decay rate of the envelope per unit distance.
fn attenuation(axis: &ImagAxis, tau: f64) -> f64 {
    -tau * axis.m_unchecked(tau).im
}

/// Panel length for phase rates `|t − c·d|` with `c` between the low- and
/// high-frequency slownesses.
fn panel_length(t: f64, distances: &[f64], slowness_inf: f64, cfg: &QuadratureConfig) -> f64 {
    let rate = distances
        .iter()
        .flat_map(|&d| [(t - d).abs(), (t - slowness_inf * d).abs()])
        .fold(1.0, f64::max);
    PI / rate / cfg.panel_density
}

/// Distance needed for the envelope tail to fall below `tol` at `cap`:
/// solves `L = ln(cap/((1−α)·π·tol·L))` by fixed-point iteration.
fn required_attenuation(cap: f64, tol: f64, alpha: f64) -> f64 {
    let mut l = 30.0;
    for _ in 0..20 {
        l = (cap / ((1.0 - alpha) * PI * tol * l)).ln().max(1.0);
    }
    l
}

/// Infinite-rod kernel `K(x, t)`, the inverse transform of `e^{−sM(s)x}`:
///
/// ```text
/// K(x,t) = (1/π) ∫₀^∞ exp[τ Im M(iτ) x] cos[τ(t − Re M(iτ) x)] dτ
/// ```
///
/// The integral is truncated where the envelope tail bound drops below
/// `abs_tol`; if that happens only at very high frequency (small `x`), the
/// oscillatory tail is summed over half-periods and extrapolated instead.
/// Elastic parameters return the impulse `δ(t − x)`.
pub fn kernel_infinite(
    x: f64,
    t: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    check_positive("x", x)?;
    check_positive("t", t)?;
    cfg.check()?;
    if params.is_elastic_degenerate() {
        let arrivals = if x <= t {
            vec![Impulse { time: x, weight: 1.0 }]
        } else {
            Vec::new()
        };
        return Ok(KernelValue::Impulses(arrivals));
    }
    let pair = ConjPair::new(params, cfg);
    let alpha = params.alpha;
    let tol = cfg.abs_tol;
    let bound = |tau: f64| {
        let l = x * attenuation(&pair.axis, tau);
        if l <= 0.0 {
            return f64::INFINITY;
        }
        (-l).exp() * tau / ((1.0 - alpha) * l) / PI
    };
    let slow = params.slowness_at_infinity();
    let omega = (t - slow * x).abs();
    let tau_env = quadrature::cutoff(bound, tol, 1.0, cfg.tau_max_cap);
    let tau_osc = oscillatory_start(omega, tol);
    let f = |tau: f64| {
        let (m, mb) = pair.imag(tau);
        ((I * tau * (t - m * x)).exp() + (-I * tau * (t - mb * x)).exp()) / (2.0 * PI)
    };
    let (tail, tail_bound, main_end) = match tau_env {
        Ok(end) if end <= tau_osc => (Tail::Truncate { end }, bound(end), end),
        _ if tau_osc <= cfg.tau_max_cap => (
            Tail::Accelerate {
                start: tau_osc,
                half_period: PI / omega,
                count: TAIL_HALF_PERIODS,
            },
            0.0,
            tau_osc,
        ),
        _ => return Err(not_decayed(x, t, params, cfg, &pair.axis)),
    };
    let h = panel_length(t, &[x], slow, cfg).max(main_end / cfg.panel_max as f64);
    let plan = HalfLine {
        h,
        far: Vec::new(),
        tail,
        tol: 0.5 * tol,
        depth: cfg.refine_depth,
    };
    let r = quadrature::half_line(&f, &plan);
    Ok(KernelValue::Regular(Inversion::from_half_line(
        r, 0.0, 1.0, tail_bound,
    )))
}

/// Where an integrand oscillating at rate `omega` is handed to the
/// extrapolated tail; infinite at the wavefront.
fn oscillatory_start(omega: f64, tol: f64) -> f64 {
    if omega > 0.0 {
        (1.0 / (omega * tol.sqrt())).max(64.0 * PI / omega)
    } else {
        f64::INFINITY
    }
}

fn not_decayed(
    x: f64,
    t: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
    axis: &ImagAxis,
) -> Error {
    let cap = cfg.tau_max_cap;
    let rate = attenuation(axis, cap);
    let needed = required_attenuation(cap, cfg.abs_tol, params.alpha);
    Error::EnvelopeNotDecayed {
        x,
        t,
        cap,
        envelope: (-x * rate).exp(),
        x_min: if rate > 0.0 { needed / rate } else { f64::INFINITY },
    }
}

/// Step response of the infinite rod, `∫₀ᵗ K(x, θ) dθ`, written as
///
/// ```text
/// u(x,t) = ½ + (1/π) ∫₀^∞ exp[τ Im M(iτ) x] sin[τ(t − Re M(iτ) x)] / τ dτ,
/// ```
///
/// where the ½ is the value at `τ → 0` of the analytic continuation of
/// `e^{−sMx}`. At `x = 0` the result is exactly 1. When the envelope decays
/// too slowly (small `x`) the oscillatory tail is summed over half-periods
/// and extrapolated.
pub fn step_infinite(
    x: f64,
    t: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<Inversion> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
    }
    check_positive("t", t)?;
    cfg.check()?;
    if x == 0.0 {
        return Ok(Inversion::exact(1.0));
    }
    if params.is_elastic_degenerate() {
        let v = if t > x {
            1.0
        } else if t == x {
            0.5
        } else {
            0.0
        };
        return Ok(Inversion::exact(v));
    }
    let pair = ConjPair::new(params, cfg);
    let alpha = params.alpha;
    let tol = cfg.abs_tol;
    let bound = |tau: f64| {
        let l = x * attenuation(&pair.axis, tau);
        if l <= 0.0 {
            return f64::INFINITY;
        }
        (-l).exp() / ((1.0 - alpha) * l) / PI
    };
    let slow = params.slowness_at_infinity();
    let omega = (t - slow * x).abs();
    let tau_env = quadrature::cutoff(bound, tol, 1.0, cfg.tau_max_cap);
    let h0 = panel_length(t, &[x], slow, cfg);
    let tau_osc = oscillatory_start(omega, tol);

    let f = |tau: f64| {
        let (m, mb) = pair.imag(tau);
        ((I * tau * (t - m * x)).exp() - (-I * tau * (t - mb * x)).exp()) / (2.0 * PI * I * tau)
    };
    let (tail, tail_bound, main_end) = match tau_env {
        Ok(end) if end <= tau_osc => (Tail::Truncate { end }, bound(end), end),
        _ if tau_osc <= cfg.tau_max_cap => (
            Tail::Accelerate {
                start: tau_osc,
                half_period: PI / omega,
                count: TAIL_HALF_PERIODS,
            },
            0.0,
            tau_osc,
        ),
        _ => return Err(not_decayed(x, t, params, cfg, &pair.axis)),
    };
    let plan = HalfLine {
        h: h0.max(main_end / cfg.panel_max as f64),
        far: Vec::new(),
        tail,
        tol: 0.5 * tol,
        depth: cfg.refine_depth,
    };
    let r = quadrature::half_line(&f, &plan);
    Ok(Inversion::from_half_line(r, 0.5, 1.0, tail_bound))
}

/// Laplace transform of the kernel at `s`: `e^{−sMx}` for an infinite rod and
/// `[e^{−sMx} − e^{−sM(2l−x)}]/(1 − e^{−2sMl})` for a rod of length `l`
/// clamped at `x = l`.
pub fn kernel_transform(
    x: f64,
    s: Complex64,
    l: RodLength,
    params: &MaterialParams,
) -> Result<Complex64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("x must be nonnegative, got {x}")));
    }
    if s.re < 0.0 || s == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain(format!("need Re s >= 0 and s != 0, got {s}")));
    }
    if let RodLength::Finite(len) = l {
        if x > len {
            return Err(Error::Domain(format!("x = {x} lies beyond the rod end {len}")));
        }
    }
    if x == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let m = modulus::m_from_s(s, params)?;
    let bracket = finite_bracket(s * m, x, l);
    if !bracket.is_finite() {
        return Err(Error::Singular {
            which: "1 - exp(-2sMl)",
            s,
            magnitude: 0.0,
        });
    }
    Ok(bracket)
}

/// `e^{−zx}` or the clamped-end bracket, with `z = sM(s)`.
#[inline]
pub(crate) fn finite_bracket(z: Complex64, x: f64, l: RodLength) -> Complex64 {
    match l {
        RodLength::Infinite => (-z * x).exp(),
        RodLength::Finite(len) => {
            ((-z * x).exp() - (-z * (2.0 * len - x)).exp()) / (1.0 - (-z * (2.0 * len)).exp())
        }
    }
}

/// Inverse Laplace transform along `Re s = s0`, folded onto `p ≥ 0`:
/// `(e^{s0 t}/2π) ∫₀^∞ [G(s)e^{ipt} + G(s̄)e^{−ipt}] dp`, `s = s0 + ip`.
/// `pair(s)` returns `(G(s), G(s̄))`.
fn bromwich<G, B>(
    t: f64,
    s0: f64,
    pair: G,
    h: f64,
    far: Vec<(f64, f64)>,
    tail: BromwichTail<B>,
    cfg: &QuadratureConfig,
) -> Result<Inversion>
where
    G: Fn(Complex64) -> (Complex64, Complex64),
    B: Fn(f64) -> f64,
{
    let growth = (s0 * t).exp();
    let tol = cfg.abs_tol / growth;
    let (plan_tail, tail_bound, main_end) = match tail {
        BromwichTail::Envelope(bound) => {
            match quadrature::cutoff(&bound, tol, 1.0, cfg.bromwich_p_max) {
                Ok(end) => (Tail::Truncate { end }, bound(end), end),
                Err(at_cap) => {
                    return Err(Error::BromwichNotConverged {
                        t,
                        tail: at_cap * growth,
                        tol: cfg.abs_tol,
                    })
                }
            }
        }
        BromwichTail::Oscillatory => {
            let start = (1.0 / (t * tol.sqrt()))
                .max(64.0 * PI / t)
                .min(h * cfg.panel_max as f64)
                .min(cfg.bromwich_p_max);
            (
                Tail::Accelerate {
                    start,
                    half_period: PI / t,
                    count: TAIL_HALF_PERIODS,
                },
                0.0,
                start,
            )
        }
    };
    let f = |p: f64| {
        let s = Complex64::new(s0, p);
        let (g, gb) = pair(s);
        (g * Complex64::from_polar(1.0, p * t) + gb * Complex64::from_polar(1.0, -p * t))
            / (2.0 * PI)
    };
    let plan = HalfLine {
        h: h.max(main_end / cfg.panel_max as f64),
        far: far
            .into_iter()
            .map(|(sw, hf)| (sw, hf.max(main_end / cfg.panel_max as f64)))
            .collect(),
        tail: plan_tail,
        tol: 0.5 * tol,
        depth: cfg.refine_depth,
    };
    let r = quadrature::half_line(&f, &plan);
    Ok(Inversion::from_half_line(r, 0.0, growth, tail_bound))
}

enum BromwichTail<B> {
    /// Truncate where this bound on the remaining integral drops below tolerance.
    Envelope(B),
    /// Algebraically decaying integrand oscillating like `e^{ipt}`.
    Oscillatory,
}

/// Arrival times and signs of the image series `δ(t − x) − δ(t − (2l − x)) + …`
/// for the clamped elastic rod.
pub(crate) fn elastic_images(x: f64, t: f64, l: f64) -> Vec<Impulse> {
    let mut out = Vec::new();
    let mut k = 0.0;
    loop {
        let fwd = x + 2.0 * l * k;
        let back = 2.0 * l * (k + 1.0) - x;
        if fwd > t {
            break;
        }
        out.push(Impulse { time: fwd, weight: 1.0 });
        if back <= t && back != fwd {
            out.push(Impulse { time: back, weight: -1.0 });
        }
        k += 1.0;
    }
    out
}

/// Travel distances `2kl ± x` of the images up to `reach`, always including `x`.
pub(crate) fn image_distances(x: f64, l: f64, reach: f64) -> Vec<f64> {
    let mut d = vec![x];
    let mut k = 1.0;
    while 2.0 * l * k - x <= reach {
        d.push(2.0 * l * k - x);
        d.push(2.0 * l * k + x);
        k += 1.0;
    }
    d
}

/// Panel lengths for the finite rod. Near the origin they resolve every image
/// that may have arrived by `t`; image `d` is dropped from the phase-rate
/// estimate once its extra damping `exp(−τ|Im M|(d − x))` is below tolerance.
fn finite_panels(
    x: f64,
    t: f64,
    l: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
    axis: &ImagAxis,
) -> (f64, Vec<(f64, f64)>) {
    let slow = params.slowness_at_infinity();
    let mut images = image_distances(x, l, 1.2 * t / slow + 1.0);
    images.sort_by(f64::total_cmp);
    let h_all = panel_length(t, &images, slow, cfg);
    let mut far = Vec::new();
    // drop the farthest image first; it is damped earliest
    for k in (1..images.len()).rev() {
        let extra = images[k] - x;
        let damped = |p: f64| (-attenuation(axis, p) * extra).exp();
        match quadrature::cutoff(damped, cfg.abs_tol, 1.0, cfg.bromwich_p_max) {
            Ok(switch) => far.push((switch, panel_length(t, &images[..k], slow, cfg))),
            Err(_) => break,
        }
    }
    // switches must increase; an image damped later than a farther one keeps
    // the shorter panels of the earlier segment
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (sw, h) in far {
        match out.last() {
            Some(&(prev, _)) if sw <= prev => {}
            _ => out.push((sw, h)),
        }
    }
    (h_all, out)
}

/// Finite-rod kernel by Bromwich quadrature of the clamped-end bracket.
/// At `x = l` the bracket vanishes identically. Elastic parameters return the
/// image series of Dirac masses.
pub fn kernel_finite(
    x: f64,
    t: f64,
    l: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<KernelValue> {
    check_positive("x", x)?;
    check_positive("t", t)?;
    check_positive("l", l)?;
    cfg.check()?;
    if x > l {
        return Err(Error::Domain(format!("x = {x} lies beyond the rod end {l}")));
    }
    if params.is_elastic_degenerate() {
        return Ok(KernelValue::Impulses(elastic_images(x, t, l)));
    }
    if x == l {
        // the two exponentials of the bracket coincide
        return Ok(KernelValue::Regular(Inversion::exact(0.0)));
    }
    let rod = RodLength::Finite(l);
    let pair = ConjPair::new(params, cfg);
    let s0 = cfg.s0(t);
    let alpha = params.alpha;
    let g = |s: Complex64| {
        let (m, mb) = pair.line(s);
        (finite_bracket(s * m, x, rod), finite_bracket(s.conj() * mb, x, rod))
    };
    let bound = |p: f64| {
        let s = Complex64::new(s0, p);
        let l_env = x * (s * modulus::m_unchecked(s, params)).re;
        if l_env <= 0.0 {
            return f64::INFINITY;
        }
        (-l_env).exp() * p / ((1.0 - alpha) * l_env) / PI
    };
    let (h, far) = finite_panels(x, t, l, params, cfg, &pair.axis);
    bromwich(t, s0, g, h, far, BromwichTail::Envelope(bound), cfg).map(KernelValue::Regular)
}

/// Step response of the clamped rod of length `l`, by Bromwich quadrature of
/// the bracket divided by `s`.
pub fn step_finite(
    x: f64,
    t: f64,
    l: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<Inversion> {
    if !(x >= 0.0 && x <= l) {
        return Err(Error::Domain(format!("x = {x} must lie in [0, {l}]")));
    }
    check_positive("t", t)?;
    check_positive("l", l)?;
    cfg.check()?;
    if x == 0.0 {
        return Ok(Inversion::exact(1.0));
    }
    if x == l {
        return Ok(Inversion::exact(0.0));
    }
    if params.is_elastic_degenerate() {
        let v = elastic_images(x, t, l)
            .iter()
            .map(|imp| if imp.time == t { 0.5 * imp.weight } else { imp.weight })
            .sum();
        return Ok(Inversion::exact(v));
    }
    let rod = RodLength::Finite(l);
    let pair = ConjPair::new(params, cfg);
    let s0 = cfg.s0(t);
    let alpha = params.alpha;
    let g = |s: Complex64| {
        let (m, mb) = pair.line(s);
        (
            finite_bracket(s * m, x, rod) / s,
            finite_bracket(s.conj() * mb, x, rod) / s.conj(),
        )
    };
    let bound = |p: f64| {
        let s = Complex64::new(s0, p);
        let l_env = x * (s * modulus::m_unchecked(s, params)).re;
        if l_env <= 0.0 {
            return f64::INFINITY;
        }
        (-l_env).exp() / ((1.0 - alpha) * l_env) / PI
    };
    let (h, far) = finite_panels(x, t, l, params, cfg, &pair.axis);
    bromwich(t, s0, g, h, far, BromwichTail::Envelope(bound), cfg)
}

/// Finite-rod kernel convolved with the Gaussian `exp(−t²/2σ²)/(σ√2π)`,
/// obtained by Bromwich quadrature of the bracket times `exp(σ²s²/2)`.
/// Defined for every admissible parameter set, elastic included.
pub fn kernel_finite_mollified(
    x: f64,
    t: f64,
    l: f64,
    sigma: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<Inversion> {
    check_positive("x", x)?;
    check_positive("t", t)?;
    check_positive("l", l)?;
    check_positive("sigma", sigma)?;
    cfg.check()?;
    if x > l {
        return Err(Error::Domain(format!("x = {x} lies beyond the rod end {l}")));
    }
    let rod = RodLength::Finite(l);
    let pair = ConjPair::new(params, cfg);
    let s0 = cfg.s0(t);
    let gauss = |s: Complex64| (s * s * (0.5 * sigma * sigma)).exp();
    let g = |s: Complex64| {
        let (m, mb) = pair.line(s);
        (
            finite_bracket(s * m, x, rod) * gauss(s),
            finite_bracket(s.conj() * mb, x, rod) * gauss(s.conj()),
        )
    };
    // |bracket| ≤ 2/(1 − e^{−2 s0 l}) on the line once Re(sM) ≥ s0·Re M
    let denom = (1.0 - (-2.0 * s0 * l * params.slowness_at_infinity()).exp()).max(1e-300);
    let bound = |p: f64| {
        let q = sigma * p;
        let tail = (0.5 * (sigma * s0).powi(2)).exp() * (-0.5 * q * q).exp() / (q * sigma);
        2.0 * tail / denom / PI
    };
    let slow = params.slowness_at_infinity();
    let h = panel_length(t, &image_distances(x, l, 1.2 * t / slow + 1.0), slow, cfg);
    bromwich(t, s0, g, h, Vec::new(), BromwichTail::Envelope(bound), cfg)
}

/// Relaxation kernel `L(t)`, the inverse transform of `P̃(s)/Q̃(s)`. The
/// transform tends to `a₂/a₁` at infinity, which becomes the weight of `δ(t)`;
/// the remainder is inverted on a Bromwich line.
pub fn relaxation_kernel(
    t: f64,
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<RelaxationKernel> {
    check_positive("t", t)?;
    cfg.check()?;
    if params.is_elastic_degenerate() {
        return Ok(RelaxationKernel {
            delta_weight: 1.0,
            regular: Inversion::exact(0.0),
        });
    }
    if params.a1 == 0.0 {
        return Err(Error::Domain(
            "a1 = 0: the transform ratio is unbounded and the kernel is a higher-order distribution"
                .into(),
        ));
    }
    let w = params.a2 / params.a1;
    let honest = cfg.track_imag_residual;
    let g = |s: Complex64| {
        let (p, q) = modulus::pq_tilde(s, params);
        let v = p / q - w;
        let vb = if honest {
            let (p, q) = modulus::pq_tilde(s.conj(), params);
            p / q - w
        } else {
            v.conj()
        };
        (v, vb)
    };
    // the transform has no length scale of its own at high frequency, so the
    // contour scales with 1/t at small times as well
    let s0 = cfg.bromwich_s0.unwrap_or(1.0 / t);
    let h = PI / t / cfg.panel_density;
    let regular = bromwich(t, s0, g, h, Vec::new(), BromwichTail::<fn(f64) -> f64>::Oscillatory, cfg)?;
    Ok(RelaxationKernel {
        delta_weight: w,
        regular,
    })
}

/// Sampled `K(x, t)` on a rectangular grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelGrid {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// `values[i][j] = K(xs[i], ts[j])`; zero where the kernel is impulsive.
    pub values: Vec<Vec<f64>>,
    /// Weight of `δ(t − x·slowness)` carried symbolically (elastic rods).
    pub delta_weight: f64,
    /// True when the values come from the closed form rather than quadrature.
    pub analytic: bool,
    /// Dirac masses per `x`, as `(x, time, weight)`.
    pub impulses: Vec<(f64, f64, f64)>,
    pub max_imag_residual: f64,
    pub max_error: f64,
    pub config_used: QuadratureConfig,
}

pub(crate) fn check_grid(name: &str, v: &[f64], allow_zero: bool) -> Result<()> {
    if v.is_empty() {
        return Err(Error::GridMismatch(format!("{name} grid is empty")));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::GridMismatch(format!("{name} grid must be strictly increasing")));
    }
    let lo = v[0];
    if !(lo > 0.0 || (allow_zero && lo == 0.0)) || !v[v.len() - 1].is_finite() {
        return Err(Error::GridMismatch(format!("{name} grid must be positive and finite")));
    }
    Ok(())
}

/// Kernel on `xs × ts` for the rod length stored in `params`.
pub fn kernel_grid(
    xs: &[f64],
    ts: &[f64],
    params: &MaterialParams,
    cfg: &QuadratureConfig,
) -> Result<KernelGrid> {
    check_grid("x", xs, false)?;
    check_grid("t", ts, false)?;
    cfg.check()?;
    let cells: Vec<(usize, usize)> = (0..xs.len())
        .flat_map(|i| (0..ts.len()).map(move |j| (i, j)))
        .collect();
    let eval = |&(i, j): &(usize, usize)| {
        let (x, t) = (xs[i], ts[j]);
        let r = match params.rod_length {
            RodLength::Infinite => kernel_infinite(x, t, params, cfg),
            RodLength::Finite(l) => kernel_finite(x, t, l, params, cfg),
        };
        r.map_err(|e| Error::Cell {
            x,
            t,
            source: Box::new(e),
        })
    };
    let results: Vec<KernelValue> = cells.par_iter().map(eval).collect::<Result<_>>()?;

    let mut values = vec![vec![0.0; ts.len()]; xs.len()];
    let mut impulses = Vec::new();
    let mut max_imag: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    for (&(i, j), v) in cells.iter().zip(&results) {
        match v {
            KernelValue::Regular(inv) => {
                values[i][j] = inv.value;
                max_imag = max_imag.max(inv.imag_residual.abs());
                max_err = max_err.max(inv.error);
            }
            KernelValue::Impulses(list) if j + 1 == ts.len() => {
                impulses.extend(list.iter().map(|imp| (xs[i], imp.time, imp.weight)));
            }
            KernelValue::Impulses(_) => {}
        }
    }
    let analytic = params.is_elastic_degenerate();
    Ok(KernelGrid {
        xs: xs.to_vec(),
        ts: ts.to_vec(),
        values,
        delta_weight: if analytic { 1.0 } else { 0.0 },
        analytic,
        impulses,
        max_imag_residual: max_imag,
        max_error: max_err,
        config_used: *cfg,
    })
}
