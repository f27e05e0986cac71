//! Transfer functions of the constitutive law, the complex modulus `Ê(ω)`,
//! the wave function `M(s) = √(Q̃(s)/P̃(s))`, and an argument-principle
//! certificate that `P̃` has no zeros in the right half-plane.
//!
//! Two evaluation paths are kept on purpose. The generic path raises `s` to
//! complex powers through the principal logarithm; the imaginary-axis path
//! uses the trigonometric–hyperbolic expansion. They must agree, and the tests
//! check that they do.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::MaterialParams;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Below this magnitude a transfer function is treated as vanishing.
const SINGULAR_TOL: f64 = 1e-12;

/// `cos τ·cos(αφ)·cosh(βφ) + sin τ·sin(αφ)·sinh(βφ)`
pub fn f_func(tau: f64, phi: f64, alpha: f64, beta: f64) -> f64 {
    let (st, ct) = tau.sin_cos();
    let (sa, ca) = (alpha * phi).sin_cos();
    ct * ca * (beta * phi).cosh() + st * sa * (beta * phi).sinh()
}

/// `cos τ·sin(αφ)·cosh(βφ) − sin τ·cos(αφ)·sinh(βφ)`
pub fn g_func(tau: f64, phi: f64, alpha: f64, beta: f64) -> f64 {
    let (st, ct) = tau.sin_cos();
    let (sa, ca) = (alpha * phi).sin_cos();
    ct * sa * (beta * phi).cosh() - st * ca * (beta * phi).sinh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExtremalValues {
    pub f_max: f64,
    pub f_min: f64,
    pub g_max: f64,
    pub g_min: f64,
    /// Maximizer in `(0, π/2)` and minimizer in `(π, 3π/2)` of `f(·, φ)`.
    pub tau_f_roots: [f64; 2],
    /// Minimizer in `(π/2, π)` and maximizer in `(3π/2, 2π)` of `g(·, φ)`.
    pub tau_g_roots: [f64; 2],
}

/// Extrema of `f(·, φ)` and `g(·, φ)` over a period.
///
/// `f = A cos τ + B sin τ` and `g = C cos τ − D sin τ` with nonnegative
/// amplitudes, so each extremum is a Euclidean norm and the extremal points are
/// the two solutions of `tg τ = B/A` (resp. `tg τ = −D/C`) in `[0, 2π)`.
pub fn extremal_values(alpha: f64, beta: f64, phi: f64) -> Result<ExtremalValues> {
    if !(phi > 0.0 && phi <= FRAC_PI_2) {
        return Err(Error::Domain(format!("phi must lie in (0, pi/2], got {phi}")));
    }
    let (sa, ca) = (alpha * phi).sin_cos();
    let (ch, sh) = ((beta * phi).cosh(), (beta * phi).sinh());
    let (a, b) = (ca * ch, sa * sh);
    let (c, d) = (sa * ch, ca * sh);

    let f_max = a.hypot(b);
    let g_max = c.hypot(d);
    let tau_f1 = b.atan2(a);
    let tau_g_max = (-d).atan2(c) + 2.0 * PI;
    Ok(ExtremalValues {
        f_max,
        f_min: -f_max,
        g_max,
        g_min: -g_max,
        tau_f_roots: [tau_f1, tau_f1 + PI],
        tau_g_roots: [tau_g_max - PI, tau_g_max],
    })
}

/// `1 + a·s^α + b·(s^{α+iβ} + s^{α−iβ})` on the principal branch.
fn transfer(s: Complex64, a: f64, b: f64, alpha: f64, beta: f64) -> Complex64 {
    if s == Complex64::new(0.0, 0.0) {
        return ONE;
    }
    let ln_s = s.ln();
    let pow_alpha = (ln_s * alpha).exp();
    let rot = (ln_s * Complex64::new(0.0, beta)).exp();
    let rot_inv = (ln_s * Complex64::new(0.0, -beta)).exp();
    ONE + pow_alpha * (a + b * (rot + rot_inv))
}

/// `(P̃(s), Q̃(s))` sharing one logarithm.
pub(crate) fn pq_tilde(s: Complex64, params: &MaterialParams) -> (Complex64, Complex64) {
    if s == Complex64::new(0.0, 0.0) {
        return (ONE, ONE);
    }
    let ln_s = s.ln();
    let pow_alpha = (ln_s * params.alpha).exp();
    let osc = (ln_s * Complex64::new(0.0, params.beta)).exp()
        + (ln_s * Complex64::new(0.0, -params.beta)).exp();
    (
        ONE + pow_alpha * (params.a2 + params.b2 * osc),
        ONE + pow_alpha * (params.a1 + params.b1 * osc),
    )
}

/// `M(s)` on the generic path without the singularity check.
#[inline]
pub(crate) fn m_unchecked(s: Complex64, params: &MaterialParams) -> Complex64 {
    let (p, q) = pq_tilde(s, params);
    (q / p).sqrt()
}

/// `P̃(s) = 1 + a₂s^α + b₂(s^{α+iβ} + s^{α−iβ})`.
pub fn p_tilde(s: Complex64, params: &MaterialParams) -> Complex64 {
    transfer(s, params.a2, params.b2, params.alpha, params.beta)
}

/// `Q̃(s) = 1 + a₁s^α + b₁(s^{α+iβ} + s^{α−iβ})`.
pub fn q_tilde(s: Complex64, params: &MaterialParams) -> Complex64 {
    transfer(s, params.a1, params.b1, params.alpha, params.beta)
}

/// Cached constants for evaluating on the imaginary axis `s = iω`.
#[derive(Debug, Clone, Copy)]
pub struct ImagAxis {
    params: MaterialParams,
    rot_alpha: Complex64,
    cosh_c: f64,
    sinh_c: f64,
}

impl ImagAxis {
    pub fn new(params: &MaterialParams) -> Self {
        let c = params.beta * FRAC_PI_2;
        Self {
            params: *params,
            rot_alpha: Complex64::from_polar(1.0, params.alpha * FRAC_PI_2),
            cosh_c: c.cosh(),
            sinh_c: c.sinh(),
        }
    }

    /// `(P̂(ω), Q̂(ω))` for any real `ω`; negative `ω` uses conjugate symmetry.
    pub fn pq(&self, omega: f64) -> (Complex64, Complex64) {
        if omega == 0.0 {
            return (ONE, ONE);
        }
        let w = omega.abs();
        let p = &self.params;
        let (st, ct) = (p.beta * w.ln()).sin_cos();
        let osc = Complex64::new(self.cosh_c * ct, -self.sinh_c * st) * 2.0;
        let base = self.rot_alpha * w.powf(p.alpha);
        let ph = ONE + base * (p.a2 + p.b2 * osc);
        let qh = ONE + base * (p.a1 + p.b1 * osc);
        if omega < 0.0 {
            (ph.conj(), qh.conj())
        } else {
            (ph, qh)
        }
    }

    /// `M(iω)`, principal root.
    pub fn m(&self, omega: f64) -> Result<Complex64> {
        let (p, q) = self.pq(omega);
        if p.norm() < SINGULAR_TOL {
            return Err(Error::Singular {
                which: "P",
                s: Complex64::new(0.0, omega),
                magnitude: p.norm(),
            });
        }
        Ok((q / p).sqrt())
    }

    /// `M(iω)` without the singularity check, for inner quadrature loops where
    /// the parameters have already been validated.
    #[inline]
    pub(crate) fn m_unchecked(&self, omega: f64) -> Complex64 {
        let (p, q) = self.pq(omega);
        (q / p).sqrt()
    }
}

/// `P̂(ω) = P̃(iω)` via the trigonometric expansion. `ω = 0` gives exactly 1.
pub fn p_hat(omega: f64, params: &MaterialParams) -> Complex64 {
    ImagAxis::new(params).pq(omega).0
}

/// `Q̂(ω) = Q̃(iω)` via the trigonometric expansion.
pub fn q_hat(omega: f64, params: &MaterialParams) -> Complex64 {
    ImagAxis::new(params).pq(omega).1
}

/// Complex modulus `Ê(ω) = P̂(ω)/Q̂(ω)`.
pub fn e_hat(omega: f64, params: &MaterialParams) -> Result<Complex64> {
    if omega < 0.0 {
        return Err(Error::Domain(format!("omega must be nonnegative, got {omega}")));
    }
    let (p, q) = ImagAxis::new(params).pq(omega);
    if q.norm() < SINGULAR_TOL {
        return Err(Error::Singular {
            which: "Q",
            s: Complex64::new(0.0, omega),
            magnitude: q.norm(),
        });
    }
    Ok(p / q)
}

/// Pieces of `Ê = (1 + B + C + i·N)/D` written through `f` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EHatTerms {
    pub b: f64,
    /// `ρ^{2α}[a₁a₂ + 2(a₂b₁ + a₁b₂)cos θ cosh βφ + 4b₁b₂(f² + g²)]`.
    pub c: f64,
    /// Same with `4a₁b₂` in place of `2(a₂b₁ + a₁b₂)`; equal to `c` when
    /// `a₂b₁ = a₁b₂`.
    pub c_alt: f64,
    /// `|Q̂|²`.
    pub d: f64,
    /// `Im(P̂·conj Q̂)`.
    pub numerator_im: f64,
}

impl EHatTerms {
    pub fn e_hat(&self) -> Complex64 {
        Complex64::new(1.0 + self.b + self.c, self.numerator_im) / self.d
    }
}

/// Real/imaginary decomposition of `Ê(ω)` at `φ = π/2`, `θ = β ln ω`.
pub fn e_hat_terms(omega: f64, params: &MaterialParams) -> Result<EHatTerms> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("omega must be positive, got {omega}")));
    }
    let p = params;
    let phi = FRAC_PI_2;
    let theta = p.beta * omega.ln();
    let rho_a = omega.powf(p.alpha);
    let f = f_func(theta, phi, p.alpha, p.beta);
    let g = g_func(theta, phi, p.alpha, p.beta);
    let (sa, ca) = (p.alpha * phi).sin_cos();
    let (ch, sh) = ((p.beta * phi).cosh(), (p.beta * phi).sinh());
    let (st, ct) = theta.sin_cos();

    let b = rho_a * ((p.a1 + p.a2) * ca + 2.0 * (p.b1 + p.b2) * f);
    let common = p.a1 * p.a2 + 4.0 * p.b1 * p.b2 * (f * f + g * g);
    let c = rho_a * rho_a * (common + 2.0 * (p.a2 * p.b1 + p.a1 * p.b2) * ct * ch);
    let c_alt = rho_a * rho_a * (common + 4.0 * p.a1 * p.b2 * ct * ch);
    let re_q = 1.0 + rho_a * (p.a1 * ca + 2.0 * p.b1 * f);
    let im_q = rho_a * (p.a1 * sa + 2.0 * p.b1 * g);
    let numerator_im = rho_a * ((p.a2 - p.a1) * sa + 2.0 * (p.b2 - p.b1) * g)
        + rho_a * rho_a * 2.0 * (p.a2 * p.b1 - p.a1 * p.b2) * st * sh;
    Ok(EHatTerms {
        b,
        c,
        c_alt,
        d: re_q * re_q + im_q * im_q,
        numerator_im,
    })
}

/// `M²(s) = Q̃(s)/P̃(s)`.
pub fn m_squared(s: Complex64, params: &MaterialParams) -> Result<Complex64> {
    if s.re < 0.0 {
        return Err(Error::Domain(format!("Re s must be nonnegative, got {s}")));
    }
    if s == Complex64::new(0.0, 0.0) {
        return Ok(ONE);
    }
    let p = p_tilde(s, params);
    if p.norm() < SINGULAR_TOL {
        return Err(Error::Singular {
            which: "P",
            s,
            magnitude: p.norm(),
        });
    }
    Ok(q_tilde(s, params) / p)
}

/// Principal square root of `M²(s)`, so `Re M ≥ 0`; `M(0) = 1`.
pub fn m_from_s(s: Complex64, params: &MaterialParams) -> Result<Complex64> {
    m_squared(s, params).map(|m2| m2.sqrt())
}

/// Sampled complex modulus and wave function along the imaginary axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyResponse {
    pub omegas: Vec<f64>,
    pub e_hat: Vec<Complex64>,
    /// `Re Ê`.
    pub storage: Vec<f64>,
    /// `Im Ê`.
    pub loss: Vec<f64>,
    /// `M(iω)`.
    pub m: Vec<Complex64>,
}

pub fn frequency_response(omegas: &[f64], params: &MaterialParams) -> Result<FrequencyResponse> {
    if let Some(w) = omegas.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::Domain(format!(
            "omegas must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if omegas.first().is_some_and(|&w| !(w > 0.0)) {
        return Err(Error::Domain("omegas must be positive".into()));
    }
    let axis = ImagAxis::new(params);
    let mut e = Vec::with_capacity(omegas.len());
    let mut m = Vec::with_capacity(omegas.len());
    for &w in omegas {
        e.push(e_hat(w, params)?);
        m.push(axis.m(w)?);
    }
    Ok(FrequencyResponse {
        omegas: omegas.to_vec(),
        storage: e.iter().map(|z| z.re).collect(),
        loss: e.iter().map(|z| z.im).collect(),
        e_hat: e,
        m,
    })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (l0, l1) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        lo
                    } else if k + 1 == n {
                        hi
                    } else {
                        (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Least-squares slope of `ln|Im M²(iτ)|` against `ln τ` on a log grid.
///
/// Returns `None` when `Im M²` vanishes identically (elastic parameters).
pub fn im_m2_decay_exponent(
    params: &MaterialParams,
    tau_lo: f64,
    tau_hi: f64,
    n: usize,
) -> Result<Option<f64>> {
    if !(tau_lo > 0.0 && tau_hi > tau_lo && n >= 2) {
        return Err(Error::Domain(format!(
            "need 0 < tau_lo < tau_hi and n >= 2, got [{tau_lo}, {tau_hi}], n = {n}"
        )));
    }
    if params.is_elastic_degenerate() {
        return Ok(None);
    }
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for tau in log_grid(tau_lo, tau_hi, n) {
        let im = m_squared(Complex64::new(0.0, tau), params)?.im;
        if im == 0.0 {
            return Ok(None);
        }
        xs.push(tau.ln());
        ys.push(im.abs().ln());
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(Some(sxy / sxx))
}

/// Result of the argument-principle count on the quarter annulus
/// `ε ≤ |s| ≤ R`, `0 ≤ arg s ≤ π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingCertificate {
    /// Zeros of `P̃` in the right half-plane annulus: twice the quadrant count,
    /// by conjugate symmetry.
    pub winding: i64,
    /// Winding of `P̃` around the first-quadrant contour.
    pub quadrant_winding: i64,
    /// Quadrant winding before rounding.
    pub raw_turns: f64,
    pub epsilon: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Total number of evaluations, refinements included.
    pub samples: usize,
    #[serde(rename = "min_abs_P")]
    pub min_abs_p: f64,
}

struct ArgTracker<'a> {
    params: &'a MaterialParams,
    total: f64,
    samples: usize,
    min_abs: f64,
}

const ON_CONTOUR_TOL: f64 = 1e-9;
const MAX_BISECT: u32 = 20;

impl ArgTracker<'_> {
    fn eval(&mut self, s: Complex64) -> Result<Complex64> {
        let p = p_tilde(s, self.params);
        let a = p.norm();
        self.samples += 1;
        self.min_abs = self.min_abs.min(a);
        if a < ON_CONTOUR_TOL {
            return Err(Error::OnContourZero { s, magnitude: a });
        }
        Ok(p)
    }

    /// Adds the argument change of `P̃` from `path(u0)` to `path(u1)`.
    fn step(
        &mut self,
        path: &dyn Fn(f64) -> Complex64,
        u0: f64,
        p0: Complex64,
        u1: f64,
        p1: Complex64,
        depth: u32,
    ) -> Result<()> {
        let d = (p1 / p0).arg();
        if d.abs() <= FRAC_PI_2 || depth >= MAX_BISECT {
            self.total += d;
            return Ok(());
        }
        let um = 0.5 * (u0 + u1);
        let pm = self.eval(path(um))?;
        self.step(path, u0, p0, um, pm, depth + 1)?;
        self.step(path, um, pm, u1, p1, depth + 1)
    }

    fn piece(&mut self, path: &dyn Fn(f64) -> Complex64, n: usize) -> Result<()> {
        let mut u0 = 0.0;
        let mut p0 = self.eval(path(0.0))?;
        for k in 1..=n {
            let u1 = k as f64 / n as f64;
            let p1 = self.eval(path(u1))?;
            self.step(path, u0, p0, u1, p1, 0)?;
            u0 = u1;
            p0 = p1;
        }
        Ok(())
    }
}

/// Counts zeros of `P̃` in the right half-plane annulus `ε < |s| < R` by the
/// argument principle. Radial pieces are sampled geometrically, arcs uniformly
/// in angle; steps with `|Δ arg| > π/2` are bisected.
pub fn winding_number(
    params: &MaterialParams,
    epsilon: f64,
    r: f64,
    n_samples: usize,
) -> Result<WindingCertificate> {
    if !(epsilon > 0.0 && epsilon < 1.0 && r > 1.0 && n_samples >= 1) {
        return Err(Error::Domain(format!(
            "need 0 < epsilon < 1 < R and n_samples >= 1, got epsilon = {epsilon}, R = {r}"
        )));
    }
    let mut tr = ArgTracker {
        params,
        total: 0.0,
        samples: 0,
        min_abs: f64::INFINITY,
    };
    let ratio = (r / epsilon).ln();
    let i = Complex64::new(0.0, 1.0);
    // real segment ε → R
    tr.piece(&|u| Complex64::new(epsilon * (ratio * u).exp(), 0.0), n_samples)?;
    // outer arc 0 → π/2
    tr.piece(&|u| Complex64::from_polar(r, FRAC_PI_2 * u), n_samples)?;
    // imaginary segment iR → iε
    tr.piece(&|u| i * (r * (-ratio * u).exp()), n_samples)?;
    // inner arc π/2 → 0
    tr.piece(
        &|u| Complex64::from_polar(epsilon, FRAC_PI_2 * (1.0 - u)),
        n_samples,
    )?;

    let raw = tr.total / (2.0 * PI);
    let rounded = raw.round();
    if (raw - rounded).abs() > 1e-3 {
        return Err(Error::Domain(format!(
            "winding {raw} is not within 1e-3 of an integer; increase n_samples"
        )));
    }
    let quadrant = rounded as i64;
    Ok(WindingCertificate {
        winding: 2 * quadrant,
        quadrant_winding: quadrant,
        raw_turns: raw,
        epsilon,
        r,
        samples: tr.samples,
        min_abs_p: tr.min_abs,
    })
}
