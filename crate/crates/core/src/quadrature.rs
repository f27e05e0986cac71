//! Gauss–Kronrod panels and half-line oscillatory integration.
//!
//! Integrands are complex so that the imaginary residual of a folded
//! inversion integral is carried along with the real value.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

// 15-point Kronrod nodes (positive half, descending) and weights, with the
// embedded 7-point Gauss weights on the odd-indexed nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a quadrature with its error estimate and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: ZERO,
        error: 0.0,
        evaluations: 0,
    };

    fn add(&mut self, other: Estimate) {
        self.value += other.value;
        self.error += other.error;
        self.evaluations += other.evaluations;
    }
}

/// One 15-point Gauss–Kronrod panel with the QUADPACK error rescaling.
pub fn gk15<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, a: f64, b: f64) -> Estimate {
    gk15_floor(f, a, b).0
}

/// GK15 plus the roundoff floor `50·ε·∫|f|` below which refinement is futile.
fn gk15_floor<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, a: f64, b: f64) -> (Estimate, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = fc.norm() * WGK[7];
    let mut fv1 = [ZERO; 7];
    let mut fv2 = [ZERO; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
        res_abs += WGK[j] * (f1.norm() + f2.norm());
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let h = half.abs();
    res_abs *= h;
    res_asc *= h;
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(floor);
    }
    let est = Estimate {
        value: kron * half,
        error: err,
        evaluations: 15,
    };
    (est, floor)
}

/// The 15 Kronrod nodes and weights mapped to `[a, b]`.
pub fn kronrod_rule(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    (0..7)
        .flat_map(move |j| [(c - h * XGK[j], h * WGK[j]), (c + h * XGK[j], h * WGK[j])])
        .chain(std::iter::once((c, h * WGK[7])))
}

/// GK15 with recursive bisection until the panel error is below `tol`.
pub fn adaptive<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: u32,
) -> Estimate {
    let (est, floor) = gk15_floor(f, a, b);
    if est.error <= tol.max(4.0 * floor) || depth == 0 {
        return est;
    }
    let m = 0.5 * (a + b);
    let mut left = adaptive(f, a, m, 0.5 * tol, depth - 1);
    let right = adaptive(f, m, b, 0.5 * tol, depth - 1);
    left.add(right);
    left
}

/// Number of geometric sub-panels on `[0, h]`.
const GRADED_LEVELS: i32 = 48;

/// Integral over `[0, h]` on panels `[h·2^{-k-1}, h·2^{-k}]`, which resolves
/// algebraic cusps and `cos(β ln τ)` oscillation at the origin.
pub fn graded_start<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    h: f64,
    tol: f64,
    depth: u32,
) -> Estimate {
    let mut total = gk15(f, 0.0, h * 2f64.powi(-GRADED_LEVELS));
    let per = tol / GRADED_LEVELS as f64;
    for k in (0..GRADED_LEVELS).rev() {
        let lo = h * 2f64.powi(-k - 1);
        let hi = h * 2f64.powi(-k);
        total.add(adaptive(f, lo, hi, per, depth));
    }
    total
}

/// Uniform panels of length about `h` on `[a, b]`; `tol` is spread in
/// proportion to panel length.
pub fn panels<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    a: f64,
    b: f64,
    h: f64,
    tol: f64,
    depth: u32,
) -> Estimate {
    let mut total = Estimate::ZERO;
    if !(b > a) {
        return total;
    }
    let n = ((b - a) / h).ceil().max(1.0) as usize;
    let step = (b - a) / n as f64;
    let per = tol / n as f64;
    for k in 0..n {
        let lo = a + step * k as f64;
        let hi = if k + 1 == n { b } else { lo + step };
        total.add(adaptive(f, lo, hi, per, depth));
    }
    total
}

/// Limit of an alternating sequence of partial sums by repeated averaging of
/// neighbours. The error estimate compares against the same extrapolation
/// with the first partial sum dropped.
pub fn repeated_average(partials: &[Complex64]) -> (Complex64, f64) {
    fn collapse(s: &[Complex64]) -> Complex64 {
        let mut s = s.to_vec();
        while s.len() > 1 {
            s = s.windows(2).map(|w| (w[0] + w[1]) * 0.5).collect();
        }
        s.first().copied().unwrap_or(ZERO)
    }
    let full = collapse(partials);
    let change = if partials.len() > 2 {
        (full - collapse(&partials[1..])).norm()
    } else {
        f64::INFINITY
    };
    (full, change)
}

/// How the half-line `[0, ∞)` is cut off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    /// Plain truncation at `end`.
    Truncate { end: f64 },
    /// Integrate to `start`, then add `count` half-periods of length
    /// `half_period` and extrapolate the partial sums by repeated averaging.
    Accelerate {
        start: f64,
        half_period: f64,
        count: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HalfLine {
    /// Panel length on the main range.
    pub h: f64,
    /// `(switch, h)` pairs with increasing `switch`: beyond each switch the
    /// paired panel length is used.
    pub far: Vec<(f64, f64)>,
    pub tail: Tail,
    pub tol: f64,
    pub depth: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
    /// Upper end of the range actually integrated.
    pub end: f64,
}

/// Integral of `f` over `[0, ∞)` following `plan`.
pub fn half_line<F: Fn(f64) -> Complex64 + ?Sized>(f: &F, plan: &HalfLine) -> HalfLineResult {
    let main_end = match plan.tail {
        Tail::Truncate { end } => end,
        Tail::Accelerate { start, .. } => start,
    };
    let h = plan.h.min(main_end);
    let span = main_end.max(h);
    let mut total = graded_start(f, h, plan.tol * h / span, plan.depth);
    let rest = plan.tol * (1.0 - h / span);
    let mut edges = vec![(h, plan.h)];
    edges.extend(plan.far.iter().copied().filter(|&(sw, _)| sw > h && sw < main_end));
    edges.push((main_end, 0.0));
    let mut h_last = plan.h;
    for w in edges.windows(2) {
        let ((a, step), (b, _)) = (w[0], w[1]);
        total.add(panels(f, a, b, step, rest * (b - a) / span, plan.depth));
        h_last = step;
    }

    match plan.tail {
        Tail::Truncate { end } => HalfLineResult {
            value: total.value,
            error: total.error,
            evaluations: total.evaluations,
            end,
        },
        Tail::Accelerate {
            start,
            half_period,
            count,
        } => {
            let stride = (half_period / h_last).ceil().max(1.0);
            let sub = half_period / stride;
            let mut partials = Vec::with_capacity(count + 1);
            let mut running = total.value;
            partials.push(running);
            let mut evals = total.evaluations;
            let mut err = total.error;
            for j in 0..count {
                let a = start + half_period * j as f64;
                let est = panels(f, a, a + half_period, sub, plan.tol / count as f64, plan.depth);
                running += est.value;
                evals += est.evaluations;
                err += est.error;
                partials.push(running);
            }
            let (value, change) = repeated_average(&partials);
            HalfLineResult {
                value,
                error: err + change,
                evaluations: evals,
                end: start + half_period * count as f64,
            }
        }
    }
}

/// Smallest `τ` (up to bisection accuracy) in `[lo, cap]` with
/// `bound(τ) ≤ tol`, found by doubling then bisecting. `Err` carries the
/// bound at `cap` when it never drops below `tol`.
pub fn cutoff<B: Fn(f64) -> f64>(bound: B, tol: f64, lo: f64, cap: f64) -> Result<f64, f64> {
    let mut prev = lo;
    let mut cur = lo;
    loop {
        if bound(cur) <= tol {
            break;
        }
        if cur >= cap {
            return Err(bound(cap));
        }
        prev = cur;
        cur = (cur * 2.0).min(cap);
    }
    if cur == lo {
        return Ok(lo);
    }
    let (mut a, mut b) = (prev, cur);
    for _ in 0..40 {
        if b - a <= 1e-3 * b {
            break;
        }
        let m = 0.5 * (a + b);
        if bound(m) <= tol {
            b = m;
        } else {
            a = m;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn re(f: impl Fn(f64) -> f64) -> impl Fn(f64) -> Complex64 {
        move |x| Complex64::new(f(x), 0.0)
    }

    #[test]
    fn gk15_exact_for_polynomials() {
        let e = gk15(&re(|x| x.powi(20) - 3.0 * x.powi(7)), -1.0, 2.0);
        let want = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!((e.value.re - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn adaptive_handles_sqrt_cusp() {
        let e = graded_start(&re(|x: f64| x.sqrt()), 1.0, 1e-12, 10);
        assert!((e.value.re - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_truncated() {
        // ∫₀^∞ e^{-τ} cos(3τ) dτ = 1/10
        let f = re(|t: f64| (-t).exp() * (3.0 * t).cos());
        let plan = HalfLine {
            h: PI / 3.0,
            far: Vec::new(),
            tail: Tail::Truncate { end: 40.0 },
            tol: 1e-13,
            depth: 8,
        };
        let r = half_line(&f, &plan);
        assert!((r.value.re - 0.1).abs() < 1e-12, "{}", r.value.re);
    }

    #[test]
    fn dirichlet_integral_accelerated() {
        // ∫₀^∞ sin(2τ)/τ dτ = π/2
        let f = re(|t: f64| if t == 0.0 { 2.0 } else { (2.0 * t).sin() / t });
        let plan = HalfLine {
            h: PI / 4.0,
            far: Vec::new(),
            tail: Tail::Accelerate {
                start: 100.0,
                half_period: PI / 2.0,
                count: 16,
            },
            tol: 1e-13,
            depth: 8,
        };
        let r = half_line(&f, &plan);
        assert!((r.value.re - PI / 2.0).abs() < 1e-10, "{}", r.value.re - PI / 2.0);
    }

    #[test]
    fn repeated_average_of_alternating_series() {
        // partial sums of ln 2 = 1 − 1/2 + 1/3 − …
        let mut s = 0.0;
        let partials: Vec<Complex64> = (1..=40)
            .map(|k| {
                s += if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
                Complex64::new(s, 0.0)
            })
            .collect();
        let (v, err) = repeated_average(&partials[20..]);
        assert!((v.re - 2f64.ln()).abs() < 1e-14);
        assert!(err < 1e-12);
    }

    #[test]
    fn cutoff_bisects() {
        let t = cutoff(|x| (-x).exp(), 1e-6, 1.0, 1e3).unwrap();
        assert!((t - 1e6f64.ln()).abs() < 0.02);
        assert!(cutoff(|x| 1.0 / x, 1e-6, 1.0, 1e3).is_err());
    }
}
