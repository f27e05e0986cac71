#![allow(dead_code)]

use std::f64::consts::PI;

use zenerwave::{Complex64, MaterialParams, RodLength};

pub fn case_one() -> MaterialParams {
    MaterialParams::new(1.0, 20.0, 0.1, 2.0, 0.5, 0.1, RodLength::Infinite).unwrap()
}

pub fn elastic() -> MaterialParams {
    MaterialParams::new(1.0, 1.0, 0.1, 0.1, 0.5, 0.1, RodLength::Infinite).unwrap()
}

const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(z) by the Lanczos approximation (g = 7) with reflection.
pub fn gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return PI / ((z * PI).sin() * gamma(1.0 - z));
    }
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (k, c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (z + k as f64);
    }
    let t = z + 7.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * x
}

pub fn gamma_re(x: f64) -> f64 {
    gamma(Complex64::new(x, 0.0)).re
}

/// Two-parameter Mittag-Leffler function by its power series.
pub fn mittag_leffler(a: f64, b: f64, z: f64) -> f64 {
    let mut sum = 0.0;
    let mut pow = 1.0;
    for k in 0..400 {
        let term = pow / gamma_re(a * k as f64 + b);
        sum += term;
        if k > 10 && term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
        pow *= z;
    }
    sum
}

/// Nodes and weights of composite 5-point Gauss–Legendre on [a, b].
pub fn gauss_panels(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let x = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    let w = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let mid = a + h * (p as f64 + 0.5);
            x.iter().zip(w).map(move |(xi, wi)| (mid + 0.5 * h * xi, 0.5 * h * wi))
        })
        .collect()
}

/// Random parameters satisfying every restriction strictly: `b₂` is matched
/// to `b₁` and `b₁` stays below the tighter of the two restriction lines.
pub fn random_admissible<R: rand::Rng>(rng: &mut R) -> MaterialParams {
    use zenerwave::params::{restriction_rhs, RestrictionKind};
    let alpha = rng.gen_range(0.05..0.95);
    let beta = rng.gen_range(0.01..2.0);
    let a1 = 10f64.powf(rng.gen_range(-1.0..1.0));
    let a2 = a1 * rng.gen_range(1.05..30.0);
    let rhs = restriction_rhs(alpha, beta, RestrictionKind::Ctg)
        .unwrap()
        .max(restriction_rhs(alpha, beta, RestrictionKind::Tg).unwrap());
    let b1 = rng.gen_range(0.01..0.95) * a1 / rhs;
    MaterialParams::with_matched_b2(a1, a2, b1, alpha, beta, RodLength::Infinite).unwrap()
}

pub fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Zeros of `P̃` in the open right half-plane found by a polar grid scan of
/// `|P̃|` followed by Newton refinement.
pub fn p_zeros_right_half(params: &MaterialParams) -> Vec<Complex64> {
    use zenerwave::modulus::p_tilde;
    let dp = |s: Complex64| {
        let (a, b, be) = (params.alpha, params.b2, params.beta);
        let up = Complex64::new(a, be);
        let down = Complex64::new(a, -be);
        params.a2 * a * s.powf(a - 1.0) + b * (up * s.powc(up - 1.0) + down * s.powc(down - 1.0))
    };
    let (nr, na) = (400, 200);
    let radius = |i: usize| 10f64.powf(-3.0 + 6.0 * i as f64 / (nr - 1) as f64);
    let angle = |j: usize| -std::f64::consts::FRAC_PI_2 + PI * j as f64 / (na - 1) as f64;
    let grid: Vec<Vec<f64>> = (0..nr)
        .map(|i| {
            (0..na)
                .map(|j| p_tilde(Complex64::from_polar(radius(i), angle(j)), params).norm())
                .collect()
        })
        .collect();
    let mut found: Vec<Complex64> = Vec::new();
    for i in 1..nr - 1 {
        for j in 1..na - 1 {
            let v = grid[i][j];
            let local_min = (i - 1..=i + 1)
                .all(|a| (j - 1..=j + 1).all(|b| (a, b) == (i, j) || grid[a][b] > v));
            if !local_min {
                continue;
            }
            let mut s = Complex64::from_polar(radius(i), angle(j));
            for _ in 0..60 {
                let step = p_tilde(s, params) / dp(s);
                s -= step;
                if step.norm() < 1e-15 * s.norm() {
                    break;
                }
            }
            if s.re > 1e-9 && p_tilde(s, params).norm() < 1e-10 && found.iter().all(|z| (z - s).norm() > 1e-6) {
                found.push(s);
            }
        }
    }
    found
}

/// Extremum over one period `[0, 2π)`: the best of `n` grid points,
/// refined by golden-section search.
pub fn grid_extremum(h: impl Fn(f64) -> f64, maximize: bool, n: usize) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let step = 2.0 * PI / n as f64;
    let best = (0..n)
        .max_by(|&a, &b| (sign * h(a as f64 * step)).total_cmp(&(sign * h(b as f64 * step))))
        .unwrap();
    let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let (c, d) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if sign * h(c) > sign * h(d) {
            hi = d;
        } else {
            lo = c;
        }
    }
    h(0.5 * (lo + hi))
}
