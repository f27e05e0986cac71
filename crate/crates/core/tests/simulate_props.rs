mod common;

use std::f64::consts::PI;

use rand::Rng;
use zenerwave::inversion::{kernel_infinite, step_infinite, QuadratureConfig};
use zenerwave::simulate::{response_dirac, response_general, response_heaviside, simulate};
use zenerwave::{BoundarySignal, MaterialParams, RodLength, WaveField};

use common::{case_one, elastic, rng};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn lattice(dt: f64, from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|k| k as f64 * dt).collect()
}

fn sup(f: &WaveField) -> f64 {
    f.u.iter().flatten().fold(0.0, |m: f64, v| m.max(v.abs()))
}

fn pulse(t: f64) -> f64 {
    if (0.0..=1.0).contains(&t) {
        (PI * t).sin().powi(2)
    } else {
        0.0
    }
}

#[test]
fn discrete_dirac_matches_kernel() {
    let dt = 0.01;
    let mut values = vec![0.0; 10];
    values[0] = 1.0 / dt;
    let sig = BoundarySignal::sampled(dt, values);
    let ts = [100, 200, 300].map(|k| k as f64 * dt);
    let f = response_general(&sig, &[0.5, 1.0], &ts, &case_one(), &cfg()).unwrap();
    for (i, &x) in f.xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let k = kernel_infinite(x, t, &case_one(), &cfg()).unwrap().regular().unwrap();
            assert!((f.u[i][j] - k).abs() < 2e-4, "x={x} t={t}: {} vs {k}", f.u[i][j]);
        }
    }
    assert!(f.max_imag_residual < 1e-9);
}

#[test]
fn discrete_heaviside_matches_step_response() {
    let dt = 0.01;
    let sig = BoundarySignal::sampled(dt, vec![1.0; 401]);
    let ts = [100, 200, 300].map(|k| k as f64 * dt);
    let f = response_general(&sig, &[0.5, 1.0], &ts, &case_one(), &cfg()).unwrap();
    for (i, &x) in f.xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let h = step_infinite(x, t, &case_one(), &cfg()).unwrap().value;
            assert!((f.u[i][j] - h).abs() < 2e-3, "x={x} t={t}: {} vs {h}", f.u[i][j]);
        }
    }
}

#[test]
fn elastic_ramp_is_translated() {
    let dt = 0.01;
    let sig = BoundarySignal::sampled(dt, lattice(dt, 0, 500));
    let xs = [0.0, 0.37, 1.0, 2.5];
    let ts = lattice(dt, 0, 400);
    let f = simulate(&sig, &xs, &ts, &elastic(), &cfg()).unwrap();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &t) in ts.iter().enumerate() {
            let want = if t > x { t - x } else { 0.0 };
            assert!((f.u[i][j] - want).abs() < 1e-3, "x={x} t={t}");
        }
    }
}

#[test]
fn response_is_linear_and_shift_equivariant() {
    let p = case_one();
    let dt = 0.02;
    let mut r = rng(21);
    let a: Vec<f64> = (0..100).map(|_| r.gen_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..100).map(|k| pulse(k as f64 * dt)).collect();
    let xs = [0.5, 1.5];
    let ts = lattice(dt, 0, 150);
    let run = |v: Vec<f64>| response_general(&BoundarySignal::sampled(dt, v), &xs, &ts, &p, &cfg()).unwrap();
    let k = 10;
    // trailing zeros keep the signal length, and with it the node table, fixed
    let padded: Vec<f64> = b.iter().copied().chain(std::iter::repeat_n(0.0, k)).collect();
    let shifted: Vec<f64> = std::iter::repeat_n(0.0, k).chain(b.iter().copied()).collect();
    let a: Vec<f64> = a.into_iter().chain(std::iter::repeat_n(0.0, k)).collect();
    let combo: Vec<f64> = a.iter().zip(&padded).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
    let (fa, fb, fc) = (run(a), run(padded), run(combo));
    let scale = sup(&fc);
    for i in 0..xs.len() {
        for j in 0..ts.len() {
            let lin = 2.0 * fa.u[i][j] - 3.0 * fb.u[i][j];
            assert!((fc.u[i][j] - lin).abs() < 1e-12 * scale);
        }
    }

    // t = 0 is pinned to zero, so the comparison starts one cell later
    let fs = run(shifted);
    for i in 0..xs.len() {
        for j in 1..ts.len() - k {
            assert!((fs.u[i][j + k] - fb.u[i][j]).abs() < 1e-12 * sup(&fb));
        }
    }
}

#[test]
fn heaviside_derivative_is_dirac() {
    let p = case_one();
    let h = 1e-3;
    for (x, t) in [(0.3, 0.8), (1.0, 2.0)] {
        let up = response_heaviside(x, t + h, &p, &cfg()).unwrap().value;
        let down = response_heaviside(x, t - h, &p, &cfg()).unwrap().value;
        let d = response_dirac(x, t, &p, &cfg()).unwrap().regular().unwrap();
        assert!(((up - down) / (2.0 * h) - d).abs() < 1e-5 * d.abs().max(1.0));
    }
    assert_eq!(response_heaviside(0.0, 3.0, &p, &cfg()).unwrap().value, 1.0);
}

#[test]
fn boundary_is_recovered_near_the_end() {
    let dt = 0.01;
    let values: Vec<f64> = (0..=100).map(|k| pulse(k as f64 * dt)).collect();
    let ts = lattice(dt, 0, 200);
    let f = response_general(&BoundarySignal::sampled(dt, values.clone()), &[0.0, 1e-2], &ts, &case_one(), &cfg()).unwrap();
    for (j, &t) in ts.iter().enumerate() {
        let want = pulse(t);
        assert_eq!(f.u[0][j], if j < values.len() && j > 0 { values[j] } else { 0.0 });
        assert!((f.u[1][j] - want).abs() < 5e-2, "t={t}: {} vs {want}", f.u[1][j]);
    }
}

#[test]
fn dirac_field_is_a_localized_pulse() {
    let p = case_one();
    let front = 1.0 / p.slowness_at_infinity();
    let xs: Vec<f64> = (1..=45).map(|k| 0.1 * k as f64).collect();
    let f = simulate(&BoundarySignal::dirac(), &xs, &[1.0], &p, &cfg()).unwrap();
    let profile: Vec<f64> = f.u.iter().map(|row| row[0]).collect();
    assert!(profile.iter().all(|v| v.is_finite() && *v >= -1e-9));
    let star = profile.iter().enumerate().fold(0, |b, (i, &v)| if v > profile[b] { i } else { b });
    assert!(xs[star] <= front && star + 1 < xs.len());
    // nothing has arrived beyond the front
    assert!(profile[star + 1..].iter().any(|v| v.abs() < 1e-8));
    assert!(f.max_imag_residual < 1e-9);
}

/// Values recorded from the first verified build; they guard against silent
/// drift of the quadrature.
#[test]
fn alpha_seven_tenths_regression() {
    let p = MaterialParams::with_matched_b2(1.0, 20.0, 0.1, 0.7, 0.1, RodLength::Infinite).unwrap();
    let frozen = [
        (0.5, 1.0, 1.381_818_731_835_557_7e-2),
        (1.0, 1.0, 3.209_435_739_382_495e-2),
        (2.0, 1.0, 9.298_172_301_378_195e-2),
        (1.0, 2.0, 1.114_378_595_632_277e-2),
    ];
    for (x, t, want) in frozen {
        let got = response_dirac(x, t, &p, &cfg()).unwrap().regular().unwrap();
        assert!((got - want).abs() <= 1e-9 * want, "x={x} t={t}: {got:e}");
        let fine = response_dirac(x, t, &p, &cfg().doubled()).unwrap().regular().unwrap();
        assert!((fine - want).abs() <= 1e-8 * want);
    }
}

#[test]
fn finite_elastic_rod_reflects_with_sign_change() {
    let p = elastic().with_rod_length(RodLength::Finite(2.0));
    let dt = 0.01;
    let values: Vec<f64> = (0..=100).map(|k| pulse(k as f64 * dt)).collect();
    let ts = lattice(dt, 0, 600);
    let f = simulate(&BoundarySignal::sampled(dt, values), &[0.5, 2.0], &ts, &p, &cfg()).unwrap();
    for (j, &t) in ts.iter().enumerate() {
        let want = pulse(t - 0.5) - pulse(t - 3.5) + pulse(t - 4.5);
        assert!((f.u[0][j] - want).abs() < 1e-3, "t={t}");
        assert_eq!(f.u[1][j], 0.0);
    }
}
