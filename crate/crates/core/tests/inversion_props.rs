mod common;

use std::f64::consts::PI;

use zenerwave::inversion::{
    kernel_finite, kernel_finite_mollified, kernel_infinite, kernel_transform, relaxation_kernel,
    step_finite, step_infinite, KernelValue, QuadratureConfig,
};
use zenerwave::modulus::{m_from_s, p_tilde, q_tilde};
use zenerwave::{Complex64, MaterialParams, RodLength};

use common::{case_one, elastic, gauss_panels, mittag_leffler};

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

fn k(x: f64, t: f64, p: &MaterialParams) -> f64 {
    kernel_infinite(x, t, p, &cfg()).unwrap().regular().unwrap()
}

#[test]
fn relaxation_kernel_matches_mittag_leffler() {
    let p = MaterialParams::new(1.0, 20.0, 0.0, 0.0, 0.5, 0.1, RodLength::Infinite).unwrap();
    for t in [0.05, 0.2, 0.5, 1.0, 2.0, 4.0] {
        let rk = relaxation_kernel(t, &p, &cfg()).unwrap();
        assert_eq!(rk.delta_weight, 20.0);
        let want = -19.0 * t.powf(-0.5) * mittag_leffler(0.5, 0.5, -t.sqrt());
        let got = rk.regular.value;
        assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "t={t}: {got} vs {want}");
    }
}

#[test]
fn relaxation_kernel_laplace_consistency() {
    // ∫ e^{−st} L_reg dt with t = u², which removes the t^{α−1} singularity
    let p = case_one();
    let s = 2.0;
    // L_reg carries t^{±iβ} factors, so the panels are graded towards u = 0
    let mut edges = vec![0.0];
    let mut u = 1e-8;
    while u < 4.5 {
        edges.push(u);
        u *= 2.0;
    }
    edges.push(4.5);
    let sum: f64 = edges
        .windows(2)
        .flat_map(|e| gauss_panels(e[0], e[1], 2))
        .map(|(u, w)| {
            let t = u * u;
            let l = relaxation_kernel(t, &p, &cfg()).unwrap().regular.value;
            w * 2.0 * u * l * (-s * t).exp()
        })
        .sum();
    let z = Complex64::new(s, 0.0);
    let want = (p_tilde(z, &p) / q_tilde(z, &p)).re - 20.0;
    assert!((sum - want).abs() < 1e-6 * want.abs(), "{sum} vs {want}");
}

#[test]
fn delta_weight_is_the_high_frequency_ratio() {
    let p = case_one();
    let rk = relaxation_kernel(1.0, &p, &cfg()).unwrap();
    let s = Complex64::new(1e8, 0.0);
    let ratio = (p_tilde(s, &p) / q_tilde(s, &p)).re;
    assert!((ratio - rk.delta_weight).abs() < 1e-2, "{ratio}");
}

#[test]
fn finite_transform_is_real_on_the_real_axis() {
    let p = case_one();
    for s in [0.1, 1.0, 7.5] {
        for x in [0.3, 1.0, 2.9] {
            let v = kernel_transform(x, Complex64::new(s, 0.0), RodLength::Finite(3.0), &p).unwrap();
            assert!(v.im.abs() <= 1e-15 * v.norm().max(1e-300), "{v}");
            assert!(v.re > 0.0);
        }
    }
}

#[test]
fn kernel_vanishes_before_the_front() {
    let p = case_one();
    let front = p.slowness_at_infinity();
    for t in [0.3 * front, 0.8 * front] {
        assert!(k(1.0, t, &p).abs() < 1e-8);
    }
    assert!(k(1.0, 1.0, &p) > 1e-3);
}

#[test]
fn kernel_laplace_transform_matches_exponential() {
    let p = case_one();
    let (x, s) = (1.0, 2.0);
    let front = x * p.slowness_at_infinity();
    // the pulse is sharply peaked just behind the front: grade the panels
    let mut edges = vec![front];
    let mut d = 1e-4;
    while front + d < 20.0 {
        edges.push(front + d);
        d *= 2.0;
    }
    edges.push(20.0);
    let sum: f64 = edges
        .windows(2)
        .flat_map(|e| gauss_panels(e[0], e[1], 2))
        .map(|(t, w)| w * (-s * t).exp() * k(x, t, &p))
        .sum();
    let m = m_from_s(Complex64::new(s, 0.0), &p).unwrap();
    let want = (-s * m.re * x).exp();
    assert!((sum - want).abs() < 1e-6, "{sum} vs {want}");
}

#[test]
fn step_response_differentiates_to_the_kernel() {
    let p = case_one();
    let h = 1e-3;
    for (x, t) in [(0.5, 1.0), (1.0, 1.5), (2.0, 3.0)] {
        let up = step_infinite(x, t + h, &p, &cfg()).unwrap().value;
        let down = step_infinite(x, t - h, &p, &cfg()).unwrap().value;
        let fd = (up - down) / (2.0 * h);
        let kv = k(x, t, &p);
        assert!((fd - kv).abs() < 1e-5 * kv.abs().max(1.0), "x={x} t={t}: {fd} vs {kv}");
    }
}

#[test]
fn long_rod_matches_infinite_rod_before_reflection() {
    let p = case_one();
    let l = 10.0;
    for (x, t) in [(1.0, 1.0), (1.0, 3.0), (3.0, 2.0)] {
        let fin = kernel_finite(x, t, l, &p, &cfg()).unwrap().regular().unwrap();
        let inf = k(x, t, &p);
        assert!((fin - inf).abs() < 1e-7, "x={x} t={t}: {fin} vs {inf}");
        let sf = step_finite(x, t, l, &p, &cfg()).unwrap().value;
        let si = step_infinite(x, t, &p, &cfg()).unwrap().value;
        assert!((sf - si).abs() < 1e-7, "x={x} t={t}: {sf} vs {si}");
    }
    let end = kernel_finite(l, 30.0, l, &p, &cfg()).unwrap();
    assert_eq!(end.regular(), Some(0.0));
}

#[test]
fn elastic_mollifier_matches_images() {
    let e = elastic();
    let (x, l, sigma) = (1.0, 2.0, 0.05);
    let images = match kernel_finite(x, 6.0, l, &e, &cfg()).unwrap() {
        KernelValue::Impulses(v) => v,
        other => panic!("expected impulses, got {other:?}"),
    };
    let gauss = |d: f64| (-d * d / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt());
    for t in [0.9, 1.02, 2.0, 3.05, 5.0] {
        let want: f64 = images.iter().map(|i| i.weight * gauss(t - i.time)).sum();
        let got = kernel_finite_mollified(x, t, l, sigma, &e, &cfg()).unwrap().value;
        assert!((got - want).abs() < 1e-6 * want.abs().max(1.0), "t={t}: {got} vs {want}");
    }
}

#[test]
fn doubled_config_agrees() {
    let p = case_one();
    for (x, t) in [(0.1, 1.0), (1.0, 2.0)] {
        let a = k(x, t, &p);
        let b = kernel_infinite(x, t, &p, &cfg().doubled()).unwrap().regular().unwrap();
        assert!((a - b).abs() < 1e-9, "x={x} t={t}: {a} vs {b}");
    }
}
