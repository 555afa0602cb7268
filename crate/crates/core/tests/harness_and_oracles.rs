use std::f64::consts::{FRAC_PI_2, PI};

use crt_records::analytics;
use crt_records::rng::{make_stream, sample_exponential, sample_uniform};
use crt_records::stats::{correlation, empirical_cf, ks_statistic, ks_test, moment_ci};

#[test]
fn ks_single_point() {
    assert_eq!(ks_statistic(&[0.5], |x| x), 0.5);
}

#[test]
fn ks_null_p_values_rarely_small() {
    let mut passes = 0;
    for trial in 0..100 {
        let mut s = make_stream(60, trial);
        let xs: Vec<f64> = (0..10_000).map(|_| s.next_unit()).collect();
        if ks_test(&xs, |x| x.clamp(0.0, 1.0)).unwrap().p_value > 1e-3 {
            passes += 1;
        }
    }
    assert!(passes >= 99, "{passes}");
}

#[test]
fn ks_detects_wrong_law() {
    let mut s = make_stream(61, 0);
    let xs: Vec<f64> = (0..10_000).map(|_| s.standard_exponential()).collect();
    let p = ks_test(&xs, analytics::rayleigh_cdf).unwrap().p_value;
    assert!(p < 1e-6, "{p}");
}

#[test]
fn ks_is_invariant_under_monotone_maps() {
    let mut s = make_stream(62, 0);
    let xs: Vec<f64> = (0..5000).map(|_| s.standard_exponential()).collect();
    let a = ks_test(&xs, |x| 1.0 - (-x).exp()).unwrap();
    let ys: Vec<f64> = xs.iter().map(|x| x.sqrt()).collect();
    let b = ks_test(&ys, |y| 1.0 - (-y * y).exp()).unwrap();
    assert!((a.statistic - b.statistic).abs() < 1e-12);
}

#[test]
fn uniform_draws_pass_ks() {
    let mut s = make_stream(63, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| sample_uniform(&mut s, 0.0, 1.0).unwrap())
        .collect();
    assert!(ks_test(&xs, |x| x).unwrap().p_value > 1e-3);
}

#[test]
fn exponential_rate_scaling() {
    let mut s = make_stream(64, 0);
    let xs: Vec<f64> = (0..10_000).map(|_| sample_exponential(&mut s, 3.0).unwrap()).collect();
    let scaled: Vec<f64> = xs.iter().map(|x| 3.0 * x).collect();
    assert!(ks_test(&scaled, |x| 1.0 - (-x).exp()).unwrap().p_value > 1e-3);
}

#[test]
fn moment_examples() {
    let c = moment_ci(&[2.5; 10], 1).unwrap();
    assert_eq!((c.estimate, c.stderr), (2.5, 0.0));
    let z = moment_ci(&[1.0, 2.0, 3.0], 0).unwrap();
    assert_eq!((z.estimate, z.stderr), (1.0, 0.0));
    assert!(moment_ci(&[1.0], -1).is_err());

    let mut s = make_stream(65, 0);
    let r: Vec<f64> = (0..100_000).map(|_| (2.0 * s.standard_exponential()).sqrt()).collect();
    let m2 = moment_ci(&r, 2).unwrap();
    assert!((m2.estimate - 2.0).abs() < 4.0 * m2.stderr);
}

#[test]
fn correlation_examples() {
    let x: Vec<f64> = (0..100).map(|i| i as f64 * 0.37).collect();
    let neg: Vec<f64> = x.iter().map(|v| -v).collect();
    assert!((correlation(&x, &x).unwrap().estimate - 1.0).abs() < 1e-12);
    assert!((correlation(&x, &neg).unwrap().estimate + 1.0).abs() < 1e-12);

    let mut a = make_stream(66, 0);
    let mut b = make_stream(66, 1);
    let u: Vec<f64> = (0..10_000).map(|_| a.standard_normal()).collect();
    let v: Vec<f64> = (0..10_000).map(|_| b.standard_normal()).collect();
    assert!(correlation(&u, &v).unwrap().estimate.abs() < 4.0 / 100.0);
    assert!(correlation(&u, &v[..10]).is_err());
}

#[test]
fn characteristic_function_examples() {
    let p = empirical_cf(&[0.3, -1.2, 4.0], &[0.0]);
    assert_eq!((p[0].re, p[0].im), (1.0, 0.0));

    let mut s = make_stream(67, 0);
    let mut xs: Vec<f64> = (0..50_000).map(|_| s.standard_normal()).collect();
    let mirrored: Vec<f64> = xs.iter().map(|x| -x).collect();
    xs.extend(mirrored);
    let p = empirical_cf(&xs, &[1.0]);
    assert!(p[0].im.abs() < 1e-12);
    assert!((p[0].re - (-0.5f64).exp()).abs() < 4.0 / (xs.len() as f64).sqrt());
}

#[test]
fn rayleigh_moments() {
    assert!((analytics::rayleigh_moment(1).unwrap() - FRAC_PI_2.sqrt()).abs() < 1e-9);
    assert!((analytics::rayleigh_moment(2).unwrap() - 2.0).abs() < 1e-9);
}

#[test]
fn h_moment_examples() {
    assert_eq!(analytics::h_moment(10, 0.0).unwrap(), 1.0);
    // Γ(9.5)/Γ(10) as a product
    let mut ratio = PI.sqrt();
    for k in 1..10 {
        ratio *= (k as f64 - 0.5) / k as f64;
    }
    let expected = ratio / 2f64.sqrt();
    assert!((analytics::h_moment(10, 1.0).unwrap() - expected).abs() < 1e-13);
    let asym = analytics::h_moment(1_000_000, 1.0).unwrap() * 1e3;
    assert!((asym * 2f64.sqrt() - 1.0).abs() < 1e-3);
}

#[test]
fn mean_separation_time_limits() {
    assert!((analytics::mean_theta_linear(f64::INFINITY, 2.0).unwrap() - 0.5).abs() < 1e-15);
    assert!((analytics::mean_theta_linear(3.0, 1e-8).unwrap() - 3.0).abs() < 1e-6);
    let v = analytics::mean_theta_linear(1.0, 2.0).unwrap();
    assert!((v - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-15);
}

#[test]
fn mean_theta_qv_examples() {
    assert!((analytics::mean_theta_qv(f64::INFINITY, 2.0).unwrap() - PI.sqrt()).abs() < 1e-8);
    let small = analytics::mean_theta_qv(1e-6, 1.0).unwrap() / 1e-6;
    assert!((small - 1.0).abs() < 1e-4, "{small}");
}

#[test]
fn branch_length_moment_bounds() {
    let lambda: f64 = 1.5;
    let c1 = 1.5 * 0.5 * PI.sqrt(); // Γ(2.5)
    for a in [10.0f64, 100.0, 1000.0] {
        let ratio = analytics::branch_length_moment(a, lambda).unwrap() * a.powf(lambda);
        // expanding (a + x)e^{-ax}(1 - x²/2) term by term
        let expansion = c1 * (1.0 - lambda * (lambda + 1.0) / (2.0 * a * a));
        assert!(
            (ratio - expansion).abs() <= 20.0 / a.powi(4) + 1e-8 * c1,
            "a={a}: {ratio} vs {expansion}"
        );
        assert!(ratio <= c1 * (1.0 + 10.0 / (a * a)));
    }
}

#[test]
fn z_moment_ratio_exceeds_gaussian() {
    let (m2, m4) = analytics::z_moments().unwrap();
    assert!((m4 / (m2 * m2) - 12.0 / PI).abs() < 1e-6);
    assert!(m4 / (m2 * m2) > 3.0);
}

#[test]
fn tagged_fragment_examples() {
    for a in [0.1, 1.0, 10.0] {
        for i in 1..100 {
            let f = analytics::tagged_fragment_pdf(a, i as f64 / 100.0).unwrap();
            assert!(f.is_finite() && f >= 0.0);
        }
    }
    let v: f64 = 0.3;
    let direct = (-v / (2.0 * 0.7)).exp() / ((2.0 * PI).sqrt() * v.sqrt() * 0.7f64.powf(1.5));
    assert!((analytics::tagged_fragment_pdf(1.0, v).unwrap() - direct).abs() < 1e-14);
    assert!(analytics::tagged_fragment_pdf(1.0, 1.0).is_err());
    assert!(analytics::tagged_fragment_pdf(0.0, 0.5).is_err());
}

#[test]
fn second_moment_of_integral_depends_on_product() {
    let a = analytics::f_qt(3.0, 0.5).unwrap();
    let b = analytics::f_qt(1.0, 1.5).unwrap();
    assert!((a - b).abs() < 1e-9 * a);
}

#[test]
fn second_moment_of_integral_at_short_times() {
    use crt_records::par::map_replicates;
    use crt_records::records::linear_record_finite;
    let t = 0.01;
    let sq = map_replicates(20_000, |r| {
        linear_record_finite(&mut make_stream(68, r), 1.0, t)
            .unwrap()
            .integral()
            .powi(2)
    });
    let (m, se) = crt_records::stats::mean_and_stderr(&sq);
    let f = analytics::f_qt(1.0, t).unwrap();
    assert!((m - f).abs() <= 4.0 * se + 1e-12, "{m} ± {se} vs {f}");
    // θ stays at q on a short segment, so F ≈ (qt)²
    assert!((f / (t * t) - 1.0).abs() < 0.01);
}
