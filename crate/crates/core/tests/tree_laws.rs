use crt_records::crt::{branch_length_from_exp, new_tree, BranchRecord, Tree, TreePoint, OFFSET_TOL};
use crt_records::par::map_replicates;
use crt_records::rng::make_stream;
use crt_records::stats::{chi_square_test, ks_test, mean_and_stderr};
use statrs::distribution::{ContinuousCDF, Gamma};

const P_MIN: f64 = 1e-3;

fn grown(seed: u64, sub: u64, n: usize) -> Tree {
    let mut s = make_stream(seed, sub);
    let mut t = new_tree(&mut s);
    while t.n_branches() < n {
        t.grow(&mut s);
    }
    t
}

fn assert_within(label: &str, samples: &[f64], target: f64, k: f64) {
    let (m, se) = mean_and_stderr(samples);
    assert!((m - target).abs() <= k * se, "{label}: {m} ± {se} vs {target}");
}

#[test]
fn root_length_is_rayleigh() {
    let l1 = map_replicates(100_000, |r| new_tree(&mut make_stream(11, r)).root_length());
    let ks = ks_test(&l1, |x| 1.0 - (-0.5 * x * x).exp()).unwrap();
    assert!(ks.p_value > P_MIN, "{ks:?}");
    assert_within("mean L1", &l1, (std::f64::consts::PI / 2.0).sqrt(), 4.0);
}

#[test]
fn length_of_ten_branch_tree_is_chi_20() {
    let l10 = map_replicates(10_000, |r| grown(12, r, 10).total_length());
    let gamma = Gamma::new(10.0, 1.0).unwrap();
    let ks = ks_test(&l10, |x| gamma.cdf(0.5 * x * x)).unwrap();
    assert!(ks.p_value > P_MIN, "{ks:?}");
}

#[test]
fn squared_length_has_mean_2n() {
    for n in [5usize, 50] {
        let sq = map_replicates(10_000, |r| grown(13, r, n).total_length().powi(2));
        assert_within(&format!("E[L_{n}^2]"), &sq, 2.0 * n as f64, 4.0);
    }
}

/// `Γ(n − ½)/Γ(n)` as an explicit product.
fn half_gamma_ratio(n: u64) -> f64 {
    let mut r = std::f64::consts::PI.sqrt();
    for k in 1..n {
        r *= (k as f64 - 0.5) / k as f64;
    }
    r
}

#[test]
fn first_branch_point_moments() {
    for n in [2u64, 10, 100] {
        let h = map_replicates(10_000, |r| {
            grown(14, r, n as usize).first_branch_point().expect("n >= 2")
        });
        let h2: Vec<f64> = h.iter().map(|x| x * x).collect();
        assert_within(&format!("E[h] n={n}"), &h, half_gamma_ratio(n) / 2f64.sqrt(), 4.0);
        assert_within(&format!("E[h^2] n={n}"), &h2, 1.0 / (n as f64 - 0.5), 4.0);
    }
}

#[test]
fn first_branch_point_conventions() {
    let single = Tree::with_root_length(1.0).unwrap();
    assert_eq!(single.first_branch_point(), None);

    let mut t = Tree::with_root_length(1.0).unwrap();
    t.attach(TreePoint { branch: 0, offset: 0.7 }, 0.5).unwrap();
    t.attach(TreePoint { branch: 0, offset: 0.2 }, 0.5).unwrap();
    t.attach(TreePoint { branch: 1, offset: 0.1 }, 0.5).unwrap();
    assert_eq!(t.first_branch_point(), Some(0.2));
}

#[test]
fn frozen_branch_length_law() {
    let total = 1.3;
    let mut s = make_stream(15, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| branch_length_from_exp(total, s.standard_exponential()))
        .collect();
    let ks = ks_test(&xs, |x| 1.0 - (-0.5 * x * x - total * x).exp()).unwrap();
    assert!(ks.p_value > P_MIN, "{ks:?}");
}

#[test]
fn squared_increments_are_exponential() {
    let t = grown(16, 0, 10_000);
    let mut prev = 0.0f64;
    let mut acc = 0.0;
    let mut inc = Vec::with_capacity(t.n_branches());
    for b in t.branches() {
        acc += b.length;
        inc.push(0.5 * (acc * acc - prev * prev));
        assert!(acc > prev);
        prev = acc;
    }
    let ks = ks_test(&inc, |x| 1.0 - (-x).exp()).unwrap();
    assert!(ks.p_value > P_MIN, "{ks:?}");
}

#[test]
fn growth_is_monotone() {
    let mut s = make_stream(17, 0);
    let mut t = new_tree(&mut s);
    t.grow(&mut s);
    let mut h = t.first_branch_point().unwrap();
    let mut len = t.total_length();
    for _ in 0..2000 {
        t.grow(&mut s);
        let h2 = t.first_branch_point().unwrap();
        assert!(h2 <= h);
        assert!(t.total_length() > len);
        h = h2;
        len = t.total_length();
    }
}

#[test]
fn uniform_points_follow_length() {
    let t = grown(18, 0, 10);
    let mut s = make_stream(18, 1);
    let mut counts = vec![0u64; 10];
    for _ in 0..100_000 {
        let p = t.sample_uniform_point(&mut s);
        let b = t.branch(p.branch).unwrap();
        assert!(p.offset > OFFSET_TOL && p.offset < b.length - OFFSET_TOL);
        counts[p.branch] += 1;
    }
    let probs: Vec<f64> = t.branches().iter().map(|b| b.length / t.total_length()).collect();
    let chi = chi_square_test(&counts, &probs).unwrap();
    assert!(chi.p_value > P_MIN, "{chi:?}");
}

/// Height by walking parent pointers, without the path builder.
fn ancestor_height(t: &Tree, p: TreePoint) -> f64 {
    let mut h = p.offset;
    let mut rec = t.branch(p.branch).unwrap();
    while let Some(parent) = rec.attach_branch {
        h += rec.attach_offset;
        rec = t.branch(parent).unwrap();
    }
    h
}

#[test]
fn root_paths_match_ancestor_chain() {
    for sub in 0..20 {
        let t = grown(19, sub, 200);
        let mut s = make_stream(19, 1000 + sub);
        for _ in 0..100 {
            let p = t.sample_uniform_point(&mut s);
            let path = t.root_path(p).unwrap();
            assert_eq!(path[0].branch, 0);
            assert_eq!(path[0].start, 0.0);
            let last = path.last().unwrap();
            assert_eq!((last.branch, last.end), (p.branch, p.offset));
            for seg in &path[1..] {
                assert_eq!(seg.start, 0.0);
            }
            let total: f64 = path.iter().map(|s| s.len()).sum();
            let oracle = ancestor_height(&t, p);
            assert!((total - oracle).abs() <= 1e-12 * oracle.max(1.0));
        }
    }
}

#[test]
fn root_path_examples() {
    let mut t = Tree::with_root_length(2.0).unwrap();
    let path = t.root_path(TreePoint { branch: 0, offset: 0.5 }).unwrap();
    assert_eq!(path.len(), 1);
    assert_eq!((path[0].start, path[0].end), (0.0, 0.5));

    t.attach(TreePoint { branch: 0, offset: 0.8 }, 1.0).unwrap();
    let path = t.root_path(TreePoint { branch: 1, offset: 0.3 }).unwrap();
    assert_eq!(path.len(), 2);
    assert_eq!((path[0].branch, path[0].start, path[0].end), (0, 0.0, 0.8));
    assert_eq!((path[1].branch, path[1].start, path[1].end), (1, 0.0, 0.3));
}

#[test]
fn text_format_round_trips() {
    let t = grown(20, 0, 25);
    let text = t.to_text();
    assert!(text.starts_with("0 - - "));
    assert!(text.ends_with('\n'));
    let back = Tree::from_text(&text).unwrap();
    assert_eq!(back.branches(), t.branches());
    assert_eq!(back.first_branch_point(), t.first_branch_point());

    assert!(Tree::from_text("0 - - 1\n1 0 1.5 2\n").is_err());
    assert!(Tree::from_text("0 - - 1\n1 3 0.5 2\n").is_err());
    assert!(Tree::from_text("0 - - x\n").is_err());
}

#[test]
fn invalid_attachments_are_rejected() {
    let mut t = Tree::with_root_length(1.0).unwrap();
    assert!(t.attach(TreePoint { branch: 0, offset: 0.0 }, 1.0).is_err());
    assert!(t.attach(TreePoint { branch: 0, offset: 1.0 }, 1.0).is_err());
    assert!(t.attach(TreePoint { branch: 1, offset: 0.5 }, 1.0).is_err());
    assert!(t.attach(TreePoint { branch: 0, offset: 0.5 }, -1.0).is_err());
    assert!(Tree::from_branches(&[BranchRecord {
        attach_branch: Some(0),
        attach_offset: 0.1,
        length: 1.0
    }])
    .is_err());
}
