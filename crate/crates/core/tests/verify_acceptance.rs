//! Acceptance suite: one PASS/FAIL line per criterion, followed by the
//! module examples that are checked outside the criteria. Detail lines are
//! indented. Exits nonzero if anything fails.

use std::cell::OnceCell;
use std::f64::consts::PI;
use std::time::Instant;

use crt_records::analytics::{self, rayleigh_cdf};
use crt_records::crt::{branch_length_from_exp, new_tree, Tree};
use crt_records::discrete::{cutting_moments, Family};
use crt_records::experiment::{self, ExperimentConfig, ExperimentKind, Outcome};
use crt_records::par::map_replicates;
use crt_records::rng::make_stream;
use crt_records::stats::{ks_test, mean_and_stderr, StatReport};
use statrs::distribution::{ContinuousCDF, Gamma};

const P_MIN: f64 = 1e-3;

struct Criterion {
    label: &'static str,
    details: Vec<(String, bool)>,
    notes: Vec<String>,
}

impl Criterion {
    fn new(label: &'static str) -> Self {
        Self {
            label,
            details: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.details.push((what.into(), ok));
    }

    fn note(&mut self, text: String) {
        self.notes.push(text);
    }

    fn report(&mut self, r: &StatReport) {
        let text = format!(
            "{} estimate={:.6} stderr={:.3e} statistic={:.4} p={:.3e}",
            r.name, r.estimate, r.stderr, r.statistic, r.p_value
        );
        self.check(text, r.pass);
    }

    fn reports(&mut self, outcome: &Outcome, names: &[&str]) {
        for name in names {
            match outcome.report(name) {
                Some(r) => self.report(r),
                None => self.check(format!("{name} missing"), false),
            }
        }
    }

    fn passed(&self) -> bool {
        !self.details.is_empty() && self.details.iter().all(|(_, ok)| *ok)
    }
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run(kind: ExperimentKind, settings: &[(&str, &str)]) -> Outcome {
    let mut c = ExperimentConfig::new(kind);
    for (k, v) in settings {
        c.set(k, v).expect("valid setting");
    }
    experiment::run(&c).expect("experiment runs")
}

fn grown(seed: u64, sub: u64, n: usize) -> Tree {
    let mut s = make_stream(seed, sub);
    let mut t = new_tree(&mut s);
    while t.n_branches() < n {
        t.grow(&mut s);
    }
    t
}

fn mean_check(c: &mut Criterion, label: &str, xs: &[f64], target: f64) {
    let (m, se) = mean_and_stderr(xs);
    c.check(
        format!("{label} {m:.6} ± {se:.2e} vs {target:.6}"),
        (m - target).abs() <= 4.0 * se,
    );
}

fn exact_identities() -> Criterion {
    let mut c = Criterion::new("exact identities");
    let out = run(ExperimentKind::Densities, &[]);
    c.reports(
        &out,
        &[
            "tagged_fragment_norm_a0.1",
            "tagged_fragment_norm_a1",
            "tagged_fragment_norm_a10",
            "branch_length_cdf_limit_a0",
            "branch_length_cdf_limit_a1.3",
            "chi2n1_and_r0_equal_rayleigh",
            "mean_theta_qv_bound",
            "z_second_moment",
            "z_fourth_moment",
        ],
    );
    c
}

fn tree_laws() -> Criterion {
    let mut c = Criterion::new("tree laws");
    let l10 = map_replicates(10_000, |r| grown(101, r, 10).total_length());
    let gamma = Gamma::new(10.0, 1.0).unwrap();
    let ks = ks_test(&l10, |x| gamma.cdf(0.5 * x * x)).unwrap();
    c.check(format!("L_10 vs Chi(20) p={:.3e}", ks.p_value), ks.p_value > P_MIN);
    for n in [5usize, 50] {
        let sq = map_replicates(10_000, |r| grown(102, r, n).total_length().powi(2));
        mean_check(&mut c, &format!("E[L_{n}^2]"), &sq, 2.0 * n as f64);
    }
    for n in [2u64, 10, 100] {
        let h = map_replicates(10_000, |r| grown(103, r, n as usize).first_branch_point().unwrap());
        let h2: Vec<f64> = h.iter().map(|x| x * x).collect();
        // Γ(n − ½)/Γ(n) as a product
        let mut ratio = PI.sqrt();
        for k in 1..n {
            ratio *= (k as f64 - 0.5) / k as f64;
        }
        mean_check(&mut c, &format!("E[h] n={n}"), &h, ratio / 2f64.sqrt());
        mean_check(&mut c, &format!("E[h^2] n={n}"), &h2, 1.0 / (n as f64 - 0.5));
    }
    let total = 1.3;
    let mut s = make_stream(104, 0);
    let xs: Vec<f64> = (0..100_000)
        .map(|_| branch_length_from_exp(total, s.standard_exponential()))
        .collect();
    let ks = ks_test(&xs, |x| analytics::branch_length_cdf(total, x).unwrap()).unwrap();
    c.check(
        format!("frozen branch length a={total} p={:.3e}", ks.p_value),
        ks.p_value > P_MIN,
    );
    c
}

fn linear_records(linear: &Outcome) -> Criterion {
    let mut c = Criterion::new("linear record process");
    let mut names = Vec::new();
    for q in ["0.5", "1", "3"] {
        for s in ["0.5", "2"] {
            names.push(format!("mean_theta_q{q}_s{s}"));
        }
    }
    names.push("infinite_level_marginal_s0.3".into());
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    c.reports(linear, &refs);
    let m = run(
        ExperimentKind::Martingale,
        &[("q", "2"), ("t", "1.5"), ("replicates", "100000")],
    );
    c.reports(
        &m,
        &["martingale_N_q2_t1.5", "martingale_N2_q2_t1.5", "martingale_N4_q2_t1.5"],
    );
    if let Some(r) = m.report("martingale_N4_compensated_q2_t1.5") {
        c.note(format!(
            "with compensator ∫(6N²+4N+1)θ the fourth-power estimate is {:.3e} ± {:.3e}",
            r.estimate, r.stderr
        ));
    }
    c
}

fn second_moment_crosscheck(linear: &Outcome) -> Criterion {
    let mut c = Criterion::new("F(q,t) quadrature vs Monte Carlo");
    c.reports(linear, &["f_qt_crosscheck_q1_t1", "f_qt_crosscheck_q3_t0.5"]);
    c
}

fn law_of_large_numbers() -> Criterion {
    let mut c = Criterion::new("law of large numbers");
    let out = run(
        ExperimentKind::Lgn,
        &[
            ("seed", "0"),
            ("replicates", "2000"),
            ("n", "4096"),
            ("checkpoints", "64,256,1024,4096"),
        ],
    );
    c.reports(
        &out,
        &[
            "lgn_theta_hat_rayleigh_n4096",
            "lgn_median_deviation_n64",
            "lgn_median_deviation_n256",
            "lgn_median_deviation_n1024",
            "lgn_median_deviation_decreasing",
        ],
    );
    c
}

fn fluctuations() -> Criterion {
    let mut c = Criterion::new("fluctuations");
    let out = run(
        ExperimentKind::Fluctuation,
        &[
            ("seed", "1"),
            ("replicates", "2000"),
            ("n", "64,256"),
            ("m_ref", "16384"),
        ],
    );
    c.reports(
        &out,
        &[
            "z_second_moment_n256",
            "z_kurtosis_ratio_n256",
            "w_ks_normal_n256",
            "w_ks_trend",
            "corr_w2_theta_n256",
            "z_cf_t0.5_n256",
            "z_cf_t1_n256",
            "z_cf_t2_n256",
        ],
    );
    for r in out.reports.iter().filter(|r| r.is_informational()) {
        c.note(format!("{} = {:.6}", r.name, r.estimate));
    }
    c
}

fn discrete_cutting() -> Criterion {
    let mut c = Criterion::new("discrete cutting");
    let out = run(
        ExperimentKind::Discrete,
        &[
            ("seed", "0"),
            ("replicates", "10000"),
            ("n", "1000"),
            ("families", "cayley"),
        ],
    );
    c.reports(
        &out,
        &[
            "cayley_mean_over_sqrt_n",
            "cayley_ks_rayleigh",
            "small_tree_exact_expectation",
            "cayley_var_over_n",
        ],
    );
    if let Some(r) = out.report("cayley_mean_exact_finite_n") {
        c.note(format!(
            "mean cuts {:.4} ± {:.4} vs exact finite-size mean ({})",
            r.estimate,
            r.stderr,
            tag(r.pass)
        ));
    }
    c
}

fn determinism() -> Criterion {
    let mut c = Criterion::new("determinism across thread counts");
    let cases: [(ExperimentKind, &[(&str, &str)]); 4] = [
        (
            ExperimentKind::Lgn,
            &[("replicates", "300"), ("n", "512"), ("checkpoints", "64,512")],
        ),
        (
            ExperimentKind::Fluctuation,
            &[("replicates", "200"), ("n", "16,64"), ("m_ref", "1024")],
        ),
        (
            ExperimentKind::Discrete,
            &[("replicates", "1000"), ("n", "200"), ("binary_leaves", "100")],
        ),
        (
            ExperimentKind::Martingale,
            &[("replicates", "2000"), ("q", "1,2"), ("t", "1")],
        ),
    ];
    for (kind, settings) in cases {
        let outputs: Vec<_> = ["1", "4", "8"]
            .iter()
            .map(|threads| {
                let mut s = settings.to_vec();
                s.push(("threads", threads));
                run(kind, &s).artifacts
            })
            .collect();
        let same = outputs.windows(2).all(|w| w[0] == w[1]);
        c.check(
            format!("{kind}: {} artifacts identical at 1, 4, 8 threads", outputs[0].len()),
            same,
        );
    }
    c
}

/// Module examples checked outside the numbered criteria.
fn examples() -> Vec<Criterion> {
    let mut binary = Criterion::new("binary trees with 500 leaves: scaled cuts are Rayleigh");
    let rep = cutting_moments(Family::Binary, 500, 10_000, 59).unwrap();
    let scaled: Vec<f64> = rep
        .cuts
        .iter()
        .map(|&k| k as f64 / (rep.n_edges as f64).sqrt())
        .collect();
    let ks = ks_test(&scaled, rayleigh_cdf).unwrap();
    binary.check(
        format!(
            "KS D={:.4} p={:.3e}, scaled mean {:.4}",
            ks.statistic, ks.p_value, rep.scaled_mean.estimate
        ),
        ks.p_value > P_MIN,
    );

    let mut small = Criterion::new("F(1, 1e-3) within 5% of the stated expansion 2(x²/4 + x²/2)");
    let x: f64 = 1e-3;
    let stated = 2.0 * (x * x / 4.0 + x * x / 2.0);
    let f = analytics::f_qt(1.0, x).unwrap();
    small.check(
        format!("F={f:.6e} stated={stated:.6e} ratio={:.4}", f / stated),
        (f / stated - 1.0).abs() <= 0.05,
    );
    vec![binary, small]
}

fn print_details(c: &Criterion) {
    for (what, ok) in &c.details {
        println!("    {} {what}", if *ok { "ok  " } else { "fail" });
    }
    for n in &c.notes {
        println!("    info {n}");
    }
}

fn main() {
    let started = Instant::now();
    // shared by criteria 3 and 4, run on first use
    let linear = OnceCell::new();
    let linear = || linear.get_or_init(|| run(ExperimentKind::LinearTest, &[("seed", "0"), ("replicates", "100000")]));
    let criteria: Vec<(usize, Box<dyn Fn() -> Criterion + '_>)> = vec![
        (1, Box::new(exact_identities)),
        (2, Box::new(tree_laws)),
        (3, Box::new(|| linear_records(linear()))),
        (4, Box::new(|| second_moment_crosscheck(linear()))),
        (5, Box::new(law_of_large_numbers)),
        (6, Box::new(fluctuations)),
        (7, Box::new(discrete_cutting)),
        (8, Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, f) in criteria {
        let t0 = Instant::now();
        let c = f();
        println!(
            "{} criterion {i}: {} ({:.1} s)",
            tag(c.passed()),
            c.label,
            t0.elapsed().as_secs_f64()
        );
        print_details(&c);
        failed += usize::from(!c.passed());
    }
    for c in examples() {
        println!("{} example: {}", tag(c.passed()), c.label);
        print_details(&c);
        failed += usize::from(!c.passed());
    }
    println!("{failed} failing, {:.1} s total", started.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
