//! Goodness-of-fit, moment estimates and dependence checks.
//!
//! Functions here only measure; pass/fail thresholds belong to callers.

use std::fmt::Write as _;

use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::fmt::g17;

pub const KS_MIN_SAMPLES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct StatReport {
    pub name: String,
    pub estimate: f64,
    pub stderr: f64,
    pub statistic: f64,
    pub p_value: f64,
    pub pass: bool,
    pub meta: Vec<(String, String)>,
}

impl StatReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            estimate: f64::NAN,
            stderr: 0.0,
            statistic: f64::NAN,
            p_value: f64::NAN,
            pass: false,
            meta: Vec::new(),
        }
    }

    pub fn estimate(name: impl Into<String>, estimate: f64, stderr: f64) -> Self {
        Self {
            estimate,
            stderr,
            ..Self::new(name)
        }
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }

    /// Reported for context only; never gates the outcome.
    pub fn is_informational(&self) -> bool {
        self.meta.iter().any(|(k, v)| k == "role" && v == "informational")
    }

    pub fn note(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.meta.push((key.into(), value.to_string()));
        self
    }

    pub const CSV_HEADER: &'static str = "name,estimate,stderr,statistic,p_value,pass";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.name,
            g17(self.estimate),
            g17(self.stderr),
            g17(self.statistic),
            g17(self.p_value),
            self.pass
        )
    }
}

/// Renders reports as CSV with header.
pub fn reports_to_csv(reports: &[StatReport]) -> String {
    let mut out = String::from(StatReport::CSV_HEADER);
    out.push('\n');
    for r in reports {
        writeln!(out, "{}", r.csv_row()).expect("writing to a String");
    }
    out
}

/// Sample mean and its standard error `sd/√n`.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let var = ss / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

pub fn variance(xs: &[f64]) -> f64 {
    let (mean, _) = mean_and_stderr(xs);
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Kolmogorov survival function `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.0 {
        // Jacobi-transformed series, fast for small λ
        let mut cdf = 0.0;
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        for k in 1..=100 {
            let odd = (2 * k - 1) as f64;
            let term = (-odd * odd * c).exp();
            cdf += term;
            if term < 1e-16 {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// `D = sup |F̂ − F|` for any sample size.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// One-sample Kolmogorov-Smirnov test with the asymptotic p-value.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<StatReport> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: KS_MIN_SAMPLES,
            got: samples.len(),
        });
    }
    let d = ks_statistic(samples, cdf);
    let n = samples.len() as f64;
    let lambda = n.sqrt() * d;
    let mut r = StatReport::new("ks");
    r.statistic = d;
    r.p_value = kolmogorov_sf(lambda);
    r.estimate = d;
    Ok(r.note("n", samples.len()).with_pass(true))
}

/// `k`-th raw moment with stderr `sd(xᵏ)/√n`.
pub fn moment_ci(samples: &[f64], k: i32) -> Result<StatReport> {
    if k < 0 {
        return Err(Error::InvalidArgument(format!("moment order {k} < 0")));
    }
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let powered: Vec<f64> = samples.iter().map(|x| x.powi(k)).collect();
    let (m, se) = mean_and_stderr(&powered);
    Ok(StatReport::estimate(format!("moment_{k}"), m, se).with_pass(true))
}

fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Pearson correlation with Fisher-z uncertainty; `p_value` tests `ρ = 0`.
pub fn correlation(x: &[f64], y: &[f64]) -> Result<StatReport> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    let r = if sxx > 0.0 && syy > 0.0 {
        (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0)
    } else {
        0.0
    };
    let mut rep = StatReport::new("correlation");
    rep.estimate = r;
    if x.len() > 3 {
        let scale = (n - 3.0).sqrt();
        rep.stderr = (1.0 - r * r) / scale;
        let z = r.atanh() * scale;
        rep.statistic = z;
        rep.p_value = if z.is_finite() {
            (2.0 * normal_sf(z.abs())).min(1.0)
        } else {
            0.0
        };
    } else {
        rep.statistic = f64::NAN;
        rep.p_value = 1.0;
    }
    rep.pass = true;
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfPoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
}

/// `(1/n) Σ exp(i t x_j)` on each grid point.
pub fn empirical_cf(samples: &[f64], t_grid: &[f64]) -> Vec<CfPoint> {
    let n = samples.len() as f64;
    t_grid
        .iter()
        .map(|&t| {
            let mut re = 0.0;
            // odd parts accumulated by sign so mirrored samples cancel exactly
            let (mut im_pos, mut im_neg) = (0.0, 0.0);
            for &x in samples {
                let (s, c) = (t * x).sin_cos();
                re += c;
                if s >= 0.0 {
                    im_pos += s;
                } else {
                    im_neg -= s;
                }
            }
            CfPoint {
                t,
                re: re / n,
                im: (im_pos - im_neg) / n,
            }
        })
        .collect()
}

/// Pearson χ² goodness-of-fit for category counts against probabilities.
pub fn chi_square_test(observed: &[u64], probs: &[f64]) -> Result<StatReport> {
    if observed.len() != probs.len() {
        return Err(Error::LengthMismatch(observed.len(), probs.len()));
    }
    if observed.len() < 2 {
        return Err(Error::InvalidArgument("need at least two categories".into()));
    }
    let total: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let df = (observed.len() - 1) as f64;
    let dist = ChiSquared::new(df).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut r = StatReport::new("chi_square");
    r.statistic = stat;
    r.estimate = stat;
    r.p_value = dist.sf(stat);
    r.pass = true;
    Ok(r.note("df", df))
}
