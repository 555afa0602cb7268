//! Flat `key = value` configuration shared by config files and CLI flags.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::discrete::Family;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Densities,
    LinearTest,
    Martingale,
    Lgn,
    Fluctuation,
    Discrete,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Densities,
        ExperimentKind::LinearTest,
        ExperimentKind::Martingale,
        ExperimentKind::Lgn,
        ExperimentKind::Fluctuation,
        ExperimentKind::Discrete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Densities => "densities",
            ExperimentKind::LinearTest => "lineartest",
            ExperimentKind::Martingale => "martingale",
            ExperimentKind::Lgn => "lgn",
            ExperimentKind::Fluctuation => "fluctuation",
            ExperimentKind::Discrete => "discrete",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Pass/fail thresholds. Every field can be set by key.
#[derive(Debug, Clone, PartialEq)]
pub struct Thresholds {
    /// Minimum KS / χ² p-value.
    pub p_min: f64,
    /// Standard errors allowed for mean-zero and moment checks.
    pub stderr_k: f64,
    /// Standard errors allowed for the fourth-power martingale.
    pub stderr_k4: f64,
    /// Relative tolerance for Monte Carlo vs quadrature of `F(q,t)`.
    pub rel_tol: f64,
    /// Relative band for `E[Z²]` around `√π`.
    pub z2_tol: f64,
    pub kurtosis_min: f64,
    pub kurtosis_max: f64,
    /// Maximum KS distance of the studentized fluctuation.
    pub ks_d_max: f64,
    pub corr_max: f64,
    pub cf_tol: f64,
    /// Relative band for the Cayley mean `E[X]/√n` around `√(π/2)`.
    pub mean_rel_tol: f64,
    /// Relative band for `Var(X)/n` around `2 − π/2`.
    pub var_rel_tol: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            p_min: 1e-3,
            stderr_k: 4.0,
            stderr_k4: 5.0,
            rel_tol: 0.02,
            z2_tol: 0.15,
            kurtosis_min: 3.3,
            kurtosis_max: 4.4,
            ks_d_max: 0.06,
            corr_max: 0.1,
            cf_tol: 0.05,
            mean_rel_tol: 0.05,
            var_rel_tol: 0.10,
        }
    }
}

impl Thresholds {
    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "p_min" => &mut self.p_min,
            "stderr_k" => &mut self.stderr_k,
            "stderr_k4" => &mut self.stderr_k4,
            "rel_tol" => &mut self.rel_tol,
            "z2_tol" => &mut self.z2_tol,
            "kurtosis_min" => &mut self.kurtosis_min,
            "kurtosis_max" => &mut self.kurtosis_max,
            "ks_d_max" => &mut self.ks_d_max,
            "corr_max" => &mut self.corr_max,
            "cf_tol" => &mut self.cf_tol,
            "mean_rel_tol" => &mut self.mean_rel_tol,
            "var_rel_tol" => &mut self.var_rel_tol,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    /// `None` means the per-experiment default.
    pub replicates: Option<usize>,
    pub n: Vec<usize>,
    pub m_ref: Option<usize>,
    pub checkpoints: Vec<usize>,
    pub threads: usize,
    pub out_dir: PathBuf,
    pub thresholds: Thresholds,
    pub q: Vec<f64>,
    pub t: Vec<f64>,
    pub families: Vec<Family>,
    pub binary_leaves: usize,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            seed: 0,
            replicates: None,
            n: Vec::new(),
            m_ref: None,
            checkpoints: Vec::new(),
            threads: 0,
            out_dir: PathBuf::from("out"),
            thresholds: Thresholds::default(),
            q: vec![2.0],
            t: vec![1.5],
            families: vec![Family::Cayley, Family::Binary],
            binary_leaves: 500,
        }
    }

    /// Applies one `key = value` pair. Dashes and underscores in keys are
    /// interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("{key}: {what} ({value:?})"));
        match key.as_str() {
            "experiment" => self.experiment = value.parse()?,
            "seed" => self.seed = value.parse().map_err(|_| bad("expected an integer"))?,
            "replicates" => {
                let r: usize = value.parse().map_err(|_| bad("expected an integer"))?;
                if r == 0 {
                    return Err(bad("must be at least 1"));
                }
                self.replicates = Some(r);
            }
            "n" => self.n = parse_list(value).map_err(|_| bad("expected integer list"))?,
            "m_ref" => self.m_ref = Some(value.parse().map_err(|_| bad("expected an integer"))?),
            "checkpoints" => self.checkpoints = parse_list(value).map_err(|_| bad("expected integer list"))?,
            "threads" => self.threads = value.parse().map_err(|_| bad("expected an integer"))?,
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "q" => self.q = parse_list(value).map_err(|_| bad("expected number list"))?,
            "t" => self.t = parse_list(value).map_err(|_| bad("expected number list"))?,
            "families" | "family" => {
                self.families = value.split(',').map(|f| f.trim().parse()).collect::<Result<_>>()?
            }
            "binary_leaves" => self.binary_leaves = value.parse().map_err(|_| bad("expected an integer"))?,
            other => {
                let slot = self
                    .thresholds
                    .slot(other)
                    .ok_or_else(|| Error::Config(format!("unknown key {other:?}")))?;
                *slot = value.parse().map_err(|_| bad("expected a number"))?;
            }
        }
        Ok(())
    }

    /// Applies a config file body: `key = value` lines, `#` comments.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value, got {raw:?}", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("checkpoints must be strictly increasing".into()));
        }
        if self.n.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("n list must be strictly increasing".into()));
        }
        if self.experiment == ExperimentKind::Fluctuation {
            if let (Some(m), Some(&nmax)) = (self.m_ref, self.n.last()) {
                if m < nmax {
                    return Err(Error::Config(format!("m_ref {m} smaller than n {nmax}")));
                }
            }
        }
        Ok(())
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, T::Err> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(str::parse)
        .collect()
}
