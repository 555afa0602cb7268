//! Separation times and record counts on growing CRT subtrees.
//!
//! On a segment started from a finite level `q`, the separation time `θ` is a
//! pure-jump nonincreasing path: from level `v` the next jump comes after an
//! Exp(v) distance and lands uniformly on `(0, v)`. On the root branch the
//! level is infinite, so records accumulate at the root; that branch is
//! generated top-down and lazily, only as deep as anything has asked for.

use crate::crt::{new_tree, BranchId, Tree, TreePoint};
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{make_stream, RandomStream};
use crate::stats::{mean_and_stderr, StatReport};

/// Levels of the lazy root recursion allowed before giving up.
pub const MAX_ROOT_LEVELS: usize = 10_000;

/// A change of `θ`: from `offset` on (away from the root) the value is `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub offset: f64,
    pub value: f64,
}

/// `θ` along a segment `[0, length]` started from a finite level.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPath {
    start: f64,
    length: f64,
    jumps: Vec<Jump>,
}

impl LinearPath {
    /// Builds a path from explicit jumps; offsets must increase inside
    /// `(0, length]` and values must decrease.
    pub fn from_jumps(start: f64, length: f64, jumps: Vec<Jump>) -> Result<Self> {
        let mut prev = Jump {
            offset: 0.0,
            value: start,
        };
        for j in &jumps {
            if !(j.offset > prev.offset) || j.offset > length || !(j.value < prev.value) || j.value < 0.0 {
                return Err(Error::InvalidArgument(format!("bad jump sequence at {j:?}")));
            }
            prev = *j;
        }
        Ok(Self { start, length, jumps })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    /// `θ(x)`, right-continuous at jumps.
    pub fn value_at(&self, x: f64) -> f64 {
        let idx = self.jumps.partition_point(|j| j.offset <= x);
        if idx == 0 {
            self.start
        } else {
            self.jumps[idx - 1].value
        }
    }

    /// Number of jumps in `[0, t]`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jumps.partition_point(|j| j.offset <= t)
    }

    /// `∫_0^t θ(s) ds`, exact.
    pub fn integral_to(&self, t: f64) -> f64 {
        let t = t.min(self.length);
        let mut acc = 0.0;
        let mut pos = 0.0;
        let mut value = self.start;
        for j in &self.jumps {
            if j.offset >= t {
                break;
            }
            acc += value * (j.offset - pos);
            pos = j.offset;
            value = j.value;
        }
        acc + value * (t - pos).max(0.0)
    }

    pub fn integral(&self) -> f64 {
        self.integral_to(self.length)
    }
}

/// Simulates a linear record process started at level `q` on `[0, length]`.
pub fn linear_record_finite(stream: &mut RandomStream, q: f64, length: f64) -> Result<LinearPath> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "start level {q} must be positive and finite"
        )));
    }
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::InvalidArgument(format!("segment length {length}")));
    }
    let mut jumps = Vec::new();
    let mut pos = 0.0;
    let mut value = q;
    loop {
        let gap = stream.standard_exponential() / value;
        pos += gap;
        if pos > length {
            break;
        }
        let next = value * stream.next_open_unit();
        // underflow to a level that can no longer jump in finite distance
        if !(next > 0.0) || next >= value {
            break;
        }
        value = next;
        jumps.push(Jump { offset: pos, value });
    }
    Ok(LinearPath {
        start: q,
        length,
        jumps,
    })
}

/// `θ` on the root branch (infinite level at the root), materialized
/// top-down. `records` are ordered by decreasing position and increasing
/// value; `θ = records[j].value` on `[records[j].offset, records[j-1].offset)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootProfile {
    length: f64,
    records: Vec<Jump>,
}

impl RootProfile {
    pub fn new(length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("root branch length {length}")));
        }
        Ok(Self {
            length,
            records: Vec::new(),
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn records(&self) -> &[Jump] {
        &self.records
    }

    /// Lowest materialized position; `θ` is known on `[frontier, length]`.
    pub fn frontier(&self) -> f64 {
        self.records.last().map_or(self.length, |r| r.offset)
    }

    /// Extends the recursion until `θ(needed)` is determined.
    pub fn extend_to(&mut self, stream: &mut RandomStream, needed: f64) -> Result<()> {
        if !(needed > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "root profile cannot be materialized down to {needed}: θ is infinite at the root"
            )));
        }
        if needed > self.length {
            return Err(Error::InvalidArgument(format!(
                "position {needed} beyond root branch length {}",
                self.length
            )));
        }
        while self.records.is_empty() || self.frontier() > needed {
            if self.records.len() >= MAX_ROOT_LEVELS {
                return Err(Error::RecursionDepth(MAX_ROOT_LEVELS));
            }
            let span = self.frontier();
            let base = self.records.last().map_or(0.0, |r| r.value);
            let value = base + stream.standard_exponential() / span;
            let offset = span * stream.next_open_unit();
            self.records.push(Jump { offset, value });
        }
        Ok(())
    }

    pub fn value_at(&self, x: f64) -> Result<f64> {
        let idx = self.records.partition_point(|r| r.offset > x);
        self.records.get(idx).map(|r| r.value).ok_or(Error::NotMaterialized {
            frontier: self.frontier(),
            requested: x,
        })
    }

    /// Records strictly above `cut`.
    pub fn count_above(&self, cut: f64) -> usize {
        self.records.partition_point(|r| r.offset > cut)
    }

    /// `∫_{cut}^{length} θ(s) ds`, exact.
    pub fn integral_from(&self, cut: f64) -> Result<f64> {
        if self.frontier() > cut {
            return Err(Error::NotMaterialized {
                frontier: self.frontier(),
                requested: cut,
            });
        }
        let mut acc = 0.0;
        let mut upper = self.length;
        for r in &self.records {
            let lower = r.offset.max(cut);
            if upper > lower {
                acc += r.value * (upper - lower);
            }
            if r.offset <= cut {
                break;
            }
            upper = r.offset;
        }
        Ok(acc)
    }
}

/// Builds a root-branch profile materialized down to `needed`.
pub fn linear_record_infinite(stream: &mut RandomStream, length: f64, needed: f64) -> Result<RootProfile> {
    let mut p = RootProfile::new(length)?;
    p.extend_to(stream, needed)?;
    Ok(p)
}

/// Separation-time values on every branch of a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaProfile {
    pub root: RootProfile,
    /// `branches[k - 1]` is the path on branch `k`.
    pub branches: Vec<LinearPath>,
}

impl ThetaProfile {
    pub fn path(&self, id: BranchId) -> Option<&LinearPath> {
        id.checked_sub(1).and_then(|i| self.branches.get(i))
    }

    pub fn value_at(&self, p: TreePoint) -> Result<f64> {
        if p.branch == 0 {
            self.root.value_at(p.offset)
        } else {
            self.path(p.branch)
                .map(|path| path.value_at(p.offset))
                .ok_or(Error::InvalidPoint {
                    branch: p.branch,
                    offset: p.offset,
                })
        }
    }
}

/// `∫ θ dℓ` over every non-root branch plus the root-branch piece above
/// `lower_cut`.
pub fn integral_theta(profile: &ThetaProfile, tree: &Tree, lower_cut: f64) -> Result<f64> {
    if profile.branches.len() + 1 != tree.n_branches() {
        return Err(Error::LengthMismatch(profile.branches.len() + 1, tree.n_branches()));
    }
    let root = profile.root.integral_from(lower_cut)?;
    Ok(root + profile.branches.iter().map(LinearPath::integral).sum::<f64>())
}

/// Per-checkpoint observables of one growth trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordSummary {
    pub n: usize,
    pub total_length: f64,
    /// `h_{∅,n}`; NaN for `n = 1`.
    pub h: f64,
    pub x_star: u64,
    pub integral: f64,
    pub theta_hat_l: f64,
    pub theta_hat_sqrt: f64,
}

/// One tree together with its separation times, grown branch by branch.
#[derive(Debug, Clone)]
pub struct Trajectory {
    stream: RandomStream,
    tree: Tree,
    profile: ThetaProfile,
    branch_jumps: u64,
    branch_integral: f64,
}

impl Trajectory {
    pub fn new(seed: u64, replicate: u64) -> Self {
        Self::from_stream(make_stream(seed, replicate))
    }

    pub fn from_stream(mut stream: RandomStream) -> Self {
        let tree = new_tree(&mut stream);
        let root = RootProfile::new(tree.root_length()).expect("positive root length");
        Self {
            stream,
            tree,
            profile: ThetaProfile {
                root,
                branches: Vec::new(),
            },
            branch_jumps: 0,
            branch_integral: 0.0,
        }
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn profile(&self) -> &ThetaProfile {
        &self.profile
    }

    pub fn n(&self) -> usize {
        self.tree.n_branches()
    }

    /// Adds one branch and runs the record process along it.
    pub fn grow(&mut self) -> Result<()> {
        let rec = self.tree.grow(&mut self.stream);
        let parent = rec.attach_branch.expect("grown branches are attached");
        let start = if parent == 0 {
            self.profile.root.extend_to(&mut self.stream, rec.attach_offset)?;
            self.profile.root.value_at(rec.attach_offset)?
        } else {
            self.profile.branches[parent - 1].value_at(rec.attach_offset)
        };
        let path = linear_record_finite(&mut self.stream, start, rec.length)?;
        self.branch_jumps += path.jump_count() as u64;
        self.branch_integral += path.integral();
        self.profile.branches.push(path);
        Ok(())
    }

    pub fn grow_to(&mut self, n: usize) -> Result<()> {
        while self.n() < n {
            self.grow()?;
        }
        Ok(())
    }

    /// `θ(p)`, extending the root recursion from this trajectory's own
    /// stream when `p` lies below the materialized frontier.
    pub fn theta_at(&mut self, p: TreePoint) -> Result<f64> {
        self.tree.check_point(p)?;
        if p.branch == 0 && p.offset < self.profile.root.frontier() {
            self.profile.root.extend_to(&mut self.stream, p.offset)?;
        }
        self.profile.value_at(p)
    }

    /// Cut height defining `T_n*`; the whole root branch when `n = 1`.
    fn cut(&self) -> f64 {
        self.tree
            .first_branch_point()
            .unwrap_or_else(|| self.tree.root_length())
    }

    /// `X_n*`, maintained incrementally.
    pub fn x_star(&self) -> u64 {
        self.branch_jumps + self.profile.root.count_above(self.cut()) as u64
    }

    /// `X_n*` recounted from the stored profiles.
    pub fn recount_x_star(&self) -> u64 {
        let on_branches: usize = self.profile.branches.iter().map(LinearPath::jump_count).sum();
        (on_branches + self.profile.root.count_above(self.cut())) as u64
    }

    pub fn summary(&self) -> Result<RecordSummary> {
        let n = self.n();
        let cut = self.cut();
        let integral = if n == 1 {
            0.0
        } else {
            self.branch_integral + self.profile.root.integral_from(cut)?
        };
        let total_length = self.tree.total_length();
        Ok(RecordSummary {
            n,
            total_length,
            h: self.tree.first_branch_point().unwrap_or(f64::NAN),
            x_star: self.x_star(),
            integral,
            theta_hat_l: integral / total_length,
            theta_hat_sqrt: integral / (2.0 * n as f64).sqrt(),
        })
    }
}

/// Grows one trajectory to `n_max` branches and reports at each checkpoint.
pub fn run_growth(seed: u64, replicate: u64, n_max: usize, checkpoints: &[usize]) -> Result<Vec<RecordSummary>> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} < 2")));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.first().is_some_and(|&c| c == 0) || checkpoints.last().is_some_and(|&c| c > n_max) {
        return Err(Error::InvalidArgument(format!("checkpoints must lie in 1..={n_max}")));
    }
    let mut traj = Trajectory::new(seed, replicate);
    let mut out = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        traj.grow_to(c)?;
        out.push(traj.summary()?);
    }
    traj.grow_to(n_max)?;
    Ok(out)
}

/// Martingale checks for the linear record process on `[0, t]` from level `q`.
#[derive(Debug, Clone)]
pub struct MartingaleReport {
    /// `E[N_t]`, `N_t = X_t − ∫θ`.
    pub first: StatReport,
    /// `E[N_t² − ∫θ]`.
    pub second: StatReport,
    /// `E[N_t⁴ − 3(∫θ)² − ∫θ]`.
    pub fourth: StatReport,
    /// `E[N_t⁴ − ∫(6N² + 4N + 1)θ]`, the compensator from Itô's formula for
    /// a counting process with random intensity.
    pub fourth_compensated: StatReport,
}

/// `∫₀ᵗ (6N_s² + 4N_s + 1) θ(s) ds`, exact: between jumps `N` is linear.
pub fn fourth_power_compensator(path: &LinearPath) -> f64 {
    let mut acc = 0.0;
    let mut n0 = 0.0;
    let mut level = path.start();
    let mut from = 0.0;
    let mut piece = |level: f64, len: f64, n0: f64| -> f64 {
        let n1 = n0 - level * len;
        let int_n = 0.5 * len * (n0 + n1);
        let int_n2 = len * (n0 * n0 + n0 * n1 + n1 * n1) / 3.0;
        acc += level * (6.0 * int_n2 + 4.0 * int_n + len);
        n1
    };
    for j in path.jumps() {
        n0 = piece(level, j.offset - from, n0) + 1.0;
        level = j.value;
        from = j.offset;
    }
    piece(level, path.length() - from, n0);
    acc
}

pub fn martingale_stats(q: f64, t: f64, replicates: usize, seed: u64) -> Result<MartingaleReport> {
    if !(q > 0.0) || !q.is_finite() || !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "need 0 < q < ∞ and t > 0, got q={q}, t={t}"
        )));
    }
    if replicates < 1000 {
        return Err(Error::TooFewSamples {
            needed: 1000,
            got: replicates,
        });
    }
    let draws = par::try_map_replicates(replicates as u64, |r| {
        let mut s = make_stream(seed, r);
        let path = linear_record_finite(&mut s, q, t)?;
        Ok((
            path.jump_count() as f64,
            path.integral(),
            fourth_power_compensator(&path),
        ))
    })?;
    let mut d = Vec::with_capacity(replicates);
    let mut a = Vec::with_capacity(replicates);
    let mut b = Vec::with_capacity(replicates);
    let mut c = Vec::with_capacity(replicates);
    for (x, i, comp) in draws {
        let n = x - i;
        d.push(n.powi(4) - comp);
        a.push(n);
        b.push(n * n - i);
        c.push(n.powi(4) - 3.0 * i * i - i);
    }
    let report = |name: &str, xs: &[f64], k: f64| {
        let (m, se) = mean_and_stderr(xs);
        let mut r = StatReport::estimate(name, m, se);
        r.statistic = if se > 0.0 { m / se } else { 0.0 };
        r.pass = m.abs() < k * se;
        r.meta.push(("q".into(), q.to_string()));
        r.meta.push(("t".into(), t.to_string()));
        r
    };
    Ok(MartingaleReport {
        first: report("martingale_N", &a, 4.0),
        second: report("martingale_N2", &b, 4.0),
        fourth: report("martingale_N4", &c, 5.0),
        fourth_compensated: report("martingale_N4_compensated", &d, 5.0),
    })
}
