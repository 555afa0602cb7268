//! Stick-breaking construction of the leaf-spanned subtrees `T_1 ⊂ T_2 ⊂ …`
//! of the Brownian CRT.
//!
//! Branch 0 runs from the root to the first leaf. Branch `k ≥ 1` is glued at
//! a point chosen uniformly under the length measure of the current tree and
//! carries the `(k+1)`-th leaf. Total lengths follow `L_k² = L_{k-1}² + 2E_k`
//! with i.i.d. standard exponentials `E_k`, so `L_n` is Chi(2n)-distributed.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::rng::RandomStream;

pub type BranchId = usize;

/// Absolute tolerance for offset comparisons.
pub const OFFSET_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRecord {
    /// `None` only for branch 0.
    pub attach_branch: Option<BranchId>,
    /// Arclength along the parent, measured from the parent's own base.
    pub attach_offset: f64,
    pub length: f64,
}

/// A point of the skeleton: `offset` is measured from the base of `branch`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreePoint {
    pub branch: BranchId,
    pub offset: f64,
}

/// A maximal piece `[start, end]` of one branch on a root path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub branch: BranchId,
    pub start: f64,
    pub end: f64,
}

impl PathSegment {
    pub fn len(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Debug, Clone)]
pub struct Tree {
    branches: Vec<BranchRecord>,
    /// `cumulative[k]` is the summed length of branches `0..=k`.
    cumulative: Vec<f64>,
    /// Lowest attachment height on branch 0, if any branch is glued there.
    first_branch_point: Option<f64>,
}

/// `√(2E)`: the Rayleigh length of the first branch from an Exp(1) draw.
pub fn root_length_from_exp(e: f64) -> f64 {
    (2.0 * e).sqrt()
}

/// New-branch length `√(L² + 2E) − L`, written to avoid cancellation.
pub fn branch_length_from_exp(total_length: f64, e: f64) -> f64 {
    let grown = (total_length * total_length + 2.0 * e).sqrt();
    2.0 * e / (grown + total_length)
}

/// Creates `T_1`: one branch of Rayleigh length.
pub fn new_tree(stream: &mut RandomStream) -> Tree {
    loop {
        let len = root_length_from_exp(stream.standard_exponential());
        if len > 0.0 {
            return Tree::with_root_length(len).expect("positive length");
        }
    }
}

impl Tree {
    pub fn with_root_length(length: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("root length {length}")));
        }
        Ok(Self {
            branches: vec![BranchRecord {
                attach_branch: None,
                attach_offset: 0.0,
                length,
            }],
            cumulative: vec![length],
            first_branch_point: None,
        })
    }

    /// Rebuilds a tree from explicit branch records, validating the
    /// attachment invariants.
    pub fn from_branches(records: &[BranchRecord]) -> Result<Self> {
        let first = records
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty branch list".into()))?;
        if first.attach_branch.is_some() {
            return Err(Error::InvalidArgument("branch 0 must be unattached".into()));
        }
        let mut tree = Self::with_root_length(first.length)?;
        for rec in &records[1..] {
            let parent = rec
                .attach_branch
                .ok_or_else(|| Error::InvalidArgument("only branch 0 may be unattached".into()))?;
            tree.attach(
                TreePoint {
                    branch: parent,
                    offset: rec.attach_offset,
                },
                rec.length,
            )?;
        }
        Ok(tree)
    }

    pub fn n_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn branches(&self) -> &[BranchRecord] {
        &self.branches
    }

    pub fn branch(&self, id: BranchId) -> Option<&BranchRecord> {
        self.branches.get(id)
    }

    /// `L_n`, the total length.
    pub fn total_length(&self) -> f64 {
        *self.cumulative.last().expect("tree is never empty")
    }

    pub fn root_length(&self) -> f64 {
        self.branches[0].length
    }

    /// Height of the lowest branch point `h_{∅,n}`; `None` for a single branch.
    pub fn first_branch_point(&self) -> Option<f64> {
        self.first_branch_point
    }

    /// Glues a branch of `length` at `point`, which must lie strictly inside
    /// an existing branch.
    pub fn attach(&mut self, point: TreePoint, length: f64) -> Result<BranchRecord> {
        self.check_point(point)?;
        let parent_len = self.branches[point.branch].length;
        if point.offset <= 0.0 || point.offset >= parent_len {
            return Err(Error::InvalidPoint {
                branch: point.branch,
                offset: point.offset,
            });
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidArgument(format!("branch length {length}")));
        }
        let rec = BranchRecord {
            attach_branch: Some(point.branch),
            attach_offset: point.offset,
            length,
        };
        self.branches.push(rec);
        self.cumulative.push(self.total_length() + length);
        if point.branch == 0 {
            self.first_branch_point = Some(match self.first_branch_point {
                Some(h) => h.min(point.offset),
                None => point.offset,
            });
        }
        Ok(rec)
    }

    /// Adds the next branch of the stick-breaking construction.
    pub fn grow(&mut self, stream: &mut RandomStream) -> BranchRecord {
        let total = self.total_length();
        let length = loop {
            let x = branch_length_from_exp(total, stream.standard_exponential());
            if x > 0.0 {
                break x;
            }
        };
        let point = self.sample_uniform_point(stream);
        self.attach(point, length)
            .expect("sampled points are interior and lengths positive")
    }

    /// Maps an arclength coordinate in `[0, L_n)` onto the skeleton, walking
    /// branches in index order.
    pub fn point_at_arclength(&self, arclength: f64) -> Result<TreePoint> {
        if !(arclength >= 0.0) || arclength > self.total_length() {
            return Err(Error::InvalidArgument(format!(
                "arclength {arclength} outside [0, {}]",
                self.total_length()
            )));
        }
        let k = self
            .cumulative
            .partition_point(|&c| c <= arclength)
            .min(self.branches.len() - 1);
        let base = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        let offset = (arclength - base).clamp(0.0, self.branches[k].length);
        Ok(TreePoint { branch: k, offset })
    }

    /// Uniform point under the length measure, strictly inside a branch.
    pub fn sample_uniform_point(&self, stream: &mut RandomStream) -> TreePoint {
        let total = self.total_length();
        loop {
            let a = stream.next_unit() * total;
            let p = self.point_at_arclength(a).expect("in range");
            let len = self.branches[p.branch].length;
            if p.offset > OFFSET_TOL && p.offset < len - OFFSET_TOL {
                return p;
            }
        }
    }

    pub fn check_point(&self, p: TreePoint) -> Result<()> {
        match self.branches.get(p.branch) {
            Some(b) if p.offset >= 0.0 && p.offset <= b.length => Ok(()),
            _ => Err(Error::InvalidPoint {
                branch: p.branch,
                offset: p.offset,
            }),
        }
    }

    /// The root-to-`p` path as branch pieces ordered from the root.
    pub fn root_path(&self, p: TreePoint) -> Result<Vec<PathSegment>> {
        self.check_point(p)?;
        let mut segs = Vec::new();
        let (mut branch, mut offset) = (p.branch, p.offset);
        loop {
            segs.push(PathSegment {
                branch,
                start: 0.0,
                end: offset,
            });
            let rec = &self.branches[branch];
            match rec.attach_branch {
                Some(parent) => {
                    offset = rec.attach_offset;
                    branch = parent;
                }
                None => break,
            }
        }
        segs.reverse();
        Ok(segs)
    }

    /// Distance from the root to `p`.
    pub fn height(&self, p: TreePoint) -> Result<f64> {
        Ok(self.root_path(p)?.iter().map(PathSegment::len).sum())
    }

    /// Line-oriented dump: `k attach_branch attach_offset length`,
    /// with `-` placeholders on branch 0.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, b) in self.branches.iter().enumerate() {
            match b.attach_branch {
                None => writeln!(out, "{k} - - {}", g17(b.length)),
                Some(p) => writeln!(out, "{k} {p} {} {}", g17(b.attach_offset), g17(b.length)),
            }
            .expect("writing to a String");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}: {line:?}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let k: usize = fields[0].parse().map_err(|_| bad("branch index"))?;
            if k != records.len() {
                return Err(bad("branches out of order"));
            }
            let length: f64 = fields[3].parse().map_err(|_| bad("length"))?;
            let rec = if fields[1] == "-" && fields[2] == "-" {
                BranchRecord {
                    attach_branch: None,
                    attach_offset: 0.0,
                    length,
                }
            } else {
                BranchRecord {
                    attach_branch: Some(fields[1].parse().map_err(|_| bad("parent"))?),
                    attach_offset: fields[2].parse().map_err(|_| bad("offset"))?,
                    length,
                }
            };
            records.push(rec);
        }
        Self::from_branches(&records)
    }
}
