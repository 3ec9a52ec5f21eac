//! Discrete dynamic time warping between two event sequences.
//!
//! An alignment is a lattice path of steps `(1,1)`, `(1,0)` and `(0,1)` that
//! starts by pairing the two first points and ends at `(ℓ, m)`. A step `(1,0)`
//! may never be followed directly by `(0,1)` or the reverse, so a fan-in of
//! several source points onto one target point can not turn straight into a
//! fan-out.
//!
//! The path cost is `Σ_k w(k) · d(a_{L_k}, b_{M_k})` with the time weight
//! `w(k) = (t_{L_k} − t_{L_{k−1}} + s_{M_k} − s_{M_{k−1}}) / 2` and `w(1) = 0`.
//!
//! The dynamic program keeps one cost per cell *and per incoming step*, so the
//! adjacency restriction is applied exactly: a single cost per cell would let a
//! locally cheaper arrival hide the path that is globally optimal under the
//! restriction. Forbidden transitions are represented by `f64::INFINITY`,
//! which loses every comparison. Ties prefer `(1,1)`, then `(1,0)`, then
//! `(0,1)`.

use std::fmt;

use crate::curve::EventCurve;
use crate::error::{Error, Result};

/// Largest sequence length accepted by [`enumerate_alignments`].
pub const ENUMERATION_LIMIT: usize = 8;

/// One move of an alignment path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Step {
    /// `(1,1)`: advance both sequences.
    Diagonal,
    /// `(1,0)`: advance the source sequence only.
    Source,
    /// `(0,1)`: advance the target sequence only.
    Target,
}

impl Step {
    pub const ALL: [Step; 3] = [Step::Diagonal, Step::Source, Step::Target];

    pub fn delta(self) -> (usize, usize) {
        match self {
            Step::Diagonal => (1, 1),
            Step::Source => (1, 0),
            Step::Target => (0, 1),
        }
    }

    /// Whether `next` may directly follow `self`.
    pub fn may_precede(self, next: Step) -> bool {
        !matches!(
            (self, next),
            (Step::Source, Step::Target) | (Step::Target, Step::Source)
        )
    }

    fn transposed(self) -> Step {
        match self {
            Step::Diagonal => Step::Diagonal,
            Step::Source => Step::Target,
            Step::Target => Step::Source,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (x, y) = self.delta();
        write!(f, "({x},{y})")
    }
}

/// A lattice path aligning a source sequence of length ℓ with a target of
/// length m.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alignment {
    steps: Vec<Step>,
}

impl Alignment {
    /// Wraps `steps` after checking that they form an alignment of lengths
    /// `(source_len, target_len)`.
    pub fn from_steps(steps: Vec<Step>, source_len: usize, target_len: usize) -> Result<Self> {
        let alignment = Self { steps };
        if !alignment.fits(source_len, target_len) {
            return Err(Error::ShapeMismatch {
                expected_source: source_len,
                expected_target: target_len,
            });
        }
        Ok(alignment)
    }

    /// The all-diagonal alignment of two sequences of length `n`.
    pub fn diagonal(n: usize) -> Self {
        Self {
            steps: vec![Step::Diagonal; n],
        }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Sum of all steps, i.e. `(ℓ, m)` for a valid alignment.
    pub fn extent(&self) -> (usize, usize) {
        self.steps.iter().fold((0, 0), |(x, y), s| {
            let (dx, dy) = s.delta();
            (x + dx, y + dy)
        })
    }

    /// True when the path starts with the forced first pairing and ends at
    /// `(source_len, target_len)`.
    pub fn fits(&self, source_len: usize, target_len: usize) -> bool {
        self.steps.first() == Some(&Step::Diagonal) && self.extent() == (source_len, target_len)
    }

    /// Zero-based `(source, target)` index pairs visited by the path, in order.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::with_capacity(self.steps.len());
        let (mut x, mut y) = (0usize, 0usize);
        for s in &self.steps {
            let (dx, dy) = s.delta();
            x += dx;
            y += dy;
            cells.push((x - 1, y - 1));
        }
        cells
    }

    /// Number of places where `(1,0)` and `(0,1)` touch.
    pub fn adjacency_violations(&self) -> usize {
        self.steps.windows(2).filter(|w| !w[0].may_precede(w[1])).count()
    }

    /// The same alignment with source and target swapped.
    pub fn transpose(&self) -> Self {
        Self {
            steps: self.steps.iter().map(|s| s.transposed()).collect(),
        }
    }

    /// Pairs `(i, j)` where source point `i` and target point `j` are each
    /// aligned to exactly one point, namely each other.
    pub fn one_to_one_pairs(&self) -> Vec<(usize, usize)> {
        let cells = self.cells();
        let (l, m) = self.extent();
        let mut source_count = vec![0usize; l];
        let mut target_count = vec![0usize; m];
        for &(i, j) in &cells {
            source_count[i] += 1;
            target_count[j] += 1;
        }
        cells
            .into_iter()
            .filter(|&(i, j)| source_count[i] == 1 && target_count[j] == 1)
            .collect()
    }

    /// Text correspondence diagram: aligned groups side by side, the
    /// source labels on top and the target labels below.
    pub fn diagram(&self, source_label: &str, target_label: &str) -> String {
        let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
        for (step, (i, j)) in self.steps.iter().zip(self.cells()) {
            if *step == Step::Diagonal || groups.is_empty() {
                groups.push((vec![i], vec![j]));
            } else {
                let g = groups.last_mut().expect("non-empty");
                if g.0.last() != Some(&i) {
                    g.0.push(i);
                }
                if g.1.last() != Some(&j) {
                    g.1.push(j);
                }
            }
        }
        let fmt_side = |label: &str, idx: &[usize]| {
            idx.iter()
                .map(|k| format!("{label}{}", k + 1))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut top = Vec::new();
        let mut mid = Vec::new();
        let mut bottom = Vec::new();
        for (src, tgt) in &groups {
            let a = fmt_side(source_label, src);
            let b = fmt_side(target_label, tgt);
            let link = match (src.len(), tgt.len()) {
                (1, 1) => "|",
                (_, 1) => "\\|/",
                _ => "/|\\",
            };
            let width = a.len().max(b.len()).max(link.len());
            top.push(format!("{a:^width$}"));
            mid.push(format!("{link:^width$}"));
            bottom.push(format!("{b:^width$}"));
        }
        format!(
            "{}\n{}\n{}",
            top.join("   ").trim_end(),
            mid.join("   ").trim_end(),
            bottom.join("   ").trim_end()
        )
    }
}

impl fmt::Display for Alignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, s) in self.steps.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

/// Weighted alignment distance.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlignmentCost(pub f64);

impl AlignmentCost {
    pub fn total(self) -> f64 {
        self.0
    }
}

/// Borrowed view of a sequence: event times and the values aligned by DTW.
#[derive(Debug, Clone, Copy)]
pub struct Series<'a> {
    pub times: &'a [f64],
    pub values: &'a [f64],
}

impl<'a> Series<'a> {
    pub fn new(times: &'a [f64], values: &'a [f64]) -> Self {
        assert_eq!(times.len(), values.len(), "times and values differ in length");
        Self { times, values }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

impl EventCurve {
    pub fn series(&self) -> Series<'_> {
        Series::new(self.times(), self.values())
    }
}

/// Absolute difference: the Euclidean distance on the real line.
pub fn euclidean(a: f64, b: f64) -> f64 {
    (a - b).abs()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlignOptions {
    /// Zero-based `(source, target)` pairs that must be aligned one-to-one:
    /// the path enters each by a `(1,1)` step and, unless it is the final
    /// cell, leaves it by a `(1,1)` step.
    pub forced_pairs: Vec<(usize, usize)>,
}

/// Aligns two anchored curves on the same domain.
pub fn align<M>(
    a: &EventCurve,
    b: &EventCurve,
    metric: M,
    options: &AlignOptions,
) -> Result<(Alignment, AlignmentCost)>
where
    M: Fn(f64, f64) -> f64,
{
    for c in [a, b] {
        if !c.is_anchored() {
            return Err(Error::UnanchoredInput(c.id().to_owned()));
        }
    }
    if a.domain() != b.domain() {
        return Err(Error::DomainMismatch(a.id().to_owned(), b.id().to_owned()));
    }
    align_series(a.series(), b.series(), metric, &options.forced_pairs)
}

/// Optimal alignment of two raw sequences.
pub fn align_series<M>(
    a: Series<'_>,
    b: Series<'_>,
    metric: M,
    forced_pairs: &[(usize, usize)],
) -> Result<(Alignment, AlignmentCost)>
where
    M: Fn(f64, f64) -> f64,
{
    let (l, m) = (a.len(), b.len());
    if l == 0 || m == 0 {
        return Err(Error::ShapeMismatch {
            expected_source: l,
            expected_target: m,
        });
    }

    // Waypoints: start, the interior forced pairs, end.
    let mut waypoints = vec![(0usize, 0usize)];
    for &(i, j) in forced_pairs {
        if i >= l || j >= m {
            return Err(Error::InvalidForcedPair(i, j));
        }
        if (i, j) == (0, 0) || (i, j) == (l - 1, m - 1) {
            continue;
        }
        let &(pi, pj) = waypoints.last().expect("start present");
        if i <= pi || j <= pj || i == l - 1 || j == m - 1 {
            return Err(Error::InvalidForcedPair(i, j));
        }
        waypoints.push((i, j));
    }
    let n_forced = waypoints.len() - 1;
    waypoints.push((l - 1, m - 1));

    let mut steps = vec![Step::Diagonal];
    let mut total = 0.0;
    for (seg, pair) in waypoints.windows(2).enumerate() {
        let leaves_forced = seg > 0;
        let enters_forced = seg < n_forced;
        let segment = Segment {
            start: pair[0],
            end: pair[1],
            first_step_diagonal: leaves_forced,
            last_step_diagonal: enters_forced,
        };
        let (seg_steps, seg_total) = segment.solve(&a, &b, &metric, total);
        let Some(seg_steps) = seg_steps else {
            let bad = if enters_forced { pair[1] } else { pair[0] };
            return Err(Error::InvalidForcedPair(bad.0, bad.1));
        };
        steps.extend(seg_steps);
        total = seg_total;
    }
    Ok((Alignment { steps }, AlignmentCost(total)))
}

#[inline]
fn step_weight(step: Step, a: &Series<'_>, b: &Series<'_>, i: usize, j: usize) -> f64 {
    match step {
        Step::Diagonal => (a.times[i] - a.times[i - 1] + b.times[j] - b.times[j - 1]) / 2.0,
        Step::Source => (a.times[i] - a.times[i - 1]) / 2.0,
        Step::Target => (b.times[j] - b.times[j - 1]) / 2.0,
    }
}

/// A rectangular sub-problem between two waypoints.
struct Segment {
    start: (usize, usize),
    end: (usize, usize),
    first_step_diagonal: bool,
    last_step_diagonal: bool,
}

impl Segment {
    /// Returns the steps after `start` (excluded) up to `end`, and the running
    /// total. `None` when no admissible path exists.
    fn solve<M>(&self, a: &Series<'_>, b: &Series<'_>, metric: &M, start_cost: f64) -> (Option<Vec<Step>>, f64)
    where
        M: Fn(f64, f64) -> f64,
    {
        let (i0, j0) = self.start;
        let (i1, j1) = self.end;
        let rows = i1 - i0 + 1;
        let cols = j1 - j0 + 1;
        let idx = |p: usize, q: usize| p * cols + q;

        // cost[state][cell]: best cost of reaching the cell with the last step `state`.
        let mut cost = [
            vec![f64::INFINITY; rows * cols],
            vec![f64::INFINITY; rows * cols],
            vec![f64::INFINITY; rows * cols],
        ];
        let mut back = [vec![0u8; rows * cols], vec![0u8; rows * cols], vec![0u8; rows * cols]];
        // Entering the start cell counts as a diagonal step.
        cost[Step::Diagonal.index()][0] = start_cost;

        for p in 0..rows {
            for q in 0..cols {
                if p == 0 && q == 0 {
                    continue;
                }
                let (i, j) = (i0 + p, j0 + q);
                let d = metric(a.values[i], b.values[j]);
                for step in Step::ALL {
                    let (dp, dq) = step.delta();
                    if p < dp || q < dq {
                        continue;
                    }
                    let (pp, pq) = (p - dp, q - dq);
                    if self.first_step_diagonal && (pp, pq) == (0, 0) && step != Step::Diagonal {
                        continue;
                    }
                    let pred = idx(pp, pq);
                    let mut best = f64::INFINITY;
                    let mut best_state = 0u8;
                    for prev in Step::ALL {
                        if !prev.may_precede(step) {
                            continue;
                        }
                        let c = cost[prev.index()][pred];
                        if c < best {
                            best = c;
                            best_state = prev as u8;
                        }
                    }
                    if best == f64::INFINITY {
                        continue;
                    }
                    let cell = idx(p, q);
                    cost[step.index()][cell] = best + step_weight(step, a, b, i, j) * d;
                    back[step.index()][cell] = best_state;
                }
            }
        }

        let end = idx(rows - 1, cols - 1);
        if rows == 1 && cols == 1 {
            return (Some(Vec::new()), start_cost);
        }
        let candidates: &[Step] = if self.last_step_diagonal {
            &[Step::Diagonal]
        } else {
            &Step::ALL
        };
        let mut best = f64::INFINITY;
        let mut state = Step::Diagonal;
        for &s in candidates {
            let c = cost[s.index()][end];
            if c < best {
                best = c;
                state = s;
            }
        }
        if best == f64::INFINITY {
            return (None, best);
        }

        let mut steps = Vec::with_capacity(rows + cols);
        let (mut p, mut q) = (rows - 1, cols - 1);
        while (p, q) != (0, 0) {
            steps.push(state);
            let prev = back[state.index()][idx(p, q)];
            let (dp, dq) = state.delta();
            p -= dp;
            q -= dq;
            state = Step::ALL[prev as usize];
        }
        steps.reverse();
        (Some(steps), best)
    }
}

/// Evaluates the weighted alignment distance of `alignment`.
pub fn alignment_cost<M>(alignment: &Alignment, a: Series<'_>, b: Series<'_>, metric: M) -> Result<AlignmentCost>
where
    M: Fn(f64, f64) -> f64,
{
    if !alignment.fits(a.len(), b.len()) {
        return Err(Error::ShapeMismatch {
            expected_source: a.len(),
            expected_target: b.len(),
        });
    }
    let mut total = 0.0;
    for (k, (step, (i, j))) in alignment.steps.iter().zip(alignment.cells()).enumerate() {
        if k == 0 {
            continue;
        }
        total += step_weight(*step, &a, &b, i, j) * metric(a.values[i], b.values[j]);
    }
    Ok(AlignmentCost(total))
}

/// Every admissible alignment of sequences with lengths `source_len` and
/// `target_len` (both at most [`ENUMERATION_LIMIT`]).
pub fn enumerate_alignments(source_len: usize, target_len: usize) -> Result<Vec<Alignment>> {
    enumerate_paths(source_len, target_len, true)
}

fn enumerate_paths(source_len: usize, target_len: usize, restricted: bool) -> Result<Vec<Alignment>> {
    if source_len > ENUMERATION_LIMIT || target_len > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            source_len,
            target_len,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut out = Vec::new();
    if source_len == 0 || target_len == 0 {
        return Ok(out);
    }
    let mut path = vec![Step::Diagonal];
    extend_paths((1, 1), (source_len, target_len), restricted, &mut path, &mut out);
    Ok(out)
}

fn extend_paths(
    at: (usize, usize),
    goal: (usize, usize),
    restricted: bool,
    path: &mut Vec<Step>,
    out: &mut Vec<Alignment>,
) {
    if at == goal {
        out.push(Alignment { steps: path.clone() });
        return;
    }
    for step in Step::ALL {
        let (dx, dy) = step.delta();
        let next = (at.0 + dx, at.1 + dy);
        if next.0 > goal.0 || next.1 > goal.1 {
            continue;
        }
        if restricted && !path.last().is_some_and(|last| last.may_precede(step)) {
            continue;
        }
        path.push(step);
        extend_paths(next, goal, restricted, path, out);
        path.pop();
    }
}
