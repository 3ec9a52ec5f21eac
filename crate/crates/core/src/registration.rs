//! Sample-wide registration from pairwise maps.
//!
//! For curve `i`, every other curve `j` contributes the pairwise map `ĝ_ji`
//! sampled at `i`'s points; their average is the estimate of `h_i⁻¹` at those
//! points. Each unordered pair is aligned exactly once and both directions are
//! read from the same alignment. Pairs run in parallel on the current rayon
//! pool; the reduction always visits `j` in ascending order, so the result does
//! not depend on the thread count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::curve::{make_strict, Domain, EventCurve};
use crate::error::{Error, Result};
use crate::interp;
use crate::pairwise::{warp_pair, PairMaps, PairOptions};

pub const DEFAULT_GRID_SIZE: usize = 101;

/// Estimated inverse warping function of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingEstimate {
    pub curve_id: String,
    pub domain: Domain,
    /// The curve's points (anchors included when the curve was anchored).
    pub event_times: Vec<f64>,
    /// `ĥ⁻¹` at `event_times`.
    pub h_inv_values: Vec<f64>,
    pub grid: Vec<f64>,
    pub grid_values: Vec<f64>,
}

impl WarpingEstimate {
    /// The identity estimate for `curve`, gridded with `g` points.
    pub fn identity(curve: &EventCurve, g: usize) -> Result<Self> {
        Self {
            curve_id: curve.id().to_owned(),
            domain: curve.domain(),
            event_times: curve.times().to_vec(),
            h_inv_values: curve.times().to_vec(),
            grid: Vec::new(),
            grid_values: Vec::new(),
        }
        .to_common_grid(g)
    }

    /// Interpolation knots: the event samples plus the fixed domain endpoints.
    fn knots(&self) -> (Vec<f64>, Vec<f64>) {
        let (lo, hi) = (self.domain.t_min(), self.domain.t_max());
        let mut xs = Vec::with_capacity(self.event_times.len() + 2);
        let mut ys = Vec::with_capacity(self.event_times.len() + 2);
        if self.event_times.first() != Some(&lo) {
            xs.push(lo);
            ys.push(lo);
        }
        xs.extend_from_slice(&self.event_times);
        ys.extend_from_slice(&self.h_inv_values);
        if self.event_times.last() != Some(&hi) {
            xs.push(hi);
            ys.push(hi);
        }
        (xs, ys)
    }

    /// Piecewise-linear `ĥ⁻¹(t)` through the event samples and the endpoints.
    pub fn eval(&self, t: f64) -> f64 {
        let (xs, ys) = self.knots();
        interp::interp_linear(&xs, &ys, t)
    }

    /// Fills `grid`/`grid_values` on a uniform `g`-point grid.
    pub fn to_common_grid(mut self, g: usize) -> Result<Self> {
        if g < 2 {
            return Err(Error::BadGrid(g));
        }
        let (xs, ys) = self.knots();
        self.grid = interp::uniform_grid(self.domain, g);
        self.grid_values = interp::interp_many(&xs, &ys, &self.grid);
        let last = g - 1;
        self.grid_values[0] = self.domain.t_min();
        self.grid_values[last] = self.domain.t_max();
        Ok(self)
    }
}

/// A curve with its event times replaced by registered times.
#[derive(Debug, Clone, PartialEq)]
pub struct RegisteredCurve {
    pub curve_id: String,
    pub domain: Domain,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Index range of the observed (non-anchor) events within `times`.
    pub first_event: usize,
    pub n_events: usize,
}

impl RegisteredCurve {
    /// The curve as observed, i.e. registered with the identity.
    pub fn unregistered(curve: &EventCurve) -> Self {
        Self {
            curve_id: curve.id().to_owned(),
            domain: curve.domain(),
            times: curve.times().to_vec(),
            values: curve.values().to_vec(),
            first_event: curve.first_event_index(),
            n_events: curve.n_events(),
        }
    }

    pub fn event_times(&self) -> &[f64] {
        &self.times[self.first_event..self.first_event + self.n_events]
    }

    pub fn event_values(&self) -> &[f64] {
        &self.values[self.first_event..self.first_event + self.n_events]
    }

    /// Linear interpolation of the curve on `grid`, starting from value 0 at
    /// `t_min` and holding the final value up to `t_max`.
    pub fn on_grid(&self, grid: &[f64]) -> Vec<f64> {
        let (lo, hi) = (self.domain.t_min(), self.domain.t_max());
        let mut xs = Vec::with_capacity(self.times.len() + 2);
        let mut ys = Vec::with_capacity(self.times.len() + 2);
        if self.times.first().is_some_and(|&t| t > lo) {
            xs.push(lo);
            ys.push(0.0);
        }
        xs.extend_from_slice(&self.times);
        ys.extend_from_slice(&self.values);
        if self.times.last().is_some_and(|&t| t < hi) {
            xs.push(hi);
            ys.push(*self.values.last().expect("non-empty"));
        }
        interp::interp_many(&xs, &ys, grid)
    }
}

/// Cross-sectional mean of a set of curves on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanCurve {
    pub grid: Vec<f64>,
    pub mean_values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegistrationOptions {
    pub pair: PairOptions,
    pub grid_size: usize,
    /// Compose every estimate with a common monotone map so that the implied
    /// warps average to the identity on the grid.
    pub recenter: bool,
}

impl Default for RegistrationOptions {
    fn default() -> Self {
        Self {
            pair: PairOptions::default(),
            grid_size: DEFAULT_GRID_SIZE,
            recenter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Registration {
    pub estimates: Vec<WarpingEstimate>,
    /// Number of DTW alignments executed.
    pub pair_count: usize,
}

/// Estimates `ĥ_i⁻¹` for every curve from all pairwise maps.
pub fn estimate_warpings<M>(curves: &[EventCurve], metric: M, options: &RegistrationOptions) -> Result<Registration>
where
    M: Fn(f64, f64) -> f64 + Sync,
{
    let n = curves.len();
    if n < 2 {
        return Err(Error::TooFewCurves(n));
    }
    if options.grid_size < 2 {
        return Err(Error::BadGrid(options.grid_size));
    }
    let domain = curves[0].domain();
    for c in curves {
        if !c.is_anchored() {
            return Err(Error::UnanchoredInput(c.id().to_owned()));
        }
        if c.domain() != domain {
            return Err(Error::DomainMismatch(curves[0].id().to_owned(), c.id().to_owned()));
        }
    }

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let executed = AtomicUsize::new(0);
    let maps: Vec<PairMaps> = pairs
        .par_iter()
        .map(|&(i, j)| {
            executed.fetch_add(1, Ordering::Relaxed);
            warp_pair(&curves[i], &curves[j], &metric, &options.pair)
        })
        .collect::<Result<_>>()?;
    let pair_index = |i: usize, j: usize| -> usize {
        // position of (i, j), i < j, in the row-major upper triangle
        i * (2 * n - i - 1) / 2 + (j - i - 1)
    };

    let estimates: Vec<WarpingEstimate> = (0..n)
        .into_par_iter()
        .map(|i| {
            let curve = &curves[i];
            let mut sums = vec![0.0; curve.len()];
            for j in (0..n).filter(|&j| j != i) {
                let mapped = if i < j {
                    &maps[pair_index(i, j)].forward.mapped_times
                } else {
                    &maps[pair_index(j, i)].backward.mapped_times
                };
                for (s, v) in sums.iter_mut().zip(mapped) {
                    *s += v;
                }
            }
            let denom = (n - 1) as f64;
            let mut h_inv: Vec<f64> = sums.into_iter().map(|s| s / denom).collect();
            let last = h_inv.len() - 1;
            h_inv[0] = domain.t_min();
            h_inv[last] = domain.t_max();
            if !interp::is_strictly_increasing(&h_inv) {
                make_strict(&mut h_inv, domain.t_min(), domain.t_max(), domain.dup_eps());
            }
            WarpingEstimate {
                curve_id: curve.id().to_owned(),
                domain,
                event_times: curve.times().to_vec(),
                h_inv_values: h_inv,
                grid: Vec::new(),
                grid_values: Vec::new(),
            }
            .to_common_grid(options.grid_size)
        })
        .collect::<Result<_>>()?;

    let mut estimates = estimates;
    if options.recenter {
        recenter(&mut estimates);
    }
    Ok(Registration {
        estimates,
        pair_count: executed.into_inner(),
    })
}

/// Composes every estimate with the mean of the implied warps, so that after
/// the update the implied warps `ĥ_i` average to the identity on the grid.
///
/// All estimates must share one grid.
pub fn recenter(estimates: &mut [WarpingEstimate]) {
    let Some(first) = estimates.first() else {
        return;
    };
    let grid = first.grid.clone();
    let domain = first.domain;
    let g = grid.len();
    let mut mean_warp = vec![0.0; g];
    for e in estimates.iter() {
        for (k, u) in grid.iter().enumerate() {
            mean_warp[k] += interp::interp_linear(&e.grid_values, &e.grid, *u);
        }
    }
    let count = estimates.len() as f64;
    for v in &mut mean_warp {
        *v /= count;
    }
    mean_warp[0] = domain.t_min();
    mean_warp[g - 1] = domain.t_max();

    for e in estimates.iter_mut() {
        for v in e.grid_values.iter_mut().chain(e.h_inv_values.iter_mut()) {
            *v = interp::interp_linear(&grid, &mean_warp, *v);
        }
        e.grid_values[0] = domain.t_min();
        e.grid_values[g - 1] = domain.t_max();
    }
}

/// Replaces the curve's times by `ĥ⁻¹` at those times; values are kept.
pub fn register(curve: &EventCurve, estimate: &WarpingEstimate) -> Result<RegisteredCurve> {
    if curve.id() != estimate.curve_id {
        return Err(Error::IdMismatch {
            curve: curve.id().to_owned(),
            estimate: estimate.curve_id.clone(),
        });
    }
    if curve.len() != estimate.h_inv_values.len() {
        return Err(Error::ShapeMismatch {
            expected_source: curve.len(),
            expected_target: estimate.h_inv_values.len(),
        });
    }
    Ok(RegisteredCurve {
        times: estimate.h_inv_values.clone(),
        ..RegisteredCurve::unregistered(curve)
    })
}

/// Pointwise mean of `curves` interpolated on a uniform `g`-point grid.
pub fn mean_curve(curves: &[RegisteredCurve], g: usize) -> Result<MeanCurve> {
    let first = curves.first().ok_or(Error::EmptyGroup)?;
    if g < 2 {
        return Err(Error::BadGrid(g));
    }
    let grid = interp::uniform_grid(first.domain, g);
    let mut sums = vec![0.0; g];
    for c in curves {
        for (s, v) in sums.iter_mut().zip(c.on_grid(&grid)) {
            *s += v;
        }
    }
    let count = curves.len() as f64;
    Ok(MeanCurve {
        mean_values: sums.into_iter().map(|s| s / count).collect(),
        grid,
    })
}

/// Mean curve per distinct label, in label order.
pub fn group_means<L>(curves: &[RegisteredCurve], labels: &[L], g: usize) -> Result<Vec<(L, MeanCurve)>>
where
    L: Ord + Clone,
{
    if curves.is_empty() || curves.len() != labels.len() {
        return Err(Error::EmptyGroup);
    }
    let mut groups: BTreeMap<L, Vec<RegisteredCurve>> = BTreeMap::new();
    for (c, l) in curves.iter().zip(labels) {
        groups.entry(l.clone()).or_default().push(c.clone());
    }
    groups
        .into_iter()
        .map(|(label, members)| Ok((label, mean_curve(&members, g)?)))
        .collect()
}
