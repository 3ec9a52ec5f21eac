//! Pairwise synchronization maps derived from a DTW alignment.
//!
//! Every source point is mapped onto the time of the target point it is
//! aligned with. When a run of `H ≥ 2` consecutive source points shares one
//! target point, the run is spread evenly around that target time so that the
//! slope of the map across the run equals `δ`, which keeps the map strictly
//! increasing.

use crate::curve::EventCurve;
use crate::dtw::{self, AlignOptions, Alignment, AlignmentCost};
use crate::error::{Error, Result};
use crate::interp;

pub const DEFAULT_DELTA: f64 = 0.05;

/// Most halvings applied to a run's half-width before falling back to the
/// duplicate perturbation.
const MAX_REPAIR_ROUNDS: usize = 200;

/// Discrete samples of a synchronization map at the source curve's points.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseWarp {
    pub source_id: String,
    pub target_id: String,
    pub source_times: Vec<f64>,
    pub mapped_times: Vec<f64>,
    pub delta: f64,
}

impl PairwiseWarp {
    /// Piecewise-linear evaluation between the sampled points.
    pub fn eval(&self, t: f64) -> f64 {
        interp::interp_linear(&self.source_times, &self.mapped_times, t)
    }
}

/// Zero-based correspondence read off an alignment: `alpha[k]` is the first
/// target point aligned with source point `k`, `beta[j]` the first source
/// point aligned with target point `j`.
pub fn extract_correspondence(alignment: &Alignment) -> (Vec<usize>, Vec<usize>) {
    let (l, m) = alignment.extent();
    let mut alpha = vec![usize::MAX; l];
    let mut beta = vec![usize::MAX; m];
    for (i, j) in alignment.cells() {
        if alpha[i] == usize::MAX {
            alpha[i] = j;
        }
        if beta[j] == usize::MAX {
            beta[j] = i;
        }
    }
    (alpha, beta)
}

/// Maps `source`'s points onto `target`'s time scale following `alpha`.
pub fn warp_times(alpha: &[usize], source: &EventCurve, target: &EventCurve, delta: f64) -> Result<PairwiseWarp> {
    if alpha.len() != source.len() || alpha.iter().any(|&j| j >= target.len()) {
        return Err(Error::ShapeMismatch {
            expected_source: source.len(),
            expected_target: target.len(),
        });
    }
    let pins = source
        .is_anchored()
        .then(|| (source.domain().t_min(), source.domain().t_max()));
    let mapped = spread_times(
        alpha,
        source.times(),
        target.times(),
        delta,
        pins,
        source.domain().dup_eps(),
    )?;
    Ok(PairwiseWarp {
        source_id: source.id().to_owned(),
        target_id: target.id().to_owned(),
        source_times: source.times().to_vec(),
        mapped_times: mapped,
        delta,
    })
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    len: usize,
    center: f64,
    half_width: f64,
    /// Spread away from a pinned endpoint instead of around the center:
    /// +1 upward from the first point, -1 downward from the last.
    one_sided: i8,
}

impl Run {
    fn place(&self, out: &mut [f64]) {
        if self.len == 1 {
            out[self.start] = self.center;
            return;
        }
        let step = 2.0 * self.half_width / (self.len - 1) as f64;
        for h in 0..self.len {
            out[self.start + h] = match self.one_sided {
                1 => self.center + step * h as f64,
                -1 => self.center - step * (self.len - 1 - h) as f64,
                // Offsets from the centre keep the run symmetric about it.
                _ => self.center + step * (h as f64 - (self.len - 1) as f64 / 2.0),
            };
        }
    }
}

/// Slice-level spreading.
///
/// `pins`, when given, fixes the first and last mapped time to the domain
/// endpoints. A run whose target time already sits on the pinned endpoint is
/// spread one-sidedly into the domain with the same spacing. Collisions
/// between neighbouring runs are repaired by halving the half-width of the
/// runs involved until the sequence is strictly increasing.
pub fn spread_times(
    alpha: &[usize],
    source_times: &[f64],
    target_times: &[f64],
    delta: f64,
    pins: Option<(f64, f64)>,
    eps: f64,
) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let n = alpha.len();
    let mut runs: Vec<Run> = Vec::new();
    let mut k = 0;
    while k < n {
        let mut end = k + 1;
        while end < n && alpha[end] == alpha[k] {
            end += 1;
        }
        let len = end - k;
        let center = target_times[alpha[k]];
        let half_width = if len > 1 {
            delta * (source_times[end - 1] - source_times[k]) / 2.0
        } else {
            0.0
        };
        let mut one_sided = 0;
        if let Some((lo, hi)) = pins {
            if len > 1 && k == 0 && center <= lo {
                one_sided = 1;
            } else if len > 1 && end == n && center >= hi {
                one_sided = -1;
            }
        }
        runs.push(Run {
            start: k,
            len,
            center,
            half_width,
            one_sided,
        });
        k = end;
    }
    let mut run_of = vec![0usize; n];
    for (r, run) in runs.iter().enumerate() {
        run_of[run.start..run.start + run.len].fill(r);
    }

    let mut out = vec![0.0; n];
    for _ in 0..MAX_REPAIR_ROUNDS {
        for run in &runs {
            run.place(&mut out);
        }
        if let Some((lo, hi)) = pins {
            out[0] = lo;
            out[n - 1] = hi;
        }
        match out.windows(2).position(|w| w[1] <= w[0]) {
            None => return Ok(out),
            Some(k) => {
                runs[run_of[k]].half_width /= 2.0;
                if run_of[k + 1] != run_of[k] {
                    runs[run_of[k + 1]].half_width /= 2.0;
                }
            }
        }
    }

    // Runs have collapsed onto their targets; break the remaining ties.
    let (lo, hi) = pins.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let (first, last) = (out[0], out[n - 1]);
    crate::curve::make_strict(&mut out, lo.min(first), hi.max(last), eps);
    if let Some((lo, hi)) = pins {
        out[0] = lo;
        out[n - 1] = hi;
    }
    Ok(out)
}

/// Options for [`warp_pair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairOptions {
    pub delta: f64,
    /// Align the two curves' last observed events one-to-one.
    pub force_last_event: bool,
}

impl Default for PairOptions {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            force_last_event: false,
        }
    }
}

/// Both directional maps produced from a single alignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PairMaps {
    pub alignment: Alignment,
    pub cost: AlignmentCost,
    /// `a`'s points mapped onto `b`'s time scale.
    pub forward: PairwiseWarp,
    /// `b`'s points mapped onto `a`'s time scale.
    pub backward: PairwiseWarp,
}

/// Aligns two anchored curves once and derives both synchronization maps.
pub fn warp_pair<M>(a: &EventCurve, b: &EventCurve, metric: M, options: &PairOptions) -> Result<PairMaps>
where
    M: Fn(f64, f64) -> f64,
{
    if !(options.delta > 0.0 && options.delta.is_finite()) {
        return Err(Error::NonPositiveDelta(options.delta));
    }
    let mut align_options = AlignOptions::default();
    if options.force_last_event {
        align_options
            .forced_pairs
            .push((a.last_event_index(), b.last_event_index()));
    }
    let (alignment, cost) = dtw::align(a, b, metric, &align_options)?;
    let (alpha, beta) = extract_correspondence(&alignment);
    let forward = warp_times(&alpha, a, b, options.delta)?;
    let backward = warp_times(&beta, b, a, options.delta)?;
    Ok(PairMaps {
        alignment,
        cost,
        forward,
        backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{Domain, Mode};
    use crate::dtw::{euclidean, Step};
    use proptest::prelude::*;

    fn curve(id: &str, times: &[f64], domain: Domain) -> EventCurve {
        EventCurve::build(id, times, domain, Mode::Standardized)
            .unwrap()
            .anchored()
            .unwrap()
    }

    #[test]
    fn correspondence_of_diagonal() {
        let (alpha, beta) = extract_correspondence(&Alignment::diagonal(3));
        assert_eq!(alpha, vec![0, 1, 2]);
        assert_eq!(beta, vec![0, 1, 2]);
    }

    #[test]
    fn correspondence_of_contraction_expansion_path() {
        use Step::*;
        let e = Alignment::from_steps(vec![Diagonal, Source, Source, Diagonal, Diagonal, Target], 5, 4).unwrap();
        let (alpha, beta) = extract_correspondence(&e);
        // a1 a2 a3 -> b1, a4 -> b2, a5 -> b3 b4
        assert_eq!(alpha, vec![0, 0, 0, 1, 2]);
        assert_eq!(beta, vec![0, 3, 4, 4]);
    }

    #[test]
    fn correspondence_of_fan_out() {
        use Step::*;
        let e = Alignment::from_steps(vec![Diagonal, Target, Target, Target], 1, 4).unwrap();
        let (alpha, beta) = extract_correspondence(&e);
        assert_eq!(alpha, vec![0]);
        assert_eq!(beta, vec![0, 0, 0, 0]);
    }

    #[test]
    fn distinct_targets_map_exactly() {
        let out = spread_times(&[0, 2, 3], &[1.0, 2.0, 3.0], &[5.0, 6.0, 7.0, 8.0], 0.1, None, 1e-9).unwrap();
        assert_eq!(out, vec![5.0, 7.0, 8.0]);
    }

    #[test]
    fn run_is_spread_with_slope_delta() {
        let out = spread_times(&[0, 0, 0], &[2.0, 3.0, 4.0], &[10.0], 0.1, None, 1e-9).unwrap();
        let expected = [9.9, 10.0, 10.1];
        for (o, e) in out.iter().zip(expected) {
            assert!((o - e).abs() < 1e-12, "{out:?}");
        }
        let slope = (out[2] - out[0]) / (4.0 - 2.0);
        assert!((slope - 0.1).abs() < 1e-12);
    }

    #[test]
    fn spread_straddles_target_symmetrically() {
        // t2, t3, t4 all aligned to s2.
        let t = [0.0, 1.0, 2.0, 3.0, 5.0];
        let s = [0.0, 2.5, 5.0];
        let out = spread_times(&[0, 1, 1, 1, 2], &t, &s, 0.2, Some((0.0, 5.0)), 5e-9).unwrap();
        assert!(out[1] < 2.5 && out[3] > 2.5);
        assert_eq!(out[2], 2.5);
        assert!(((2.5 - out[1]) - (out[3] - 2.5)).abs() < 1e-12);
        assert!(out.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn run_on_pinned_anchor_spreads_inward() {
        // Source anchor and two events all aligned to the target's start anchor.
        let out = spread_times(&[0, 0, 0, 1, 2], &[0.0, 1.0, 2.0, 3.0, 10.0], &[0.0, 5.0, 10.0], 0.1, Some((0.0, 10.0)), 1e-8).unwrap();
        assert_eq!(out[0], 0.0);
        assert!((out[1] - 0.1).abs() < 1e-12 && (out[2] - 0.2).abs() < 1e-12);
        assert_eq!(out[4], 10.0);
    }

    #[test]
    fn overlapping_runs_are_repaired() {
        // Two runs whose spreads would overlap around close target times.
        let t = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 10.0];
        let s = [0.0, 4.0, 4.01, 10.0];
        let alpha = [0, 1, 1, 1, 2, 2, 2, 3];
        let out = spread_times(&alpha, &t, &s, 0.5, Some((0.0, 10.0)), 1e-8).unwrap();
        assert!(out.windows(2).all(|w| w[0] < w[1]), "{out:?}");
        // Centres survive the repair.
        assert_eq!(out[2], 4.0);
        assert_eq!(out[5], 4.01);
        assert!((out[1] + out[3] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_delta() {
        assert_eq!(
            spread_times(&[0], &[1.0], &[1.0], 0.0, None, 1e-9),
            Err(Error::NonPositiveDelta(0.0))
        );
        assert!(spread_times(&[0], &[1.0], &[1.0], f64::NAN, None, 1e-9).is_err());
    }

    #[test]
    fn self_alignment_is_identity() {
        let d = Domain::new(0.0, 10.0).unwrap();
        let c = curve("c", &[1.0, 2.5, 7.0], d);
        let maps = warp_pair(&c, &c, euclidean, &PairOptions::default()).unwrap();
        assert_eq!(maps.forward.mapped_times, c.times());
        assert_eq!(maps.backward.mapped_times, c.times());
        assert_eq!(maps.cost.total(), 0.0);
    }

    #[test]
    fn round_trip_on_one_to_one_points() {
        let d = Domain::new(0.0, 10.0).unwrap();
        let a = curve("a", &[1.0, 2.0, 6.0, 8.0], d);
        let b = curve("b", &[3.0, 7.0, 9.0], d);
        let maps = warp_pair(&a, &b, euclidean, &PairOptions::default()).unwrap();
        let pairs = maps.alignment.one_to_one_pairs();
        assert!(!pairs.is_empty());
        for (i, j) in pairs {
            assert_eq!(maps.forward.mapped_times[i], b.times()[j]);
            assert_eq!(maps.backward.mapped_times[j], a.times()[i]);
        }
    }

    #[test]
    fn forced_last_event_maps_exactly() {
        let d = Domain::new(0.0, 10.0).unwrap();
        let a = curve("a", &[1.0, 2.0, 3.0], d);
        let b = curve("b", &[1.5, 8.0, 8.5, 9.0], d);
        let opts = PairOptions {
            force_last_event: true,
            ..PairOptions::default()
        };
        let maps = warp_pair(&a, &b, euclidean, &opts).unwrap();
        assert_eq!(maps.forward.mapped_times[a.last_event_index()], b.times()[b.last_event_index()]);
        assert_eq!(maps.backward.mapped_times[b.last_event_index()], a.times()[a.last_event_index()]);
    }

    fn anchored_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            prop::collection::vec(0.0..1.0f64, 1..20),
            prop::collection::vec(0.0..1.0f64, 1..20),
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn maps_are_strict_and_pinned((ta, tb) in anchored_pair(), delta in 0.001..1.0f64, force in any::<bool>()) {
            let d = Domain::new(0.0, 1.0).unwrap();
            let a = curve("a", &ta, d);
            let b = curve("b", &tb, d);
            let opts = PairOptions { delta, force_last_event: force };
            let maps = warp_pair(&a, &b, euclidean, &opts).unwrap();
            for w in [&maps.forward, &maps.backward] {
                prop_assert!(w.mapped_times.windows(2).all(|p| p[0] < p[1]), "{:?}", w.mapped_times);
                prop_assert_eq!(w.mapped_times[0], 0.0);
                prop_assert_eq!(*w.mapped_times.last().unwrap(), 1.0);
                prop_assert_eq!(w.mapped_times.len(), w.source_times.len());
            }
            for (i, j) in maps.alignment.one_to_one_pairs() {
                prop_assert_eq!(maps.forward.mapped_times[i], b.times()[j]);
                prop_assert_eq!(maps.backward.mapped_times[j], a.times()[i]);
            }
        }
    }
}
