//! Event curves: one subject's ordered event times together with the value of
//! its cumulative incidence curve at those times.
//!
//! Two value scales are supported. In [`Mode::Standardized`] the k-th event
//! carries `k / n`, so every curve ends at 1. In [`Mode::RawCount`] it carries
//! `k`. Alignment operates on whichever scale was chosen, so curves built in
//! different modes must never be compared with each other.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::interp;

/// Relative size of the nudge applied to tied or colliding event times.
pub const DUP_EPS_FACTOR: f64 = 1e-9;

/// Closed observation window `[t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    t_min: f64,
    t_max: f64,
}

impl Domain {
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min < t_max) {
            return Err(Error::InvalidDomain { t_min, t_max });
        }
        Ok(Self { t_min, t_max })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn width(&self) -> f64 {
        self.t_max - self.t_min
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    /// Perturbation used to break ties between event times.
    pub fn dup_eps(&self) -> f64 {
        DUP_EPS_FACTOR * self.width()
    }
}

/// Value scale of an [`EventCurve`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Standardized,
    RawCount,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "standardized" => Ok(Mode::Standardized),
            "raw" | "raw-count" => Ok(Mode::RawCount),
            other => Err(format!("unknown mode {other:?} (expected standardized or raw)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Standardized => f.write_str("standardized"),
            Mode::RawCount => f.write_str("raw"),
        }
    }
}

/// A subject's event times and curve values.
///
/// Times are strictly increasing and lie in the domain; values are
/// nondecreasing. After [`EventCurve::anchored`] the first and last entries
/// are the pseudo-events at `t_min` and `t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventCurve {
    id: String,
    times: Vec<f64>,
    values: Vec<f64>,
    n_events: usize,
    anchored: bool,
    mode: Mode,
    domain: Domain,
}

impl EventCurve {
    /// Builds a curve from unordered event times, computing values from ranks.
    pub fn build(id: impl Into<String>, raw_times: &[f64], domain: Domain, mode: Mode) -> Result<Self> {
        let id = id.into();
        let mut times = checked_times(&id, raw_times, domain)?;
        times.sort_by(f64::total_cmp);
        make_strict(&mut times, domain.t_min(), domain.t_max(), domain.dup_eps())
            .ok_or_else(|| Error::AnchorCollision(id.clone()))?;
        let n = times.len();
        let values = (1..=n)
            .map(|k| match mode {
                Mode::Standardized => k as f64 / n as f64,
                Mode::RawCount => k as f64,
            })
            .collect();
        Ok(Self {
            id,
            times,
            values,
            n_events: n,
            anchored: false,
            mode,
            domain,
        })
    }

    /// Builds a curve with caller-supplied values (one per event time).
    ///
    /// Pairs are sorted by time; the resulting values must be finite and
    /// nondecreasing.
    pub fn with_values(
        id: impl Into<String>,
        raw_times: &[f64],
        values: &[f64],
        domain: Domain,
        mode: Mode,
    ) -> Result<Self> {
        let id = id.into();
        if raw_times.len() != values.len() {
            return Err(Error::InvalidValues {
                id,
                reason: format!("{} times but {} values", raw_times.len(), values.len()),
            });
        }
        checked_times(&id, raw_times, domain)?;
        let mut pairs: Vec<(f64, f64)> = raw_times.iter().copied().zip(values.iter().copied()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut times: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let values: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValues {
                id,
                reason: "values must be finite".into(),
            });
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidValues {
                id,
                reason: "values must be nondecreasing in time".into(),
            });
        }
        make_strict(&mut times, domain.t_min(), domain.t_max(), domain.dup_eps())
            .ok_or_else(|| Error::AnchorCollision(id.clone()))?;
        Ok(Self {
            n_events: times.len(),
            id,
            times,
            values,
            anchored: false,
            mode,
            domain,
        })
    }

    /// Returns a copy with `(t_min, 0)` prepended and `(t_max, last value)`
    /// appended.
    ///
    /// Events sitting on a domain endpoint are moved inward by the duplicate
    /// perturbation so that the anchors can be placed.
    pub fn anchored(&self) -> Result<Self> {
        if self.anchored {
            return Err(Error::AlreadyAnchored(self.id.clone()));
        }
        let eps = self.domain.dup_eps();
        let mut inner = self.times.clone();
        make_strict(
            &mut inner,
            self.domain.t_min() + eps,
            self.domain.t_max() - eps,
            eps,
        )
        .ok_or_else(|| Error::AnchorCollision(self.id.clone()))?;

        let mut times = Vec::with_capacity(inner.len() + 2);
        times.push(self.domain.t_min());
        times.extend(inner);
        times.push(self.domain.t_max());

        let last = *self.values.last().expect("curves hold at least one event");
        let mut values = Vec::with_capacity(self.values.len() + 2);
        values.push(0.0);
        values.extend_from_slice(&self.values);
        values.push(last);

        Ok(Self {
            id: self.id.clone(),
            times,
            values,
            n_events: self.n_events,
            anchored: true,
            mode: self.mode,
            domain: self.domain,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of observed events, not counting anchors.
    pub fn n_events(&self) -> usize {
        self.n_events
    }

    /// Number of points in the sequence, anchors included.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn is_anchored(&self) -> bool {
        self.anchored
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Index (into [`times`](Self::times)) of the first observed event.
    pub fn first_event_index(&self) -> usize {
        usize::from(self.anchored)
    }

    /// Index (into [`times`](Self::times)) of the last observed event.
    pub fn last_event_index(&self) -> usize {
        self.first_event_index() + self.n_events - 1
    }

    /// Observed event times, anchors excluded.
    pub fn event_times(&self) -> &[f64] {
        let first = self.first_event_index();
        &self.times[first..first + self.n_events]
    }

    /// Observed event values, anchors excluded.
    pub fn event_values(&self) -> &[f64] {
        let first = self.first_event_index();
        &self.values[first..first + self.n_events]
    }
}

fn checked_times(id: &str, raw: &[f64], domain: Domain) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::EmptyCurve(id.to_owned()));
    }
    if let Some(&bad) = raw.iter().find(|t| !domain.contains(**t)) {
        return Err(Error::OutOfDomain {
            id: id.to_owned(),
            time: bad,
            t_min: domain.t_min(),
            t_max: domain.t_max(),
        });
    }
    Ok(raw.to_vec())
}

/// Nudges sorted `times` until they are strictly increasing and inside
/// `[lo, hi]`.
///
/// Ties are broken forward by repeatedly adding `eps` to the later element.
/// Anything pushed past `hi` (or sitting below `lo`) is then pulled back with
/// a mirrored pass. Returns `None` when the points do not fit.
pub(crate) fn make_strict(times: &mut [f64], lo: f64, hi: f64, eps: f64) -> Option<()> {
    if times.is_empty() {
        return Some(());
    }
    if times[0] < lo {
        times[0] = lo;
    }
    for k in 1..times.len() {
        let prev = times[k - 1];
        bump_above(&mut times[k], prev, eps);
    }
    let n = times.len();
    if times[n - 1] > hi {
        times[n - 1] = hi;
        for k in (0..n - 1).rev() {
            let next = times[k + 1];
            while times[k] >= next {
                let t = times[k] - eps;
                times[k] = if t < times[k] { t } else { times[k].next_down() };
            }
        }
    }
    if times[0] < lo || times[n - 1] > hi || !interp::is_strictly_increasing(times) {
        return None;
    }
    Some(())
}

fn bump_above(t: &mut f64, prev: f64, eps: f64) {
    while *t <= prev {
        let next = *t + eps;
        *t = if next > *t { next } else { t.next_up() };
    }
}

/// A strictly increasing, endpoint-fixing time transformation sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpingFunction {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl WarpingFunction {
    pub fn new(domain: Domain, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidValues {
            id: "warping function".into(),
            reason: reason.into(),
        };
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(invalid("grid and values must have equal length >= 2"));
        }
        if !interp::is_strictly_increasing(&grid) || !interp::is_strictly_increasing(&values) {
            return Err(invalid("grid and values must be strictly increasing"));
        }
        let last = grid.len() - 1;
        if grid[0] != domain.t_min() || grid[last] != domain.t_max() {
            return Err(invalid("grid must span the domain"));
        }
        if values[0] != domain.t_min() || values[last] != domain.t_max() {
            return Err(invalid("warping must fix the domain endpoints"));
        }
        Ok(Self { grid, values })
    }

    pub fn identity(domain: Domain, g: usize) -> Self {
        let grid = interp::uniform_grid(domain, g);
        Self {
            values: grid.clone(),
            grid,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        interp::interp_linear(&self.grid, &self.values, t)
    }

    /// Piecewise-linear inverse evaluated at `t`.
    pub fn eval_inverse(&self, t: f64) -> f64 {
        interp::interp_linear(&self.values, &self.grid, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dom(a: f64, b: f64) -> Domain {
        Domain::new(a, b).unwrap()
    }

    #[test]
    fn builds_standardized_curve() {
        let c = EventCurve::build("1", &[2.0, 1.0, 3.0], dom(0.0, 10.0), Mode::Standardized).unwrap();
        assert_eq!(c.times(), &[1.0, 2.0, 3.0]);
        assert_eq!(c.values(), &[1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert_eq!(c.n_events(), 3);
        assert!(!c.is_anchored());
    }

    #[test]
    fn builds_raw_count_single_event() {
        let c = EventCurve::build("2", &[5.0], dom(0.0, 10.0), Mode::RawCount).unwrap();
        assert_eq!(c.times(), &[5.0]);
        assert_eq!(c.values(), &[1.0]);
    }

    #[test]
    fn duplicate_times_are_perturbed() {
        let d = dom(0.0, 10.0);
        let c = EventCurve::build("3", &[1.0, 1.0, 4.0], d, Mode::Standardized).unwrap();
        let eps = 1e-9 * 10.0;
        assert_eq!(c.times()[0], 1.0);
        assert_eq!(c.times()[1], 1.0 + eps);
        assert_eq!(c.times()[2], 4.0);
        assert!(c.times()[0] < c.times()[1]);
        assert_eq!(c.values(), &[1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn triple_ties_are_spread_by_repeated_eps() {
        let d = dom(0.0, 1.0);
        let c = EventCurve::build("t", &[0.5, 0.5, 0.5], d, Mode::Standardized).unwrap();
        let eps = d.dup_eps();
        assert_eq!(c.times()[1], 0.5 + eps);
        assert_eq!(c.times()[2], 0.5 + eps + eps);
    }

    #[test]
    fn ties_at_upper_endpoint_stay_inside() {
        let d = dom(0.0, 1.0);
        let c = EventCurve::build("t", &[1.0, 1.0], d, Mode::Standardized).unwrap();
        assert_eq!(c.times()[1], 1.0);
        assert!(c.times()[0] < 1.0);
    }

    #[test]
    fn rejects_empty_and_out_of_domain() {
        let d = dom(0.0, 10.0);
        assert_eq!(
            EventCurve::build("e", &[], d, Mode::Standardized),
            Err(Error::EmptyCurve("e".into()))
        );
        assert!(matches!(
            EventCurve::build("o", &[1.0, 11.0], d, Mode::Standardized),
            Err(Error::OutOfDomain { time, .. }) if time == 11.0
        ));
        assert!(matches!(
            EventCurve::build("n", &[f64::NAN], d, Mode::Standardized),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn anchoring_standardized() {
        let c = EventCurve::build("1", &[1.0, 2.0, 3.0], dom(0.0, 10.0), Mode::Standardized)
            .unwrap()
            .anchored()
            .unwrap();
        assert_eq!(c.times(), &[0.0, 1.0, 2.0, 3.0, 10.0]);
        assert_eq!(c.values(), &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0]);
        assert_eq!(c.first_event_index(), 1);
        assert_eq!(c.last_event_index(), 3);
        assert_eq!(c.event_times(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn anchoring_auction_style_raw_counts() {
        let c = EventCurve::build("a", &[24.0, 150.0], dom(0.0, 168.0), Mode::RawCount)
            .unwrap()
            .anchored()
            .unwrap();
        assert_eq!(c.times(), &[0.0, 24.0, 150.0, 168.0]);
        assert_eq!(c.values(), &[0.0, 1.0, 2.0, 2.0]);
    }

    #[test]
    fn anchoring_twice_fails() {
        let c = EventCurve::build("1", &[1.0], dom(0.0, 10.0), Mode::Standardized)
            .unwrap()
            .anchored()
            .unwrap();
        assert_eq!(c.anchored(), Err(Error::AlreadyAnchored("1".into())));
    }

    #[test]
    fn endpoint_collisions_are_moved_inward() {
        let d = dom(0.0, 10.0);
        let eps = d.dup_eps();
        let c = EventCurve::build("c", &[0.0, 10.0], d, Mode::Standardized)
            .unwrap()
            .anchored()
            .unwrap();
        assert_eq!(c.times(), &[0.0, eps, 10.0 - eps, 10.0]);
        assert!(interp::is_strictly_increasing(c.times()));
    }

    #[test]
    fn override_values_must_be_monotone() {
        let d = dom(0.0, 10.0);
        let c = EventCurve::with_values("v", &[3.0, 1.0], &[2.0, 0.5], d, Mode::RawCount).unwrap();
        assert_eq!(c.times(), &[1.0, 3.0]);
        assert_eq!(c.values(), &[0.5, 2.0]);
        assert!(matches!(
            EventCurve::with_values("v", &[1.0, 3.0], &[2.0, 0.5], d, Mode::RawCount),
            Err(Error::InvalidValues { .. })
        ));
    }

    #[test]
    fn warping_function_validation() {
        let d = dom(0.0, 1.0);
        assert!(WarpingFunction::new(d, vec![0.0, 0.5, 1.0], vec![0.0, 0.6, 1.0]).is_ok());
        assert!(WarpingFunction::new(d, vec![0.0, 0.5, 1.0], vec![0.0, 0.6, 0.9]).is_err());
        assert!(WarpingFunction::new(d, vec![0.0, 0.5, 1.0], vec![0.0, 0.0, 1.0]).is_err());
        let w = WarpingFunction::new(d, vec![0.0, 0.5, 1.0], vec![0.0, 0.6, 1.0]).unwrap();
        assert!((w.eval_inverse(w.eval(0.3)) - 0.3).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn built_curves_are_strict_and_monotone(
            raw in prop::collection::vec(prop_oneof![0.0..10.0f64, Just(0.0), Just(10.0), Just(5.0)], 1..40),
            raw_mode in any::<bool>(),
        ) {
            let d = dom(0.0, 10.0);
            let mode = if raw_mode { Mode::RawCount } else { Mode::Standardized };
            let c = EventCurve::build("p", &raw, d, mode).unwrap();
            prop_assert!(interp::is_strictly_increasing(c.times()));
            prop_assert!(c.times().iter().all(|t| d.contains(*t)));
            prop_assert!(c.values().windows(2).all(|w| w[0] <= w[1]));
            if mode == Mode::Standardized {
                prop_assert_eq!(*c.values().last().unwrap(), 1.0);
            }
            let a = c.anchored().unwrap();
            prop_assert!(interp::is_strictly_increasing(a.times()));
            prop_assert_eq!(a.times()[0], 0.0);
            prop_assert_eq!(*a.times().last().unwrap(), 10.0);
        }
    }
}
