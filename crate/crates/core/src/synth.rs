//! Synthetic samples from the time-warping model with known warps.
//!
//! Each subject draws a warp `h_i`, a number of events `n_i`, and latent event
//! times from a base cumulative distribution `μ`. Observed times are
//! `h_i(latent)`. On normalised time `u ∈ [0, 1]` the warps are
//! `h(u) = u + Σ_c a_c sin(π c u)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

use crate::curve::{Domain, EventCurve, Mode, WarpingFunction};
use crate::error::{Error, Result};
use crate::interp;

/// Base cumulative distribution of latent event times on normalised time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseCurve {
    Linear,
    /// Saturating `(1 − e^{−rate·u}) / (1 − e^{−rate})`.
    Exponential { rate: f64 },
}

impl BaseCurve {
    pub fn cdf(&self, u: f64) -> f64 {
        match *self {
            BaseCurve::Linear => u,
            BaseCurve::Exponential { rate } => (-(-rate * u).exp_m1()) / (-(-rate).exp_m1()),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match *self {
            BaseCurve::Linear => p,
            BaseCurve::Exponential { rate } => -(p * (-(-rate).exp_m1())).mul_add(-1.0, 1.0).ln() / rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WarpFamily {
    /// Coefficients `a_c = (amplitude / c) · U(−1, 1)`, `c = 1..=components`.
    Sine { components: usize, amplitude: f64 },
    /// Odd-indexed subjects get a first coefficient of `late` (events happen
    /// later than on the latent clock); everyone gets sine jitter of size
    /// `jitter`.
    TwoRegime { late: f64, jitter: f64, components: usize },
}

impl WarpFamily {
    /// Upper bound on `Σ_c π c |a_c|`; warps are strictly increasing when it is below 1.
    fn slope_budget(&self) -> f64 {
        match *self {
            WarpFamily::Sine { components, amplitude } => amplitude * PI * components as f64,
            WarpFamily::TwoRegime { late, jitter, components } => late.abs() * PI + jitter * PI * components as f64,
        }
    }

    fn amplitude(&self) -> f64 {
        match *self {
            WarpFamily::Sine { amplitude, .. } => amplitude,
            WarpFamily::TwoRegime { late, .. } => late,
        }
    }
}

/// How latent event times are drawn from the base curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LatentMode {
    /// `μ⁻¹(k / (n_i + 1))`, `k = 1..=n_i`.
    #[default]
    Quantile,
    /// Independent draws from `μ`, sorted.
    Iid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpScenario {
    pub n: usize,
    pub min_events: usize,
    pub max_events: usize,
    pub base: BaseCurve,
    pub warp: WarpFamily,
    pub latent: LatentMode,
    pub domain: Domain,
    pub seed: u64,
}

impl Default for WarpScenario {
    fn default() -> Self {
        Self {
            n: 50,
            min_events: 5,
            max_events: 15,
            base: BaseCurve::Linear,
            warp: WarpFamily::Sine {
                components: 3,
                amplitude: 0.08,
            },
            latent: LatentMode::Quantile,
            domain: Domain::new(0.0, 1.0).expect("unit domain"),
            seed: 0,
        }
    }
}

impl WarpScenario {
    /// Two-regime mixture used for clustering checks.
    pub fn two_regime(n: usize, seed: u64) -> Self {
        Self {
            n,
            warp: WarpFamily::TwoRegime {
                late: 0.2,
                jitter: 0.02,
                components: 3,
            },
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidScenario("curve count must be positive".into()));
        }
        if self.min_events == 0 || self.min_events > self.max_events {
            return Err(Error::InvalidScenario(format!(
                "event range {}..={} is empty or starts at zero",
                self.min_events, self.max_events
            )));
        }
        if let BaseCurve::Exponential { rate } = self.base {
            if !(rate.is_finite() && rate > 0.0) {
                return Err(Error::InvalidScenario(format!("exponential rate {rate} must be positive")));
            }
        }
        let (components, sizes) = match self.warp {
            WarpFamily::Sine { components, amplitude } => (components, [amplitude, 0.0]),
            WarpFamily::TwoRegime { late, jitter, components } => (components, [late, jitter]),
        };
        if components == 0 {
            return Err(Error::InvalidScenario("at least one sine component is required".into()));
        }
        if sizes.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::BadAmplitude(self.warp.amplitude()));
        }
        if self.warp.slope_budget() >= 1.0 {
            return Err(Error::BadAmplitude(self.warp.amplitude()));
        }
        Ok(())
    }

    /// Regime of subject `i`: 1 for the late regime, 0 otherwise.
    pub fn regime(&self, i: usize) -> usize {
        match self.warp {
            WarpFamily::Sine { .. } => 0,
            WarpFamily::TwoRegime { .. } => i % 2,
        }
    }

    fn rng(&self, i: usize, purpose: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(2 * i as u64 + purpose);
        rng
    }
}

/// `h(t) = t_min + w·(u + Σ_c a_c sin(π c u))` with `u = (t − t_min) / w`.
#[derive(Debug, Clone, PartialEq)]
pub struct SineWarp {
    pub domain: Domain,
    pub coefficients: Vec<f64>,
}

impl SineWarp {
    pub fn identity(domain: Domain) -> Self {
        Self {
            domain,
            coefficients: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = (self.domain.t_min(), self.domain.t_max());
        if t <= lo {
            return lo;
        }
        if t >= hi {
            return hi;
        }
        let w = self.domain.width();
        let u = (t - lo) / w;
        let bump: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(c, a)| a * (PI * (c + 1) as f64 * u).sin())
            .sum();
        (lo + w * (u + bump)).clamp(lo, hi)
    }

    /// Inverse by bisection, run until the bracket stops shrinking.
    pub fn inverse(&self, y: f64) -> f64 {
        let (mut lo, mut hi) = (self.domain.t_min(), self.domain.t_max());
        if y <= lo {
            return lo;
        }
        if y >= hi {
            return hi;
        }
        for _ in 0..2000 {
            let mid = lo + (hi - lo) / 2.0;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if (self.eval(lo) - y).abs() <= (self.eval(hi) - y).abs() {
            lo
        } else {
            hi
        }
    }

    pub fn to_warping_function(&self, g: usize) -> Result<WarpingFunction> {
        let grid = interp::uniform_grid(self.domain, g.max(2));
        let values = grid.iter().map(|&t| self.eval(t)).collect();
        WarpingFunction::new(self.domain, grid, values)
    }

    /// `h⁻¹` sampled on a grid.
    pub fn inverse_warping_function(&self, g: usize) -> Result<WarpingFunction> {
        let grid = interp::uniform_grid(self.domain, g.max(2));
        let values = grid.iter().map(|&t| self.inverse(t)).collect();
        WarpingFunction::new(self.domain, grid, values)
    }
}

/// Draws the warp of subject `i`.
pub fn sample_warping(scenario: &WarpScenario, i: usize) -> Result<SineWarp> {
    scenario.validate()?;
    let mut rng = scenario.rng(i, 0);
    let coefficients = match scenario.warp {
        WarpFamily::Sine { components, amplitude } => (1..=components)
            .map(|c| amplitude / c as f64 * rng.gen_range(-1.0..=1.0))
            .collect(),
        WarpFamily::TwoRegime { late, jitter, components } => {
            let mut a: Vec<f64> = (1..=components)
                .map(|c| jitter / c as f64 * rng.gen_range(-1.0..=1.0))
                .collect();
            if scenario.regime(i) == 1 {
                a[0] += late;
            }
            a
        }
    };
    Ok(SineWarp {
        domain: scenario.domain,
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedSample {
    pub curves: Vec<EventCurve>,
    pub warps: Vec<SineWarp>,
    /// Latent (unwarped) event times per subject, in the domain's units.
    pub latent: Vec<Vec<f64>>,
    pub regimes: Vec<usize>,
}

/// Simulates every subject of the scenario. Curves are unanchored, with ids
/// `1..=n`; each event carries the base curve's value at its latent time.
pub fn simulate_sample(scenario: &WarpScenario) -> Result<SimulatedSample> {
    scenario.validate()?;
    let domain = scenario.domain;
    let mut sample = SimulatedSample {
        curves: Vec::with_capacity(scenario.n),
        warps: Vec::with_capacity(scenario.n),
        latent: Vec::with_capacity(scenario.n),
        regimes: Vec::with_capacity(scenario.n),
    };
    for i in 0..scenario.n {
        let warp = sample_warping(scenario, i)?;
        let mut rng = scenario.rng(i, 1);
        let count = rng.gen_range(scenario.min_events..=scenario.max_events);
        let mut levels: Vec<f64> = match scenario.latent {
            LatentMode::Quantile => (1..=count).map(|k| k as f64 / (count + 1) as f64).collect(),
            LatentMode::Iid => (0..count).map(|_| rng.gen::<f64>()).collect(),
        };
        levels.sort_by(f64::total_cmp);
        let latent: Vec<f64> = levels
            .iter()
            .map(|&p| domain.t_min() + domain.width() * scenario.base.quantile(p))
            .collect();
        let observed: Vec<f64> = latent.iter().map(|&t| warp.eval(t)).collect();
        // Y_i(t_ij) = μ(h_i⁻¹(t_ij)) = μ(latent_ij), the probability level itself
        let curve = EventCurve::with_values((i + 1).to_string(), &observed, &levels, domain, Mode::Standardized)?;
        sample.curves.push(curve);
        sample.warps.push(warp);
        sample.latent.push(latent);
        sample.regimes.push(scenario.regime(i));
    }
    Ok(sample)
}
