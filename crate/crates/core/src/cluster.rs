//! Clustering subjects by the geometry of their warping functions.
//!
//! The dissimilarity between two subjects is the squared L² distance between
//! their gridded `ĥ⁻¹` estimates. Clustering is k-means on that matrix with the
//! centroid replaced by the Fréchet medoid, the member minimising the sum of
//! squared dissimilarities to the rest of its cluster. Points are assigned to
//! the medoid with the smallest dissimilarity. The number of clusters is chosen
//! by maximising the mean silhouette.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp;
use crate::registration::WarpingEstimate;

pub const DEFAULT_N_INIT: usize = 20;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_MAX_K: usize = 10;

/// Symmetric, nonnegative dissimilarity matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Fills the upper triangle from `f(i, j)` (i < j) and mirrors it.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| f(i, j)).collect())
            .collect();
        let mut data = vec![0.0; n * n];
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("matrix is not square".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(Error::InvalidMatrix(format!("nonzero diagonal at {i}")));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidMatrix(format!("entry ({i}, {j}) = {v}")));
                }
                if v != rows[j][i] {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            n,
            data: rows.concat(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// `∫ (ĥ_i⁻¹ − ĥ_j⁻¹)² dt` by the trapezoidal rule on the shared grid.
pub fn warp_distance(a: &WarpingEstimate, b: &WarpingEstimate) -> Result<f64> {
    if a.grid.is_empty() || a.grid != b.grid || a.grid_values.len() != b.grid_values.len() {
        return Err(Error::GridMismatch);
    }
    let sq: Vec<f64> = a
        .grid_values
        .iter()
        .zip(&b.grid_values)
        .map(|(x, y)| (x - y) * (x - y))
        .collect();
    Ok(interp::trapezoid(&a.grid, &sq))
}

/// All pairwise [`warp_distance`]s.
pub fn distance_matrix(estimates: &[WarpingEstimate]) -> Result<DistanceMatrix> {
    if let Some(first) = estimates.first() {
        if estimates
            .iter()
            .any(|e| e.grid.is_empty() || e.grid != first.grid || e.grid_values.len() != first.grid.len())
        {
            return Err(Error::GridMismatch);
        }
    }
    Ok(DistanceMatrix::from_fn(estimates.len(), |i, j| {
        warp_distance(&estimates[i], &estimates[j]).expect("grids checked above")
    }))
}

/// Member of `members` minimising the sum of squared dissimilarities to all
/// members; ties go to the smallest index.
pub fn frechet_medoid(members: &[usize], d: &DistanceMatrix) -> Result<usize> {
    let mut best = None;
    let mut best_cost = f64::INFINITY;
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    for &x in &sorted {
        let cost: f64 = sorted.iter().map(|&y| d.get(x, y).powi(2)).sum();
        if cost < best_cost {
            best_cost = cost;
            best = Some(x);
        }
    }
    best.ok_or(Error::EmptyGroup)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMedoidsOptions {
    pub k: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub n_init: usize,
}

impl KMedoidsOptions {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            seed,
            max_iter: DEFAULT_MAX_ITER,
            n_init: DEFAULT_N_INIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub k: usize,
    /// Zero-based cluster label per point; clusters are numbered in order of
    /// their smallest member.
    pub labels: Vec<usize>,
    /// Medoid of each cluster, indexed by label.
    pub medoids: Vec<usize>,
    pub silhouettes: Vec<f64>,
    pub coefficient: f64,
    /// Σ over points of the squared dissimilarity to their medoid.
    pub objective: f64,
}

struct Run {
    labels: Vec<usize>,
    medoids: Vec<usize>,
    objective: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    trace: Vec<f64>,
}

fn assign(d: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..d.len())
        .map(|x| {
            if let Some(own) = medoids.iter().position(|&m| m == x) {
                return own;
            }
            let mut best = 0;
            for (c, &m) in medoids.iter().enumerate().skip(1) {
                if d.get(x, m) < d.get(x, medoids[best]) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn objective(d: &DistanceMatrix, labels: &[usize], medoids: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(x, &c)| d.get(x, medoids[c]).powi(2))
        .sum()
}

fn members_of(labels: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); k];
    for (x, &c) in labels.iter().enumerate() {
        groups[c].push(x);
    }
    groups
}

/// Picks `k` distinct starting medoids, each new one drawn with probability
/// proportional to the squared dissimilarity to the nearest medoid so far.
fn seed_medoids(d: &DistanceMatrix, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = d.len();
    let mut medoids = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|x| d.get(x, medoids[0])).collect();
    while medoids.len() < k {
        let weights: Vec<f64> = (0..n)
            .map(|x| if medoids.contains(&x) { 0.0 } else { nearest[x].powi(2) })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.gen::<f64>() * total;
            let mut chosen = None;
            for (x, w) in weights.iter().enumerate() {
                if *w > 0.0 {
                    chosen = Some(x);
                    if u < *w {
                        break;
                    }
                    u -= w;
                }
            }
            chosen.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|x| !medoids.contains(x)).collect();
            free[rng.gen_range(0..free.len())]
        };
        medoids.push(pick);
        for (x, v) in nearest.iter_mut().enumerate() {
            *v = v.min(d.get(x, pick));
        }
    }
    medoids
}

fn run_once(d: &DistanceMatrix, k: usize, max_iter: usize, mut medoids: Vec<usize>) -> Run {
    let mut labels = assign(d, &medoids);
    let mut trace = vec![objective(d, &labels, &medoids)];
    for _ in 0..max_iter {
        let updated: Vec<usize> = members_of(&labels, k)
            .iter()
            .map(|m| frechet_medoid(m, d).expect("medoids keep their cluster non-empty"))
            .collect();
        let relabeled = assign(d, &updated);
        trace.push(objective(d, &relabeled, &updated));
        let stable = updated == medoids && relabeled == labels;
        medoids = updated;
        labels = relabeled;
        if stable {
            break;
        }
    }
    Run {
        objective: objective(d, &labels, &medoids),
        labels,
        medoids,
        trace,
    }
}

/// Renumbers clusters by their smallest member.
fn canonical(labels: &[usize], medoids: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = Vec::new();
    for &c in labels {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    let mut map = vec![usize::MAX; medoids.len()];
    for (new, &old) in order.iter().enumerate() {
        map[old] = new;
    }
    let new_medoids = order.iter().map(|&old| medoids[old]).collect();
    (labels.iter().map(|&c| map[c]).collect(), new_medoids)
}

/// k-means with Fréchet-medoid centroids, best of `n_init` seeded restarts.
pub fn kmedoids(d: &DistanceMatrix, options: &KMedoidsOptions) -> Result<Clustering> {
    let n = d.len();
    let k = options.k;
    if k < 2 || k > n {
        return Err(Error::BadK { k, n });
    }
    let restarts = options.n_init.max(1);
    let runs: Vec<Run> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(r as u64);
            let start = seed_medoids(d, k, &mut rng);
            run_once(d, k, options.max_iter, start)
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, r| if r.objective < best.objective { r } else { best })
        .expect("at least one restart");
    let (labels, medoids) = canonical(&best.labels, &best.medoids);
    let (silhouettes, coefficient) = silhouette(d, &labels)?;
    Ok(Clustering {
        k,
        labels,
        medoids,
        silhouettes,
        coefficient,
        objective: best.objective,
    })
}

/// Per-point silhouettes and their mean. Points alone in their cluster get 0.
pub fn silhouette(d: &DistanceMatrix, labels: &[usize]) -> Result<(Vec<f64>, f64)> {
    if labels.len() != d.len() {
        return Err(Error::InvalidMatrix(format!(
            "{} labels for {} points",
            labels.len(),
            d.len()
        )));
    }
    let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (x, &c) in labels.iter().enumerate() {
        clusters.entry(c).or_default().push(x);
    }
    if clusters.len() < 2 {
        return Err(Error::SingleCluster);
    }
    let per_point: Vec<f64> = (0..d.len())
        .map(|x| {
            let own = &clusters[&labels[x]];
            if own.len() == 1 {
                return 0.0;
            }
            let a = own.iter().filter(|&&y| y != x).map(|&y| d.get(x, y)).sum::<f64>() / (own.len() - 1) as f64;
            let b = clusters
                .iter()
                .filter(|(&c, _)| c != labels[x])
                .map(|(_, m)| m.iter().map(|&y| d.get(x, y)).sum::<f64>() / m.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom == 0.0 {
                0.0
            } else {
                (b - a) / denom
            }
        })
        .collect();
    let coefficient = per_point.iter().sum::<f64>() / per_point.len() as f64;
    Ok((per_point, coefficient))
}

/// Result of a silhouette scan over candidate cluster counts.
#[derive(Debug, Clone, PartialEq)]
pub struct KSelection {
    pub k: usize,
    pub coefficient: f64,
    pub scan: Vec<(usize, f64)>,
    pub clustering: Clustering,
}

/// Default scan range `2..=min(10, n − 1)`.
pub fn default_k_range(n: usize) -> RangeInclusive<usize> {
    2..=DEFAULT_MAX_K.min(n.saturating_sub(1))
}

/// Runs [`kmedoids`] for every `k` in `k_range` and keeps the `k` with the
/// largest silhouette coefficient (smaller `k` on ties).
pub fn select_k(d: &DistanceMatrix, k_range: RangeInclusive<usize>, base: &KMedoidsOptions) -> Result<KSelection> {
    if k_range.is_empty() {
        return Err(Error::EmptyRange);
    }
    let n = d.len();
    if *k_range.start() < 2 || *k_range.end() + 1 > n {
        return Err(Error::BadK {
            k: if *k_range.start() < 2 { *k_range.start() } else { *k_range.end() },
            n,
        });
    }
    let mut best: Option<Clustering> = None;
    let mut scan = Vec::new();
    for k in k_range {
        let c = kmedoids(d, &KMedoidsOptions { k, ..*base })?;
        scan.push((k, c.coefficient));
        if best.as_ref().is_none_or(|b| c.coefficient > b.coefficient) {
            best = Some(c);
        }
    }
    let clustering = best.expect("non-empty range");
    Ok(KSelection {
        k: clustering.k,
        coefficient: clustering.coefficient,
        scan,
        clustering,
    })
}

/// Adjusted Rand index between two partitions of the same points.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "partitions of different sizes");
    let n = a.len();
    let mut table: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    let pairs = |c: u64| (c * c.saturating_sub(1) / 2) as f64;
    let index: f64 = table.values().map(|&c| pairs(c)).sum();
    let sum_rows: f64 = rows.values().map(|&c| pairs(c)).sum();
    let sum_cols: f64 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n as u64);
    let expected = if total > 0.0 { sum_rows * sum_cols / total } else { 0.0 };
    let max_index = (sum_rows + sum_cols) / 2.0;
    if max_index == expected {
        return 1.0;
    }
    (index - expected) / (max_index - expected)
}

/// Conventional reading of a silhouette coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SilhouetteBand {
    Strong,
    Reasonable,
    Weak,
    NoStructure,
}

impl SilhouetteBand {
    pub fn of(coefficient: f64) -> Self {
        if coefficient > 0.70 {
            SilhouetteBand::Strong
        } else if coefficient > 0.51 {
            SilhouetteBand::Reasonable
        } else if coefficient > 0.25 {
            SilhouetteBand::Weak
        } else {
            SilhouetteBand::NoStructure
        }
    }
}

impl fmt::Display for SilhouetteBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SilhouetteBand::Strong => "strong structure",
            SilhouetteBand::Reasonable => "reasonable structure",
            SilhouetteBand::Weak => "weak structure",
            SilhouetteBand::NoStructure => "no substantial structure",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Domain;
    use proptest::prelude::*;

    fn blobs(sizes: &[usize], within: f64, between: f64) -> (DistanceMatrix, Vec<usize>) {
        let truth: Vec<usize> = sizes.iter().enumerate().flat_map(|(c, &s)| std::iter::repeat_n(c, s)).collect();
        let n = truth.len();
        let d = DistanceMatrix::from_fn(n, |i, j| {
            // deterministic jitter keeps the matrix free of exact ties
            let jitter = 1.0 + 0.01 * (((i * 7 + j * 13) % 5) as f64);
            if truth[i] == truth[j] {
                within * jitter
            } else {
                between * jitter
            }
        });
        (d, truth)
    }

    fn estimate(domain: Domain, grid: Vec<f64>, values: Vec<f64>) -> WarpingEstimate {
        WarpingEstimate {
            curve_id: "x".into(),
            domain,
            event_times: vec![],
            h_inv_values: vec![],
            grid,
            grid_values: values,
        }
    }

    #[test]
    fn identical_estimates_are_at_distance_zero() {
        let d = Domain::new(0.0, 1.0).unwrap();
        let g = interp::uniform_grid(d, 11);
        let e = estimate(d, g.clone(), g.iter().map(|t| t * t).collect());
        assert_eq!(warp_distance(&e, &e).unwrap(), 0.0);
        let m = distance_matrix(&[e.clone(), e.clone(), e.clone()]).unwrap();
        assert!((0..3).all(|i| (0..3).all(|j| m.get(i, j) == 0.0)));
    }

    #[test]
    fn triangular_bump_matches_closed_form() {
        let d = Domain::new(0.0, 1.0).unwrap();
        let g = interp::uniform_grid(d, 1001);
        let c = 0.1;
        let id = estimate(d, g.clone(), g.clone());
        let bump = estimate(d, g.clone(), g.iter().map(|&t| t + c * (1.0 - (2.0 * t - 1.0).abs())).collect());
        // ∫ (c·tri)² over [0, 1] = c² / 3
        let exact = c * c / 3.0;
        let got = warp_distance(&id, &bump).unwrap();
        assert!(((got - exact) / exact).abs() < 1e-4, "{got} vs {exact}");
        assert_eq!(got, warp_distance(&bump, &id).unwrap());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let d = Domain::new(0.0, 1.0).unwrap();
        let a = estimate(d, interp::uniform_grid(d, 11), interp::uniform_grid(d, 11));
        let b = estimate(d, interp::uniform_grid(d, 21), interp::uniform_grid(d, 21));
        assert_eq!(warp_distance(&a, &b), Err(Error::GridMismatch));
        assert_eq!(distance_matrix(&[a, b]), Err(Error::GridMismatch));
    }

    #[test]
    fn matrix_permutes_with_inputs() {
        let d = Domain::new(0.0, 1.0).unwrap();
        let g = interp::uniform_grid(d, 51);
        let es: Vec<WarpingEstimate> = [0.5, 1.0, 2.0, 3.0]
            .iter()
            .map(|p| estimate(d, g.clone(), g.iter().map(|t: &f64| t.powf(*p)).collect()))
            .collect();
        let m = distance_matrix(&es).unwrap();
        assert_eq!(m.get(1, 3), warp_distance(&es[1], &es[3]).unwrap());
        let perm = [2, 0, 3, 1];
        let permuted: Vec<WarpingEstimate> = perm.iter().map(|&p| es[p].clone()).collect();
        let mp = distance_matrix(&permuted).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(mp.get(i, j), m.get(perm[i], perm[j]));
            }
        }
    }

    #[test]
    fn from_rows_validates() {
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).is_err());
        assert!(DistanceMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
    }

    #[test]
    fn medoid_cases() {
        let d = DistanceMatrix::from_rows(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ])
        .unwrap();
        assert_eq!(frechet_medoid(&[2], &d).unwrap(), 2);
        assert_eq!(frechet_medoid(&[0, 1, 2], &d).unwrap(), 1);
        assert_eq!(frechet_medoid(&[2, 0], &d).unwrap(), 0);
        assert_eq!(frechet_medoid(&[], &d), Err(Error::EmptyGroup));
    }

    #[test]
    fn silhouette_hand_cases() {
        let d = DistanceMatrix::from_rows(&[vec![0.0, 3.0], vec![3.0, 0.0]]).unwrap();
        let (s, c) = silhouette(&d, &[0, 1]).unwrap();
        assert_eq!(s, vec![0.0, 0.0]);
        assert_eq!(c, 0.0);

        let d = DistanceMatrix::from_rows(&[
            vec![0.0, 1.0, 10.0, 10.0],
            vec![1.0, 0.0, 10.0, 10.0],
            vec![10.0, 10.0, 0.0, 1.0],
            vec![10.0, 10.0, 1.0, 0.0],
        ])
        .unwrap();
        let (s, c) = silhouette(&d, &[0, 0, 1, 1]).unwrap();
        assert!(s.iter().all(|v| (v - 0.9).abs() < 1e-12));
        assert!((c - 0.9).abs() < 1e-12);
        assert_eq!(silhouette(&d, &[0, 0, 0, 0]), Err(Error::SingleCluster));
    }

    #[test]
    fn bands() {
        assert_eq!(SilhouetteBand::of(0.6), SilhouetteBand::Reasonable);
        assert_eq!(SilhouetteBand::of(0.70), SilhouetteBand::Reasonable);
        assert_eq!(SilhouetteBand::of(0.51), SilhouetteBand::Weak);
        assert_eq!(SilhouetteBand::of(0.9), SilhouetteBand::Strong);
        assert_eq!(SilhouetteBand::of(0.1), SilhouetteBand::NoStructure);
    }

    #[test]
    fn two_blobs_recovered_for_every_seed() {
        let (d, truth) = blobs(&[6, 5], 1.0, 50.0);
        for seed in 0..20 {
            let c = kmedoids(&d, &KMedoidsOptions::new(2, seed)).unwrap();
            assert_eq!(adjusted_rand_index(&c.labels, &truth), 1.0, "seed {seed}");
            for (label, &m) in c.medoids.iter().enumerate() {
                assert_eq!(c.labels[m], label);
            }
        }
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let (d, _) = blobs(&[2, 2], 1.0, 5.0);
        let c = kmedoids(&d, &KMedoidsOptions::new(4, 3)).unwrap();
        let mut meds = c.medoids.clone();
        meds.sort();
        assert_eq!(meds, vec![0, 1, 2, 3]);
        assert_eq!(c.coefficient, 0.0);
        assert!(matches!(kmedoids(&d, &KMedoidsOptions::new(5, 0)), Err(Error::BadK { .. })));
        assert!(matches!(kmedoids(&d, &KMedoidsOptions::new(1, 0)), Err(Error::BadK { .. })));
    }

    #[test]
    fn objective_never_increases() {
        let n = 30;
        let d = DistanceMatrix::from_fn(n, |i, j| ((i as f64 * 0.7).sin() - (j as f64 * 0.7).sin()).abs() + 0.01 * ((i + j) % 3) as f64);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = seed_medoids(&d, 3, &mut rng);
            let run = run_once(&d, 3, 100, start);
            assert!(run.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{:?}", run.trace);
        }
    }

    #[test]
    fn select_k_finds_blob_count() {
        let (d2, _) = blobs(&[5, 6], 1.0, 40.0);
        let sel = select_k(&d2, 2..=5, &KMedoidsOptions::new(2, 7)).unwrap();
        assert_eq!(sel.k, 2);
        let (d3, truth) = blobs(&[4, 5, 4], 1.0, 40.0);
        let sel = select_k(&d3, 2..=6, &KMedoidsOptions::new(2, 7)).unwrap();
        assert_eq!(sel.k, 3);
        assert_eq!(adjusted_rand_index(&sel.clustering.labels, &truth), 1.0);
        assert_eq!(sel.scan.len(), 5);
        let only = select_k(&d3, 2..=2, &KMedoidsOptions::new(2, 7)).unwrap();
        assert_eq!(only.k, 2);
        assert_eq!(only.scan, vec![(2, only.coefficient)]);
        #[allow(clippy::reversed_empty_ranges)]
        let empty = 3..=2;
        assert_eq!(select_k(&d3, empty, &KMedoidsOptions::new(2, 7)), Err(Error::EmptyRange));
        assert!(matches!(select_k(&d3, 2..=13, &KMedoidsOptions::new(2, 7)), Err(Error::BadK { .. })));
    }

    #[test]
    fn ari_basics() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]), 1.0);
        assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn silhouettes_bounded_and_deterministic(points in prop::collection::vec(0.0..10.0f64, 4..20), k in 2usize..4, seed in 0u64..1000) {
            let n = points.len();
            let d = DistanceMatrix::from_fn(n, |i, j| (points[i] - points[j]).powi(2));
            let k = k.min(n);
            let opts = KMedoidsOptions::new(k, seed);
            let c = kmedoids(&d, &opts).unwrap();
            prop_assert!(c.silhouettes.iter().all(|s| (-1.0..=1.0).contains(s)));
            prop_assert!((-1.0..=1.0).contains(&c.coefficient));
            prop_assert!(c.labels.iter().all(|&l| l < k));
            let again = kmedoids(&d, &opts).unwrap();
            prop_assert_eq!(c, again);
        }

        #[test]
        fn relabeling_inputs_permutes_partition(seed in 0u64..50, rot in 1usize..10) {
            let (d, truth) = blobs(&[4, 3, 4], 1.0, 30.0);
            let n = d.len();
            let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
            let dp = DistanceMatrix::from_fn(n, |i, j| d.get(perm[i], perm[j]));
            let a = kmedoids(&d, &KMedoidsOptions::new(3, seed)).unwrap();
            let b = kmedoids(&dp, &KMedoidsOptions::new(3, seed)).unwrap();
            let back: Vec<usize> = {
                let mut v = vec![0; n];
                for i in 0..n { v[perm[i]] = b.labels[i]; }
                v
            };
            prop_assert_eq!(adjusted_rand_index(&a.labels, &back), 1.0);
            prop_assert_eq!(adjusted_rand_index(&a.labels, &truth), 1.0);
        }
    }
}
