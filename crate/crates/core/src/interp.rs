//! Small numerical helpers shared by the registration and clustering code:
//! uniform grids, piecewise-linear interpolation and trapezoidal integration.

use crate::curve::Domain;

/// `g` equally spaced points from `t_min` to `t_max`, endpoints exact.
pub fn uniform_grid(domain: Domain, g: usize) -> Vec<f64> {
    assert!(g >= 2, "grid needs at least two points");
    let width = domain.t_max() - domain.t_min();
    let last = (g - 1) as f64;
    let mut grid: Vec<f64> = (0..g)
        .map(|k| domain.t_min() + width * (k as f64) / last)
        .collect();
    grid[g - 1] = domain.t_max();
    grid
}

/// Evaluates the piecewise-linear interpolant through `(xs, ys)` at `x`.
///
/// `xs` must be strictly increasing. Outside `[xs[0], xs[n-1]]` the end values
/// are held constant.
pub fn interp_linear(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    // first index with xs[idx] > x; idx is in 1..n
    let idx = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[idx - 1], xs[idx]);
    let (y0, y1) = (ys[idx - 1], ys[idx]);
    if x == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Piecewise-linear interpolation of `(xs, ys)` evaluated at every point of `at`.
pub fn interp_many(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    at.iter().map(|&x| interp_linear(xs, ys, x)).collect()
}

/// Trapezoidal rule on a (possibly non-uniform) grid.
pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    xs.windows(2)
        .zip(ys.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

/// `true` when every element is below its successor.
pub fn is_strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] < w[1])
}
