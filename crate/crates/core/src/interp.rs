//! Piecewise-linear interpolation on monotone grids.

/// Linear interpolation of `(xs, ys)` at `x`. `xs` must be strictly
/// increasing. Returns `None` outside `[xs[0], xs[n-1]]`.
pub fn linear(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    debug_assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n == 0 || x < xs[0] || x > xs[n - 1] || x.is_nan() {
        return None;
    }
    if n == 1 {
        return Some(ys[0]);
    }
    let hi = xs.partition_point(|&v| v < x).clamp(1, n - 1);
    let lo = hi - 1;
    let t = (x - xs[lo]) / (xs[hi] - xs[lo]);
    Some(ys[lo] + t * (ys[hi] - ys[lo]))
}

/// Index of the grid point nearest to `x`.
pub fn nearest_index(xs: &[f64], x: f64) -> usize {
    let hi = xs.partition_point(|&v| v < x);
    if hi == 0 {
        return 0;
    }
    if hi >= xs.len() {
        return xs.len() - 1;
    }
    if (x - xs[hi - 1]).abs() <= (xs[hi] - x).abs() {
        hi - 1
    } else {
        hi
    }
}

/// True if `xs` is strictly increasing.
pub fn is_strictly_increasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] > w[0])
}

/// Uniform grid `start, start + step, ...` with `count` points.
pub fn uniform_grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + step * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_rejects_outside() {
        let xs = [0.0, 1.0, 2.0];
        let ys = [0.0, 10.0, 30.0];
        assert_eq!(linear(&xs, &ys, 0.5), Some(5.0));
        assert_eq!(linear(&xs, &ys, 1.5), Some(20.0));
        assert_eq!(linear(&xs, &ys, 2.0), Some(30.0));
        assert_eq!(linear(&xs, &ys, 0.0), Some(0.0));
        assert_eq!(linear(&xs, &ys, 2.1), None);
        assert_eq!(linear(&xs, &ys, -0.1), None);
    }

    #[test]
    fn nearest() {
        let xs = [0.0, 1.0, 2.0];
        assert_eq!(nearest_index(&xs, -5.0), 0);
        assert_eq!(nearest_index(&xs, 0.4), 0);
        assert_eq!(nearest_index(&xs, 0.6), 1);
        assert_eq!(nearest_index(&xs, 9.0), 2);
    }
}
