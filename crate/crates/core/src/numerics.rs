//! Deterministic search utilities shared by the scheme solvers: uniform grid
//! maximization, golden-section refinement and bisection on monotone
//! constraint functions. No stochastic global optimization is used, so every
//! solve is reproducible and the searched grids are auditable.

use thiserror::Error;

const INV_PHI: f64 = 0.618_033_988_749_894_9; // 1/φ

/// Knobs for the grid/line searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Grid points per dimension (≥ 2).
    pub grid_points: usize,
    /// Golden-section iterations applied around the best grid point.
    pub refine_iters: usize,
    /// Interval/value tolerance for root finding.
    pub tolerance: f64,
    /// Seed for randomized restarts; the default solvers never use it but
    /// it is threaded through so configs stay hashable into run metadata.
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid_points: 1001,
            refine_iters: 48,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn with_grid_points(mut self, grid_points: usize) -> Self {
        assert!(grid_points >= 2, "grid_points must be at least 2");
        self.grid_points = grid_points;
        self
    }
}

/// Maximize `f` over a uniform grid on the axis-aligned box `bounds`.
///
/// Ties break toward the lexicographically smallest grid index, so a constant
/// function returns the first grid point. Panics on an empty box.
pub fn grid_max<F>(f: F, bounds: &[(f64, f64)], cfg: &SearchConfig) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    assert!(!bounds.is_empty(), "grid_max: empty box");
    for &(lo, hi) in bounds {
        assert!(lo <= hi, "grid_max: inverted bounds [{lo}, {hi}]");
    }
    let n = cfg.grid_points.max(2);
    let dims = bounds.len();
    let mut idx = vec![0usize; dims];
    let mut point = vec![0.0; dims];
    let mut best_point = Vec::new();
    let mut best = f64::NEG_INFINITY;
    loop {
        for d in 0..dims {
            let (lo, hi) = bounds[d];
            point[d] = lo + (hi - lo) * idx[d] as f64 / (n - 1) as f64;
        }
        let v = f(&point);
        if v > best || best_point.is_empty() {
            best = v;
            best_point = point.clone();
        }
        // advance the multi-index, last dimension fastest
        let mut d = dims;
        loop {
            if d == 0 {
                return (best_point, best);
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < n {
                break;
            }
            idx[d] = 0;
        }
    }
}

/// Golden-section refinement of a maximum of `f` inside `bracket`.
///
/// Shrinks the bracket by 1/φ per iteration and returns the final bracket
/// midpoint with its value; zero iterations return the midpoint of the input
/// bracket.
pub fn golden_refine<F>(f: F, bracket: (f64, f64), iters: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = bracket;
    assert!(lo <= hi, "golden_refine: inverted bracket");
    let mut x1 = hi - (hi - lo) * INV_PHI;
    let mut x2 = lo + (hi - lo) * INV_PHI;
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - (hi - lo) * INV_PHI;
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + (hi - lo) * INV_PHI;
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Which end of the bracket fails the sign condition in [`bisect_root`].
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum BisectError {
    /// `g(lo) > 0`: the constraint is already satisfied at the lower end.
    #[error("g is positive at the lower endpoint")]
    PositiveAtLower,
    /// `g(hi) < 0`: no root exists in the bracket.
    #[error("g is negative at the upper endpoint")]
    NegativeAtUpper,
}

/// Find the root of a nondecreasing function `g` on `[lo, hi]`.
///
/// Returns `x` with `|g(x)| <= tol` or bracket width `<= tol`. When the sign
/// condition `g(lo) <= 0 <= g(hi)` fails the offending endpoint is reported
/// so callers can map it to "constraint already met" or "infeasible".
pub fn bisect_root<F>(g: F, lo: f64, hi: f64, tol: f64) -> Result<f64, BisectError>
where
    F: Fn(f64) -> f64,
{
    assert!(lo <= hi && tol > 0.0);
    let glo = g(lo);
    if glo > 0.0 {
        return Err(BisectError::PositiveAtLower);
    }
    if glo == 0.0 {
        return Ok(lo);
    }
    if g(hi) < 0.0 {
        return Err(BisectError::NegativeAtUpper);
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() <= tol {
            return Ok(mid);
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
