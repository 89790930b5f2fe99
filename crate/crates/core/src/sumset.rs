//! Spectra of the square and cubic Fibonacci Hamiltonians as Minkowski sums
//! of the one-dimensional covers, and the coupling values at which they
//! change topology.

use alloc::vec::Vec;

use crate::approximant::{merge_tol, sigma_cover};
use crate::error::{Error, Result};
use crate::interval::{minkowski_sum, thickness, GapRatio, IntervalSet};
use crate::real::{PrecisionContext, Real};

fn sum_tol<R: Real>(couplings: &[f64], ctx: &PrecisionContext) -> R {
    let w: f64 = couplings.iter().map(|l| libm::fabs(*l) + 4.0).sum();
    merge_tol(w, ctx)
}

/// `Sigma_{k, lambda1} + Sigma_{k, lambda2}`.
pub fn square_spectrum<R: Real>(k: usize, lambda1: f64, lambda2: f64, ctx: &PrecisionContext) -> Result<IntervalSet<R>> {
    let a = sigma_cover::<R>(k, lambda1, ctx)?;
    let b = if lambda2 == lambda1 { a.clone() } else { sigma_cover::<R>(k, lambda2, ctx)? };
    Ok(minkowski_sum(&a, &b, &sum_tol::<R>(&[lambda1, lambda2], ctx)))
}

/// `(Sigma + Sigma) + Sigma` at a single coupling.
pub fn cubic_spectrum<R: Real>(k: usize, lambda: f64, ctx: &PrecisionContext) -> Result<IntervalSet<R>> {
    let a = sigma_cover::<R>(k, lambda, ctx)?;
    let tol2 = sum_tol::<R>(&[lambda, lambda], ctx);
    let tol3 = sum_tol::<R>(&[lambda, lambda, lambda], ctx);
    let aa = minkowski_sum(&a, &a, &tol2);
    Ok(minkowski_sum(&aa, &a, &tol3))
}

/// Components of the `dim`-fold sum, `dim` in `1..=3`.
pub fn count_components<R: Real>(k: usize, dim: u32, lambda: f64, ctx: &PrecisionContext) -> Result<usize> {
    Ok(match dim {
        1 => sigma_cover::<R>(k, lambda, ctx)?.len(),
        2 => square_spectrum::<R>(k, lambda, lambda, ctx)?.len(),
        3 => cubic_spectrum::<R>(k, lambda, ctx)?.len(),
        _ => return Err(Error::Precondition("dimension must be 1, 2 or 3")),
    })
}

/// First coupling in a range where the component count exceeds `m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionResult {
    pub level: usize,
    pub dimension: u32,
    pub m: usize,
    pub lambda_star: f64,
    /// `count(bracket.0) <= m < count(bracket.1)`
    pub bracket: (f64, f64),
    pub count_left: usize,
    pub count_right: usize,
    /// `(lambda, count)` at every scanned grid point.
    pub trace: Vec<(f64, usize)>,
}

/// Scan outcome: either a bracketed transition or the full trace when the
/// count never exceeds `m`.
#[derive(Clone, Debug, PartialEq)]
pub enum TransitionScan {
    Found(TransitionResult),
    NotFound { trace: Vec<(f64, usize)> },
}

/// Counting callback so sweeps can evaluate grid points elsewhere (for
/// example in parallel) and feed them back.
pub trait CountOracle {
    fn count(&self, lambda: f64) -> Result<usize>;
    /// Counts for many couplings; the default evaluates in order.
    fn count_many(&self, lambdas: &[f64]) -> Result<Vec<usize>> {
        lambdas.iter().map(|&l| self.count(l)).collect()
    }
}

/// Component counts of the `dim`-fold sum at level `k`.
pub struct SumCounter<'a, R> {
    pub k: usize,
    pub dim: u32,
    pub ctx: &'a PrecisionContext,
    _r: core::marker::PhantomData<R>,
}

impl<'a, R: Real> SumCounter<'a, R> {
    pub fn new(k: usize, dim: u32, ctx: &'a PrecisionContext) -> Self {
        SumCounter { k, dim, ctx, _r: core::marker::PhantomData }
    }
}

impl<R: Real> CountOracle for SumCounter<'_, R> {
    fn count(&self, lambda: f64) -> Result<usize> {
        count_components::<R>(self.k, self.dim, lambda, self.ctx)
    }
}

/// Grid `lo, lo + step, ...` not exceeding `hi`, computed by index so that
/// the points do not drift.
pub fn scan_grid(range: (f64, f64), step: f64) -> Vec<f64> {
    let n = libm::floor((range.1 - range.0) / step + 1e-9) as usize;
    (0..=n).map(|i| range.0 + i as f64 * step).collect()
}

/// Scans upward for the first grid bracket with `count <= m` on the left and
/// `count > m` on the right, then bisects it to width `tol`.
pub fn transition_scan_with(
    oracle: &dyn CountOracle,
    meta: (usize, u32, usize),
    range: (f64, f64),
    scan_step: f64,
    tol: f64,
) -> Result<TransitionScan> {
    let (level, dimension, m) = meta;
    if !(scan_step > 0.0 && tol > 0.0) || !(range.0 <= range.1) {
        return Err(Error::Precondition("transition_scan needs step > 0, tol > 0, lo <= hi"));
    }
    let grid = scan_grid(range, scan_step);
    let counts = oracle.count_many(&grid)?;
    let trace: Vec<(f64, usize)> = grid.iter().copied().zip(counts.iter().copied()).collect();
    let Some(i) = (0..trace.len().saturating_sub(1)).find(|&i| trace[i].1 <= m && trace[i + 1].1 > m) else {
        return Ok(TransitionScan::NotFound { trace });
    };
    let (mut a, mut ca) = trace[i];
    let (mut b, mut cb) = trace[i + 1];
    while b - a > tol {
        let mid = 0.5 * (a + b);
        let c = oracle.count(mid)?;
        if c <= m {
            a = mid;
            ca = c;
        } else {
            b = mid;
            cb = c;
        }
    }
    Ok(TransitionScan::Found(TransitionResult {
        level,
        dimension,
        m,
        lambda_star: 0.5 * (a + b),
        bracket: (a, b),
        count_left: ca,
        count_right: cb,
        trace,
    }))
}

pub fn transition_scan<R: Real>(
    k: usize,
    dim: u32,
    m: usize,
    range: (f64, f64),
    scan_step: f64,
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<TransitionScan> {
    transition_scan_with(&SumCounter::<R>::new(k, dim, ctx), (k, dim, m), range, scan_step, tol)
}

/// Thickness of `Sigma_{k, lambda}` minus one, as a real number.
pub fn thickness_excess<R: Real>(k: usize, lambda: f64, ctx: &PrecisionContext) -> Result<f64> {
    Ok(match thickness(&sigma_cover::<R>(k, lambda, ctx)?) {
        GapRatio::Infinite => f64::INFINITY,
        GapRatio::Finite(t) => t.to_f64() - 1.0,
    })
}

/// Outcome of the threshold search.
#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdSearch {
    Found { lambda_star: f64, bracket: (f64, f64) },
    /// `tau - 1` has the same sign at both ends.
    NotFound { ends: (f64, f64) },
}

/// Bisection for `tau(Sigma_{k, lambda}) = 1` on `range`.
pub fn thickness_threshold<R: Real>(
    k: usize,
    range: (f64, f64),
    tol: f64,
    ctx: &PrecisionContext,
) -> Result<ThresholdSearch> {
    if !(tol > 0.0) || !(range.0 < range.1) {
        return Err(Error::Precondition("thickness_threshold needs tol > 0 and lo < hi"));
    }
    let (mut a, mut b) = range;
    let fa = thickness_excess::<R>(k, a, ctx)?;
    let fb = thickness_excess::<R>(k, b, ctx)?;
    if (fa > 0.0) == (fb > 0.0) {
        return Ok(ThresholdSearch::NotFound { ends: (fa, fb) });
    }
    let left_positive = fa > 0.0;
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if (thickness_excess::<R>(k, mid, ctx)? > 0.0) == left_positive {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(ThresholdSearch::Found { lambda_star: 0.5 * (a + b), bracket: (a, b) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::double()
    }

    #[test]
    fn free_sums_are_intervals() {
        let s = square_spectrum::<f64>(5, 0.0, 0.0, &ctx()).unwrap();
        assert_eq!(s.intervals(), &[(-4.0, 4.0)]);
        let c = cubic_spectrum::<f64>(5, 0.0, &ctx()).unwrap();
        assert_eq!(c.intervals(), &[(-6.0, 6.0)]);
    }

    #[test]
    fn published_component_counts() {
        assert_eq!(count_components::<f64>(8, 1, 2.0, &ctx()).unwrap(), 42);
        assert_eq!(count_components::<f64>(8, 2, 4.0, &ctx()).unwrap(), 311);
        assert_eq!(count_components::<f64>(7, 3, 7.0, &ctx()).unwrap(), 482);
    }

    #[test]
    fn cubic_sum_is_associative() {
        let a = sigma_cover::<f64>(5, 3.0, &ctx()).unwrap();
        let aa = minkowski_sum(&a, &a, &0.0);
        let left = minkowski_sum(&aa, &a, &0.0);
        let right = minkowski_sum(&a, &aa, &0.0);
        assert_eq!(left.len(), right.len());
        for (x, y) in left.intervals().iter().zip(right.intervals()) {
            assert!((x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn counts_grow_with_level() {
        for lam in [2.0, 4.0] {
            let mut prev = 0;
            for k in 2..=10 {
                let c = count_components::<f64>(k, 2, lam, &ctx()).unwrap();
                assert!(c >= prev, "lambda {lam}, k {k}");
                prev = c;
            }
        }
    }

    #[test]
    fn small_coupling_square_is_an_interval() {
        for k in [3, 6, 9, 13] {
            for lam in [0.25, 0.75, 1.25] {
                assert_eq!(count_components::<f64>(k, 2, lam, &ctx()).unwrap(), 1);
            }
        }
    }

    #[test]
    fn scan_reports_missing_crossing() {
        match transition_scan::<f64>(4, 2, 1, (0.1, 0.2), 0.05, 1e-3, &ctx()).unwrap() {
            TransitionScan::NotFound { trace } => assert_eq!(trace.len(), 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn scan_grid_is_exact() {
        let g = scan_grid((1.0, 1.5), 0.1);
        assert_eq!(g.len(), 6);
        assert!((g[5] - 1.5).abs() < 1e-15);
    }
}
