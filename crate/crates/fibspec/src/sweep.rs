//! Parallel evaluation over parameter grids.
//!
//! Every map preserves grid order, so output never depends on the thread
//! count or on scheduling.

use std::collections::BTreeMap;
use std::marker::PhantomData;
use std::sync::Mutex;

use fibspec_core::sumset::{count_components, CountOracle};
use fibspec_core::{PrecisionContext, Real};
use rayon::prelude::*;

/// `n` evenly spaced points from `range.0` to `range.1` inclusive, by index.
pub fn linspace(range: (f64, f64), n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![range.0],
        _ => {
            let h = (range.1 - range.0) / (n - 1) as f64;
            (0..n).map(|i| if i + 1 == n { range.1 } else { range.0 + i as f64 * h }).collect()
        }
    }
}

/// `f` at every grid point, in grid order; failures stay in their slot.
pub fn par_map<T, E, F>(grid: &[f64], f: F) -> Vec<Result<T, E>>
where
    T: Send,
    E: Send,
    F: Fn(f64) -> Result<T, E> + Sync,
{
    grid.par_iter().map(|&x| f(x)).collect()
}

/// Component counts evaluated in parallel and memoised by coupling, so
/// scans for several thresholds share one pass over the grid.
pub struct ParCounter<'a, R> {
    k: usize,
    dim: u32,
    ctx: &'a PrecisionContext,
    cache: Mutex<BTreeMap<u64, usize>>,
    _r: PhantomData<fn() -> R>,
}

impl<'a, R: Real> ParCounter<'a, R> {
    pub fn new(k: usize, dim: u32, ctx: &'a PrecisionContext) -> Self {
        ParCounter { k, dim, ctx, cache: Mutex::new(BTreeMap::new()), _r: PhantomData }
    }

    fn cached(&self, lambda: f64) -> Option<usize> {
        self.cache.lock().unwrap().get(&lambda.to_bits()).copied()
    }
}

impl<R: Real> CountOracle for ParCounter<'_, R> {
    fn count(&self, lambda: f64) -> fibspec_core::Result<usize> {
        if let Some(c) = self.cached(lambda) {
            return Ok(c);
        }
        let c = count_components::<R>(self.k, self.dim, lambda, self.ctx)?;
        self.cache.lock().unwrap().insert(lambda.to_bits(), c);
        Ok(c)
    }

    fn count_many(&self, lambdas: &[f64]) -> fibspec_core::Result<Vec<usize>> {
        let missing: Vec<f64> = lambdas.iter().copied().filter(|&l| self.cached(l).is_none()).collect();
        let fresh: Vec<fibspec_core::Result<usize>> =
            missing.par_iter().map(|&l| count_components::<R>(self.k, self.dim, l, self.ctx)).collect();
        {
            let mut cache = self.cache.lock().unwrap();
            for (l, c) in missing.iter().zip(fresh) {
                cache.insert(l.to_bits(), c?);
            }
        }
        Ok(lambdas.iter().map(|&l| self.cached(l).unwrap()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fibspec_core::sumset::SumCounter;

    #[test]
    fn linspace_hits_both_ends() {
        assert!(linspace((0.0, 1.0), 0).is_empty());
        assert_eq!(linspace((2.0, 3.0), 1), [2.0]);
        let g = linspace((0.0, 0.3), 4);
        assert_eq!(g.len(), 4);
        assert_eq!(g[3], 0.3);
        assert!((g[1] - 0.1).abs() < 1e-16);
    }

    #[test]
    fn par_map_keeps_order_and_failures() {
        let out = par_map(&[1.0, -1.0, 4.0], |x| if x >= 0.0 { Ok(x.sqrt()) } else { Err("neg") });
        assert_eq!(out, [Ok(1.0), Err("neg"), Ok(2.0)]);
    }

    #[test]
    fn memoised_counts_match_direct() {
        let ctx = PrecisionContext::double();
        let par = ParCounter::<f64>::new(6, 2, &ctx);
        let direct = SumCounter::<f64>::new(6, 2, &ctx);
        let grid = linspace((1.0, 2.0), 11);
        let a = par.count_many(&grid).unwrap();
        assert_eq!(a, direct.count_many(&grid).unwrap());
        assert_eq!(par.count_many(&grid).unwrap(), a);
    }
}
