//! Periodic approximants of the Fibonacci and Sturmian Hamiltonians and their
//! band spectra.
//!
//! The spectrum of the period-`q` operator is `sigma = {E : |x_k(E)| <= 1}`,
//! a union of `q` bands whose `2q` edges are the eigenvalues of the two
//! boundary-condition matrices `J_+` and `J_-`.

use alloc::vec::Vec;

use crate::counting::{self, EdgeCounter};
use crate::eigen::{all_eigenvalues, SymMatrix};
use crate::error::{Error, Result};
use crate::interval::{union, IntervalSet};
use crate::real::{PrecisionContext, Real};
use crate::trace::ContinuedFraction;

pub use crate::word::fibonacci;

/// `v_{n,k} = lambda` when `n F_{k-1} mod F_k >= F_k - F_{k-1}`, else 0.
pub fn fib_potential(k: usize, coupling: f64, n: u64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("level must be at least 1"));
    }
    let (p, q) = (fibonacci(k - 1)?, fibonacci(k)?);
    site(p as u128, q as u128, coupling, n as u128)
}

fn site(p: u128, q: u128, coupling: f64, n: u128) -> Result<f64> {
    if n == 0 || n > q {
        return Err(Error::Precondition("site index outside 1..=period"));
    }
    let r = n.checked_mul(p).ok_or(Error::IntegerOverflow("potential"))? % q;
    Ok(if r >= q - p { coupling } else { 0.0 })
}

/// A periodic potential `lambda chi_[q-p, q)(n p mod q)` with `p/q` the
/// level-`K` convergent of a continued fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicApproximant {
    pub level: usize,
    pub period: u128,
    pub coupling: f64,
    cf: ContinuedFraction,
}

impl PeriodicApproximant {
    pub fn fibonacci(k: usize, coupling: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::Precondition("level must be at least 1"));
        }
        Self::sturmian(&ContinuedFraction::golden(k)?, k, coupling)
    }

    /// Level `1 <= level <= K` of `cf`; requires `q_level >= 2` unless the
    /// fraction is golden.
    pub fn sturmian(cf: &ContinuedFraction, level: usize, coupling: f64) -> Result<Self> {
        if level == 0 || level > cf.levels() {
            return Err(Error::Precondition("level outside 1..=K"));
        }
        if !coupling.is_finite() {
            return Err(Error::Precondition("non-finite coupling"));
        }
        let cf = ContinuedFraction::new(cf.quotients()[..level].to_vec())?;
        let (_, q) = cf.convergent(level);
        Ok(PeriodicApproximant { level, period: q, coupling, cf })
    }

    pub fn continued_fraction(&self) -> &ContinuedFraction {
        &self.cf
    }

    /// Potential at site `1 <= n <= period`.
    pub fn potential_at(&self, n: u128) -> Result<f64> {
        let (p, q) = self.cf.convergent(self.level);
        site(p, q, self.coupling, n)
    }

    /// One period of the potential; fails for periods beyond `limit`.
    pub fn potential(&self, limit: usize) -> Result<Vec<f64>> {
        if self.period > limit as u128 {
            return Err(Error::Precondition("period too large to materialise"));
        }
        (1..=self.period).map(|n| self.potential_at(n)).collect()
    }

    fn counter(&self) -> EdgeCounter<'_> {
        EdgeCounter { quotients: self.cf.quotients(), coupling: self.coupling, period: self.period }
    }

    /// `x_k(E)` for this approximant.
    pub fn half_trace<R: Real>(&self, energy: &R) -> R {
        let lam = energy.from_f64_like(self.coupling);
        self.counter().trace(energy, &lam)
    }

    /// Number of band edges strictly below `energy`.
    pub fn edges_below<R: Real>(&self, energy: &R) -> u128 {
        let lam = energy.from_f64_like(self.coupling);
        self.counter().edges_below(energy, &lam).0
    }
}

/// The periodic (`+1` corners) and antiperiodic (`-1` corners) matrices.
/// For period 2 the corners fold onto the off-diagonal.
pub fn periodic_matrices<R: Real>(
    approx: &PeriodicApproximant,
    ctx: &PrecisionContext,
) -> Result<(SymMatrix<R>, SymMatrix<R>)> {
    const DENSE_LIMIT: usize = 1 << 14;
    let v = approx.potential(DENSE_LIMIT)?;
    let n = v.len();
    let like = R::from_f64(0.0, ctx);
    let build = |corner: i64| {
        let mut m = SymMatrix::zeros(n, &like);
        for (i, &vi) in v.iter().enumerate() {
            m.set(i, i, like.from_f64_like(vi));
        }
        for i in 0..n.saturating_sub(1) {
            m.set(i + 1, i, like.one_like());
        }
        if n == 1 {
            m.set(0, 0, like.from_f64_like(v[0] + 2.0 * corner as f64));
        } else {
            let c = m.get(n - 1, 0).clone() + &like.from_i64_like(corner);
            m.set(n - 1, 0, c);
        }
        m
    };
    Ok((build(1), build(-1)))
}

/// How band edges are located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EdgeMethod {
    /// Exact counting of edges below an energy, then root refinement.
    #[default]
    Counting,
    /// Double-precision dense eigensolve of `J_+` and `J_-`, then root
    /// refinement at working precision. Periods up to 1597.
    Dense,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BandSpectrum<R> {
    pub bands: IntervalSet<R>,
    pub level: usize,
    pub period: u128,
    pub coupling: f64,
    /// Largest `| |x_k(edge)| - 1 |` over all edges.
    pub max_residual: f64,
    /// Method that produced the edges (after any fallback).
    pub method: EdgeMethod,
}

/// Tolerance `2^(10 - bits) * hull_width` for merging eigenvalue-derived sets.
pub fn merge_tol<R: Real>(hull_width: f64, ctx: &PrecisionContext) -> R {
    let bits = R::effective_bits(ctx.bits).min(ctx.bits);
    R::from_f64(libm::ldexp(hull_width, 10 - bits as i32), ctx)
}

fn dense_edges<R: Real>(approx: &PeriodicApproximant, ctx: &PrecisionContext) -> Result<Option<(Vec<R>, f64)>> {
    let dctx = PrecisionContext::double();
    let (jp, jm) = periodic_matrices::<f64>(approx, &dctx)?;
    let mut ev = all_eigenvalues(&jp, &dctx)?;
    ev.extend(all_eigenvalues(&jm, &dctx)?);
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let counter = approx.counter();
    let lam = R::from_f64(approx.coupling, ctx);
    let width = ev[ev.len() - 1] - ev[0] + 4.0;
    let bits = R::effective_bits(ctx.bits).min(ctx.bits) as i32;
    let tol = R::from_f64(libm::ldexp(width, -4 - bits), ctx);
    let mut edges = Vec::with_capacity(ev.len());
    let mut worst = 0.0f64;
    for (i, &e) in ev.iter().enumerate() {
        // keep the bracket strictly between the neighbouring estimates
        let left = if i > 0 { (ev[i - 1] + e) / 2.0 } else { e - 1.0 };
        let right = if i + 1 < ev.len() { (ev[i + 1] + e) / 2.0 } else { e + 1.0 };
        let want = (i as u128, i as u128 + 1);
        let mut w = 1e-10 * width;
        let mut found = None;
        for _ in 0..4 {
            let a = libm::fmax(e - w, left);
            let b = libm::fmin(e + w, right);
            let (ar, br) = (R::from_f64(a, ctx), R::from_f64(b, ctx));
            if (counter.edges_below(&ar, &lam).0, counter.edges_below(&br, &lam).0) == want {
                found = Some((ar, br));
                break;
            }
            w *= 64.0;
        }
        let Some((a, b)) = found else {
            return Ok(None);
        };
        let cell = counting::single_cell(a, b, i as u128);
        let (root, r) = counting::refine_cell(&counter, &lam, &cell, &tol);
        worst = worst.max(r);
        edges.push(root);
    }
    Ok(Some((edges, worst)))
}

fn spectrum_of<R: Real>(
    approx: &PeriodicApproximant,
    ctx: &PrecisionContext,
    method: EdgeMethod,
) -> Result<BandSpectrum<R>> {
    let lam = approx.coupling;
    let hull_width = libm::fabs(lam) + 4.0;
    let tol: R = merge_tol(hull_width, ctx);
    let mut out = BandSpectrum {
        bands: IntervalSet::empty(),
        level: approx.level,
        period: approx.period,
        coupling: lam,
        max_residual: 0.0,
        method,
    };
    if lam == 0.0 || approx.period == 1 {
        // every gap is closed, or a single site: one band
        let shift = if approx.period == 1 { approx.potential_at(1)? } else { 0.0 };
        let (lo, hi) = (R::from_f64(shift - 2.0, ctx), R::from_f64(shift + 2.0, ctx));
        out.bands = IntervalSet::from_sorted(alloc::vec![(lo, hi)])?;
        return Ok(out);
    }
    let mut edges = None;
    if method == EdgeMethod::Dense {
        if approx.period > 1597 {
            return Err(Error::Precondition("dense edges need period <= 1597"));
        }
        if let Some((e, r)) = dense_edges::<R>(approx, ctx)? {
            out.max_residual = r;
            edges = Some(e);
        } else {
            out.method = EdgeMethod::Counting;
        }
    }
    let edges = match edges {
        Some(e) => e,
        None => {
            let c = counting::band_edges::<R>(&approx.counter(), ctx)?;
            // collapsed edges would silently merge bands; ask for more bits
            if c.unresolved > 0 {
                return Err(Error::UnresolvedEdges { count: c.unresolved });
            }
            out.max_residual = c.max_residual;
            c.edges
        }
    };
    let raw: Vec<(R, R)> = edges.chunks(2).map(|w| (w[0].clone(), w[1].clone())).collect();
    // a band's centre must satisfy |x| < 1
    for (j, (lo, hi)) in raw.iter().enumerate() {
        let mid = (lo.clone() + hi).mul_pow2(-1);
        if !(approx.half_trace(&mid).abs() < mid.one_like()) {
            return Err(Error::BandVerification { band: j + 1 });
        }
    }
    out.bands = IntervalSet::normalize(raw, &tol)?;
    Ok(out)
}

/// Bands of the level-`k` Fibonacci approximant.
pub fn band_spectrum<R: Real>(k: usize, coupling: f64, ctx: &PrecisionContext) -> Result<BandSpectrum<R>> {
    band_spectrum_with(k, coupling, ctx, EdgeMethod::default())
}

pub fn band_spectrum_with<R: Real>(
    k: usize,
    coupling: f64,
    ctx: &PrecisionContext,
    method: EdgeMethod,
) -> Result<BandSpectrum<R>> {
    spectrum_of(&PeriodicApproximant::fibonacci(k, coupling)?, ctx, method)
}

/// `Sigma_k = sigma_k union sigma_{k+1}`, which contains the limit spectrum
/// and decreases with `k`.
pub fn sigma_cover<R: Real>(k: usize, coupling: f64, ctx: &PrecisionContext) -> Result<IntervalSet<R>> {
    sigma_cover_with(k, coupling, ctx, EdgeMethod::default())
}

pub fn sigma_cover_with<R: Real>(
    k: usize,
    coupling: f64,
    ctx: &PrecisionContext,
    method: EdgeMethod,
) -> Result<IntervalSet<R>> {
    let a = band_spectrum_with::<R>(k, coupling, ctx, method)?;
    let b = band_spectrum_with::<R>(k + 1, coupling, ctx, method)?;
    let tol: R = merge_tol(libm::fabs(coupling) + 4.0, ctx);
    Ok(union(&a.bands, &b.bands, &tol))
}

/// Bands of a Sturmian approximant. A dense solve that fails to bracket an
/// edge falls back to counting.
pub fn sturmian_band_spectrum<R: Real>(
    cf: &ContinuedFraction,
    level: usize,
    coupling: f64,
    ctx: &PrecisionContext,
    method: EdgeMethod,
) -> Result<BandSpectrum<R>> {
    let approx = PeriodicApproximant::sturmian(cf, level, coupling)?;
    if approx.period < 2 && !cf.is_golden() {
        return Err(Error::Precondition("Sturmian approximant needs period >= 2"));
    }
    spectrum_of(&approx, ctx, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::double()
    }

    #[test]
    fn potential_examples() {
        let v: Vec<f64> = (1..=3).map(|n| fib_potential(3, 1.0, n).unwrap()).collect();
        assert_eq!(v, [1.0, 1.0, 0.0]);
        assert!(fib_potential(3, 1.0, 4).is_err());
        let cf = ContinuedFraction::new(alloc::vec![2]).unwrap();
        let a = PeriodicApproximant::sturmian(&cf, 1, 1.0).unwrap();
        assert_eq!(a.potential(10).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn period_two_matrices_fold_corners() {
        let a = PeriodicApproximant::fibonacci(2, 2.0).unwrap();
        let (jp, jm) = periodic_matrices::<f64>(&a, &ctx()).unwrap();
        assert_eq!(jp, SymMatrix::from_rows(2, alloc::vec![2.0, 2.0, 2.0, 0.0]).unwrap());
        assert_eq!(jm, SymMatrix::from_rows(2, alloc::vec![2.0, 0.0, 0.0, 0.0]).unwrap());
        let s = band_spectrum::<f64>(2, 2.0, &ctx()).unwrap();
        let r5 = libm::sqrt(5.0);
        let want = [(1.0 - r5, 0.0), (2.0, 1.0 + r5)];
        for (got, want) in s.bands.intervals().iter().zip(want) {
            assert!((got.0 - want.0).abs() < 1e-12 && (got.1 - want.1).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn level_one_is_a_shifted_free_band() {
        let s = band_spectrum::<f64>(1, 3.0, &ctx()).unwrap();
        assert_eq!(s.bands.intervals(), &[(1.0, 5.0)]);
    }

    #[test]
    fn counting_and_dense_agree() {
        for k in 2..=11 {
            for lam in [0.3, 1.0, 2.0, 8.0] {
                let a = band_spectrum_with::<f64>(k, lam, &ctx(), EdgeMethod::Counting).unwrap();
                let b = band_spectrum_with::<f64>(k, lam, &ctx(), EdgeMethod::Dense).unwrap();
                assert_eq!(a.bands.len(), b.bands.len(), "k = {k}, lambda = {lam}");
                for (x, y) in a.bands.intervals().iter().zip(b.bands.intervals()) {
                    assert!((x.0 - y.0).abs() < 1e-11 && (x.1 - y.1).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn band_count_equals_period() {
        for k in 2..=12 {
            let s = band_spectrum::<f64>(k, 2.0, &ctx()).unwrap();
            assert_eq!(s.bands.len() as u64, fibonacci(k).unwrap());
            assert!(s.max_residual < 1e-9);
        }
        let s = sigma_cover::<f64>(8, 2.0, &ctx()).unwrap();
        assert_eq!(s.len(), 42);
    }

    #[test]
    fn sturmian_edge_counts_match_eigenvalues() {
        let cf = ContinuedFraction::new(alloc::vec![2, 1, 3, 2]).unwrap();
        for level in 1..=4 {
            let a = sturmian_band_spectrum::<f64>(&cf, level, 1.5, &ctx(), EdgeMethod::Counting).unwrap();
            let b = sturmian_band_spectrum::<f64>(&cf, level, 1.5, &ctx(), EdgeMethod::Dense).unwrap();
            assert_eq!(a.bands.len() as u128, a.period);
            for (x, y) in a.bands.intervals().iter().zip(b.bands.intervals()) {
                assert!((x.0 - y.0).abs() < 1e-11 && (x.1 - y.1).abs() < 1e-11);
            }
        }
    }
}
