//! Integrated density of states on finite Dirichlet sections, Hölder scans
//! of the IDS, and gap labels of periodic approximants.

use alloc::vec::Vec;

use crate::approximant::{band_spectrum, fibonacci};
use crate::eigen::tridiagonal_eigenvalues;
use crate::error::{Error, Result};
use crate::real::{PrecisionContext, Real};
use crate::word::fibonacci_word;

/// The golden frequency `(sqrt 5 - 1)/2`.
pub const ALPHA: f64 = 0.618_033_988_749_894_9;

/// The operator restricted to sites `1..=n` with Dirichlet ends.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletSection {
    pub coupling: f64,
    pub diagonal: Vec<f64>,
}

impl DirichletSection {
    /// Diagonal `lambda * s_m` from the Fibonacci substitution word.
    pub fn new(n: usize, coupling: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("section needs n >= 1"));
        }
        let diagonal = fibonacci_word(n).into_iter().map(|c| if c { coupling } else { 0.0 }).collect();
        Ok(DirichletSection { coupling, diagonal })
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }
}

/// Result of a pivot-sign count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SturmCount {
    pub below: usize,
    /// Pivots that were exactly zero and nudged by one ulp.
    pub perturbed: usize,
}

/// Eigenvalues strictly below `energy`, by counting negative pivots of the
/// `LDL^T` factorisation of `H - E`.
pub fn eig_count_below(section: &DirichletSection, energy: f64) -> SturmCount {
    let mut out = SturmCount { below: 0, perturbed: 0 };
    let mut d = 1.0f64;
    for (i, &v) in section.diagonal.iter().enumerate() {
        d = if i == 0 { v - energy } else { v - energy - 1.0 / d };
        if d == 0.0 {
            d = f64::EPSILON * (1.0 + libm::fabs(v - energy));
            out.perturbed += 1;
        }
        if d < 0.0 {
            out.below += 1;
        }
    }
    out
}

/// `#{eigenvalues < E} / n` on the section `[1, n]`.
pub fn ids_value(n: usize, coupling: f64, energy: f64) -> Result<f64> {
    let s = DirichletSection::new(n, coupling)?;
    Ok(eig_count_below(&s, energy).below as f64 / n as f64)
}

/// Outcome of a Hölder scan, with the pair achieving the minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderScan {
    pub exponent: f64,
    /// Indices `i < j` into the sorted eigenvalues.
    pub pair: (usize, usize),
    /// Eigenvalue separations at or below this were skipped.
    pub exclusion: f64,
}

/// `min log((j - i)/n) / log(E_j - E_i)` over sorted eigenvalue pairs with
/// `E_j - E_i < delta`, skipping near-degenerate pairs.
pub fn holder_scan(n: usize, coupling: f64, delta: f64) -> Result<HolderScan> {
    if n < 2 || !(delta > 0.0) {
        return Err(Error::Precondition("holder_scan needs n >= 2 and delta > 0"));
    }
    let s = DirichletSection::new(n, coupling)?;
    let ev = tridiagonal_eigenvalues(&s.diagonal, &alloc::vec![1.0; n - 1], &PrecisionContext::double())?;
    let exclusion = 10.0 * libm::ldexp(libm::fabs(coupling) + 2.0, 12 - 53);
    let mut best = HolderScan { exponent: f64::INFINITY, pair: (0, 0), exclusion };
    let nf = n as f64;
    for i in 0..n {
        for j in i + 1..n {
            let gap = ev[j] - ev[i];
            if gap >= delta {
                break;
            }
            if gap <= exclusion {
                continue;
            }
            let r = libm::log((j - i) as f64 / nf) / libm::log(gap);
            if r < best.exponent {
                best.exponent = r;
                best.pair = (i, j);
            }
        }
    }
    if best.exponent.is_infinite() {
        return Err(Error::NotFound("no eigenvalue pair inside the window"));
    }
    Ok(best)
}

/// Where a labelled region sits relative to the spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapKind {
    Interior,
    /// The unbounded region above the spectrum, `N = 1`.
    Above,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapLabel<R> {
    /// `(lower edge, upper edge)`; the upper edge of the region above the
    /// spectrum repeats the lower one.
    pub gap: (R, R),
    pub ids_value: f64,
    pub m: i64,
    pub residual: f64,
    pub kind: GapKind,
}

/// `{m alpha}` in `[0, 1)`.
pub fn frac_m_alpha(m: i64) -> f64 {
    let x = m as f64 * ALPHA;
    x - libm::floor(x)
}

/// Distance on the circle `R/Z`.
fn circle_dist(a: f64, b: f64) -> f64 {
    let d = libm::fabs(a - b);
    libm::fmin(d, 1.0 - d)
}

/// Labels every gap of the level-`k` bands by the `m` with `{m alpha}`
/// nearest its IDS value `j / F_k`. Ties go to the smaller `|m|`, then to
/// positive `m`.
pub fn gap_labels<R: Real>(k: usize, coupling: f64, m_cap: u64, ctx: &PrecisionContext) -> Result<Vec<GapLabel<R>>> {
    let period = fibonacci(k)?;
    if k < 2 || !(coupling > 0.0) || m_cap < period {
        return Err(Error::Precondition("gap_labels needs k >= 2, coupling > 0, m_cap >= F_k"));
    }
    let spec = band_spectrum::<R>(k, coupling, ctx)?;
    let bands = spec.bands.intervals();
    // candidates sorted by {m alpha}; the search below checks neighbours
    let cap = m_cap as i64;
    let mut table: Vec<(f64, i64)> = (-cap..=cap).map(|m| (frac_m_alpha(m), m)).collect();
    table.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let better = |cand: (f64, i64), best: (f64, i64)| {
        cand.0 < best.0 || (cand.0 == best.0 && (cand.1.abs(), -cand.1) < (best.1.abs(), -best.1))
    };
    let label = |n: f64| {
        let pos = table.partition_point(|&(f, _)| f < n);
        let mut best = (f64::INFINITY, 0i64);
        // the nearest point on the circle is adjacent in sorted order up to
        // wrap-around; a small window also settles ties deterministically
        let len = table.len();
        for off in 0..6 {
            let (f, m) = table[(pos + len - 3 + off) % len];
            let cand = (circle_dist(n, f), m);
            if better(cand, best) {
                best = cand;
            }
        }
        best
    };
    let mut out = Vec::with_capacity(bands.len());
    for j in 1..bands.len() {
        let n = j as f64 / period as f64;
        let (residual, m) = label(n);
        out.push(GapLabel {
            gap: (bands[j - 1].1.clone(), bands[j].0.clone()),
            ids_value: n,
            m,
            residual,
            kind: GapKind::Interior,
        });
    }
    let top = bands[bands.len() - 1].1.clone();
    out.push(GapLabel { gap: (top.clone(), top), ids_value: 1.0, m: 0, residual: 0.0, kind: GapKind::Above });
    Ok(out)
}

/// `(lambda, |U_m| / lambda)`, where `U_m` is the level-`k` gap labelled `m`;
/// `None` when that gap is not resolved.
pub fn gap_width_scaling<R: Real>(
    m: i64,
    k: usize,
    lambda_grid: &[f64],
    ctx: &PrecisionContext,
) -> Result<Vec<(f64, Option<f64>)>> {
    if m == 0 || lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Precondition("gap_width_scaling needs m != 0 and positive couplings"));
    }
    let cap = fibonacci(k)?;
    let floor = libm::ldexp(8.0, -(R::effective_bits(ctx.bits).min(ctx.bits) as i32) + 10);
    let mut out = Vec::with_capacity(lambda_grid.len());
    for &lam in lambda_grid {
        let labels = gap_labels::<R>(k, lam, cap.max(m.unsigned_abs()), ctx)?;
        let width = labels
            .iter()
            .filter(|g| g.kind == GapKind::Interior && g.m == m)
            .min_by(|a, b| a.residual.partial_cmp(&b.residual).unwrap())
            .map(|g| (g.gap.1.clone() - &g.gap.0).to_f64())
            .filter(|&w| w > floor);
        out.push((lam, width.map(|w| w / lam)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{all_eigenvalues, SymMatrix};
    use rand::{Rng, SeedableRng};

    #[test]
    fn two_site_counts() {
        let s = DirichletSection::new(2, 2.0).unwrap();
        assert_eq!(s.diagonal, [2.0, 0.0]);
        assert_eq!(eig_count_below(&s, 0.0).below, 1);
        assert_eq!(eig_count_below(&s, 3.0).below, 2);
        assert_eq!(ids_value(2, 2.0, 0.0).unwrap(), 0.5);
        assert_eq!(ids_value(100, 2.0, -2.5).unwrap(), 0.0);
        assert_eq!(ids_value(100, 2.0, 4.5).unwrap(), 1.0);
    }

    #[test]
    fn free_ids_is_half_at_zero() {
        assert!((ids_value(10_000, 0.0, 0.0).unwrap() - 0.5).abs() < 1e-3);
    }

    #[test]
    fn pivot_count_matches_dense_solve() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let ctx = PrecisionContext::double();
        for n in [1usize, 2, 5, 17, 64, 200] {
            let lam = rng.gen_range(0.1..6.0);
            let s = DirichletSection::new(n, lam).unwrap();
            let mut m = SymMatrix::zeros(n, &0.0);
            for i in 0..n {
                m.set(i, i, s.diagonal[i]);
                if i + 1 < n {
                    m.set(i + 1, i, 1.0);
                }
            }
            let ev = all_eigenvalues(&m, &ctx).unwrap();
            for _ in 0..200 {
                let e = rng.gen_range(-3.0..lam + 3.0);
                let dense = ev.iter().filter(|&&v| v < e).count();
                assert_eq!(eig_count_below(&s, e).below, dense);
            }
        }
    }

    #[test]
    fn holder_window_monotone() {
        let a = holder_scan(800, 8.0, 0.025).unwrap();
        let b = holder_scan(800, 8.0, 0.05).unwrap();
        assert!(b.exponent <= a.exponent);
    }

    #[test]
    fn gap_labels_at_level_ten() {
        let ctx = PrecisionContext::double();
        let f10 = fibonacci(10).unwrap();
        let labels = gap_labels::<f64>(10, 2.0, f10, &ctx).unwrap();
        assert_eq!(labels.len() as u64, f10);
        for g in &labels {
            // brute force over all admissible m
            let brute = (-(f10 as i64)..=f10 as i64)
                .map(|m| circle_dist(g.ids_value, frac_m_alpha(m)))
                .fold(f64::INFINITY, f64::min);
            assert!((g.residual - brute).abs() < 1e-15);
            assert!(g.residual < 1.0 / f10 as f64);
        }
        assert!(labels.iter().any(|g| g.m == 1 && (g.ids_value - ALPHA).abs() < 1.0 / f10 as f64));
        assert_eq!(labels.last().unwrap().kind, GapKind::Above);
    }
}
