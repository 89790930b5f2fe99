//! Finite unions of closed intervals and the fractal statistics computed on
//! them: Minkowski sums, box counts, thickness and denseness.

use alloc::collections::{BTreeSet, BinaryHeap};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::real::Real;

/// Disjoint closed intervals sorted by left endpoint, separated by gaps
/// wider than the merge tolerance they were built with.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet<R> {
    intervals: Vec<(R, R)>,
}

/// The complement of an [`IntervalSet`] inside its convex hull.
#[derive(Clone, Debug, PartialEq)]
pub struct GapList<R> {
    pub hull: (R, R),
    /// Open gaps `(hi_i, lo_{i+1})`, in order.
    pub gaps: Vec<(R, R)>,
}

fn cmp<R: Real>(a: &R, b: &R) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl<R: Real> IntervalSet<R> {
    pub fn empty() -> Self {
        IntervalSet { intervals: Vec::new() }
    }

    /// Sorts and merges `raw`, joining intervals whose distance is at most
    /// `merge_tol` (touching intervals always join).
    pub fn normalize(raw: Vec<(R, R)>, merge_tol: &R) -> Result<Self> {
        for (i, (lo, hi)) in raw.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidInterval(i));
            }
        }
        let mut raw = raw;
        raw.sort_by(|a, b| cmp(&a.0, &b.0));
        let mut out: Vec<(R, R)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            push_merged(&mut out, lo, hi, merge_tol);
        }
        Ok(IntervalSet { intervals: out })
    }

    /// Wraps intervals already sorted and disjoint; checked.
    pub fn from_sorted(intervals: Vec<(R, R)>) -> Result<Self> {
        for (i, (lo, hi)) in intervals.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidInterval(i));
            }
            if i > 0 && *lo <= intervals[i - 1].1 {
                return Err(Error::InvalidInterval(i));
            }
        }
        Ok(IntervalSet { intervals })
    }

    pub fn intervals(&self) -> &[(R, R)] {
        &self.intervals
    }

    pub fn into_intervals(self) -> Vec<(R, R)> {
        self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn hull(&self) -> Option<(R, R)> {
        Some((self.intervals.first()?.0.clone(), self.intervals.last()?.1.clone()))
    }

    /// Total length.
    pub fn measure(&self) -> Option<R> {
        let first = self.intervals.first()?;
        let mut s = first.0.zero_like();
        for (lo, hi) in &self.intervals {
            s = s + &(hi.clone() - lo);
        }
        Some(s)
    }

    pub fn contains(&self, x: &R) -> bool {
        // first interval with lo > x, then check its predecessor
        let i = self.intervals.partition_point(|(lo, _)| lo <= x);
        i > 0 && *x <= self.intervals[i - 1].1
    }

    /// Whether `x` lies within `tol` of the set.
    pub fn contains_within(&self, x: &R, tol: &R) -> bool {
        let i = self.intervals.partition_point(|(lo, _)| *lo <= x.clone() + tol);
        i > 0 && x.clone() - tol <= self.intervals[i - 1].1
    }

    /// Whether every point of `self` lies within `tol` of `other`.
    pub fn is_subset_within(&self, other: &IntervalSet<R>, tol: &R) -> bool {
        let grown: Vec<(R, R)> =
            other.intervals.iter().map(|(lo, hi)| (lo.clone() - tol, hi.clone() + tol)).collect();
        let mut j = 0;
        for (lo, hi) in &self.intervals {
            while j < grown.len() && grown[j].1 < *lo {
                j += 1;
            }
            if j == grown.len() || grown[j].0 > *lo || grown[j].1 < *hi {
                return false;
            }
        }
        true
    }

    pub fn gaps(&self) -> Option<GapList<R>> {
        let hull = self.hull()?;
        let gaps = self.intervals.windows(2).map(|w| (w[0].1.clone(), w[1].0.clone())).collect();
        Some(GapList { hull, gaps })
    }
}

impl<R: Real> GapList<R> {
    /// Inverse of [`IntervalSet::gaps`].
    pub fn to_set(&self) -> Result<IntervalSet<R>> {
        let mut out = Vec::with_capacity(self.gaps.len() + 1);
        let mut lo = self.hull.0.clone();
        for (a, b) in &self.gaps {
            out.push((lo, a.clone()));
            lo = b.clone();
        }
        out.push((lo, self.hull.1.clone()));
        IntervalSet::from_sorted(out)
    }
}

fn push_merged<R: Real>(out: &mut Vec<(R, R)>, lo: R, hi: R, tol: &R) {
    if let Some(last) = out.last_mut() {
        if lo <= last.1.clone() + tol {
            if hi > last.1 {
                last.1 = hi;
            }
            return;
        }
    }
    out.push((lo, hi));
}

pub fn union<R: Real>(a: &IntervalSet<R>, b: &IntervalSet<R>, merge_tol: &R) -> IntervalSet<R> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j == b.len() || (i < a.len() && a.intervals[i].0 <= b.intervals[j].0);
        let (lo, hi) = if take_a {
            i += 1;
            a.intervals[i - 1].clone()
        } else {
            j += 1;
            b.intervals[j - 1].clone()
        };
        push_merged(&mut out, lo, hi, merge_tol);
    }
    IntervalSet { intervals: out }
}

pub fn intersect<R: Real>(a: &IntervalSet<R>, b: &IntervalSet<R>) -> IntervalSet<R> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let (alo, ahi) = &a.intervals[i];
        let (blo, bhi) = &b.intervals[j];
        let lo = alo.clone().max_of(blo.clone());
        let hi = ahi.clone().min_of(bhi.clone());
        if lo <= hi {
            out.push((lo, hi));
        }
        if ahi < bhi {
            i += 1;
        } else {
            j += 1;
        }
    }
    // shared endpoints can leave degenerate neighbours touching
    let mut merged: Vec<(R, R)> = Vec::with_capacity(out.len());
    let zero = out.first().map(|p: &(R, R)| p.0.zero_like());
    for (lo, hi) in out {
        push_merged(&mut merged, lo, hi, zero.as_ref().unwrap());
    }
    IntervalSet { intervals: merged }
}

struct HeapItem<R> {
    lo: R,
    i: usize,
    j: usize,
}

impl<R: Real> PartialEq for HeapItem<R> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<R: Real> Eq for HeapItem<R> {}
impl<R: Real> PartialOrd for HeapItem<R> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<R: Real> Ord for HeapItem<R> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        cmp(&other.lo, &self.lo).then(other.i.cmp(&self.i)).then(other.j.cmp(&self.j))
    }
}

/// `{x + y : x in a, y in b}`, merging sums closer than `merge_tol`.
///
/// A heap merges the `|a|` sorted rows `a_i + b_*`, so the pairwise sums
/// stream out in order of left endpoint and are merged on the fly.
pub fn minkowski_sum<R: Real>(a: &IntervalSet<R>, b: &IntervalSet<R>, merge_tol: &R) -> IntervalSet<R> {
    if a.is_empty() || b.is_empty() {
        return IntervalSet::empty();
    }
    let mut heap = BinaryHeap::with_capacity(a.len());
    for (i, (lo, _)) in a.intervals.iter().enumerate() {
        heap.push(HeapItem { lo: lo.clone() + &b.intervals[0].0, i, j: 0 });
    }
    let mut out = Vec::new();
    while let Some(HeapItem { lo, i, j }) = heap.pop() {
        let hi = a.intervals[i].1.clone() + &b.intervals[j].1;
        push_merged(&mut out, lo, hi, merge_tol);
        if j + 1 < b.len() {
            heap.push(HeapItem { lo: a.intervals[i].0.clone() + &b.intervals[j + 1].0, i, j: j + 1 });
        }
    }
    IntervalSet { intervals: out }
}

/// Number of grid boxes `[j eps, (j+1) eps)` meeting the set, grid anchored
/// at 0. Returns `None` when a box index overflows `i128`.
pub fn box_count<R: Real>(s: &IntervalSet<R>, eps: &R) -> Result<Option<u128>> {
    if !(*eps > eps.zero_like()) || !eps.is_finite() {
        return Err(Error::Precondition("box size must be positive"));
    }
    let mut total: u128 = 0;
    let mut last: Option<i128> = None;
    for (lo, hi) in &s.intervals {
        let (Some(a), Some(b)) = ((lo.clone() / eps).floor_i128(), (hi.clone() / eps).floor_i128()) else {
            return Ok(None);
        };
        let start = match last {
            Some(l) if a <= l => l + 1,
            _ => a,
        };
        if b >= start {
            total += (b - start + 1) as u128;
        }
        last = Some(last.map_or(b, |l| l.max(b)));
    }
    Ok(Some(total))
}

/// Per-scale estimates `log C(eps) / log(1/eps)` and their minimum.
#[derive(Clone, Debug, PartialEq)]
pub struct DimEstimate {
    pub eps: Vec<f64>,
    pub counts: Vec<u128>,
    pub estimates: Vec<f64>,
    pub infimum: f64,
}

pub fn dim_estimate<R: Real>(s: &IntervalSet<R>, eps_grid: &[f64]) -> Result<DimEstimate> {
    if s.is_empty() {
        return Err(Error::Precondition("box-counting an empty set"));
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(Error::Precondition("box sizes must lie in (0, 1)"));
    }
    let like = &s.intervals[0].0;
    let mut out = DimEstimate { eps: Vec::new(), counts: Vec::new(), estimates: Vec::new(), infimum: f64::INFINITY };
    for &e in eps_grid {
        let Some(c) = box_count(s, &like.from_f64_like(e))? else {
            return Err(Error::IntegerOverflow("box index"));
        };
        let est = libm::log(c as f64) / -libm::log(e);
        out.eps.push(e);
        out.counts.push(c);
        out.estimates.push(est);
        out.infimum = out.infimum.min(est);
    }
    Ok(out)
}

/// Thickness or denseness of a Cantor-type set given by finitely many
/// intervals; a set without gaps has infinite thickness.
#[derive(Clone, Debug, PartialEq)]
pub enum GapRatio<R> {
    Infinite,
    Finite(R),
}

impl<R: Real> GapRatio<R> {
    pub fn to_f64(&self) -> f64 {
        match self {
            GapRatio::Infinite => f64::INFINITY,
            GapRatio::Finite(v) => v.to_f64(),
        }
    }
}

/// For each gap in the order longest first (ties: leftmost first), the
/// bridges to the nearest previously processed gap, or the hull end, on
/// each side, as `(gap length, left bridge, right bridge)`.
fn bridges<R: Real>(s: &IntervalSet<R>) -> Vec<(R, R, R)> {
    let iv = &s.intervals;
    let g = iv.len().saturating_sub(1);
    let mut order: Vec<usize> = (0..g).collect();
    let len = |i: usize| iv[i + 1].0.clone() - &iv[i].1;
    order.sort_by(|&x, &y| cmp(&len(y), &len(x)).then(x.cmp(&y)));
    let mut done: BTreeSet<usize> = BTreeSet::new();
    let mut out = Vec::with_capacity(g);
    for &i in &order {
        // gap i sits between intervals i and i+1
        let left_start = match done.range(..i).next_back() {
            Some(&p) => iv[p + 1].0.clone(),
            None => iv[0].0.clone(),
        };
        let right_end = match done.range(i + 1..).next() {
            Some(&q) => iv[q].1.clone(),
            None => iv[g].1.clone(),
        };
        out.push((len(i), iv[i].1.clone() - &left_start, right_end - &iv[i + 1].0));
        done.insert(i);
    }
    out
}

/// `inf over gaps of min(bridge) / |gap|`.
pub fn thickness<R: Real>(s: &IntervalSet<R>) -> GapRatio<R> {
    let mut best: Option<R> = None;
    for (gap, l, r) in bridges(s) {
        let v = l.min_of(r) / &gap;
        best = Some(match best {
            Some(b) => b.min_of(v),
            None => v,
        });
    }
    best.map_or(GapRatio::Infinite, GapRatio::Finite)
}

/// `sup over gaps of max(bridge) / |gap|`.
pub fn denseness<R: Real>(s: &IntervalSet<R>) -> GapRatio<R> {
    let mut best: Option<R> = None;
    for (gap, l, r) in bridges(s) {
        let v = l.max_of(r) / &gap;
        best = Some(match best {
            Some(b) => b.max_of(v),
            None => v,
        });
    }
    best.map_or(GapRatio::Infinite, GapRatio::Finite)
}

/// The sufficient condition `tau(a) tau(b) >= 1` under which the sum of two
/// interleaved Cantor sets is an interval.
pub fn newhouse_predicts_interval<R: Real>(a: &IntervalSet<R>, b: &IntervalSet<R>) -> bool {
    match (thickness(a), thickness(b)) {
        (GapRatio::Finite(x), GapRatio::Finite(y)) => x.clone() * &y >= x.one_like(),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[(f64, f64)]) -> IntervalSet<f64> {
        IntervalSet::normalize(v.to_vec(), &0.0).unwrap()
    }

    #[test]
    fn normalize_merges_and_sorts() {
        let s = IntervalSet::normalize(alloc::vec![(2.0, 3.0), (0.0, 1.0), (1.0, 1.5), (2.95, 4.0)], &0.0).unwrap();
        assert_eq!(s.intervals(), &[(0.0, 1.5), (2.0, 4.0)]);
        let s = IntervalSet::normalize(alloc::vec![(0.0, 1.0), (1.1, 2.0)], &0.2).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(IntervalSet::normalize(alloc::vec![(1.0, 0.0)], &0.0), Err(Error::InvalidInterval(0)));
        assert!(IntervalSet::normalize(alloc::vec![(f64::NAN, 0.0)], &0.0).is_err());
    }

    #[test]
    fn minkowski_examples() {
        let s = set(&[(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(minkowski_sum(&s, &s, &0.0).intervals(), &[(0.0, 6.0)]);
        let t = set(&[(0.0, 0.125), (1.0, 1.125)]);
        assert_eq!(minkowski_sum(&t, &t, &0.0).intervals(), &[(0.0, 0.25), (1.0, 1.25), (2.0, 2.25)]);
    }

    #[test]
    fn middle_thirds_statistics() {
        // level-n construction of the middle-thirds set
        let mut iv = alloc::vec![(0.0f64, 1.0f64)];
        for _ in 0..6 {
            iv = iv.iter().flat_map(|&(a, b)| {
                let t = (b - a) / 3.0;
                [(a, a + t), (b - t, b)]
            }).collect();
        }
        let s = set(&iv);
        assert!((thickness(&s).to_f64() - 1.0).abs() < 1e-9);
        assert!((denseness(&s).to_f64() - 1.0).abs() < 1e-9);
        let thin = set(&[(0.0, 0.3), (0.7, 1.0)]);
        let thick = set(&[(0.0, 0.45), (0.55, 1.0)]);
        assert!(!newhouse_predicts_interval(&thin, &thin));
        assert!(newhouse_predicts_interval(&thick, &thin));
        assert_eq!(minkowski_sum(&thick, &thin, &0.0).len(), 1);
        assert_eq!(thickness(&set(&[(0.0, 1.0)])), GapRatio::Infinite);
    }

    #[test]
    fn box_count_example() {
        let s = set(&[(0.0, 0.25), (0.5, 1.0)]);
        assert_eq!(box_count(&s, &0.25).unwrap(), Some(5));
        assert_eq!(box_count(&set(&[(-0.3, -0.1)]), &0.25).unwrap(), Some(2));
    }

    #[test]
    fn gap_list_round_trip() {
        let s = set(&[(0.0, 1.0), (2.0, 3.0), (5.0, 8.0)]);
        let g = s.gaps().unwrap();
        assert_eq!(g.gaps, [(1.0, 2.0), (3.0, 5.0)]);
        assert_eq!(g.to_set().unwrap(), s);
    }

    fn arb_set() -> impl Strategy<Value = IntervalSet<f64>> {
        proptest::collection::vec((-50.0f64..50.0, 0.0f64..5.0), 1..30)
            .prop_map(|v| set(&v.into_iter().map(|(a, w)| (a, a + w)).collect::<Vec<_>>()))
    }

    fn brute_sum(a: &IntervalSet<f64>, b: &IntervalSet<f64>) -> IntervalSet<f64> {
        let mut raw = Vec::new();
        for x in a.intervals() {
            for y in b.intervals() {
                raw.push((x.0 + y.0, x.1 + y.1));
            }
        }
        IntervalSet::normalize(raw, &0.0).unwrap()
    }

    fn brute_boxes(s: &IntervalSet<f64>, eps: f64) -> u128 {
        let mut boxes = BTreeSet::new();
        for &(lo, hi) in s.intervals() {
            let (a, b) = (libm::floor(lo / eps) as i64, libm::floor(hi / eps) as i64);
            boxes.extend(a..=b);
        }
        boxes.len() as u128
    }

    proptest! {
        #[test]
        fn normalized_is_sorted_and_separated(s in arb_set()) {
            for w in s.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
        }

        #[test]
        fn sum_commutes_and_matches_brute_force(a in arb_set(), b in arb_set()) {
            let ab = minkowski_sum(&a, &b, &0.0);
            prop_assert_eq!(&ab, &minkowski_sum(&b, &a, &0.0));
            prop_assert_eq!(&ab, &brute_sum(&a, &b));
            let (ma, mb, ms) = (a.measure().unwrap(), b.measure().unwrap(), ab.measure().unwrap());
            prop_assert!(ms <= ma * b.len() as f64 + mb * a.len() as f64 + 1e-9);
            prop_assert!(ms + 1e-9 >= ma + mb);
        }

        #[test]
        fn box_count_matches_enumeration(s in arb_set(), k in 0i32..6) {
            let eps = libm::ldexp(1.0, -k);
            prop_assert_eq!(box_count(&s, &eps).unwrap().unwrap(), brute_boxes(&s, eps));
        }

        #[test]
        fn union_and_intersection_bounds(a in arb_set(), b in arb_set()) {
            let u = union(&a, &b, &0.0);
            let i = intersect(&a, &b);
            let (ma, mb, mu) = (a.measure().unwrap(), b.measure().unwrap(), u.measure().unwrap());
            let mi = i.measure().unwrap_or(0.0);
            prop_assert!((ma + mb - mu - mi).abs() < 1e-9);
            for &(lo, hi) in i.intervals() {
                prop_assert!(a.contains(&lo) && b.contains(&hi));
            }
        }

        #[test]
        fn thickness_at_most_denseness(s in arb_set()) {
            if s.len() > 1 {
                prop_assert!(thickness(&s).to_f64() <= denseness(&s).to_f64());
            }
        }
    }
}
