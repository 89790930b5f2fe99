//! Exact band-edge counting for periodic approximants in `O(levels)` work.
//!
//! The transfer matrices `T(c) = [[c, -1], [1, 0]]` act on the circle of
//! directions. A product is tracked together with an integer lift of its
//! angle function, so the number of eigenvalues of the Dirichlet block
//! below `E` (a winding number) falls out of the renormalised matrices
//! without touching the `q_k` individual sites. Combined with the trace
//! this gives the number of periodic band edges below `E`.
//!
//! A lift `(M, n)` means: `e1` turns continuously to `M e1` through the
//! angle `n*pi + theta(M e1)`, with `theta` the projective angle in `[0, pi)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::real::{PrecisionContext, Real};
use crate::trace::{sturmian_step, TraceTriple, TransferParams};

#[derive(Clone, Debug)]
struct Lift<R> {
    /// row-major `[m11, m12, m21, m22]`
    m: [R; 4],
    winds: i64,
}

/// `+1` when the direction of `(x, y)` normalised into `[0, pi)` equals the
/// vector itself, `-1` when it needs negating.
fn orient<R: Real>(x: &R, y: &R) -> i32 {
    let zero = x.zero_like();
    if *y > zero || (*y == zero && *x > zero) {
        1
    } else {
        -1
    }
}

fn sign<R: Real>(v: &R) -> i32 {
    let zero = v.zero_like();
    if *v > zero {
        1
    } else if *v < zero {
        -1
    } else {
        0
    }
}

impl<R: Real> Lift<R> {
    fn transfer(c: R) -> Self {
        let one = c.one_like();
        Lift { m: [c.clone(), -one.clone(), one, c.zero_like()], winds: 0 }
    }

    /// Lift of `T(c)^{-1} = [[0, 1], [-1, c]]`, which turns backwards.
    fn transfer_inverse(c: R) -> Self {
        let one = c.one_like();
        Lift { m: [c.zero_like(), one.clone(), -one, c], winds: -1 }
    }

    fn identity(like: &R) -> Self {
        Lift { m: [like.one_like(), like.zero_like(), like.zero_like(), like.one_like()], winds: 0 }
    }

    /// `self o first`: apply `first`, then `self`.
    fn after(&self, first: &Lift<R>) -> Lift<R> {
        let [a, b, c, d] = &self.m;
        let [e, f, g, h] = &first.m;
        let mut m = [
            a.clone() * e + &(b.clone() * g),
            a.clone() * f + &(b.clone() * h),
            c.clone() * e + &(d.clone() * g),
            c.clone() * f + &(d.clone() * h),
        ];
        // det = 1 gives cross(M2 M1 e1, M2 e1) = cross(M1 e1, e1) = -g, so the
        // angle comparison needs only signs and never cancels
        let turn = orient(&m[0], &m[2]) * orient(a, c) * -sign(g);
        let winds = self.winds + first.winds + i64::from(turn > 0);
        rescale(&mut m);
        Lift { m, winds }
    }

    fn pow(&self, mut e: u64) -> Lift<R> {
        let mut acc = Lift::identity(&self.m[0]);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = base.after(&acc);
            }
            e >>= 1;
            if e > 0 {
                base = base.after(&base);
            }
        }
        acc
    }
}

/// Positive rescaling leaves every angle and sign unchanged.
fn rescale<R: Real>(m: &mut [R; 4]) {
    let big = m.iter().map(|v| v.to_f64().abs()).fold(0.0f64, f64::max);
    if big > 1e100 && big.is_finite() {
        let e = -(libm::ilogb(big));
        for v in m.iter_mut() {
            *v = v.mul_pow2(e);
        }
    }
}

/// A periodic approximant described by the partial quotients `a_1..a_K` of
/// its rotation number; `M_1 = T(E - lambda) T(E)^{a_1 - 1}` and
/// `M_{k+1} = M_{k-1} M_k^{a_{k+1}}`.
#[derive(Clone, Debug)]
pub(crate) struct EdgeCounter<'a> {
    pub quotients: &'a [u64],
    pub coupling: f64,
    pub period: u128,
}

impl<'a> EdgeCounter<'a> {
    fn level_lift<R: Real>(&self, e: &R, lam: &R) -> Lift<R> {
        let l0 = Lift::transfer(e.clone());
        let mut prev = l0.clone();
        let mut cur = Lift::transfer(e.clone() - lam).after(&l0.pow(self.quotients[0] - 1));
        for &a in &self.quotients[1..] {
            let next = prev.after(&cur.pow(a));
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Half-trace of the level-`K` monodromy.
    pub fn trace<R: Real>(&self, e: &R, lam: &R) -> R {
        let p = TransferParams::new(e.clone(), lam.clone());
        let (a, b, c) = p.initial_traces();
        let mut t = TraceTriple { x_prev: a, x_cur: b, x_mixed: c };
        for &a in self.quotients {
            t = sturmian_step(&t, a);
        }
        t.x_cur
    }

    /// Number of band edges strictly below `e`, and the half-trace at `e`.
    ///
    /// Energies exactly at an edge count as interior to the band.
    pub fn edges_below<R: Real>(&self, e: &R, lam: &R) -> (u128, R) {
        let x = self.trace(e, lam);
        let p = self.period;
        let lk = self.level_lift(e, lam);
        // leftmost factor of M_K is T(E - lambda) for odd K, T(E) for even K
        let last = if self.quotients.len() % 2 == 1 { e.clone() - lam } else { e.clone() };
        let pm = Lift::transfer_inverse(last).after(&lk);
        let past_half = orient(&pm.m[0], &pm.m[2]) * sign(&pm.m[0]) <= 0 && sign(&pm.m[2]) != 0;
        // Dirichlet eigenvalues of the first p-1 sites below e
        let d = (p as i128 - 1 - pm.winds as i128 - i128::from(past_half)).clamp(0, p as i128 - 1) as u128;
        let one = x.one_like();
        if x.abs() <= one {
            return (2 * (d + 1) - 1, x);
        }
        // closed gap j has sign(x) = (-1)^(p - j)
        let positive = !x.is_sign_negative();
        let j = if positive == ((p - d) % 2 == 0) { d } else { d + 1 };
        (2 * j, x)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Cell<R> {
    a: R,
    b: R,
    ca: u128,
    cb: u128,
}

/// A cell known to contain exactly edge number `index + 1`.
pub(crate) fn single_cell<R>(a: R, b: R, index: u128) -> Cell<R> {
    Cell { a, b, ca: index, cb: index + 1 }
}

/// Splits `[a, b]` until each cell holds at most one edge. Cells that reach
/// the width floor with several edges are returned separately.
fn isolate<R: Real>(
    counter: &EdgeCounter<'_>,
    lam: &R,
    root: Cell<R>,
    floor: &R,
    single: &mut Vec<Cell<R>>,
    stuck: &mut Vec<Cell<R>>,
) {
    let mut stack = alloc::vec![root];
    while let Some(c) = stack.pop() {
        if c.cb <= c.ca {
            continue;
        }
        if c.cb - c.ca == 1 {
            single.push(c);
            continue;
        }
        if c.b.clone() - &c.a <= *floor {
            stuck.push(c);
            continue;
        }
        let mid = (c.a.clone() + &c.b).mul_pow2(-1);
        let (cm, _) = counter.edges_below(&mid, lam);
        let cm = cm.clamp(c.ca, c.cb);
        stack.push(Cell { a: mid.clone(), b: c.b, ca: cm, cb: c.cb });
        stack.push(Cell { a: c.a, b: mid, ca: c.ca, cb: cm });
    }
}

/// Root of `x_K(E) - s` in a cell holding exactly edge number `ca + 1`,
/// by the Illinois variant of regula falsi with periodic bisection.
pub(crate) fn refine_cell<R: Real>(counter: &EdgeCounter<'_>, lam: &R, cell: &Cell<R>, tol: &R) -> (R, f64) {
    let edge = cell.ca + 1;
    let band = edge.div_ceil(2);
    let gap = if edge % 2 == 1 { band - 1 } else { band };
    let s = if (counter.period - gap) % 2 == 0 { cell.a.one_like() } else { -cell.a.one_like() };
    let g = |e: &R| counter.trace(e, lam) - &s;
    let (mut a, mut b) = (cell.a.clone(), cell.b.clone());
    let (mut fa, mut fb) = (g(&a), g(&b));
    let mut side = 0i32;
    let mut last_width = b.clone() - &a;
    for it in 0..400 {
        let width = b.clone() - &a;
        if width <= *tol {
            break;
        }
        let same = fa.is_sign_negative() == fb.is_sign_negative();
        let bisect = same || it % 6 == 5 && width.clone().mul_pow2(1) > last_width;
        if it % 6 == 5 {
            last_width = width.clone();
        }
        let mut c = if bisect {
            (a.clone() + &b).mul_pow2(-1)
        } else {
            (a.clone() * &fb - &(b.clone() * &fa)) / (fb.clone() - &fa)
        };
        if !(c > a && c < b) {
            c = (a.clone() + &b).mul_pow2(-1);
            if !(c > a && c < b) {
                break;
            }
        }
        let fc = g(&c);
        if fc == fc.zero_like() {
            a = c.clone();
            b = c;
            break;
        }
        if same {
            // numerically flat cell: stay on the band side of the edge
            let inside = counter.trace(&c, lam).abs() <= c.one_like();
            if inside == (edge % 2 == 1) {
                b = c;
                fb = fc;
            } else {
                a = c;
                fa = fc;
            }
            continue;
        }
        if fc.is_sign_negative() == fb.is_sign_negative() {
            b = c;
            fb = fc;
            if side == -1 {
                fa = fa.mul_pow2(-1);
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb = fb.mul_pow2(-1);
            }
            side = 1;
        }
    }
    let (ra, rb) = (g(&a).abs(), g(&b).abs());
    if ra <= rb {
        (a, ra.to_f64())
    } else {
        (b, rb.to_f64())
    }
}

/// Band edges found by counting.
#[derive(Clone, Debug)]
pub(crate) struct CountedEdges<R> {
    /// `2 * period` edges in increasing order.
    pub edges: Vec<R>,
    /// Largest `| |x_K(edge)| - 1 |`.
    pub max_residual: f64,
    /// Edges that collapsed onto a neighbour at the precision floor.
    pub unresolved: usize,
}

/// All `2 q_K` band edges of the level-`K` approximant.
pub(crate) fn band_edges<R: Real>(
    counter: &EdgeCounter<'_>,
    ctx: &PrecisionContext,
) -> Result<CountedEdges<R>> {
    let lam64 = counter.coupling;
    let lo64 = libm::fmin(0.0, lam64) - 2.5;
    let hi64 = libm::fmax(0.0, lam64) + 2.5;
    let lam = R::from_f64(lam64, ctx);
    let lo = R::from_f64(lo64, ctx);
    let hi = R::from_f64(hi64, ctx);
    let total = 2 * counter.period;
    let bits = R::effective_bits(ctx.bits).min(ctx.bits) as i32;
    let floor = R::from_f64(libm::ldexp(hi64 - lo64, 6 - bits), ctx);

    let mut single = Vec::new();
    let mut stuck = Vec::new();
    if bits > 53 {
        // cheap double-precision isolation, then recheck every cell boundary
        let mut s64 = Vec::new();
        let mut k64 = Vec::new();
        let floor64 = libm::ldexp(hi64 - lo64, 6 - 53);
        let root = Cell { a: lo64, b: hi64, ca: 0, cb: total };
        isolate(counter, &lam64, root, &floor64, &mut s64, &mut k64);
        let mut bounds: Vec<f64> = s64.iter().chain(k64.iter()).flat_map(|c| [c.a, c.b]).collect();
        bounds.extend([lo64, hi64]);
        bounds.sort_by(|x, y| x.partial_cmp(y).unwrap());
        bounds.dedup();
        let mut prev: Option<(R, u128)> = None;
        for &b in &bounds {
            let br = R::from_f64(b, ctx);
            let cb = if b == lo64 {
                0
            } else if b == hi64 {
                total
            } else {
                counter.edges_below(&br, &lam).0
            };
            if let Some((pa, ca)) = prev.take() {
                if cb > ca {
                    isolate(counter, &lam, Cell { a: pa, b: br.clone(), ca, cb }, &floor, &mut single, &mut stuck);
                }
                prev = Some((br, cb.max(ca)));
            } else {
                prev = Some((br, cb));
            }
        }
        let covered: u128 = single.iter().chain(stuck.iter()).map(|c| c.cb - c.ca).sum();
        if covered != total {
            single.clear();
            stuck.clear();
            isolate(counter, &lam, Cell { a: lo.clone(), b: hi.clone(), ca: 0, cb: total }, &floor, &mut single, &mut stuck);
        }
    } else {
        isolate(counter, &lam, Cell { a: lo.clone(), b: hi.clone(), ca: 0, cb: total }, &floor, &mut single, &mut stuck);
    }

    let (c_lo, _) = counter.edges_below(&lo, &lam);
    let (c_hi, _) = counter.edges_below(&hi, &lam);
    if c_lo != 0 || c_hi != total {
        return Err(Error::NotFound("edge count outside the spectral hull"));
    }

    let tol = R::from_f64(libm::ldexp(hi64 - lo64, -4 - bits), ctx);
    let mut slots: Vec<Option<R>> = alloc::vec![None; total as usize];
    let mut max_residual = 0.0f64;
    for cell in &single {
        let (e, r) = refine_cell(counter, &lam, cell, &tol);
        max_residual = max_residual.max(r);
        slots[cell.ca as usize] = Some(e);
    }
    let mut unresolved = 0;
    for cell in &stuck {
        let mid = (cell.a.clone() + &cell.b).mul_pow2(-1);
        for i in cell.ca..cell.cb {
            slots[i as usize] = Some(mid.clone());
        }
        unresolved += (cell.cb - cell.ca) as usize;
    }
    let edges = slots
        .into_iter()
        .collect::<Option<Vec<R>>>()
        .ok_or(Error::NotFound("band edge missing after isolation"))?;
    Ok(CountedEdges { edges, max_residual, unresolved })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet_count(v: &[f64], e: f64) -> i64 {
        let mut d = 0.0f64;
        let mut n = 0;
        for (i, &vi) in v.iter().enumerate() {
            d = if i == 0 { vi - e } else { vi - e - 1.0 / d };
            if d < 0.0 {
                n += 1;
            }
        }
        n
    }

    #[test]
    fn single_transfer_lift() {
        // one site: eigenvalue v, count below e is [v < e]
        for &(v, e) in &[(0.0, 1.0), (0.0, -1.0), (2.0, 1.5), (2.0, 3.0)] {
            let l = Lift::transfer(e - v);
            let past_half = orient(&l.m[0], &l.m[2]) * sign(&l.m[0]) <= 0;
            let d = 1 - l.winds - i64::from(past_half);
            assert_eq!(d, dirichlet_count(&[v], e));
        }
    }

    #[test]
    fn winding_counts_dirichlet_eigenvalues() {
        // (E - v_n) products over a random word, against the pivot count
        let v = [0.0, 3.0, 3.0, 0.0, 3.0, 0.0, 0.0, 3.0, 3.0, 0.0, 3.0];
        for i in 0..400 {
            let e = -3.0 + 9.0 * i as f64 / 400.0 + 1e-3;
            let mut l = Lift::identity(&e);
            for &vi in &v {
                l = Lift::transfer(e - vi).after(&l);
            }
            let past_half = orient(&l.m[0], &l.m[2]) * sign(&l.m[0]) <= 0 && sign(&l.m[2]) != 0;
            let d = v.len() as i64 - l.winds - i64::from(past_half);
            assert_eq!(d, dirichlet_count(&v, e), "e = {e}");
        }
    }

    #[test]
    fn powers_agree_with_repeated_composition() {
        let l = Lift::transfer(0.3f64).after(&Lift::transfer(-1.1));
        let mut r = Lift::identity(&0.0);
        for a in 0..9u64 {
            let p = l.pow(a);
            assert_eq!(p.winds, r.winds, "a = {a}");
            for i in 0..4 {
                assert!((p.m[i] - r.m[i]).abs() < 1e-9 * (1.0 + r.m[i].abs()));
            }
            r = l.after(&r);
        }
    }
}
