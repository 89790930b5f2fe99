//! Trace dynamics of the Fibonacci and Sturmian transfer matrices.
//!
//! With `x_k = Tr(M_k)/2` the Fibonacci traces obey
//! `x_{k+1} = 2 x_k x_{k-1} - x_{k-2}`, started from `x_{-1} = 1`,
//! `x_0 = E/2`, `x_1 = (E - lambda)/2`. The map `(x, y, z) -> (2xy - z, x, y)`
//! preserves the Fricke invariant, which equals `lambda^2/4` along the
//! orbit of the initial line.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::word::golden_site;

/// One application of the trace map.
pub fn trace_map_step<R: Real>(p: &(R, R, R)) -> (R, R, R) {
    let (x, y, z) = p;
    ((x.clone() * y).mul_pow2(1) - z, x.clone(), y.clone())
}

/// `x^2 + y^2 + z^2 - 2xyz - 1`.
pub fn fricke<R: Real>(x: &R, y: &R, z: &R) -> R {
    let xyz = x.clone() * y * z;
    x.clone() * x + &(y.clone() * y) + &(z.clone() * z) - xyz.mul_pow2(1) - x.one_like()
}

/// Energy and coupling of a transfer-matrix cocycle. The phase is fixed at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferParams<R = f64> {
    pub energy: R,
    pub coupling: R,
}

impl<R: Real> TransferParams<R> {
    pub fn new(energy: R, coupling: R) -> Self {
        TransferParams { energy, coupling }
    }

    /// `(x_{-1}, x_0, x_1)`.
    pub fn initial_traces(&self) -> (R, R, R) {
        let e = &self.energy;
        (e.one_like(), e.mul_pow2(-1), (e.clone() - &self.coupling).mul_pow2(-1))
    }
}

fn finite<R: Real>(v: R, index: i64) -> Result<R> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow { index })
    }
}

/// `x_{-1}, x_0, ..., x_{k_max}`; element `i` holds `x_{i-1}`.
pub fn fib_trace_seq<R: Real>(params: &TransferParams<R>, k_max: usize) -> Result<Vec<R>> {
    let (a, b, c) = params.initial_traces();
    let mut out = Vec::with_capacity(k_max + 2);
    out.push(a);
    out.push(b);
    if k_max >= 1 {
        out.push(finite(c, 1)?);
    }
    for k in 2..=k_max {
        let n = out.len();
        let next = (out[n - 1].clone() * &out[n - 2]).mul_pow2(1) - &out[n - 3];
        out.push(finite(next, k as i64)?);
    }
    Ok(out)
}

/// `x_k` alone, without storing the sequence.
pub fn fib_trace<R: Real>(params: &TransferParams<R>, k: usize) -> Result<R> {
    let (mut a, mut b, mut c) = params.initial_traces();
    if k == 0 {
        return Ok(b);
    }
    for j in 2..=k {
        let next = (c.clone() * &b).mul_pow2(1) - &a;
        a = b;
        b = c;
        c = finite(next, j as i64)?;
    }
    Ok(c)
}

/// Smallest `k <= k_cap` with `|x_k| > 1` and `|x_{k+1}| > 1`.
///
/// Past that index the orbit is unbounded, so energies with `None` are
/// exactly those in `sigma_k union sigma_{k+1}` for every `k <= k_cap`.
pub fn escape_index<R: Real>(params: &TransferParams<R>, k_cap: usize) -> Option<usize> {
    let (mut a, mut b, mut c) = params.initial_traces();
    let one = b.one_like();
    // after the step for index j: a = x_{j-2}, b = x_{j-1}, c = x_j
    for k in 0..=k_cap {
        if b.abs() > one && c.abs() > one {
            return Some(k);
        }
        let next = (c.clone() * &b).mul_pow2(1) - &a;
        if !next.is_finite() {
            // |x_k| <= 1 or |x_{k+1}| <= 1 cannot precede an overflow within
            // one step from finite values, so escape happened at k+1
            return Some(k + 1).filter(|&j| j <= k_cap);
        }
        a = b;
        b = c;
        c = next;
    }
    None
}

/// `(x_k, dx_k/dE)` for `k = -1..=k_max`, element `i` holding index `i-1`.
pub fn trace_derivative_seq<R: Real>(params: &TransferParams<R>, k_max: usize) -> Result<Vec<(R, R)>> {
    let x = fib_trace_seq(params, k_max)?;
    let half = params.energy.from_f64_like(0.5);
    let mut d = Vec::with_capacity(x.len());
    d.push(params.energy.zero_like());
    d.push(half.clone());
    if k_max >= 1 {
        d.push(half);
    }
    for i in 3..x.len() {
        let v = (d[i - 1].clone() * &x[i - 2] + &(x[i - 1].clone() * &d[i - 2])).mul_pow2(1) - &d[i - 3];
        d.push(finite(v, i as i64 - 1)?);
    }
    Ok(x.into_iter().zip(d).collect())
}

/// Chebyshev values `(U_{a-1}(x), U_a(x), U_{a+1}(x))`, `U_0 = 0`, `U_1 = 1`.
pub(crate) fn chebyshev_u<R: Real>(a: u64, x: &R) -> (R, R, R) {
    let mut prev = x.zero_like();
    let mut cur = x.one_like();
    for _ in 1..a {
        let next = (cur.clone() * x).mul_pow2(1) - &prev;
        prev = cur;
        cur = next;
    }
    let next = (cur.clone() * x).mul_pow2(1) - &prev;
    (prev, cur, next)
}

/// Half-traces carried by the Sturmian recursion at level `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTriple<R> {
    /// `Tr(M_{k-1})/2`
    pub x_prev: R,
    /// `Tr(M_k)/2`
    pub x_cur: R,
    /// `Tr(M_{k-1} M_k)/2`
    pub x_mixed: R,
}

/// A finite continued fraction `[0; a_1, ..., a_K]` with its convergents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContinuedFraction {
    quotients: Vec<u64>,
    /// `(p_k, q_k)` for `k = 0..=K`.
    convergents: Vec<(u128, u128)>,
}

impl ContinuedFraction {
    pub fn new(quotients: Vec<u64>) -> Result<Self> {
        if quotients.is_empty() || quotients.contains(&0) {
            return Err(Error::Precondition("partial quotients must be positive"));
        }
        let mut convergents = alloc::vec![(0u128, 1u128)];
        let (mut pm, mut qm) = (1u128, 0u128);
        for &a in &quotients {
            let (p, q) = *convergents.last().unwrap();
            let a = a as u128;
            let np = a.checked_mul(p).and_then(|v| v.checked_add(pm));
            let nq = a.checked_mul(q).and_then(|v| v.checked_add(qm));
            let (np, nq) = np.zip(nq).ok_or(Error::IntegerOverflow("convergents"))?;
            pm = p;
            qm = q;
            convergents.push((np, nq));
        }
        Ok(ContinuedFraction { quotients, convergents })
    }

    /// `K` ones: the golden mean truncated at level `K`.
    pub fn golden(levels: usize) -> Result<Self> {
        Self::new(alloc::vec![1; levels.max(1)])
    }

    pub fn levels(&self) -> usize {
        self.quotients.len()
    }

    /// `a_k` for `1 <= k <= K`.
    pub fn quotient(&self, k: usize) -> u64 {
        self.quotients[k - 1]
    }

    pub fn quotients(&self) -> &[u64] {
        &self.quotients
    }

    /// `(p_k, q_k)` for `0 <= k <= K`.
    pub fn convergent(&self, k: usize) -> (u128, u128) {
        self.convergents[k]
    }

    pub fn is_golden(&self) -> bool {
        self.quotients.iter().all(|&a| a == 1)
    }
}

/// Triples for levels `0..=K` of `M_{k+1} = M_{k-1} M_k^{a_{k+1}}`.
///
/// Each step is `x_{k+1} = U_a y_k - U_{a-1} x_{k-1}` and
/// `y_{k+1} = U_{a+1} y_k - U_a x_{k-1}`, with the Chebyshev polynomials
/// evaluated at `x_k`.
pub fn sturmian_trace_seq<R: Real>(
    params: &TransferParams<R>,
    cf: &ContinuedFraction,
) -> Result<Vec<TraceTriple<R>>> {
    let (a, b, c) = params.initial_traces();
    let mut t = TraceTriple { x_prev: a, x_cur: b, x_mixed: c };
    let mut out = Vec::with_capacity(cf.levels() + 1);
    for k in 0..cf.levels() {
        let next = sturmian_step(&t, cf.quotient(k + 1));
        out.push(t);
        if !(next.x_cur.is_finite() && next.x_mixed.is_finite()) {
            return Err(Error::Overflow { index: k as i64 + 1 });
        }
        t = next;
    }
    out.push(t);
    Ok(out)
}

pub(crate) fn sturmian_step<R: Real>(t: &TraceTriple<R>, a: u64) -> TraceTriple<R> {
    let (um, u, up) = chebyshev_u(a, &t.x_cur);
    TraceTriple {
        x_prev: t.x_cur.clone(),
        x_cur: u.clone() * &t.x_mixed - &(um * &t.x_prev),
        x_mixed: up * &t.x_mixed - &(u * &t.x_prev),
    }
}

/// `(1/n) log ||M(n)||` for the golden-rotation potential at phase 0, with
/// the spectral norm and periodic renormalisation of the product.
pub fn lyapunov_estimate(params: &TransferParams<f64>, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("lyapunov_estimate needs n >= 1"));
    }
    let (e, lam) = (params.energy, params.coupling);
    if !(e.is_finite() && lam.is_finite()) {
        return Err(Error::Precondition("non-finite parameters"));
    }
    // m = [[a, b], [c, d]] holds T_n ... T_1 / exp(log_scale)
    let (mut a, mut b, mut c, mut d) = (1.0f64, 0.0f64, 0.0f64, 1.0f64);
    let mut log_scale = 0.0;
    for m in 1..=n as u64 {
        let v = e - if golden_site(m) { lam } else { 0.0 };
        // left-multiply by [[v, -1], [1, 0]]
        let (na, nb) = (v * a - c, v * b - d);
        c = a;
        d = b;
        a = na;
        b = nb;
        let big = libm::fmax(libm::fmax(libm::fabs(a), libm::fabs(b)), libm::fmax(libm::fabs(c), libm::fabs(d)));
        if big > 1e100 {
            a /= big;
            b /= big;
            c /= big;
            d /= big;
            log_scale += libm::log(big);
        }
    }
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    let disc = libm::sqrt(libm::fmax(s * s - 4.0 * det * det, 0.0));
    let sigma2 = (s + disc) / 2.0;
    Ok((log_scale + 0.5 * libm::log(sigma2)) / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(e: f64, l: f64) -> TransferParams<f64> {
        TransferParams::new(e, l)
    }

    #[test]
    fn first_traces() {
        let x = fib_trace_seq(&p(1.0, 2.0), 3).unwrap();
        // x_2 = 2 x_1 x_0 - x_{-1} = 2(-1/2)(1/2) - 1
        assert_eq!(x, [1.0, 0.5, -0.5, -1.5, 2.0 * -1.5 * -0.5 - 0.5]);
        assert_eq!(fib_trace(&p(1.0, 2.0), 3).unwrap(), x[4]);
    }

    #[test]
    fn free_case_is_chebyshev() {
        // lambda = 0: x_k = T_{F_k}(E/2)
        let e = 1.234f64;
        let theta = libm::acos(e / 2.0);
        let x = fib_trace_seq(&p(e, 0.0), 12).unwrap();
        for k in 0..=12 {
            let f = crate::word::fibonacci(k).unwrap() as f64;
            assert!((x[k + 1] - libm::cos(f * theta)).abs() < 1e-9, "k = {k}");
        }
        assert_eq!(escape_index(&p(e, 0.0), 40), None);
    }

    #[test]
    fn escape_far_from_spectrum() {
        assert_eq!(escape_index(&p(10.0, 1.0), 5), Some(0));
        assert_eq!(escape_index(&p(f64::MAX, 1.0), 5), Some(0));
    }

    #[test]
    fn overflow_is_reported_with_index() {
        match fib_trace_seq(&p(5.0, 1.0), 60) {
            Err(Error::Overflow { index }) => assert!(index > 5 && index < 60),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn convergents_of_golden_are_fibonacci() {
        let cf = ContinuedFraction::golden(10).unwrap();
        for k in 1..=10 {
            let (p, q) = cf.convergent(k);
            assert_eq!(q as u64, crate::word::fibonacci(k).unwrap());
            assert_eq!(p as u64, crate::word::fibonacci(k - 1).unwrap());
        }
        assert!(ContinuedFraction::new(alloc::vec![1, 0]).is_err());
        let cf = ContinuedFraction::new(alloc::vec![2, 3]).unwrap();
        assert_eq!(cf.convergent(1), (1, 2));
        assert_eq!(cf.convergent(2), (3, 7));
    }

    #[test]
    fn sturmian_reduces_to_fibonacci() {
        let pr = p(0.7, 1.5);
        let cf = ContinuedFraction::golden(12).unwrap();
        let s = sturmian_trace_seq(&pr, &cf).unwrap();
        let x = fib_trace_seq(&pr, 13).unwrap();
        for (k, t) in s.iter().enumerate() {
            assert_eq!(t.x_prev, x[k]);
            assert_eq!(t.x_cur, x[k + 1]);
            assert_eq!(t.x_mixed, x[k + 2]);
        }
    }

    #[test]
    fn lyapunov_above_spectrum() {
        // far above the spectrum the transfer matrices are nearly commuting
        // hyperbolic, so the exponent is close to the constant-potential one
        let gamma = lyapunov_estimate(&p(10.0, 2.0), 4000).unwrap();
        let reference = libm::log((8.0 + libm::sqrt(60.0)) / 2.0);
        assert!((gamma - reference).abs() < 0.05 * reference, "{gamma} vs {reference}");
        for n in [500usize, 1000, 2000] {
            let a = lyapunov_estimate(&p(10.0, 2.0), n).unwrap();
            let b = lyapunov_estimate(&p(10.0, 2.0), 2 * n).unwrap();
            assert!((a - b).abs() < 10.0 / n as f64);
        }
    }

    fn lift_free_fricke(e: f64, l: f64) -> f64 {
        let (a, b, c) = p(e, l).initial_traces();
        fricke(&c, &b, &a)
    }

    proptest! {
        #[test]
        fn fricke_on_initial_line(e in -10.0f64..10.0, l in 0.0f64..10.0) {
            let g = lift_free_fricke(e, l);
            prop_assert!((g - l * l / 4.0).abs() < 1e-12 * (1.0 + e * e + l * l));
        }

        #[test]
        fn escape_is_monotone_growth(e in -4.0f64..12.0, l in 0.0f64..8.0) {
            let pr = p(e, l);
            if let Some(k) = escape_index(&pr, 30) {
                let x = fib_trace_seq(&pr, k + 6);
                if let Ok(x) = x {
                    for j in 1..5 {
                        prop_assert!(x[k + 1 + j + 1].abs() > x[k + 1 + j].abs());
                    }
                }
            }
        }

        #[test]
        fn chebyshev_power_identity(a in 1u64..8, x in -1.5f64..1.5) {
            // U_{a+1} = 2x U_a - U_{a-1}
            let (um, u, up) = chebyshev_u(a, &x);
            prop_assert!((up - (2.0 * x * u - um)).abs() < 1e-9 * (1.0 + u.abs()));
        }
    }
}
