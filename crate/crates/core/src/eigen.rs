//! Dense symmetric eigenvalues: Householder reduction to tridiagonal form
//! followed by implicit QL with Wilkinson-type shifts.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::real::{PrecisionContext, Real};

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<R> {
    n: usize,
    data: Vec<R>,
}

impl<R: Real> SymMatrix<R> {
    pub fn zeros(n: usize, like: &R) -> Self {
        SymMatrix { n, data: alloc::vec![like.zero_like(); n * n] }
    }

    pub fn from_rows(n: usize, data: Vec<R>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Precondition("matrix data length is not n*n"));
        }
        let m = SymMatrix { n, data };
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[j * self.n + i] = v.clone();
        self.data[i * self.n + j] = v;
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

fn hypot<R: Real>(a: &R, b: &R) -> R {
    (a.clone() * a + &(b.clone() * b)).sqrt()
}

fn with_sign<R: Real>(mag: &R, s: &R) -> R {
    if s.is_sign_negative() {
        -mag.abs()
    } else {
        mag.abs()
    }
}

/// Householder reduction; returns the diagonal and the `n - 1` off-diagonal.
fn tridiagonalize<R: Real>(m: &SymMatrix<R>) -> (Vec<R>, Vec<R>) {
    let n = m.n;
    let mut a: Vec<Vec<R>> = (0..n).map(|i| m.data[i * n..(i + 1) * n].to_vec()).collect();
    let mut d = Vec::with_capacity(n);
    let mut e = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let zero = a[k][k].zero_like();
        let mut norm2 = zero.clone();
        for i in k + 1..n {
            norm2 = norm2 + &(a[i][k].clone() * &a[i][k]);
        }
        d.push(a[k][k].clone());
        if norm2 == zero {
            e.push(zero);
            continue;
        }
        let norm = norm2.sqrt();
        let alpha = -with_sign(&norm, &a[k + 1][k]);
        // v = x - alpha e1, scaled to unit length
        let mut v: Vec<R> = (k + 1..n).map(|i| a[i][k].clone()).collect();
        v[0] = v[0].clone() - &alpha;
        let mut vn2 = zero.clone();
        for vi in &v {
            vn2 = vn2 + &(vi.clone() * vi);
        }
        let vn = vn2.sqrt();
        for vi in v.iter_mut() {
            *vi = vi.clone() / &vn;
        }
        e.push(alpha);
        let t = n - k - 1;
        // p = A v on the trailing block
        let mut p = alloc::vec![zero.clone(); t];
        for i in 0..t {
            let row = &a[k + 1 + i];
            let mut s = zero.clone();
            for j in 0..t {
                s = s + &(row[k + 1 + j].clone() * &v[j]);
            }
            p[i] = s;
        }
        let mut vp = zero.clone();
        for i in 0..t {
            vp = vp + &(v[i].clone() * &p[i]);
        }
        // w = p - (v.p) v; A <- A - 2 v w^T - 2 w v^T
        let w: Vec<R> = (0..t).map(|i| p[i].clone() - &(vp.clone() * &v[i])).collect();
        for i in 0..t {
            for j in 0..=i {
                let upd = (v[i].clone() * &w[j] + &(w[i].clone() * &v[j])).mul_pow2(1);
                let val = a[k + 1 + i][k + 1 + j].clone() - &upd;
                a[k + 1 + j][k + 1 + i] = val.clone();
                a[k + 1 + i][k + 1 + j] = val;
            }
        }
    }
    if n > 0 {
        d.push(a[n - 1][n - 1].clone());
    }
    (d, e)
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// off-diagonal `e`, ascending.
pub fn tridiagonal_eigenvalues<R: Real>(d: &[R], e: &[R], ctx: &PrecisionContext) -> Result<Vec<R>> {
    let n = d.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if e.len() + 1 != n {
        return Err(Error::Precondition("off-diagonal length must be n - 1"));
    }
    let mut d = d.to_vec();
    let mut e: Vec<R> = e.to_vec();
    e.push(d[0].zero_like());
    let bits = R::effective_bits(ctx.bits).min(ctx.bits) as i32;
    let eps = d[0].from_f64_like(libm::ldexp(1.0, 1 - bits));
    let zero = d[0].zero_like();
    let one = d[0].one_like();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + &d[m + 1].abs();
                if e[m].abs() <= eps.clone() * &dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 30 + 2 * bits as usize {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1].clone() - &d[l]) / &(e[l].clone().mul_pow2(1));
            let mut r = hypot(&g, &one);
            g = d[m].clone() - &d[l] + &(e[l].clone() / &(g.clone() + &with_sign(&r, &g)));
            let (mut s, mut c, mut p) = (one.clone(), one.clone(), zero.clone());
            let mut early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s.clone() * &e[i];
                let b = c.clone() * &e[i];
                r = hypot(&f, &g);
                e[i + 1] = r.clone();
                if r == zero {
                    d[i + 1] = d[i + 1].clone() - &p;
                    e[m] = zero.clone();
                    early = true;
                    break;
                }
                s = f / &r;
                c = g.clone() / &r;
                g = d[i + 1].clone() - &p;
                r = (d[i].clone() - &g) * &s + &((c.clone() * &b).mul_pow2(1));
                p = s.clone() * &r;
                d[i + 1] = g.clone() + &p;
                g = c.clone() * &r - &b;
            }
            if early {
                continue;
            }
            d[l] = d[l].clone() - &p;
            e[l] = g;
            e[m] = zero.clone();
        }
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence);
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(d)
}

/// All eigenvalues of a symmetric matrix, ascending.
pub fn all_eigenvalues<R: Real>(m: &SymMatrix<R>, ctx: &PrecisionContext) -> Result<Vec<R>> {
    if !m.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if m.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Precondition("non-finite matrix entry"));
    }
    let (d, e) = tridiagonalize(m);
    tridiagonal_eigenvalues(&d, &e, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn matches_nalgebra_on_random_matrices() {
        let ctx = PrecisionContext::double();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [1usize, 2, 3, 7, 20, 45] {
            let mut m = SymMatrix::zeros(n, &0.0);
            for i in 0..n {
                for j in 0..=i {
                    m.set(i, j, rng.gen_range(-3.0..3.0));
                }
            }
            let ours = all_eigenvalues(&m, &ctx).unwrap();
            let na = nalgebra::DMatrix::from_fn(n, n, |i, j| *m.get(i, j));
            let mut theirs: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
            theirs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in ours.iter().zip(&theirs) {
                assert!((a - b).abs() < 1e-11, "n = {n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn free_chain_spectrum() {
        // eigenvalues of the n-site free chain are 2 cos(j pi / (n + 1))
        let n = 60;
        let ctx = PrecisionContext::double();
        let ev = tridiagonal_eigenvalues(&alloc::vec![0.0; n], &alloc::vec![1.0; n - 1], &ctx).unwrap();
        for (j, v) in ev.iter().rev().enumerate() {
            let exact = 2.0 * libm::cos((j + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((v - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric() {
        assert_eq!(
            SymMatrix::from_rows(2, alloc::vec![1.0, 2.0, 3.0, 4.0]).unwrap_err(),
            Error::NotSymmetric
        );
    }
}
