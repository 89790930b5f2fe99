//! Integer combinatorics of the golden rotation: Fibonacci numbers, the
//! rotation coding `floor(m*alpha)` and the Fibonacci substitution word.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// `F_k` with `F_0 = F_1 = 1`.
pub fn fibonacci(k: usize) -> Result<u64> {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 1..k {
        let c = a.checked_add(b).ok_or(Error::IntegerOverflow("fibonacci"))?;
        a = b;
        b = c;
    }
    Ok(b)
}

/// `floor(m * alpha)` with `alpha = (sqrt 5 - 1)/2`, exact.
///
/// Uses `floor(m*sqrt 5) = isqrt(5 m^2)`, valid because `m*sqrt 5` is
/// irrational for `m > 0`.
pub fn floor_mul_alpha(m: u64) -> u64 {
    let m = m as u128;
    let s = (5 * m * m).isqrt();
    ((s - m) / 2) as u64
}

/// Whether site `m >= 1` of the golden-rotation potential carries the
/// coupling, i.e. `{m alpha}` lies in `[1 - alpha, 1)`.
pub fn golden_site(m: u64) -> bool {
    floor_mul_alpha(m + 1) - floor_mul_alpha(m) == 1
}

/// First `n` letters of the fixed point of `1 -> 10, 0 -> 1`.
pub fn fibonacci_word(n: usize) -> Vec<bool> {
    let mut w = alloc::vec![true];
    while w.len() < n {
        let mut next = Vec::with_capacity(w.len() * 2);
        for &c in &w {
            next.push(true);
            if c {
                next.push(false);
            }
        }
        w = next;
    }
    w.truncate(n);
    w
}
