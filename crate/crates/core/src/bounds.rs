//! Closed-form bounds for dimensions, Hölder exponents and transport
//! exponents, used as reference curves.

use alloc::vec::Vec;

use crate::error::{Error, Result};
pub use crate::ids::ALPHA;

fn ln(x: f64) -> f64 {
    libm::log(x)
}

/// `log(1 + sqrt 2)`.
fn log_silver() -> f64 {
    ln(1.0 + core::f64::consts::SQRT_2)
}

/// `((lambda - 4) + sqrt((lambda - 4)^2 - 12)) / 2`, real for `lambda >= 8`.
fn upper_base(lambda: f64) -> f64 {
    let t = lambda - 4.0;
    (t + libm::sqrt(t * t - 12.0)) / 2.0
}

fn require(ok: bool, msg: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(msg))
    }
}

pub fn dim_upper(lambda: f64) -> Result<f64> {
    require(lambda >= 8.0, "dim_upper needs lambda in [8, inf)")?;
    Ok(log_silver() / ln(upper_base(lambda)))
}

pub fn dim_lower(lambda: f64) -> Result<f64> {
    require(lambda > 4.0, "dim_lower needs lambda in (4, inf)")?;
    Ok(log_silver() / ln(2.0 * lambda + 22.0))
}

/// Lower exponent for `lambda > 4`; the upper one needs `lambda >= 8`.
pub fn holder_bounds_large(lambda: f64) -> Result<(f64, Option<f64>)> {
    require(lambda > 4.0, "holder_bounds_large needs lambda in (4, inf)")?;
    let c = 1.5 * -ln(ALPHA);
    let lower = c / ln(2.0 * lambda + 22.0);
    let upper = (lambda >= 8.0).then(|| c / ln(upper_base(lambda)));
    Ok((lower, upper))
}

/// Limit of the Hölder exponent as the coupling vanishes; the exponent
/// stays below it for small coupling.
pub fn holder_small_limit() -> f64 {
    0.5
}

/// Lower transport exponent bound for the `p`-th moment, with the
/// unspecified universal constant `D` supplied by the caller.
pub fn transport_lower(lambda: f64, p: f64, d: f64) -> Result<f64> {
    require(d > 0.0, "transport_lower needs D > 0")?;
    require(p > 0.0 && lambda.is_finite(), "transport_lower needs p > 0")?;
    let gamma = d * ln(2.0 + libm::sqrt(8.0 + lambda * lambda));
    let kappa = ln(libm::sqrt(17.0) / (20.0 * ln(1.0 + ALPHA)));
    // below this the first branch changes sign and the bound is vacuous
    require(gamma + kappa + 0.5 > 0.0, "transport_lower needs gamma + kappa + 1/2 > 0")?;
    Ok(if p <= 2.0 * gamma + 1.0 {
        (p + 2.0 * kappa) / ((p + 1.0) * (gamma + kappa + 0.5))
    } else {
        1.0 / (gamma + 1.0)
    })
}

/// Large-coupling transport exponent bounds: lower for `lambda > sqrt 24`,
/// upper for `lambda >= 8`.
pub fn transport_asymptotic(lambda: f64) -> Result<(f64, Option<f64>)> {
    require(lambda > libm::sqrt(24.0), "transport_asymptotic needs lambda in (sqrt 24, inf)")?;
    let c = 2.0 * ln(1.0 + ALPHA);
    Ok((c / ln(2.0 * lambda + 22.0), (lambda >= 8.0).then(|| c / ln(upper_base(lambda)))))
}

/// Supremum of the partial quotients of a Sturmian frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MStar {
    Finite(f64),
    Infinite,
}

/// `(lower, upper)` dimension bounds for Sturmian spectra at `lambda > 20`.
pub fn sturmian_dim_bounds(lambda: f64, m_star: MStar) -> Result<(f64, f64)> {
    require(lambda > 20.0, "sturmian_dim_bounds needs lambda in (20, inf)")?;
    let m = match m_star {
        MStar::Infinite => return Ok((1.0, 1.0)),
        MStar::Finite(m) => {
            require(m >= 1.0 && m.is_finite(), "sturmian_dim_bounds needs M* >= 1")?;
            m
        }
    };
    let (lm, l2, l3, s) = (ln(m), ln(2.0), ln(3.0), lambda - 8.0);
    let upper = (2.0 * lm + l3) / (2.0 * lm - ln(3.0 / s));
    let a = l2 / (10.0 * l2 - 3.0 * ln(1.0 / (4.0 * s)));
    let b = (lm - l3) / (lm - ln(1.0 / (12.0 * s)));
    Ok((a.max(b), upper))
}

/// A named bound sampled on a grid, restricted to its valid range.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCurve {
    pub name: &'static str,
    pub valid_range: (f64, f64),
    pub values: Vec<(f64, f64)>,
}

/// Names accepted by [`bound_curve`].
pub const BOUND_NAMES: [&str; 8] = [
    "dim_upper",
    "dim_lower",
    "holder_lower",
    "holder_upper",
    "transport_asymptotic_lower",
    "transport_asymptotic_upper",
    "sturmian_lower",
    "sturmian_upper",
];

/// Samples `name` on `grid`, skipping points outside the valid range.
/// Sturmian curves use `m_star = 1`.
pub fn bound_curve(name: &str, grid: &[f64]) -> Result<BoundCurve> {
    let (name, lo, f): (&'static str, f64, fn(f64) -> Result<f64>) = match name {
        "dim_upper" => ("dim_upper", 8.0, dim_upper),
        "dim_lower" => ("dim_lower", 4.0, dim_lower),
        "holder_lower" => ("holder_lower", 4.0, |l| Ok(holder_bounds_large(l)?.0)),
        "holder_upper" => ("holder_upper", 8.0, |l| {
            holder_bounds_large(l)?.1.ok_or(Error::Precondition("holder upper needs lambda >= 8"))
        }),
        "transport_asymptotic_lower" => ("transport_asymptotic_lower", libm::sqrt(24.0), |l| {
            Ok(transport_asymptotic(l)?.0)
        }),
        "transport_asymptotic_upper" => ("transport_asymptotic_upper", 8.0, |l| {
            transport_asymptotic(l)?.1.ok_or(Error::Precondition("upper needs lambda >= 8"))
        }),
        "sturmian_lower" => ("sturmian_lower", 20.0, |l| Ok(sturmian_dim_bounds(l, MStar::Finite(1.0))?.0)),
        "sturmian_upper" => ("sturmian_upper", 20.0, |l| Ok(sturmian_dim_bounds(l, MStar::Finite(1.0))?.1)),
        _ => return Err(Error::NotFound("unknown bound name")),
    };
    let values = grid.iter().filter_map(|&l| f(l).ok().map(|v| (l, v))).collect();
    Ok(BoundCurve { name, valid_range: (lo, f64::INFINITY), values })
}
