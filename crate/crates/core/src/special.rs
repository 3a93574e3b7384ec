//! Special functions: standard normal tails, log-gamma and the regularized
//! incomplete gamma function behind chi-squared tail probabilities.
//!
//! `erfc` and `lgamma` come from `libm` (a port of musl's implementations,
//! accurate to a few ulp). Upper tails are computed directly from `erfc`
//! so that probabilities like 1e-30 keep full relative precision instead
//! of cancelling in `1 - cdf`.

use crate::error::{numeric, Result};

pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

const MAX_GAMMA_ITERATIONS: usize = 10_000;
const GAMMA_EPS: f64 = 1e-16;

#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * z * z).exp()
}

/// P(Z >= z) for a standard normal Z.
#[inline]
pub fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// P(Z <= z) for a standard normal Z.
#[inline]
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_pq(a, x)?.0)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q(a: f64, x: f64) -> Result<f64> {
    Ok(gamma_pq(a, x)?.1)
}

/// Returns (P, Q). The series is used below `a + 1`, the Lentz continued
/// fraction above it; whichever one converges is computed directly and the
/// other obtained by complement.
fn gamma_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(numeric(format!("incomplete gamma needs a > 0, got {a}")));
    }
    if x.is_nan() {
        return Err(numeric("incomplete gamma at NaN"));
    }
    if x <= 0.0 {
        return Ok((0.0, 1.0));
    }
    if x == f64::INFINITY {
        return Ok((1.0, 0.0));
    }
    if x < a + 1.0 {
        let p = gamma_series(a, x)?;
        Ok((p, 1.0 - p))
    } else {
        let q = gamma_continued_fraction(a, x)?;
        Ok((1.0 - q, q))
    }
}

fn gamma_series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_GAMMA_ITERATIONS {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            let log_prefactor = -x + a * x.ln() - ln_gamma(a);
            return Ok(sum * log_prefactor.exp());
        }
    }
    Err(numeric(format!(
        "incomplete gamma series did not converge for a = {a}, x = {x}"
    )))
}

fn gamma_continued_fraction(a: f64, x: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_GAMMA_ITERATIONS {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            let log_prefactor = -x + a * x.ln() - ln_gamma(a);
            return Ok(h * log_prefactor.exp());
        }
    }
    Err(numeric(format!(
        "incomplete gamma continued fraction did not converge for a = {a}, x = {x}"
    )))
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` for a monotone `f` by bisection.
///
/// `f(lo)` and `f(hi)` must have opposite signs (or one of them be zero).
/// Stops when the bracket is narrower than `x_tol` or 200 halvings have
/// been done, whichever comes first.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(numeric(format!(
            "root not bracketed in [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= x_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Upper quantile of the standard normal: the z with P(Z >= z) = p.
pub fn std_normal_upper_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(numeric(format!("normal quantile needs 0 < p < 1, got {p}")));
    }
    // Solve in log space so tiny p keep relative precision.
    let target = p.ln();
    bisect(|z| std_normal_sf(z).ln() - target, -40.0, 40.0, 1e-15)
}
