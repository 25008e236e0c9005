//! Fresnel integrals, the T₁/T₂ series and the ₁F₂ hypergeometric sum.
//!
//! ```text
//! S(z) = ∫₀ᶻ sin(πu²/2) du        C(z) = ∫₀ᶻ cos(πu²/2) du
//! T₁(q) = ∫₀^q sin(p²) dp = q³/3 · ₁F₂(3/4; 3/2, 7/4; −q⁴/4)
//! T₂(q) = ∫₀^q cos(p²) dp = q   · ₁F₂(1/4; 1/2, 5/4; −q⁴/4)
//! T₁(q) = √(π/2) S(q√(2/π)),  T₂(q) = √(π/2) C(q√(2/π))
//! ```
//!
//! The ₁F₂ series is summed in double-double arithmetic: for |q| = 4 the
//! individual terms reach ~10⁵ before cancelling down to O(1), which costs
//! plain doubles five digits. Outside [`T_SERIES_MAX_Q`] the T functions are
//! evaluated through the Fresnel identity instead.
//!
//! Fresnel S/C use their Maclaurin series below [`FRESNEL_SERIES_RADIUS`] and
//! the continued fraction of the complementary error function above it.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::ddouble::DoubleDouble;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument must be finite (got {0})")]
    NonFinite(f64),
    #[error("argument {x} outside the stable summation domain |x| <= {limit}")]
    Domain { x: f64, limit: f64 },
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("lower parameter {0} is a non-positive integer")]
    PoleParameter(f64),
    #[error("invalid sampling range [{min}, {max}] with {n} points")]
    BadRange { min: f64, max: f64, n: usize },
}

/// Largest |x| accepted by [`hyp1f2`].
pub const HYP1F2_MAX_ABS_ARG: f64 = 64.0;

/// Largest |q| for which [`t1`]/[`t2`] use the series (`q⁴/4 = 64`).
pub const T_SERIES_MAX_Q: f64 = 4.0;

/// Below this |z| the Fresnel functions are summed from their power series.
pub const FRESNEL_SERIES_RADIUS: f64 = 1.5;
/// Beyond this |z| the two-term auxiliary-function expansion is used.
pub const FRESNEL_ASYMPTOTIC_RADIUS: f64 = 1000.0;

pub const SERIES_MAX_TERMS: usize = 500;
const SERIES_REL_TOL: f64 = 1e-16;

const CF_MAX_ITER: usize = 2000;
const CF_EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

/// A sample of the Cornu spiral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornuPoint {
    pub u: f64,
    pub s: f64,
    pub c: f64,
}

fn check_finite(x: f64) -> Result<(), SpecFunError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(SpecFunError::NonFinite(x))
    }
}

/// `(sin(πz²/2), cos(πz²/2))` with `z²` reduced modulo 4 before scaling by π/2,
/// so large arguments keep their phase accuracy.
pub fn quadratic_phase_sin_cos(z: f64) -> (f64, f64) {
    let hi = z * z;
    let lo = z.mul_add(z, -hi);
    let reduced = hi % 4.0;
    (FRAC_PI_2 * (reduced + lo)).sin_cos()
}

/// `(S(z), C(z))`.
pub fn fresnel(z: f64) -> Result<(f64, f64), SpecFunError> {
    check_finite(z)?;
    let ax = z.abs();
    let (s, c) = if ax < FRESNEL_SERIES_RADIUS {
        fresnel_series(ax)
    } else if ax < FRESNEL_ASYMPTOTIC_RADIUS {
        fresnel_continued_fraction(ax)?
    } else {
        fresnel_asymptotic(ax)
    };
    Ok(if z < 0.0 { (-s, -c) } else { (s, c) })
}

pub fn fresnel_s(z: f64) -> Result<f64, SpecFunError> {
    fresnel(z).map(|(s, _)| s)
}

pub fn fresnel_c(z: f64) -> Result<f64, SpecFunError> {
    fresnel(z).map(|(_, c)| c)
}

/// Interleaved power series: with `t = πx²/2`, the k-th term of
/// `Σ (−1)^⌊k/2⌋ tᵏ / (k! (2k+1))` feeds C for even k and S for odd k.
fn fresnel_series(x: f64) -> (f64, f64) {
    let t = FRAC_PI_2 * x * x;
    let mut fact_pow = 1.0; // t^k / k!
    let mut sum_c = 0.0;
    let mut sum_s = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        if k > 0 {
            fact_pow *= t / k as f64;
            if fact_pow == 0.0 {
                break;
            }
        }
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * fact_pow / (2 * k + 1) as f64;
        if k % 2 == 0 {
            sum_c += term;
        } else {
            sum_s += term;
        }
        if k > 1 && fact_pow / ((2 * k + 1) as f64) < SERIES_REL_TOL * sum_c.abs().min(sum_s.abs()) {
            break;
        }
    }
    (x * sum_s, x * sum_c)
}

/// Modified Lentz evaluation of the erfc continued fraction, valid for x ≳ 1.
fn fresnel_continued_fraction(x: f64) -> Result<(f64, f64), SpecFunError> {
    let pix2 = PI * x * x;
    let one = Complex64::new(1.0, 0.0);
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1.0 / FPMIN, 0.0);
    let mut d = one / b;
    let mut h = d;
    let mut n = -1.0_f64;
    let mut converged = false;
    for _ in 2..=CF_MAX_ITER {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += 4.0;
        d = one / (d * a + b);
        cc = b + a / cc;
        let del = cc * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < CF_EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SpecFunError::NonConvergence { terms: CF_MAX_ITER });
    }
    let h = Complex64::new(x, -x) * h;
    let (sn, cs) = quadratic_phase_sin_cos(x);
    let res = Complex64::new(0.5, 0.5) * (one - Complex64::new(cs, sn) * h);
    Ok((res.im, res.re))
}

/// `C = ½ + f sin φ − g cos φ`, `S = ½ − f cos φ − g sin φ` with
/// `φ = πx²/2`. Truncation error at |x| ≥ 1000 is below 1e-28.
fn fresnel_asymptotic(x: f64) -> (f64, f64) {
    let w = PI * x * x;
    let w2 = 1.0 / (w * w);
    let f = (1.0 - 3.0 * w2) / (PI * x);
    let g = (1.0 - 15.0 * w2) / (PI * w * x);
    let (sn, cs) = quadratic_phase_sin_cos(x);
    (0.5 - f * cs - g * sn, 0.5 + f * sn - g * cs)
}

fn check_parameter(b: f64) -> Result<(), SpecFunError> {
    check_finite(b)?;
    if b <= 0.0 && b.fract() == 0.0 {
        return Err(SpecFunError::PoleParameter(b));
    }
    Ok(())
}

/// Double-double ₁F₂ summation; parameters must be exact in f64.
fn hyp1f2_dd(a: f64, b1: f64, b2: f64, x: DoubleDouble) -> Result<DoubleDouble, SpecFunError> {
    let mut term = DoubleDouble::from_f64(1.0);
    let mut sum = term;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        term = (term * x)
            .mul_f64(a + nf)
            .div_f64(nf + 1.0)
            .div_f64(b1 + nf)
            .div_f64(b2 + nf);
        if term.abs_approx() < SERIES_REL_TOL * sum.abs_approx() || term.abs_approx() == 0.0 {
            return Ok(sum + term);
        }
        sum = sum + term;
    }
    Err(SpecFunError::NonConvergence {
        terms: SERIES_MAX_TERMS,
    })
}

/// `Σₙ (a)ₙ xⁿ / (n! (b1)ₙ (b2)ₙ)` for `|x| ≤ HYP1F2_MAX_ABS_ARG`.
pub fn hyp1f2(a: f64, b1: f64, b2: f64, x: f64) -> Result<f64, SpecFunError> {
    check_finite(a)?;
    check_finite(x)?;
    check_parameter(b1)?;
    check_parameter(b2)?;
    if x.abs() > HYP1F2_MAX_ABS_ARG {
        return Err(SpecFunError::Domain {
            x,
            limit: HYP1F2_MAX_ABS_ARG,
        });
    }
    hyp1f2_dd(a, b1, b2, DoubleDouble::from_f64(x)).map(DoubleDouble::to_f64)
}

/// `(q², −q⁴/4)` carried in double-double.
fn series_powers(q: f64) -> (DoubleDouble, DoubleDouble) {
    let qd = DoubleDouble::from_f64(q);
    let q2 = qd * qd;
    let x = -(q2 * q2).mul_f64(0.25);
    (q2, x)
}

/// `T₁(q)` through the ₁F₂ series; `Domain` error beyond [`T_SERIES_MAX_Q`].
pub fn t1_series(q: f64) -> Result<f64, SpecFunError> {
    check_finite(q)?;
    if q.abs() > T_SERIES_MAX_Q {
        return Err(SpecFunError::Domain {
            x: q,
            limit: T_SERIES_MAX_Q,
        });
    }
    let (q2, x) = series_powers(q);
    let f = hyp1f2_dd(0.75, 1.5, 1.75, x)?;
    Ok((f * q2).mul_f64(q).div_f64(3.0).to_f64())
}

/// `T₂(q)` through the ₁F₂ series; `Domain` error beyond [`T_SERIES_MAX_Q`].
pub fn t2_series(q: f64) -> Result<f64, SpecFunError> {
    check_finite(q)?;
    if q.abs() > T_SERIES_MAX_Q {
        return Err(SpecFunError::Domain {
            x: q,
            limit: T_SERIES_MAX_Q,
        });
    }
    let (_, x) = series_powers(q);
    let f = hyp1f2_dd(0.25, 0.5, 1.25, x)?;
    Ok(f.mul_f64(q).to_f64())
}

const SQRT_HALF_PI: f64 = 1.253_314_137_315_500_3;
const SQRT_TWO_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// `T₁(q) = Σ (−1)ⁿ q^{4n+3} / ((2n+1)! (4n+3))` for any finite q.
pub fn t1(q: f64) -> Result<f64, SpecFunError> {
    check_finite(q)?;
    if q.abs() <= T_SERIES_MAX_Q {
        t1_series(q)
    } else {
        Ok(SQRT_HALF_PI * fresnel_s(q * SQRT_TWO_OVER_PI)?)
    }
}

/// `T₂(q) = Σ (−1)ⁿ q^{4n+1} / ((2n)! (4n+1))` for any finite q.
pub fn t2(q: f64) -> Result<f64, SpecFunError> {
    check_finite(q)?;
    if q.abs() <= T_SERIES_MAX_Q {
        t2_series(q)
    } else {
        Ok(SQRT_HALF_PI * fresnel_c(q * SQRT_TWO_OVER_PI)?)
    }
}

/// `n` points of the Cornu spiral, uniformly spaced in `u`.
pub fn cornu_curve(u_min: f64, u_max: f64, n: usize) -> Result<Vec<CornuPoint>, SpecFunError> {
    if !(u_min.is_finite() && u_max.is_finite() && u_min < u_max && n >= 2) {
        return Err(SpecFunError::BadRange {
            min: u_min,
            max: u_max,
            n,
        });
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            // weighted form keeps symmetric ranges exactly odd
            let u = (u_min * (last - i as f64) + u_max * i as f64) / last;
            let (s, c) = fresnel(u)?;
            Ok(CornuPoint { u, s, c })
        })
        .collect()
}
