//! Test-only oracles, independent of the evaluation paths they check.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use slitwave::kernels::GaussLegendre;
use std::f64::consts::PI;

/// `(S(z), C(z))` by Gauss–Legendre panels with at most `budget` radians of
/// phase each, refining tenfold until two estimates differ by < 1e-13.
///
/// Nodes are carried as `panel_start + t` so the phase `π(a + t)²/2` keeps
/// full accuracy even for |z| ~ 10³.
pub fn fresnel_by_quadrature(z: f64) -> (f64, f64) {
    let rule = GaussLegendre::new(20);
    let estimate = |budget: f64| {
        let total_phase = PI * z * z / 2.0;
        let panels = (total_phase / budget).ceil().max(4.0) as usize;
        let mut s = Neumaier::default();
        let mut c = Neumaier::default();
        for k in 0..panels {
            // equal phase increments: u_k = z·√(k/panels)
            let a = z * (k as f64 / panels as f64).sqrt();
            let b = z * ((k + 1) as f64 / panels as f64).sqrt();
            let half = 0.5 * (b - a);
            let a2 = a * a;
            let a2_lo = a.mul_add(a, -a2);
            let base = a2 % 4.0 + a2_lo;
            for (x, w) in rule.nodes().iter().zip(rule.weights()) {
                let t = half * (1.0 + x);
                let (sn, cs) = (0.5 * PI * (base + t * (2.0 * a + t))).sin_cos();
                s.add(w * half * sn);
                c.add(w * half * cs);
            }
        }
        (s.value(), c.value())
    };
    let mut budget = 4.0;
    let mut prev = estimate(budget);
    for _ in 0..3 {
        budget /= 10.0;
        let next = estimate(budget);
        let done = (next.0 - prev.0).abs() < 1e-13 && (next.1 - prev.1).abs() < 1e-13;
        prev = next;
        if done {
            break;
        }
    }
    prev
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn ratio(p: (i64, i64)) -> BigRational {
    BigRational::new(BigInt::from(p.0), BigInt::from(p.1))
}

/// `Σ_{n<terms} (a)ₙ xⁿ / (n! (b1)ₙ (b2)ₙ)` in exact rational arithmetic.
pub fn rational_1f2(a: (i64, i64), b1: (i64, i64), b2: (i64, i64), x: (i64, i64), terms: usize) -> f64 {
    let (a, b1, b2, x) = (ratio(a), ratio(b1), ratio(b2), ratio(x));
    let mut term = BigRational::one();
    let mut sum = BigRational::zero();
    for n in 0..terms {
        sum += &term;
        let nn = BigRational::from_integer(BigInt::from(n));
        term = term * (&a + &nn) * &x
            / ((&nn + BigRational::one()) * (&b1 + &nn) * (&b2 + &nn));
    }
    sum.to_f64().unwrap()
}

/// `T₁(1) = Σ (−1)ⁿ / ((2n+1)! (4n+3))`, exact partial sum.
pub fn rational_t1_at_one(terms: usize) -> f64 {
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one(); // (2n+1)!
    for n in 0..terms {
        if n > 0 {
            fact *= BigInt::from(2 * n) * BigInt::from(2 * n + 1);
        }
        let denom = &fact * BigInt::from(4 * n + 3);
        let t = BigRational::new(BigInt::one(), denom);
        if n % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    sum.to_f64().unwrap()
}
