//! Oracles shared by the integration tests. None of them call the exact
//! comparison or measure code they are used to check.

#![allow(dead_code)]

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use probeq_core::{Distribution, Scalar, SimpleRV};
use rand::Rng;

/// Sign of `a + b·√2` from a `digits`-digit decimal expansion of `√2`.
/// Panics if that precision cannot decide.
pub fn decimal_sign(a: &BigRational, b: &BigRational, digits: u32) -> Ordering {
    if b.is_zero() {
        return a.cmp(&BigRational::zero());
    }
    let scale = BigInt::from(10).pow(digits);
    // |b|·√2·10^d lies in [r, r + 1) / den(b).
    let r = (BigInt::from(2) * b.numer() * b.numer() * &scale * &scale).sqrt();
    let den = BigRational::from_integer(b.denom().clone());
    let lo_mag = BigRational::from_integer(r.clone()) / &den;
    let hi_mag = BigRational::from_integer(r + 1) / &den;
    let base = a * BigRational::from_integer(scale);
    let (lo, hi) = if b.is_positive() { (&base + lo_mag, &base + hi_mag) } else { (&base - hi_mag, &base - lo_mag) };
    // b ≠ 0 makes the value irrational, so it lies strictly inside (lo, hi).
    if !lo.is_negative() {
        Ordering::Greater
    } else if !hi.is_positive() {
        Ordering::Less
    } else {
        panic!("{digits} digits cannot decide the sign of {a} + {b}·√2");
    }
}

/// Decimal-oracle comparison of two scalars.
pub fn decimal_compare(x: &Scalar, y: &Scalar, digits: u32) -> Ordering {
    let a = x.rat() - y.rat();
    let b = x.surd() - y.surd();
    if a.is_zero() && b.is_zero() {
        Ordering::Equal
    } else {
        decimal_sign(&a, &b, digits)
    }
}

/// `x` as sorted floating-point steps `(lo, hi, value)`.
pub struct FloatSteps(Vec<(f64, f64, f64)>);

impl FloatSteps {
    pub fn new(x: &SimpleRV) -> Self {
        let mut steps: Vec<(f64, f64, f64)> = x
            .cells()
            .iter()
            .flat_map(|c| {
                let v = c.outcome.to_f64().unwrap();
                c.event.intervals().iter().map(move |iv| (iv.lo().to_f64(), iv.hi().to_f64(), v))
            })
            .collect();
        steps.sort_by(|a, b| a.0.total_cmp(&b.0));
        FloatSteps(steps)
    }

    pub fn at(&self, u: f64) -> f64 {
        let i = self.0.partition_point(|s| s.0 <= u);
        let (lo, hi, v) = self.0[i.checked_sub(1).expect("u ≥ 0")];
        debug_assert!(lo <= u && u < hi);
        v
    }
}

/// Monte Carlo estimate of `P(pred(X(U), Y(U)))` from `n` uniform draws.
pub fn monte_carlo<R: Rng>(rng: &mut R, n: usize, x: &SimpleRV, y: &SimpleRV, pred: impl Fn(f64, f64) -> bool) -> f64 {
    let (fx, fy) = (FloatSteps::new(x), FloatSteps::new(y));
    let hits = (0..n)
        .filter(|_| {
            let u: f64 = rng.gen();
            pred(fx.at(u), fy.at(u))
        })
        .count();
    hits as f64 / n as f64
}

/// Whether `|estimate − p| ≤ 3` standard errors of an `n`-sample mean.
pub fn within_three_se(estimate: f64, p: f64, n: usize) -> bool {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (estimate - p).abs() <= 3.0 * se + 1e-12
}

fn cdf(d: &Distribution, t: f64) -> f64 {
    d.atoms().iter().filter(|a| a.outcome.to_f64().unwrap() <= t).map(|a| a.mass.to_f64()).sum()
}

/// Smallest `h = j / 2^bits` satisfying the Lévy band, checked by brute
/// force at every outcome shifted by `±h` and nudged to both sides. The
/// band only widens with `h`, so the grid is bisected.
pub fn levy_grid(f: &Distribution, g: &Distribution, bits: u32) -> f64 {
    let steps = 1u64 << bits;
    let points: Vec<f64> = f.atoms().iter().chain(g.atoms()).map(|a| a.outcome.to_f64().unwrap()).collect();
    let tiny = 1e-9;
    let holds = |h: f64| {
        points.iter().flat_map(|&p| [p - h, p, p + h]).flat_map(|t| [t - tiny, t, t + tiny]).all(|t| {
            cdf(f, t - h) - h <= cdf(g, t) + tiny && cdf(g, t) <= cdf(f, t + h) + h + tiny
        })
    };
    let (mut lo, mut hi) = (0u64, steps);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if holds(mid as f64 / steps as f64) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo as f64 / steps as f64
}
