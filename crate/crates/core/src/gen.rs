//! Seeded random pairs for tests and the command-line corpus generator.
//!
//! Every generator draws from a caller-supplied RNG, so a fixed seed gives
//! the same pair on every platform when used with [`rng_from_seed`].

use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificate::{classify_case, refinement::outcome_refinement, Case};
use crate::event::Event;
use crate::rv::{quantile_rv_in, Cell, Distribution, OutcomeBounds, SimpleRV};
use crate::scalar::{q, Scalar};

/// Outcomes used by the equally distributed generators.
pub const VALUE_SET: [i64; 5] = [10, 20, 30, 40, 50];

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Outcome bounds shared by all generated variables.
pub fn default_bounds() -> OutcomeBounds {
    OutcomeBounds::new(q(0, 1), q(100, 1)).expect("0 < 100")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    /// Same equiprobable cells, permuted values.
    Case1,
    /// Rational masses, different arrangements.
    Rational,
    /// Masses in ℚ(√2) with at least one irrational refinement cell.
    Surd,
    /// `X` strictly dominates `Y` in the first-order sense.
    Fosd,
}

pub fn generate<R: Rng>(kind: PairKind, rng: &mut R) -> (SimpleRV, SimpleRV) {
    match kind {
        PairKind::Case1 => case1_pair(rng),
        PairKind::Rational => rational_pair(rng),
        PairKind::Surd => surd_pair(rng),
        PairKind::Fosd => fosd_pair(rng),
    }
}

/// Lays the blocks out left to right.
fn lay_out(bounds: &OutcomeBounds, blocks: &[(BigRational, Scalar)]) -> SimpleRV {
    let mut lo = Scalar::zero();
    let mut cells = Vec::with_capacity(blocks.len());
    for (outcome, mass) in blocks {
        let hi = &lo + mass;
        cells.push(Cell { event: Event::interval(lo, hi.clone()).expect("blocks stay in [0,1)"), outcome: outcome.clone() });
        lo = hi;
    }
    SimpleRV::new(bounds.clone(), cells).expect("blocks partition [0,1)")
}

/// `ω ↦ x((ω + s) mod 1)` for `s ∈ [0,1)`.
pub fn rotate(x: &SimpleRV, s: &Scalar) -> SimpleRV {
    let one = Scalar::one();
    let cells = x
        .cells()
        .iter()
        .map(|cell| {
            let pieces = cell.event.intervals().iter().flat_map(|iv| {
                let (lo, hi) = (iv.lo() - s, iv.hi() - s);
                if !lo.is_negative() {
                    vec![Event::interval(lo, hi)]
                } else if !hi.is_positive() {
                    vec![Event::interval(&lo + &one, &hi + &one)]
                } else {
                    vec![Event::interval(Scalar::zero(), hi), Event::interval(&lo + &one, one.clone())]
                }
            });
            let events: Vec<Event> = pieces.map(|e| e.expect("rotation stays in [0,1)")).collect();
            Cell { event: Event::union_all(&events), outcome: cell.outcome.clone() }
        })
        .collect();
    SimpleRV::new(x.bounds().clone(), cells).expect("rotation preserves the partition")
}

/// `n ≤ 8` cells of measure `1/n`, values from [`VALUE_SET`], `Y` a random
/// permutation of `X`'s cell values.
pub fn case1_pair<R: Rng>(rng: &mut R) -> (SimpleRV, SimpleRV) {
    let n = rng.gen_range(1..=8i64);
    let xs: Vec<i64> = (0..n).map(|_| *VALUE_SET.choose(rng).expect("nonempty")).collect();
    let mut ys = xs.clone();
    ys.shuffle(rng);
    let build = |values: &[i64]| {
        let steps = values
            .iter()
            .enumerate()
            .map(|(i, v)| (Scalar::frac(i as i64, n), Scalar::frac(i as i64 + 1, n), q(*v, 1)));
        SimpleRV::from_steps(default_bounds(), steps).expect("equiprobable cells")
    };
    (build(&xs), build(&ys))
}

/// Random composition of `total` into `parts` positive integers.
fn composition<R: Rng>(rng: &mut R, total: i64, parts: usize) -> Vec<i64> {
    let mut cuts: Vec<i64> = (1..total).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(parts - 1).collect();
    cuts.push(0);
    cuts.push(total);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| w[1] - w[0]).collect()
}

fn distinct_values<R: Rng>(rng: &mut R, n: usize) -> Vec<BigRational> {
    VALUE_SET.choose_multiple(rng, n).map(|v| q(*v, 1)).collect()
}

/// `n ≤ 5` outcomes with masses `c_i / d`, `d ≤ 12`. `X` lays the outcome
/// blocks out in a random order; `Y` deals the `d` unit slots of measure
/// `1/d` to the outcomes in a random order.
pub fn rational_pair<R: Rng>(rng: &mut R) -> (SimpleRV, SimpleRV) {
    let d = rng.gen_range(1..=12i64);
    let n = rng.gen_range(1..=d.min(5)) as usize;
    let values = distinct_values(rng, n);
    let counts = composition(rng, d, n);
    let mut blocks: Vec<(BigRational, Scalar)> =
        values.iter().cloned().zip(counts.iter().map(|c| Scalar::frac(*c, d))).collect();
    blocks.shuffle(rng);
    let x = lay_out(&default_bounds(), &blocks);
    let mut slots: Vec<BigRational> =
        values.iter().zip(&counts).flat_map(|(v, c)| std::iter::repeat_n(v.clone(), *c as usize)).collect();
    slots.shuffle(rng);
    let unit = Scalar::frac(1, d);
    let y = lay_out(&default_bounds(), &slots.into_iter().map(|v| (v, unit.clone())).collect::<Vec<_>>());
    (x, y)
}

/// Smallest measure of the outcome-level refinement.
fn min_refinement_mass(x: &SimpleRV, y: &SimpleRV) -> Scalar {
    outcome_refinement(x, y).iter().map(|c| c.measure()).min().unwrap_or_else(Scalar::one)
}

/// Two or three outcomes, masses rational plus or minus `(√2 − 1)/8`.
/// `Y` is a rearrangement of `X`'s blocks or a rotation of `X`. Draws are
/// repeated until some refinement cell is irrational and every refinement
/// cell exceeds `1/8`, which keeps the first admissible dyadic level at 3.
pub fn surd_pair<R: Rng>(rng: &mut R) -> (SimpleRV, SimpleRV) {
    let delta = (Scalar::sqrt2() - Scalar::one()).mul_rational(&q(1, 8));
    let floor = Scalar::frac(1, 8);
    loop {
        let n = rng.gen_range(2..=3usize);
        let d = rng.gen_range(n as i64..=8);
        let values = distinct_values(rng, n);
        let mut masses: Vec<Scalar> = composition(rng, d, n).into_iter().map(|c| Scalar::frac(c, d)).collect();
        let (up, down) = (rng.gen_range(0..n), rng.gen_range(0..n - 1));
        let down = if down >= up { down + 1 } else { down };
        masses[up] += &delta;
        masses[down] -= &delta;
        if masses.iter().any(|m| m <= &floor) {
            continue;
        }
        let mut blocks: Vec<(BigRational, Scalar)> = values.into_iter().zip(masses).collect();
        blocks.shuffle(rng);
        let x = lay_out(&default_bounds(), &blocks);
        let y = if rng.gen_bool(0.5) {
            let mut other = blocks.clone();
            other.shuffle(rng);
            lay_out(&default_bounds(), &other)
        } else {
            let s = if rng.gen_bool(0.5) {
                Scalar::frac(rng.gen_range(1..8), 8)
            } else {
                let a = rng.gen_range(1..=3);
                (Scalar::sqrt2() - Scalar::one()).mul_rational(&q(a, 1)) - Scalar::from_integer(a - 1)
            };
            if !(s.is_positive() && s < Scalar::one()) {
                continue;
            }
            rotate(&x, &s)
        };
        let ok = classify_case(&x, &y).is_ok_and(|c| c == Case::Case3) && min_refinement_mass(&x, &y) > floor;
        if ok {
            return (x, y);
        }
    }
}

/// `Y` has a random rational law on `{0, 10, …, 100}` laid out in a random
/// block order; `X` is the quantile variable of the law obtained by moving
/// part of one atom's mass to a strictly larger outcome.
pub fn fosd_pair<R: Rng>(rng: &mut R) -> (SimpleRV, SimpleRV) {
    let grid: Vec<i64> = (0..=10).map(|i| i * 10).collect();
    let d = rng.gen_range(2..=12i64);
    let n = rng.gen_range(1..=d.min(4)) as usize;
    let mut values: Vec<i64> = grid[..10].choose_multiple(rng, n).copied().collect();
    values.sort_unstable();
    let counts = composition(rng, d, n);
    let g_pairs: Vec<(BigRational, Scalar)> =
        values.iter().zip(&counts).map(|(v, c)| (q(*v, 1), Scalar::frac(*c, d))).collect();

    let i = rng.gen_range(0..n);
    let moved = rng.gen_range(1..=counts[i]);
    let target = **grid.iter().filter(|v| **v > values[i]).collect::<Vec<_>>().choose(rng).expect("grid extends above");
    let mut f_pairs = g_pairs.clone();
    f_pairs[i].1 -= &Scalar::frac(moved, d);
    f_pairs.push((q(target, 1), Scalar::frac(moved, d)));
    f_pairs.retain(|(_, m)| m.is_positive());

    let f = Distribution::from_pairs(f_pairs).expect("moved mass keeps the total");
    let x = quantile_rv_in(&f, &default_bounds()).expect("outcomes lie in [0,100]");
    let mut blocks = g_pairs;
    blocks.shuffle(rng);
    (x, lay_out(&default_bounds(), &blocks))
}

/// A random variable with up to `max_cells` interval cells whose endpoints
/// are rational, or in ℚ(√2) when `surd` is set, and outcomes drawn from
/// `{0, 5, …, 100}`.
pub fn random_rv<R: Rng>(rng: &mut R, max_cells: usize, surd: bool) -> SimpleRV {
    let n = rng.gen_range(1..=max_cells);
    let mut points: Vec<Scalar> = Vec::with_capacity(n + 1);
    while points.len() < n - 1 {
        let r = Scalar::frac(rng.gen_range(1..64), 64);
        let p = if surd && rng.gen_bool(0.5) {
            r + (Scalar::sqrt2() - Scalar::one()).mul_rational(&q(rng.gen_range(-6..=6), 16))
        } else {
            r
        };
        if p.is_positive() && p < Scalar::one() && !points.contains(&p) {
            points.push(p);
        }
    }
    points.push(Scalar::zero());
    points.push(Scalar::one());
    points.sort();
    let steps: Vec<_> = points
        .windows(2)
        .map(|w| (w[0].clone(), w[1].clone(), q(5 * rng.gen_range(0..=20), 1)))
        .collect();
    SimpleRV::from_steps(default_bounds(), steps).expect("sorted endpoints partition [0,1)")
}
