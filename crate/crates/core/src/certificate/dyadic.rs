//! Case 3: some cell of the common refinement has irrational measure.
//!
//! For each `k` in a window, every refinement cell `T_j` is cut into
//! `ν(T_j, k)` full cells of measure `2^-k` plus one remainder of measure
//! at most `2^-k`. `X^k`, `Y^k` copy `X`, `Y` on full cells and take a
//! fresh sentinel `c` on remainders. Surplus full cells are then switched
//! to `c` until every outcome has equal mass under `X̄^k` and `Ȳ^k`, which
//! are equally distributed with dyadic masses and hence certified by the
//! Case 2 construction with `N = 2^k`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::refinement::{build_case2_with_denominator, outcome_refinement, RefinementCertificate};
use crate::error::{Error, Result};
use crate::event::Event;
use crate::rv::{Cell, OutcomeBounds, RefinementCell, SimpleRV};
use crate::scalar::{format_rational, nu, rational_str, Scalar};

/// Default width of the certified window beyond `k_min`.
pub const DEFAULT_K_SPAN: u32 = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCell {
    /// Index of the refinement cell `T_j` this cell belongs to.
    pub owner: usize,
    /// Full cells have measure exactly `2^-k`; the one non-full cell per
    /// owner is its remainder.
    pub full: bool,
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicLevel {
    pub k: u32,
    /// `ν(T_j, k)` per refinement cell.
    pub nu: Vec<u64>,
    /// The partition `T^k`: for each owner in order, its full cells left to
    /// right followed by its remainder.
    pub cells: Vec<DyadicCell>,
    pub x_k: SimpleRV,
    pub y_k: SimpleRV,
    /// `P(X^k = x_i) − P(Y^k = x_i)` per original outcome.
    pub imbalance: Vec<Scalar>,
    /// Indices into `cells` switched to the sentinel in `X^k` / `Y^k`.
    pub x_flips: Vec<usize>,
    pub y_flips: Vec<usize>,
    pub x_bar: SimpleRV,
    pub y_bar: SimpleRV,
    /// `m / 2^k` and `m² / 2^k` for `m` refinement cells.
    pub imbalance_bound: Scalar,
    pub disagreement_bound: Scalar,
    pub embedded: RefinementCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicCertificate {
    pub refinement: Vec<RefinementCell>,
    #[serde(with = "super::chain::rational_list")]
    pub outcomes: Vec<BigRational>,
    #[serde(with = "rational_str")]
    pub sentinel: BigRational,
    pub k_min: u32,
    pub k_max: u32,
    pub levels: Vec<DyadicLevel>,
}

/// Midpoint of the widest gap between consecutive sorted outcomes in
/// `[lo, hi]`, boundary gaps included; the first widest gap wins ties.
pub fn choose_sentinel(outcomes: &[BigRational], bounds: &OutcomeBounds) -> BigRational {
    let mut points = Vec::with_capacity(outcomes.len() + 2);
    points.push(bounds.lo().clone());
    points.extend(outcomes.iter().cloned());
    points.push(bounds.hi().clone());
    points.sort();
    let mut best = (&points[0], &points[1]);
    for w in points.windows(2) {
        if &w[1] - &w[0] > best.1 - best.0 {
            best = (&w[0], &w[1]);
        }
    }
    (best.0 + best.1) / BigRational::from_integer(2.into())
}

/// Smallest `k ≥ 1` with `2^-k` below the smallest positive mass.
pub fn smallest_k(masses: &[Scalar]) -> u32 {
    let min = masses.iter().min().cloned().unwrap_or_else(Scalar::one);
    let mut k = 1;
    while Scalar::dyadic(k) >= min {
        k += 1;
    }
    k
}

pub(crate) fn to_u64(n: &BigInt) -> u64 {
    n.to_u64().expect("cell count fits in u64")
}

/// Builds a simple random variable from `(event, outcome)` pieces, merging
/// equal outcomes.
pub(crate) fn assemble(bounds: &OutcomeBounds, pieces: impl IntoIterator<Item = (Event, BigRational)>) -> Result<SimpleRV> {
    let mut groups: BTreeMap<BigRational, Vec<Event>> = BTreeMap::new();
    for (event, outcome) in pieces {
        groups.entry(outcome).or_default().push(event);
    }
    let cells = groups
        .into_iter()
        .map(|(outcome, events)| Cell { event: Event::union_all(&events), outcome })
        .collect();
    SimpleRV::new(bounds.clone(), cells)
}

/// Cuts every refinement cell into `ν` full cells of measure `2^-k` and one
/// remainder.
pub fn dyadic_partition(refinement: &[RefinementCell], k: u32) -> Result<(Vec<u64>, Vec<DyadicCell>)> {
    let unit = Scalar::dyadic(k);
    let mut nus = Vec::with_capacity(refinement.len());
    let mut cells = Vec::new();
    for (owner, t) in refinement.iter().enumerate() {
        let count = to_u64(&nu(&t.measure(), k)?);
        let (pieces, rest) = t.event.chop(&unit, count as usize)?;
        nus.push(count);
        cells.extend(pieces.into_iter().map(|event| DyadicCell { owner, full: true, event }));
        cells.push(DyadicCell { owner, full: false, event: rest });
    }
    Ok((nus, cells))
}

/// Values of `X^k` (or `Y^k` with `use_y`) on each partition cell.
pub(crate) fn level_values(
    refinement: &[RefinementCell],
    cells: &[DyadicCell],
    sentinel: &BigRational,
    use_y: bool,
) -> Vec<BigRational> {
    cells
        .iter()
        .map(|c| match (c.full, use_y) {
            (false, _) => sentinel.clone(),
            (true, false) => refinement[c.owner].x_val.clone(),
            (true, true) => refinement[c.owner].y_val.clone(),
        })
        .collect()
}

fn count_full(values: &[BigRational], cells: &[DyadicCell], outcome: &BigRational) -> u64 {
    cells.iter().zip(values).filter(|(c, v)| c.full && *v == outcome).count() as u64
}

fn build_level(
    bounds: &OutcomeBounds,
    refinement: &[RefinementCell],
    outcomes: &[BigRational],
    sentinel: &BigRational,
    k: u32,
) -> Result<DyadicLevel> {
    let (nus, cells) = dyadic_partition(refinement, k)?;
    let xv = level_values(refinement, &cells, sentinel, false);
    let yv = level_values(refinement, &cells, sentinel, true);
    let unit = BigRational::new(BigInt::one(), BigInt::one() << k);

    let mut x_bar_values = xv.clone();
    let mut y_bar_values = yv.clone();
    let mut x_flips = Vec::new();
    let mut y_flips = Vec::new();
    let mut imbalance = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let nx = count_full(&xv, &cells, outcome);
        let ny = count_full(&yv, &cells, outcome);
        imbalance.push(Scalar::from_rational(&unit * BigRational::from_integer((nx as i64 - ny as i64).into())));
        let (values, bar, flips, surplus) = if nx >= ny {
            (&xv, &mut x_bar_values, &mut x_flips, nx - ny)
        } else {
            (&yv, &mut y_bar_values, &mut y_flips, ny - nx)
        };
        let chosen: Vec<usize> = (0..cells.len())
            .filter(|&i| cells[i].full && &values[i] == outcome)
            .take(surplus as usize)
            .collect();
        if (chosen.len() as u64) < surplus {
            return Err(Error::InsufficientCells { outcome: format_rational(outcome), k });
        }
        for i in chosen {
            bar[i] = sentinel.clone();
            flips.push(i);
        }
    }
    x_flips.sort_unstable();
    y_flips.sort_unstable();

    let events = || cells.iter().map(|c| c.event.clone());
    let x_k = assemble(bounds, events().zip(xv))?;
    let y_k = assemble(bounds, events().zip(yv))?;
    let x_bar = assemble(bounds, events().zip(x_bar_values))?;
    let y_bar = assemble(bounds, events().zip(y_bar_values))?;
    let embedded = build_case2_with_denominator(&x_bar, &y_bar, Some(1u64 << k))?;
    let m = BigRational::from_integer((refinement.len() as i64).into());
    Ok(DyadicLevel {
        k,
        nu: nus,
        cells,
        x_k,
        y_k,
        imbalance,
        x_flips,
        y_flips,
        x_bar,
        y_bar,
        imbalance_bound: Scalar::from_rational(&m * &unit),
        disagreement_bound: Scalar::from_rational(&m * &m * &unit),
        embedded,
    })
}

/// Builds the dyadic certificate for `k_min ..= k_max`.
///
/// `x` and `y` must be equally distributed; `2^-k_min` must lie below every
/// refinement-cell measure.
pub fn build_case3(x: &SimpleRV, y: &SimpleRV, k_min: u32, k_max: u32) -> Result<DyadicCertificate> {
    if let Some((outcome, left, right)) = crate::rv::first_mismatch(&x.distribution(), &y.distribution()) {
        return Err(Error::DistributionsDiffer {
            outcome: format_rational(&outcome),
            left: left.to_string(),
            right: right.to_string(),
        });
    }
    if k_max < k_min {
        return Err(Error::EmptyKRange { k_min, k_max });
    }
    let refinement = outcome_refinement(x, y);
    let masses: Vec<Scalar> = refinement.iter().map(|c| c.measure()).collect();
    let min_mass = masses.iter().min().cloned().unwrap_or_else(Scalar::one);
    if Scalar::dyadic(k_min) >= min_mass {
        return Err(Error::KTooSmall { k_min, min_mass: min_mass.to_string() });
    }
    let outcomes = x.outcomes();
    let sentinel = choose_sentinel(&outcomes, x.bounds());
    let levels = (k_min..=k_max)
        .map(|k| build_level(x.bounds(), &refinement, &outcomes, &sentinel, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(DyadicCertificate { refinement, outcomes, sentinel, k_min, k_max, levels })
}
