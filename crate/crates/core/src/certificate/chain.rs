//! Permutation chains over equiprobable cells.
//!
//! When `X` and `Y` live on the same `N` cells of measure `1/N`, `Y` is a
//! permutation `π̂` of `X`'s cell values. Relabelling states shows
//! `Ψ(π̂ᵗX, π̂ᵗ⁺¹X) = Ψ(X, π̂X)` for every `t`, and `π̂` has finite order.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::event::Event;
use crate::rv::SimpleRV;
use crate::scalar::{rational_str, Scalar};

/// One entry of a step lottery: the pair `(x, y)` occurs on `count` of the
/// `N` cells, i.e. with probability `count / N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PairCount {
    #[serde(with = "rational_str")]
    pub x_val: BigRational,
    #[serde(with = "rational_str")]
    pub y_val: BigRational,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationChainCertificate {
    pub n_cells: usize,
    pub cells: Vec<Event>,
    #[serde(with = "rational_list")]
    pub x_values: Vec<BigRational>,
    #[serde(with = "rational_list")]
    pub y_values: Vec<BigRational>,
    /// Zero-based; `y_values[i] = x_values[pi_hat[i]]`.
    pub pi_hat: Vec<usize>,
    #[serde(serialize_with = "biguint_str", deserialize_with = "biguint_from_str")]
    pub order_m: BigUint,
    pub step_lottery: Vec<PairCount>,
}

pub(crate) mod rational_list {
    use super::*;
    use crate::scalar::{format_rational, parse_rational};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter().map(|s| parse_rational(s).map_err(serde::de::Error::custom)).collect()
    }
}

fn biguint_str<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn biguint_from_str<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
    let raw = String::deserialize(d)?;
    raw.parse().map_err(serde::de::Error::custom)
}

/// Matches `y_values` against `x_values`: a cell keeps its own index when
/// the values already agree, remaining cells are matched to the unused
/// `x` cells of equal value in index order.
pub fn match_permutation(x_values: &[BigRational], y_values: &[BigRational]) -> Option<Vec<usize>> {
    if x_values.len() != y_values.len() {
        return None;
    }
    let n = x_values.len();
    let mut pi = vec![usize::MAX; n];
    let mut free: HashMap<&BigRational, VecDeque<usize>> = HashMap::new();
    for i in 0..n {
        if x_values[i] == y_values[i] {
            pi[i] = i;
        } else {
            free.entry(&x_values[i]).or_default().push_back(i);
        }
    }
    for i in 0..n {
        if pi[i] == usize::MAX {
            pi[i] = free.get_mut(&y_values[i])?.pop_front()?;
        }
    }
    Some(pi)
}

/// Whether `pi` is a permutation of `0..pi.len()`.
pub fn is_bijection(pi: &[usize]) -> bool {
    let mut seen = vec![false; pi.len()];
    pi.iter().all(|&j| j < pi.len() && !std::mem::replace(&mut seen[j], true))
}

/// Cycle lengths of a permutation, in order of each cycle's smallest element.
pub fn cycle_lengths(pi: &[usize]) -> Vec<usize> {
    debug_assert!(is_bijection(pi));
    let mut seen = vec![false; pi.len()];
    let mut out = Vec::new();
    for start in 0..pi.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = pi[i];
            len += 1;
        }
        out.push(len);
    }
    out
}

/// Order of the permutation: the lcm of its cycle lengths.
pub fn permutation_order(pi: &[usize]) -> BigUint {
    cycle_lengths(pi).into_iter().fold(BigUint::one(), |acc, len| acc.lcm(&BigUint::from(len)))
}

/// `m ≤ n!`, computed without forming `n!` once it exceeds `m`.
pub fn at_most_factorial(m: &BigUint, n: usize) -> bool {
    let mut fact = BigUint::one();
    for i in 2..=n {
        if &fact >= m {
            return true;
        }
        fact *= BigUint::from(i);
    }
    m <= &fact
}

/// `Z_{t+1}[i] = Z_t[pi[i]]`.
pub fn apply_step(values: &[BigRational], pi: &[usize]) -> Vec<BigRational> {
    pi.iter().map(|&j| values[j].clone()).collect()
}

/// Canonical multiset `{(a[i], b[i])}`.
pub fn pair_multiset(a: &[BigRational], b: &[BigRational]) -> Vec<PairCount> {
    let mut counts: BTreeMap<(&BigRational, &BigRational), u64> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *counts.entry((x, y)).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|((x, y), count)| PairCount { x_val: x.clone(), y_val: y.clone(), count })
        .collect()
}

impl PermutationChainCertificate {
    /// Assembles the chain for values laid out on the given cells.
    pub fn from_cells(
        cells: Vec<Event>,
        x_values: Vec<BigRational>,
        y_values: Vec<BigRational>,
    ) -> Result<Self> {
        let pi_hat = match_permutation(&x_values, &y_values)
            .ok_or_else(|| Error::NotCase1("the two value multisets to coincide".into()))?;
        let order_m = permutation_order(&pi_hat);
        let step_lottery = pair_multiset(&x_values, &y_values);
        Ok(PermutationChainCertificate {
            n_cells: cells.len(),
            cells,
            x_values,
            y_values,
            pi_hat,
            order_m,
            step_lottery,
        })
    }
}

/// Case 1: `x` and `y` are defined on the same `N` cells, each of measure
/// `1/N`, and `y`'s values are a rearrangement of `x`'s.
pub fn build_case1(x: &SimpleRV, y: &SimpleRV) -> Result<PermutationChainCertificate> {
    let xs = x.sorted_by_position();
    let ys = y.sorted_by_position();
    let n = xs.cells().len();
    if ys.cells().len() != n {
        return Err(Error::NotCase1("both variables to have the same number of cells".into()));
    }
    let unit = Scalar::frac(1, n as i64);
    for (cx, cy) in xs.cells().iter().zip(ys.cells()) {
        if cx.event != cy.event {
            return Err(Error::NotCase1("both variables to share the same cells".into()));
        }
        if cx.event.measure() != unit {
            return Err(Error::NotCase1(format!("every cell to have measure 1/{n}")));
        }
    }
    PermutationChainCertificate::from_cells(
        xs.cells().iter().map(|c| c.event.clone()).collect(),
        xs.cells().iter().map(|c| c.outcome.clone()).collect(),
        ys.cells().iter().map(|c| c.outcome.clone()).collect(),
    )
}
