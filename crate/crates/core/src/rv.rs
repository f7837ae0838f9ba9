//! Simple random variables on `([0,1), Lebesgue)` and their distributions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::event::{Event, Interval};
use crate::scalar::{format_rational, rational_str, Scalar};

/// The outcome range `[lo, hi]`, `lo < hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBounds")]
pub struct OutcomeBounds {
    #[serde(with = "rational_str")]
    lo: BigRational,
    #[serde(with = "rational_str")]
    hi: BigRational,
}

#[derive(Deserialize)]
struct RawBounds {
    #[serde(with = "rational_str")]
    lo: BigRational,
    #[serde(with = "rational_str")]
    hi: BigRational,
}

impl TryFrom<RawBounds> for OutcomeBounds {
    type Error = Error;
    fn try_from(raw: RawBounds) -> Result<Self> {
        OutcomeBounds::new(raw.lo, raw.hi)
    }
}

impl OutcomeBounds {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self> {
        if lo >= hi {
            return Err(Error::BadBounds { lo: format_rational(&lo), hi: format_rational(&hi) });
        }
        Ok(OutcomeBounds { lo, hi })
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// Smallest bounds holding every atom of the given distributions; widened
    /// by one unit above when all outcomes coincide.
    pub fn enclosing<'a>(dists: impl IntoIterator<Item = &'a Distribution>) -> Self {
        let mut outcomes = dists.into_iter().flat_map(|d| d.atoms.iter().map(|a| &a.outcome));
        let first = outcomes.next().cloned().unwrap_or_else(BigRational::zero);
        let (lo, hi) = outcomes.fold((first.clone(), first), |(lo, hi), x| {
            (if x < &lo { x.clone() } else { lo }, if x > &hi { x.clone() } else { hi })
        });
        if lo == hi {
            let hi = &hi + BigRational::from_integer(1.into());
            OutcomeBounds { lo, hi }
        } else {
            OutcomeBounds { lo, hi }
        }
    }
}

/// One cell of a simple random variable: the variable equals `outcome` on `event`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub event: Event,
    #[serde(with = "rational_str")]
    pub outcome: BigRational,
}

/// A finite-valued random variable: a partition of `[0,1)` into events of
/// positive measure, each mapped to a rational outcome inside the bounds.
///
/// Several cells may carry the same outcome; [`SimpleRV::canonicalize`]
/// merges them.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRV")]
pub struct SimpleRV {
    bounds: OutcomeBounds,
    cells: Vec<Cell>,
}

#[derive(Deserialize)]
struct RawRV {
    bounds: OutcomeBounds,
    cells: Vec<Cell>,
}

impl TryFrom<RawRV> for SimpleRV {
    type Error = Error;
    fn try_from(raw: RawRV) -> Result<Self> {
        SimpleRV::new(raw.bounds, raw.cells)
    }
}

impl SimpleRV {
    pub fn new(bounds: OutcomeBounds, cells: Vec<Cell>) -> Result<Self> {
        let mut total = Scalar::zero();
        for (index, cell) in cells.iter().enumerate() {
            let m = cell.event.measure();
            if !m.is_positive() {
                return Err(Error::EmptyCell { index });
            }
            if !bounds.contains(&cell.outcome) {
                return Err(Error::OutcomeOutOfBounds {
                    outcome: format_rational(&cell.outcome),
                    lo: format_rational(&bounds.lo),
                    hi: format_rational(&bounds.hi),
                });
            }
            total += &m;
        }
        // Positive-measure cells with total 1 and full union are disjoint.
        if total != Scalar::one() || !Event::union_all(cells.iter().map(|c| &c.event)).is_full() {
            return Err(Error::NotAPartition(total.to_string()));
        }
        Ok(SimpleRV { bounds, cells })
    }

    /// Builds a variable from `(lo, hi, outcome)` interval steps.
    pub fn from_steps(
        bounds: OutcomeBounds,
        steps: impl IntoIterator<Item = (Scalar, Scalar, BigRational)>,
    ) -> Result<Self> {
        let cells = steps
            .into_iter()
            .map(|(lo, hi, outcome)| Ok(Cell { event: Event::interval(lo, hi)?, outcome }))
            .collect::<Result<Vec<_>>>()?;
        SimpleRV::new(bounds, cells)
    }

    /// The constant variable.
    pub fn constant(bounds: OutcomeBounds, outcome: BigRational) -> Result<Self> {
        SimpleRV::new(bounds, vec![Cell { event: Event::full(), outcome }])
    }

    pub fn bounds(&self) -> &OutcomeBounds {
        &self.bounds
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// Value at a state of `[0, 1)`.
    pub fn value_at(&self, point: &Scalar) -> Option<&BigRational> {
        self.cells.iter().find(|c| c.event.contains(point)).map(|c| &c.outcome)
    }

    /// Sorted distinct outcomes.
    pub fn outcomes(&self) -> Vec<BigRational> {
        let mut v: Vec<BigRational> = self.cells.iter().map(|c| c.outcome.clone()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Merges cells with equal outcomes and sorts by outcome, giving the
    /// outcome-level partition `{X = x_i}`.
    pub fn canonicalize(&self) -> SimpleRV {
        let mut groups: BTreeMap<&BigRational, Vec<&Event>> = BTreeMap::new();
        for c in &self.cells {
            groups.entry(&c.outcome).or_default().push(&c.event);
        }
        let cells = groups
            .into_iter()
            .map(|(outcome, events)| Cell { event: Event::union_all(events), outcome: outcome.clone() })
            .collect();
        SimpleRV { bounds: self.bounds.clone(), cells }
    }

    /// Same variable with cells ordered by their leftmost point.
    pub fn sorted_by_position(&self) -> SimpleRV {
        let mut cells = self.cells.clone();
        cells.sort_by(|a, b| a.event.start().cmp(&b.event.start()));
        SimpleRV { bounds: self.bounds.clone(), cells }
    }

    /// Replaces the bounds (outcomes must still fit).
    pub fn with_bounds(&self, bounds: OutcomeBounds) -> Result<SimpleRV> {
        SimpleRV::new(bounds, self.cells.clone())
    }

    pub fn distribution(&self) -> Distribution {
        let mut masses: BTreeMap<&BigRational, Scalar> = BTreeMap::new();
        for c in &self.cells {
            *masses.entry(&c.outcome).or_default() += &c.event.measure();
        }
        Distribution {
            atoms: masses
                .into_iter()
                .filter(|(_, m)| m.is_positive())
                .map(|(outcome, mass)| Atom { outcome: outcome.clone(), mass })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "rational_str")]
    pub outcome: BigRational,
    pub mass: Scalar,
}

/// A finitely supported law: outcomes strictly increasing, positive masses
/// summing to one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDistribution")]
pub struct Distribution {
    atoms: Vec<Atom>,
}

#[derive(Deserialize)]
struct RawDistribution {
    atoms: Vec<Atom>,
}

impl TryFrom<RawDistribution> for Distribution {
    type Error = Error;
    fn try_from(raw: RawDistribution) -> Result<Self> {
        Distribution::new(raw.atoms)
    }
}

impl Distribution {
    /// Sorts the atoms and merges repeated outcomes.
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let mut merged: BTreeMap<BigRational, Scalar> = BTreeMap::new();
        for a in atoms {
            if !a.mass.is_positive() {
                return Err(Error::BadDistribution);
            }
            *merged.entry(a.outcome).or_default() += &a.mass;
        }
        let total: Scalar = merged.values().sum();
        if total != Scalar::one() {
            return Err(Error::BadDistribution);
        }
        Ok(Distribution {
            atoms: merged.into_iter().map(|(outcome, mass)| Atom { outcome, mass }).collect(),
        })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (BigRational, Scalar)>) -> Result<Self> {
        Distribution::new(pairs.into_iter().map(|(outcome, mass)| Atom { outcome, mass }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mass_of(&self, outcome: &BigRational) -> Scalar {
        self.atoms
            .binary_search_by(|a| a.outcome.cmp(outcome))
            .map(|i| self.atoms[i].mass.clone())
            .unwrap_or_default()
    }

    /// `F(t) = P(X ≤ t)`.
    pub fn cdf(&self, t: &BigRational) -> Scalar {
        self.atoms.iter().take_while(|a| &a.outcome <= t).map(|a| &a.mass).sum()
    }

    /// Cumulative masses `F(x_1), …, F(x_n)`.
    pub fn cumulative(&self) -> Vec<Scalar> {
        let mut acc = Scalar::zero();
        self.atoms
            .iter()
            .map(|a| {
                acc += &a.mass;
                acc.clone()
            })
            .collect()
    }
}

/// One cell `S_i ∩ S'_j` of positive measure of the common refinement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RefinementCell {
    pub event: Event,
    #[serde(with = "rational_str")]
    pub x_val: BigRational,
    #[serde(with = "rational_str")]
    pub y_val: BigRational,
}

impl RefinementCell {
    pub fn measure(&self) -> Scalar {
        self.event.measure()
    }
}

pub fn distribution(x: &SimpleRV) -> Distribution {
    x.distribution()
}

pub fn equal_in_distribution(x: &SimpleRV, y: &SimpleRV) -> bool {
    x.distribution() == y.distribution()
}

/// First mismatching atom between two distributions, as `(outcome, left, right)`.
pub fn first_mismatch(f: &Distribution, g: &Distribution) -> Option<(BigRational, Scalar, Scalar)> {
    let mut outcomes: Vec<&BigRational> =
        f.atoms.iter().chain(g.atoms.iter()).map(|a| &a.outcome).collect();
    outcomes.sort();
    outcomes.dedup();
    outcomes.into_iter().find_map(|x| {
        let (l, r) = (f.mass_of(x), g.mass_of(x));
        (l != r).then(|| (x.clone(), l, r))
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FosdOrder {
    /// First argument strictly dominates the second.
    StrictDom,
    Equal,
    /// First argument is strictly dominated by the second.
    Dominated,
    Incomparable,
}

/// First-order stochastic dominance between two laws, decided exactly at
/// every outcome breakpoint.
pub fn fosd_compare_dist(f: &Distribution, g: &Distribution) -> FosdOrder {
    let mut points: Vec<&BigRational> =
        f.atoms.iter().chain(g.atoms.iter()).map(|a| &a.outcome).collect();
    points.sort();
    points.dedup();
    let (mut below, mut above) = (false, false);
    for t in points {
        match f.cdf(t).cmp(&g.cdf(t)) {
            Ordering::Less => below = true,
            Ordering::Greater => above = true,
            Ordering::Equal => {}
        }
    }
    match (below, above) {
        (false, false) => FosdOrder::Equal,
        (true, false) => FosdOrder::StrictDom,
        (false, true) => FosdOrder::Dominated,
        (true, true) => FosdOrder::Incomparable,
    }
}

pub fn fosd_compare(x: &SimpleRV, y: &SimpleRV) -> FosdOrder {
    fosd_compare_dist(&x.distribution(), &y.distribution())
}

/// All positive-measure intersections of a cell of `x` with a cell of `y`,
/// ordered by `x` cell then `y` cell.
pub fn common_refinement(x: &SimpleRV, y: &SimpleRV) -> Vec<RefinementCell> {
    let mut out = Vec::new();
    for cx in &x.cells {
        for cy in &y.cells {
            let event = cx.event.intersect(&cy.event);
            if !event.is_empty() {
                out.push(RefinementCell {
                    event,
                    x_val: cx.outcome.clone(),
                    y_val: cy.outcome.clone(),
                });
            }
        }
    }
    out
}

/// Exact `P(|X − Y| ≥ eps)`.
pub fn prob_diff_exceeds(x: &SimpleRV, y: &SimpleRV, eps: &BigRational) -> Result<Scalar> {
    if !eps.is_positive() {
        return Err(Error::NonPositiveEpsilon(format_rational(eps)));
    }
    Ok(common_refinement(x, y)
        .iter()
        .filter(|c| (&c.x_val - &c.y_val).abs() >= *eps)
        .map(|c| c.measure())
        .sum())
}

/// Exact `P(X ≠ Y)`.
pub fn prob_differ(x: &SimpleRV, y: &SimpleRV) -> Scalar {
    common_refinement(x, y).iter().filter(|c| c.x_val != c.y_val).map(|c| c.measure()).sum()
}

/// Step CDF evaluated at arbitrary ℚ(√2) points.
struct StepCdf {
    outcomes: Vec<Scalar>,
    cumulative: Vec<Scalar>,
}

impl StepCdf {
    fn new(dist: &Distribution) -> Self {
        StepCdf {
            outcomes: dist.atoms.iter().map(|a| Scalar::from_rational(a.outcome.clone())).collect(),
            cumulative: dist.cumulative(),
        }
    }

    fn at(&self, t: &Scalar) -> Scalar {
        let n = self.outcomes.partition_point(|x| x <= t);
        if n == 0 {
            Scalar::zero()
        } else {
            self.cumulative[n - 1].clone()
        }
    }

    fn levels(&self) -> impl Iterator<Item = &Scalar> {
        self.cumulative.iter()
    }
}

/// Whether `F(t−h) − h ≤ G(t) ≤ F(t+h) + h` holds for every real `t`.
fn levy_band_holds(f: &StepCdf, g: &StepCdf, h: &Scalar) -> bool {
    // Both sides are right-continuous step functions of t, so it suffices to
    // test at their jump points.
    let lower_ok = f
        .outcomes
        .iter()
        .map(|a| a + h)
        .chain(g.outcomes.iter().cloned())
        .all(|t| &f.at(&(&t - h)) - h <= g.at(&t));
    let upper_ok = f
        .outcomes
        .iter()
        .map(|a| a - h)
        .chain(g.outcomes.iter().cloned())
        .all(|t| g.at(&t) <= &f.at(&(&t + h)) + h);
    lower_ok && upper_ok
}

/// Exact Lévy distance between two finitely supported laws.
///
/// The smallest admissible `h` is always one of: an outcome gap `|a − b|`,
/// a gap between CDF levels, `0`, or `1`. The band condition is monotone
/// in `h`, so a binary search over the sorted candidates finds it.
pub fn levy_distance(f: &Distribution, g: &Distribution) -> Scalar {
    let cf = StepCdf::new(f);
    let cg = StepCdf::new(g);
    let mut candidates = vec![Scalar::zero(), Scalar::one()];
    for a in &cf.outcomes {
        for b in &cg.outcomes {
            candidates.push((a - b).abs());
        }
    }
    let zero = Scalar::zero();
    for p in cf.levels().chain(std::iter::once(&zero)) {
        for q in cg.levels().chain(std::iter::once(&zero)) {
            candidates.push((p - q).abs());
        }
    }
    candidates.retain(|h| h <= &Scalar::one());
    candidates.sort();
    candidates.dedup();
    let first_ok = candidates.partition_point(|h| !levy_band_holds(&cf, &cg, h));
    candidates[first_ok.min(candidates.len() - 1)].clone()
}

/// The nondecreasing representative of `f` on `[0,1)`: outcome `x_i` on
/// `[F(x_{i−1}), F(x_i))`. Bounds enclose the support.
pub fn quantile_rv(f: &Distribution) -> SimpleRV {
    quantile_rv_in(f, &OutcomeBounds::enclosing([f])).expect("enclosing bounds hold every atom")
}

/// [`quantile_rv`] with caller-supplied outcome bounds.
pub fn quantile_rv_in(f: &Distribution, bounds: &OutcomeBounds) -> Result<SimpleRV> {
    let mut lo = Scalar::zero();
    let mut cells = Vec::with_capacity(f.atoms.len());
    for (atom, hi) in f.atoms.iter().zip(f.cumulative()) {
        cells.push(Cell {
            event: Event::from_intervals([Interval::new(lo, hi.clone())?]),
            outcome: atom.outcome.clone(),
        });
        lo = hi;
    }
    SimpleRV::new(bounds.clone(), cells)
}
