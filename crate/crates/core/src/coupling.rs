//! Quantile-function constructions on the common space `[0,1)`.
//!
//! Realizing laws as nondecreasing functions of the same uniform variable
//! aligns their quantiles. That gives the comonotone coupling used for
//! first-order stochastic dominance and a Skorokhod-type representation of
//! a sequence converging in distribution.

use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::event::{Event, Interval};
use crate::regret::{prefer, Preference, RegretFunction, RegretFunctional, Verdict, DEFAULT_TOLERANCE};
use crate::rv::{
    fosd_compare, levy_distance, prob_diff_exceeds, quantile_rv_in, Cell, Distribution, FosdOrder, OutcomeBounds,
    SimpleRV,
};
use crate::scalar::{format_rational, Scalar};

/// Two variables sharing the cells on which both quantile functions are
/// constant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Coupling {
    pub xp: SimpleRV,
    pub yp: SimpleRV,
    pub common_cells: Vec<Event>,
}

impl Coupling {
    /// `(xp[i], yp[i])` for each common cell.
    pub fn cell_values(&self) -> Vec<(&BigRational, &BigRational)> {
        self.common_cells
            .iter()
            .map(|cell| {
                let at = cell.start().expect("common cells are nonempty");
                (self.xp.value_at(at).expect("xp covers [0,1)"), self.yp.value_at(at).expect("yp covers [0,1)"))
            })
            .collect()
    }

    /// Whether `xp ≥ yp` on every cell, and whether `xp > yp` on some cell.
    pub fn dominance(&self) -> (bool, bool) {
        let values = self.cell_values();
        (values.iter().all(|(a, b)| a >= b), values.iter().any(|(a, b)| a > b))
    }
}

fn union_bounds(a: &OutcomeBounds, b: &OutcomeBounds) -> OutcomeBounds {
    let lo = a.lo().min(b.lo()).clone();
    let hi = a.hi().max(b.hi()).clone();
    OutcomeBounds::new(lo, hi).expect("union of valid bounds is valid")
}

/// Value of the quantile function of `dist` on each cell `[lo, hi)` of the
/// merged breakpoints.
fn quantile_on(dist: &Distribution, breaks: &[Scalar]) -> Vec<BigRational> {
    let cumulative = dist.cumulative();
    let mut i = 0;
    breaks
        .windows(2)
        .map(|w| {
            while cumulative[i] <= w[0] {
                i += 1;
            }
            dist.atoms()[i].outcome.clone()
        })
        .collect()
}

/// Comonotone coupling of `f` and `g`: both quantile functions written on
/// the merge of the two sets of cumulative-mass breakpoints.
pub fn comonotone_couple(f: &Distribution, g: &Distribution) -> Coupling {
    comonotone_couple_in(f, g, &OutcomeBounds::enclosing([f, g])).expect("enclosing bounds hold every atom")
}

/// [`comonotone_couple`] with caller-supplied outcome bounds.
pub fn comonotone_couple_in(f: &Distribution, g: &Distribution, bounds: &OutcomeBounds) -> Result<Coupling> {
    let mut breaks = vec![Scalar::zero()];
    breaks.extend(f.cumulative());
    breaks.extend(g.cumulative());
    breaks.sort();
    breaks.dedup();
    let common_cells = breaks
        .windows(2)
        .map(|w| Interval::new(w[0].clone(), w[1].clone()).map(|i| Event::from_intervals([i])))
        .collect::<Result<Vec<_>>>()?;
    let build = |dist: &Distribution| {
        let cells = common_cells
            .iter()
            .cloned()
            .zip(quantile_on(dist, &breaks))
            .map(|(event, outcome)| Cell { event, outcome })
            .collect();
        SimpleRV::new(bounds.clone(), cells).map(|rv| rv.canonicalize())
    };
    Ok(Coupling { xp: build(f)?, yp: build(g)?, common_cells })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EpsProb {
    #[serde(with = "crate::scalar::rational_str")]
    pub eps: BigRational,
    pub prob: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkorokhodRow {
    /// One-based position in the sequence.
    pub k: usize,
    /// `F_{X̄_k}` equals `seq[k]` exactly.
    pub distribution_matches: bool,
    pub levy: Scalar,
    pub eps: Vec<EpsProb>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SkorokhodReport {
    pub target: Distribution,
    pub rows: Vec<SkorokhodRow>,
}

/// Represents `seq` and `target` by their quantile variables on `[0,1)` and
/// tabulates `P(|X̄_k − X| ≥ ε)` next to the Lévy distance.
pub fn skorokhod_represent(
    seq: &[Distribution],
    target: &Distribution,
    eps_grid: &[BigRational],
) -> Result<SkorokhodReport> {
    if seq.is_empty() {
        return Err(Error::Schema("the sequence of distributions is empty".into()));
    }
    if eps_grid.is_empty() {
        return Err(Error::Schema("the epsilon grid is empty".into()));
    }
    if let Some(eps) = eps_grid.iter().find(|e| !e.is_positive()) {
        return Err(Error::NonPositiveEpsilon(format_rational(eps)));
    }
    let bounds = OutcomeBounds::enclosing(seq.iter().chain([target]));
    let x = quantile_rv_in(target, &bounds)?;
    let rows = seq
        .iter()
        .enumerate()
        .map(|(i, dist)| {
            let x_k = quantile_rv_in(dist, &bounds)?;
            let eps = eps_grid
                .iter()
                .map(|e| Ok(EpsProb { eps: e.clone(), prob: prob_diff_exceeds(&x_k, &x, e)? }))
                .collect::<Result<Vec<_>>>()?;
            Ok(SkorokhodRow {
                k: i + 1,
                distribution_matches: &x_k.distribution() == dist,
                levy: levy_distance(dist, target),
                eps,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SkorokhodReport { target: target.clone(), rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FosdPreferenceReport {
    pub order: FosdOrder,
    pub comparable: bool,
    /// Preference on the original pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direct: Option<Preference>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupling: Option<Coupling>,
    /// Preference on the comonotone pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coupled: Option<Preference>,
    /// Under strict dominance: both pairings yield PREFER.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub both_prefer: Option<bool>,
    /// Both pairings have exact values and they coincide.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values_agree: Option<bool>,
}

/// Compares `x` and `y` by first-order dominance and evaluates the
/// preference on the original and on the comonotone pairing. An
/// incomparable pair gives a report with `comparable = false`.
pub fn check_fosd_preference(
    psi: &RegretFunction,
    v: &RegretFunctional,
    x: &SimpleRV,
    y: &SimpleRV,
) -> Result<FosdPreferenceReport> {
    let bounds = union_bounds(x.bounds(), y.bounds());
    let (x, y) = (x.with_bounds(bounds.clone())?, y.with_bounds(bounds.clone())?);
    let order = fosd_compare(&x, &y);
    if order == FosdOrder::Incomparable {
        return Ok(FosdPreferenceReport {
            order,
            comparable: false,
            direct: None,
            coupling: None,
            coupled: None,
            both_prefer: None,
            values_agree: None,
        });
    }
    let direct = prefer(psi, v, &x, &y, DEFAULT_TOLERANCE)?;
    let coupling = comonotone_couple_in(&x.distribution(), &y.distribution(), &bounds)?;
    let coupled = prefer(psi, v, &coupling.xp, &coupling.yp, DEFAULT_TOLERANCE)?;
    let both_prefer = (order == FosdOrder::StrictDom)
        .then(|| direct.verdict == Verdict::Prefer && coupled.verdict == Verdict::Prefer);
    let values_agree = match (&direct.exact, &coupled.exact) {
        (Some(a), Some(b)) => Some(a == b),
        _ => None,
    };
    Ok(FosdPreferenceReport {
        order,
        comparable: true,
        direct: Some(direct),
        coupling: Some(coupling),
        coupled: Some(coupled),
        both_prefer,
        values_agree,
    })
}
