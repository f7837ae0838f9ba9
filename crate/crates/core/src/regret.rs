//! Regret functions, regret lotteries and regret-based preferences.
//!
//! A regret function `ψ(x, y)` scores having chosen an act paying `x` when
//! the alternative paid `y`. The regret lottery `Ψ(X, Y)` is the law of
//! `ψ(X, Y)` over states, and `X ⪰ Y` iff a functional `V` of that lottery
//! is nonnegative.
//!
//! Lottery probabilities stay exact. Regret values are exact rationals for
//! the difference form and integer-power utilities, floating point
//! otherwise.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rv::{common_refinement, OutcomeBounds, SimpleRV};
use crate::scalar::{format_rational, rational_to_f64, Scalar};

/// Default indifference band for [`prefer`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Grid size used when [`prefer`] validates its regret function.
pub const DEFAULT_VALIDATION_GRID: usize = 11;

// Floating-point forms are compared against zero with this slack on the diagonal.
const DIAGONAL_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "u", rename_all = "snake_case")]
pub enum Utility {
    /// `u(x) = (x − x̲)^α`, `α > 0`; shifting by the lower bound keeps the
    /// base nonnegative.
    Power { alpha: f64 },
    /// `u(x) = 1 − e^{−βx}`, `β > 0`.
    Exponential { beta: f64 },
}

/// Values of `ψ` on a rectangular grid, `values[i][j] = ψ(xs[i], ys[j])`,
/// extended by bilinear interpolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTable {
    #[serde(with = "rational_vec")]
    pub xs: Vec<BigRational>,
    #[serde(with = "rational_vec")]
    pub ys: Vec<BigRational>,
    pub values: Vec<Vec<f64>>,
}

mod rational_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        let raw: Vec<String> = Vec::deserialize(d)?;
        raw.iter()
            .map(|s| crate::scalar::parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

impl RegretTable {
    fn shape_error(&self) -> Option<String> {
        if self.xs.len() < 2 || self.ys.len() < 2 {
            return Some("table needs at least two grid points per axis".into());
        }
        if !self.xs.windows(2).all(|w| w[0] < w[1]) || !self.ys.windows(2).all(|w| w[0] < w[1]) {
            return Some("table grid must be strictly increasing".into());
        }
        if self.values.len() != self.xs.len() || self.values.iter().any(|r| r.len() != self.ys.len()) {
            return Some("table values must be xs.len() rows of ys.len() entries".into());
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Some("table values must be finite".into());
        }
        None
    }

    fn locate(grid: &[BigRational], t: &BigRational) -> (usize, f64) {
        let last = grid.len() - 2;
        let i = grid.partition_point(|g| g <= t).saturating_sub(1).min(last);
        let span = &grid[i + 1] - &grid[i];
        let frac = rational_to_f64(&((t - &grid[i]) / span)).clamp(0.0, 1.0);
        (i, frac)
    }

    fn eval(&self, x: &BigRational, y: &BigRational) -> f64 {
        let (i, tx) = Self::locate(&self.xs, x);
        let (j, ty) = Self::locate(&self.ys, y);
        let v = &self.values;
        (1.0 - tx) * (1.0 - ty) * v[i][j]
            + tx * (1.0 - ty) * v[i + 1][j]
            + (1.0 - tx) * ty * v[i][j + 1]
            + tx * ty * v[i + 1][j + 1]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RegretFunction {
    /// `ψ(x, y) = x − y`.
    Difference,
    /// `ψ(x, y) = u(x) − u(y)`.
    UtilityDiff(Utility),
    Table { grid: RegretTable },
}

/// A value of `ψ`.
#[derive(Clone, Debug)]
pub enum RegretValue {
    Exact(BigRational),
    Approx(f64),
}

impl RegretValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            RegretValue::Exact(r) => rational_to_f64(r),
            RegretValue::Approx(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            RegretValue::Exact(r) => Some(r),
            RegretValue::Approx(_) => None,
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            RegretValue::Exact(r) => r.is_zero(),
            RegretValue::Approx(v) => v.abs() <= DIAGONAL_SLACK,
        }
    }
}

impl Ord for RegretValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (RegretValue::Exact(a), RegretValue::Exact(b)) => a.cmp(b),
            _ => self.to_f64().total_cmp(&other.to_f64()),
        }
    }
}

impl PartialOrd for RegretValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for RegretValue {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for RegretValue {}

impl fmt::Display for RegretValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegretValue::Exact(r) => f.write_str(&format_rational(r)),
            RegretValue::Approx(v) => write!(f, "{v:e}"),
        }
    }
}

impl Serialize for RegretValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl RegretFunction {
    /// `ψ(x, y)`; `bounds` fixes the shift of the power utility.
    pub fn eval(&self, x: &BigRational, y: &BigRational, bounds: &OutcomeBounds) -> RegretValue {
        match self {
            RegretFunction::Difference => RegretValue::Exact(x - y),
            RegretFunction::UtilityDiff(Utility::Power { alpha }) => {
                let (bx, by) = (x - bounds.lo(), y - bounds.lo());
                match integer_exponent(*alpha) {
                    Some(n) => RegretValue::Exact(pow(&bx, n) - pow(&by, n)),
                    None => RegretValue::Approx(
                        rational_to_f64(&bx).powf(*alpha) - rational_to_f64(&by).powf(*alpha),
                    ),
                }
            }
            RegretFunction::UtilityDiff(Utility::Exponential { beta }) => {
                let (fx, fy) = (rational_to_f64(x), rational_to_f64(y));
                // u(x) − u(y) = e^{−βy} − e^{−βx}
                RegretValue::Approx((-beta * fy).exp() - (-beta * fx).exp())
            }
            RegretFunction::Table { grid } => RegretValue::Approx(grid.eval(x, y)),
        }
    }

    fn parameter_error(&self) -> Option<String> {
        match self {
            RegretFunction::Difference => None,
            RegretFunction::UtilityDiff(Utility::Power { alpha }) => {
                (!(alpha.is_finite() && *alpha > 0.0)).then(|| format!("power alpha must be > 0, got {alpha}"))
            }
            RegretFunction::UtilityDiff(Utility::Exponential { beta }) => {
                (!(beta.is_finite() && *beta > 0.0)).then(|| format!("exponential beta must be > 0, got {beta}"))
            }
            RegretFunction::Table { grid } => grid.shape_error(),
        }
    }
}

fn integer_exponent(alpha: f64) -> Option<u32> {
    (alpha.fract() == 0.0 && (1.0..=64.0).contains(&alpha)).then_some(alpha as u32)
}

fn pow(base: &BigRational, n: u32) -> BigRational {
    let mut out = BigRational::from_integer(BigInt::from(1));
    for _ in 0..n {
        out *= base;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Parameter,
    Coverage,
    Diagonal,
    NotIncreasingInX,
    NotDecreasingInY,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    #[serde(serialize_with = "opt_rational")]
    pub x: Option<BigRational>,
    #[serde(serialize_with = "opt_rational")]
    pub y: Option<BigRational>,
    pub detail: String,
}

fn opt_rational<S: Serializer>(v: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.collect_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub points_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

/// Checks the regret-function axioms: zero on the diagonal, strictly
/// increasing in `x`, strictly decreasing in `y`.
///
/// The checks run on `grid_n` evenly spaced points of the bounds; tables are
/// additionally checked on their own grid first, which is what makes their
/// bilinear extension monotone.
pub fn validate_regret_function(
    psi: &RegretFunction,
    bounds: &OutcomeBounds,
    grid_n: usize,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut points_checked = 0;
    if let Some(detail) = psi.parameter_error() {
        violations.push(Violation { kind: ViolationKind::Parameter, x: None, y: None, detail });
        return ValidationReport { valid: false, points_checked, violations };
    }
    let grid_n = grid_n.max(3);
    if let RegretFunction::Table { grid } = psi {
        let covers = |g: &[BigRational]| g[0] <= *bounds.lo() && g[g.len() - 1] >= *bounds.hi();
        if !covers(&grid.xs) || !covers(&grid.ys) {
            violations.push(Violation {
                kind: ViolationKind::Coverage,
                x: None,
                y: None,
                detail: "table grid does not cover the outcome bounds".into(),
            });
        }
        for x in grid.xs.iter().filter(|x| grid.ys.contains(x)) {
            points_checked += 1;
            check_diagonal(psi, bounds, x, &mut violations);
        }
        points_checked += grid.xs.len() * grid.ys.len();
        check_monotone(psi, bounds, &grid.xs, &grid.ys, &mut violations);
    }

    let span = bounds.hi() - bounds.lo();
    let points: Vec<BigRational> = (0..grid_n)
        .map(|i| bounds.lo() + &span * BigRational::new(i.into(), (grid_n - 1).into()))
        .collect();
    for x in &points {
        points_checked += 1;
        check_diagonal(psi, bounds, x, &mut violations);
    }
    points_checked += grid_n * grid_n;
    check_monotone(psi, bounds, &points, &points, &mut violations);

    ValidationReport { valid: violations.is_empty(), points_checked, violations }
}

fn check_diagonal(psi: &RegretFunction, bounds: &OutcomeBounds, x: &BigRational, out: &mut Vec<Violation>) {
    let v = psi.eval(x, x, bounds);
    if !v.is_zero() {
        out.push(Violation {
            kind: ViolationKind::Diagonal,
            x: Some(x.clone()),
            y: Some(x.clone()),
            detail: format!("psi(x, x) = {v}"),
        });
    }
}

fn check_monotone(
    psi: &RegretFunction,
    bounds: &OutcomeBounds,
    xs: &[BigRational],
    ys: &[BigRational],
    out: &mut Vec<Violation>,
) {
    for y in ys {
        for w in xs.windows(2) {
            let (a, b) = (psi.eval(&w[0], y, bounds), psi.eval(&w[1], y, bounds));
            if a >= b {
                out.push(Violation {
                    kind: ViolationKind::NotIncreasingInX,
                    x: Some(w[1].clone()),
                    y: Some(y.clone()),
                    detail: format!("psi({}, y) = {a} >= psi({}, y) = {b}", format_rational(&w[0]), format_rational(&w[1])),
                });
            }
        }
    }
    for x in xs {
        for w in ys.windows(2) {
            let (a, b) = (psi.eval(x, &w[0], bounds), psi.eval(x, &w[1], bounds));
            if a <= b {
                out.push(Violation {
                    kind: ViolationKind::NotDecreasingInY,
                    x: Some(x.clone()),
                    y: Some(w[1].clone()),
                    detail: format!("psi(x, {}) = {a} <= psi(x, {}) = {b}", format_rational(&w[0]), format_rational(&w[1])),
                });
            }
        }
    }
}

/// A finite lottery over regret values, kept sorted by value with equal
/// values merged so that equality of lotteries is list equality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegretLottery {
    atoms: Vec<LotteryAtom>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LotteryAtom {
    pub value: RegretValue,
    pub prob: Scalar,
}

impl RegretLottery {
    /// Canonicalizes arbitrary `(value, probability)` pairs. Probabilities
    /// must be positive and sum to one.
    pub fn new(pairs: impl IntoIterator<Item = (RegretValue, Scalar)>) -> Result<Self> {
        let mut merged: BTreeMap<RegretValue, Scalar> = BTreeMap::new();
        for (value, prob) in pairs {
            if !prob.is_positive() {
                return Err(Error::NonPositiveMass(prob.to_string()));
            }
            *merged.entry(value).or_default() += &prob;
        }
        let total: Scalar = merged.values().sum();
        if total != Scalar::one() {
            return Err(Error::NotAPartition(total.to_string()));
        }
        Ok(RegretLottery { atoms: merged.into_iter().map(|(value, prob)| LotteryAtom { value, prob }).collect() })
    }

    pub fn atoms(&self) -> &[LotteryAtom] {
        &self.atoms
    }

    /// Whether the lottery is the sure value zero.
    pub fn is_degenerate_zero(&self) -> bool {
        self.atoms.len() == 1 && self.atoms[0].value.is_zero()
    }
}

/// `Ψ(X, Y)` over the common refinement of `x` and `y`.
pub fn regret_lottery(psi: &RegretFunction, x: &SimpleRV, y: &SimpleRV) -> Result<RegretLottery> {
    let bounds = x.bounds();
    check_outcomes_in(y, bounds)?;
    let cells = common_refinement(x, y);
    RegretLottery::new(cells.iter().map(|c| (psi.eval(&c.x_val, &c.y_val, bounds), c.measure())))
}

fn check_outcomes_in(y: &SimpleRV, bounds: &OutcomeBounds) -> Result<()> {
    match y.cells().iter().find(|c| !bounds.contains(&c.outcome)) {
        Some(c) => Err(Error::OutcomeOutOfBounds {
            outcome: format_rational(&c.outcome),
            lo: format_rational(bounds.lo()),
            hi: format_rational(bounds.hi()),
        }),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum RegretFunctional {
    /// `V(Ψ) = Σ p_i ψ_i`.
    Expectation,
    /// Rank-dependent: `Σ ψ_(i) [w(G_i) − w(G_{i+1})]` with `ψ_(1) ≤ … ≤ ψ_(n)`,
    /// `G_i = P(ψ ≥ ψ_(i))` and `w(p) = p^γ`.
    RankDependent { gamma: f64 },
}

/// Result of evaluating a functional: always a float, plus the exact value
/// when every input was exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub exact: Option<Scalar>,
}

impl RegretFunctional {
    fn parameter_error(&self) -> Option<String> {
        match self {
            RegretFunctional::Expectation => None,
            RegretFunctional::RankDependent { gamma } => (!(gamma.is_finite() && *gamma > 0.0))
                .then(|| format!("rank-dependent gamma must be > 0, got {gamma}")),
        }
    }

    pub fn evaluate(&self, lottery: &RegretLottery) -> Result<FunctionalValue> {
        if let Some(msg) = self.parameter_error() {
            return Err(Error::InvalidFunctional(msg));
        }
        match self {
            RegretFunctional::Expectation => {
                let exact: Option<Scalar> = lottery
                    .atoms
                    .iter()
                    .map(|a| a.value.as_exact().map(|v| a.prob.mul_rational(v)))
                    .sum();
                let value = match &exact {
                    Some(e) => e.to_f64(),
                    None => lottery.atoms.iter().map(|a| a.prob.to_f64() * a.value.to_f64()).sum(),
                };
                Ok(FunctionalValue { value, exact })
            }
            RegretFunctional::RankDependent { gamma } => {
                // Tail probabilities from the top: G_i = Σ_{j ≥ i} p_j.
                let mut tails = vec![Scalar::zero(); lottery.atoms.len() + 1];
                for i in (0..lottery.atoms.len()).rev() {
                    tails[i] = &tails[i + 1] + &lottery.atoms[i].prob;
                }
                let w = |p: &Scalar| p.to_f64().powf(*gamma);
                let value = lottery
                    .atoms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| a.value.to_f64() * (w(&tails[i]) - w(&tails[i + 1])))
                    .sum();
                Ok(FunctionalValue { value, exact: None })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Prefer,
    Indifferent,
    Disprefer,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Preference {
    pub verdict: Verdict,
    pub value: f64,
    pub exact: Option<Scalar>,
    pub lottery: RegretLottery,
}

/// Decides `X ⪰ Y` via the sign of `V(Ψ(X, Y))`; `|V| ≤ tol` (or an exact
/// zero) is indifference.
pub fn prefer(
    psi: &RegretFunction,
    v: &RegretFunctional,
    x: &SimpleRV,
    y: &SimpleRV,
    tol: f64,
) -> Result<Preference> {
    let report = validate_regret_function(psi, x.bounds(), DEFAULT_VALIDATION_GRID);
    if let Some(first) = report.first_violation() {
        return Err(Error::InvalidRegretFunction(first.detail.clone()));
    }
    let lottery = regret_lottery(psi, x, y)?;
    let FunctionalValue { value, exact } = v.evaluate(&lottery)?;
    let verdict = match &exact {
        Some(e) if e.is_zero() => Verdict::Indifferent,
        _ if value.abs() <= tol => Verdict::Indifferent,
        _ if value > 0.0 => Verdict::Prefer,
        _ => Verdict::Disprefer,
    };
    Ok(Preference { verdict, value, exact, lottery })
}
