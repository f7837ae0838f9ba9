//! Independent re-check of every claim a certificate makes.
//!
//! Nothing recorded in a certificate is trusted: derived objects (`X^k`,
//! `X̄^k`, step lotteries, orders) are recomputed from the primitive data
//! and compared with exact arithmetic. Each check is reported as a named
//! obligation so a failure points at the broken claim.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::chain::{apply_step, at_most_factorial, cycle_lengths, is_bijection, pair_multiset, permutation_order};
use super::dyadic::{assemble, level_values, DyadicCertificate, DyadicLevel};
use super::refinement::{outcome_refinement, RefinementCertificate};
use super::{classify_case, Case, CertificateBody, EquivalenceCertificate, PermutationChainCertificate, SCHEMA};
use crate::event::Event;
use crate::rv::{prob_differ, SimpleRV};
use crate::scalar::{format_rational, nu, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obligation {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub case: Option<Case>,
    pub passed: bool,
    pub obligations: Vec<Obligation>,
}

impl VerificationReport {
    pub fn failures(&self) -> impl Iterator<Item = &Obligation> {
        self.obligations.iter().filter(|o| !o.passed)
    }

    /// Whether an obligation with this name (at this `k`, if given) failed.
    pub fn failed(&self, name: &str, k: Option<u32>) -> bool {
        self.failures().any(|o| o.name == name && (k.is_none() || o.k == k))
    }

    pub fn get(&self, name: &str, k: Option<u32>) -> Option<&Obligation> {
        self.obligations.iter().find(|o| o.name == name && o.k == k)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(case) = self.case {
            writeln!(f, "case: {case}")?;
        }
        for o in &self.obligations {
            let status = if o.passed { "PASS" } else { "FAIL" };
            match o.k {
                Some(k) => write!(f, "{status} {} [k={k}]", o.name)?,
                None => write!(f, "{status} {}", o.name)?,
            }
            if o.detail.is_empty() {
                writeln!(f)?;
            } else {
                writeln!(f, ": {}", o.detail)?;
            }
        }
        let failed = self.failures().count();
        write!(f, "{} ({} obligations, {failed} failed)", if self.passed { "VERIFIED" } else { "REJECTED" }, self.obligations.len())
    }
}

struct Checker {
    obligations: Vec<Obligation>,
    prefix: &'static str,
    k: Option<u32>,
}

impl Checker {
    fn new() -> Self {
        Checker { obligations: Vec::new(), prefix: "", k: None }
    }

    fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) -> bool {
        self.obligations.push(Obligation {
            name: format!("{}{name}", self.prefix),
            k: self.k,
            passed,
            detail: if passed { String::new() } else { detail.into() },
        });
        passed
    }

    fn finish(self, case: Option<Case>) -> VerificationReport {
        let passed = !self.obligations.is_empty() && self.obligations.iter().all(|o| o.passed);
        VerificationReport { case, passed, obligations: self.obligations }
    }
}

/// Checks `cert` against the pair it claims to certify.
pub fn verify_certificate(cert: &EquivalenceCertificate, x: &SimpleRV, y: &SimpleRV) -> VerificationReport {
    let mut ch = Checker::new();
    ch.check("schema", cert.schema == SCHEMA, format!("unexpected schema {:?}", cert.schema));
    let (fx, fy) = (x.distribution(), y.distribution());
    ch.check(
        "input_distributions",
        cert.x_distribution == fx && cert.y_distribution == fy,
        "recorded distributions differ from the inputs",
    );
    ch.check("equal_distributions", fx == fy, "inputs are not equally distributed");
    match classify_case(x, y) {
        Ok(case) => ch.check("case_tag", case == cert.case(), format!("inputs classify as {case}, certificate is {}", cert.case())),
        Err(e) => ch.check("case_tag", false, e.to_string()),
    };
    match &cert.body {
        CertificateBody::Case1(chain) => check_chain(&mut ch, chain, Some((x, y))),
        CertificateBody::Case2(refinement) => check_refinement(&mut ch, refinement, x, y, None),
        CertificateBody::Case3(dyadic) => check_dyadic(&mut ch, dyadic, x, y),
    }
    ch.finish(Some(cert.case()))
}

/// Checks a bare permutation chain against the pair it links, without
/// the case-classification obligation.
pub fn verify_chain(chain: &PermutationChainCertificate, x: &SimpleRV, y: &SimpleRV) -> VerificationReport {
    let mut ch = Checker::new();
    check_chain(&mut ch, chain, Some((x, y)));
    ch.finish(Some(Case::Case1))
}

fn check_partition(ch: &mut Checker, name: &str, events: &[&Event]) -> bool {
    let nonempty = events.iter().all(|e| !e.is_empty());
    let total: Scalar = events.iter().map(|e| e.measure()).sum();
    let covers = Event::union_all(events.iter().copied()).is_full();
    ch.check(
        name,
        nonempty && total == Scalar::one() && covers,
        format!("cells are not a partition of [0,1) (total measure {total}, covering: {covers}, all nonempty: {nonempty})"),
    )
}

fn outcome_events(rv: &SimpleRV) -> HashMap<BigRational, Event> {
    rv.canonicalize().cells().iter().map(|c| (c.outcome.clone(), c.event.clone())).collect()
}

fn check_chain(ch: &mut Checker, chain: &PermutationChainCertificate, pair: Option<(&SimpleRV, &SimpleRV)>) {
    let n = chain.n_cells;
    let shape_ok = n > 0
        && chain.cells.len() == n
        && chain.x_values.len() == n
        && chain.y_values.len() == n
        && chain.pi_hat.len() == n;
    if !ch.check("chain_shape", shape_ok, "cell, value and permutation lists disagree with n_cells") {
        return;
    }
    let cells: Vec<&Event> = chain.cells.iter().collect();
    check_partition(ch, "cells_partition", &cells);
    let unit = Scalar::frac(1, n as i64);
    let bad_cell = chain.cells.iter().position(|e| e.measure() != unit);
    ch.check(
        "cells_equiprobable",
        bad_cell.is_none(),
        format!("cell {} does not have measure 1/{n}", bad_cell.unwrap_or(0)),
    );
    if let Some((x, y)) = pair {
        let (ex, ey) = (outcome_events(x), outcome_events(y));
        let holds = |map: &HashMap<BigRational, Event>, cell: &Event, v: &BigRational| {
            map.get(v).is_some_and(|e| cell.is_subset_of(e))
        };
        let bad = (0..n).find(|&i| {
            !holds(&ex, &chain.cells[i], &chain.x_values[i]) || !holds(&ey, &chain.cells[i], &chain.y_values[i])
        });
        ch.check("cell_values", bad.is_none(), format!("cell {} does not carry its recorded values", bad.unwrap_or(0)));
    }

    let pi = &chain.pi_hat;
    if !ch.check("pi_hat_bijective", is_bijection(pi), "pi_hat is not a permutation of the cells") {
        return;
    }
    let mismatch = (0..n).find(|&i| chain.y_values[i] != chain.x_values[pi[i]]);
    ch.check(
        "pi_hat_matches_values",
        mismatch.is_none(),
        format!("y_values[{0}] != x_values[pi_hat[{0}]]", mismatch.unwrap_or(0)),
    );
    let order = permutation_order(pi);
    ch.check("order_m_lcm", chain.order_m == order, format!("order_m = {}, lcm of cycle lengths = {order}", chain.order_m));
    let returns = cycle_lengths(pi).iter().all(|&len| (&chain.order_m % len).is_zero());
    ch.check("order_m_identity", returns && !chain.order_m.is_zero(), "pi_hat^order_m is not the identity");
    ch.check("order_m_factorial_bound", at_most_factorial(&chain.order_m, n), format!("order_m exceeds {n}!"));
    let expected = pair_multiset(&chain.x_values, &chain.y_values);
    ch.check("step_lottery", chain.step_lottery == expected, "recorded step lottery differs from the cell pairs");
    let z0 = chain.x_values.clone();
    let z1 = apply_step(&z0, pi);
    let z2 = apply_step(&z1, pi);
    let steps_ok = pair_multiset(&z0, &z1) == chain.step_lottery && pair_multiset(&z1, &z2) == chain.step_lottery;
    ch.check("chain_steps", steps_ok, "Psi(Z_t, Z_t+1) differs from the step lottery for t in {0, 1}");
}

fn check_refinement(ch: &mut Checker, cert: &RefinementCertificate, x: &SimpleRV, y: &SimpleRV, forced: Option<u64>) {
    let expected = outcome_refinement(x, y);
    ch.check("refinement_cells", cert.refinement == expected, "recorded refinement differs from {X=u} ∩ {Y=v}");
    let n = cert.common_denominator;
    let n_big = BigRational::from_integer(n.into());
    let divides = n > 0
        && cert.refinement.iter().all(|c| {
            c.measure().mul_rational(&n_big).as_rational().is_some_and(|r| r.is_integer())
        });
    ch.check(
        "common_denominator",
        divides && forced.is_none_or(|f| f == n),
        format!("N = {n} is not a common denominator{}", forced.map(|f| format!(" equal to {f}")).unwrap_or_default()),
    );
    let count_ok = cert.owners.len() as u64 == n && cert.chain.n_cells as u64 == n;
    ch.check("subcell_count", count_ok, format!("expected {n} subcells"));
    let chain = &cert.chain;
    let bad = (0..cert.owners.len()).find(|&i| {
        let Some(owner) = cert.refinement.get(cert.owners[i]) else { return true };
        let (Some(cell), Some(xv), Some(yv)) = (chain.cells.get(i), chain.x_values.get(i), chain.y_values.get(i)) else {
            return true;
        };
        !cell.is_subset_of(&owner.event) || xv != &owner.x_val || yv != &owner.y_val
    });
    ch.check("subcell_containment", bad.is_none(), format!("subcell {} escapes its refinement cell", bad.unwrap_or(0)));
    check_chain(ch, chain, None);
}

fn check_dyadic(ch: &mut Checker, cert: &DyadicCertificate, x: &SimpleRV, y: &SimpleRV) {
    let refinement = outcome_refinement(x, y);
    ch.check("refinement_cells", cert.refinement == refinement, "recorded refinement differs from {X=u} ∩ {Y=v}");
    let outcomes = x.outcomes();
    ch.check("outcomes", cert.outcomes == outcomes && y.outcomes() == outcomes, "recorded outcomes differ from the inputs");
    let c = &cert.sentinel;
    ch.check(
        "sentinel_fresh",
        !outcomes.contains(c),
        format!("sentinel {} is one of the outcomes", format_rational(c)),
    );
    ch.check(
        "sentinel_in_bounds",
        x.bounds().contains(c) && y.bounds().contains(c),
        format!("sentinel {} outside the outcome bounds", format_rational(c)),
    );
    let min_mass = refinement.iter().map(|t| t.measure()).min().unwrap_or_else(Scalar::one);
    let window_ok = cert.k_min <= cert.k_max
        && cert.levels.len() as u64 == u64::from(cert.k_max - cert.k_min.min(cert.k_max)) + 1
        && cert.levels.iter().enumerate().all(|(i, l)| l.k == cert.k_min + i as u32)
        && Scalar::dyadic(cert.k_min) < min_mass;
    ch.check("k_window", window_ok, format!("levels must cover k = {}..={} with 2^-k_min below {min_mass}", cert.k_min, cert.k_max));
    for level in &cert.levels {
        ch.k = Some(level.k);
        check_level(ch, cert, &refinement, &outcomes, level, x, y);
    }
    ch.k = None;
}

fn check_level(
    ch: &mut Checker,
    cert: &DyadicCertificate,
    refinement: &[crate::rv::RefinementCell],
    outcomes: &[BigRational],
    level: &DyadicLevel,
    x: &SimpleRV,
    y: &SimpleRV,
) {
    let k = level.k;
    let unit = Scalar::dyadic(k);
    let two_k = BigRational::from_integer(BigInt::one() << k);
    let m = refinement.len();
    // Everything below indexes the recomputed refinement.
    if cert.refinement.len() != m || level.nu.len() != m {
        ch.check("dyadic_partition", false, "level does not match the refinement");
        return;
    }

    let nu_ok = refinement
        .iter()
        .zip(&level.nu)
        .all(|(t, &v)| nu(&t.measure(), k).is_ok_and(|expected| expected == BigInt::from(v)));
    ch.check("nu_values", nu_ok, "recorded nu(T_j, k) differs from ceil(P(T_j)·2^k) − 1");

    let events: Vec<&Event> = level.cells.iter().map(|c| &c.event).collect();
    let partition_ok = check_partition(ch, "dyadic_partition", &events);
    let mut full_count = vec![0u64; m];
    let mut remainders = vec![0u64; m];
    let mut shape_error = None;
    for (i, cell) in level.cells.iter().enumerate() {
        let Some(t) = refinement.get(cell.owner) else {
            shape_error = Some(format!("cell {i} has unknown owner {}", cell.owner));
            break;
        };
        let mass = cell.event.measure();
        if !cell.event.is_subset_of(&t.event) {
            shape_error = Some(format!("cell {i} is not inside T_{}", cell.owner));
        } else if cell.full && mass != unit {
            shape_error = Some(format!("full cell {i} has measure {mass}"));
        } else if !cell.full && !(mass.is_positive() && mass <= unit) {
            shape_error = Some(format!("remainder cell {i} has measure {mass}"));
        }
        if cell.full {
            full_count[cell.owner] += 1;
        } else {
            remainders[cell.owner] += 1;
        }
    }
    if shape_error.is_none() {
        if let Some(j) = (0..m).find(|&j| full_count[j] != level.nu[j] || remainders[j] != 1) {
            shape_error = Some(format!("T_{j} has {} full cells and {} remainders", full_count[j], remainders[j]));
        }
    }
    let cells_ok = ch.check("dyadic_cells", shape_error.is_none(), shape_error.unwrap_or_default());
    if !(partition_ok && cells_ok) {
        return;
    }

    let c = &cert.sentinel;
    let bounds = x.bounds();
    let xv = level_values(refinement, &level.cells, c, false);
    let yv = level_values(refinement, &level.cells, c, true);
    let pieces = |values: &[BigRational]| -> Vec<(Event, BigRational)> {
        level.cells.iter().map(|cell| cell.event.clone()).zip(values.iter().cloned()).collect()
    };
    let x_k = assemble(bounds, pieces(&xv));
    let y_k = assemble(bounds, pieces(&yv));
    ch.check("x_k_recorded", x_k.as_ref().is_ok_and(|v| v == &level.x_k), "recorded X^k differs from the partition");
    ch.check("y_k_recorded", y_k.as_ref().is_ok_and(|v| v == &level.y_k), "recorded Y^k differs from the partition");

    let (fx, fy) = (x.distribution(), y.distribution());
    let full_mass = |values: &[BigRational], outcome: &BigRational| -> Scalar {
        let count = level.cells.iter().zip(values).filter(|(cell, v)| cell.full && *v == outcome).count();
        unit.mul_rational(&BigRational::from_integer(count.into()))
    };
    let mut surplus_x = HashMap::new();
    let mut surplus_y = HashMap::new();
    let mut bound_error = None;
    for (i, outcome) in outcomes.iter().enumerate() {
        let (px, py) = (full_mass(&xv, outcome), full_mass(&yv, outcome));
        let d = &px - &py;
        if px > fx.mass_of(outcome) || py > fy.mass_of(outcome) {
            bound_error = Some(format!("P(X^k = {0}) or P(Y^k = {0}) exceeds the original mass", format_rational(outcome)));
        } else if d.abs() > level.imbalance_bound || d.abs() > unit.mul_rational(&BigRational::from_integer(m.into())) {
            bound_error = Some(format!("|d| = {} exceeds m/2^k for outcome {}", d.abs(), format_rational(outcome)));
        } else if level.imbalance.get(i) != Some(&d) {
            bound_error = Some(format!("recorded imbalance for {} differs from {d}", format_rational(outcome)));
        }
        let cells = d.mul_rational(&two_k).as_rational().map(|r| r.to_integer()).unwrap_or_default();
        if cells.is_positive() {
            surplus_x.insert(outcome.clone(), cells);
        } else if cells.is_negative() {
            surplus_y.insert(outcome.clone(), -cells);
        }
    }
    ch.check("imbalance_bound", bound_error.is_none(), bound_error.unwrap_or_default());

    let flips_ok = |flips: &[usize], values: &[BigRational], surplus: &HashMap<BigRational, BigInt>| -> Result<(), String> {
        let mut seen = std::collections::HashSet::new();
        let mut counts: HashMap<&BigRational, BigInt> = HashMap::new();
        for &i in flips {
            let cell = level.cells.get(i).ok_or(format!("flip index {i} out of range"))?;
            if !cell.full || !seen.insert(i) {
                return Err(format!("flip {i} is not a distinct full cell"));
            }
            *counts.entry(&values[i]).or_default() += 1;
        }
        for outcome in outcomes {
            let want = surplus.get(outcome).cloned().unwrap_or_default();
            let got = counts.get(outcome).cloned().unwrap_or_default();
            if want != got {
                return Err(format!("{got} flips of outcome {} where |d|·2^k = {want}", format_rational(outcome)));
            }
        }
        Ok(())
    };
    let flip_result = flips_ok(&level.x_flips, &xv, &surplus_x).and_then(|_| flips_ok(&level.y_flips, &yv, &surplus_y));
    ch.check("flip_counts", flip_result.is_ok(), flip_result.err().unwrap_or_default());

    let apply = |values: &[BigRational], flips: &[usize]| -> Vec<BigRational> {
        let mut out = values.to_vec();
        for &i in flips {
            if let Some(v) = out.get_mut(i) {
                *v = c.clone();
            }
        }
        out
    };
    let x_bar = assemble(bounds, pieces(&apply(&xv, &level.x_flips)));
    let y_bar = assemble(bounds, pieces(&apply(&yv, &level.y_flips)));
    let (Ok(x_bar), Ok(y_bar)) = (x_bar, y_bar) else {
        ch.check("item_a", false, "X̄^k or Ȳ^k is not a valid random variable");
        return;
    };
    let (fxb, fyb) = (x_bar.distribution(), y_bar.distribution());
    ch.check("item_a", fxb == fyb, "F of X̄^k differs from F of Ȳ^k");

    let off_x = prob_differ(&x_bar, x);
    let off_y = prob_differ(&y_bar, y);
    let m2 = unit.mul_rational(&BigRational::from_integer((m * m).into()));
    ch.check(
        "item_b",
        off_x <= m2 && off_y <= m2,
        format!("P(X̄ ≠ X) = {off_x}, P(Ȳ ≠ Y) = {off_y}, bound m²/2^k = {m2}"),
    );
    let dyadic_masses = |f: &crate::rv::Distribution| {
        f.atoms().iter().all(|a| a.mass.mul_rational(&two_k).as_rational().is_some_and(|r| r.is_integer()))
    };
    ch.check("item_c", dyadic_masses(&fxb) && dyadic_masses(&fyb), "an outcome mass of X̄^k or Ȳ^k is not a multiple of 2^-k");
    ch.check("x_bar_recorded", x_bar == level.x_bar, "recorded X̄^k differs from X^k with its flips applied");
    ch.check("y_bar_recorded", y_bar == level.y_bar, "recorded Ȳ^k differs from Y^k with its flips applied");
    let bounds_ok = level.imbalance_bound == unit.mul_rational(&BigRational::from_integer(m.into())) && level.disagreement_bound == m2;
    ch.check("bound_values", bounds_ok, "recorded m/2^k or m²/2^k is wrong");

    let saved = ch.prefix;
    ch.prefix = "embedded.";
    check_refinement(ch, &level.embedded, &x_bar, &y_bar, Some(1u64 << k));
    ch.prefix = saved;
}
