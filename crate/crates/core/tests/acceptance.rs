//! Acceptance suite. Runs each criterion at its stated scale and tolerance,
//! prints one PASS/FAIL line per criterion and exits nonzero if any fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;

use probeq_core::certificate::chain::{apply_step, pair_multiset};
use probeq_core::certificate::{build_case1, verify_chain, CertificateBody, DyadicCertificate};
use probeq_core::gen::{self, default_bounds, rng_from_seed};
use probeq_core::regret::{prefer, RegretFunction, RegretFunctional, Utility, Verdict, DEFAULT_TOLERANCE};
use probeq_core::rv::prob_differ;
use probeq_core::scalar::q;
use probeq_core::*;

use common::{decimal_compare, monte_carlo, within_three_se};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: Vec<String>, summary: String) -> Self {
        match failures.first() {
            None => Outcome { passed: true, detail: summary },
            Some(first) => Outcome {
                passed: false,
                detail: format!("{summary}; {} failure(s), first: {first}", failures.len()),
            },
        }
    }
}

fn rv(steps: &[(&str, &str, i64)]) -> SimpleRV {
    SimpleRV::from_steps(
        default_bounds(),
        steps.iter().map(|(a, b, x)| (a.parse().unwrap(), b.parse().unwrap(), q(*x, 1))),
    )
    .unwrap()
}

fn certify_and_check(x: &SimpleRV, y: &SimpleRV, config: CertifyConfig) -> std::result::Result<EquivalenceCertificate, String> {
    let cert = certify_equivalence(x, y, config).map_err(|e| e.to_string())?;
    let text = cert.to_json().map_err(|e| e.to_string())?;
    let back = EquivalenceCertificate::from_json(&text).map_err(|e| e.to_string())?;
    if back != cert {
        return Err("certificate changed through JSON".into());
    }
    let report = verify_certificate(&back, x, y);
    if !report.passed {
        let first = report.failures().next().map(|o| o.name.clone()).unwrap_or_default();
        return Err(format!("verification failed at {first}"));
    }
    Ok(cert)
}

fn criterion_1() -> Outcome {
    let mut rng = rng_from_seed(101);
    let mut failures = Vec::new();
    for i in 0..200 {
        let (x, y) = gen::case1_pair(&mut rng);
        if let Err(e) = certify_and_check(&x, &y, CertifyConfig::default()) {
            failures.push(format!("pair {i}: {e}"));
            continue;
        }
        let chain = match build_case1(&x, &y) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("pair {i}: {e}"));
                continue;
            }
        };
        if !verify_chain(&chain, &x, &y).passed {
            failures.push(format!("pair {i}: cell-level chain rejected"));
        }
        let mut z = chain.x_values.clone();
        for t in 0..=20 {
            let next = apply_step(&z, &chain.pi_hat);
            if pair_multiset(&z, &next) != chain.step_lottery {
                failures.push(format!("pair {i}: step lottery differs at t = {t}"));
                break;
            }
            z = next;
        }
    }
    Outcome::new(failures, "200 pairs, step lotteries equal for t ≤ 20".into())
}

fn criterion_2() -> Outcome {
    let mut rng = rng_from_seed(202);
    let mut failures = Vec::new();
    let mut case2 = 0;
    for i in 0..200 {
        let (x, y) = gen::rational_pair(&mut rng);
        match certify_and_check(&x, &y, CertifyConfig::default()) {
            Ok(cert) if cert.case() == Case::Case3 => failures.push(format!("pair {i}: classified CASE3")),
            Ok(cert) => case2 += usize::from(cert.case() == Case::Case2),
            Err(e) => failures.push(format!("pair {i}: {e}")),
        }
        match prefer(&RegretFunction::Difference, &RegretFunctional::Expectation, &x, &y, DEFAULT_TOLERANCE) {
            Ok(p) if p.exact.as_ref().is_some_and(|v| v.is_zero()) => {}
            Ok(p) => failures.push(format!("pair {i}: raw value {:?}", p.exact)),
            Err(e) => failures.push(format!("pair {i}: {e}")),
        }
    }
    Outcome::new(failures, format!("200 pairs ({case2} CASE2), every raw value exactly 0"))
}

/// Direct checks of the Case 3 bounds, without going through the verifier.
fn check_dyadic_bounds(label: &str, x: &SimpleRV, y: &SimpleRV, d: &DyadicCertificate, failures: &mut Vec<String>) {
    let m = BigRational::from_integer(d.refinement.len().into());
    for level in &d.levels {
        let k = level.k;
        let unit = Scalar::dyadic(k);
        let two_k = BigRational::from_integer(BigInt::one() << k);
        let m_bound = unit.mul_rational(&m);
        let m2_bound = unit.mul_rational(&(&m * &m));
        let (fxk, fyk) = (level.x_k.distribution(), level.y_k.distribution());
        for outcome in &d.outcomes {
            let gap = (fxk.mass_of(outcome) - fyk.mass_of(outcome)).abs();
            if gap > m_bound {
                failures.push(format!("{label} k={k}: |P(X^k={outcome}) − P(Y^k={outcome})| = {gap}"));
            }
        }
        let (off_x, off_y) = (prob_differ(&level.x_bar, x), prob_differ(&level.y_bar, y));
        if off_x > m2_bound || off_y > m2_bound {
            failures.push(format!("{label} k={k}: P(X̄≠X) = {off_x}, P(Ȳ≠Y) = {off_y}"));
        }
        let (fxb, fyb) = (level.x_bar.distribution(), level.y_bar.distribution());
        if fxb != fyb {
            failures.push(format!("{label} k={k}: F of X̄^k and Ȳ^k differ"));
        }
        let dyadic = |f: &Distribution| {
            f.atoms().iter().all(|a| a.mass.mul_rational(&two_k).as_rational().is_some_and(|r| r.is_integer()))
        };
        if !dyadic(&fxb) || !dyadic(&fyb) {
            failures.push(format!("{label} k={k}: a mass is not a multiple of 2^-k"));
        }
    }
}

fn surd_corpus() -> Vec<(String, SimpleRV, SimpleRV)> {
    let mut pairs = vec![(
        "E3".to_string(),
        rv(&[("0", "0+1/2*sqrt2", 10), ("0+1/2*sqrt2", "1", 20)]),
        rv(&[("0", "1-1/2*sqrt2", 20), ("1-1/2*sqrt2", "1", 10)]),
    )];
    let mut rng = rng_from_seed(303);
    for i in 0..20 {
        let (x, y) = gen::surd_pair(&mut rng);
        pairs.push((format!("surd pair {i}"), x, y));
    }
    pairs
}

fn criteria_3_and_4() -> (Outcome, Outcome) {
    let mut bound_failures = Vec::new();
    let mut embedded_failures = Vec::new();
    let mut levels = 0;
    for (label, x, y) in surd_corpus() {
        let cert = match certify_equivalence(&x, &y, CertifyConfig::default()) {
            Ok(c) => c,
            Err(e) => {
                bound_failures.push(format!("{label}: {e}"));
                embedded_failures.push(format!("{label}: {e}"));
                continue;
            }
        };
        let CertificateBody::Case3(d) = &cert.body else {
            bound_failures.push(format!("{label}: classified {}", cert.case()));
            continue;
        };
        if d.k_max != d.k_min + 12 {
            bound_failures.push(format!("{label}: window {}..={}", d.k_min, d.k_max));
        }
        levels += d.levels.len();
        check_dyadic_bounds(&label, &x, &y, d, &mut bound_failures);

        let report = verify_certificate(&cert, &x, &y);
        for level in &d.levels {
            let k = level.k;
            if level.embedded.common_denominator != 1u64 << k {
                embedded_failures.push(format!("{label} k={k}: N = {}", level.embedded.common_denominator));
            }
            let embedded: Vec<_> =
                report.obligations.iter().filter(|o| o.k == Some(k) && o.name.starts_with("embedded.")).collect();
            if embedded.is_empty() {
                embedded_failures.push(format!("{label} k={k}: no embedded obligations"));
            }
            if let Some(o) = embedded.iter().find(|o| !o.passed) {
                embedded_failures.push(format!("{label} k={k}: {} {}", o.name, o.detail));
            }
        }
        if !report.passed {
            let first = report.failures().next().unwrap();
            bound_failures.push(format!("{label}: verifier rejected {} at {:?}", first.name, first.k));
        }
    }
    (
        Outcome::new(bound_failures, format!("21 pairs, {levels} levels, exact comparisons")),
        Outcome::new(embedded_failures, format!("{levels} embedded certificates with N = 2^k")),
    )
}

fn criterion_5() -> Outcome {
    let mut rng = rng_from_seed(505);
    let psis = [
        RegretFunction::Difference,
        RegretFunction::UtilityDiff(Utility::Power { alpha: 2.0 }),
        RegretFunction::UtilityDiff(Utility::Exponential { beta: 0.1 }),
    ];
    let mut failures = Vec::new();
    for i in 0..100 {
        let (x, y) = gen::fosd_pair(&mut rng);
        if fosd_compare(&x, &y) != FosdOrder::StrictDom {
            failures.push(format!("pair {i}: not STRICT_DOM"));
        }
        if comonotone_couple(&x.distribution(), &y.distribution()).dominance() != (true, true) {
            failures.push(format!("pair {i}: coupling not cell-wise strictly dominant"));
        }
        for psi in &psis {
            match prefer(psi, &RegretFunctional::Expectation, &x, &y, DEFAULT_TOLERANCE) {
                Ok(p) if p.verdict == Verdict::Prefer => {}
                Ok(p) => failures.push(format!("pair {i}: {psi:?} gave {:?}", p.verdict)),
                Err(e) => failures.push(format!("pair {i}: {e}")),
            }
        }
    }
    Outcome::new(failures, "100 pairs, 3 regret functions".into())
}

fn criterion_6() -> Outcome {
    let target = Distribution::from_pairs([(q(10, 1), Scalar::frac(1, 2)), (q(20, 1), Scalar::frac(1, 2))]).unwrap();
    let seq: Vec<Distribution> = (1..=20u32)
        .map(|k| {
            let h = BigRational::new(BigInt::one(), BigInt::one() << k);
            Distribution::from_pairs([(q(10, 1) + &h, Scalar::frac(1, 2)), (q(20, 1) - &h, Scalar::frac(1, 2))]).unwrap()
        })
        .collect();
    let mut failures = Vec::new();
    match skorokhod_represent(&seq, &target, &[q(1, 8)]) {
        Ok(report) => {
            for row in &report.rows {
                let k = row.k as u32;
                if !row.distribution_matches {
                    failures.push(format!("k={k}: F of X̄_k differs from seq[k]"));
                }
                if row.levy != Scalar::dyadic(k) {
                    failures.push(format!("k={k}: Lévy distance {}", row.levy));
                }
                if k >= 3 && !row.eps[0].prob.is_zero() {
                    failures.push(format!(
                        "k={k}: P(|X̄_k − X| ≥ 1/8) = {} (|X̄_k − X| = 2^-{k} everywhere)",
                        row.eps[0].prob
                    ));
                }
            }
        }
        Err(e) => failures.push(e.to_string()),
    }
    Outcome::new(failures, "k = 1..20".into())
}

fn criterion_7() -> Outcome {
    const SAMPLES: usize = 1_000_000;
    let mut rng = rng_from_seed(707);
    let mut mc_rng = rng_from_seed(708);
    let mut failures = Vec::new();
    for i in 0..20 {
        let x = gen::random_rv(&mut rng, 6, true);
        let y = gen::random_rv(&mut rng, 6, true);
        let eps = q(5 * rng.gen_range(1..=6), 1);
        let exact = prob_diff_exceeds(&x, &y, &eps).unwrap().to_f64();
        let eps_f = num_traits::ToPrimitive::to_f64(&eps).unwrap();
        let estimate = monte_carlo(&mut mc_rng, SAMPLES, &x, &y, |a, b| (a - b).abs() >= eps_f);
        if !within_three_se(estimate, exact, SAMPLES) {
            failures.push(format!("pair {i}: P(|X−Y| ≥ {eps}) exact {exact}, sampled {estimate}"));
        }
        let cell = x.cells().choose(&mut rng).unwrap();
        let value = num_traits::ToPrimitive::to_f64(&cell.outcome).unwrap();
        let exact = x.distribution().mass_of(&cell.outcome).to_f64();
        let estimate = monte_carlo(&mut mc_rng, SAMPLES, &x, &y, |a, _| a == value);
        if !within_three_se(estimate, exact, SAMPLES) {
            failures.push(format!("pair {i}: P(X = {}) exact {exact}, sampled {estimate}", cell.outcome));
        }
    }
    let mut disagreements = 0;
    for _ in 0..10_000 {
        let mut draw = || {
            Scalar::new(
                q(rng.gen_range(-10_000..10_000), rng.gen_range(1..1000)),
                q(rng.gen_range(-10_000..10_000), rng.gen_range(1..1000)),
            )
        };
        let (a, b) = (draw(), draw());
        // Near-ties stress the comparison: b shares a's rational part half the time.
        let b = if rng.gen_bool(0.5) { Scalar::new(a.rat().clone(), b.surd().clone()) } else { b };
        if scalar_compare(&a, &b) != decimal_compare(&a, &b, 200) {
            disagreements += 1;
            if failures.len() < 5 {
                failures.push(format!("scalar_compare({a}, {b}) disagrees with the decimal oracle"));
            }
        }
    }
    Outcome::new(failures, format!("20 pairs × 2 events × 10^6 samples; 10^4 comparisons, {disagreements} disagreements"))
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    fn expect(failures: &mut Vec<String>, label: &str, report: VerificationReport, name: &str) {
        if report.passed || !report.failed(name, None) {
            failures.push(format!("{label}: expected {name} to fail"));
        }
    }

    let x = rv(&[("0", "1/3", 10), ("1/3", "2/3", 20), ("2/3", "1", 30)]);
    let y = rv(&[("0", "1/3", 20), ("1/3", "2/3", 30), ("2/3", "1", 10)]);
    let mut cert = certify_equivalence(&x, &y, CertifyConfig::default()).unwrap();
    if let CertificateBody::Case1(chain) = &mut cert.body {
        chain.pi_hat[0] = chain.pi_hat[1];
    }
    expect(&mut failures, "broken bijection", verify_certificate(&cert, &x, &y), "pi_hat_bijective");

    let x = rv(&[("0", "0+1/4*sqrt2", 10), ("0+1/4*sqrt2", "1/2", 20), ("1/2", "1", 30)]);
    let y = rv(&[("0", "1/2-1/4*sqrt2", 20), ("1/2-1/4*sqrt2", "1-1/4*sqrt2", 30), ("1-1/4*sqrt2", "1", 10)]);
    let mut cert = certify_equivalence(&x, &y, CertifyConfig::default()).unwrap();
    let mut removed = false;
    if let CertificateBody::Case3(d) = &mut cert.body {
        if let Some(level) = d.levels.iter_mut().find(|l| !l.x_flips.is_empty() || !l.y_flips.is_empty()) {
            removed = level.x_flips.pop().or_else(|| level.y_flips.pop()).is_some();
        }
    }
    if removed {
        expect(&mut failures, "removed flip", verify_certificate(&cert, &x, &y), "item_a");
    } else {
        failures.push("removed flip: no level with flips".into());
    }

    let x = rv(&[("0", "0+1/2*sqrt2", 10), ("0+1/2*sqrt2", "1", 20)]);
    let y = rv(&[("0", "1-1/2*sqrt2", 20), ("1-1/2*sqrt2", "1", 10)]);
    let mut cert = certify_equivalence(&x, &y, CertifyConfig::default()).unwrap();
    if let CertificateBody::Case3(d) = &mut cert.body {
        d.sentinel = d.outcomes[0].clone();
    }
    expect(&mut failures, "sentinel among outcomes", verify_certificate(&cert, &x, &y), "sentinel_fresh");
    Outcome::new(failures, "broken bijection, removed flip, sentinel c ∈ {x_i}".into())
}

fn main() -> ExitCode {
    let names = [
        "Case 1 round-trip",
        "Case 2 round-trip",
        "Case 3 exact bounds",
        "embedded equivalence at each k",
        "FOSD monotonicity",
        "Skorokhod desk test",
        "oracle cross-check",
        "negative controls",
    ];
    fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    }
    let mut all = true;
    let mut report = |n: usize, outcome: Outcome, secs: f64| {
        all &= outcome.passed;
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {n} ({}): {status} [{secs:.1}s] {}", names[n - 1], outcome.detail);
    };
    for (n, f) in [(1, criterion_1 as fn() -> Outcome), (2, criterion_2)] {
        let (outcome, secs) = timed(f);
        report(n, outcome, secs);
    }
    let ((c3, c4), secs) = timed(criteria_3_and_4);
    report(3, c3, secs);
    report(4, c4, secs);
    for (n, f) in [(5, criterion_5 as fn() -> Outcome), (6, criterion_6), (7, criterion_7), (8, criterion_8)] {
        let (outcome, secs) = timed(f);
        report(n, outcome, secs);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
