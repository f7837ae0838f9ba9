use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use num_rational::BigRational;
use probeq_core::certificate::CertificateBody;
use probeq_core::coupling::check_fosd_preference;
use probeq_core::gen::{generate, rng_from_seed, PairKind};
use probeq_core::regret::prefer;
use probeq_core::rv::first_mismatch;
use probeq_core::scalar::format_rational;
use probeq_core::{
    certify_equivalence, comonotone_couple, fosd_compare, prob_differ, skorokhod_represent, verify_certificate,
    CertifyConfig, Error, EquivalenceCertificate, FosdOrder, VerificationReport,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::input;
use crate::render::{print_json, Precision};
use crate::{Kind, Status};

fn status(ok: bool) -> Status {
    if ok {
        Status::Positive
    } else {
        Status::Negative
    }
}

pub fn gen(kind: Kind, seed: u64, out: Option<(PathBuf, PathBuf)>) -> Result<Status> {
    let kind = match kind {
        Kind::Case1 => PairKind::Case1,
        Kind::Rational => PairKind::Rational,
        Kind::Surd => PairKind::Surd,
        Kind::Fosd => PairKind::Fosd,
    };
    let (x, y) = generate(kind, &mut rng_from_seed(seed));
    match out {
        Some((px, py)) => {
            for (path, rv) in [(px, &x), (py, &y)] {
                let text = serde_json::to_string_pretty(rv)?;
                fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
            }
        }
        None => print_json(&json!({ "kind": kind, "seed": seed, "x": x, "y": y })),
    }
    Ok(Status::Positive)
}

pub fn eq_dist(p: Precision, x: &Path, y: &Path) -> Result<Status> {
    let (fx, fy) = (input::load_rv(x)?.distribution(), input::load_rv(y)?.distribution());
    let mismatch = first_mismatch(&fx, &fy).map(|(outcome, left, right)| {
        json!({ "outcome": format_rational(&outcome), "x_mass": p.num(&left), "y_mass": p.num(&right) })
    });
    let equal = mismatch.is_none();
    print_json(&json!({
        "equal": equal,
        "x": p.distribution(&fx),
        "y": p.distribution(&fy),
        "first_mismatch": mismatch,
    }));
    Ok(status(equal))
}

pub fn fosd(p: Precision, x: &Path, y: &Path) -> Result<Status> {
    let (x, y) = (input::load_rv(x)?, input::load_rv(y)?);
    let order = fosd_compare(&x, &y);
    let (fx, fy) = (x.distribution(), y.distribution());
    let points: BTreeSet<&BigRational> = fx.atoms().iter().chain(fy.atoms()).map(|a| &a.outcome).collect();
    let cdf: Vec<Value> = points
        .into_iter()
        .map(|t| json!({ "t": format_rational(t), "f_x": p.num(&fx.cdf(t)), "f_y": p.num(&fy.cdf(t)) }))
        .collect();
    print_json(&json!({ "order": order, "cdf": cdf }));
    Ok(status(matches!(order, FosdOrder::StrictDom | FosdOrder::Equal)))
}

fn summary(cert: &EquivalenceCertificate, x: &probeq_core::SimpleRV, y: &probeq_core::SimpleRV) -> Vec<String> {
    let mut lines = vec![format!("case: {}", cert.case())];
    match &cert.body {
        CertificateBody::Case1(chain) => {
            lines.push(format!("cells: {}", chain.n_cells));
            lines.push(format!("order_m: {}", chain.order_m));
        }
        CertificateBody::Case2(r) => {
            lines.push(format!("common denominator: {}", r.common_denominator));
            lines.push(format!("order_m: {}", r.chain.order_m));
        }
        CertificateBody::Case3(d) => {
            lines.push(format!("refinement cells: {}", d.refinement.len()));
            lines.push(format!("sentinel: {}", format_rational(&d.sentinel)));
            lines.push(format!("k window: [{}, {}] ({} levels)", d.k_min, d.k_max, d.levels.len()));
            for level in &d.levels {
                let worst = level.imbalance.iter().map(|s| s.abs()).max().unwrap_or_default();
                lines.push(format!(
                    "k={}: max imbalance {} <= {}; P(Xbar != X) = {}, P(Ybar != Y) = {} <= {}",
                    level.k,
                    worst,
                    level.imbalance_bound,
                    prob_differ(&level.x_bar, x),
                    prob_differ(&level.y_bar, y),
                    level.disagreement_bound,
                ));
            }
        }
    }
    lines
}

pub fn certify(x: &Path, y: &Path, k_min: Option<u32>, k_max: Option<u32>, out: Option<&Path>) -> Result<Status> {
    let (x, y) = (input::load_rv(x)?, input::load_rv(y)?);
    let cert = match certify_equivalence(&x, &y, CertifyConfig { k_min, k_max }) {
        Ok(cert) => cert,
        Err(Error::DistributionsDiffer { outcome, left, right }) => {
            outln!("distributions differ: first mismatching atom at outcome {outcome}: P(X = {outcome}) = {left}, P(Y = {outcome}) = {right}");
            return Ok(Status::Negative);
        }
        Err(e) => return Err(e.into()),
    };
    let text = cert.to_json()?;
    let lines = summary(&cert, &x, &y);
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
            for line in lines {
                outln!("{line}");
            }
            outln!("written: {}", path.display());
        }
        None => {
            outln!("{text}");
            let mut err = std::io::stderr().lock();
            for line in lines {
                writeln!(err, "{line}")?;
            }
        }
    }
    Ok(Status::Positive)
}

fn verify_files(cert: &Path, x: &Path, y: &Path) -> Result<VerificationReport> {
    let cert = input::load_certificate(cert)?;
    let (x, y) = (input::load_rv(x)?, input::load_rv(y)?);
    Ok(verify_certificate(&cert, &x, &y))
}

pub fn verify(cert: &Path, x: &Path, y: &Path, as_json: bool) -> Result<Status> {
    let report = verify_files(cert, x, y)?;
    if as_json {
        print_json(&report);
    } else {
        outln!("{report}");
    }
    Ok(status(report.passed))
}

#[derive(Deserialize)]
struct BatchEntry {
    certificate: PathBuf,
    x: PathBuf,
    y: PathBuf,
}

#[derive(Serialize)]
struct BatchResult {
    certificate: PathBuf,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<String>,
}

pub fn verify_batch(list: &Path, jobs: usize, as_json: bool) -> Result<Status> {
    let entries: Vec<BatchEntry> = input::read_json(list, "batch list")?;
    let base = list.parent().unwrap_or(Path::new("."));
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<BatchResult>>> = entries.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, entries.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(entry) = entries.get(i) else { break };
                let outcome = verify_files(&base.join(&entry.certificate), &base.join(&entry.x), &base.join(&entry.y));
                let result = match outcome {
                    Ok(report) => BatchResult {
                        certificate: entry.certificate.clone(),
                        passed: report.passed,
                        error: None,
                        failures: report.failures().map(|o| match o.k {
                            Some(k) => format!("{} [k={k}]", o.name),
                            None => o.name.clone(),
                        }).collect(),
                    },
                    Err(e) => BatchResult {
                        certificate: entry.certificate.clone(),
                        passed: false,
                        error: Some(format!("{e:#}")),
                        failures: Vec::new(),
                    },
                };
                *results[i].lock().expect("no panics while holding the lock") = Some(result);
            });
        }
    });
    let results: Vec<BatchResult> =
        results.into_iter().map(|m| m.into_inner().expect("unpoisoned").expect("every entry visited")).collect();
    if as_json {
        print_json(&results);
    } else {
        for r in &results {
            let path = r.certificate.display();
            match (&r.error, r.passed) {
                (Some(e), _) => outln!("ERROR {path}: {e}"),
                (None, true) => outln!("PASS {path}"),
                (None, false) => outln!("FAIL {path}: {}", r.failures.join(", ")),
            }
        }
    }
    if results.iter().any(|r| r.error.is_some()) {
        anyhow::bail!("{} of {} entries could not be read", results.iter().filter(|r| r.error.is_some()).count(), results.len());
    }
    Ok(status(results.iter().all(|r| r.passed)))
}

pub fn regret(p: Precision, x: &Path, y: &Path, psi: &str, v: &str, tol: f64, coupled: bool) -> Result<Status> {
    let (x, y) = (input::load_rv(x)?, input::load_rv(y)?);
    let (psi, v) = (input::regret_function(psi)?, input::functional(v)?);
    if coupled {
        let report = check_fosd_preference(&psi, &v, &x, &y)?;
        print_json(&report);
        return Ok(Status::Positive);
    }
    let pref = prefer(&psi, &v, &x, &y, tol)?;
    let lottery: Vec<Value> = pref
        .lottery
        .atoms()
        .iter()
        .map(|a| json!({ "value": a.value, "prob": p.num(&a.prob) }))
        .collect();
    print_json(&json!({
        "verdict": pref.verdict,
        "value": pref.value,
        "exact": pref.exact.as_ref().map(|e| p.num(e)),
        "lottery": lottery,
    }));
    Ok(Status::Positive)
}

pub fn couple(p: Precision, f: &Path, g: &Path) -> Result<Status> {
    let (f, g) = (input::load_law(f)?, input::load_law(g)?);
    let coupling = comonotone_couple(&f, &g);
    let cells: Vec<Value> = coupling
        .common_cells
        .iter()
        .zip(coupling.cell_values())
        .map(|(cell, (a, b))| {
            json!({
                "event": cell,
                "measure": p.num(&cell.measure()),
                "x": format_rational(a),
                "y": format_rational(b),
            })
        })
        .collect();
    let (all_geq, some_gt) = coupling.dominance();
    print_json(&json!({
        "order": probeq_core::fosd_compare_dist(&f, &g),
        "cells": cells,
        "x_dominates_cellwise": all_geq,
        "strict_somewhere": some_gt,
    }));
    Ok(Status::Positive)
}

pub fn skorokhod(p: Precision, target: &Path, seq: &[PathBuf], eps: &[BigRational]) -> Result<Status> {
    let target = input::load_law(target)?;
    let seq = seq.iter().map(|path| input::load_law(path)).collect::<Result<Vec<_>>>()?;
    let report = skorokhod_represent(&seq, &target, eps)?;
    let rows: Vec<Value> = report
        .rows
        .iter()
        .map(|row| {
            let eps: serde_json::Map<String, Value> = row
                .eps
                .iter()
                .map(|e| (format_rational(&e.eps), json!(p.num(&e.prob))))
                .collect();
            json!({
                "k": row.k,
                "distribution_matches": row.distribution_matches,
                "levy": p.num(&row.levy),
                "eps": eps,
            })
        })
        .collect();
    print_json(&json!({ "target": p.distribution(&report.target), "rows": rows }));
    Ok(Status::Positive)
}
