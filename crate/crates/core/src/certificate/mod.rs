//! Equivalence certificates: finite witnesses that two equally distributed
//! simple random variables are indifferent under any regret-based
//! preference that is continuous in probability.
//!
//! There are three shapes, chosen by [`classify_case`]:
//!
//! * **Case 1**: both variables sit on the same equiprobable cells, and a
//!   permutation chain of finite order links them.
//! * **Case 2**: all cells of the common refinement have rational measure;
//!   splitting to a common denominator reduces to Case 1.
//! * **Case 3**: some refinement cell has irrational measure; dyadic
//!   approximations `X̄^k, Ȳ^k` converge in probability to `X, Y` and each
//!   approximating pair is certified by Case 2.
//!
//! [`verify_certificate`] re-derives every claim with exact arithmetic.

pub mod chain;
pub mod dyadic;
pub mod refinement;
pub mod verify;

use serde::{Deserialize, Serialize};

pub use chain::{build_case1, PairCount, PermutationChainCertificate};
pub use dyadic::{build_case3, DyadicCell, DyadicCertificate, DyadicLevel, DEFAULT_K_SPAN};
pub use refinement::{build_case2, build_case2_with_denominator, RefinementCertificate};
pub use verify::{verify_certificate, verify_chain, Obligation, VerificationReport};

use crate::error::{Error, Result};
use crate::rv::{first_mismatch, Distribution, SimpleRV};
use crate::scalar::{format_rational, Scalar};

/// Schema tag written into every certificate file.
pub const SCHEMA: &str = "probeq-certificate/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    #[serde(rename = "CASE1")]
    Case1,
    #[serde(rename = "CASE2")]
    Case2,
    #[serde(rename = "CASE3")]
    Case3,
}

impl std::fmt::Display for Case {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Case::Case1 => "CASE1",
            Case::Case2 => "CASE2",
            Case::Case3 => "CASE3",
        })
    }
}

fn ensure_equal_distributions(x: &SimpleRV, y: &SimpleRV) -> Result<()> {
    match first_mismatch(&x.distribution(), &y.distribution()) {
        Some((outcome, left, right)) => Err(Error::DistributionsDiffer {
            outcome: format_rational(&outcome),
            left: left.to_string(),
            right: right.to_string(),
        }),
        None => Ok(()),
    }
}

/// Which construction applies to an equally distributed pair, judged on
/// the outcome-level partitions `{X = x_i}` and `{Y = y_j}`.
pub fn classify_case(x: &SimpleRV, y: &SimpleRV) -> Result<Case> {
    ensure_equal_distributions(x, y)?;
    let cx = x.canonicalize().sorted_by_position();
    let cy = y.canonicalize().sorted_by_position();
    let n = cx.cells().len();
    let unit = Scalar::frac(1, n as i64);
    let same_cells = cy.cells().len() == n
        && cx.cells().iter().zip(cy.cells()).all(|(a, b)| a.event == b.event && a.event.measure() == unit);
    if same_cells {
        return Ok(Case::Case1);
    }
    let all_rational = refinement::outcome_refinement(x, y).iter().all(|c| c.measure().is_rational());
    Ok(if all_rational { Case::Case2 } else { Case::Case3 })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case")]
pub enum CertificateBody {
    #[serde(rename = "CASE1")]
    Case1(PermutationChainCertificate),
    #[serde(rename = "CASE2")]
    Case2(RefinementCertificate),
    #[serde(rename = "CASE3")]
    Case3(DyadicCertificate),
}

impl CertificateBody {
    pub fn case(&self) -> Case {
        match self {
            CertificateBody::Case1(_) => Case::Case1,
            CertificateBody::Case2(_) => Case::Case2,
            CertificateBody::Case3(_) => Case::Case3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceCertificate {
    pub schema: String,
    pub x_distribution: Distribution,
    pub y_distribution: Distribution,
    pub body: CertificateBody,
}

impl EquivalenceCertificate {
    pub fn case(&self) -> Case {
        self.body.case()
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cert: EquivalenceCertificate =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if cert.schema != SCHEMA {
            return Err(Error::Schema(cert.schema));
        }
        Ok(cert)
    }
}

/// Window of dyadic levels for Case 3. `None` picks the smallest admissible
/// `k_min` and `k_max = k_min + DEFAULT_K_SPAN`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CertifyConfig {
    pub k_min: Option<u32>,
    pub k_max: Option<u32>,
}

/// Classifies the pair and runs the matching construction.
pub fn certify_equivalence(x: &SimpleRV, y: &SimpleRV, config: CertifyConfig) -> Result<EquivalenceCertificate> {
    let case = classify_case(x, y)?;
    let body = match case {
        Case::Case1 => CertificateBody::Case1(build_case1(&x.canonicalize(), &y.canonicalize())?),
        Case::Case2 => CertificateBody::Case2(build_case2(x, y)?),
        Case::Case3 => {
            let k_min = config.k_min.unwrap_or_else(|| {
                let masses: Vec<Scalar> =
                    refinement::outcome_refinement(x, y).iter().map(|c| c.measure()).collect();
                dyadic::smallest_k(&masses)
            });
            let k_max = config.k_max.unwrap_or(k_min + DEFAULT_K_SPAN);
            CertificateBody::Case3(build_case3(x, y, k_min, k_max)?)
        }
    };
    Ok(EquivalenceCertificate {
        schema: SCHEMA.to_string(),
        x_distribution: x.distribution(),
        y_distribution: y.distribution(),
        body,
    })
}
