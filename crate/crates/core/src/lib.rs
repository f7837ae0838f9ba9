//! Exact finite-valued random variables on `([0,1), Lebesgue)`, regret-based
//! preferences over them, and machine-checkable certificates that equally
//! distributed variables are indifferent.
//!
//! Probabilities and interval endpoints live in ℚ(√2) ([`Scalar`]) so that
//! irrational cell measures can be represented and compared exactly.

pub mod certificate;
pub mod coupling;
pub mod error;
pub mod event;
pub mod gen;
pub mod regret;
pub mod rv;
pub mod scalar;

pub use certificate::{
    certify_equivalence, classify_case, verify_certificate, Case, CertifyConfig, EquivalenceCertificate,
    VerificationReport,
};
pub use coupling::{check_fosd_preference, comonotone_couple, skorokhod_represent, Coupling};
pub use error::{Error, ParseError, Result};
pub use event::{Event, Interval};
pub use rv::{
    common_refinement, distribution, equal_in_distribution, fosd_compare, fosd_compare_dist,
    levy_distance, prob_diff_exceeds, prob_differ, quantile_rv, quantile_rv_in, Atom, Cell, Distribution,
    FosdOrder, OutcomeBounds, RefinementCell, SimpleRV,
};
pub use scalar::{nu, scalar_compare, Scalar};
