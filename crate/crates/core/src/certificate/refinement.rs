//! Case 2: every cell of the common refinement has rational measure, so
//! splitting each cell into pieces of measure `1/N` (N a common
//! denominator) reduces the pair to a permutation chain.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::chain::PermutationChainCertificate;
use crate::error::{Error, Result};
use crate::rv::{common_refinement, RefinementCell, SimpleRV};
use crate::scalar::Scalar;

/// The chain's cells are the `N` subcells; `owners[i]` is the refinement
/// cell containing subcell `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefinementCertificate {
    pub common_denominator: u64,
    pub refinement: Vec<RefinementCell>,
    pub owners: Vec<usize>,
    pub chain: PermutationChainCertificate,
}

impl RefinementCertificate {
    pub fn subcells(&self) -> &[crate::event::Event] {
        &self.chain.cells
    }
}

/// Outcome-level refinement `{X = u} ∩ {Y = v}` of positive measure,
/// ordered by where each cell starts in `[0,1)`.
pub fn outcome_refinement(x: &SimpleRV, y: &SimpleRV) -> Vec<RefinementCell> {
    let mut cells = common_refinement(&x.canonicalize(), &y.canonicalize());
    cells.sort_by(|a, b| a.event.start().cmp(&b.event.start()));
    cells
}

/// Least common denominator of the refinement's cell measures; fails on an
/// irrational measure.
pub fn common_denominator(cells: &[RefinementCell]) -> Result<BigInt> {
    cells.iter().try_fold(BigInt::one(), |acc, c| {
        let m = c.measure();
        let r = m.as_rational().ok_or_else(|| Error::IrrationalCell(m.to_string()))?;
        Ok(acc.lcm(r.denom()))
    })
}

pub fn build_case2(x: &SimpleRV, y: &SimpleRV) -> Result<RefinementCertificate> {
    build_case2_with_denominator(x, y, None)
}

/// Case 2 with an optionally prescribed `N`, which must be a multiple of
/// every cell's denominator (Case 3 embeds with `N = 2^k`).
pub fn build_case2_with_denominator(
    x: &SimpleRV,
    y: &SimpleRV,
    denominator: Option<u64>,
) -> Result<RefinementCertificate> {
    let refinement = outcome_refinement(x, y);
    let lcm = common_denominator(&refinement)?;
    let n = match denominator {
        Some(n) => {
            if !BigInt::from(n).is_multiple_of(&lcm) {
                return Err(Error::DenominatorMismatch {
                    denominator: n.to_string(),
                    measure: format!("1/{lcm}"),
                });
            }
            n
        }
        None => lcm.to_u64().ok_or_else(|| Error::DenominatorMismatch {
            denominator: lcm.to_string(),
            measure: "u64 range".into(),
        })?,
    };
    let unit = Scalar::from_rational(BigRational::new(BigInt::one(), n.into()));
    let mut cells = Vec::with_capacity(n as usize);
    let mut owners = Vec::with_capacity(n as usize);
    let mut x_values = Vec::with_capacity(n as usize);
    let mut y_values = Vec::with_capacity(n as usize);
    for (j, cell) in refinement.iter().enumerate() {
        let count = cell.measure().mul_rational(&BigRational::from_integer(n.into()));
        let count = count
            .as_rational()
            .filter(|c| c.is_integer())
            .and_then(|c| c.to_integer().to_usize())
            .ok_or_else(|| Error::DenominatorMismatch {
                denominator: n.to_string(),
                measure: cell.measure().to_string(),
            })?;
        let (pieces, rest) = cell.event.chop(&unit, count)?;
        debug_assert!(rest.is_empty());
        for piece in pieces {
            cells.push(piece);
            owners.push(j);
            x_values.push(cell.x_val.clone());
            y_values.push(cell.y_val.clone());
        }
    }
    let chain = PermutationChainCertificate::from_cells(cells, x_values, y_values)?;
    Ok(RefinementCertificate { common_denominator: n, refinement, owners, chain })
}
