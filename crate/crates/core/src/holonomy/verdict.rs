//! Three-valued verdicts of the sampled equivalence test on words.

use serde::{Deserialize, Serialize};

use crate::groupoid::GroupoidElement;

use super::bisection::{carried_bisection, carries_test};
use super::oracle::QuotientOracle;
use super::word::{same_groupoid, word_phi, Word};
use super::HolonomyError;

/// Tolerances and sampling scheme of the equivalence test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivParams {
    /// Distance of `Phi` values above which words are distinct.
    pub tol_phi: f64,
    /// Residual at which a sample counts as matched.
    pub tol_residual: f64,
    pub sample_radius: f64,
    pub sample_count: usize,
    pub max_radius_halvings: usize,
    pub newton_max_iter: usize,
    pub fd_step: f64,
    /// Parameter deviations below this are treated as zero when checking
    /// that a solution branch is continuous.
    pub continuity_floor: f64,
}

impl Default for EquivParams {
    fn default() -> Self {
        EquivParams {
            tol_phi: 1e-5,
            tol_residual: 1e-6,
            sample_radius: 0.05,
            sample_count: 8,
            max_radius_halvings: 8,
            newton_max_iter: 50,
            fd_step: 1e-6,
            continuity_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleStatus {
    Converged,
    /// Newton stopped above the residual tolerance.
    Stalled,
    /// A solution exists but is not continuously connected to the word's
    /// own parameters.
    Jump,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResidual {
    pub direction: String,
    pub sample: Vec<f64>,
    pub residual: f64,
    pub lambda: Vec<f64>,
    pub iterations: usize,
    pub status: SampleStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    PhiMismatch {
        distance: f64,
        left: GroupoidElement,
        right: GroupoidElement,
    },
    /// No common bisection at `sample`, and the quotient oracle confirms
    /// that `quotient_element = k1 k2^{-1}` is outside the kernel.
    BisectionMismatch {
        sample: Vec<f64>,
        residual: f64,
        status: SampleStatus,
        quotient_element: GroupoidElement,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Equivalent {
        tolerance: f64,
        samples_used: usize,
        max_residual: f64,
        direction: String,
    },
    NotEquivalent {
        witness: Witness,
    },
    Unknown {
        residuals: Vec<SampleResidual>,
        note: String,
    },
}

impl Verdict {
    pub(crate) fn unknown(residuals: Vec<SampleResidual>, note: String) -> Self {
        Verdict::Unknown { residuals, note }
    }

    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }

    pub fn is_not_equivalent(&self) -> bool {
        matches!(self, Verdict::NotEquivalent { .. })
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::Equivalent { .. } => "equivalent",
            Verdict::NotEquivalent { .. } => "not_equivalent",
            Verdict::Unknown { .. } => "unknown",
        }
    }

    fn residuals(&self) -> &[SampleResidual] {
        match self {
            Verdict::Unknown { residuals, .. } => residuals,
            _ => &[],
        }
    }
}

/// Semi-decision of `w1 ~ w2`. Distinct `Phi` values give `NotEquivalent`;
/// otherwise each word is tested for carrying the other's constant-
/// parameter bisection. When neither does, `NotEquivalent` is issued only
/// if the quotient oracle confirms it, and `Unknown` otherwise.
pub fn equivalent(
    w1: &Word,
    w2: &Word,
    params: &EquivParams,
    oracle: Option<&QuotientOracle>,
) -> Result<Verdict, HolonomyError> {
    if !same_groupoid(w1.groupoid(), w2.groupoid()) {
        return Err(HolonomyError::GroupoidMismatch);
    }
    let groupoid = w1.groupoid();
    let phi1 = word_phi(w1)?;
    let phi2 = word_phi(w2)?;
    let distance = groupoid.distance(&phi1, &phi2)?;
    if distance > params.tol_phi {
        return Ok(Verdict::NotEquivalent {
            witness: Witness::PhiMismatch {
                distance,
                left: phi1,
                right: phi2,
            },
        });
    }
    let forward = carries_test(w2, &carried_bisection(w1), params, "second_carries_first");
    if forward.is_equivalent() {
        return Ok(forward);
    }
    let backward = carries_test(w1, &carried_bisection(w2), params, "first_carries_second");
    if backward.is_equivalent() {
        return Ok(backward);
    }
    let mut rows: Vec<SampleResidual> = forward.residuals().to_vec();
    rows.extend(backward.residuals().iter().cloned());
    let Some(oracle) = oracle else {
        return Ok(Verdict::unknown(rows, "no common bisection found and no oracle available".into()));
    };
    match oracle.compare(w1, w2) {
        Ok(report) if !report.equivalent => {
            let worst = rows
                .iter()
                .filter(|r| r.status != super::verdict::SampleStatus::Converged)
                .max_by(|a, b| a.residual.total_cmp(&b.residual))
                .cloned();
            match worst {
                Some(row) => Ok(Verdict::NotEquivalent {
                    witness: Witness::BisectionMismatch {
                        sample: row.sample,
                        residual: row.residual,
                        status: row.status,
                        quotient_element: report.quotient_element,
                    },
                }),
                None => Ok(Verdict::unknown(rows, "oracle reports distinct elements without a sample witness".into())),
            }
        }
        Ok(_) => Ok(Verdict::unknown(rows, "oracle reports equivalence but no common bisection was found".into())),
        Err(e) => Ok(Verdict::unknown(rows, format!("oracle failed: {e}"))),
    }
}

/// `equivalent(w, empty word at s(w))`.
pub fn identity_test(w: &Word, params: &EquivParams, oracle: Option<&QuotientOracle>) -> Result<Verdict, HolonomyError> {
    let unit = Word::empty(w.groupoid().clone(), w.source())?;
    equivalent(w, &unit, params, oracle)
}
