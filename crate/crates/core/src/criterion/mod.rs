//! Left-hand side of the k-separability inequality.
//!
//! For a probe `|φ₁⟩⊗|φ₂⟩` and a state `ρ`, every k-separable state satisfies
//!
//! ```text
//! |⟨φ₁|ρ|φ₂⟩| − Σ_{k-partitions} ∏_{blocks} [⟨χ|ρ|χ⟩·⟨χ′|ρ|χ′⟩]^{1/2k} ≤ 0
//! ```
//!
//! where `(χ, χ′)` are the probe points with the block's coordinates
//! exchanged. A positive value certifies that `ρ` is not k-separable.

mod boxed;
mod probe;

pub use boxed::{box_scalar_products, criterion_lhs_box, BoxScalarProducts};
pub use probe::{build_box_probe, build_probe, Probe, ProbeFamily};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::setpart::{enumerate_partitions, SetPartition};
use crate::states::CvState;

/// Relative margin: a result is a violation iff `lhs > VERDICT_REL_TOL · offdiag_term`.
pub const VERDICT_REL_TOL: f64 = 1e-12;

/// Diagonal values below this switch the partition product to log space.
const UNDERFLOW_GUARD: f64 = 1e-100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Violated,
    NotViolated,
}

impl Verdict {
    pub fn decide(lhs: f64, offdiag_term: f64) -> Self {
        if lhs > VERDICT_REL_TOL * offdiag_term {
            Verdict::Violated
        } else {
            Verdict::NotViolated
        }
    }

    pub fn is_violated(self) -> bool {
        self == Verdict::Violated
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionTerm {
    pub partition: SetPartition,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub k: usize,
    pub offdiag_term: f64,
    pub partition_terms: Vec<PartitionTerm>,
    pub lhs: f64,
    pub verdict: Verdict,
}

impl CriterionResult {
    /// Assembles `lhs` and the verdict from its parts.
    pub fn from_terms(k: usize, offdiag_term: f64, partition_terms: Vec<PartitionTerm>) -> Self {
        let subtracted: f64 = partition_terms.iter().map(|t| t.value).sum();
        let lhs = offdiag_term - subtracted;
        Self {
            k,
            offdiag_term,
            partition_terms,
            lhs,
            verdict: Verdict::decide(lhs, offdiag_term),
        }
    }

    pub fn is_violated(&self) -> bool {
        self.verdict.is_violated()
    }

    /// `lhs / offdiag_term`, zero when the off-diagonal term vanishes.
    pub fn relative_lhs(&self) -> f64 {
        if self.offdiag_term > 0.0 {
            self.lhs / self.offdiag_term
        } else {
            0.0
        }
    }
}

/// The matrix elements the inequality consumes.
///
/// `diag[mask]` is `⟨χ|ρ|χ⟩` for the point carrying `φ₂` on the subsystems
/// whose bit is set in `mask` (bit `i` is subsystem `i`) and `φ₁` elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarProducts {
    pub n: usize,
    pub offdiag: f64,
    pub diag: Vec<f64>,
}

impl ScalarProducts {
    pub fn assemble(&self, k: usize) -> Result<CriterionResult> {
        let n = self.n;
        if k < 1 || k > n {
            return Err(invalid(format!("k = {k} must lie in 1..={n}")));
        }
        let full = (1u32 << n) - 1;
        let power = 1.0 / (2 * k) as f64;
        let terms = enumerate_partitions(n, k)?
            .into_iter()
            .map(|partition| {
                let mut factors = Vec::with_capacity(2 * k);
                for b in 0..partition.k() {
                    let m = partition.block_mask(b);
                    factors.push(self.diag[m as usize]);
                    factors.push(self.diag[(full & !m) as usize]);
                }
                let value = geometric_term(&factors, power);
                PartitionTerm { partition, value }
            })
            .collect();
        Ok(CriterionResult::from_terms(k, self.offdiag.abs(), terms))
    }
}

/// `∏ f^power`, exactly zero if any factor is zero.
fn geometric_term(factors: &[f64], power: f64) -> f64 {
    if factors.iter().any(|&f| f <= 0.0) {
        return 0.0;
    }
    if factors.iter().any(|&f| f < UNDERFLOW_GUARD) {
        (power * factors.iter().map(|f| f.ln()).sum::<f64>()).exp()
    } else {
        factors.iter().map(|f| f.powf(power)).product()
    }
}

/// Sharp-probe matrix elements at all `2^n` exchanged points.
pub fn sharp_scalar_products(state: &CvState, probe: &Probe) -> Result<ScalarProducts> {
    let Probe::Sharp { phi1, phi2 } = probe else {
        return Err(invalid("sharp evaluation needs a sharp probe; use criterion_lhs_box"));
    };
    probe.validate()?;
    let n = state.dim();
    if phi1.len() != n {
        return Err(invalid(format!("probe has dimension {}, state has {n}", phi1.len())));
    }
    let mut point = vec![0.0; n];
    let diag = (0..1u32 << n)
        .map(|mask| {
            for i in 0..n {
                point[i] = if mask >> i & 1 == 1 { phi2[i] } else { phi1[i] };
            }
            state.diag_unchecked(&point)
        })
        .collect();
    Ok(ScalarProducts {
        n,
        offdiag: state.offdiag_unchecked(phi1, phi2),
        diag,
    })
}

/// Evaluates the inequality for a sharp probe.
pub fn criterion_lhs(state: &CvState, probe: &Probe, k: usize) -> Result<CriterionResult> {
    sharp_scalar_products(state, probe)?.assemble(k)
}
