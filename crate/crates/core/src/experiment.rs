//! Finite detectors, effective qubits and the measured form of the inequality.
//!
//! Each subsystem's pair of detector states spans a two-level space with
//! Pauli operators
//!
//! ```text
//! σ_x = |α⟩⟨β| + |β⟩⟨α|,   σ_y = i|α⟩⟨β| − i|β⟩⟨α|,   σ_z = |α⟩⟨α| − |β⟩⟨β|
//! ```
//!
//! where `|α⟩` is the `φ₁` box. Labels such as `"xz1"` name
//! `σ_x ⊗ σ_z ⊗ 1` with the first letter on the first subsystem.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::criterion::{box_scalar_products, CriterionResult, PartitionTerm, Probe};
use crate::error::{invalid, Error, Result};
use crate::setpart::partition_count;
use crate::states::CvState;

/// Tensor-product label convention, as written into every output.
pub const LABEL_CONVENTION: &str = "sigma_i ⊗ sigma_j ⊗ sigma_k";

const PSD_TOL: f64 = 1e-10;

/// ρ compressed onto the detector subspace.
///
/// Basis index bit `i` set means subsystem `i` is in its `|β⟩` (`φ₂`) box.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveQubitState {
    n: usize,
    matrix: DMatrix<f64>,
    trace: f64,
}

impl EffectiveQubitState {
    pub fn from_matrix(n: usize, matrix: DMatrix<f64>) -> Result<Self> {
        let d = 1usize << n;
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(invalid(format!("expected a {d}×{d} matrix for n = {n}")));
        }
        let scale = matrix.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return Err(invalid("matrix is not symmetric"));
        }
        let min_eig = matrix.clone().symmetric_eigenvalues().min();
        if min_eig < -PSD_TOL {
            return Err(invalid(format!(
                "matrix is not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        let trace = matrix.trace();
        if trace > 1.0 + PSD_TOL {
            return Err(invalid(format!("trace {trace} exceeds 1")));
        }
        Ok(Self { n, matrix, trace })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Weight of ρ inside the detector subspace.
    pub fn trace(&self) -> f64 {
        self.trace
    }
}

/// Compresses a state onto the detector subspace of a box probe.
pub fn effective_qubit_state(state: &CvState, probe: &Probe, tol: f64) -> Result<EffectiveQubitState> {
    let sp = box_scalar_products(state, probe, tol)?;
    let m = sp.matrix();
    // position-diagonal noise is not trace class; its box averages can add up past 1
    if m.trace() > 1.0 + PSD_TOL {
        return Err(invalid(format!(
            "compressed trace {} exceeds 1: the noise density is too concentrated on the detector boxes",
            m.trace()
        )));
    }
    EffectiveQubitState::from_matrix(sp.dim(), m)
}

/// Expectation values of all `4^n` Pauli strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTable {
    pub n: usize,
    pub values: BTreeMap<String, f64>,
}

impl PauliTable {
    /// Missing labels read as zero.
    pub fn get(&self, label: &str) -> f64 {
        self.values.get(label).copied().unwrap_or(0.0)
    }

    pub fn identity_label(&self) -> String {
        "1".repeat(self.n)
    }

    /// Every entry divided by `trace`.
    pub fn normalized(&self, trace: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|(k, v)| (k.clone(), v / trace)).collect(),
        }
    }
}

const LETTERS: [char; 4] = ['1', 'x', 'y', 'z'];

/// `σ[a][b]` for a single subsystem, `a, b ∈ {α = 0, β = 1}`.
fn pauli(letter: usize) -> [[Complex64; 2]; 2] {
    let (o, l, i) = (
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    match letter {
        0 => [[l, o], [o, l]],
        1 => [[o, l], [l, o]],
        2 => [[o, i], [-i, o]],
        _ => [[l, o], [o, -l]],
    }
}

/// `Tr(R · σ_label)` for every label.
pub fn pauli_expectations(eff: &EffectiveQubitState) -> PauliTable {
    let n = eff.n;
    let d = 1usize << n;
    let paulis: Vec<_> = (0..4).map(pauli).collect();
    let mut values = BTreeMap::new();
    for code in 0..1usize << (2 * n) {
        let letters: Vec<usize> = (0..n).map(|i| (code >> (2 * (n - 1 - i))) & 3).collect();
        let mut total = Complex64::new(0.0, 0.0);
        for e in 0..d {
            for e2 in 0..d {
                let r = eff.matrix[(e, e2)];
                if r == 0.0 {
                    continue;
                }
                // Tr(Rσ) = Σ R[e, e′] σ[e′, e]
                let mut s = Complex64::new(1.0, 0.0);
                for (i, &l) in letters.iter().enumerate() {
                    s *= paulis[l][e2 >> i & 1][e >> i & 1];
                }
                total += r * s;
            }
        }
        let label: String = letters.iter().map(|&l| LETTERS[l]).collect();
        values.insert(label, total.re);
    }
    PauliTable { n, values }
}

/// The tripartite, k = 2 inequality written in Pauli expectation values.
pub fn decomposed_lhs_n3k2(t: &PauliTable) -> Result<f64> {
    if t.n != 3 {
        return Err(invalid("the decomposed form exists for three subsystems only"));
    }
    let v = |l: &str| t.get(l);
    let re = v("xxx") - v("yyx") - v("yxy") - v("xyy");
    let im = v("yyy") - v("xxy") - v("xyx") - v("yxx");
    let coherence = Complex64::new(re, im).norm() / 8.0;
    let (one, zz1, z1z, _1zz) = (v("111"), v("zz1"), v("z1z"), v("1zz"));
    let (_11z, _1z1, z11, zzz) = (v("11z"), v("1z1"), v("z11"), v("zzz"));
    let pairs = [
        (
            one + zz1 - z1z - _1zz + _11z - _1z1 - z11 + zzz,
            one + zz1 - z1z - _1zz - _11z + _1z1 + z11 - zzz,
        ),
        (
            one - zz1 + z1z - _1zz + _11z - _1z1 + z11 - zzz,
            one - zz1 + z1z - _1zz - _11z + _1z1 - z11 + zzz,
        ),
        (
            one - zz1 - z1z + _1zz + _11z + _1z1 - z11 - zzz,
            one - zz1 - z1z + _1zz - _11z - _1z1 + z11 + zzz,
        ),
    ];
    let mut subtracted = 0.0;
    for (a, b) in pairs {
        let radicand = a * b;
        if radicand < -PSD_TOL {
            return Err(Error::InconsistentTable(format!("negative radicand {radicand:e}")));
        }
        subtracted += radicand.max(0.0).sqrt();
    }
    Ok(coherence - subtracted / 8.0)
}

/// The Pauli table of a compressed state with the decomposed inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableExpansion {
    pub labels: BTreeMap<String, f64>,
    pub trace_in_subspace: f64,
    pub decomposed_lhs: f64,
    /// Same inequality with the table divided by the subspace trace.
    pub decomposed_lhs_normalized: f64,
    pub convention: String,
}

pub fn observable_expansion(eff: &EffectiveQubitState) -> Result<ObservableExpansion> {
    let table = pauli_expectations(eff);
    let raw = decomposed_lhs_n3k2(&table)?;
    let normalized = if eff.trace > 0.0 {
        decomposed_lhs_n3k2(&table.normalized(eff.trace))?
    } else {
        0.0
    };
    Ok(ObservableExpansion {
        labels: table.values,
        trace_in_subspace: eff.trace,
        decomposed_lhs: raw,
        decomposed_lhs_normalized: normalized,
        convention: LABEL_CONVENTION.to_string(),
    })
}

/// Propagated measurement uncertainty of the inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyBudget {
    /// Absolute uncertainty of the off-diagonal term.
    pub o: f64,
    /// Relative uncertainty shared by all diagonal values.
    pub zeta: f64,
    /// Number of k-partitions.
    pub gamma: u64,
    pub exact: f64,
    pub bound: f64,
}

/// Gaussian error propagation through the partition terms.
///
/// A term `T = ∏_{j=1}^{2k} f_j^{1/2k}` whose factors carry relative error
/// `ζ` has `∂T/∂f_j · ζf_j = Tζ/2k`; summing the `2k` contributions in
/// quadrature gives `T²ζ²/2k`. The bound `o² + ζ²γ/8k³` follows when every
/// term is at most `1/2k`.
pub fn propagate_uncertainty(
    result: &CriterionResult,
    o: f64,
    zeta: f64,
    n: usize,
    k: usize,
) -> Result<UncertaintyBudget> {
    if !(o >= 0.0 && zeta >= 0.0 && o.is_finite() && zeta.is_finite()) {
        return Err(invalid("uncertainties must be finite and non-negative"));
    }
    if result.k != k {
        return Err(invalid(format!("result was evaluated for k = {}, not {k}", result.k)));
    }
    let gamma = partition_count(n, k)?;
    let kf = k as f64;
    let spread: f64 = result.partition_terms.iter().map(|t| t.value * t.value).sum::<f64>() / (2.0 * kf);
    let exact = (o * o + zeta * zeta * spread).sqrt();
    let bound = (o * o + zeta * zeta * gamma as f64 / (8.0 * kf * kf * kf)).sqrt();
    Ok(UncertaintyBudget {
        o,
        zeta,
        gamma,
        exact,
        bound,
    })
}

/// Scales every scalar product by a detector efficiency `τ ∈ [0, 1]`.
pub fn efficiency_scale(result: &CriterionResult, tau: f64) -> Result<CriterionResult> {
    if !(0.0..=1.0).contains(&tau) {
        return Err(invalid(format!("efficiency {tau} outside [0, 1]")));
    }
    let terms = result
        .partition_terms
        .iter()
        .map(|t| PartitionTerm {
            partition: t.partition.clone(),
            value: tau * t.value,
        })
        .collect();
    Ok(CriterionResult::from_terms(result.k, tau * result.offdiag_term, terms))
}
