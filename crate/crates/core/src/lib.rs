//! k-separability tests for continuous-variable multipartite states.
//!
//! The crate evaluates a permutation-based inequality that every k-separable
//! state obeys. A positive left-hand side proves the state is not
//! k-separable; for `k = 2` that is genuine multipartite entanglement.
//!
//! ```
//! use cvsep::criterion::{build_probe, criterion_lhs, ProbeFamily};
//! use cvsep::states::{build_family_state, CvState, DiagonalNoise, Family, FamilyParams};
//!
//! let pure = build_family_state(Family::GhzLike, &FamilyParams::ghz(1.0, 1.0))?;
//! let state = CvState::new(1.0, pure, DiagonalNoise::Gaussian { delta: 1.0 })?;
//! let probe = build_probe(ProbeFamily::GhzLike, 1.0)?;
//! let result = criterion_lhs(&state, &probe, 2)?;
//! assert!(result.is_violated());
//! assert!((result.lhs - 0.063624).abs() < 1e-6);
//! # Ok::<(), cvsep::Error>(())
//! ```
//!
//! Modules, bottom up: [`setpart`] (partitions and block swaps),
//! [`states`] (analytic kernels and the Gaussian moment engine),
//! [`criterion`] (sharp and finite-detector evaluation), [`optimize`]
//! (probe choice, scans, thresholds), [`experiment`] (effective qubits,
//! Pauli tables, uncertainties) and [`cli`].

pub mod cli;
pub mod criterion;
pub mod error;
pub mod experiment;
pub mod optimize;
pub mod quadrature;
pub mod setpart;
pub mod states;

pub use error::{Error, Result};

use serde::{Deserialize, Serialize};

use states::Family;

/// Interpretation choices recorded in every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub density_convention: String,
    pub natural_units: String,
    pub ladder_convention: Option<String>,
    pub literal_partition_sum: bool,
    pub verdict_rule: String,
    pub pauli_labels: String,
}

impl Conventions {
    pub fn for_family(family: Family) -> Self {
        Self {
            density_convention:
                "position-diagonal noise enters sharp matrix elements as its density g(x); no off-diagonal part".into(),
            natural_units: "hbar = m = omega = 1".into(),
            ladder_convention: (family == Family::AnnihilatedGhz)
                .then(|| Family::ANNIHILATED_CONVENTION.tag().to_string()),
            literal_partition_sum: true,
            verdict_rule: format!("violated iff lhs > {:e} * offdiag_term", criterion::VERDICT_REL_TOL),
            pauli_labels: experiment::LABEL_CONVENTION.into(),
        }
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/partitions.md")]
    mod partitions {}
    #[doc = include_str!("../../../book/src/states.md")]
    mod states {}
    #[doc = include_str!("../../../book/src/criterion.md")]
    mod criterion {}
    #[doc = include_str!("../../../book/src/probes.md")]
    mod probes {}
    #[doc = include_str!("../../../book/src/experiment.md")]
    mod experiment {}
    #[doc = include_str!("../../../book/src/formats.md")]
    mod formats {}
}
