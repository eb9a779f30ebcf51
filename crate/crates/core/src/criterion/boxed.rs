//! Finite-detector probes.
//!
//! Per subsystem the two detector states are `ξ^{−1/2}` times the indicator of
//! `[c − ξ/2, c + ξ/2]`. A basis state of the `2^n`-dimensional detector
//! subspace is a bit mask (bit `i` set: subsystem `i` sits in its `φ₂` box),
//! and ρ compresses to
//!
//! ```text
//! R[e, e′] = p·A(e)·A(e′) + (1−p)·δ_{ee′}·G(e)
//! A(e) = ξ^{−n/2} ∫_{box(e)} Ψ / √N,   G(e) = ξ^{−n} ∏_i ∫_{box_i(e)} g_i
//! ```
//!
//! The noise has no off-diagonal part because its kernel is position-diagonal
//! and the two boxes of a subsystem are disjoint.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{CriterionResult, Probe, ScalarProducts};
use crate::error::{invalid, Result};
use crate::quadrature::QuadOptions;
use crate::states::CvState;

/// Evaluation budget per box integral.
const BOX_MAX_EVALS: usize = 1_000_000;

/// Detector-subspace amplitudes and noise weights of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxScalarProducts {
    n: usize,
    width: f64,
    p: f64,
    scale: f64,
    amplitude: Vec<f64>,
    noise: Vec<f64>,
}

impl BoxScalarProducts {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// `A(e)`, the normalised pure amplitude seen by detector pattern `e`.
    pub fn amplitude(&self, e: usize) -> f64 {
        self.amplitude[e]
    }

    /// `⟨e|ρ|e′⟩`.
    pub fn element(&self, e: usize, e2: usize) -> f64 {
        let mut v = self.p * self.amplitude[e] * self.amplitude[e2];
        if e == e2 {
            v += (1.0 - self.p) * self.noise[e];
        }
        self.scale * v
    }

    /// The full `2^n × 2^n` compressed matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let d = 1 << self.n;
        DMatrix::from_fn(d, d, |i, j| self.element(i, j))
    }

    /// The values the inequality consumes.
    pub fn scalar_products(&self) -> ScalarProducts {
        let full = (1usize << self.n) - 1;
        ScalarProducts {
            n: self.n,
            offdiag: self.element(0, full),
            diag: (0..=full).map(|e| self.element(e, e)).collect(),
        }
    }
}

/// Integrates the state against every detector pattern of a box probe.
///
/// `tol` is the relative quadrature tolerance, in `[1e−12, 1e−3]`.
pub fn box_scalar_products(state: &CvState, probe: &Probe, tol: f64) -> Result<BoxScalarProducts> {
    let Probe::Box { phi1, phi2, width } = probe else {
        return Err(invalid("box evaluation needs a box probe"));
    };
    probe.validate()?;
    if !(1e-12..=1e-3).contains(&tol) {
        return Err(invalid(format!("quadrature tolerance {tol:e} outside [1e-12, 1e-3]")));
    }
    let n = state.dim();
    if phi1.len() != n {
        return Err(invalid(format!("probe has dimension {}, state has {n}", phi1.len())));
    }
    let half = 0.5 * width;
    let bounds = |e: usize| -> (Vec<f64>, Vec<f64>) {
        let c: Vec<f64> = (0..n)
            .map(|i| if e >> i & 1 == 1 { phi2[i] } else { phi1[i] })
            .collect();
        (
            c.iter().map(|v| v - half).collect(),
            c.iter().map(|v| v + half).collect(),
        )
    };
    let opts = QuadOptions {
        rel_tol: tol,
        abs_tol: 0.0,
        max_evals: BOX_MAX_EVALS,
    };
    let amp_norm = width.powf(-0.5 * n as f64) / state.pure_norm().sqrt();
    let patterns: Vec<usize> = (0..1 << n).collect();
    let amplitude = if state.p() > 0.0 {
        patterns
            .par_iter()
            .map(|&e| {
                let (lo, hi) = bounds(e);
                Ok(amp_norm * state.pure().box_integral(&lo, &hi, &opts)?)
            })
            .collect::<Result<Vec<f64>>>()?
    } else {
        vec![0.0; patterns.len()]
    };
    let noise_norm = width.powf(-(n as f64));
    let noise = patterns
        .iter()
        .map(|&e| {
            let (lo, hi) = bounds(e);
            noise_norm
                * (0..n)
                    .map(|i| state.noise().interval_mass(lo[i], hi[i]))
                    .product::<f64>()
        })
        .collect();
    Ok(BoxScalarProducts {
        n,
        width: *width,
        p: state.p(),
        scale: state.kernel_scale(),
        amplitude,
        noise,
    })
}

/// Evaluates the inequality for a box probe.
pub fn criterion_lhs_box(state: &CvState, probe: &Probe, k: usize, tol: f64) -> Result<CriterionResult> {
    box_scalar_products(state, probe, tol)?.scalar_products().assemble(k)
}
