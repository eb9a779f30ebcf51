//! Probe choice, parameter scans and detection thresholds.

mod scan;
mod threshold;

pub use scan::{scan, Axis, CellValue, DetectionMap, ProbeRule, ScanCell, ScanSpec, MAX_AXIS_POINTS};
pub use threshold::{find_threshold, Anchor, ThresholdQuery, ThresholdReport, REFERENCE_GHZ_EPSILON_THRESHOLD};

use serde::{Deserialize, Serialize};

use crate::criterion::{build_probe, criterion_lhs, CriterionResult, Probe, ProbeFamily};
use crate::error::{invalid, Error, Result};
use crate::states::{CvState, Family, StateParams};

/// Points of the coarse grid in [`optimize_probe`].
pub const COARSE_GRID: usize = 64;

/// Interval length at which golden-section refinement stops.
pub const REFINE_TOL: f64 = 1e-6;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Best probe found in a one-parameter family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptimum {
    pub x0: f64,
    pub probe: Probe,
    pub result: CriterionResult,
}

/// The probe shape matched to a state family.
pub fn probe_family_for(params: &StateParams) -> ProbeFamily {
    match params.family {
        Family::WLike => ProbeFamily::WLike { shift: params.shift },
        _ => ProbeFamily::GhzLike,
    }
}

fn evaluate(state: &CvState, k: usize, family: ProbeFamily, x0: f64) -> Result<Option<(Probe, CriterionResult)>> {
    let probe = match build_probe(family, x0) {
        Ok(p) => p,
        Err(Error::InvalidProbe(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let r = criterion_lhs(state, &probe, k)?;
    Ok(Some((probe, r)))
}

fn score(candidate: &Option<(Probe, CriterionResult)>) -> f64 {
    match candidate {
        Some((_, r)) if r.lhs.is_finite() => r.lhs,
        _ => f64::NEG_INFINITY,
    }
}

/// Maximises the criterion over `x0 ∈ [lo, hi]` for the given probe shape.
///
/// A 64-point grid locates the best cell, golden-section search refines it
/// to `1e−6`. Positions giving an invalid probe are skipped. Deterministic.
pub fn optimize_probe(state: &CvState, k: usize, family: ProbeFamily, lo: f64, hi: f64) -> Result<ProbeOptimum> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("x0 bounds [{lo}, {hi}] must be finite with lo < hi")));
    }
    let step = (hi - lo) / (COARSE_GRID - 1) as f64;
    let mut best: Option<(f64, Probe, CriterionResult)> = None;
    let mut best_i = 0;
    for i in 0..COARSE_GRID {
        let x0 = if i == COARSE_GRID - 1 { hi } else { lo + step * i as f64 };
        let cand = evaluate(state, k, family, x0)?;
        let s = score(&cand);
        if let Some((probe, r)) = cand {
            if best.as_ref().is_none_or(|(_, _, b)| s > b.lhs) {
                best = Some((x0, probe, r));
                best_i = i;
            }
        }
    }
    let Some((mut x_best, mut p_best, mut r_best)) = best else {
        return Err(Error::NoValidProbe);
    };
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let mut f = |x: f64| -> Result<(f64, Option<(Probe, CriterionResult)>)> {
        let c = evaluate(state, k, family, x)?;
        Ok((score(&c), c))
    };
    let (x_ref, cand) = golden_max(&mut f, a, b)?;
    if let Some((probe, r)) = cand {
        if r.lhs > r_best.lhs {
            x_best = x_ref;
            p_best = probe;
            r_best = r;
        }
    }
    Ok(ProbeOptimum {
        x0: x_best,
        probe: p_best,
        result: r_best,
    })
}

/// Golden-section maximisation; returns the midpoint of the final bracket
/// together with whatever the objective produced there.
fn golden_max<T>(f: &mut impl FnMut(f64) -> Result<(f64, T)>, mut a: f64, mut b: f64) -> Result<(f64, T)> {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?.0;
    let mut fd = f(d)?.0;
    while b - a > REFINE_TOL {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?.0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?.0;
        }
    }
    let x = 0.5 * (a + b);
    Ok((x, f(x)?.1))
}

/// Result of the unrestricted probe search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeOptimum {
    pub probe: Probe,
    pub result: CriterionResult,
    pub sweeps: usize,
}

/// Expert search over all `2n` probe coordinates by coordinate descent.
///
/// Each sweep line-searches every coordinate within `radius` of its current
/// value; the radius halves after a sweep without improvement.
pub fn optimize_probe_free(
    state: &CvState,
    k: usize,
    start: &Probe,
    radius: f64,
    max_sweeps: usize,
) -> Result<FreeOptimum> {
    let Probe::Sharp { phi1, phi2 } = start else {
        return Err(invalid("free optimisation starts from a sharp probe"));
    };
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid("search radius must be positive"));
    }
    let n = phi1.len();
    let mut coords: Vec<f64> = phi1.iter().chain(phi2).copied().collect();
    let eval = |c: &[f64]| -> Result<Option<(Probe, CriterionResult)>> {
        match Probe::sharp(c[..n].to_vec(), c[n..].to_vec()) {
            Ok(p) => {
                let r = criterion_lhs(state, &p, k)?;
                Ok(Some((p, r)))
            }
            Err(Error::InvalidProbe(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let Some((mut probe, mut result)) = eval(&coords)? else {
        return Err(Error::InvalidProbe("starting probe is invalid".into()));
    };
    let mut r = radius;
    let mut sweeps = 0;
    while sweeps < max_sweeps && r >= REFINE_TOL {
        sweeps += 1;
        let mut improved = false;
        for j in 0..2 * n {
            let centre = coords[j];
            let mut f = |x: f64| -> Result<(f64, Option<(Probe, CriterionResult)>)> {
                let mut trial = coords.clone();
                trial[j] = x;
                let c = eval(&trial)?;
                Ok((score(&c), c))
            };
            let (x, cand) = golden_max(&mut f, centre - r, centre + r)?;
            if let Some((p, res)) = cand {
                if res.lhs > result.lhs {
                    coords[j] = x;
                    probe = p;
                    result = res;
                    improved = true;
                }
            }
        }
        if !improved {
            r *= 0.5;
        }
    }
    Ok(FreeOptimum { probe, result, sweeps })
}
