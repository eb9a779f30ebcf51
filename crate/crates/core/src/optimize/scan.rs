use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimize_probe, probe_family_for};
use crate::criterion::{build_probe, sharp_scalar_products};
use crate::error::{invalid, Error, Result};
use crate::states::{Param, StateParams};

/// Largest number of points on one scan axis.
pub const MAX_AXIS_POINTS: usize = 512;

/// A swept parameter and its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Axis {
    /// `steps` evenly spaced values from `lo` to `hi` inclusive.
    pub fn linspace(param: Param, lo: f64, hi: f64, steps: usize) -> Result<Self> {
        if steps == 0 || (steps == 1 && lo != hi) {
            return Err(invalid(format!("axis {param} needs at least two steps for a range")));
        }
        let values = if steps == 1 {
            vec![lo]
        } else {
            let h = (hi - lo) / (steps - 1) as f64;
            (0..steps)
                .map(|i| if i == steps - 1 { hi } else { lo + h * i as f64 })
                .collect()
        };
        Self::new(param, values)
    }

    pub fn new(param: Param, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() > MAX_AXIS_POINTS {
            return Err(Error::SizeLimit(format!(
                "axis {param} has {} points, allowed 1..={MAX_AXIS_POINTS}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(format!("axis {param} must be finite and strictly increasing")));
        }
        Ok(Self { param, values })
    }

    /// Parses `name:lo:hi:steps`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        let [name, lo, hi, steps] = parts.as_slice() else {
            return Err(invalid(format!("axis '{text}' is not of the form name:lo:hi:steps")));
        };
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("axis '{text}': '{s}' is not a number")))
        };
        let steps = steps
            .trim()
            .parse::<usize>()
            .map_err(|_| invalid(format!("axis '{text}': '{steps}' is not a step count")))?;
        Self::linspace(name.trim().parse()?, num(lo)?, num(hi)?, steps)
    }
}

/// How each cell picks its probe position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum ProbeRule {
    Fixed {
        x0: f64,
    },
    /// Per cell and per `k`, the best `x0` in `[lo, hi]`.
    Optimized {
        lo: f64,
        hi: f64,
    },
    /// `x0` is one of the scan axes.
    FromAxis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub base: StateParams,
    /// One or two axes; the first is the slow (row) index.
    pub axes: Vec<Axis>,
    pub ks: Vec<usize>,
    pub probe: ProbeRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellValue {
    pub k: usize,
    pub lhs: f64,
    pub fired: bool,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub coords: Vec<f64>,
    /// One entry per requested `k`; empty when the cell failed.
    pub values: Vec<CellValue>,
    /// Smallest violated `k` (2 means genuine multipartite entanglement).
    pub strongest: Option<usize>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMap {
    pub axes: Vec<Param>,
    pub ks: Vec<usize>,
    pub cells: Vec<ScanCell>,
}

impl DetectionMap {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.failure.is_some()).count()
    }
}

fn validate(spec: &ScanSpec) -> Result<()> {
    if spec.axes.is_empty() || spec.axes.len() > 2 {
        return Err(invalid("a scan needs one or two axes"));
    }
    if spec.axes.len() == 2 && spec.axes[0].param == spec.axes[1].param {
        return Err(invalid("the two scan axes must differ"));
    }
    if spec.ks.is_empty() {
        return Err(invalid("no k requested"));
    }
    for &k in &spec.ks {
        if !(1..=3).contains(&k) {
            return Err(invalid(format!("k = {k} outside 1..=3")));
        }
    }
    if let ProbeRule::Optimized { lo, hi } = spec.probe {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("optimisation bounds must be finite with lo < hi"));
        }
    }
    for axis in &spec.axes {
        Axis::new(axis.param, axis.values.clone())?;
    }
    if spec.probe == ProbeRule::FromAxis && !spec.axes.iter().any(|a| a.param == Param::X0) {
        return Err(invalid("probe rule 'from_axis' needs an x0 axis"));
    }
    Ok(())
}

/// Errors that mark a single cell instead of aborting the scan.
fn is_cell_local(e: &Error) -> bool {
    matches!(
        e,
        Error::NumericalFailure { .. } | Error::InvalidProbe(_) | Error::NoValidProbe
    )
}

fn evaluate_cell(spec: &ScanSpec, coords: &[f64]) -> Result<Vec<CellValue>> {
    let mut params = spec.base;
    let mut rule = spec.probe;
    for (axis, &v) in spec.axes.iter().zip(coords) {
        if axis.param == Param::X0 {
            rule = ProbeRule::Fixed { x0: v };
        } else {
            params.set(axis.param, v)?;
        }
    }
    let state = params.build()?;
    let family = probe_family_for(&params);
    match rule {
        ProbeRule::FromAxis => unreachable!("x0 axis replaces the rule"),
        ProbeRule::Fixed { x0 } => {
            let sp = sharp_scalar_products(&state, &build_probe(family, x0)?)?;
            spec.ks
                .iter()
                .map(|&k| {
                    let r = sp.assemble(k)?;
                    Ok(CellValue {
                        k,
                        lhs: r.lhs,
                        fired: r.is_violated(),
                        x0,
                    })
                })
                .collect()
        }
        ProbeRule::Optimized { lo, hi } => spec
            .ks
            .iter()
            .map(|&k| {
                let opt = optimize_probe(&state, k, family, lo, hi)?;
                Ok(CellValue {
                    k,
                    lhs: opt.result.lhs,
                    fired: opt.result.is_violated(),
                    x0: opt.x0,
                })
            })
            .collect(),
    }
}

/// Evaluates every grid cell, in row-major order, on `workers` threads.
///
/// Cells whose probe is invalid or whose numerics fail are tagged and kept;
/// invalid state parameters abort the scan.
pub fn scan(spec: &ScanSpec, workers: usize) -> Result<DetectionMap> {
    validate(spec)?;
    let mut grid: Vec<Vec<f64>> = vec![vec![]];
    for axis in &spec.axes {
        grid = grid
            .into_iter()
            .flat_map(|prefix| {
                axis.values.iter().map(move |&v| {
                    let mut c = prefix.clone();
                    c.push(v);
                    c
                })
            })
            .collect();
    }
    let run = |coords: &Vec<f64>| -> Result<ScanCell> {
        match evaluate_cell(spec, coords) {
            Ok(values) => Ok(ScanCell {
                coords: coords.clone(),
                strongest: values.iter().filter(|v| v.fired).map(|v| v.k).min(),
                values,
                failure: None,
            }),
            Err(e) if is_cell_local(&e) => Ok(ScanCell {
                coords: coords.clone(),
                values: Vec::new(),
                strongest: None,
                failure: Some(e.to_string()),
            }),
            Err(e) => Err(e),
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    let cells = pool.install(|| grid.par_iter().map(run).collect::<Result<Vec<_>>>())?;
    Ok(DetectionMap {
        axes: spec.axes.iter().map(|a| a.param).collect(),
        ks: spec.ks.clone(),
        cells,
    })
}
