use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;

/// Which coordinates a box constraint restricts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintAxes {
    /// `|x_i − d| < w`
    Single(usize),
    /// `|x_i − x_j − d| < w`
    Pair(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxConstraint {
    pub axes: ConstraintAxes,
    pub center: f64,
    pub half_width: f64,
}

/// Child coordinate confined to `x_anchor + offset ± half_width`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tie {
    axis: usize,
    offset: f64,
    half_width: f64,
}

/// Constant amplitude on the region cut out by Heaviside constraints.
///
/// Only star-shaped constraint graphs are accepted: one single-axis
/// constraint on an anchor coordinate, and one pair constraint tying every
/// other coordinate to the anchor. The region volume is then `∏ 2w`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorState {
    n: usize,
    amplitude: f64,
    constraints: Vec<BoxConstraint>,
    anchor: usize,
    anchor_center: f64,
    anchor_half_width: f64,
    ties: Vec<Tie>,
}

impl IndicatorState {
    pub fn new(n: usize, constraints: Vec<BoxConstraint>, amplitude: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("indicator state needs at least one coordinate"));
        }
        if !(amplitude != 0.0 && amplitude.is_finite()) {
            return Err(invalid("indicator amplitude must be finite and non-zero"));
        }
        for c in &constraints {
            if !(c.half_width > 0.0 && c.half_width.is_finite()) || !c.center.is_finite() {
                return Err(invalid("constraint half-widths must be positive and finite"));
            }
            let in_range = match c.axes {
                ConstraintAxes::Single(i) => i < n,
                ConstraintAxes::Pair(i, j) => i < n && j < n && i != j,
            };
            if !in_range {
                return Err(invalid(format!("constraint axes {:?} invalid for n = {n}", c.axes)));
            }
        }
        let singles: Vec<&BoxConstraint> = constraints
            .iter()
            .filter(|c| matches!(c.axes, ConstraintAxes::Single(_)))
            .collect();
        let [&anchor_c] = singles.as_slice() else {
            return Err(Error::UnsupportedStructure(
                "exactly one single-axis constraint (the anchor) is required".into(),
            ));
        };
        let ConstraintAxes::Single(anchor) = anchor_c.axes else {
            unreachable!()
        };
        let mut ties: Vec<Option<Tie>> = vec![None; n];
        for c in &constraints {
            let ConstraintAxes::Pair(i, j) = c.axes else { continue };
            let (axis, offset) = if j == anchor {
                (i, c.center)
            } else if i == anchor {
                (j, -c.center)
            } else {
                return Err(Error::UnsupportedStructure(format!(
                    "constraint between x{} and x{} does not involve the anchor x{}",
                    i + 1,
                    j + 1,
                    anchor + 1
                )));
            };
            if ties[axis].is_some() {
                return Err(Error::UnsupportedStructure(format!(
                    "coordinate x{} is constrained twice",
                    axis + 1
                )));
            }
            ties[axis] = Some(Tie {
                axis,
                offset,
                half_width: c.half_width,
            });
        }
        let mut out = Vec::with_capacity(n - 1);
        for (axis, tie) in ties.into_iter().enumerate() {
            match tie {
                Some(t) => out.push(t),
                None if axis == anchor => {}
                None => {
                    return Err(Error::UnsupportedStructure(format!(
                        "coordinate x{} is unconstrained (region not bounded)",
                        axis + 1
                    )))
                }
            }
        }
        Ok(Self {
            n,
            amplitude,
            constraints,
            anchor,
            anchor_center: anchor_c.center,
            anchor_half_width: anchor_c.half_width,
            ties: out,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn constraints(&self) -> &[BoxConstraint] {
        &self.constraints
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let a = x[self.anchor];
        if (a - self.anchor_center).abs() >= self.anchor_half_width {
            return 0.0;
        }
        for t in &self.ties {
            if (x[t.axis] - a - t.offset).abs() >= t.half_width {
                return 0.0;
            }
        }
        self.amplitude
    }

    /// Region volume times amplitude squared.
    pub fn norm_squared(&self) -> f64 {
        let volume: f64 = 2.0 * self.anchor_half_width * self.ties.iter().map(|t| 2.0 * t.half_width).product::<f64>();
        self.amplitude * self.amplitude * volume
    }

    /// Exact `∫_box Ψ`: for fixed anchor value every child contributes the
    /// length of an interval overlap, which is piecewise linear in the anchor.
    pub fn box_integral(&self, lo: &[f64], hi: &[f64]) -> f64 {
        let a_lo = lo[self.anchor].max(self.anchor_center - self.anchor_half_width);
        let a_hi = hi[self.anchor].min(self.anchor_center + self.anchor_half_width);
        if a_lo >= a_hi {
            return 0.0;
        }
        let mut cuts = vec![a_lo, a_hi];
        for t in &self.ties {
            for edge in [lo[t.axis], hi[t.axis]] {
                for s in [-1.0, 1.0] {
                    let c = edge - t.offset + s * t.half_width;
                    if c > a_lo && c < a_hi {
                        cuts.push(c);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let overlap = |t: &Tie, a: f64| {
            let l = lo[t.axis].max(a + t.offset - t.half_width);
            let h = hi[t.axis].min(a + t.offset + t.half_width);
            (h - l).max(0.0)
        };
        // product of n−1 linear pieces has degree n−1; n nodes are exact
        let (nodes, weights) = gauss_legendre(self.n.max(1));
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (x, wt) in nodes.iter().zip(&weights) {
                let a = c + h * x;
                total += wt * h * self.ties.iter().map(|t| overlap(t, a)).product::<f64>();
            }
        }
        self.amplitude * total
    }
}
