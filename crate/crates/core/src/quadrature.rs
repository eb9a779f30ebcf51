//! Adaptive Gauss–Kronrod quadrature.
//!
//! One-dimensional integrals use a global adaptive 7/15-point Gauss–Kronrod
//! scheme: the panel with the largest error estimate is bisected until the
//! summed estimate meets the tolerance. Infinite limits are mapped onto finite
//! ones. Box integrals in several dimensions nest the 1D rule, sharing one
//! evaluation budget.

use std::cell::{Cell, RefCell};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights belonging to XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and budget for an integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Hard cap on integrand evaluations (all nesting levels together).
    pub max_evals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 0.0,
            max_evals: 1_000_000,
        }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Integral estimate with its error bound and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

fn adaptive(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    counter: &Cell<usize>,
) -> Result<Estimate> {
    let start = counter.get();
    let mut eval = |x: f64| {
        counter.set(counter.get() + 1);
        f(x)
    };
    let (value, error) = kronrod(&mut eval, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target || total_err == 0.0 {
            break;
        }
        if !total.is_finite() {
            return Err(Error::NumericalFailure {
                what: "adaptive quadrature (non-finite integrand)".into(),
                estimate: total,
                error: total_err,
                evals: counter.get() - start,
            });
        }
        if counter.get() >= opts.max_evals {
            return Err(Error::NumericalFailure {
                what: "adaptive quadrature (evaluation budget exhausted)".into(),
                estimate: total,
                error: total_err,
                evals: counter.get() - start,
            });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = kronrod(&mut eval, worst.a, mid);
        let (v2, e2) = kronrod(&mut eval, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of the running updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let error: f64 = heap.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value,
        error,
        evals: counter.get() - start,
    })
}

fn integrate_counted(
    f: &mut dyn FnMut(f64) -> f64,
    a: f64,
    b: f64,
    opts: &QuadOptions,
    counter: &Cell<usize>,
) -> Result<Estimate> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidArgument("NaN integration limit".into()));
    }
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
            evals: 0,
        });
    }
    if a > b {
        let est = integrate_counted(f, b, a, opts, counter)?;
        return Ok(Estimate {
            value: -est.value,
            ..est
        });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, opts, counter),
        (false, false) => {
            let mut g = |t: f64| {
                let d = 1.0 - t * t;
                f(t / d) * (1.0 + t * t) / (d * d)
            };
            adaptive(&mut g, -1.0, 1.0, opts, counter)
        }
        (true, false) => {
            let mut g = |t: f64| {
                let d = 1.0 - t;
                f(a + t / d) / (d * d)
            };
            adaptive(&mut g, 0.0, 1.0, opts, counter)
        }
        (false, true) => {
            let mut g = |t: f64| {
                let d = 1.0 - t;
                f(b - t / d) / (d * d)
            };
            adaptive(&mut g, 0.0, 1.0, opts, counter)
        }
    }
}

/// Integrates `f` over `[a, b]`; either limit may be infinite.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, opts: &QuadOptions) -> Result<Estimate> {
    let counter = Cell::new(0);
    integrate_counted(&mut f, a, b, opts, &counter)
}

/// Integrates `f` over the box `∏ [lo_i, hi_i]` by nesting the 1D rule.
///
/// Inner integrals run at a tenth of the outer relative tolerance. Limits may
/// be infinite.
pub fn integrate_box(f: impl Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], opts: &QuadOptions) -> Result<Estimate> {
    if lo.len() != hi.len() || lo.is_empty() {
        return Err(Error::InvalidArgument(
            "box limits must be non-empty and of equal length".into(),
        ));
    }
    let counter = Cell::new(0);
    let mut point = vec![0.0; lo.len()];
    let est = nested(&f, lo, hi, opts, &counter, &mut point, 0)?;
    Ok(Estimate {
        evals: counter.get(),
        ..est
    })
}

fn nested(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    opts: &QuadOptions,
    counter: &Cell<usize>,
    point: &mut Vec<f64>,
    dim: usize,
) -> Result<Estimate> {
    let last = dim + 1 == lo.len();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner_opts = QuadOptions {
        rel_tol: opts.rel_tol * 0.1,
        abs_tol: opts.abs_tol * 0.1,
        max_evals: opts.max_evals,
    };
    let point_cell = RefCell::new(std::mem::take(point));
    let mut g = |x: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        if last {
            let mut p = point_cell.borrow_mut();
            p[dim] = x;
            return f(&p);
        }
        let mut p = point_cell.borrow_mut();
        p[dim] = x;
        match nested(f, lo, hi, &inner_opts, counter, &mut p, dim + 1) {
            Ok(est) => est.value,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let leaf_counter = Cell::new(0);
    let used = if last { counter } else { &leaf_counter };
    let result = integrate_counted(&mut g, lo[dim], hi[dim], opts, used);
    *point = point_cell.into_inner();
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    if counter.get() > opts.max_evals {
        return Err(Error::NumericalFailure {
            what: "nested quadrature (evaluation budget exhausted)".into(),
            estimate: result.as_ref().map(|e| e.value).unwrap_or(f64::NAN),
            error: result.as_ref().map(|e| e.error).unwrap_or(f64::NAN),
            evals: counter.get(),
        });
    }
    result
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                x
            } else {
                p1
            };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
