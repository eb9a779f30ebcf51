#![allow(dead_code)]

pub mod grid;

use cvsep::criterion::{build_probe, Probe, ProbeFamily};
use cvsep::states::{build_family_state, CvState, DiagonalNoise, Family, FamilyParams, NoiseKind, StateParams};

pub const PI: f64 = std::f64::consts::PI;

/// The GHZ-like kernel written out by hand.
pub fn ghz_kernel(x: &[f64], sigma: f64, eps: f64) -> f64 {
    let d2 = (x[0] - x[1]).powi(2) + (x[0] - x[2]).powi(2);
    (-x[0] * x[0] / (2.0 * sigma) - d2 / (2.0 * eps)).exp()
}

/// `lhs` for the GHZ-like state at `p = 1`, `σ = 1`, probe `±x₀`.
pub fn ghz_closed_form(eps: f64, x0: f64) -> f64 {
    let a = 4.0 * x0 * x0 / eps;
    (-x0 * x0).exp() * (1.0 - (-2.0 * a).exp() - 2.0 * (-a).exp()) / (PI.powf(1.5) * eps)
}

pub fn ghz_state(sigma: f64, eps: f64, p: f64, delta: f64) -> CvState {
    let pure = build_family_state(Family::GhzLike, &FamilyParams::ghz(sigma, eps)).unwrap();
    CvState::new(p, pure, DiagonalNoise::Gaussian { delta }).unwrap()
}

pub fn ghz_probe(x0: f64) -> Probe {
    build_probe(ProbeFamily::GhzLike, x0).unwrap()
}

pub fn params(family: Family) -> StateParams {
    StateParams {
        family,
        sigma: 1.0,
        epsilon: 1.0,
        shift: 1.0,
        beta: 1.0,
        noise: NoiseKind::Gaussian,
        delta: 1.0,
        p: 1.0,
    }
}

/// Trapezoid sum of `f` on the cube `[−l, l]³` with step `h`; spectrally
/// accurate for smooth integrands that vanish at the faces.
pub fn trapezoid_3d(f: impl Fn(&[f64]) -> f64, l: f64, h: f64) -> f64 {
    let m = (2.0 * l / h).round() as i64;
    let node = |i: i64| -l + h * i as f64;
    let mut total = 0.0;
    let mut x = [0.0; 3];
    for i in 0..=m {
        x[0] = node(i);
        for j in 0..=m {
            x[1] = node(j);
            for k in 0..=m {
                x[2] = node(k);
                total += f(&x);
            }
        }
    }
    total * h * h * h
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
