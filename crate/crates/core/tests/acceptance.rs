//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! A criterion listed in `KNOWN_RED` is expected to fail for the reason given
//! there; the run only errors when a result differs from its recorded status.

mod common;

use std::time::Instant;

use common::grid::{probe_indices, GridDensity, X0 as GRID_X0};
use common::*;
use cvsep::criterion::{
    build_box_probe, criterion_lhs, criterion_lhs_box, CriterionResult, PartitionTerm, Probe, ProbeFamily,
};
use cvsep::experiment::{
    decomposed_lhs_n3k2, effective_qubit_state, pauli_expectations, propagate_uncertainty, EffectiveQubitState,
};
use cvsep::optimize::{find_threshold, optimize_probe, ProbeRule, ThresholdQuery, REFERENCE_GHZ_EPSILON_THRESHOLD};
use cvsep::setpart::enumerate_partitions;
use cvsep::states::{
    build_family_state, CvState, DiagonalNoise, Family, FamilyParams, GaussianSumState, Param, PureState,
    QuadraticExponent,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KNOWN_RED: &[(u32, &str)] = &[
    (
        5,
        "the ε = 0.5 optimum of the closed form is x₀ ≈ 0.606, below the printed range",
    ),
    (
        11,
        "√(o² + ζ²·3/64) = 2.38485e−3; the anchor 2.386e−3 is 1.15e−6 away, just outside ±1e−6",
    ),
];

struct Report {
    unexpected: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, pass: bool, detail: String) {
        let status = if pass { "PASS" } else { "FAIL" };
        println!("criterion {id:>2}: {status}  {detail}");
        let known = KNOWN_RED.iter().find(|(k, _)| *k == id);
        if let Some((_, why)) = known {
            println!("              known red: {why}");
        }
        if pass == known.is_some() {
            self.unexpected.push(id);
        }
    }

    fn note(&self, text: String) {
        println!("              {text}");
    }
}

fn product_state(rng: &mut ChaCha8Rng) -> CvState {
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| if i == j { rng.gen_range(0.2..4.0) } else { 0.0 })
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let q = QuadraticExponent::from_rows(&rows, &b, 0.0).unwrap();
    let p = rng.gen_range(0.0..=1.0);
    let noise = DiagonalNoise::Gaussian {
        delta: rng.gen_range(0.2..3.0),
    };
    CvState::new(p, PureState::GaussianSum(GaussianSumState::single(q)), noise).unwrap()
}

fn correlated_state(rng: &mut ChaCha8Rng) -> CvState {
    let a: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| (0..3).map(|l| a[3 * l + i] * a[3 * l + j]).sum::<f64>() + if i == j { 0.2 } else { 0.0 })
                .collect()
        })
        .collect();
    let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let q = QuadraticExponent::from_rows(&rows, &b, 0.0).unwrap();
    let p = rng.gen_range(0.0..=1.0);
    CvState::new(
        p,
        PureState::GaussianSum(GaussianSumState::single(q)),
        DiagonalNoise::Gaussian { delta: 1.0 },
    )
    .unwrap()
}

fn family_state(rng: &mut ChaCha8Rng, family: Family) -> CvState {
    let sigma = rng.gen_range(0.3..2.0);
    let eps = rng.gen_range(0.3..2.0);
    let params = match family {
        Family::WLike => FamilyParams::w_like(sigma, eps, rng.gen_range(0.0..1.5)),
        Family::Indicator => FamilyParams::indicator(sigma, eps),
        _ => FamilyParams::ghz(sigma, eps),
    };
    let pure = build_family_state(family, &params).unwrap();
    let delta = rng.gen_range(1.0..3.0);
    let noise = if family == Family::Indicator {
        DiagonalNoise::Box { delta }
    } else {
        DiagonalNoise::Gaussian { delta }
    };
    CvState::new(rng.gen_range(0.0..=1.0), pure, noise).unwrap()
}

fn random_probe(rng: &mut ChaCha8Rng) -> Probe {
    let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let b: Vec<f64> = a
        .iter()
        .map(|&v| {
            let gap = rng.gen_range(0.05..2.0);
            if rng.gen_bool(0.5) {
                v + gap
            } else {
                v - gap
            }
        })
        .collect();
    Probe::sharp(a, b).unwrap()
}

fn ghz_params(eps: f64) -> cvsep::states::StateParams {
    let mut p = params(Family::GhzLike);
    p.epsilon = eps;
    p.shift = 0.0;
    p
}

fn theorem_guarantee(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for _ in 0..200 {
        let state = product_state(&mut rng);
        let probe = random_probe(&mut rng);
        for k in [2, 3] {
            let res = criterion_lhs(&state, &probe, k).unwrap();
            worst = worst.max(res.lhs);
            if res.lhs > 1e-12 {
                violations += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.line(
        1,
        violations == 0 && secs < 10.0,
        format!("product states: max lhs {worst:.3e} over 400 evaluations, {secs:.2} s"),
    );
}

fn cauchy_schwarz(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    let families = [
        Family::GhzLike,
        Family::WLike,
        Family::AnnihilatedGhz,
        Family::Indicator,
    ];
    for i in 0..200 {
        let state = match i % 3 {
            0 => product_state(&mut rng),
            1 => correlated_state(&mut rng),
            _ => family_state(&mut rng, families[i % 4]),
        };
        let probe = if i % 3 == 2 {
            ghz_probe(rng.gen_range(0.1..2.0))
        } else {
            random_probe(&mut rng)
        };
        worst = worst.max(criterion_lhs(&state, &probe, 1).unwrap().lhs);
    }
    r.line(2, worst <= 1e-12, format!("k = 1: max lhs {worst:.3e} over 200 states"));
}

fn ghz_closed_form_oracle(r: &mut Report) {
    let phi = probe_indices();
    let mut grid_err = 0.0f64;
    for eps in [0.5, 1.0, 2.5] {
        let grid = GridDensity::new(1.0, eps, 1.0, 1.0);
        grid_err = grid_err.max(rel_err(ghz_closed_form(eps, GRID_X0), grid.lhs(phi, 2)));
    }
    let mut worst = 0.0f64;
    let mut worst_scaled = 0.0f64;
    for i in 0..20 {
        let eps = 0.25 + 7.75 * i as f64 / 19.0;
        let state = ghz_state(1.0, eps, 1.0, 1.0);
        for j in 0..20 {
            let x0 = 0.1 + 1.9 * j as f64 / 19.0;
            let res = criterion_lhs(&state, &ghz_probe(x0), 2).unwrap();
            let closed = ghz_closed_form(eps, x0);
            worst = worst.max(rel_err(res.lhs, closed));
            worst_scaled = worst_scaled.max((res.lhs - closed).abs() / res.offdiag_term);
        }
    }
    r.line(
        3,
        grid_err < 1e-6 && worst < 1e-9,
        format!("grid oracle rel {grid_err:.2e} (≤ 1e−6); engine vs closed form rel {worst:.2e} on 20×20 (≤ 1e−9)"),
    );
    r.note(format!(
        "largest deviation relative to the off-diagonal term: {worst_scaled:.2e}"
    ));
}

fn ghz_threshold(r: &mut Report) {
    let start = Instant::now();
    let q = ThresholdQuery {
        base: ghz_params(1.0),
        param: Param::Epsilon,
        lo: 1.0,
        hi: 8.0,
        k: 2,
        probe: ProbeRule::Fixed { x0: 1.0 },
        tol: 1e-6,
    };
    let report = find_threshold(&q).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let exact = 4.0 / (1.0 + 2f64.sqrt()).ln();
    let printed = report.anchors.iter().find(|a| a.label == "reference_value").unwrap();
    let pass = (report.value - exact).abs() < 1e-6
        && (4.3..=4.9).contains(&report.value)
        && (4.3..=4.9).contains(&REFERENCE_GHZ_EPSILON_THRESHOLD)
        && secs < 5.0;
    r.line(
        4,
        pass,
        format!("ε* = {:.9} vs 4/ln(1+√2) = {exact:.9}, {secs:.3} s", report.value),
    );
    r.note(format!(
        "deviation from the printed 4.648: {:+.4} ({:+.2}%)",
        printed.deviation,
        100.0 * printed.deviation / 4.648
    ));
    r.note(format!(
        "decimal expansion 4.538379 quoted alongside the formula differs from it by {:.1e}",
        4.538379 - exact
    ));
}

fn probe_optimum_range(r: &mut Report) {
    let mut all = true;
    let mut parts = Vec::new();
    for eps in [0.5, 1.0, 2.0] {
        let opt = optimize_probe(&ghz_state(1.0, eps, 1.0, 1.0), 2, ProbeFamily::GhzLike, 0.05, 3.0).unwrap();
        all &= (0.7..=1.2).contains(&opt.x0);
        parts.push(format!("ε={eps}: x₀={:.4}", opt.x0));
    }
    r.line(5, all, format!("optimal x₀ in [0.7, 1.2]: {}", parts.join(", ")));
}

fn indicator_closed_forms(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut err1 = 0.0f64;
    let mut err2 = 0.0f64;
    let mut gap = 0.0f64;
    for _ in 0..25 {
        let beta = rng.gen_range(0.5..2.0);
        let eps = rng.gen_range(0.2..1.9 * beta);
        let p = rng.gen_range(0.01..1.0);
        let pure = || build_family_state(Family::Indicator, &FamilyParams::indicator(beta, eps)).unwrap();
        let coherent = p / (8.0 * eps * eps * beta);

        // ε/2 < β and δ < β: every swapped point leaves both supports
        let delta = rng.gen_range(0.05..beta);
        let x0 = 0.5 * ((0.5 * eps).max(delta) + beta);
        let state = CvState::new(p, pure(), DiagonalNoise::Box { delta }).unwrap();
        err1 = err1.max(rel_err(criterion_lhs(&state, &ghz_probe(x0), 2).unwrap().lhs, coherent));

        // ε/2 < β ≤ δ: the noise survives on all three bipartitions
        let delta = rng.gen_range(beta..3.0 * beta);
        let x0 = 0.5 * (0.5 * eps + beta);
        let state = CvState::new(p, pure(), DiagonalNoise::Box { delta }).unwrap();
        let lhs = criterion_lhs(&state, &ghz_probe(x0), 2).unwrap().lhs;
        let literal = coherent - 3.0 * (1.0 - p) / (8.0 * delta.powi(3));
        let printed = coherent - (1.0 - p) / (8.0 * delta.powi(3));
        err2 = err2.max((lhs - literal).abs() / coherent);
        gap = gap.max((lhs - printed).abs() / coherent);
    }
    r.line(
        6,
        err1 < 1e-12 && err2 < 1e-12,
        format!("regime δ < β rel {err1:.1e}; regime β ≤ δ vs literal partition sum rel {err2:.1e}"),
    );
    r.note(format!(
        "printed single-coefficient variant differs by up to {gap:.3} (relative to p/8ε²β)"
    ));
    let (eps, beta, delta) = (1.0, 0.75, 1.5);
    let v = eps * eps * beta;
    r.note(format!(
        "p* at ε=1, β=0.75, δ=1.5: literal 3ε²β/(3ε²β+δ³) = {:.6}, printed ε²β/(ε²β+δ³) = {:.6}",
        3.0 * v / (3.0 * v + delta * delta * delta),
        v / (v + delta * delta * delta)
    ));
}

fn annihilated_normalization(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let sigma: f64 = rng.gen_range(0.2..3.0);
        let eps: f64 = rng.gen_range(0.2..3.0);
        let pure = build_family_state(Family::AnnihilatedGhz, &FamilyParams::ghz(sigma, eps)).unwrap();
        let printed =
            PI.powf(1.5) * eps * sigma.powf(1.5) * (eps * eps + 6.0 * eps * sigma + 15.0 * sigma * sigma) / 8.0;
        worst = worst.max(rel_err(pure.normalization_constant().unwrap(), printed));
    }
    r.line(
        7,
        worst < 1e-9,
        format!("normalisation rel error {worst:.2e} over 10 random (σ, ε)"),
    );
}

fn annihilated_detection(r: &mut Report) {
    let mut missed = Vec::new();
    let mut weakest = f64::INFINITY;
    for delta in [0.5, 1.0, 1.5] {
        for p in [1e-4, 0.01, 0.1, 0.5, 1.0] {
            for eps in [0.5, 1.0, 2.0, 5.0] {
                let pure = build_family_state(Family::AnnihilatedGhz, &FamilyParams::ghz(1.0, eps)).unwrap();
                let state = CvState::new(p, pure, DiagonalNoise::Gaussian { delta }).unwrap();
                let opt = optimize_probe(&state, 2, ProbeFamily::GhzLike, 0.1, 20.0).unwrap();
                weakest = weakest.min(opt.result.relative_lhs());
                if !opt.result.is_violated() {
                    missed.push(format!("(δ={delta}, p={p}, ε={eps})"));
                }
            }
        }
    }
    r.line(
        8,
        missed.is_empty(),
        format!(
            "60 cells with δ ≤ 3σ/2 detected: {} missed; smallest lhs/offdiag {weakest:.3e}",
            missed.len()
        ),
    );
    if !missed.is_empty() {
        r.note(format!("missed: {}", missed.join(" ")));
    }
}

fn pauli_equivalence(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let families = [Family::GhzLike, Family::WLike, Family::AnnihilatedGhz];
    for i in 0..50 {
        let family = families[i % 3];
        let state = family_state(&mut rng, family);
        let shift = rng.gen_range(0.0..1.0);
        let pf = if family == Family::WLike {
            ProbeFamily::WLike { shift }
        } else {
            ProbeFamily::GhzLike
        };
        let xi = rng.gen_range(0.02..0.3);
        let x0 = rng.gen_range(0.4..1.5);
        let Ok(probe) = build_box_probe(pf, x0, xi) else {
            continue;
        };
        let eff = effective_qubit_state(&state, &probe, 1e-10).unwrap();
        let decomposed = decomposed_lhs_n3k2(&pauli_expectations(&eff)).unwrap();
        let direct = criterion_lhs_box(&state, &probe, 2, 1e-10).unwrap().lhs;
        worst = worst.max((decomposed - direct).abs());
    }
    let s = 0.5;
    let mut ghz = DMatrix::zeros(8, 8);
    for (a, b) in [(0, 0), (0, 7), (7, 0), (7, 7)] {
        ghz[(a, b)] = s;
    }
    let ideal = decomposed_lhs_n3k2(&pauli_expectations(&EffectiveQubitState::from_matrix(3, ghz).unwrap())).unwrap();
    r.line(
        9,
        worst < 1e-9 && ideal == 0.5,
        format!("max |decomposed − box| {worst:.2e} over 50 compressions; ideal GHZ table gives {ideal}"),
    );
}

fn box_convergence(r: &mut Report) {
    let state = ghz_state(1.0, 1.0, 1.0, 1.0);
    let sharp = criterion_lhs(&state, &ghz_probe(1.0), 2).unwrap().lhs;
    let xis = [0.016, 0.008, 0.004, 0.002];
    let gaps: Vec<f64> = xis
        .iter()
        .map(|&xi: &f64| {
            let b = criterion_lhs_box(
                &state,
                &build_box_probe(ProbeFamily::GhzLike, 1.0, xi).unwrap(),
                2,
                1e-12,
            )
            .unwrap();
            (b.lhs / xi.powi(3) - sharp).abs()
        })
        .collect();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[0] / w[1]).collect();
    r.line(
        10,
        ratios.iter().all(|&q| q >= 1.8),
        format!(
            "discrepancies {} ; ratios per halving {}",
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(" "),
            ratios.iter().map(|q| format!("{q:.3}")).collect::<Vec<_>>().join(" ")
        ),
    );
}

fn uncertainty_budget(r: &mut Report) {
    let res = criterion_lhs(&ghz_state(1.0, 1.0, 1.0, 1.0), &ghz_probe(1.0), 2).unwrap();
    let b = propagate_uncertainty(&res, 1e-3, 1e-2, 3, 2).unwrap();
    let zero = propagate_uncertainty(&res, 1e-3, 0.0, 3, 2).unwrap();
    let derived = (1e-6f64 + 1e-4 * 3.0 / 64.0).sqrt();
    let anchor = 2.386e-3;
    let pass = (b.bound - anchor).abs() <= 1e-6 && zero.exact == 1e-3 && zero.bound == 1e-3;
    r.line(
        11,
        pass,
        format!(
            "Ξ_bound = {:.6e} vs anchor {anchor:e} ± 1e−6 (deviation {:.2e})",
            b.bound,
            b.bound - anchor
        ),
    );
    r.note(format!(
        "Ξ_bound matches √(o² + ζ²γ/8k³) = {derived:.6e} to {:.1e}; ζ = 0 gives Ξ = {} (exact), {} (bound)",
        (b.bound - derived).abs(),
        zero.exact,
        zero.bound
    ));
    // the printed bound assumes every partition term is at most 1/2k
    let parts = enumerate_partitions(3, 2).unwrap();
    let equal = CriterionResult::from_terms(
        2,
        0.5,
        parts
            .into_iter()
            .map(|partition| PartitionTerm { partition, value: 0.25 })
            .collect(),
    );
    let e = propagate_uncertainty(&equal, 1e-3, 1e-2, 3, 2).unwrap();
    r.note(format!(
        "equal terms at 1/2k: Ξ_exact {:.6e} ≤ Ξ_bound {:.6e}",
        e.exact, e.bound
    ));
}

fn scan_determinism(r: &mut Report) {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("ghz.toml");
    std::fs::write(
        &state,
        "family = \"ghz_like\"\nsigma = 1.0\nepsilon = 1.0\nnoise = \"gaussian\"\ndelta = 1.0\np = 1.0\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let start = Instant::now();
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_cvsep"))
            .args([
                "scan",
                state.to_str().unwrap(),
                "--axis1",
                "p:0:1:100",
                "--axis2",
                "epsilon:0.1:10:100",
            ])
            .args([
                "--k",
                "2,3",
                "--probe",
                "1",
                "--workers",
                "1",
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        (std::fs::read(out).unwrap(), start.elapsed().as_secs_f64())
    };
    let (a, ta) = run("a.csv");
    let (b, tb) = run("b.csv");
    let rows = a.iter().filter(|&&c| c == b'\n').count();
    r.line(
        12,
        a == b && ta < 60.0 && tb < 60.0 && rows == 10_001,
        format!(
            "100×100 scan, k = 2,3, one worker: identical = {}, {ta:.2} s and {tb:.2} s",
            a == b
        ),
    );
}

fn main() {
    // honour `cargo test -- --list` and name filters without running anything
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut report = Report { unexpected: Vec::new() };
    println!("acceptance report");
    theorem_guarantee(&mut report);
    cauchy_schwarz(&mut report);
    ghz_closed_form_oracle(&mut report);
    ghz_threshold(&mut report);
    probe_optimum_range(&mut report);
    indicator_closed_forms(&mut report);
    annihilated_normalization(&mut report);
    annihilated_detection(&mut report);
    pauli_equivalence(&mut report);
    box_convergence(&mut report);
    uncertainty_budget(&mut report);
    scan_determinism(&mut report);
    if report.unexpected.is_empty() {
        println!(
            "all criteria match their recorded status ({} known red)",
            KNOWN_RED.len()
        );
    } else {
        println!("criteria differing from their recorded status: {:?}", report.unexpected);
        std::process::exit(1);
    }
}
