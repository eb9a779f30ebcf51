//! Command-line front end: state files, subcommands and output formats.
//!
//! State files are flat TOML:
//!
//! ```toml
//! family = "w_like"      # ghz_like | w_like | indicator | annihilated_ghz
//! sigma = 0.5
//! epsilon = 1.0
//! shift = 1.0            # w_like only
//! noise = "gaussian"     # gaussian | box
//! delta = 1.0
//! p = 0.9
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::criterion::{build_box_probe, criterion_lhs, criterion_lhs_box, CriterionResult, Probe};
use crate::error::{invalid, Error, Result};
use crate::experiment::{
    effective_qubit_state, efficiency_scale, observable_expansion, propagate_uncertainty, ObservableExpansion,
    UncertaintyBudget,
};
use crate::optimize::{
    find_threshold, optimize_probe, probe_family_for, scan, Axis, DetectionMap, ProbeRule, ScanSpec, ThresholdQuery,
    ThresholdReport,
};
use crate::states::{Family, NoiseKind, Param, StateParams};
use crate::Conventions;

/// Environment variable holding the default scan worker count.
pub const WORKERS_ENV: &str = "CVSEP_WORKERS";

/// Exit status for malformed input.
pub const EXIT_INPUT: i32 = 2;
/// Exit status for numerical failure.
pub const EXIT_NUMERICAL: i32 = 3;

/// The state file, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpecDocument {
    pub family: Option<Family>,
    pub sigma: Option<f64>,
    pub epsilon: Option<f64>,
    pub shift: Option<f64>,
    pub beta: Option<f64>,
    pub noise: Option<NoiseKind>,
    pub delta: Option<f64>,
    pub p: Option<f64>,
}

impl StateSpecDocument {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| invalid(format!("state file: {e}")))
    }

    /// Checks per-family required and forbidden keys. Without noise keys
    /// a pure state (`p = 1`) gets unit-variance Gaussian noise.
    pub fn resolve(&self) -> Result<StateParams> {
        let family = self
            .family
            .ok_or_else(|| invalid("state file: missing field 'family'"))?;
        let (required, forbidden): (&[&str], &[&str]) = match family {
            Family::GhzLike | Family::AnnihilatedGhz => (&["sigma", "epsilon"], &["shift", "beta"]),
            Family::WLike => (&["sigma", "epsilon", "shift"], &["beta"]),
            Family::Indicator => (&["beta", "epsilon"], &["sigma", "shift"]),
        };
        let field = |name: &str| match name {
            "sigma" => self.sigma,
            "epsilon" => self.epsilon,
            "shift" => self.shift,
            "beta" => self.beta,
            _ => unreachable!(),
        };
        for name in required {
            if field(name).is_none() {
                return Err(invalid(format!(
                    "state file: family '{family}' requires field '{name}'"
                )));
            }
        }
        for name in forbidden {
            if field(name).is_some() {
                return Err(invalid(format!(
                    "state file: field '{name}' does not apply to family '{family}'"
                )));
            }
        }
        let p = self.p.ok_or_else(|| invalid("state file: missing field 'p'"))?;
        let (noise, delta) = match (self.noise, self.delta) {
            (Some(n), Some(d)) => (n, d),
            (None, None) if p == 1.0 => (NoiseKind::Gaussian, 1.0),
            (None, None) => return Err(invalid("state file: 'noise' and 'delta' are required when p < 1")),
            _ => return Err(invalid("state file: 'noise' and 'delta' must be given together")),
        };
        let params = StateParams {
            family,
            sigma: self.sigma.unwrap_or(1.0),
            epsilon: self.epsilon.unwrap_or(1.0),
            shift: self.shift.unwrap_or(0.0),
            beta: self.beta.unwrap_or(1.0),
            noise,
            delta,
            p,
        };
        params.build()?;
        Ok(params)
    }
}

pub fn load_state(path: &Path) -> Result<StateParams> {
    let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    StateSpecDocument::parse(&text)
        .and_then(|d| d.resolve())
        .map_err(|e| match e {
            Error::InvalidArgument(m) => invalid(format!("{}: {m}", path.display())),
            other => other,
        })
}

#[derive(Debug, Parser)]
#[command(
    name = "cvsep",
    version,
    about = "k-separability tests for continuous-variable multipartite states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the inequality for one probe.
    Eval(EvalArgs),
    /// Sweep one or two parameters into a detection map (CSV).
    Scan(ScanArgs),
    /// Locate the parameter value where detection stops.
    Threshold(ThresholdArgs),
    /// Finite-detector protocol: Pauli table, decomposed inequality, uncertainty.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Probe position x0.
    #[arg(long, conflicts_with = "optimize")]
    pub probe: Option<f64>,
    /// Optimise x0 within lo:hi instead.
    #[arg(long, value_name = "LO:HI")]
    pub optimize: Option<String>,
}

impl ProbeArgs {
    fn rule(&self) -> Result<ProbeRule> {
        match (&self.probe, &self.optimize) {
            (Some(x0), None) => Ok(ProbeRule::Fixed { x0: *x0 }),
            (None, Some(r)) => {
                let (lo, hi) = parse_range(r)?;
                Ok(ProbeRule::Optimized { lo, hi })
            }
            _ => Err(invalid("give either --probe X0 or --optimize LO:HI")),
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub state: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    #[command(flatten)]
    pub probe: ProbeArgs,
    /// Finite detector width ξ.
    #[arg(long = "box", value_name = "XI")]
    pub box_width: Option<f64>,
    /// Relative quadrature tolerance for box probes.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, conflicts_with = "csv")]
    pub json: bool,
    #[arg(long)]
    pub csv: bool,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    pub state: PathBuf,
    #[arg(long, value_name = "NAME:LO:HI:STEPS")]
    pub axis1: String,
    #[arg(long, value_name = "NAME:LO:HI:STEPS")]
    pub axis2: Option<String>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub k: Vec<usize>,
    #[command(flatten)]
    pub probe: ProbeArgs,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, env = WORKERS_ENV)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    pub state: PathBuf,
    #[arg(long)]
    pub param: String,
    #[arg(long, value_name = "LO:HI")]
    pub bracket: String,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub probe: ProbeArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub state: PathBuf,
    #[arg(long)]
    pub probe: f64,
    /// Detector width ξ.
    #[arg(long)]
    pub xi: f64,
    /// Absolute uncertainty of the off-diagonal term.
    #[arg(long, default_value_t = 0.0)]
    pub o: f64,
    /// Relative uncertainty of the diagonal terms.
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Detector efficiency.
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| invalid(format!("'{text}' is not of the form lo:hi")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("'{s}' is not a number")))
    };
    Ok((num(a)?, num(b)?))
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

#[derive(Debug, Serialize)]
struct EvalOutput<'a> {
    state: &'a StateParams,
    probe: &'a Probe,
    results: &'a [CriterionResult],
    conventions: Conventions,
}

#[derive(Debug, Serialize)]
struct ThresholdOutput<'a> {
    state: &'a StateParams,
    probe_rule: &'a ProbeRule,
    report: &'a ThresholdReport,
    conventions: Conventions,
}

#[derive(Debug, Serialize)]
struct ExperimentOutput<'a> {
    state: &'a StateParams,
    probe: &'a Probe,
    tau: f64,
    expansion: &'a ObservableExpansion,
    criterion: &'a CriterionResult,
    uncertainty: &'a UncertaintyBudget,
    conventions: Conventions,
}

#[derive(Debug, Serialize)]
struct ScanMeta<'a> {
    engine: &'static str,
    version: &'static str,
    state: &'a StateParams,
    axes: Vec<(&'static str, usize, f64, f64)>,
    ks: &'a [usize],
    probe_rule: &'a ProbeRule,
    cells: usize,
    failed_cells: usize,
    conventions: Conventions,
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| invalid(format!("serialisation failed: {e}")))
}

/// Runs one command, writing its report to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let text = match &cli.command {
        Command::Eval(a) => cmd_eval(a)?,
        Command::Scan(a) => cmd_scan(a)?,
        Command::Threshold(a) => cmd_threshold(a)?,
        Command::Experiment(a) => cmd_experiment(a)?,
    };
    out.write_all(text.as_bytes())
        .map_err(|e| invalid(format!("cannot write output: {e}")))
}

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_INPUT
    }
}

fn cmd_eval(a: &EvalArgs) -> Result<String> {
    let params = load_state(&a.state)?;
    let state = params.build()?;
    let family = probe_family_for(&params);
    let rule = a.probe.rule()?;
    let mut results = Vec::new();
    let mut probe = None;
    for &k in &a.k {
        let x0 = match rule {
            ProbeRule::Fixed { x0 } => x0,
            ProbeRule::Optimized { lo, hi } => optimize_probe(&state, k, family, lo, hi)?.x0,
            ProbeRule::FromAxis => return Err(invalid("eval needs --probe or --optimize")),
        };
        let r = match a.box_width {
            Some(xi) => {
                let p = build_box_probe(family, x0, xi)?;
                let r = criterion_lhs_box(&state, &p, k, a.tol)?;
                probe = Some(p);
                r
            }
            None => {
                let p = crate::criterion::build_probe(family, x0)?;
                let r = criterion_lhs(&state, &p, k)?;
                probe = Some(p);
                r
            }
        };
        results.push(r);
    }
    let probe = probe.ok_or_else(|| invalid("no k requested"))?;
    if a.csv {
        let mut s = String::from("k,quantity,value\n");
        for r in &results {
            s += &format!("{},offdiag_term,{}\n", r.k, fmt_f64(r.offdiag_term));
            for t in &r.partition_terms {
                s += &format!("{},{},{}\n", r.k, t.partition, fmt_f64(t.value));
            }
            s += &format!("{},lhs,{}\n", r.k, fmt_f64(r.lhs));
            s += &format!(
                "{},verdict,{}\n",
                r.k,
                if r.is_violated() { "violated" } else { "not_violated" }
            );
        }
        Ok(s)
    } else {
        Ok(to_json(&EvalOutput {
            state: &params,
            probe: &probe,
            results: &results,
            conventions: Conventions::for_family(params.family),
        })? + "\n")
    }
}

/// Renders a detection map as CSV.
pub fn detection_csv(map: &DetectionMap) -> String {
    let mut s = map
        .axes
        .iter()
        .map(|p| p.name().to_string())
        .collect::<Vec<_>>()
        .join(",");
    for k in &map.ks {
        s += &format!(",lhs_{k},fired_{k}");
    }
    s.push('\n');
    for cell in &map.cells {
        let mut row: Vec<String> = cell.coords.iter().map(|&v| fmt_f64(v)).collect();
        if cell.failure.is_some() {
            for _ in &map.ks {
                row.push("NA".into());
                row.push("failed".into());
            }
        } else {
            for v in &cell.values {
                row.push(fmt_f64(v.lhs));
                row.push(v.fired.to_string());
            }
        }
        s += &row.join(",");
        s.push('\n');
    }
    s
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn cmd_scan(a: &ScanArgs) -> Result<String> {
    let params = load_state(&a.state)?;
    let mut axes = vec![Axis::parse(&a.axis1)?];
    if let Some(second) = &a.axis2 {
        axes.push(Axis::parse(second)?);
    }
    let sweeps_x0 = axes.iter().any(|ax| ax.param == Param::X0);
    let probe = match (&a.probe.probe, &a.probe.optimize) {
        (None, None) if sweeps_x0 => ProbeRule::FromAxis,
        _ => a.probe.rule()?,
    };
    let spec = ScanSpec {
        base: params,
        axes,
        ks: a.k.clone(),
        probe,
    };
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let map = scan(&spec, workers)?;
    let write =
        |path: &Path, text: &str| std::fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())));
    write(&a.out, &detection_csv(&map))?;
    let meta = ScanMeta {
        engine: "cvsep",
        version: env!("CARGO_PKG_VERSION"),
        state: &params,
        axes: spec
            .axes
            .iter()
            .map(|ax| {
                (
                    ax.param.name(),
                    ax.values.len(),
                    ax.values[0],
                    *ax.values.last().unwrap(),
                )
            })
            .collect(),
        ks: &spec.ks,
        probe_rule: &spec.probe,
        cells: map.cells.len(),
        failed_cells: map.failed_cells(),
        conventions: Conventions::for_family(params.family),
    };
    let sidecar = sidecar_path(&a.out);
    write(&sidecar, &(to_json(&meta)? + "\n"))?;
    Ok(format!(
        "wrote {} cells ({} failed) to {}\nmetadata in {}\n",
        map.cells.len(),
        map.failed_cells(),
        a.out.display(),
        sidecar.display()
    ))
}

fn cmd_threshold(a: &ThresholdArgs) -> Result<String> {
    let params = load_state(&a.state)?;
    let (lo, hi) = parse_range(&a.bracket)?;
    let param: Param = a.param.parse()?;
    let probe = a.probe.rule()?;
    let q = ThresholdQuery {
        base: params,
        param,
        lo,
        hi,
        k: a.k,
        probe,
        tol: a.tol,
    };
    let report = find_threshold(&q)?;
    Ok(to_json(&ThresholdOutput {
        state: &params,
        probe_rule: &probe,
        report: &report,
        conventions: Conventions::for_family(params.family),
    })? + "\n")
}

fn cmd_experiment(a: &ExperimentArgs) -> Result<String> {
    let params = load_state(&a.state)?;
    if !(0.0..=1.0).contains(&a.tau) {
        return Err(invalid(format!("efficiency {} outside [0, 1]", a.tau)));
    }
    let probe = build_box_probe(probe_family_for(&params), a.probe, a.xi)?;
    // detector losses act on every scalar product, i.e. on the kernel
    let state = params.build()?.with_kernel_scale(a.tau)?;
    let eff = effective_qubit_state(&state, &probe, a.tol)?;
    let expansion = observable_expansion(&eff)?;
    let unscaled = criterion_lhs_box(&params.build()?, &probe, 2, a.tol)?;
    let criterion = efficiency_scale(&unscaled, a.tau)?;
    let uncertainty = propagate_uncertainty(&criterion, a.o, a.zeta, 3, 2)?;
    Ok(to_json(&ExperimentOutput {
        state: &params,
        probe: &probe,
        tau: a.tau,
        expansion: &expansion,
        criterion: &criterion,
        uncertainty: &uncertainty,
        conventions: Conventions::for_family(params.family),
    })? + "\n")
}
