use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{Context, Result};
use confined_nls::diagnostics::{classify, detect, membership_of, Classification, Membership, Outcome, Verdict};
use confined_nls::exponents::{check_time_window, exponent_set, AcceptabilityReport, ExponentSet, IdentityReport};
use confined_nls::functionals::{evaluate, galilean_boost};
use confined_nls::ground_state::{default_guess, minimize_dab, petviashvili, DescentOptions, GroundStateSummary};
use confined_nls::lattice::io::{read_header, write_field};
use confined_nls::propagator::{evolve, linear_decay_fit, EvolutionTrace, Termination};
use confined_nls::{Field, Grid, GridSpec, ModelParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{load_on, ExperimentConfig};
use crate::output::{write_json, write_plot_csv, write_sweep_csv, write_trace_csv};
use crate::Invalid;

pub const GROUND_STATE_FILE: &str = "ground_state.nlsf";

/// Written next to a stored ground state; doubles as the β cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateReport {
    pub model: ModelParams,
    pub grid: GridSpec,
    #[serde(flatten)]
    pub summary: GroundStateSummary,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cross_check: Option<CrossCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub d_1_0: f64,
    pub d_1_virial: f64,
    /// `|d − β| / β` for each of the two minima.
    pub delta_1_0: f64,
    pub delta_1_virial: f64,
}

pub fn summary_path(field_path: &Path) -> PathBuf {
    field_path.with_extension("json")
}

pub fn run_ground_state(cfg: &ExperimentConfig, out: &Path, cross_check: bool) -> Result<GroundStateReport> {
    let grid = cfg.build_grid()?;
    let p = cfg.model;
    p.require_focusing().map_err(|e| Invalid(e.to_string()))?;
    let guess = default_guess(p, grid.clone())?;
    let res = petviashvili(p, grid.clone(), &guess, 1e-12, 2000)?;
    let cross_check = if cross_check {
        let k = p.free_dims() as f64;
        let d10 = minimize_dab(p, grid.clone(), 1.0, 0.0, DescentOptions::default())?.dab;
        let dv = minimize_dab(p, grid.clone(), 1.0, -2.0 / k, DescentOptions::default())?.dab;
        Some(CrossCheck {
            d_1_0: d10,
            d_1_virial: dv,
            delta_1_0: (d10 - res.beta).abs() / res.beta,
            delta_1_virial: (dv - res.beta).abs() / res.beta,
        })
    } else {
        None
    };
    let report = GroundStateReport {
        model: p,
        grid: cfg.grid.clone(),
        summary: res.summary(),
        converged: res.converged,
        cross_check,
    };
    fs::create_dir_all(out)?;
    let path = out.join(GROUND_STATE_FILE);
    write_field(&path, &res.q)?;
    write_json(&summary_path(&path), &report)?;
    Ok(report)
}

/// β from an explicit value, a cached ground state (checked against the config), or a
/// fresh solve on the config grid.
pub fn resolve_beta(cfg: &ExperimentConfig, grid: &Arc<Grid>, beta: Option<f64>, cache: Option<&Path>) -> Result<Option<f64>> {
    if let Some(b) = beta {
        if !(b.is_finite() && b > 0.0) {
            return Err(Invalid(format!("beta must be positive, got {b}")).into());
        }
        return Ok(Some(b));
    }
    if let Some(path) = cache {
        let header = read_header(path).with_context(|| format!("reading {}", path.display()))?;
        if header.params()? != cfg.model || header.grid_spec() != cfg.grid {
            return Err(Invalid(format!(
                "stale beta cache {}: stored for {} on {:?}",
                path.display(),
                header.params()?,
                header.grid_spec()
            ))
            .into());
        }
        let text = fs::read_to_string(summary_path(path))
            .with_context(|| format!("reading the summary next to {}", path.display()))?;
        let report: GroundStateReport = serde_json::from_str(&text)?;
        return Ok(Some(report.summary.beta));
    }
    if !cfg.model.validate().theorem_window {
        return Ok(None);
    }
    let guess = default_guess(cfg.model, grid.clone())?;
    let res = petviashvili(cfg.model, grid.clone(), &guess, 1e-12, 2000)?;
    log::info!("solved for beta = {} ({} iterations)", res.beta, res.iterations);
    Ok(Some(res.beta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyReport {
    #[serde(flatten)]
    pub classification: Classification,
    #[serde(rename = "G")]
    pub momentum: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boosted: Option<BoostReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoostReport {
    pub z0: Vec<f64>,
    #[serde(rename = "G")]
    pub momentum: Vec<f64>,
    #[serde(flatten)]
    pub classification: Classification,
}

pub fn run_classify(cfg: &ExperimentConfig, state: &Path, beta: Option<f64>, cache: Option<&Path>) -> Result<ClassifyReport> {
    let grid = cfg.build_grid()?;
    let f = load_on(state, cfg.model, grid.clone())?;
    let beta = resolve_beta(cfg, &grid, beta, cache)?
        .ok_or_else(|| Invalid("classification needs the focusing case inside the theorem window".into()))?;
    let r = evaluate(&f);
    let classification = classify(&f, beta);
    let moving = r.momentum.iter().any(|g| g.abs() > 1e-12 * r.mass.max(f64::MIN_POSITIVE));
    let boosted = if moving {
        let (z0, still) = galilean_boost(&f)?;
        Some(BoostReport { z0, momentum: evaluate(&still).momentum, classification: classify(&still, beta) })
    } else {
        None
    };
    Ok(ClassifyReport { classification, momentum: r.momentum, boosted })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolveSummary {
    pub beta: Option<f64>,
    pub initial_membership: Option<Membership>,
    pub membership_constant: Option<bool>,
    pub termination: Termination,
    pub detected: Outcome,
    pub samples: usize,
}

pub struct EvolveRun {
    pub verdict: Verdict,
    pub summary: EvolveSummary,
    pub trace: EvolutionTrace,
}

/// Evolves `f0`, runs the detector, and classifies every sample when β is known.
/// Parameters outside the theorem window turn the verdict into `OutOfScope`.
pub fn evolve_and_judge(cfg: &ExperimentConfig, f0: &Field, beta: Option<f64>) -> Result<EvolveRun> {
    let trace = evolve(f0, &cfg.evolve_options())?;
    let mut verdict = detect(&trace, &cfg.detectors);
    let detected = verdict.outcome;
    if !cfg.model.validate().theorem_window {
        verdict.outcome = Outcome::OutOfScope;
    }
    let members: Option<Vec<Membership>> =
        beta.map(|b| trace.samples.iter().map(|s| membership_of(&cfg.model, s.action, s.virial, b)).collect());
    let summary = EvolveSummary {
        beta,
        initial_membership: members.as_ref().map(|m| m[0]),
        membership_constant: members.as_ref().map(|m| m.iter().all(|x| *x == m[0])),
        termination: trace.termination,
        detected,
        samples: trace.samples.len(),
    };
    Ok(EvolveRun { verdict, summary, trace })
}

pub fn run_evolve(cfg: &ExperimentConfig, out: &Path, beta: Option<f64>, cache: Option<&Path>) -> Result<EvolveRun> {
    let grid = cfg.build_grid()?;
    let f0 = cfg.initial_field(grid.clone())?;
    let beta = resolve_beta(cfg, &grid, beta, cache)?;
    let run = evolve_and_judge(cfg, &f0, beta)?;
    fs::create_dir_all(out)?;
    write_trace_csv(&out.join("trace.csv"), &run.trace, cfg.model.power())?;
    write_plot_csv(&out.join("plot.csv"), &run.trace, &cfg.model, beta)?;
    write_json(&out.join("verdict.json"), &run.verdict)?;
    write_json(&out.join("summary.json"), &run.summary)?;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    #[serde(rename = "S")]
    pub action: f64,
    #[serde(rename = "P")]
    pub virial: f64,
    #[serde(rename = "I")]
    pub nehari: f64,
    pub membership: Option<Membership>,
    pub outcome: Outcome,
    pub valid: bool,
    pub growth_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub param: String,
    pub beta: Option<f64>,
    pub rows: Vec<SweepRow>,
    /// Adjacent values where `P` changes sign.
    pub p_sign_flip: Option<[f64; 2]>,
    /// Amplitude where `P` vanishes, refined by bisection on the functional alone.
    pub p_zero: Option<f64>,
    /// Bracket of the change in verdict between valid runs, refined when bisection is on.
    pub transition: Option<[f64; 2]>,
    pub bisection_steps: usize,
    /// Every run came back `Undetermined` or invalid.
    pub inconclusive: bool,
}

fn decided(row: &SweepRow) -> bool {
    row.valid && matches!(row.outcome, Outcome::GlobalScattering | Outcome::FiniteTimeBlowup | Outcome::GrowAlongSequence)
}

fn sweep_row(cfg: &ExperimentConfig, base: &Field, beta: Option<f64>, value: f64) -> Result<SweepRow> {
    let f = base.scaled(value);
    let r = evaluate(&f);
    let run = evolve_and_judge(cfg, &f, beta)?;
    Ok(SweepRow {
        value,
        action: r.action,
        virial: r.virial,
        nehari: r.nehari,
        membership: beta.map(|b| membership_of(&cfg.model, r.action, r.virial, b)),
        outcome: run.verdict.outcome,
        valid: run.verdict.valid,
        growth_factor: run.verdict.growth_factor,
    })
}

pub struct SweepRequest {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    pub bisect_width: Option<f64>,
    pub jobs: Option<usize>,
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    out: &Path,
    req: &SweepRequest,
    beta: Option<f64>,
    cache: Option<&Path>,
) -> Result<SweepResult> {
    if req.steps == 0 || !(req.from > 0.0 && req.to > 0.0) {
        return Err(Invalid("sweep needs steps >= 1 and positive amplitudes".into()).into());
    }
    if let Some(w) = req.bisect_width {
        if !(w > 0.0) {
            return Err(Invalid(format!("bisection width must be positive, got {w}")).into());
        }
    }
    let grid = cfg.build_grid()?;
    let base = cfg.unit_field(grid.clone())?;
    let beta = resolve_beta(cfg, &grid, beta, cache)?;
    let values: Vec<f64> = if req.steps == 1 {
        vec![req.from]
    } else {
        (0..req.steps).map(|i| req.from + (req.to - req.from) * i as f64 / (req.steps - 1) as f64).collect()
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(req.jobs.unwrap_or(0)).build()?;
    let mut rows: Vec<SweepRow> =
        pool.install(|| values.par_iter().map(|&v| sweep_row(cfg, &base, beta, v)).collect::<Result<_>>())?;
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));

    let p_sign_flip = rows
        .windows(2)
        .find(|w| (w[0].virial >= 0.0) != (w[1].virial >= 0.0))
        .map(|w| [w[0].value, w[1].value]);
    let p_zero = p_sign_flip.map(|[lo, hi]| {
        let positive_lo = evaluate(&base.scaled(lo)).virial >= 0.0;
        let (mut a, mut b) = (lo, hi);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if (evaluate(&base.scaled(m)).virial >= 0.0) == positive_lo {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    });

    let mut transition = rows
        .windows(2)
        .find(|w| decided(&w[0]) && decided(&w[1]) && w[0].outcome != w[1].outcome)
        .map(|w| (w[0].clone(), w[1].clone()));
    let mut bisection_steps = 0;
    if let (Some(width), Some((lo, hi))) = (req.bisect_width, transition.as_mut()) {
        while hi.value - lo.value > width {
            let mid = sweep_row(cfg, &base, beta, 0.5 * (lo.value + hi.value))?;
            bisection_steps += 1;
            if !decided(&mid) {
                log::warn!("bisection stopped at an undecided run, value {}", mid.value);
                break;
            }
            if mid.outcome == lo.outcome {
                *lo = mid;
            } else {
                *hi = mid;
            }
        }
    }
    let inconclusive = rows.iter().all(|r| !decided(r));
    if inconclusive {
        log::warn!("sweep is inconclusive: no run reached a valid verdict");
    }
    let result = SweepResult {
        param: "amplitude".into(),
        beta,
        rows,
        p_sign_flip,
        p_zero,
        transition: transition.map(|(l, h)| [l.value, h.value]),
        bisection_steps,
        inconclusive,
    };
    fs::create_dir_all(out)?;
    write_sweep_csv(&out.join("sweep.csv"), &result.rows)?;
    write_json(&out.join("sweep.json"), &result)?;
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    #[serde(flatten)]
    pub set: ExponentSet,
    pub identities: IdentityReport,
    pub admissible: bool,
    pub time_window: bool,
    pub acceptable: AcceptabilityReport,
}

pub fn run_exponents(params: ModelParams) -> Result<ExponentReport> {
    let set = exponent_set(params.d, params.n, params.sigma).map_err(|e| Invalid(e.to_string()))?;
    Ok(ExponentReport {
        identities: set.identities(),
        admissible: set.admissible(),
        time_window: check_time_window(set.p0, set.r, params.d, params.n),
        acceptable: set.acceptable(),
        set,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub r: f64,
    pub delta: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `|−slope − δ| / δ`.
    pub relative_error: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

pub fn run_linear_decay(cfg: &ExperimentConfig, out: &Path, t_lo: f64, t_hi: f64, count: usize) -> Result<DecayReport> {
    if !(0.0 < t_lo && t_lo < t_hi) || count < 2 {
        return Err(Invalid("need 0 < t_lo < t_hi and at least two samples".into()).into());
    }
    let grid = cfg.build_grid()?;
    let f0 = cfg.initial_field(grid)?;
    let p = cfg.model;
    let fit = linear_decay_fit(&f0, p.power(), t_lo, t_hi, count)?;
    let k = p.free_dims() as f64;
    let delta = k * (0.5 - 1.0 / p.power());
    let report = DecayReport {
        r: fit.r,
        delta,
        slope: fit.slope,
        intercept: fit.intercept,
        relative_error: (-fit.slope - delta).abs() / delta,
        times: fit.times,
        norms: fit.norms,
    };
    fs::create_dir_all(out)?;
    write_json(&out.join("linear_decay.json"), &report)?;
    Ok(report)
}
