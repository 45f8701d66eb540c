use serde::{Deserialize, Serialize};

use crate::functionals::evaluate;
use crate::lattice::Field;
use crate::model::ModelParams;
use crate::propagator::{EvolutionTrace, Termination, TraceSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    KPlus,
    KMinus,
    OutOfScope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub membership: Membership,
    #[serde(rename = "S")]
    pub action: f64,
    #[serde(rename = "P")]
    pub virial: f64,
    #[serde(rename = "I")]
    pub nehari: f64,
    pub beta: f64,
    /// `sign(I) == sign(P)`, zero counted as nonnegative.
    pub signs_agree: bool,
    /// `−4/(d−n) · (β − S)`; present for `KMinus`.
    pub lemma_bound: Option<f64>,
}

/// Membership from the action and virial values alone.
pub fn membership_of(params: &ModelParams, action: f64, virial: f64, beta: f64) -> Membership {
    if !params.validate().theorem_window || action >= beta {
        Membership::OutOfScope
    } else if virial >= 0.0 {
        Membership::KPlus
    } else {
        Membership::KMinus
    }
}

/// Sorts a state into `K⁺`, `K⁻` or neither by the signs of its functionals.
pub fn classify(f: &Field, beta: f64) -> Classification {
    let r = evaluate(f);
    let k = f.params().free_dims() as f64;
    let membership = membership_of(f.params(), r.action, r.virial, beta);
    let signs_agree = (r.nehari >= 0.0) == (r.virial >= 0.0);
    if membership != Membership::OutOfScope && !signs_agree {
        log::warn!("sign(I) and sign(P) disagree below the threshold: I = {}, P = {}", r.nehari, r.virial);
    }
    let lemma_bound = (membership == Membership::KMinus).then(|| -4.0 / k * (beta - r.action));
    Classification {
        membership,
        action: r.action,
        virial: r.virial,
        nehari: r.nehari,
        beta,
        signs_agree,
        lemma_bound,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    GlobalScattering,
    FiniteTimeBlowup,
    GrowAlongSequence,
    Undetermined,
    OutOfScope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorOptions {
    /// Blow-up when `gradx_sq` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
    /// Scattering needs the final `L^{2σ+2}` integral below this fraction of its running max.
    pub scatter_frac: f64,
    /// Scattering needs the profile norm's relative oscillation below this.
    pub scatter_tol: f64,
    /// Trailing window as a fraction of the run length.
    pub window_frac: f64,
    /// Samples with spectral tail above this are unresolved.
    pub tail_valid: f64,
    /// Window-to-window growth of `max gradx_sq` that counts as growth along a sequence.
    pub growth_seq_factor: f64,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        DetectorOptions {
            blowup_factor: 2500.0,
            scatter_frac: 0.1,
            scatter_tol: 1e-3,
            window_frac: 0.2,
            tail_valid: 1e-2,
            growth_seq_factor: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub trigger_time: Option<f64>,
    /// `max gradx_sq / gradx_sq(0)`.
    pub growth_factor: f64,
    /// Final over running-max `L^{2σ+2}` integral.
    pub l2s2s2_final_frac: f64,
    /// Relative oscillation `(max − min)/mean` of the profile norm over the trailing window.
    pub profile_residual: f64,
    pub valid: bool,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b > 0.0 {
        a / b
    } else if a > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Maxima of `gradx_sq` over consecutive windows of length `width` from the start.
fn window_maxima(samples: &[TraceSample], width: f64) -> Vec<f64> {
    let t0 = samples[0].t;
    let mut out: Vec<f64> = Vec::new();
    for s in samples {
        let w = ((s.t - t0).abs() / width).floor() as usize;
        if out.len() <= w {
            out.resize(w + 1, f64::NEG_INFINITY);
        }
        out[w] = out[w].max(s.gradx_sq);
    }
    out.retain(|v| v.is_finite());
    out
}

/// Turns a trace into a finite-horizon verdict.
pub fn detect(trace: &EvolutionTrace, opts: &DetectorOptions) -> Verdict {
    let samples = &trace.samples;
    let Some(first) = samples.first() else {
        return Verdict {
            outcome: Outcome::Undetermined,
            trigger_time: None,
            growth_factor: 0.0,
            l2s2s2_final_frac: 0.0,
            profile_residual: 0.0,
            valid: false,
        };
    };
    let last = samples.last().unwrap();
    let valid = samples.iter().all(|s| s.tail < opts.tail_valid);
    let g0 = first.gradx_sq;
    let gmax = samples.iter().map(|s| s.gradx_sq).fold(g0, f64::max);
    let growth_factor = if g0 > 0.0 { gmax / g0 } else { 1.0 };
    let lmax = samples.iter().map(|s| s.l2s2s2).fold(0.0, f64::max);
    let l2s2s2_final_frac = ratio(last.l2s2s2, lmax);

    let span = (last.t - first.t).abs();
    let window = opts.window_frac * trace.t_max.abs().max(span);
    let tail: Vec<f64> =
        samples.iter().filter(|s| (last.t - s.t).abs() <= window).map(|s| s.profile_b1).collect();
    let (pmin, pmax) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let pmean = tail.iter().sum::<f64>() / tail.len() as f64;
    let profile_residual = ratio(pmax - pmin, pmean);

    let base = Verdict {
        outcome: Outcome::Undetermined,
        trigger_time: None,
        growth_factor,
        l2s2s2_final_frac,
        profile_residual,
        valid,
    };
    let blowup = |t: f64| Verdict { outcome: Outcome::FiniteTimeBlowup, trigger_time: Some(t), ..base };

    match trace.termination {
        Termination::BlowupTrigger { t } => {
            return if last.tail < opts.tail_valid { blowup(t) } else { base };
        }
        Termination::InvalidityStop { .. } => return Verdict { valid: false, ..base },
        Termination::Completed => {}
    }
    if g0 > 0.0 {
        if let Some(s) = samples.iter().find(|s| s.gradx_sq > opts.blowup_factor * g0) {
            return if s.tail < opts.tail_valid { blowup(s.t) } else { Verdict { valid: false, ..base } };
        }
    }
    if !valid {
        return base;
    }
    let reached = span >= trace.t_max.abs() * (1.0 - 1e-9);
    if reached && l2s2s2_final_frac <= opts.scatter_frac && profile_residual < opts.scatter_tol {
        return Verdict { outcome: Outcome::GlobalScattering, ..base };
    }
    if window > 0.0 {
        let maxima = window_maxima(samples, window);
        let n = maxima.len();
        if n >= 3 && maxima[n - 3..].windows(2).all(|w| w[1] >= opts.growth_seq_factor * w[0]) {
            return Verdict { outcome: Outcome::GrowAlongSequence, ..base };
        }
    }
    base
}

/// Per-window contributions of the `ℓ^p_γ L^q_t L^r_x` norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowedNorm {
    /// `(γ, ‖u‖^p_{L^q(I_γ; L^r)})` in increasing `γ`.
    pub windows: Vec<(i64, f64)>,
    /// `Σ_γ` of the contributions (the p-th power of the norm).
    pub total: f64,
}

impl WindowedNorm {
    /// Sum of the last `count` window contributions over the total.
    pub fn tail_fraction(&self, count: usize) -> f64 {
        let n = self.windows.len();
        let tail: f64 = self.windows[n.saturating_sub(count)..].iter().map(|w| w.1).sum();
        ratio(tail, self.total)
    }
}

/// Integral of the linear interpolant of `(t, g)` over `[a, b]`.
fn trapezoid_clipped(t: &[f64], g: &[f64], a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..t.len() {
        let (t0, t1) = (t[i - 1], t[i]);
        let lo = t0.max(a);
        let hi = t1.min(b);
        if hi <= lo {
            continue;
        }
        let at = |s: f64| g[i - 1] + (g[i] - g[i - 1]) * (s - t0) / (t1 - t0);
        acc += 0.5 * (hi - lo) * (at(lo) + at(hi));
    }
    acc
}

/// `Σ_{γ∈ℤ} ‖u‖^p_{L^q(I_γ; L^r)}` with `I_γ = π[γ−1, γ+1)` from per-time `‖u(t)‖_{L^r}`
/// samples, by the trapezoid rule in time. Overlapping windows are summed as defined.
pub fn windowed_strichartz(times: &[f64], norms: &[f64], p: f64, q: f64) -> WindowedNorm {
    use std::f64::consts::PI;
    if times.len() < 2 || times.len() != norms.len() {
        return WindowedNorm { windows: Vec::new(), total: 0.0 };
    }
    let g: Vec<f64> = norms.iter().map(|n| n.abs().powf(q)).collect();
    let (t_lo, t_hi) = (times[0], *times.last().unwrap());
    let first = (t_lo / PI).floor() as i64 - 1;
    let last = (t_hi / PI).ceil() as i64 + 1;
    let mut windows = Vec::new();
    let mut total = 0.0;
    for gamma in first..=last {
        let a = PI * (gamma - 1) as f64;
        let b = PI * (gamma + 1) as f64;
        if b <= t_lo || a >= t_hi {
            continue;
        }
        let part = trapezoid_clipped(times, &g, a, b).powf(p / q);
        windows.push((gamma, part));
        total += part;
    }
    WindowedNorm { windows, total }
}
