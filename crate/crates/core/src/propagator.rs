//! Time stepping: exact linear flow in coefficient space, Strang splitting for
//! the nonlinear phase, the rotating vector fields and the final-state solve.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{evaluate_parts, pow_sigma, FunctionalReport};
use crate::lattice::{ladder, Field, Grid, Ladder, Representation};

/// `e^{−itH} u`, exact for any `t`.
pub fn linear_evolve(f: &Field, t: f64) -> Field {
    let mut c = f.to_coefficients();
    apply_linear_phase(f.grid(), c.data_mut(), t);
    c
}

fn apply_linear_phase(grid: &Grid, c: &mut [Complex64], t: f64) {
    let nz = grid.z_total();
    for (i, v) in c.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -t * grid.h_eigen(i / nz, i % nz));
    }
}

fn linear_phases(grid: &Grid, dt: f64) -> Vec<Complex64> {
    let nz = grid.z_total();
    (0..grid.len()).map(|i| Complex64::from_polar(1.0, -dt * grid.h_eigen(i / nz, i % nz))).collect()
}

/// `u ← e^{−iλ|u|^{2σ}τ} u` on physical values.
fn nonlinear_phase(f: &Field, v: &mut [Complex64], tau: f64) {
    let lam = f.params().lambda_f64();
    let params = *f.params();
    for u in v.iter_mut() {
        let theta = -lam * pow_sigma(u.norm_sqr(), &params) * tau;
        *u *= Complex64::from_polar(1.0, theta);
    }
}

/// One Strang step of size `dt` (negative `dt` integrates backward).
pub fn step_strang(f: &Field, dt: f64) -> Field {
    let mut v = f.values().into_owned();
    let mut scratch = Vec::new();
    let grid = f.grid();
    nonlinear_phase(f, &mut v, 0.5 * dt);
    grid.forward(&mut v, &mut scratch);
    apply_linear_phase(grid, &mut v, dt);
    grid.inverse(&mut v, &mut scratch);
    nonlinear_phase(f, &mut v, 0.5 * dt);
    f.with_data(Representation::Physical, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorField {
    A1,
    A2,
}

/// `y·u` and `∂_y u` with `M+1` Hermite rows, so norms are exact.
fn ladders(f: &Field) -> (Vec<Complex64>, Vec<Complex64>) {
    let c = f.coefficients();
    (ladder(f.grid(), &c, Ladder::Position), ladder(f.grid(), &c, Ladder::Derivative))
}

/// `A₁(t) = sin 2t · y − i cos 2t · ∂_y`, `A₂(t) = −cos 2t · y − i sin 2t · ∂_y`, truncated to the grid.
pub fn vector_field_a(f: &Field, t: f64, which: VectorField) -> Field {
    let (y, d) = ladders(f);
    let (s, c) = (2.0 * t).sin_cos();
    let (cy, cd) = match which {
        VectorField::A1 => (Complex64::new(s, 0.0), Complex64::new(0.0, -c)),
        VectorField::A2 => (Complex64::new(-c, 0.0), Complex64::new(0.0, -s)),
    };
    let mut out: Vec<Complex64> = y.iter().zip(&d).map(|(a, b)| a * cy + b * cd).collect();
    out.truncate(f.grid().len());
    f.with_data(Representation::Coefficient, out)
}

/// `Σ_{A ∈ {Id, A₁, A₂, ∇_z}} ‖A(t)u‖²`.
pub fn profile_b1_norm(f: &Field, t: f64) -> f64 {
    let c = f.coefficients();
    profile_b1_parts(f.grid(), &c, t)
}

fn profile_b1_parts(grid: &Grid, c: &[Complex64], t: f64) -> f64 {
    let y = ladder(grid, c, Ladder::Position);
    let d = ladder(grid, c, Ladder::Derivative);
    let (s, co) = (2.0 * t).sin_cos();
    let mut a1 = 0.0;
    let mut a2 = 0.0;
    for (yv, dv) in y.iter().zip(&d) {
        let idv = Complex64::new(0.0, 1.0) * dv;
        a1 += (yv * s - idv * co).norm_sqr();
        a2 += (-yv * co - idv * s).norm_sqr();
    }
    let nz = grid.z_total();
    let mut rest = 0.0;
    for (i, v) in c.iter().enumerate() {
        rest += (1.0 + grid.ksq()[i % nz]) * v.norm_sqr();
    }
    (a1 + a2 + rest) * grid.box_volume()
}

/// `Im ∫ ū y ∂_y u`; `d/dt ‖yu‖² = 4 ×` this.
fn y_virial_rate(grid: &Grid, c: &[Complex64]) -> f64 {
    let y = ladder(grid, c, Ladder::Position);
    let d = ladder(grid, c, Ladder::Derivative);
    y.iter().zip(&d).map(|(a, b)| (a.conj() * b).im).sum::<f64>() * grid.box_volume()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub action: f64,
    pub momentum: Vec<f64>,
    pub gradx_sq: f64,
    pub grady_sq: f64,
    pub gradz_sq: f64,
    pub ymom_sq: f64,
    pub l2s2s2: f64,
    pub nehari: f64,
    pub virial: f64,
    pub profile_b1: f64,
    pub tail: f64,
    /// `Im ∫ ū y ∂_y u`.
    pub y_virial_rate: f64,
}

impl TraceSample {
    fn new(t: f64, r: &FunctionalReport, profile_b1: f64, tail: f64, y_rate: f64) -> Self {
        TraceSample {
            t,
            mass: r.mass,
            energy: r.energy,
            action: r.action,
            momentum: r.momentum.clone(),
            gradx_sq: r.gradx_sq(),
            grady_sq: r.grady_sq,
            gradz_sq: r.gradz_sq,
            ymom_sq: r.ymom_sq,
            l2s2s2: r.l2s2s2,
            nehari: r.nehari,
            virial: r.virial,
            profile_b1,
            tail,
            y_virial_rate: y_rate,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// `‖∇_x u‖²` exceeded the blow-up factor while the field was resolved.
    BlowupTrigger { t: f64 },
    /// Spectral tail exceeded the validity threshold.
    InvalidityStop { t: f64, tail: f64 },
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub samples: Vec<TraceSample>,
    pub dt: f64,
    pub t_max: f64,
    pub termination: Termination,
    pub final_state: Field,
}

impl EvolutionTrace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    /// Step size; negative integrates backward.
    pub dt: f64,
    /// Duration `|T|`; the run covers `[0, T]` (or `[0, −T]` when `dt < 0`).
    pub t_max: f64,
    pub sample_stride: usize,
    /// Stop when `gradx_sq > blowup_factor · gradx_sq(0)`; `None` disables.
    pub blowup_factor: Option<f64>,
    /// Stop when the spectral tail exceeds this; `None` disables.
    pub tail_valid: Option<f64>,
    /// `false` runs the linear flow through the same stepping loop.
    pub nonlinear: bool,
}

impl EvolveOptions {
    pub fn new(dt: f64, t_max: f64, sample_stride: usize) -> Self {
        EvolveOptions { dt, t_max, sample_stride, blowup_factor: Some(2500.0), tail_valid: Some(1e-2), nonlinear: true }
    }

    pub fn unguarded(mut self) -> Self {
        self.blowup_factor = None;
        self.tail_valid = None;
        self
    }
}

/// Evolves with the default (no-op) monitor.
pub fn evolve(f0: &Field, opts: &EvolveOptions) -> Result<EvolutionTrace> {
    evolve_with(f0, opts, |_, _| {})
}

/// Evolves `f0`, calling `monitor(t, coefficients)` at every sample.
pub fn evolve_with(
    f0: &Field,
    opts: &EvolveOptions,
    mut monitor: impl FnMut(f64, &Field),
) -> Result<EvolutionTrace> {
    if !(opts.dt.is_finite() && opts.dt != 0.0) || !(opts.t_max.is_finite() && opts.t_max >= 0.0) {
        return Err(Error::InvalidParams(format!("bad time stepping dt={} t_max={}", opts.dt, opts.t_max)));
    }
    if opts.sample_stride == 0 {
        return Err(Error::InvalidParams("sample_stride must be positive".into()));
    }
    let grid = f0.grid().clone();
    let params = *f0.params();
    let dt = opts.dt;
    let steps = (opts.t_max / dt.abs()).round() as usize;
    let phases = linear_phases(&grid, dt);
    let mut scratch = Vec::new();
    let mut v = f0.values().into_owned();
    let mut samples = Vec::new();
    let mut termination = Termination::Completed;

    let mut record = |t: f64, v: &[Complex64], samples: &mut Vec<TraceSample>| -> (Field, TraceSample) {
        let mut c = v.to_vec();
        grid.forward(&mut c, &mut Vec::new());
        let r = evaluate_parts(&params, &grid, &c, v);
        let tail = crate::lattice::tail_fraction(&grid, &c);
        let s = TraceSample::new(t, &r, profile_b1_parts(&grid, &c, t), tail, y_virial_rate(&grid, &c));
        samples.push(s.clone());
        let field = f0.with_data(Representation::Coefficient, c);
        monitor(t, &field);
        (field, s)
    };

    let (_, first) = record(0.0, &v, &mut samples);
    let g0 = first.gradx_sq;
    let nl = |v: &mut [Complex64], tau: f64| {
        if opts.nonlinear {
            nonlinear_phase(f0, v, tau);
        }
    };
    let mut pending_half = false;
    for k in 1..=steps {
        // Consecutive nonlinear half-steps commute exactly, so they are fused.
        nl(&mut v, if pending_half { dt } else { 0.5 * dt });
        grid.forward(&mut v, &mut scratch);
        v.iter_mut().zip(&phases).for_each(|(x, p)| *x *= p);
        grid.inverse(&mut v, &mut scratch);
        pending_half = true;
        let t = k as f64 * dt;
        if k % opts.sample_stride == 0 || k == steps {
            nl(&mut v, 0.5 * dt);
            pending_half = false;
            if v.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                termination = Termination::InvalidityStop { t, tail: f64::NAN };
                break;
            }
            let (_, s) = record(t, &v, &mut samples);
            if let Some(tv) = opts.tail_valid {
                if s.tail > tv {
                    termination = Termination::InvalidityStop { t, tail: s.tail };
                    break;
                }
            }
            if let Some(bf) = opts.blowup_factor {
                if g0 > 0.0 && s.gradx_sq > bf * g0 {
                    termination = Termination::BlowupTrigger { t };
                    break;
                }
            }
        }
    }
    if pending_half {
        nl(&mut v, 0.5 * dt);
    }
    let final_state = Field::new(params, grid, Representation::Physical, v)?;
    Ok(EvolutionTrace { samples, dt, t_max: opts.t_max, termination, final_state })
}

/// Evolves to time `t` (either sign) without monitoring and returns the state.
pub fn evolve_to(f0: &Field, t: f64, dt: f64, nonlinear: bool) -> Result<Field> {
    if t == 0.0 {
        return Ok(f0.clone());
    }
    let steps = (t.abs() / dt.abs()).round().max(1.0) as usize;
    let opts = EvolveOptions {
        dt: t / steps as f64,
        t_max: t.abs(),
        sample_stride: steps,
        blowup_factor: None,
        tail_valid: None,
        nonlinear,
    };
    Ok(evolve(f0, &opts)?.final_state)
}

#[derive(Debug, Clone)]
pub struct FinalStateSolution {
    /// `u(t_target)` from the longer truncation `2T`.
    pub state: Field,
    /// `‖u_T(t_target) − u_{2T}(t_target)‖_{L²}`.
    pub truncation_delta: f64,
}

/// Solves for the solution that behaves like `e^{−itH}ψ` as `t → +∞`: start from the
/// free evolution at `T_trunc` (and `2T_trunc`) and integrate backward to `t_target`.
pub fn solve_final_state(psi: &Field, t_trunc: f64, t_target: f64, dt: f64) -> Result<FinalStateSolution> {
    if !(t_trunc > t_target) {
        return Err(Error::InvalidParams("truncation time must exceed the target time".into()));
    }
    let run = |tt: f64| -> Result<Field> {
        let start = linear_evolve(psi, tt);
        evolve_to(&start, t_target - tt, dt, true)
    };
    let short = run(t_trunc)?;
    let long = run(2.0 * t_trunc)?;
    let truncation_delta = short.distance(&long)?;
    if truncation_delta > 1e-4 {
        return Err(Error::NonConvergence { iterations: 2, last_change: truncation_delta });
    }
    Ok(FinalStateSolution { state: long, truncation_delta })
}

/// `u(y, z − shift)` by a Fourier phase.
pub fn translate_z(f: &Field, shift: &[f64]) -> Field {
    let grid = f.grid();
    let mut c = f.to_coefficients();
    let nz = grid.z_total();
    let phase: Vec<Complex64> = (0..nz)
        .map(|zi| {
            let s: f64 = (0..grid.free_axes())
                .map(|a| grid.axes()[a].wavenumbers[grid.z_index(zi, a)] * shift[a])
                .sum();
            Complex64::from_polar(1.0, -s)
        })
        .collect();
    c.data_mut().iter_mut().enumerate().for_each(|(i, v)| *v *= phase[i % nz]);
    c
}

/// Power-law fit of `‖e^{−itH}u₀‖_{L^r}` against `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub r: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Least-squares slope of `log ‖·‖_{L^r}` against `log t`.
    pub slope: f64,
    pub intercept: f64,
}

/// `‖u‖_{L^r}` by the collocation quadrature.
pub fn lr_norm(f: &Field, r: f64) -> f64 {
    let v = f.values();
    crate::lattice::phys_integral(f.grid(), &v, |u| u.norm().powf(r)).powf(1.0 / r)
}

/// Samples the free flow at `count` log-spaced times in `[t_lo, t_hi]` and fits the decay rate.
pub fn linear_decay_fit(f0: &Field, r: f64, t_lo: f64, t_hi: f64, count: usize) -> Result<DecayFit> {
    if !(0.0 < t_lo && t_lo < t_hi) || count < 2 || r < 2.0 {
        return Err(Error::InvalidParams(format!(
            "decay fit needs 0 < t_lo < t_hi, count >= 2 and r >= 2 (got {t_lo}, {t_hi}, {count}, {r})"
        )));
    }
    let ratio = (t_hi / t_lo).ln();
    let times: Vec<f64> =
        (0..count).map(|i| t_lo * (ratio * i as f64 / (count - 1) as f64).exp()).collect();
    let norms: Vec<f64> = times.iter().map(|&t| lr_norm(&linear_evolve(f0, t), r)).collect();
    if norms.iter().any(|&n| n <= 0.0) {
        return Err(Error::ZeroField);
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let n = count as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit { r, times, norms, slope, intercept: my - slope * mx })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::evaluate;
    use crate::lattice::hermite::hermite_functions;
    use crate::lattice::GridSpec;
    use crate::model::{ModelParams, Sign};
    use num_rational::Rational64;
    use std::sync::Arc;

    fn params(lambda: Sign) -> ModelParams {
        ModelParams::new(2, 1, Rational64::new(3, 1), lambda).unwrap()
    }

    fn grid() -> Arc<Grid> {
        Arc::new(Grid::new(GridSpec::new(16, vec![128], vec![32.0])).unwrap())
    }

    fn gaussian(p: ModelParams, amp: f64, v: f64) -> Field {
        Field::from_fn(p, grid(), |y, z| Complex64::from_polar(amp * (-(y * y + z[0] * z[0]) / 2.0).exp(), v * z[0]))
            .unwrap()
    }

    #[test]
    fn linear_evolve_at_zero_is_identity() {
        let f = gaussian(params(Sign::Focusing), 1.0, 0.3);
        assert!(linear_evolve(&f, 0.0).distance(&f).unwrap() < 1e-14);
    }

    #[test]
    fn ground_mode_returns_after_half_period() {
        // e^{−i(2m+1)π} = −1, so |u| of the y-factor has period π.
        let p = params(Sign::Focusing);
        let f = Field::from_fn(p, grid(), |y, _| Complex64::new(hermite_functions(y, 3)[2], 0.0)).unwrap();
        let g = linear_evolve(&f, std::f64::consts::PI);
        assert!(g.distance(&f.scaled(-1.0)).unwrap() < 1e-12);
    }

    #[test]
    fn strang_step_preserves_mass() {
        let f = gaussian(params(Sign::Focusing), 1.2, 0.5);
        let m0 = f.norm_sq();
        let g = step_strang(&f, 1e-2);
        assert!((g.norm_sq() - m0).abs() < 1e-14 * m0);
    }

    #[test]
    fn zero_data_stays_zero() {
        let f = gaussian(params(Sign::Focusing), 0.0, 0.0);
        let tr = evolve(&f, &EvolveOptions::new(1e-2, 0.5, 10)).unwrap();
        assert!(tr.samples.iter().all(|s| s.mass == 0.0 && s.gradx_sq == 0.0));
        assert_eq!(tr.termination, Termination::Completed);
    }

    #[test]
    fn profile_norm_at_zero_is_b1() {
        let f = gaussian(params(Sign::Focusing), 0.8, 0.4);
        let r = evaluate(&f);
        assert!((profile_b1_norm(&f, 0.0) - r.b1_sq).abs() < 1e-12 * r.b1_sq);
        let a1 = vector_field_a(&f, 0.0, VectorField::A1);
        let dy = f.gradient_y();
        assert!(a1.distance(&dy.scaled_complex(Complex64::new(0.0, -1.0))).unwrap() < 1e-14);
    }

    #[test]
    fn rotation_identity() {
        let f = gaussian(params(Sign::Focusing), 1.0, 0.7);
        let r = evaluate(&f);
        for t in [0.1, 0.7, 2.3] {
            let s = vector_field_a(&f, t, VectorField::A1).norm_sq() + vector_field_a(&f, t, VectorField::A2).norm_sq();
            assert!((s - r.grady_sq - r.ymom_sq).abs() < 1e-6, "{s}");
        }
    }

    #[test]
    fn fused_loop_matches_single_steps() {
        let f = gaussian(params(Sign::Focusing), 1.0, 0.2);
        let mut g = f.clone();
        for _ in 0..10 {
            g = step_strang(&g, 1e-2);
        }
        let h = evolve_to(&f, 0.1, 1e-2, true).unwrap();
        assert!(g.distance(&h).unwrap() < 1e-12);
    }

    #[test]
    fn translation_by_fourier_phase() {
        let f = gaussian(params(Sign::Focusing), 1.0, 0.0);
        let g = translate_z(&f, &[1.5]);
        let want = Field::from_fn(*f.params(), f.grid().clone(), |y, z| {
            Complex64::new((-(y * y + (z[0] - 1.5) * (z[0] - 1.5)) / 2.0).exp(), 0.0)
        })
        .unwrap();
        assert!(g.distance(&want).unwrap() < 1e-10);
    }

    #[test]
    fn final_state_of_zero_is_zero() {
        let f = gaussian(params(Sign::Focusing), 0.0, 0.0);
        let sol = solve_final_state(&f, 1.0, 0.0, 1e-2).unwrap();
        assert_eq!(sol.state.norm_sq(), 0.0);
    }
}
