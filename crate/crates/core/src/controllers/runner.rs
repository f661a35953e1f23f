use nalgebra::DVector;

use super::maps::{ImpulseContext, ImpulseMap};
use super::schedule::ImpulseSchedule;
use crate::dynamics::{integrate_with, StateVector, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::linalg::symmetric_max_eigenvalue;
use crate::semi_invariant::{decompose, euclidean_norm, eval_h, rayleigh, ImpulseRecord, SemiInvariant};

/// Impulse map together with its schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Control {
    pub schedule: ImpulseSchedule,
    pub map: ImpulseMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub t0: f64,
    pub t_max: f64,
    pub dt: f64,
    /// Stop once `||I|| < convergence_tol`; `0` disables the check.
    pub convergence_tol: f64,
    pub sample_every: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t0: 0.0,
            t_max: 10.0,
            dt: DEFAULT_DT,
            convergence_tol: 1e-10,
            sample_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: DVector<f64>,
    pub norm_i: f64,
    /// Number of impulses applied before this sample.
    pub impulses: usize,
    /// `int_{t0}^{t} <i, H i> dt'` accumulated over every integrator step.
    pub rate_integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Converged { t: f64 },
    HorizonReached,
    Blowup { t: f64, reason: String },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Converged { .. } => "converged",
            Self::HorizonReached => "horizon",
            Self::Blowup { .. } => "blowup",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub t0: f64,
    pub initial_norm: f64,
    pub samples: Vec<Sample>,
    pub impulses: Vec<ImpulseRecord>,
    pub status: RunStatus,
    /// Largest eigenvalue of `H` seen at any integrator step.
    pub max_lambda_h: f64,
}

impl TrajectoryRecord {
    /// `(t_n, n)` after each impulse.
    pub fn cumulative_impulses(&self) -> Vec<(f64, usize)> {
        self.impulses.iter().map(|r| (r.t_n, r.n)).collect()
    }

    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("a record always holds its initial sample")
    }
}

struct Tracker {
    every: usize,
    tol: f64,
    max_lambda: f64,
    integral: f64,
    last_rate: Option<f64>,
    impulses: usize,
    samples: Vec<Sample>,
}

impl Tracker {
    fn norm_and_rate<S: SemiInvariant + ?Sized>(&mut self, spec: &S, x: &DVector<f64>) -> (f64, Option<f64>) {
        let h = eval_h(spec, x);
        self.max_lambda = self.max_lambda.max(symmetric_max_eigenvalue(&h));
        let d = decompose(spec, x);
        (d.norm, d.versor.map(|v| rayleigh(&h, &v)))
    }

    fn push<S: SemiInvariant + ?Sized>(&mut self, spec: &S, state: &StateVector) {
        let norm_i = euclidean_norm(&spec.eval_i(&state.x));
        self.samples.push(Sample {
            t: state.t,
            x: state.x.clone(),
            norm_i,
            impulses: self.impulses,
            rate_integral: self.integral,
        });
    }
}

/// Alternates fixed-step integration up to each `t_n^-` with the impulse
/// map, stopping at `t_max`, on convergence to the surface, or on blowup.
///
/// `observe(prev, next)` sees every integrator step.
pub fn run_impulsive<S, O>(
    system: &S,
    control: Option<&Control>,
    x0: &DVector<f64>,
    opts: &RunOptions,
    mut observe: O,
) -> Result<TrajectoryRecord>
where
    S: SemiInvariant + ?Sized,
    O: FnMut(&StateVector, &StateVector),
{
    if x0.len() != system.dim() {
        return Err(Error::InvalidArgument(format!(
            "initial state has dimension {}, system expects {}",
            x0.len(),
            system.dim()
        )));
    }
    if !(opts.t_max > opts.t0) {
        return Err(Error::InvalidArgument(format!(
            "t_max = {} must exceed t0 = {}",
            opts.t_max, opts.t0
        )));
    }
    if !(opts.dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", opts.dt)));
    }
    if let Some(c) = control {
        if c.schedule.t0 != opts.t0 {
            return Err(Error::InvalidArgument("schedule t0 differs from run t0".into()));
        }
    }

    let mut tracker = Tracker {
        every: opts.sample_every.max(1),
        tol: opts.convergence_tol,
        max_lambda: f64::NEG_INFINITY,
        integral: 0.0,
        last_rate: None,
        impulses: 0,
        samples: Vec::new(),
    };
    let mut state = StateVector::new(opts.t0, x0.clone());
    let (initial_norm, rate0) = tracker.norm_and_rate(system, x0);
    tracker.last_rate = rate0;
    tracker.push(system, &state);

    let mut prev_plus_state = x0.clone();
    let mut prev_plus_norm = initial_norm;
    let mut t_prev = opts.t0;
    let mut records = Vec::new();
    let mut times = control.map(|c| c.schedule.times());

    let finish = |tracker: Tracker, records, status| TrajectoryRecord {
        t0: opts.t0,
        initial_norm,
        samples: tracker.samples,
        impulses: records,
        status,
        max_lambda_h: tracker.max_lambda,
    };

    if tracker.tol > 0.0 && initial_norm < tracker.tol {
        return Ok(finish(tracker, records, RunStatus::Converged { t: opts.t0 }));
    }

    loop {
        let next_impulse = times.as_mut().and_then(|it| it.next()).filter(|t| *t <= opts.t_max);
        let t_end = next_impulse.unwrap_or(opts.t_max);

        if t_end > state.t {
            let mut converged = false;
            let segment = integrate_with(system, &state, t_end, opts.dt, |k, prev, next| {
                observe(prev, next);
                let (norm, rate) = tracker.norm_and_rate(system, &next.x);
                if let (Some(a), Some(b)) = (tracker.last_rate, rate) {
                    tracker.integral += 0.5 * (next.t - prev.t) * (a + b);
                }
                tracker.last_rate = rate;
                converged = tracker.tol > 0.0 && norm < tracker.tol;
                if converged || (k + 1) % tracker.every == 0 || next.t == t_end {
                    tracker.push(system, next);
                }
                !converged
            });
            match segment {
                Ok(end) => state = end,
                Err(Error::Blowup { at, reason, last_good }) => {
                    if tracker.samples.last().map(|s| s.t) != Some(last_good.t) {
                        tracker.push(system, &last_good);
                    }
                    return Ok(finish(tracker, records, RunStatus::Blowup { t: at, reason }));
                }
                Err(e) => return Err(e),
            }
            if converged {
                let t = state.t;
                return Ok(finish(tracker, records, RunStatus::Converged { t }));
            }
        }

        let Some(t_n) = next_impulse else {
            return Ok(finish(tracker, records, RunStatus::HorizonReached));
        };
        let map = &control.expect("impulse times imply a control").map;
        let ctx = ImpulseContext {
            n: records.len() + 1,
            t_prev,
            t_n,
            prev_plus_state: &prev_plus_state,
            prev_plus_norm,
        };
        let (x_plus, record) = map.apply(system, &ctx, &state.x)?;
        state = StateVector::new(t_n, x_plus);
        let (norm_plus, rate) = tracker.norm_and_rate(system, &state.x);
        tracker.last_rate = rate;
        tracker.impulses += 1;
        tracker.push(system, &state);
        records.push(record);
        prev_plus_state = state.x.clone();
        prev_plus_norm = norm_plus;
        t_prev = t_n;

        if tracker.tol > 0.0 && norm_plus < tracker.tol {
            return Ok(finish(tracker, records, RunStatus::Converged { t: t_n }));
        }
        if t_n >= opts.t_max {
            return Ok(finish(tracker, records, RunStatus::HorizonReached));
        }
    }
}

/// Checks `||I(t)|| <= ||I_0|| exp(sum_{q<=n} B_q + M (t - t_n))` at every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct PathwiseBound {
    pub m: f64,
    pub samples_checked: usize,
    pub violations: usize,
    /// Smallest `ln(bound) - ln||I||` over the samples (negative on violation).
    pub worst_log_margin: f64,
}

/// Relative rounding allowance for samples sitting exactly on the bound
/// (post-impulse states, where the two sides agree analytically).
pub const PATHWISE_ROUNDING: f64 = 1e-12;

pub fn pathwise_bound(run: &TrajectoryRecord, m: f64) -> PathwiseBound {
    let ln_i0 = run.initial_norm.ln();
    let mut partial = vec![0.0];
    for r in &run.impulses {
        partial.push(partial.last().unwrap() + r.b_n);
    }
    let mut out = PathwiseBound {
        m,
        samples_checked: 0,
        violations: 0,
        worst_log_margin: f64::INFINITY,
    };
    for s in &run.samples {
        if s.norm_i == 0.0 {
            continue;
        }
        let n = s.impulses;
        let t_n = if n == 0 { run.t0 } else { run.impulses[n - 1].t_n };
        let ln_bound = ln_i0 + partial[n] + m * (s.t - t_n);
        let margin = ln_bound - s.norm_i.ln();
        out.samples_checked += 1;
        out.worst_log_margin = out.worst_log_margin.min(margin);
        if margin < -PATHWISE_ROUNDING {
            out.violations += 1;
        }
    }
    out
}

/// Cumulative `int <i, H i>` along a run and the norm it predicts.
#[derive(Debug, Clone, PartialEq)]
pub struct ParallelCriterion {
    /// `(t, integral, reconstructed ||I||, measured ||I||)` per sample.
    pub series: Vec<(f64, f64, f64, f64)>,
    /// Least-squares slope of the integral against time over the second half of the run.
    pub trend: f64,
    /// Largest relative gap between reconstructed and measured norms.
    pub max_relative_gap: f64,
}

pub fn parallel_criterion(run: &TrajectoryRecord) -> ParallelCriterion {
    let series: Vec<_> = run
        .samples
        .iter()
        .map(|s| {
            let rec = run.initial_norm * s.rate_integral.exp();
            (s.t, s.rate_integral, rec, s.norm_i)
        })
        .collect();
    let max_relative_gap = series
        .iter()
        .filter(|p| p.3 > 0.0)
        .map(|p| ((p.2 - p.3) / p.3).abs())
        .fold(0.0, f64::max);
    let tail = &series[series.len() / 2..];
    ParallelCriterion {
        trend: slope(tail.iter().map(|p| (p.0, p.1))),
        series,
        max_relative_gap,
    }
}

fn slope(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let n = points.clone().count() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let (sx, sy) = points.clone().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (cov, var) = points.fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    if var == 0.0 {
        0.0
    } else {
        cov / var
    }
}

/// Re-integrates the segment following impulse `n` (or the initial segment
/// when `n == 0`) at step `dt` and returns `(quadrature beta, log-ratio beta)`.
pub fn segment_betas<S: SemiInvariant + ?Sized>(
    system: &S,
    run: &TrajectoryRecord,
    n: usize,
    dt: f64,
) -> Result<(f64, f64)> {
    let start = run
        .samples
        .iter()
        .find(|s| s.impulses == n)
        .ok_or_else(|| Error::InvalidArgument(format!("no samples after impulse {n}")))?;
    let end_t = run
        .impulses
        .get(n)
        .map(|r| r.t_n)
        .ok_or_else(|| Error::InvalidArgument(format!("segment {n} is not closed by an impulse")))?;
    let samples = crate::dynamics::integrate_segment(system, &StateVector::new(start.t, start.x.clone()), end_t, dt, 1)?;
    let quad = crate::semi_invariant::beta_via_quadrature(&samples, system)?;
    let norm_end = euclidean_norm(&system.eval_i(&samples.last().unwrap().x));
    let log = crate::semi_invariant::beta_via_logratio(start.norm_i, norm_end)?;
    Ok((quad, log))
}
