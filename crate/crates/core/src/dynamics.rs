//! Autonomous vector fields and fixed-step RK4 integration between impulses.
//!
//! Steps are laid out on the grid `t_start + k * dt` measured from the start
//! of each segment; the last step is shortened so the segment ends exactly
//! on the requested time.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Default integrator step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Any component above this magnitude aborts a run.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// A time-stamped point of phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: f64,
    pub x: DVector<f64>,
}

impl StateVector {
    pub fn new(t: f64, x: DVector<f64>) -> Self {
        Self { t, x }
    }

    pub fn from_slice(t: f64, x: &[f64]) -> Self {
        Self::new(t, DVector::from_column_slice(x))
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.iter().all(|v| v.is_finite())
    }
}

/// An autonomous vector field `dx/dt = F(x)` on `R^m`.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    fn eval(&self, x: &DVector<f64>) -> DVector<f64>;
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (**self).eval(x)
    }
}

/// A vector field backed by a closure.
pub struct FnField<F> {
    name: String,
    dim: usize,
    f: F,
}

impl<F> FnField<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    pub fn new(name: impl Into<String>, dim: usize, f: F) -> Self {
        Self {
            name: name.into(),
            dim,
            f,
        }
    }
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&DVector<f64>) -> DVector<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
}

fn check_state(x: &DVector<f64>) -> std::result::Result<(), String> {
    for (k, v) in x.iter().enumerate() {
        if !v.is_finite() {
            return Err(format!("component {k} is not finite"));
        }
        if v.abs() > BLOWUP_THRESHOLD {
            return Err(format!("component {k} = {v:e} exceeds {BLOWUP_THRESHOLD:e}"));
        }
    }
    Ok(())
}

fn blowup(state: &StateVector, reason: String) -> Error {
    Error::Blowup {
        at: state.t,
        reason,
        last_good: state.clone(),
    }
}

/// Classical four-stage Runge-Kutta update; `t` advances by exactly `dt`.
pub fn rk4_step<F: VectorField + ?Sized>(field: &F, state: &StateVector, dt: f64) -> Result<StateVector> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let x = rk4_update(field, &state.x, dt).map_err(|reason| blowup(state, reason))?;
    Ok(StateVector::new(state.t + dt, x))
}

fn rk4_update<F: VectorField + ?Sized>(
    field: &F,
    x: &DVector<f64>,
    h: f64,
) -> std::result::Result<DVector<f64>, String> {
    let k1 = field.eval(x);
    check_state(&k1).map_err(|r| format!("field evaluation: {r}"))?;
    let k2 = field.eval(&(x + &k1 * (0.5 * h)));
    let k3 = field.eval(&(x + &k2 * (0.5 * h)));
    let k4 = field.eval(&(x + &k3 * h));
    let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    check_state(&next)?;
    Ok(next)
}

/// Number of grid steps needed to cover `span` with steps of `dt`.
///
/// A remainder below `1e-9 * dt` is absorbed into the last full step rather
/// than producing a sliver step.
pub fn step_count(span: f64, dt: f64) -> usize {
    let ratio = span / dt;
    let n = ratio.ceil();
    if n - ratio > 1.0 - 1e-9 {
        (n - 1.0).max(1.0) as usize
    } else {
        (n as usize).max(1)
    }
}

/// March from `state` to exactly `t_end`, calling `observe(step, prev, next)`
/// after every integrator step. Returns the final state.
///
/// Step `k` ends at `t_start + (k + 1) * dt` except the last, which ends at `t_end`.
pub fn integrate_with<F, O>(field: &F, state: &StateVector, t_end: f64, dt: f64, mut observe: O) -> Result<StateVector>
where
    F: VectorField + ?Sized,
    O: FnMut(usize, &StateVector, &StateVector) -> bool,
{
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    if !(t_end > state.t) {
        return Err(Error::InvalidArgument(format!(
            "segment end {t_end} must exceed start {}",
            state.t
        )));
    }
    let t_start = state.t;
    let steps = step_count(t_end - t_start, dt);
    let mut current = state.clone();
    for k in 0..steps {
        let t_next = if k + 1 == steps {
            t_end
        } else {
            t_start + (k + 1) as f64 * dt
        };
        let h = t_next - current.t;
        let x = rk4_update(field, &current.x, h).map_err(|reason| blowup(&current, reason))?;
        let next = StateVector::new(t_next, x);
        let keep_going = observe(k, &current, &next);
        current = next;
        if !keep_going {
            break;
        }
    }
    Ok(current)
}

/// Fixed-step march to `t_end` recording every `sample_every`-th state plus
/// both endpoints.
pub fn integrate_segment<F: VectorField + ?Sized>(
    field: &F,
    state: &StateVector,
    t_end: f64,
    dt: f64,
    sample_every: usize,
) -> Result<Vec<StateVector>> {
    let every = sample_every.max(1);
    let mut samples = vec![state.clone()];
    let last = integrate_with(field, state, t_end, dt, |k, _, next| {
        if (k + 1) % every == 0 {
            samples.push(next.clone());
        }
        true
    })?;
    if samples.last().map(|s| s.t) != Some(last.t) {
        samples.push(last);
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, dvector};

    fn zero_field(dim: usize) -> impl VectorField {
        FnField::new("zero", dim, move |_x: &DVector<f64>| DVector::zeros(dim))
    }

    fn lorenz() -> impl VectorField {
        FnField::new("lorenz", 3, |x: &DVector<f64>| {
            dvector![
                10.0 * (x[1] - x[0]),
                28.0 * x[0] - x[1] - x[0] * x[2],
                -8.0 / 3.0 * x[2] + x[0] * x[1]
            ]
        })
    }

    #[test]
    fn zero_field_leaves_state_and_advances_time() {
        let s = StateVector::from_slice(0.0, &[1.0, 2.0]);
        let next = rk4_step(&zero_field(2), &s, 0.5).unwrap();
        assert_eq!(next.x, s.x);
        assert_eq!(next.t, 0.5);
    }

    #[test]
    fn linear_field_matches_truncated_exponential() {
        let f = FnField::new("exp", 1, |x: &DVector<f64>| x.clone());
        let next = rk4_step(&f, &StateVector::from_slice(0.0, &[1.0]), 0.1).unwrap();
        let h: f64 = 0.1;
        let taylor = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((next.x[0] - taylor).abs() < 1e-15);
        assert!((next.x[0] - 1.105_170_833_333_333).abs() < 1e-14);
    }

    #[test]
    fn linear_matrix_field_matches_matrix_taylor_polynomial() {
        let a = DMatrix::from_row_slice(3, 3, &[-1.0, 2.0, 0.5, 0.3, -0.2, 1.0, 0.0, -1.5, 0.4]);
        let a2 = a.clone();
        let f = FnField::new("linear", 3, move |x: &DVector<f64>| &a2 * x);
        let x0 = dvector![0.7, -1.2, 2.0];
        let h = 0.05;
        let next = rk4_step(&f, &StateVector::new(0.0, x0.clone()), h).unwrap();
        // sum_{k<=4} (A h)^k / k!
        let ah = &a * h;
        let mut term = DMatrix::<f64>::identity(3, 3);
        let mut poly = term.clone();
        for k in 1..=4 {
            term = &term * &ah / k as f64;
            poly += &term;
        }
        let expected = poly * x0;
        assert!((next.x - expected).amax() < 1e-14);
    }

    #[test]
    fn segment_shortens_final_step() {
        let s = StateVector::from_slice(0.0, &[1.0]);
        let samples = integrate_segment(&zero_field(1), &s, 1.0, 0.3, 1).unwrap();
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.len(), 5);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert!((ts[3] - 0.9).abs() < 1e-15);
        let widths: Vec<f64> = ts.windows(2).map(|w| w[1] - w[0]).collect();
        assert!((widths[3] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn sample_count_is_ceil_plus_one() {
        let s = StateVector::from_slice(0.25, &[1.0, 0.0]);
        for (t_end, dt) in [(1.0, 0.3), (2.0, 0.1), (0.26, 0.001), (3.7, 0.25)] {
            let samples = integrate_segment(&zero_field(2), &s, t_end, dt, 1).unwrap();
            let expected = (((t_end - 0.25) / dt) - 1e-9).ceil() as usize + 1;
            assert_eq!(samples.len(), expected, "t_end={t_end} dt={dt}");
        }
    }

    #[test]
    fn decimated_sampling_keeps_endpoints() {
        let s = StateVector::from_slice(0.0, &[1.0]);
        let samples = integrate_segment(&zero_field(1), &s, 1.05, 0.1, 5).unwrap();
        let ts: Vec<f64> = samples.iter().map(|s| s.t).collect();
        assert_eq!(ts.first(), Some(&0.0));
        assert_eq!(ts.last(), Some(&1.05));
        assert_eq!(ts.len(), 4); // 0, 0.5, 1.0, 1.05
    }

    #[test]
    fn lorenz_matches_step_halved_reference() {
        let f = lorenz();
        let s = StateVector::from_slice(0.0, &[1.0, 1.0, 1.0]);
        let coarse = integrate_segment(&f, &s, 1.0, 1e-3, 1000).unwrap();
        let mut reference = s.clone();
        for _ in 0..16_000 {
            reference = rk4_step(&f, &reference, 1.0 / 16_000.0).unwrap();
        }
        let end = coarse.last().unwrap();
        assert_eq!(end.t, 1.0);
        assert!((&end.x - &reference.x).amax() < 1e-6);
    }

    #[test]
    fn lorenz_stays_bounded() {
        let f = lorenz();
        let s = StateVector::from_slice(0.0, &[1.0, 1.0, 1.0]);
        let mut max = 0.0_f64;
        integrate_with(&f, &s, 50.0, 1e-3, |_, _, n| {
            max = max.max(n.x.amax());
            true
        })
        .unwrap();
        assert!(max <= 100.0, "max {max}");
    }

    #[test]
    fn blowup_is_reported_with_last_good_state() {
        let f = FnField::new("square", 1, |x: &DVector<f64>| x.map(|v| v * v));
        let s = StateVector::from_slice(0.0, &[1.0]);
        match integrate_segment(&f, &s, 2.0, 1e-3, 1) {
            Err(Error::Blowup { last_good, .. }) => {
                assert!(last_good.is_finite());
                assert!(last_good.t < 1.01);
            }
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn integration_is_deterministic() {
        let f = lorenz();
        let s = StateVector::from_slice(0.0, &[1.0, 1.0, 1.0]);
        let a = integrate_segment(&f, &s, 5.0, 1e-3, 7).unwrap();
        let b = integrate_segment(&f, &s, 5.0, 1e-3, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = StateVector::from_slice(1.0, &[1.0]);
        assert!(rk4_step(&zero_field(1), &s, 0.0).is_err());
        assert!(integrate_segment(&zero_field(1), &s, 0.5, 0.1, 1).is_err());
    }
}
