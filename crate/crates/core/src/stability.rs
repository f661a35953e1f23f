//! Stability exponent `D_S` of an invariant surface: the time average of
//! `<i, H_S(J) i>` along the on-surface flow of `(J, i)`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{rk4_step, step_count, StateVector, VectorField};
use crate::error::{Error, Result};
use crate::linalg;
use crate::semi_invariant::{eval_h, rayleigh, symmetric_part, SemiInvariant};

/// Dynamics restricted to the invariant surface (`I = 0`).
pub trait OnSurfaceSystem: Send + Sync {
    /// `p`
    fn semi_dim(&self) -> usize;

    /// `m - p`
    fn surface_dim(&self) -> usize;

    fn eval_l_s(&self, j: &DVector<f64>) -> DMatrix<f64>;

    fn eval_h_s(&self, j: &DVector<f64>) -> DMatrix<f64> {
        symmetric_part(&self.eval_l_s(j))
    }

    fn eval_p_s(&self, j: &DVector<f64>) -> DVector<f64>;

    /// `Some(L_S)` when `L_S` does not depend on `J`.
    fn constant_l_s(&self) -> Option<DMatrix<f64>> {
        None
    }
}

/// A constant `L_S` with no surface coordinates.
#[derive(Debug, Clone)]
pub struct ConstantSystem(pub DMatrix<f64>);

impl OnSurfaceSystem for ConstantSystem {
    fn semi_dim(&self) -> usize {
        self.0.nrows()
    }
    fn surface_dim(&self) -> usize {
        0
    }
    fn eval_l_s(&self, _j: &DVector<f64>) -> DMatrix<f64> {
        self.0.clone()
    }
    fn eval_p_s(&self, _j: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }
    fn constant_l_s(&self) -> Option<DMatrix<f64>> {
        Some(self.0.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityEstimate {
    pub ds: f64,
    pub horizon: f64,
    pub burn_in: f64,
    pub i0: DVector<f64>,
    pub j0: DVector<f64>,
    /// `(t, omega(t))`, the running average since `burn_in`, every time unit
    /// and at the horizon.
    pub convergence: Vec<(f64, f64)>,
}

/// Coupled `(J, i)` flow of the on-surface versor equation.
struct VersorFlow<'a, S: ?Sized> {
    sys: &'a S,
}

impl<S: OnSurfaceSystem + ?Sized> VersorFlow<'_, S> {
    fn split(&self, z: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let q = self.sys.surface_dim();
        let p = self.sys.semi_dim();
        (z.rows(0, q).into_owned(), z.rows(q, p).into_owned())
    }

    fn rate(&self, z: &DVector<f64>) -> f64 {
        let (j, i) = self.split(z);
        rayleigh(&self.sys.eval_h_s(&j), &i)
    }
}

impl<S: OnSurfaceSystem + ?Sized> VectorField for VersorFlow<'_, S> {
    fn dim(&self) -> usize {
        self.sys.surface_dim() + self.sys.semi_dim()
    }
    fn name(&self) -> &str {
        "versor-flow"
    }
    fn eval(&self, z: &DVector<f64>) -> DVector<f64> {
        let (j, i) = self.split(z);
        let l = self.sys.eval_l_s(&j);
        let h = symmetric_part(&l);
        let di = &l * &i - &i * rayleigh(&h, &i);
        let dj = self.sys.eval_p_s(&j);
        let mut out = DVector::zeros(z.len());
        out.rows_mut(0, dj.len()).copy_from(&dj);
        out.rows_mut(dj.len(), di.len()).copy_from(&di);
        out
    }
}

fn renormalize(z: &mut DVector<f64>, q: usize, p: usize) {
    let mut i = z.rows_mut(q, p);
    let n = i.norm();
    i /= n;
}

/// Time-averages `<i, H_S(J) i>` over `[burn_in, horizon]` along the RK4
/// solution of `dJ/dt = P_S(J)`, `di/dt = L_S i - i <i, H_S i>`, with `i`
/// renormalized after every step.
pub fn estimate_ds<S: OnSurfaceSystem + ?Sized>(
    sys: &S,
    j0: &DVector<f64>,
    i0: &DVector<f64>,
    horizon: f64,
    burn_in: f64,
    dt: f64,
) -> Result<StabilityEstimate> {
    let (p, q) = (sys.semi_dim(), sys.surface_dim());
    if i0.len() != p || j0.len() != q {
        return Err(Error::InvalidArgument(format!(
            "expected i0 of length {p} and J0 of length {q}, got {} and {}",
            i0.len(),
            j0.len()
        )));
    }
    if ((i0.norm() - 1.0).abs()) > 1e-12 {
        return Err(Error::InvalidArgument(format!("i0 must be a unit vector, |i0| = {}", i0.norm())));
    }
    if !(burn_in >= 0.0 && horizon > burn_in) {
        return Err(Error::InvalidArgument(format!(
            "need horizon > burn_in >= 0, got horizon {horizon}, burn_in {burn_in}"
        )));
    }
    let flow = VersorFlow { sys };
    let mut z = DVector::zeros(p + q);
    z.rows_mut(0, q).copy_from(j0);
    z.rows_mut(q, p).copy_from(i0);
    let mut state = StateVector::new(0.0, z);

    if burn_in > 0.0 {
        state = march(&flow, state, burn_in, dt, |_, _| {})?;
    }
    let mut integral = 0.0;
    let mut rate_prev = flow.rate(&state.x);
    let mut next_report = burn_in + 1.0;
    let mut convergence = Vec::new();
    let final_state = march(&flow, state, horizon, dt, |prev_t, next| {
        let rate = flow.rate(&next.x);
        integral += 0.5 * (next.t - prev_t) * (rate_prev + rate);
        rate_prev = rate;
        if next.t >= next_report && next.t < horizon {
            convergence.push((next.t, integral / (next.t - burn_in)));
            next_report += 1.0;
        }
    })?;
    let ds = integral / (horizon - burn_in);
    convergence.push((final_state.t, ds));
    Ok(StabilityEstimate {
        ds,
        horizon,
        burn_in,
        i0: i0.clone(),
        j0: j0.clone(),
        convergence,
    })
}

fn march<S: OnSurfaceSystem + ?Sized>(
    flow: &VersorFlow<'_, S>,
    start: StateVector,
    t_end: f64,
    dt: f64,
    mut observe: impl FnMut(f64, &StateVector),
) -> Result<StateVector> {
    let (p, q) = (flow.sys.semi_dim(), flow.sys.surface_dim());
    let t_start = start.t;
    let steps = step_count(t_end - t_start, dt);
    let mut state = start;
    for k in 0..steps {
        let t_next = if k + 1 == steps {
            t_end
        } else {
            t_start + (k + 1) as f64 * dt
        };
        let prev_t = state.t;
        let mut next = rk4_step(flow, &state, t_next - prev_t)?;
        next.t = t_next;
        renormalize(&mut next.x, q, p);
        observe(prev_t, &next);
        state = next;
    }
    Ok(state)
}

/// Pseudorandom unit vector of length `p` from a seeded generator.
pub fn random_unit_vector(p: usize, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let v = DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DsSettings {
    pub horizon: f64,
    /// `None` selects 10% of the horizon.
    pub burn_in: Option<f64>,
    pub dt: f64,
    pub seed: u64,
}

impl Default for DsSettings {
    fn default() -> Self {
        Self {
            horizon: 200.0,
            burn_in: None,
            dt: crate::dynamics::DEFAULT_DT,
            seed: 0,
        }
    }
}

impl DsSettings {
    pub fn burn_in(&self) -> f64 {
        self.burn_in.unwrap_or(0.1 * self.horizon)
    }
}

/// `estimate_ds` with a seeded `i0`.
pub fn estimate_ds_seeded<S: OnSurfaceSystem + ?Sized>(
    sys: &S,
    j0: &DVector<f64>,
    settings: &DsSettings,
) -> Result<StabilityEstimate> {
    let i0 = random_unit_vector(sys.semi_dim(), settings.seed);
    estimate_ds(sys, j0, &i0, settings.horizon, settings.burn_in(), settings.dt)
}

/// Largest real part of the spectrum of a constant `L_S`.
///
/// Closed form for `p <= 3`; larger matrices fall back to the time average
/// of the constant system.
pub fn ds_constant_matrix(l_s: &DMatrix<f64>) -> f64 {
    if let Some(v) = linalg::max_real_eigenvalue_small(l_s) {
        return v;
    }
    let sys = ConstantSystem(l_s.clone());
    estimate_ds_seeded(&sys, &DVector::zeros(0), &DsSettings::default())
        .map(|e| e.ds)
        .unwrap_or(f64::NAN)
}

/// Largest eigenvalue of `H(x)`.
pub fn lambda_h_max<S: SemiInvariant + ?Sized>(spec: &S, x: &DVector<f64>) -> f64 {
    linalg::symmetric_max_eigenvalue(&eval_h(spec, x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub ds: std::result::Result<f64, String>,
}

/// One stability estimate per grid point, in grid order. Points run in
/// parallel; a failing point is reported and the sweep continues.
pub fn sweep_ds<F, S>(family: F, grid: &[f64], settings: &DsSettings) -> Result<Vec<SweepPoint>>
where
    F: Fn(f64) -> (S, DVector<f64>) + Sync,
    S: OnSurfaceSystem,
{
    if grid.is_empty() {
        return Err(Error::InvalidArgument("sweep grid is empty".into()));
    }
    Ok(grid
        .par_iter()
        .map(|&param| {
            let (sys, j0) = family(param);
            let ds = estimate_ds_seeded(&sys, &j0, settings)
                .map(|e| e.ds)
                .map_err(|e| e.to_string());
            SweepPoint { param, ds }
        })
        .collect())
}

/// Bisects a sign change of `f` on `[lo, hi]` until the bracket is narrower
/// than `width`; returns the midpoint of the final bracket.
pub fn bisect_sign_change<F>(f: F, mut lo: f64, mut hi: f64, width: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]: f = {f_lo}, {f_hi}"
        )));
    }
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
