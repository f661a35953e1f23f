//! Semi-invariants `dI/dt = L(x) I`, the symmetric part `H`, norm/versor
//! decomposition and the per-interval exponents `beta_n`, `A_n`, `B_n`.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{StateVector, VectorField};
use crate::error::{Error, Result};

/// A non-singular semi-invariant `I` of a vector field, together with the
/// complementary coordinates `J`.
///
/// The zero set `{ I(x) = 0 }` is the invariant surface.
pub trait SemiInvariant: VectorField {
    /// Dimension `p` of `I`.
    fn semi_dim(&self) -> usize;

    fn eval_i(&self, x: &DVector<f64>) -> DVector<f64>;

    /// The `p x p` matrix with `dI/dt = L(x) I(x)` along the flow.
    fn eval_l(&self, x: &DVector<f64>) -> DMatrix<f64>;

    /// Complementary coordinates; empty when `p = m`.
    fn eval_j(&self, x: &DVector<f64>) -> DVector<f64>;
}

/// Symmetric part `(M + M^t) / 2`, symmetric bit-for-bit.
pub fn symmetric_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))
}

pub fn eval_h<S: SemiInvariant + ?Sized>(spec: &S, x: &DVector<f64>) -> DMatrix<f64> {
    symmetric_part(&spec.eval_l(x))
}

/// Instantaneous `(I, ||I||, i, J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub i: DVector<f64>,
    pub norm: f64,
    /// `None` on the invariant surface.
    pub versor: Option<DVector<f64>>,
    pub j: DVector<f64>,
}

/// Below `VERSOR_FLOOR * p` the versor is undefined. Only an exact-zero guard.
pub const VERSOR_FLOOR: f64 = 1e-300;

pub fn decompose<S: SemiInvariant + ?Sized>(spec: &S, x: &DVector<f64>) -> Decomposition {
    decompose_parts(spec.eval_i(x), spec.eval_j(x))
}

pub(crate) fn decompose_parts(i: DVector<f64>, j: DVector<f64>) -> Decomposition {
    let norm = euclidean_norm(&i);
    let floor = VERSOR_FLOOR * i.len() as f64;
    let versor = (norm >= floor && norm > 0.0).then(|| &i / norm);
    Decomposition { i, norm, versor, j }
}

/// Euclidean norm, rescaled by the largest component when the plain sum of
/// squares would underflow.
pub fn euclidean_norm(v: &DVector<f64>) -> f64 {
    let plain = v.norm();
    if plain > 1e-150 || plain.is_nan() {
        return plain;
    }
    let scale = v.amax();
    if scale == 0.0 {
        0.0
    } else {
        scale * (v / scale).norm()
    }
}

/// `<v, M v>`.
pub fn rayleigh(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    v.dot(&(m * v))
}

/// `<i, H(x) i>`, the instantaneous growth rate of `||I||`.
pub fn quadratic_form<S: SemiInvariant + ?Sized>(spec: &S, x: &DVector<f64>) -> Result<f64> {
    let d = decompose(spec, x);
    let versor = d.versor.ok_or(Error::UndefinedVersor { norm: d.norm })?;
    Ok(rayleigh(&eval_h(spec, x), &versor))
}

/// Composite trapezoid of `<i, H i>` over the sample grid of one segment.
pub fn beta_via_quadrature<S: SemiInvariant + ?Sized>(segment: &[StateVector], spec: &S) -> Result<f64> {
    if segment.len() < 2 {
        return Ok(0.0);
    }
    let rates = segment
        .iter()
        .map(|s| quadratic_form(spec, &s.x))
        .collect::<Result<Vec<_>>>()?;
    Ok(trapezoid(segment.iter().map(|s| s.t).zip(rates)))
}

pub(crate) fn trapezoid(points: impl IntoIterator<Item = (f64, f64)>) -> f64 {
    let mut it = points.into_iter();
    let Some(mut prev) = it.next() else {
        return 0.0;
    };
    let mut acc = 0.0;
    for p in it {
        acc += 0.5 * (p.0 - prev.0) * (p.1 + prev.1);
        prev = p;
    }
    acc
}

/// `ln(norm_end / norm_start)`.
pub fn beta_via_logratio(norm_start: f64, norm_end: f64) -> Result<f64> {
    for n in [norm_start, norm_end] {
        if !(n > 0.0) {
            return Err(Error::NonPositiveNorm(n));
        }
    }
    Ok((norm_end / norm_start).ln())
}

/// Bookkeeping for one impulse.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseRecord {
    pub n: usize,
    pub t_n: f64,
    pub delta_n: f64,
    pub beta_n: f64,
    pub a_n: f64,
    pub b_n: f64,
    /// `||I(t_n^-)||`
    pub norm_before: f64,
    /// `||I(t_n^+)||` measured on the post-impulse state.
    pub norm_after: f64,
    /// Exponent actually handed to the impulse map (equals `a_n` for maps
    /// acting on `I`; the susceptible rescale exponent for vaccination).
    pub control_exponent: f64,
    /// Drift exponent under the alternative partner-time convention, if any.
    pub beta_alt: Option<f64>,
    /// Set when the map's exponent was clamped to a no-op.
    pub clamped: bool,
}

/// Builds the record of Definitions 8-10: `beta_n` from the norm ratio,
/// `B_n = A_n + beta_n`, and the predicted post-impulse norm `norm_minus * exp(A_n)`.
pub fn make_impulse_record(
    n: usize,
    t_prev: f64,
    t_n: f64,
    norm_prev_plus: f64,
    norm_minus: f64,
    a_n: f64,
) -> Result<ImpulseRecord> {
    let beta_n = beta_via_logratio(norm_prev_plus, norm_minus)?;
    Ok(ImpulseRecord {
        n,
        t_n,
        delta_n: t_n - t_prev,
        beta_n,
        a_n,
        b_n: a_n + beta_n,
        norm_before: norm_minus,
        norm_after: norm_minus * a_n.exp(),
        control_exponent: a_n,
        beta_alt: None,
        clamped: false,
    })
}

/// Finite-difference check of `dI/dt = L I` along a trajectory: returns the
/// largest component residual of the central difference at interior samples.
pub fn semi_invariance_residual<S: SemiInvariant + ?Sized>(spec: &S, samples: &[StateVector]) -> f64 {
    samples
        .windows(3)
        .map(|w| {
            let h = w[2].t - w[0].t;
            let didt = (spec.eval_i(&w[2].x) - spec.eval_i(&w[0].x)) / h;
            let li = spec.eval_l(&w[1].x) * spec.eval_i(&w[1].x);
            (didt - li).amax()
        })
        .fold(0.0, f64::max)
}
