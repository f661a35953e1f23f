use nalgebra::{DMatrix, DVector};

use super::lorenz::LorenzParams;
use crate::dynamics::VectorField;
use crate::semi_invariant::SemiInvariant;
use crate::stability::OnSurfaceSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledLorenzParams {
    pub lorenz: LorenzParams,
    pub c: f64,
}

impl Default for CoupledLorenzParams {
    fn default() -> Self {
        Self {
            lorenz: LorenzParams::default(),
            c: 5.0,
        }
    }
}

/// A free Lorenz system `x` driving a copy `y` through `c (x1 - y1)`.
///
/// State layout is `(x1, x2, x3, y1, y2, y3)`; `I = x - y`, `J = y`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CoupledLorenz {
    pub params: CoupledLorenzParams,
}

impl CoupledLorenz {
    pub const DEFAULT_X0: [f64; 6] = [3.0, 3.0, 3.0, 10.0, 10.0, 10.0];

    pub fn new(params: CoupledLorenzParams) -> Self {
        Self { params }
    }

    pub fn with_coupling(c: f64) -> Self {
        Self::new(CoupledLorenzParams {
            c,
            ..Default::default()
        })
    }

    /// `L(I, J)`. The quadratic terms are split at the midpoint `J + I/2` so
    /// that `L(I, J) I` reproduces `d(x - y)/dt` exactly.
    pub fn l_matrix(&self, i: &[f64], j: &[f64]) -> DMatrix<f64> {
        let LorenzParams { sigma, r, b } = self.params.lorenz;
        let c = self.params.c;
        let mid = |k: usize| j[k] + 0.5 * i[k];
        DMatrix::from_row_slice(
            3,
            3,
            &[-sigma - c, sigma, 0.0, r - mid(2), -1.0, -mid(0), mid(1), mid(0), -b],
        )
    }
}

impl VectorField for CoupledLorenz {
    fn dim(&self) -> usize {
        6
    }
    fn name(&self) -> &str {
        "coupled-lorenz"
    }
    fn eval(&self, s: &DVector<f64>) -> DVector<f64> {
        let lz = &self.params.lorenz;
        let fx = lz.field(&s.as_slice()[0..3]);
        let mut fy = lz.field(&s.as_slice()[3..6]);
        fy[0] += self.params.c * (s[0] - s[3]);
        DVector::from_column_slice(&[fx[0], fx[1], fx[2], fy[0], fy[1], fy[2]])
    }
}

impl SemiInvariant for CoupledLorenz {
    fn semi_dim(&self) -> usize {
        3
    }
    fn eval_i(&self, s: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(3, |k, _| s[k] - s[k + 3])
    }
    fn eval_l(&self, s: &DVector<f64>) -> DMatrix<f64> {
        let i = self.eval_i(s);
        self.l_matrix(i.as_slice(), &s.as_slice()[3..6])
    }
    fn eval_j(&self, s: &DVector<f64>) -> DVector<f64> {
        s.rows(3, 3).into_owned()
    }
}

impl OnSurfaceSystem for CoupledLorenz {
    fn semi_dim(&self) -> usize {
        3
    }
    fn surface_dim(&self) -> usize {
        3
    }
    fn eval_l_s(&self, j: &DVector<f64>) -> DMatrix<f64> {
        self.l_matrix(&[0.0; 3], j.as_slice())
    }
    fn eval_p_s(&self, j: &DVector<f64>) -> DVector<f64> {
        DVector::from_column_slice(&self.params.lorenz.field(j.as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_segment, StateVector};
    use crate::semi_invariant::semi_invariance_residual;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn l_reproduces_difference_dynamics(s in prop::array::uniform6(-40.0f64..40.0), c in 0.0f64..10.0) {
            let sys = CoupledLorenz::with_coupling(c);
            let s = DVector::from_column_slice(&s);
            let f = sys.eval(&s);
            let didt = DVector::from_fn(3, |k, _| f[k] - f[k + 3]);
            let li = sys.eval_l(&s) * sys.eval_i(&s);
            prop_assert!((didt - li).amax() <= 1e-10);
        }

        #[test]
        fn l_s_is_l_with_zero_i(j in prop::array::uniform3(-40.0f64..40.0)) {
            let sys = CoupledLorenz::default();
            let s = DVector::from_column_slice(&[j[0], j[1], j[2], j[0], j[1], j[2]]);
            let jv = DVector::from_column_slice(&j);
            prop_assert_eq!(sys.eval_l(&s), sys.eval_l_s(&jv));
            let f = sys.eval(&s);
            prop_assert_eq!(f.rows(3, 3).into_owned(), sys.eval_p_s(&jv));
        }
    }

    #[test]
    fn synchronized_start_stays_synchronized() {
        let sys = CoupledLorenz::default();
        let s = StateVector::from_slice(0.0, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let samples = integrate_segment(&sys, &s, 10.0, 1e-3, 50).unwrap();
        for st in &samples {
            assert_eq!(sys.eval_i(&st.x).norm(), 0.0);
        }
    }

    #[test]
    fn residual_is_second_order() {
        let sys = CoupledLorenz::default();
        let s = StateVector::from_slice(0.0, &CoupledLorenz::DEFAULT_X0);
        let r1 = semi_invariance_residual(&sys, &integrate_segment(&sys, &s, 2.0, 2e-3, 1).unwrap());
        let r2 = semi_invariance_residual(&sys, &integrate_segment(&sys, &s, 2.0, 1e-3, 1).unwrap());
        assert!(r2 < r1 / 3.5, "{r1} {r2}");
    }
}
