use nalgebra::{dvector, DMatrix, DVector};

use crate::dynamics::VectorField;
use crate::semi_invariant::SemiInvariant;
use crate::stability::OnSurfaceSystem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorenzParams {
    pub sigma: f64,
    pub r: f64,
    pub b: f64,
}

impl Default for LorenzParams {
    fn default() -> Self {
        Self {
            sigma: 10.0,
            r: 28.0,
            b: 8.0 / 3.0,
        }
    }
}

impl LorenzParams {
    pub fn field(&self, x: &[f64]) -> [f64; 3] {
        [
            self.sigma * (x[1] - x[0]),
            self.r * x[0] - x[1] - x[0] * x[2],
            -self.b * x[2] + x[0] * x[1],
        ]
    }

    /// The origin is unstable iff `r > 1`.
    pub fn origin_unstable(&self) -> bool {
        self.r > 1.0
    }
}

/// Lorenz system with `I = x`, whose invariant surface is the fixed point at
/// the origin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Lorenz {
    pub params: LorenzParams,
}

impl Lorenz {
    pub const DEFAULT_X0: [f64; 3] = [1.0, 1.0, 1.0];

    pub fn new(params: LorenzParams) -> Self {
        Self { params }
    }

    fn l_at(&self, x1: f64) -> DMatrix<f64> {
        let LorenzParams { sigma, r, b } = self.params;
        DMatrix::from_row_slice(3, 3, &[-sigma, sigma, 0.0, r, -1.0, -x1, 0.0, x1, -b])
    }
}

impl VectorField for Lorenz {
    fn dim(&self) -> usize {
        3
    }
    fn name(&self) -> &str {
        "lorenz"
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let f = self.params.field(x.as_slice());
        dvector![f[0], f[1], f[2]]
    }
}

impl SemiInvariant for Lorenz {
    fn semi_dim(&self) -> usize {
        3
    }
    fn eval_i(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }
    fn eval_l(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.l_at(x[0])
    }
    fn eval_j(&self, _x: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }
}

impl OnSurfaceSystem for Lorenz {
    fn semi_dim(&self) -> usize {
        3
    }
    fn surface_dim(&self) -> usize {
        0
    }
    fn eval_l_s(&self, _j: &DVector<f64>) -> DMatrix<f64> {
        self.l_at(0.0)
    }
    fn eval_p_s(&self, _j: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(0)
    }
    fn constant_l_s(&self) -> Option<DMatrix<f64>> {
        Some(self.l_at(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_segment, StateVector};
    use crate::semi_invariant::semi_invariance_residual;
    use crate::stability::ds_constant_matrix;
    use proptest::prelude::*;

    #[test]
    fn l_at_origin_is_printed_l_s() {
        let lz = Lorenz::default();
        let expected = DMatrix::from_row_slice(3, 3, &[-10.0, 10.0, 0.0, 28.0, -1.0, 0.0, 0.0, 0.0, -8.0 / 3.0]);
        assert_eq!(lz.eval_l(&DVector::zeros(3)), expected);
        assert_eq!(lz.constant_l_s(), Some(expected));
    }

    #[test]
    fn origin_exponent() {
        let ds = ds_constant_matrix(&Lorenz::default().constant_l_s().unwrap());
        assert!((ds - (-11.0 + 1201.0_f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!(Lorenz::default().params.origin_unstable());
    }

    proptest! {
        #[test]
        fn l_times_x_is_the_field(x in prop::array::uniform3(-50.0f64..50.0)) {
            let lz = Lorenz::default();
            let x = DVector::from_column_slice(&x);
            let diff = lz.eval_l(&x) * &x - lz.eval(&x);
            prop_assert!(diff.amax() <= 1e-12 * (1.0 + x.amax().powi(2)));
        }
    }

    #[test]
    fn residual_is_second_order() {
        let lz = Lorenz::default();
        let s = StateVector::from_slice(0.0, &[1.0, 1.0, 1.0]);
        let r1 = semi_invariance_residual(&lz, &integrate_segment(&lz, &s, 2.0, 2e-3, 1).unwrap());
        let r2 = semi_invariance_residual(&lz, &integrate_segment(&lz, &s, 2.0, 1e-3, 1).unwrap());
        assert!(r2 < r1 / 3.5, "{r1} {r2}");
    }

    #[test]
    fn origin_stays_on_surface() {
        let lz = Lorenz::default();
        let s = StateVector::from_slice(0.0, &[0.0, 0.0, 0.0]);
        let samples = integrate_segment(&lz, &s, 10.0, 1e-3, 100).unwrap();
        assert!(samples.iter().all(|s| s.x.norm() <= 1e-12));
    }

    #[test]
    fn attractor_bounded_for_100_time_units() {
        let lz = Lorenz::default();
        let s = StateVector::from_slice(0.0, &Lorenz::DEFAULT_X0);
        let mut max = 0.0_f64;
        crate::dynamics::integrate_with(&lz, &s, 100.0, 1e-3, |_, _, n| {
            max = max.max(n.x.amax());
            true
        })
        .unwrap();
        assert!(max <= 100.0);
    }
}
