use nalgebra::{DMatrix, DVector};

use crate::dynamics::VectorField;
use crate::semi_invariant::SemiInvariant;
use crate::stability::OnSurfaceSystem;

pub const DAYS_PER_YEAR: f64 = 365.0;

/// Rates per year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeirParams {
    pub rho: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl Default for SeirParams {
    fn default() -> Self {
        Self {
            rho: 114.715,
            sigma: 365.0 / 8.5,
            gamma: 365.0 / 7.0,
        }
    }
}

/// SEIR model with a vaccinated class. State layout `(V, S, E, I, R)`;
/// the semi-invariant is `(E, I)` and `J = (S, V, R)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Seir {
    pub params: SeirParams,
}

impl Seir {
    pub const V: usize = 0;
    pub const S: usize = 1;
    pub const E: usize = 2;
    pub const I: usize = 3;
    pub const R: usize = 4;

    pub fn new(params: SeirParams) -> Self {
        Self { params }
    }

    /// `V(0) = 0.3`, `E(0) = 0`, `I(0) = 2e-4`, `R(0) = 0`, and `S(0)` closing `N = 1`.
    pub fn default_x0() -> [f64; 5] {
        let (v, e, i, r) = (0.3, 0.0, 2e-4, 0.0);
        [v, 1.0 - v - e - i - r, e, i, r]
    }

    fn l_at(&self, s_over_n: f64) -> DMatrix<f64> {
        let SeirParams { rho, sigma, gamma } = self.params;
        DMatrix::from_row_slice(2, 2, &[-sigma, rho * s_over_n, sigma, -gamma])
    }
}

impl VectorField for Seir {
    fn dim(&self) -> usize {
        5
    }
    fn name(&self) -> &str {
        "seir"
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let SeirParams { rho, sigma, gamma } = self.params;
        let n = x.sum();
        let infection = rho * x[Self::S] * x[Self::I] / n;
        let incubation = sigma * x[Self::E];
        let recovery = gamma * x[Self::I];
        DVector::from_column_slice(&[
            0.0,
            -infection,
            infection - incubation,
            incubation - recovery,
            recovery,
        ])
    }
}

impl SemiInvariant for Seir {
    fn semi_dim(&self) -> usize {
        2
    }
    fn eval_i(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_column_slice(&[x[Self::E], x[Self::I]])
    }
    fn eval_l(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.l_at(x[Self::S] / x.sum())
    }
    fn eval_j(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_column_slice(&[x[Self::S], x[Self::V], x[Self::R]])
    }
}

impl OnSurfaceSystem for Seir {
    fn semi_dim(&self) -> usize {
        2
    }
    fn surface_dim(&self) -> usize {
        3
    }
    fn eval_l_s(&self, j: &DVector<f64>) -> DMatrix<f64> {
        self.l_at(j[0] / j.sum())
    }
    fn eval_p_s(&self, _j: &DVector<f64>) -> DVector<f64> {
        DVector::zeros(3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_segment, StateVector};
    use crate::semi_invariant::eval_h;
    use proptest::prelude::*;

    #[test]
    fn h_from_l_at_half_susceptible() {
        let seir = Seir::default();
        let x = DVector::from_column_slice(&[0.2, 0.5, 0.1, 0.1, 0.1]);
        let h = eval_h(&seir, &x);
        let p = seir.params;
        assert_eq!(h[(0, 0)], -p.sigma);
        assert_eq!(h[(1, 1)], -p.gamma);
        let off = (p.sigma + p.rho * 0.5) / 2.0;
        assert!((h[(0, 1)] - off).abs() < 1e-13);
        assert_eq!(h[(0, 1)], h[(1, 0)]);
    }

    proptest! {
        #[test]
        fn l_reproduces_exposed_infected_dynamics(x in prop::array::uniform5(0.0f64..1.0)) {
            prop_assume!(x.iter().sum::<f64>() > 0.1);
            let seir = Seir::default();
            let x = DVector::from_column_slice(&x);
            let f = seir.eval(&x);
            let li = seir.eval_l(&x) * seir.eval_i(&x);
            prop_assert!((li[0] - f[Seir::E]).abs() <= 1e-12 * (1.0 + f[Seir::E].abs()));
            prop_assert!((li[1] - f[Seir::I]).abs() <= 1e-12 * (1.0 + f[Seir::I].abs()));
        }
    }

    #[test]
    fn population_is_conserved() {
        let seir = Seir::default();
        let s = StateVector::from_slice(0.0, &Seir::default_x0());
        let samples = integrate_segment(&seir, &s, 3.0, 1e-4, 100).unwrap();
        for st in &samples {
            assert!((st.x.sum() - 1.0).abs() <= 1e-12);
            assert!(st.x.iter().all(|v| *v >= -1e-12));
        }
    }

    #[test]
    fn disease_free_start_stays_disease_free() {
        let seir = Seir::default();
        let s = StateVector::from_slice(0.0, &[0.3, 0.6, 0.0, 0.0, 0.1]);
        let samples = integrate_segment(&seir, &s, 3.0, 1e-3, 10).unwrap();
        assert!(samples.iter().all(|st| st.x[Seir::E] == 0.0 && st.x[Seir::I] == 0.0));
    }

    #[test]
    fn on_surface_flow_is_static() {
        let seir = Seir::default();
        let j = DVector::from_column_slice(&[0.6, 0.3, 0.1]);
        assert_eq!(seir.eval_p_s(&j), DVector::zeros(3));
        let x = DVector::from_column_slice(&[0.3, 0.6, 0.0, 0.0, 0.1]);
        assert_eq!(seir.eval_l_s(&j), seir.eval_l(&x));
    }
}
