use std::ops::Range;

use nalgebra::DVector;

use crate::error::Result;
use crate::semi_invariant::{euclidean_norm, ImpulseRecord, SemiInvariant};

/// When a vaccination pulse is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GuardPolicy {
    /// Apply at every impulse time, clamping the exponent to be non-positive.
    #[default]
    Unconditional,
    /// Apply only if `||I(t_n^-)|| > ||I(t_{n-1}^+)||`.
    OnlyWhenGrowing,
}

/// Which partner value enters the previous separation of a sync rescale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PartnerConvention {
    /// `||x(t_{n-1}^+) - y(t_{n-1})||`, i.e. the stored `||I(t_{n-1}^+)||`.
    #[default]
    Consistent,
    /// `||x(t_{n-1}^+) - y(t_n)||`, partner taken at the current impulse time.
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImpulseMap {
    /// `x -> exp(A_n) x` with `A_n = -ln(||I(t_n^-)|| / ||I(t_{n-1}^+)||) - alpha Delta_n`.
    /// Intended for semi-invariants with `I(x) = x`.
    RadialRescale { alpha: f64 },
    /// `x -> y + exp(A_n) (x - y)` on the `target` coordinates, `y` read
    /// from `partner`.
    SyncRescale {
        alpha: f64,
        target: Range<usize>,
        partner: Range<usize>,
        convention: PartnerConvention,
    },
    /// `S -> exp(B_n) S`, `V -> V + (1 - exp(B_n)) S`; leaves `I` untouched.
    ParallelVaccination {
        alpha: f64,
        guard: GuardPolicy,
        susceptible: usize,
        vaccinated: usize,
    },
}

/// State carried from the previous impulse.
#[derive(Debug, Clone)]
pub struct ImpulseContext<'a> {
    pub n: usize,
    pub t_prev: f64,
    pub t_n: f64,
    /// `x(t_{n-1}^+)`
    pub prev_plus_state: &'a DVector<f64>,
    /// `||I(t_{n-1}^+)||`
    pub prev_plus_norm: f64,
}

impl ImpulseMap {
    pub fn alpha(&self) -> f64 {
        match *self {
            Self::RadialRescale { alpha }
            | Self::SyncRescale { alpha, .. }
            | Self::ParallelVaccination { alpha, .. } => alpha,
        }
    }

    /// Whether the map enforces `B_n = -alpha Delta_n`.
    pub fn enforces_linear_b(&self) -> bool {
        matches!(
            self,
            Self::RadialRescale { .. }
                | Self::SyncRescale {
                    convention: PartnerConvention::Consistent,
                    ..
                }
        )
    }

    pub fn acts_on_semi_invariant(&self) -> bool {
        !matches!(self, Self::ParallelVaccination { .. })
    }

    /// Maps `x(t_n^-)` to `x(t_n^+)` and records the exponents.
    pub fn apply<S: SemiInvariant + ?Sized>(
        &self,
        spec: &S,
        ctx: &ImpulseContext<'_>,
        x_minus: &DVector<f64>,
    ) -> Result<(DVector<f64>, ImpulseRecord)> {
        let norm_minus = euclidean_norm(&spec.eval_i(x_minus));
        let delta_n = ctx.t_n - ctx.t_prev;
        let mut record = ImpulseRecord {
            n: ctx.n,
            t_n: ctx.t_n,
            delta_n,
            beta_n: 0.0,
            a_n: 0.0,
            b_n: 0.0,
            norm_before: norm_minus,
            norm_after: norm_minus,
            control_exponent: 0.0,
            beta_alt: None,
            clamped: false,
        };
        if !(norm_minus > 0.0 && ctx.prev_plus_norm > 0.0) {
            // already on the surface: idle
            return Ok((x_minus.clone(), record));
        }
        let beta = (norm_minus / ctx.prev_plus_norm).ln();
        record.beta_n = beta;

        let x_plus = match self {
            Self::RadialRescale { alpha } => {
                let a = -beta - alpha * delta_n;
                record.a_n = a;
                record.control_exponent = a;
                x_minus * a.exp()
            }
            Self::SyncRescale {
                alpha,
                target,
                partner,
                convention,
            } => {
                let y = x_minus.rows(partner.start, partner.len()).into_owned();
                let prev_x = ctx.prev_plus_state.rows(target.start, target.len()).into_owned();
                let printed_norm = (prev_x - &y).norm();
                let printed_beta = (norm_minus / printed_norm).ln();
                record.beta_alt = Some(printed_beta);
                let drift = match convention {
                    PartnerConvention::Consistent => beta,
                    PartnerConvention::AsPrinted => printed_beta,
                };
                let a = -alpha * delta_n - drift;
                record.a_n = a;
                record.control_exponent = a;
                let scale = a.exp();
                let mut x = x_minus.clone();
                for (t, p) in target.clone().zip(partner.clone()) {
                    x[t] = x_minus[p] + scale * (x_minus[t] - x_minus[p]);
                }
                x
            }
            Self::ParallelVaccination {
                alpha,
                guard,
                susceptible,
                vaccinated,
            } => {
                let mut b = -beta - alpha * delta_n;
                let apply = match guard {
                    GuardPolicy::Unconditional => true,
                    GuardPolicy::OnlyWhenGrowing => norm_minus > ctx.prev_plus_norm,
                };
                if !apply {
                    b = 0.0;
                } else if b > 0.0 {
                    b = 0.0;
                    record.clamped = true;
                }
                record.control_exponent = b;
                let mut x = x_minus.clone();
                if b < 0.0 {
                    let s = x_minus[*susceptible];
                    let kept = b.exp();
                    x[*susceptible] = kept * s;
                    x[*vaccinated] = x_minus[*vaccinated] + (1.0 - kept) * s;
                }
                x
            }
        };
        record.b_n = record.a_n + record.beta_n;
        record.norm_after = euclidean_norm(&spec.eval_i(&x_plus));
        Ok((x_plus, record))
    }
}
