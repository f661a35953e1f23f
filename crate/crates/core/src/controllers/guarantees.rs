use std::fmt;

use super::runner::{pathwise_bound, Control, PathwiseBound, TrajectoryRecord};
use super::schedule::ScheduleKind;

/// Relative tolerance when confirming `B_n = -alpha Delta_n` from stored records.
pub const LINEAR_B_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Guaranteed,
    NotGuaranteed,
    Inconclusive,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Guaranteed => "guaranteed",
            Self::NotGuaranteed => "not guaranteed by this criterion",
            Self::Inconclusive => "inconclusive",
            Self::NotApplicable => "not applicable",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Bounded gaps with `B_q <= -eps < 0` for every impulse.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop4Report {
    pub applies: bool,
    /// Uniform bound on the impulse gaps.
    pub delta_bound: Option<f64>,
    /// Largest recorded `B_q`; `-eps` when negative.
    pub max_b: f64,
    pub verdict: Verdict,
}

/// `sum_{q<=n} B_q + M Delta_{n+1} -> -inf`, with `M` the run's `max lambda_H`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop5Report {
    pub applies: bool,
    pub m: f64,
    /// Final value of the predicate sequence.
    pub predicate: f64,
    /// Least-squares slope of the predicate sequence against `n` over its second half.
    pub trend: f64,
    pub verdict: Verdict,
}

/// `B_n = -alpha Delta_n` with `Delta_{n+1} <= kappa (t_n - t0) / M + C`, `0 < kappa < alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Prop6Report {
    pub applies: bool,
    pub kappa: Option<f64>,
    pub alpha: f64,
    /// Growth bound `M >= D_S` used for the schedule test.
    pub m: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuaranteeReport {
    pub prop4: Prop4Report,
    pub prop5: Prop5Report,
    pub prop6: Prop6Report,
    pub pathwise: PathwiseBound,
    pub notes: Vec<String>,
}

impl GuaranteeReport {
    /// Flat `key = value` lines, in a fixed order.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.16e}"));
        let mut kv = vec![
            ("prop4.applies", self.prop4.applies.to_string()),
            ("prop4.delta_bound", opt(self.prop4.delta_bound)),
            ("prop4.max_b", format!("{:.16e}", self.prop4.max_b)),
            ("prop4.verdict", self.prop4.verdict.to_string()),
            ("prop5.applies", self.prop5.applies.to_string()),
            ("prop5.m", format!("{:.16e}", self.prop5.m)),
            ("prop5.predicate", format!("{:.16e}", self.prop5.predicate)),
            ("prop5.trend", format!("{:.16e}", self.prop5.trend)),
            ("prop5.verdict", self.prop5.verdict.to_string()),
            ("prop6.applies", self.prop6.applies.to_string()),
            ("prop6.kappa", opt(self.prop6.kappa)),
            ("prop6.alpha", format!("{:.16e}", self.prop6.alpha)),
            ("prop6.m", opt(self.prop6.m)),
            ("prop6.verdict", self.prop6.verdict.to_string()),
            ("pathwise.m", format!("{:.16e}", self.pathwise.m)),
            ("pathwise.samples", self.pathwise.samples_checked.to_string()),
            ("pathwise.violations", self.pathwise.violations.to_string()),
            ("pathwise.worst_log_margin", format!("{:.16e}", self.pathwise.worst_log_margin)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect::<Vec<_>>();
        for (i, note) in self.notes.iter().enumerate() {
            kv.push((format!("note.{}", i + 1), note.clone()));
        }
        kv
    }
}

fn linear_b_holds(run: &TrajectoryRecord, alpha: f64) -> bool {
    run.impulses.iter().all(|r| {
        let want = -alpha * r.delta_n;
        (r.b_n - want).abs() <= LINEAR_B_TOL * want.abs().max(f64::MIN_POSITIVE)
            || (r.norm_before == 0.0 && r.b_n == 0.0)
    })
}

fn slope_vs_index(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let xs: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = values.iter().sum::<f64>() / n as f64;
    let cov: f64 = xs.iter().zip(values).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// Evaluates the convergence criteria against a finished run.
///
/// `ds` is the stability exponent of the target surface; it serves as the
/// growth bound `M` in the geometric-schedule criterion. The pathwise bound
/// and the divergent-sum predicate use `M = max lambda_H` over the run.
pub fn check_guarantees(control: Option<&Control>, run: &TrajectoryRecord, ds: Option<f64>) -> GuaranteeReport {
    let m_run = run.max_lambda_h;
    let pathwise = pathwise_bound(run, m_run);
    let mut notes = vec![
        "the sum condition is only checked in its sufficient direction".to_string(),
        "divergent sums are certified from the structural form of B_n plus the finite-run trend".to_string(),
    ];

    let Some(control) = control else {
        notes.push("no impulses: only the pathwise bound is evaluated".into());
        let na = Verdict::NotApplicable;
        return GuaranteeReport {
            prop4: Prop4Report { applies: false, delta_bound: None, max_b: f64::NAN, verdict: na },
            prop5: Prop5Report { applies: false, m: m_run, predicate: f64::NAN, trend: f64::NAN, verdict: na },
            prop6: Prop6Report { applies: false, kappa: None, alpha: f64::NAN, m: ds, verdict: na },
            pathwise,
            notes,
        };
    };

    let alpha = control.map.alpha();
    let schedule = &control.schedule;
    let linear_b = control.map.enforces_linear_b() && linear_b_holds(run, alpha);
    let max_b = run.impulses.iter().map(|r| r.b_n).fold(f64::NEG_INFINITY, f64::max);

    // Prop 4
    let delta_bound = schedule.max_gap();
    let prop4 = {
        let applies = delta_bound.is_some();
        let verdict = if !applies {
            Verdict::NotApplicable
        } else if run.impulses.is_empty() {
            Verdict::Inconclusive
        } else if max_b < 0.0 && (linear_b || !control.map.acts_on_semi_invariant()) {
            Verdict::Guaranteed
        } else if max_b < 0.0 {
            Verdict::Inconclusive
        } else {
            Verdict::NotGuaranteed
        };
        Prop4Report { applies, delta_bound, max_b, verdict }
    };

    // Prop 5: predicate sum_{q<=n} B_q + M Delta_{n+1}
    let prop5 = {
        let times: Vec<f64> = schedule.times().take(run.impulses.len() + 1).collect();
        let mut partial = 0.0;
        let mut seq = Vec::with_capacity(run.impulses.len());
        for (k, r) in run.impulses.iter().enumerate() {
            partial += r.b_n;
            seq.push(partial + m_run * (times[k + 1] - times[k]));
        }
        let trend = slope_vs_index(&seq[seq.len() / 2..]);
        let predicate = seq.last().copied().unwrap_or(f64::NAN);
        let structural = linear_b
            && match schedule.kind {
                ScheduleKind::FixedInterval { .. } => max_b < 0.0,
                ScheduleKind::GeometricGrowth { rate } => rate * m_run < alpha,
            };
        let verdict = if seq.len() < 2 {
            Verdict::Inconclusive
        } else if structural {
            Verdict::Guaranteed
        } else if trend < 0.0 {
            Verdict::Inconclusive
        } else {
            Verdict::NotGuaranteed
        };
        Prop5Report { applies: true, m: m_run, predicate, trend, verdict }
    };

    // Prop 6
    let prop6 = match schedule.kind {
        ScheduleKind::GeometricGrowth { rate } if control.map.acts_on_semi_invariant() => {
            let (kappa, verdict) = match ds {
                Some(m) if m > 0.0 => {
                    let kappa = rate * m;
                    let verdict = if !linear_b {
                        Verdict::Inconclusive
                    } else if kappa > 0.0 && kappa < alpha {
                        Verdict::Guaranteed
                    } else {
                        Verdict::NotGuaranteed
                    };
                    (Some(kappa), verdict)
                }
                Some(_) => {
                    notes.push("D_S <= 0: the surface is already attracting".into());
                    (None, Verdict::Inconclusive)
                }
                None => {
                    notes.push("no D_S supplied for the geometric-schedule criterion".into());
                    (None, Verdict::Inconclusive)
                }
            };
            Prop6Report { applies: true, kappa, alpha, m: ds, verdict }
        }
        ScheduleKind::GeometricGrowth { .. } => {
            notes.push("parallel impulses leave I unchanged: B_n carries no imposed -alpha Delta_n form".into());
            Prop6Report { applies: false, kappa: None, alpha, m: ds, verdict: Verdict::NotApplicable }
        }
        ScheduleKind::FixedInterval { .. } => {
            Prop6Report { applies: false, kappa: None, alpha, m: ds, verdict: Verdict::NotApplicable }
        }
    };

    if !linear_b && control.map.acts_on_semi_invariant() {
        notes.push("stored B_n deviate from -alpha Delta_n".into());
    }

    GuaranteeReport { prop4, prop5, prop6, pathwise, notes }
}
