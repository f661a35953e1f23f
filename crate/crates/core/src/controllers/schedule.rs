use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    /// `t_{n+1} = t_n + delta`
    FixedInterval { delta: f64 },
    /// `t_{n+1} = t_n + rate * (t_n - t0)`
    GeometricGrowth { rate: f64 },
}

/// Prescheduled impulse times `t_1 < t_2 < ...`, starting after `t0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpulseSchedule {
    pub kind: ScheduleKind,
    pub t0: f64,
    pub t1: f64,
}

impl ImpulseSchedule {
    pub fn fixed(t0: f64, t1: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
        }
        Self::validated(ScheduleKind::FixedInterval { delta }, t0, t1)
    }

    pub fn geometric(t0: f64, t1: f64, rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::InvalidArgument(format!("growth rate must be positive, got {rate}")));
        }
        Self::validated(ScheduleKind::GeometricGrowth { rate }, t0, t1)
    }

    fn validated(kind: ScheduleKind, t0: f64, t1: f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidArgument(format!("first impulse t1 = {t1} must follow t0 = {t0}")));
        }
        Ok(Self { kind, t0, t1 })
    }

    /// Infinite iterator over `t_1, t_2, ...`.
    pub fn times(&self) -> ScheduleIter {
        ScheduleIter {
            schedule: *self,
            n: 0,
            last: self.t0,
        }
    }

    pub fn times_until(&self, t_max: f64) -> Vec<f64> {
        self.times().take_while(|t| *t <= t_max).collect()
    }

    /// Uniform bound on the gaps, if one exists.
    pub fn max_gap(&self) -> Option<f64> {
        match self.kind {
            ScheduleKind::FixedInterval { delta } => Some(delta.max(self.t1 - self.t0)),
            ScheduleKind::GeometricGrowth { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleIter {
    schedule: ImpulseSchedule,
    n: usize,
    last: f64,
}

impl Iterator for ScheduleIter {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let s = &self.schedule;
        self.n += 1;
        let t = if self.n == 1 {
            s.t1
        } else {
            match s.kind {
                ScheduleKind::FixedInterval { delta } => s.t1 + (self.n - 1) as f64 * delta,
                ScheduleKind::GeometricGrowth { rate } => self.last + rate * (self.last - s.t0),
            }
        };
        self.last = t;
        Some(t)
    }
}
