use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use super::config::{ControlMode, ExperimentConfig};
use super::csv::{fmt_num, read_csv, write_rows, CASES_HEADER, IMPULSES_HEADER};
use super::manifest::RunManifest;
use super::HarnessError;
use crate::controllers::{
    check_guarantees, run_impulsive, Control, GuaranteeReport, ImpulseMap, ImpulseSchedule, RunOptions, RunStatus,
    Sample, TrajectoryRecord,
};
use crate::dynamics::{StateVector, VectorField};
use crate::error::Error;
use crate::semi_invariant::{ImpulseRecord, SemiInvariant};
use crate::stability::{
    bisect_sign_change, ds_constant_matrix, estimate_ds_seeded, sweep_ds, DsSettings, OnSurfaceSystem,
    StabilityEstimate, SweepPoint,
};
use crate::systems::{CoupledLorenz, Lorenz, PresetName, Seir, DAYS_PER_YEAR};

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const IMPULSES_FILE: &str = "impulses.csv";
pub const CASES_FILE: &str = "cases.csv";
pub const GUARANTEES_FILE: &str = "guarantees.txt";

/// Internal time units per configured time unit.
fn time_scale(preset: PresetName) -> f64 {
    match preset {
        PresetName::SeirMeasles => 1.0 / DAYS_PER_YEAR,
        _ => 1.0,
    }
}

fn time_unit(preset: PresetName) -> &'static str {
    match preset {
        PresetName::SeirMeasles => "years",
        _ => "dimensionless",
    }
}

fn lorenz_origin_ds() -> f64 {
    let lz = Lorenz::default();
    ds_constant_matrix(&lz.constant_l_s().expect("the origin has a constant L_S"))
}

const SYNC_J0: [f64; 3] = [
    CoupledLorenz::DEFAULT_X0[3],
    CoupledLorenz::DEFAULT_X0[4],
    CoupledLorenz::DEFAULT_X0[5],
];

/// Schedule and impulse map for a configuration, or `None` without control.
pub fn build_control(cfg: &ExperimentConfig, ds: Option<f64>) -> Result<Option<Control>, HarnessError> {
    if cfg.control == ControlMode::None {
        return Ok(None);
    }
    let k = time_scale(cfg.preset);
    let (t0, t1) = (cfg.t0 * k, cfg.t1 * k);
    let control = match cfg.preset {
        PresetName::LorenzOrigin => {
            let ds = ds.filter(|d| *d > 0.0).ok_or_else(|| HarnessError::Config {
                key: "kappa".into(),
                message: "the geometric schedule needs a positive D_S".into(),
            })?;
            Control {
                schedule: ImpulseSchedule::geometric(t0, t1, cfg.kappa / ds)?,
                map: ImpulseMap::RadialRescale { alpha: cfg.alpha },
            }
        }
        PresetName::LorenzSync => Control {
            schedule: ImpulseSchedule::fixed(t0, t1, cfg.delta)?,
            map: ImpulseMap::SyncRescale {
                alpha: cfg.alpha,
                target: 0..3,
                partner: 3..6,
                convention: cfg.sync_convention,
            },
        },
        PresetName::SeirMeasles => Control {
            schedule: ImpulseSchedule::geometric(t0, t1, cfg.kappa_eff)?,
            map: ImpulseMap::ParallelVaccination {
                alpha: cfg.alpha * DAYS_PER_YEAR,
                guard: cfg.guard,
                susceptible: Seir::S,
                vaccinated: Seir::V,
            },
        },
    };
    Ok(Some(control))
}

/// One row of the SEIR case series.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseRow {
    pub t_days: f64,
    /// `int sigma E dt`, as a fraction of the population.
    pub cumulative: f64,
    pub new_per_day: f64,
    /// `(V, S, E, I, R)`
    pub x: [f64; 5],
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: ExperimentConfig,
    pub control: Option<Control>,
    pub record: TrajectoryRecord,
    pub report: GuaranteeReport,
    pub ds_used: Option<f64>,
    pub cases: Option<Vec<CaseRow>>,
}

impl Simulation {
    pub fn time_unit(&self) -> &'static str {
        time_unit(self.config.preset)
    }
}

fn run_options(cfg: &ExperimentConfig) -> RunOptions {
    let k = time_scale(cfg.preset);
    RunOptions {
        t0: cfg.t0 * k,
        t_max: cfg.t_max * k,
        dt: cfg.dt * k,
        convergence_tol: cfg.convergence_tol,
        sample_every: cfg.sample_every,
    }
}

fn run_system<S: SemiInvariant>(
    sys: &S,
    x0: &[f64],
    control: Option<&Control>,
    opts: &RunOptions,
    observe: impl FnMut(&StateVector, &StateVector),
) -> Result<TrajectoryRecord, HarnessError> {
    Ok(run_impulsive(sys, control, &DVector::from_column_slice(x0), opts, observe)?)
}

/// Runs a preset with its configured control.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Simulation, HarnessError> {
    cfg.validate()?;
    let opts = run_options(cfg);
    let ds_used = match cfg.preset {
        PresetName::LorenzOrigin => Some(lorenz_origin_ds()),
        _ => None,
    };
    let control = build_control(cfg, ds_used)?;
    let mut cases = None;
    let record = match cfg.preset {
        PresetName::LorenzOrigin => run_system(&Lorenz::default(), &Lorenz::DEFAULT_X0, control.as_ref(), &opts, |_, _| {})?,
        PresetName::LorenzSync => run_system(
            &CoupledLorenz::with_coupling(cfg.c),
            &CoupledLorenz::DEFAULT_X0,
            control.as_ref(),
            &opts,
            |_, _| {},
        )?,
        PresetName::SeirMeasles => {
            let sys = WithIncidence(Seir::default());
            let mut x0 = Seir::default_x0().to_vec();
            x0.push(0.0);
            let mut record = run_system(&sys, &x0, control.as_ref(), &opts, |_, _| {})?;
            cases = Some(split_incidence(&mut record, sys.0.params.sigma));
            record
        }
    };
    let report = check_guarantees(control.as_ref(), &record, ds_used);
    Ok(Simulation {
        config: cfg.clone(),
        control,
        record,
        report,
        ds_used,
        cases,
    })
}

/// SEIR with the cumulative incidence `int sigma E dt` appended as a sixth,
/// integrated coordinate.
struct WithIncidence(Seir);

impl WithIncidence {
    fn head(x: &DVector<f64>) -> DVector<f64> {
        x.rows(0, 5).into_owned()
    }
}

impl VectorField for WithIncidence {
    fn dim(&self) -> usize {
        6
    }
    fn name(&self) -> &str {
        "seir+incidence"
    }
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        let head = Self::head(x);
        let f = self.0.eval(&head);
        let mut out = DVector::zeros(6);
        out.rows_mut(0, 5).copy_from(&f);
        out[5] = self.0.params.sigma * x[Seir::E];
        out
    }
}

impl SemiInvariant for WithIncidence {
    fn semi_dim(&self) -> usize {
        2
    }
    fn eval_i(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.eval_i(&Self::head(x))
    }
    fn eval_l(&self, x: &DVector<f64>) -> DMatrix<f64> {
        self.0.eval_l(&Self::head(x))
    }
    fn eval_j(&self, x: &DVector<f64>) -> DVector<f64> {
        self.0.eval_j(&Self::head(x))
    }
}

/// Strips the incidence coordinate from the samples and returns the case series.
fn split_incidence(record: &mut TrajectoryRecord, sigma: f64) -> Vec<CaseRow> {
    record
        .samples
        .iter_mut()
        .map(|s| {
            let cumulative = s.x[5];
            s.x = WithIncidence::head(&s.x);
            let mut x = [0.0; 5];
            x.copy_from_slice(s.x.as_slice());
            CaseRow {
                t_days: s.t * DAYS_PER_YEAR,
                cumulative,
                new_per_day: sigma * x[Seir::E] / DAYS_PER_YEAR,
                x,
            }
        })
        .collect()
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn report_text(report: &GuaranteeReport) -> String {
    report
        .to_key_values()
        .into_iter()
        .map(|(k, v)| format!("{k} = {v}\n"))
        .collect()
}

/// Writes the CSVs, the guarantee report and the manifest; returns the paths written.
pub fn write_simulation(sim: &Simulation, dir: &Path, wall_clock_seconds: f64) -> Result<Vec<PathBuf>, HarnessError> {
    create_dir(dir)?;
    let rec = &sim.record;
    let m = rec.samples.first().map_or(0, |s| s.x.len());
    let mut header = vec!["t".to_string(), "normI".into(), "log_normI".into()];
    header.extend((1..=m).map(|k| format!("x{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let traj = dir.join(TRAJECTORY_FILE);
    write_rows(
        &traj,
        &header,
        rec.samples.iter().map(|s| {
            let mut row = vec![fmt_num(s.t), fmt_num(s.norm_i), fmt_num(s.norm_i.ln())];
            row.extend(s.x.iter().map(|v| fmt_num(*v)));
            row
        }),
    )?;
    let imp = dir.join(IMPULSES_FILE);
    write_rows(
        &imp,
        &IMPULSES_HEADER,
        rec.impulses.iter().map(|r| {
            vec![
                r.n.to_string(),
                fmt_num(r.t_n),
                fmt_num(r.delta_n),
                fmt_num(r.beta_n),
                fmt_num(r.a_n),
                fmt_num(r.b_n),
                fmt_num(r.norm_before),
                fmt_num(r.norm_after),
            ]
        }),
    )?;
    let mut written = vec![traj, imp];
    if let Some(cases) = &sim.cases {
        let path = dir.join(CASES_FILE);
        write_rows(
            &path,
            &CASES_HEADER,
            cases.iter().map(|c| {
                let [v, s, e, i, r] = c.x;
                [c.t_days, c.cumulative, c.new_per_day, s, v, e, i, r].map(fmt_num)
            }),
        )?;
        written.push(path);
    }
    let report = dir.join(GUARANTEES_FILE);
    write_text(&report, &report_text(&sim.report))?;
    written.push(report);

    let manifest = RunManifest {
        config: sim.config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds,
        status: rec.status.label().to_string(),
        final_norm: rec.final_sample().norm_i,
        impulses: rec.impulses.len(),
        ds_used: sim.ds_used,
        initial_norm: rec.initial_norm,
        max_lambda_h: rec.max_lambda_h,
        time_unit: sim.time_unit().to_string(),
    };
    manifest.write(dir)?;
    written.push(dir.join(super::MANIFEST_FILE));
    Ok(written)
}

/// A run reloaded from its output directory.
#[derive(Debug, Clone)]
pub struct StoredRun {
    pub manifest: RunManifest,
    pub control: Option<Control>,
    pub record: TrajectoryRecord,
}

impl StoredRun {
    pub fn check(&self) -> GuaranteeReport {
        check_guarantees(self.control.as_ref(), &self.record, self.manifest.ds_used)
    }
}

/// Rebuilds the trajectory record from `trajectory.csv`, `impulses.csv` and the manifest.
pub fn load_run(dir: &Path) -> Result<StoredRun, HarnessError> {
    let manifest = RunManifest::read(dir)?;
    let traj_path = dir.join(TRAJECTORY_FILE);
    let imp_path = dir.join(IMPULSES_FILE);
    let traj = read_csv(&traj_path)?;
    let imp = read_csv(&imp_path)?;
    let bad = |path: &Path, message: &str| HarnessError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    if imp.header != IMPULSES_HEADER {
        return Err(bad(&imp_path, "unexpected impulse header"));
    }
    if traj.header.len() < 4 || traj.header[..3] != ["t", "normI", "log_normI"] {
        return Err(bad(&traj_path, "unexpected trajectory header"));
    }
    let impulses: Vec<ImpulseRecord> = imp
        .rows
        .iter()
        .map(|r| ImpulseRecord {
            n: r[0] as usize,
            t_n: r[1],
            delta_n: r[2],
            beta_n: r[3],
            a_n: r[4],
            b_n: r[5],
            norm_before: r[6],
            norm_after: r[7],
            control_exponent: r[4],
            beta_alt: None,
            clamped: false,
        })
        .collect();

    // a pre-impulse and a post-impulse row share the impulse time
    let mut samples = Vec::with_capacity(traj.rows.len());
    let mut k = 0;
    for row in &traj.rows {
        let t = row[0];
        if k < impulses.len() && t == impulses[k].t_n && samples.last().is_some_and(|s: &Sample| s.t == t) {
            k += 1;
        }
        while k < impulses.len() && impulses[k].t_n < t {
            k += 1;
        }
        samples.push(Sample {
            t,
            x: DVector::from_column_slice(&row[3..]),
            norm_i: row[1],
            impulses: k,
            rate_integral: f64::NAN,
        });
    }
    let first = samples.first().ok_or_else(|| bad(&traj_path, "no samples"))?;
    let t0 = first.t;
    let last_t = samples.last().map_or(t0, |s| s.t);
    let status = match manifest.status.as_str() {
        "converged" => RunStatus::Converged { t: last_t },
        "blowup" => RunStatus::Blowup {
            t: last_t,
            reason: "reloaded run".into(),
        },
        _ => RunStatus::HorizonReached,
    };
    let ds = manifest.ds_used;
    let control = build_control(&manifest.config, ds)?;
    let record = TrajectoryRecord {
        t0,
        initial_norm: manifest.initial_norm,
        samples,
        impulses,
        status,
        max_lambda_h: manifest.max_lambda_h,
    };
    Ok(StoredRun {
        manifest,
        control,
        record,
    })
}

#[derive(Debug, Clone)]
pub struct DsOutcome {
    pub preset: PresetName,
    /// Largest real eigenvalue of a constant `L_S`, where one exists.
    pub closed_form: Option<f64>,
    pub estimate: StabilityEstimate,
    pub units: &'static str,
}

fn ds_settings(cfg: &ExperimentConfig) -> DsSettings {
    let k = time_scale(cfg.preset);
    DsSettings {
        horizon: cfg.ds_horizon * k,
        burn_in: cfg.ds_burn_in.map(|b| b * k),
        dt: cfg.dt * k,
        seed: cfg.seed,
    }
}

/// Stability exponent of the preset's target surface.
pub fn ds_experiment(cfg: &ExperimentConfig) -> Result<DsOutcome, HarnessError> {
    cfg.validate()?;
    let settings = ds_settings(cfg);
    let (closed_form, estimate, units) = match cfg.preset {
        PresetName::LorenzOrigin => {
            let lz = Lorenz::default();
            let est = estimate_ds_seeded(&lz, &DVector::zeros(0), &settings)?;
            (Some(lorenz_origin_ds()), est, "per unit time")
        }
        PresetName::LorenzSync => {
            let sys = CoupledLorenz::with_coupling(cfg.c);
            let est = estimate_ds_seeded(&sys, &DVector::from_column_slice(&SYNC_J0), &settings)?;
            (None, est, "per unit time")
        }
        PresetName::SeirMeasles => {
            let seir = Seir::default();
            let x0 = DVector::from_column_slice(&Seir::default_x0());
            let j0 = seir.eval_j(&x0);
            // the surface flow is static, so L_S stays at its initial value
            let closed = ds_constant_matrix(&seir.eval_l_s(&j0));
            let est = estimate_ds_seeded(&seir, &j0, &settings)?;
            (Some(closed), est, "per year")
        }
    };
    Ok(DsOutcome {
        preset: cfg.preset,
        closed_form,
        estimate,
        units,
    })
}

pub fn write_ds(outcome: &DsOutcome, path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    write_rows(
        path,
        &["t", "omega"],
        outcome.estimate.convergence.iter().map(|&(t, w)| [fmt_num(t), fmt_num(w)]),
    )
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    /// Number of sign changes between consecutive successful grid points.
    pub sign_changes: usize,
    /// First sign change of `D_S(c)`, bisected to within `bisect_width / 2`.
    pub c0: Option<f64>,
    pub bisect_width: f64,
}

/// `D_S` of the synchronization surface over a grid of couplings `c`.
pub fn sweep_experiment(cfg: &ExperimentConfig, grid: &[f64], bisect_width: f64) -> Result<SweepOutcome, HarnessError> {
    cfg.validate()?;
    if cfg.preset != PresetName::LorenzSync {
        return Err(HarnessError::Config {
            key: "preset".into(),
            message: "the coupling sweep needs the lorenz-sync preset".into(),
        });
    }
    if let Some(c) = grid.iter().find(|c| !(**c >= 0.0 && c.is_finite())) {
        return Err(HarnessError::Config {
            key: "c".into(),
            message: format!("sweep values must be non-negative, got {c}"),
        });
    }
    let settings = ds_settings(cfg);
    let j0 = DVector::from_column_slice(&SYNC_J0);
    let points = sweep_ds(|c| (CoupledLorenz::with_coupling(c), j0.clone()), grid, &settings)?;
    let ok: Vec<(f64, f64)> = points.iter().filter_map(|p| p.ds.as_ref().ok().map(|d| (p.param, *d))).collect();
    let mut sign_changes = 0;
    let mut bracket = None;
    for w in ok.windows(2) {
        if w[0].1.signum() != w[1].1.signum() {
            sign_changes += 1;
            bracket.get_or_insert((w[0].0, w[1].0));
        }
    }
    let c0 = match bracket {
        Some((lo, hi)) => Some(bisect_sign_change(
            |c| Ok::<f64, Error>(estimate_ds_seeded(&CoupledLorenz::with_coupling(c), &j0, &settings)?.ds),
            lo,
            hi,
            bisect_width,
        )?),
        None => None,
    };
    Ok(SweepOutcome {
        points,
        sign_changes,
        c0,
        bisect_width,
    })
}

pub fn write_sweep(outcome: &SweepOutcome, path: &Path) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        create_dir(dir)?;
    }
    write_rows(
        path,
        &["c", "ds"],
        outcome
            .points
            .iter()
            .map(|p| [fmt_num(p.param), fmt_num(*p.ds.as_ref().unwrap_or(&f64::NAN))]),
    )
}
