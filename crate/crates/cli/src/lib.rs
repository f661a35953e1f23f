//! Command-line front end: `simulate`, `ds`, `sweep`, `check`, `list-presets`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use invsteer::harness::{
    default_out_root, ds_experiment, load_run, read_config_file, resolve_config, simulate, sweep_experiment,
    write_ds, write_simulation, write_sweep, ExperimentConfig, HarnessError,
};
use invsteer::{PresetName, RunStatus};

// stdout may be a closed pipe (`invsteer ... | head`); output is best effort
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! esay {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stderr(), $($arg)*);
    }};
}

#[derive(Debug, Parser)]
#[command(name = "invsteer", version, about = "Impulsive control onto invariant manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a preset with (or without) impulsive control.
    Simulate(Overrides),
    /// Estimate the stability exponent of the preset's target surface.
    Ds(Overrides),
    /// Stability exponent over a grid of coupling strengths.
    Sweep(SweepArgs),
    /// Re-evaluate the convergence criteria on a stored run directory.
    Check { dir: PathBuf },
    /// Print the available presets.
    ListPresets,
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long)]
    preset: Option<String>,
    /// Flat `key = value` file; manifests are accepted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integrate without impulses.
    #[arg(long)]
    no_control: bool,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    kappa: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    kappa_eff: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    c: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t0: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t1: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    convergence_tol: Option<String>,
    /// `unconditional` or `growing`.
    #[arg(long)]
    guard: Option<String>,
    /// `consistent` or `printed`.
    #[arg(long)]
    sync_convention: Option<String>,
    #[arg(long)]
    sample_every: Option<String>,
    /// Averaging horizon for `ds` and `sweep`.
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    burn_in: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, default_value = "c")]
    param: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    to: f64,
    #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
    step: f64,
    /// Bracket width at which bisection of the sign change stops.
    #[arg(long, default_value_t = 0.1)]
    bisect_width: f64,
}

impl Overrides {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = [
            ("preset", &self.preset),
            ("alpha", &self.alpha),
            ("kappa", &self.kappa),
            ("kappa_eff", &self.kappa_eff),
            ("delta", &self.delta),
            ("c", &self.c),
            ("dt", &self.dt),
            ("t0", &self.t0),
            ("t1", &self.t1),
            ("t_max", &self.t_max),
            ("seed", &self.seed),
            ("convergence_tol", &self.convergence_tol),
            ("guard", &self.guard),
            ("sync_convention", &self.sync_convention),
            ("sample_every", &self.sample_every),
            ("ds_horizon", &self.horizon),
            ("ds_burn_in", &self.burn_in),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect();
        if self.no_control {
            out.push(("control".into(), "none".into()));
        }
        if let Some(o) = &self.out {
            out.push(("out".into(), o.display().to_string()));
        }
        out
    }

    fn resolve(&self, fallback: PresetName) -> Result<ExperimentConfig, HarnessError> {
        let text = self.config.as_deref().map(read_config_file).transpose()?;
        resolve_config(fallback, text.as_deref(), &self.pairs())
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| default_out_root().join(cfg.preset.as_str()))
}

fn run_simulate(o: &Overrides) -> Result<i32, HarnessError> {
    let cfg = o.resolve(PresetName::LorenzOrigin)?;
    let started = Instant::now();
    let sim = simulate(&cfg)?;
    let wall = started.elapsed().as_secs_f64();
    let dir = out_dir(&cfg);
    let files = write_simulation(&sim, &dir, wall)?;
    let rec = &sim.record;
    say!("preset          {}", cfg.preset);
    say!("status          {}", rec.status.label());
    say!("impulses        {}", rec.impulses.len());
    say!("final ||I||     {:e}", rec.final_sample().norm_i);
    if let Some(ds) = sim.ds_used {
        say!("D_S used        {ds}");
    }
    say!("prop 4          {}", sim.report.prop4.verdict);
    say!("prop 5          {}", sim.report.prop5.verdict);
    say!("prop 6          {}", sim.report.prop6.verdict);
    say!(
        "pathwise bound  {} violations over {} samples",
        sim.report.pathwise.violations, sim.report.pathwise.samples_checked
    );
    for f in files {
        say!("wrote           {}", f.display());
    }
    if let RunStatus::Blowup { t, reason } = &rec.status {
        esay!("error: trajectory blew up at t = {t}: {reason}");
        return Ok(2);
    }
    Ok(0)
}

fn run_ds(o: &Overrides) -> Result<i32, HarnessError> {
    let cfg = o.resolve(PresetName::LorenzOrigin)?;
    let outcome = ds_experiment(&cfg)?;
    let path = out_dir(&cfg).join("ds_convergence.csv");
    write_ds(&outcome, &path)?;
    say!("preset          {}", cfg.preset);
    if let Some(v) = outcome.closed_form {
        say!("closed form     {v:.12} {}", outcome.units);
    }
    let e = &outcome.estimate;
    say!("time average    {:.12} {}", e.ds, outcome.units);
    say!("horizon         {} (burn-in {})", e.horizon, e.burn_in);
    say!("seed            {}", cfg.seed);
    say!("wrote           {}", path.display());
    Ok(0)
}

fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, HarnessError> {
    if !(step > 0.0 && to >= from && from.is_finite() && to.is_finite()) {
        return Err(HarnessError::Config {
            key: "step".into(),
            message: format!("need step > 0 and to >= from, got from {from}, to {to}, step {step}"),
        });
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

fn run_sweep(a: &SweepArgs) -> Result<i32, HarnessError> {
    if a.param != "c" {
        return Err(HarnessError::Config {
            key: "param".into(),
            message: format!("only `c` can be swept, got `{}`", a.param),
        });
    }
    let cfg = a.overrides.resolve(PresetName::LorenzSync)?;
    let outcome = sweep_experiment(&cfg, &grid(a.from, a.to, a.step)?, a.bisect_width)?;
    let path = out_dir(&cfg).join("ds_vs_c.csv");
    write_sweep(&outcome, &path)?;
    for p in &outcome.points {
        match &p.ds {
            Ok(v) => say!("c = {:<8} D_S = {v:.6}", p.param),
            Err(e) => say!("c = {:<8} failed: {e}", p.param),
        }
    }
    say!("sign changes    {}", outcome.sign_changes);
    match outcome.c0 {
        Some(c0) => say!("c0              {c0:.4} +/- {}", outcome.bisect_width / 2.0),
        None => say!("c0              none on this grid"),
    }
    say!("wrote           {}", path.display());
    Ok(0)
}

fn run_check(dir: &Path) -> Result<i32, HarnessError> {
    let stored = load_run(dir)?;
    let report = stored.check();
    say!("run             {}", dir.display());
    say!("preset          {}", stored.manifest.config.preset);
    for (k, v) in report.to_key_values() {
        say!("{k} = {v}");
    }
    Ok(0)
}

fn list_presets() -> i32 {
    for p in PresetName::ALL {
        say!("{:<15} {}", p.as_str(), p.description());
    }
    0
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(o) => run_simulate(o),
        Command::Ds(o) => run_ds(o),
        Command::Sweep(a) => run_sweep(a),
        Command::Check { dir } => run_check(dir),
        Command::ListPresets => Ok(list_presets()),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            esay!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        let g = grid(0.0, 10.0, 0.25).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[40], 10.0);
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn bad_flags_exit_with_one() {
        assert_eq!(cli_main(["invsteer", "simulate", "--bogus"]), 1);
        assert_eq!(cli_main(["invsteer", "simulate", "--alpha", "-1"]), 1);
        assert_eq!(cli_main(["invsteer", "list-presets"]), 0);
    }
}
