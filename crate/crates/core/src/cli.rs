//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::cases::{BuiltinCase, Problem};
use crate::error::Error;
use crate::postproc::{
    compare_tables, read_config, read_timeseries, write_snapshot, write_timeseries, CaseConfig,
    ModelKind, ProbeConfig, VtkData,
};
use crate::reference::analytic_compression;

pub const EXIT_OK: i32 = 0;
/// Comparison finished but some column exceeded the tolerance.
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_SOLVER: i32 = 4;

pub const TIMESERIES_FILE: &str = "timeseries.csv";

#[derive(Debug, Parser)]
#[command(
    name = "porosim",
    version,
    about = "Large-deformation poroelasticity: predictor-corrector finite elements with linear comparators",
    args_conflicts_with_subcommands = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare the time series of two run directories column by column.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// Largest accepted relative deviation per column.
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        /// Restrict the verdict to these columns (default: all).
        #[arg(long = "column")]
        columns: Vec<String>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Built-in benchmark case (ignored when --config is given).
    #[arg(long, value_enum, default_value_t = BuiltinCase::Compression)]
    pub case: BuiltinCase,
    /// Model to integrate; overrides the configuration's choice.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// TOML case description.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Surface load magnitude, Pa.
    #[arg(long)]
    pub load: Option<f64>,
    /// Time step, s.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Number of time steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Directory receiving the time series and snapshots.
    #[arg(long, default_value = "output")]
    pub output_dir: PathBuf,
    /// Probe as NAME=X,Y in reference coordinates; repeatable, replaces the
    /// case's probes.
    #[arg(long = "probe", value_parser = parse_probe)]
    pub probes: Vec<ProbeConfig>,
    /// Newmark beta for the linear_newmark model
    #[arg(long)]
    pub newmark_beta: Option<f64>,
    /// Newmark gamma for the linear_newmark model
    #[arg(long)]
    pub newmark_gamma: Option<f64>,
}

fn parse_probe(s: &str) -> Result<ProbeConfig, String> {
    let (name, coords) = s.split_once('=').ok_or("expected NAME=X,Y")?;
    let (x, y) = coords.split_once(',').ok_or("expected NAME=X,Y")?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad coordinate `{t}`"));
    if name.is_empty() || name.contains(',') {
        return Err(format!("bad probe name `{name}`"));
    }
    Ok(ProbeConfig {
        name: name.to_string(),
        point: [num(x)?, num(y)?],
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Solver { .. } | Error::Singular(_) | Error::InvertedElement { .. } | Error::NonPhysical(_) => {
            EXIT_SOLVER
        }
        _ => EXIT_VALIDATION,
    }
}

impl RunArgs {
    /// Case description after applying overrides.
    pub fn resolve(&self) -> crate::Result<CaseConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_config(path)?,
            None => self.case.config(),
        };
        if let Some(m) = self.model {
            cfg.model.kind = m;
        }
        if let Some(l) = self.load {
            cfg.load.magnitude = l;
        }
        if let Some(dt) = self.dt {
            cfg.schedule.dt = dt;
        }
        if let Some(n) = self.steps {
            cfg.schedule.steps = n;
            cfg.schedule.snapshots.retain(|&s| s < n);
            cfg.schedule.snapshots.push(n);
        }
        if !self.probes.is_empty() {
            cfg.schedule.probes = self.probes.clone();
        }
        if let Some(b) = self.newmark_beta {
            cfg.model.newmark_beta = b;
        }
        if let Some(g) = self.newmark_gamma {
            cfg.model.newmark_gamma = g;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn model_name(m: ModelKind) -> &'static str {
    match m {
        ModelKind::Nonlinear => "nonlinear",
        ModelKind::LinearBd => "linear_bd",
        ModelKind::LinearNewmark => "linear_newmark",
    }
}

/// Runs the CLI with explicit arguments and streams; returns the exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match cli.command {
        Some(Command::Compare {
            run_a,
            run_b,
            tolerance,
            columns,
        }) => compare(&run_a, &run_b, tolerance, &columns, out, err),
        None => simulate(&cli.run, out, err),
    }
}

fn timeseries_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(TIMESERIES_FILE)
    } else {
        p.to_path_buf()
    }
}

fn compare(a: &Path, b: &Path, tol: f64, columns: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = (|| {
        let ta = read_timeseries(&timeseries_path(a))?;
        let tb = read_timeseries(&timeseries_path(b))?;
        compare_tables(&ta, &tb)
    })();
    let devs = match result {
        Ok(d) => d,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_VALIDATION;
        }
    };
    if let Some(c) = columns.iter().find(|c| !devs.iter().any(|d| &d.name == *c)) {
        let _ = writeln!(err, "error: no column `{c}`");
        return EXIT_VALIDATION;
    }
    let mut ok = true;
    let _ = writeln!(out, "{:<16} {:>14} {:>14}  verdict", "column", "max_abs", "max_rel");
    for d in devs.iter().filter(|d| d.name != "time") {
        let judged = columns.is_empty() || columns.contains(&d.name);
        let pass = d.max_rel <= tol;
        ok &= pass || !judged;
        let verdict = match (judged, pass) {
            (false, _) => "-",
            (true, true) => "pass",
            (true, false) => "FAIL",
        };
        let _ = writeln!(out, "{:<16} {:>14.6e} {:>14.6e}  {verdict}", d.name, d.max_abs, d.max_rel);
    }
    let _ = writeln!(out, "{} (tolerance {tol:e})", if ok { "PASS" } else { "FAIL" });
    if ok {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

fn simulate(args: &RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let fail = |err: &mut dyn Write, e: &Error| {
        let _ = writeln!(err, "error: {e}");
        exit_code(e)
    };
    let cfg = match args.resolve() {
        Ok(c) => c,
        Err(e) => return fail(err, &e),
    };
    let problem = match Problem::from_config(&cfg) {
        Ok(p) => p,
        Err(e) => return fail(err, &e),
    };
    let dir = &args.output_dir;
    if let Err(e) = fs::create_dir_all(dir) {
        return fail(err, &Error::Io { path: dir.clone(), source: e });
    }
    let _ = writeln!(
        out,
        "case={} model={} load={:e} dt={:e} steps={} newmark_beta={} newmark_gamma={} output_dir={}",
        if cfg.name.is_empty() { "custom" } else { &cfg.name },
        model_name(cfg.model.kind),
        cfg.load.magnitude,
        cfg.schedule.dt,
        cfg.schedule.steps,
        cfg.model.newmark_beta,
        cfg.model.newmark_gamma,
        dir.display()
    );
    let case_path = dir.join("case.toml");
    if let Err(e) = fs::write(&case_path, cfg.to_toml()) {
        return fail(err, &Error::Io { path: case_path, source: e });
    }
    let result = match problem.run() {
        Ok(r) => r,
        Err(e) => return fail(err, &e),
    };

    // flush whatever was computed, even after a failure
    let path = dir.join(TIMESERIES_FILE);
    if let Err(e) = write_timeseries(&path, &result.probes, &result.records) {
        return fail(err, &e);
    }
    for snap in &result.snapshots {
        let path = dir.join(format!("snapshot_{:06}.vtk", snap.step));
        let title = format!("{} t={:e}", model_name(cfg.model.kind), snap.time);
        let written = VtkData::from_fields(&snap.mesh, &snap.displacement, &snap.fields)
            .and_then(|data| write_snapshot(&path, &snap.mesh, &title, &data));
        if let Err(e) = written {
            return fail(err, &e);
        }
    }
    if let Some(e) = &result.failure {
        let _ = writeln!(err, "{} of {} steps completed", result.records.len(), cfg.schedule.steps);
        return fail(err, e);
    }

    if let Some(last) = result.records.last() {
        let _ = write!(out, "t={:.6e}", last.time);
        for (p, u) in result.probes.iter().zip(&last.displacement) {
            let _ = write!(out, " uy_{}={:.6e}", p.name, u[1]);
        }
        let _ = writeln!(out);
        if cfg.name == "compression" {
            if let Ok(e) = analytic_compression(cfg.solid.lambda, cfg.solid.mu, cfg.load.magnitude) {
                let _ = writeln!(out, "steady-state analytic uy_top={:.6e}", e * cfg.mesh.ly);
            }
        }
    }
    EXIT_OK
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_syntax() {
        let p = parse_probe("C=5,5.5").unwrap();
        assert_eq!((p.name.as_str(), p.point), ("C", [5.0, 5.5]));
        assert!(parse_probe("C5,5").is_err());
        assert!(parse_probe("C=5").is_err());
        assert!(parse_probe("=1,2").is_err());
    }

    #[test]
    fn overrides_round_trip() {
        let cli = Cli::try_parse_from([
            "porosim",
            "--case",
            "partial_compression",
            "--model",
            "linear_newmark",
            "--load",
            "40e3",
            "--dt",
            "0.001",
            "--steps",
            "7",
            "--newmark-beta",
            "0.3",
            "--newmark-gamma",
            "0.6",
            "--probe",
            "A=1,2",
        ])
        .unwrap();
        let cfg = cli.run.resolve().unwrap();
        assert_eq!(cfg.name, "partial_compression");
        assert_eq!(cfg.model.kind, ModelKind::LinearNewmark);
        assert_eq!(cfg.load.magnitude, 40e3);
        assert_eq!(cfg.schedule.dt, 0.001);
        assert_eq!(cfg.schedule.steps, 7);
        assert_eq!(cfg.schedule.snapshots, vec![7]);
        assert_eq!((cfg.model.newmark_beta, cfg.model.newmark_gamma), (0.3, 0.6));
        assert_eq!(cfg.schedule.probes[0].point, [1.0, 2.0]);
    }

    #[test]
    fn exit_codes() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        assert_eq!(run_cli(["porosim", "--bogus"], &mut o, &mut e), EXIT_USAGE);
        assert_eq!(run_cli(["porosim", "--help"], &mut o, &mut e), EXIT_OK);
        let help = String::from_utf8(o.clone()).unwrap();
        for flag in [
            "--case",
            "--model",
            "--config",
            "--load",
            "--dt",
            "--steps",
            "--output-dir",
            "--probe",
            "--newmark-beta",
            "--newmark-gamma",
            "--help",
        ] {
            assert!(help.contains(flag), "{flag} missing from help");
        }
        assert_eq!(run_cli(["porosim", "--dt", "0"], &mut o, &mut e), EXIT_VALIDATION);
        assert_eq!(run_cli(["porosim", "--dt", "abc"], &mut o, &mut e), EXIT_USAGE);
    }
}
