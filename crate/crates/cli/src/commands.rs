//! Subcommand implementations. Every output is ordered by launch angle.

use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use stratray::beam::beam_field;
use stratray::io::{num, write_beam_csv, write_caustics_csv, write_ray_csv};
use stratray::paraxial::{detect_caustics, propagate_extrinsic, propagate_jacobi, CausticEvent, ExtrinsicSpreading, IntrinsicSpreading};
use stratray::ray::trace;
use stratray::validate::{curvature_reports, identity_suite, reports_to_json, reports_to_table, SuiteTolerances};
use stratray::{RayPath, SoundSpeedProfile};

use crate::scenario::{HorizonSpec, Scenario};
use crate::svg::{render_fan, FanRay};
use crate::Common;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
    ValidationFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
            CliError::ValidationFailed(n) => write!(f, "{n} check(s) failed"),
        }
    }
}

impl From<stratray::Error> for CliError {
    fn from(e: stratray::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

struct RayRun {
    theta0_deg: f64,
    path: RayPath,
    extrinsic: Vec<ExtrinsicSpreading>,
    intrinsic: Vec<IntrinsicSpreading>,
    caustics: Vec<CausticEvent>,
}

pub struct Context {
    scenario: Scenario,
    profile: SoundSpeedProfile,
    out_dir: PathBuf,
    timestamp: Option<String>,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    command: &'a str,
    timestamp: &'a str,
    scenario: &'a Scenario,
}

impl Context {
    pub fn new(args: &Common) -> CliResult<Self> {
        let scenario = Scenario::load(&args.scenario).map_err(CliError::Config)?;
        let profile = scenario.profile().map_err(CliError::Config)?;
        if let Some(n) = args.threads {
            if n == 0 {
                return Err(CliError::Config("--threads must be at least 1".into()));
            }
            // Ignored if a pool already exists in this process.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        let out_dir = args
            .out
            .clone()
            .or_else(|| scenario.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Self { scenario, profile, out_dir, timestamp: args.timestamp.clone() })
    }

    fn prepare(&self, command: &str) -> CliResult<()> {
        fs::create_dir_all(&self.out_dir)?;
        if let Some(ts) = &self.timestamp {
            let meta = RunMetadata { command, timestamp: ts, scenario: &self.scenario };
            let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Runtime(e.to_string()))?;
            fs::write(self.out_dir.join("run.json"), text + "\n")?;
        }
        Ok(())
    }

    fn create(&self, name: &str) -> CliResult<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.out_dir.join(name))?))
    }

    fn run_fan(&self) -> CliResult<Vec<RayRun>> {
        let sc = &self.scenario;
        sc.angles
            .degrees()
            .par_iter()
            .map(|&theta0_deg| {
                let path = trace(&self.profile, sc.source.r, sc.source.z, theta0_deg.to_radians(), sc.horizon.horizon(), sc.step)?;
                let extrinsic = propagate_extrinsic(&self.profile, &path)?;
                let intrinsic = propagate_jacobi(&self.profile, &path)?;
                let caustics = detect_caustics(&intrinsic, &path);
                Ok(RayRun { theta0_deg, path, extrinsic, intrinsic, caustics })
            })
            .collect::<Result<Vec<_>, stratray::Error>>()
            .map_err(CliError::from)
    }

    pub fn trace(&self) -> CliResult<()> {
        self.prepare("trace")?;
        let runs = self.run_fan()?;
        for (k, run) in runs.iter().enumerate() {
            let mut w = self.create(&ray_file("ray", k))?;
            write_ray_csv(&mut w, &run.path, None)?;
            w.flush()?;
        }
        self.write_fan_svg(&runs)?;
        self.write_index(&runs)?;
        println!("traced {} rays into {}", runs.len(), self.out_dir.display());
        Ok(())
    }

    pub fn spread(&self) -> CliResult<()> {
        self.prepare("spread")?;
        let runs = self.run_fan()?;
        for (k, run) in runs.iter().enumerate() {
            let mut w = self.create(&ray_file("spread", k))?;
            write_ray_csv(&mut w, &run.path, Some((&run.extrinsic, &run.intrinsic)))?;
            w.flush()?;
        }
        self.write_index(&runs)?;
        println!("wrote spreading for {} rays into {}", runs.len(), self.out_dir.display());
        Ok(())
    }

    pub fn caustics(&self) -> CliResult<()> {
        self.prepare("caustics")?;
        let runs = self.run_fan()?;
        let predicted = self.profile.cz_distance(self.scenario.source.z).ok().map(|d| d.half_wavelength);
        let mut table = self.create("cz_table.csv")?;
        writeln!(table, "ray,theta0_deg,caustics,first_range_m,mean_spacing_m,predicted_spacing_m,relative_error")?;
        println!(
            "{:>4}  {:>10}  {:>8}  {:>14}  {:>14}  {:>14}  {:>10}",
            "ray", "theta0_deg", "caustics", "first_km", "spacing_km", "predicted_km", "rel_err"
        );
        for (k, run) in runs.iter().enumerate() {
            let mut w = self.create(&ray_file("caustics", k))?;
            write_caustics_csv(&mut w, &run.caustics)?;
            w.flush()?;
            let r0 = run.path.first().state.r;
            let first = run.caustics.first().map(|c| c.r - r0);
            let spacing = mean_spacing(&run.caustics);
            let rel = match (spacing, predicted) {
                (Some(s), Some(p)) => Some((s - p).abs() / p),
                _ => None,
            };
            let cell = |x: Option<f64>| x.map(num).unwrap_or_default();
            writeln!(
                table,
                "{k},{},{},{},{},{},{}",
                num(run.theta0_deg),
                run.caustics.len(),
                cell(first),
                cell(spacing),
                cell(predicted),
                cell(rel)
            )?;
            let km = |x: Option<f64>| x.map(|v| format!("{:.3}", v / 1e3)).unwrap_or_else(|| "-".into());
            println!(
                "{k:>4}  {:>10.4}  {:>8}  {:>14}  {:>14}  {:>14}  {:>10}",
                run.theta0_deg,
                run.caustics.len(),
                km(first),
                km(spacing),
                km(predicted),
                rel.map(|v| format!("{v:.2e}")).unwrap_or_else(|| "-".into())
            );
        }
        table.flush()?;
        Ok(())
    }

    pub fn beam(&self) -> CliResult<()> {
        let config = self
            .scenario
            .beam
            .ok_or_else(|| CliError::Config("scenario has no `beam` section".into()))?;
        self.prepare("beam")?;
        let runs = self.run_fan()?;
        let fields: Vec<_> = runs
            .par_iter()
            .map(|run| beam_field(&run.path, &run.extrinsic, &run.intrinsic, &config, &self.scenario.offsets))
            .collect::<Result<_, _>>()?;
        for (k, field) in fields.iter().enumerate() {
            let mut w = self.create(&ray_file("beam", k))?;
            write_beam_csv(&mut w, field)?;
            w.flush()?;
        }
        self.write_index(&runs)?;
        println!("wrote beam fields for {} rays into {}", runs.len(), self.out_dir.display());
        Ok(())
    }

    pub fn czdist(&self, depth: Option<f64>) -> CliResult<()> {
        let z = depth.unwrap_or(self.scenario.source.z);
        let d = self.profile.cz_distance(z)?;
        println!("depth: {z:.1} m");
        println!("cz half-wavelength: {:.2} km ({:.1} m)", d.half_wavelength / 1e3, d.half_wavelength);
        match d.second_derivative_estimate {
            Some(e) => println!("second-derivative estimate: {:.2} km ({:.1} m)", e / 1e3, e),
            None => println!("second-derivative estimate: n/a"),
        }
        Ok(())
    }

    pub fn validate(&self) -> CliResult<()> {
        let t_end = match self.scenario.horizon {
            HorizonSpec::Time(t) => t,
            _ => return Err(CliError::Config("validate needs a `time` horizon".into())),
        };
        self.prepare("validate")?;
        let tol = SuiteTolerances::default();
        let z0 = self.scenario.source.z;
        let mut reports = identity_suite(&self.profile, z0, &self.scenario.angles.radians(), t_end, tol);
        let (lo, hi) = self.profile.domain();
        let depths: Vec<f64> = [z0 - 500.0, z0 - 100.0, z0, z0 + 100.0, z0 + 500.0]
            .into_iter()
            .filter(|&z| z - 1.0 > lo && z + 1.0 < hi)
            .collect();
        reports.extend(curvature_reports(&self.profile, "profile", &depths, 1e-5));
        fs::write(self.out_dir.join("report.json"), reports_to_json(&reports) + "\n")?;
        print!("{}", reports_to_table(&reports));
        let failed = reports.iter().filter(|r| !r.pass).count();
        if failed > 0 {
            return Err(CliError::ValidationFailed(failed));
        }
        println!("all {} checks passed", reports.len());
        Ok(())
    }

    fn write_fan_svg(&self, runs: &[RayRun]) -> CliResult<()> {
        let rays: Vec<FanRay> = runs
            .iter()
            .map(|run| FanRay {
                points: run.path.samples().iter().map(|s| (s.state.r, s.state.z)).collect(),
                caustics: run.caustics.iter().map(|c| (c.r, c.z)).collect(),
            })
            .collect();
        fs::write(self.out_dir.join("fan.svg"), render_fan(&rays))?;
        Ok(())
    }

    /// `rays.csv`: launch angle, termination and sample count per ray file.
    fn write_index(&self, runs: &[RayRun]) -> CliResult<()> {
        let mut w = self.create("rays.csv")?;
        writeln!(w, "ray,theta0_deg,termination,samples,t_end,r_end,z_end,caustics")?;
        for (k, run) in runs.iter().enumerate() {
            let last = run.path.last().state;
            writeln!(
                w,
                "{k},{},{:?},{},{},{},{},{}",
                num(run.theta0_deg),
                run.path.termination(),
                run.path.len(),
                num(last.t),
                num(last.r),
                num(last.z),
                run.caustics.len()
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

fn ray_file(prefix: &str, k: usize) -> String {
    format!("{prefix}_{k:03}.csv")
}

/// Mean horizontal distance between consecutive caustics.
fn mean_spacing(events: &[CausticEvent]) -> Option<f64> {
    match events {
        [] | [_] => None,
        [first, .., last] => Some((last.r - first.r) / (events.len() - 1) as f64),
    }
}
