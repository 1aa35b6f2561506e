//! Scenario files: JSON with a top-level `version: 1`; unknown fields are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stratray::beam::BeamConfig;
use stratray::ray::{Horizon, DEFAULT_STEP};
use stratray::ssp::Density;
use stratray::SoundSpeedProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant { c0: f64 },
    Linear { c0: f64, gradient: f64 },
    Munk { c0: f64, epsilon: f64, z_axis: f64, scale: f64 },
    CoshDuct { c0: f64, z_axis: f64, scale: f64 },
    Sinh { c0: f64, z_ref: f64, scale: f64 },
    Cos { c0: f64, z_ref: f64, scale: f64 },
    Sin { c0: f64, z_ref: f64, scale: f64 },
    /// CSV with `depth_m,speed_mps[,density]`; relative paths resolve against
    /// the scenario file.
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    #[serde(default)]
    pub r: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum AngleFan {
    /// Launch elevations in degrees.
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl AngleFan {
    /// Launch angles in degrees, sorted ascending.
    pub fn degrees(&self) -> Vec<f64> {
        let mut deg = match self {
            AngleFan::List(v) => v.clone(),
            AngleFan::Linspace { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
            },
        };
        deg.sort_by(f64::total_cmp);
        deg
    }

    /// Launch angles in radians, sorted ascending.
    pub fn radians(&self) -> Vec<f64> {
        self.degrees().into_iter().map(f64::to_radians).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HorizonSpec {
    Time(f64),
    Arclength(f64),
    Range(f64),
}

impl HorizonSpec {
    pub fn horizon(self) -> Horizon {
        match self {
            HorizonSpec::Time(v) => Horizon::Time(v),
            HorizonSpec::Arclength(v) => Horizon::Arclength(v),
            HorizonSpec::Range(v) => Horizon::Range(v),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub version: u32,
    pub profile: ProfileSpec,
    /// Optional `[z_min, z_max]` restricting the profile interval.
    #[serde(default)]
    pub domain: Option<[f64; 2]>,
    /// Optional linear density ρ0 + g·z [kg/m³].
    #[serde(default)]
    pub density: Option<DensitySpec>,
    pub source: Source,
    pub angles: AngleFan,
    pub horizon: HorizonSpec,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub beam: Option<BeamConfig>,
    /// Normal offsets of the beam field [m].
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    /// Output directory, overridden by `--out`.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub rho0: f64,
    #[serde(default)]
    pub gradient: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

fn default_offsets() -> Vec<f64> {
    vec![0.0]
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut sc: Scenario = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        if let ProfileSpec::Tabulated { path: csv } = &mut sc.profile {
            if csv.is_relative() {
                if let Some(dir) = path.parent() {
                    *csv = dir.join(&*csv);
                }
            }
        }
        sc.check()?;
        Ok(sc)
    }

    pub fn check(&self) -> Result<(), String> {
        if self.version != 1 {
            return Err(format!("unsupported scenario version {}", self.version));
        }
        if self.angles.radians().is_empty() {
            return Err("angle fan is empty".into());
        }
        if self.angles.radians().iter().any(|a| !a.is_finite() || a.abs() > std::f64::consts::FRAC_PI_2) {
            return Err("launch angles must lie in [-90, 90] degrees".into());
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(format!("step must be positive, got {}", self.step));
        }
        let (HorizonSpec::Time(h) | HorizonSpec::Arclength(h) | HorizonSpec::Range(h)) = self.horizon;
        if !(h.is_finite() && h > 0.0) {
            return Err(format!("horizon must be positive, got {h}"));
        }
        if let Some(b) = &self.beam {
            b.validate().map_err(|e| e.to_string())?;
        }
        if self.offsets.iter().any(|o| !o.is_finite()) {
            return Err("beam offsets must be finite".into());
        }
        self.profile().map(|_| ())
    }

    pub fn profile(&self) -> Result<SoundSpeedProfile, String> {
        let p = match &self.profile {
            ProfileSpec::Constant { c0 } => SoundSpeedProfile::constant(*c0),
            ProfileSpec::Linear { c0, gradient } => SoundSpeedProfile::linear(*c0, *gradient),
            ProfileSpec::Munk { c0, epsilon, z_axis, scale } => SoundSpeedProfile::munk(*c0, *epsilon, *z_axis, *scale),
            ProfileSpec::CoshDuct { c0, z_axis, scale } => SoundSpeedProfile::cosh_duct(*c0, *z_axis, *scale),
            ProfileSpec::Sinh { c0, z_ref, scale } => SoundSpeedProfile::sinh(*c0, *z_ref, *scale),
            ProfileSpec::Cos { c0, z_ref, scale } => SoundSpeedProfile::cos(*c0, *z_ref, *scale),
            ProfileSpec::Sin { c0, z_ref, scale } => SoundSpeedProfile::sin(*c0, *z_ref, *scale),
            ProfileSpec::Tabulated { path } => SoundSpeedProfile::from_csv_path(path),
        }
        .map_err(|e| e.to_string())?;
        let p = match self.domain {
            Some([lo, hi]) => p.with_domain(lo, hi).map_err(|e| e.to_string())?,
            None => p,
        };
        Ok(match self.density {
            Some(d) => p.with_density(Density::Linear { rho0: d.rho0, gradient: d.gradient }),
            None => p,
        })
    }
}
