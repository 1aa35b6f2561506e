//! Sound speed profiles c(z) with exact first and second derivatives.
//!
//! Depth `z` points down. Every closed-form model is differentiated by hand;
//! tabulated profiles go through a natural cubic spline so that c″ exists and
//! the acoustic Gaussian curvature K = c·c″ − (c′)² stays finite.

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spline::CubicSpline;

/// Default half-width of the `Flat` band used by [`SoundSpeedProfile::classify`], in 1/s².
pub const DEFAULT_FLAT_TOLERANCE: f64 = 1e-12;

/// Closed-form and tabulated sound speed models.
#[derive(Debug, Clone, PartialEq)]
pub enum SspModel {
    Constant { c0: f64 },
    /// c = c0 + γ·z
    Linear { c0: f64, gradient: f64 },
    /// c = c0·(1 + ε(z̄ + e^{−z̄} − 1)), z̄ = (z − z_axis)/scale
    Munk { c0: f64, epsilon: f64, z_axis: f64, scale: f64 },
    /// c = c0·cosh((z − z_axis)/scale)
    CoshDuct { c0: f64, z_axis: f64, scale: f64 },
    /// c = c0·sinh((z − z_ref)/scale)
    Sinh { c0: f64, z_ref: f64, scale: f64 },
    /// c = c0·cos((z − z_ref)/scale)
    Cos { c0: f64, z_ref: f64, scale: f64 },
    /// c = c0·sin((z − z_ref)/scale)
    Sin { c0: f64, z_ref: f64, scale: f64 },
    Tabulated(CubicSpline),
}

/// Depth-dependent density ρ(z) in kg/m³.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Constant(f64),
    Linear { rho0: f64, gradient: f64 },
    Tabulated(CubicSpline),
}

impl Density {
    fn eval(&self, z: f64) -> (f64, f64) {
        match self {
            Density::Constant(rho) => (*rho, 0.0),
            Density::Linear { rho0, gradient } => (rho0 + gradient * z, *gradient),
            Density::Tabulated(spline) => {
                let zc = z.clamp(spline.x_min(), spline.x_max());
                let (v, d, _) = spline.eval(zc);
                (v, d)
            }
        }
    }
}

/// Profile value and derivatives at one depth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SspEval {
    /// Sound speed [m/s].
    pub c: f64,
    /// dc/dz [1/s].
    pub dc: f64,
    /// d²c/dz² [1/(m·s)].
    pub d2c: f64,
    pub rho: Option<f64>,
    pub drho: Option<f64>,
}

impl SspEval {
    /// Acoustic Gaussian curvature K = c·c″ − (c′)² of the Fermat metric [1/s²].
    pub fn curvature(&self) -> f64 {
        self.c * self.d2c - self.dc * self.dc
    }
}

/// Sign class of the acoustic curvature at a depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DuctClass {
    /// K > 0: rays refocus (sphere-like).
    ConvergentDuct,
    /// K < 0: rays diverge (hyperbolic).
    DivergenceZone,
    /// |K| below the tolerance band.
    Flat,
}

/// Caustic spacing predicted from the local curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CzDistance {
    /// π·c·K^{−1/2} [m].
    pub half_wavelength: f64,
    /// π·(c/c″)^{1/2} [m], available when c″ > 0.
    pub second_derivative_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundSpeedProfile {
    model: SspModel,
    density: Option<Density>,
    z_min: f64,
    z_max: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidProfile(format!("{name} must be finite, got {v}")))
    }
}

impl SoundSpeedProfile {
    fn with_model(model: SspModel, z_min: f64, z_max: f64) -> Self {
        Self { model, density: None, z_min, z_max }
    }

    pub fn constant(c0: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        Ok(Self::with_model(SspModel::Constant { c0 }, f64::NEG_INFINITY, f64::INFINITY))
    }

    /// c(z) = c0 + γ·z; the interval is cut where c reaches zero.
    pub fn linear(c0: f64, gradient: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        check_finite("gradient", gradient)?;
        let (lo, hi) = if gradient > 0.0 {
            (-c0 / gradient, f64::INFINITY)
        } else if gradient < 0.0 {
            (f64::NEG_INFINITY, -c0 / gradient)
        } else {
            (f64::NEG_INFINITY, f64::INFINITY)
        };
        Ok(Self::with_model(SspModel::Linear { c0, gradient }, lo, hi))
    }

    pub fn munk(c0: f64, epsilon: f64, z_axis: f64, scale: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        check_positive("scale", scale)?;
        check_finite("z_axis", z_axis)?;
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidProfile(format!("epsilon must be >= 0, got {epsilon}")));
        }
        Ok(Self::with_model(
            SspModel::Munk { c0, epsilon, z_axis, scale },
            f64::NEG_INFINITY,
            f64::INFINITY,
        ))
    }

    pub fn cosh_duct(c0: f64, z_axis: f64, scale: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        check_positive("scale", scale)?;
        check_finite("z_axis", z_axis)?;
        Ok(Self::with_model(
            SspModel::CoshDuct { c0, z_axis, scale },
            f64::NEG_INFINITY,
            f64::INFINITY,
        ))
    }

    /// c = c0·sinh((z − z_ref)/W), positive only below `z_ref`.
    pub fn sinh(c0: f64, z_ref: f64, scale: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        check_positive("scale", scale)?;
        check_finite("z_ref", z_ref)?;
        Ok(Self::with_model(SspModel::Sinh { c0, z_ref, scale }, z_ref, f64::INFINITY))
    }

    /// c = c0·cos((z − z_ref)/W), positive on |z − z_ref| < πW/2.
    pub fn cos(c0: f64, z_ref: f64, scale: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        check_positive("scale", scale)?;
        check_finite("z_ref", z_ref)?;
        let half = FRAC_PI_2 * scale;
        Ok(Self::with_model(SspModel::Cos { c0, z_ref, scale }, z_ref - half, z_ref + half))
    }

    /// c = c0·sin((z − z_ref)/W), positive on z_ref < z < z_ref + πW.
    pub fn sin(c0: f64, z_ref: f64, scale: f64) -> Result<Self> {
        check_positive("c0", c0)?;
        check_positive("scale", scale)?;
        check_finite("z_ref", z_ref)?;
        Ok(Self::with_model(SspModel::Sin { c0, z_ref, scale }, z_ref, z_ref + PI * scale))
    }

    pub fn tabulated(depths: Vec<f64>, speeds: Vec<f64>) -> Result<Self> {
        if speeds.iter().any(|&c| !(c > 0.0)) {
            return Err(Error::InvalidProfile("tabulated speeds must be positive".into()));
        }
        let spline = CubicSpline::natural(depths, speeds)?;
        let (lo, hi) = (spline.x_min(), spline.x_max());
        Ok(Self::with_model(SspModel::Tabulated(spline), lo, hi))
    }

    /// Reads `depth_m,speed_mps[,density]` rows after a mandatory header row.
    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(reader);
        let ncols = rdr.headers()?.len();
        if !(2..=3).contains(&ncols) {
            return Err(Error::InvalidProfile(format!(
                "profile CSV needs 2 or 3 columns, header has {ncols}"
            )));
        }
        let (mut depths, mut speeds, mut rhos) = (Vec::new(), Vec::new(), Vec::new());
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                record[i].parse::<f64>().map_err(|e| {
                    Error::InvalidProfile(format!("row {}: column {}: {e}", line + 2, i + 1))
                })
            };
            depths.push(parse(0)?);
            speeds.push(parse(1)?);
            if ncols == 3 {
                rhos.push(parse(2)?);
            }
        }
        let profile = Self::tabulated(depths.clone(), speeds)?;
        if ncols == 3 {
            if rhos.iter().any(|&r| !(r > 0.0)) {
                return Err(Error::InvalidProfile("densities must be positive".into()));
            }
            let spline = CubicSpline::natural(depths, rhos)?;
            return Ok(profile.with_density(Density::Tabulated(spline)));
        }
        Ok(profile)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    /// Restricts the valid interval; the result is the intersection with the
    /// model's own interval.
    pub fn with_domain(mut self, z_min: f64, z_max: f64) -> Result<Self> {
        if z_min.is_nan() || z_max.is_nan() || z_min >= z_max {
            return Err(Error::InvalidProfile(format!("empty depth interval [{z_min}, {z_max}]")));
        }
        let lo = self.z_min.max(z_min);
        let hi = self.z_max.min(z_max);
        if lo >= hi {
            return Err(Error::InvalidProfile(format!(
                "interval [{z_min}, {z_max}] does not overlap the model interval [{}, {}]",
                self.z_min, self.z_max
            )));
        }
        self.z_min = lo;
        self.z_max = hi;
        Ok(self)
    }

    pub fn with_density(mut self, density: Density) -> Self {
        self.density = Some(density);
        self
    }

    pub fn model(&self) -> &SspModel {
        &self.model
    }

    pub fn density(&self) -> Option<&Density> {
        self.density.as_ref()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.z_min, self.z_max)
    }

    pub fn contains(&self, z: f64) -> bool {
        z >= self.z_min && z <= self.z_max
    }

    /// Sound speed and its derivatives at depth `z`.
    pub fn eval(&self, z: f64) -> Result<SspEval> {
        if !self.contains(z) {
            return Err(Error::OutOfDomain { z, z_min: self.z_min, z_max: self.z_max });
        }
        let (c, dc, d2c) = match &self.model {
            SspModel::Constant { c0 } => (*c0, 0.0, 0.0),
            SspModel::Linear { c0, gradient } => (c0 + gradient * z, *gradient, 0.0),
            SspModel::Munk { c0, epsilon, z_axis, scale } => {
                let zb = (z - z_axis) / scale;
                let e = (-zb).exp();
                (
                    c0 * (1.0 + epsilon * (zb + e - 1.0)),
                    c0 * epsilon * (1.0 - e) / scale,
                    c0 * epsilon * e / (scale * scale),
                )
            }
            SspModel::CoshDuct { c0, z_axis, scale } => {
                let u = (z - z_axis) / scale;
                let (ch, sh) = (u.cosh(), u.sinh());
                (c0 * ch, c0 * sh / scale, c0 * ch / (scale * scale))
            }
            SspModel::Sinh { c0, z_ref, scale } => {
                let u = (z - z_ref) / scale;
                let (ch, sh) = (u.cosh(), u.sinh());
                (c0 * sh, c0 * ch / scale, c0 * sh / (scale * scale))
            }
            SspModel::Cos { c0, z_ref, scale } => {
                let u = (z - z_ref) / scale;
                let (s, co) = u.sin_cos();
                (c0 * co, -c0 * s / scale, -c0 * co / (scale * scale))
            }
            SspModel::Sin { c0, z_ref, scale } => {
                let u = (z - z_ref) / scale;
                let (s, co) = u.sin_cos();
                (c0 * s, c0 * co / scale, -c0 * s / (scale * scale))
            }
            SspModel::Tabulated(spline) => spline.eval(z),
        };
        if !(c > 0.0) {
            return Err(Error::NonPositiveSpeed { z, c });
        }
        let (rho, drho) = match &self.density {
            Some(d) => {
                let (r, dr) = d.eval(z);
                (Some(r), Some(dr))
            }
            None => (None, None),
        };
        Ok(SspEval { c, dc, d2c, rho, drho })
    }

    /// Sound speed only; convenience for oracles that must not see derivatives.
    pub fn speed(&self, z: f64) -> Result<f64> {
        self.eval(z).map(|e| e.c)
    }

    /// Acoustic Gaussian curvature K(z) = c·c″ − (c′)² [1/s²].
    pub fn curvature(&self, z: f64) -> Result<f64> {
        self.eval(z).map(|e| e.curvature())
    }

    /// Distance between caustics predicted by the local curvature.
    pub fn cz_distance(&self, z: f64) -> Result<CzDistance> {
        let e = self.eval(z)?;
        let k = e.curvature();
        if !(k > 0.0) {
            return Err(Error::NonPositiveCurvature { z, k });
        }
        let second_derivative_estimate = (e.d2c > 0.0).then(|| PI * (e.c / e.d2c).sqrt());
        Ok(CzDistance { half_wavelength: PI * e.c / k.sqrt(), second_derivative_estimate })
    }

    pub fn classify(&self, z: f64) -> Result<DuctClass> {
        self.classify_with(z, DEFAULT_FLAT_TOLERANCE)
    }

    pub fn classify_with(&self, z: f64, flat_tolerance: f64) -> Result<DuctClass> {
        let k = self.curvature(z)?;
        Ok(if k.abs() < flat_tolerance {
            DuctClass::Flat
        } else if k > 0.0 {
            DuctClass::ConvergentDuct
        } else {
            DuctClass::DivergenceZone
        })
    }

    /// The curvature when it is the same at every depth (the model spaces).
    pub fn constant_curvature(&self) -> Option<f64> {
        match &self.model {
            SspModel::Constant { .. } => Some(0.0),
            SspModel::Linear { gradient, .. } => Some(-gradient * gradient),
            SspModel::CoshDuct { c0, scale, .. } => Some(c0 * c0 / (scale * scale)),
            SspModel::Sinh { c0, scale, .. }
            | SspModel::Cos { c0, scale, .. }
            | SspModel::Sin { c0, scale, .. } => Some(-c0 * c0 / (scale * scale)),
            SspModel::Munk { .. } | SspModel::Tabulated(_) => None,
        }
    }

    /// The same medium moved down by `dz` metres.
    pub fn translated(&self, dz: f64) -> Result<Self> {
        let model = match &self.model {
            SspModel::Constant { c0 } => SspModel::Constant { c0: *c0 },
            SspModel::Linear { c0, gradient } => {
                SspModel::Linear { c0: c0 - gradient * dz, gradient: *gradient }
            }
            SspModel::Munk { c0, epsilon, z_axis, scale } => {
                SspModel::Munk { c0: *c0, epsilon: *epsilon, z_axis: z_axis + dz, scale: *scale }
            }
            SspModel::CoshDuct { c0, z_axis, scale } => {
                SspModel::CoshDuct { c0: *c0, z_axis: z_axis + dz, scale: *scale }
            }
            SspModel::Sinh { c0, z_ref, scale } => {
                SspModel::Sinh { c0: *c0, z_ref: z_ref + dz, scale: *scale }
            }
            SspModel::Cos { c0, z_ref, scale } => {
                SspModel::Cos { c0: *c0, z_ref: z_ref + dz, scale: *scale }
            }
            SspModel::Sin { c0, z_ref, scale } => {
                SspModel::Sin { c0: *c0, z_ref: z_ref + dz, scale: *scale }
            }
            SspModel::Tabulated(spline) => SspModel::Tabulated(CubicSpline::natural(
                spline.knots().iter().map(|z| z + dz).collect(),
                spline.values().to_vec(),
            )?),
        };
        let density = match &self.density {
            None => None,
            Some(Density::Constant(r)) => Some(Density::Constant(*r)),
            Some(Density::Linear { rho0, gradient }) => {
                Some(Density::Linear { rho0: rho0 - gradient * dz, gradient: *gradient })
            }
            Some(Density::Tabulated(s)) => Some(Density::Tabulated(CubicSpline::natural(
                s.knots().iter().map(|z| z + dz).collect(),
                s.values().to_vec(),
            )?)),
        };
        Ok(Self { model, density, z_min: self.z_min + dz, z_max: self.z_max + dz })
    }
}
