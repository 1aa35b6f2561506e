use thiserror::Error;

/// Errors raised by profile evaluation, ray tracing and the paraxial solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("depth {z} m is outside the profile interval [{z_min}, {z_max}]")]
    OutOfDomain { z: f64, z_min: f64, z_max: f64 },

    #[error("sound speed {c} m/s at depth {z} m is not positive")]
    NonPositiveSpeed { z: f64, c: f64 },

    #[error("acoustic curvature {k} 1/s^2 at depth {z} m is not positive; no caustic spacing exists")]
    NonPositiveCurvature { z: f64, k: f64 },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("integration step must be positive and finite, got {0}")]
    InvalidStep(f64),

    #[error("linear profile gradient is zero")]
    ZeroGradient,

    #[error("target ({r} m, {z} m) is not reachable by a single-arc ray")]
    Unreachable { r: f64, z: f64 },

    #[error("closed form has no real branch: {0}")]
    InvalidBranch(String),

    #[error("ray path is unusable for paraxial integration: {0}")]
    GridMismatch(String),

    #[error("profile does not have constant curvature")]
    NotConstantCurvature,

    #[error("a turning point lies inside the depth leg [{z0}, {z}]")]
    TurningPointInsideLeg { z0: f64, z: f64 },

    #[error("a horizontal launch has no depth parameterization")]
    HorizontalRay,

    #[error("ray is horizontal at depth {z} m; the Snell form is singular there")]
    TurningPoint { z: f64 },

    #[error("fan rays left the profile interval at different times")]
    DegenerateFan,

    #[error("sample lies on a caustic (spreading is zero)")]
    AtCaustic,

    #[error("range is zero at the source")]
    AtSource,

    #[error("a fan ray left the profile interval before t = {t} s")]
    DomainExit { t: f64 },

    #[error("quadrature did not converge (estimated error {error:e})")]
    Quadrature { error: f64 },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
