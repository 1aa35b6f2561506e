//! Ray tracing and paraxial spreading in depth-stratified sound-speed profiles.

pub mod beam;
pub mod error;
pub mod io;
pub mod ode;
pub mod paraxial;
pub mod quadrature;
pub mod ray;
pub mod snell;
pub mod spline;
pub mod ssp;
pub mod validate;

pub use error::{Error, Result};
pub use ray::{Horizon, RayPath, RaySample, RayState, Termination};
pub use ssp::{DuctClass, SoundSpeedProfile, SspEval};
