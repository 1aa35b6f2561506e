//! Gaussian-beam observables along a central ray: geometric transmission
//! loss, the transverse travel-time lag across the beam, and the beam field in
//! extrinsic (q, p) and intrinsic (Jacobi) variables.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paraxial::{ExtrinsicSpreading, IntrinsicSpreading, CAUSTIC_TOLERANCE};
use crate::ray::{RayPath, RaySample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// Source level, linear re 1 m².
    pub source_level: f64,
    /// Carrier frequency [Hz].
    pub frequency: f64,
    /// Launch-angle width of the ray tube [rad].
    #[serde(default = "default_fan_width")]
    pub elevation_width: f64,
    /// Azimuthal width of the ray tube [rad].
    #[serde(default = "default_fan_width")]
    pub azimuth_width: f64,
    /// Reference range of the source level [m].
    #[serde(default = "default_reference_range")]
    pub reference_range: f64,
}

fn default_fan_width() -> f64 {
    1e-3
}

fn default_reference_range() -> f64 {
    1.0
}

impl BeamConfig {
    pub fn new(source_level: f64, frequency: f64) -> Result<Self> {
        let cfg = Self {
            source_level,
            frequency,
            elevation_width: default_fan_width(),
            azimuth_width: default_fan_width(),
            reference_range: default_reference_range(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidProfile(format!("beam {name} must be positive, got {v}")))
            }
        };
        positive("source level", self.source_level)?;
        positive("frequency", self.frequency)?;
        positive("elevation width", self.elevation_width)?;
        positive("azimuth width", self.azimuth_width)?;
        positive("reference range", self.reference_range)
    }
}

/// Geometric transmission loss, linear re 1 m²; infinite on a caustic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmissionLoss {
    pub linear: f64,
    pub caustic: bool,
}

impl TransmissionLoss {
    /// −10·log10 of the linear ratio, so larger values mean more loss.
    pub fn db(&self) -> f64 {
        -10.0 * self.linear.log10()
    }
}

/// c_s·cos θ0 / (c0·r·q) at `point` for a ray launched from `source`, times
/// ρ_s/ρ0 when `include_density` is set and the profile carries a density.
pub fn transmission_loss(
    source: &RaySample,
    point: &RaySample,
    q: f64,
    include_density: bool,
) -> Result<TransmissionLoss> {
    let r = point.state.r - source.state.r;
    if r == 0.0 {
        return Err(Error::AtSource);
    }
    if q == 0.0 {
        return Ok(TransmissionLoss { linear: f64::INFINITY, caustic: true });
    }
    let cos0 = source.state.r_dot / source.ssp.c;
    let mut tl = point.ssp.c * cos0 / (source.ssp.c * r * q.abs());
    if include_density {
        if let (Some(rho_s), Some(rho_0)) = (point.ssp.rho, source.ssp.rho) {
            tl *= rho_s / rho_0;
        }
    }
    Ok(TransmissionLoss { linear: tl, caustic: false })
}

/// δt_e = ½(p/q)·δη² [s].
pub fn extrinsic_delay(spreading: ExtrinsicSpreading, offset: f64) -> Result<f64> {
    if spreading.q == 0.0 {
        return Err(Error::AtCaustic);
    }
    Ok(0.5 * spreading.p / spreading.q * offset * offset)
}

/// The same lag from intrinsic variables, ½(ع̇/ع + c′ζ)·(δη/c)², with ζ = dz/ds.
pub fn extrinsic_delay_from_intrinsic(
    spreading: IntrinsicSpreading,
    c: f64,
    dc: f64,
    zeta: f64,
    offset: f64,
) -> Result<f64> {
    if spreading.value == 0.0 {
        return Err(Error::AtCaustic);
    }
    let mu = offset / c;
    Ok(0.5 * (spreading.rate / spreading.value + dc * zeta) * mu * mu)
}

/// δt_i = ½(ع̇/ع)·δμ² along the intrinsic normal geodesic [s].
pub fn intrinsic_delay(spreading: IntrinsicSpreading, intrinsic_offset: f64) -> Result<f64> {
    if spreading.value == 0.0 {
        return Err(Error::AtCaustic);
    }
    Ok(0.5 * spreading.rate / spreading.value * intrinsic_offset * intrinsic_offset)
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// One point of the beam field, offset `offset` metres along the ray normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSample {
    pub t: f64,
    pub s: f64,
    pub offset: f64,
    /// Offset in travel time, δη/c [s].
    pub intrinsic_offset: f64,
    pub r: f64,
    pub z: f64,
    pub amplitude: f64,
    pub amplitude_intrinsic: f64,
    /// Wrapped phase 2πf_c(t + δt_e).
    pub phase: f64,
    /// Wrapped phase 2πf_c(t + δt_i).
    pub phase_intrinsic: f64,
    pub delay: f64,
    pub delay_intrinsic: f64,
    /// Caustics passed before this sample; amplitudes use |q| past the first.
    pub caustics_crossed: usize,
}

/// Beam field at every path sample and every normal offset. Samples on a
/// caustic or at the source are skipped.
pub fn beam_field(
    path: &RayPath,
    extrinsic: &[ExtrinsicSpreading],
    intrinsic: &[IntrinsicSpreading],
    config: &BeamConfig,
    offsets: &[f64],
) -> Result<Vec<BeamSample>> {
    config.validate()?;
    let samples = path.samples();
    if extrinsic.len() != samples.len() || intrinsic.len() != samples.len() {
        return Err(Error::GridMismatch(format!(
            "path has {} samples, spreading series have {} and {}",
            samples.len(),
            extrinsic.len(),
            intrinsic.len()
        )));
    }
    let source = path.first();
    let invariant = source.state.r_dot / (source.ssp.c * source.ssp.c);
    let omega = TAU * config.frequency;
    let mut out = Vec::with_capacity(samples.len() * offsets.len());
    let mut crossed = 0usize;
    for (i, smp) in samples.iter().enumerate() {
        let (ext, int) = (extrinsic[i], intrinsic[i]);
        if i > 0 && intrinsic[i - 1].value != 0.0 && intrinsic[i - 1].value * int.value < 0.0 {
            crossed += 1;
        }
        let r = smp.state.r - source.state.r;
        if r == 0.0 || ext.q == 0.0 || int.value.abs() < CAUSTIC_TOLERANCE {
            continue;
        }
        let tl = transmission_loss(source, smp, ext.q, false)?;
        let amplitude = (config.source_level * tl.linear).sqrt();
        let amplitude_intrinsic = (config.source_level * invariant / (r * int.value.abs())).sqrt();
        let (tr, tz) = smp.tangent();
        for &offset in offsets {
            let mu = offset / smp.ssp.c;
            let delay = extrinsic_delay(ext, offset)?;
            let delay_intrinsic = intrinsic_delay(int, mu)?;
            out.push(BeamSample {
                t: smp.state.t,
                s: smp.state.s,
                offset,
                intrinsic_offset: mu,
                r: smp.state.r - offset * tz,
                z: smp.state.z + offset * tr,
                amplitude,
                amplitude_intrinsic,
                phase: wrap_phase(omega * (smp.state.t + delay)),
                phase_intrinsic: wrap_phase(omega * (smp.state.t + delay_intrinsic)),
                delay,
                delay_intrinsic,
                caustics_crossed: crossed,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paraxial::{propagate_extrinsic, propagate_jacobi};
    use crate::ray::{trace, Horizon, DEFAULT_STEP};
    use crate::ssp::{Density, SoundSpeedProfile};
    use approx::assert_relative_eq;

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_relative_eq!(wrap_phase(-PI), PI);
        assert_relative_eq!(wrap_phase(3.0 * PI + 0.1), -PI + 0.1, epsilon = 1e-12);
        assert_eq!(wrap_phase(0.5), 0.5);
    }

    #[test]
    fn delays() {
        let e = ExtrinsicSpreading { q: 1500.0 * 2.0, p: 1.0 / 1500.0 };
        assert_eq!(extrinsic_delay(e, 0.0).unwrap(), 0.0);
        assert_relative_eq!(extrinsic_delay(e, 3.0).unwrap(), 9.0 / (2.0 * 1500.0f64.powi(2) * 2.0));
        let flat = IntrinsicSpreading { value: 2.0, rate: 1.0 };
        assert_relative_eq!(intrinsic_delay(flat, 0.01).unwrap(), 1e-4 / 4.0);
        let equator = IntrinsicSpreading { value: 0.5, rate: 0.0 };
        assert_eq!(intrinsic_delay(equator, 0.3).unwrap(), 0.0);
        assert!(matches!(extrinsic_delay(ExtrinsicSpreading { q: 0.0, p: 1.0 }, 1.0), Err(Error::AtCaustic)));
        assert!(matches!(intrinsic_delay(IntrinsicSpreading { value: 0.0, rate: 1.0 }, 1.0), Err(Error::AtCaustic)));
    }

    #[test]
    fn constant_profile_loss_and_density() {
        let p = SoundSpeedProfile::constant(1500.0).unwrap();
        let th = 0.2;
        let path = trace(&p, 0.0, 500.0, th, Horizon::Time(2.0), DEFAULT_STEP).unwrap();
        let ext = propagate_extrinsic(&p, &path).unwrap();
        let src = path.first();
        let mut prev = f64::INFINITY;
        for (smp, e) in path.samples().iter().zip(&ext).skip(1) {
            let tl = transmission_loss(src, smp, e.q, false).unwrap();
            let t = smp.state.t;
            assert_relative_eq!(tl.linear, th.cos() / (smp.state.r * 1500.0 * t), max_relative = 1e-10);
            assert!(tl.linear < prev);
            prev = tl.linear;
        }
        assert!(matches!(transmission_loss(src, src, 1.0, false), Err(Error::AtSource)));
        let last = path.last();
        assert!(transmission_loss(src, last, 0.0, false).unwrap().caustic);

        let dense = p.clone().with_density(Density::Linear { rho0: 1000.0, gradient: 1000.0 / 500.0 });
        let pd = trace(&dense, 0.0, 500.0, -0.3, Horizon::Time(0.5), DEFAULT_STEP).unwrap();
        let qd = propagate_extrinsic(&dense, &pd).unwrap();
        let i = pd.len() - 1;
        let plain = transmission_loss(pd.first(), &pd.samples()[i], qd[i].q, false).unwrap();
        let with_rho = transmission_loss(pd.first(), &pd.samples()[i], qd[i].q, true).unwrap();
        let ratio = pd.samples()[i].ssp.rho.unwrap() / pd.first().ssp.rho.unwrap();
        assert_relative_eq!(with_rho.linear / plain.linear, ratio, max_relative = 1e-14);
    }

    #[test]
    fn field_on_axis_and_symmetry() {
        let p = SoundSpeedProfile::munk(1500.0, 0.00737, 1300.0, 650.0).unwrap();
        let path = trace(&p, 0.0, 1300.0, 0.1, Horizon::Time(4.0), DEFAULT_STEP).unwrap();
        let ext = propagate_extrinsic(&p, &path).unwrap();
        let jac = propagate_jacobi(&p, &path).unwrap();
        let cfg = BeamConfig::new(4.0, 50.0).unwrap();
        let field = beam_field(&path, &ext, &jac, &cfg, &[-20.0, 0.0, 20.0]).unwrap();
        assert_eq!(field.len(), 3 * (path.len() - 1));
        for trio in field.chunks(3) {
            let on_axis = trio[1];
            assert_eq!(on_axis.delay, 0.0);
            assert_relative_eq!(on_axis.phase, wrap_phase(TAU * 50.0 * on_axis.t), epsilon = 1e-12);
            assert_eq!(trio[0].phase, trio[2].phase);
            assert_relative_eq!(on_axis.amplitude, on_axis.amplitude_intrinsic, max_relative = 1e-10);
        }
        let cfg2 = BeamConfig::new(8.0, 50.0).unwrap();
        let field2 = beam_field(&path, &ext, &jac, &cfg2, &[0.0]).unwrap();
        assert_relative_eq!(field2[10].amplitude.powi(2), 2.0 * field[31].amplitude.powi(2), max_relative = 1e-12);
        assert!(BeamConfig::new(0.0, 50.0).is_err());
        assert!(matches!(
            beam_field(&path, &ext[1..], &jac, &cfg, &[0.0]),
            Err(Error::GridMismatch(_))
        ));
    }
}
