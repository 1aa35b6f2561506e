//! Snell's-law form of a stratified ray: range, spreading and transverse phase
//! as depth integrals of the invariant a = cos θ0 / c(z0), plus the ray-angle
//! spreading obtained from a traced fan.
//!
//! Depth legs run between turning depths (where a·c = 1). Near a turning depth
//! the integrable 1/√ singularity is removed with z = z* ∓ v².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::ray::{trace, Horizon, RayPath};
use crate::ssp::SoundSpeedProfile;

/// Absolute tolerance of the range quadrature [m].
pub const RANGE_TOLERANCE: f64 = 1e-6;
/// Default half-width of the finite-difference ray fan [rad].
pub const DEFAULT_FAN_HALF_WIDTH: f64 = 1e-5;

const SEARCH_LIMIT: f64 = 1e7;
const MIN_SIN: f64 = 1e-9;
/// Below this local |sin θ| the depth-parameterized spreading is not evaluated.
const TURNING_SIN: f64 = 1e-6;

/// A ray in depth parameterization, valid between turning depths.
#[derive(Debug, Clone)]
pub struct SnellRay<'a> {
    profile: &'a SoundSpeedProfile,
    z0: f64,
    theta0: f64,
    c0: f64,
    invariant: f64,
    /// +1 when the ray first moves deeper, −1 when it first moves up.
    heading: f64,
    ahead: Option<f64>,
    behind: Option<f64>,
}

/// (∂r/∂θ0) at fixed depth and its depth derivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleDerivative {
    pub value: f64,
    pub depth_derivative: f64,
}

/// Spreading in Snell form: q [m/rad] and the intrinsic q/c [s/rad].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnellSpreading {
    pub q: f64,
    pub intrinsic: f64,
}

impl<'a> SnellRay<'a> {
    pub fn new(profile: &'a SoundSpeedProfile, z0: f64, theta0: f64) -> Result<Self> {
        let c0 = profile.speed(z0)?;
        if theta0.sin().abs() < MIN_SIN {
            return Err(Error::HorizontalRay);
        }
        let mut ray = Self {
            profile,
            z0,
            theta0,
            c0,
            invariant: theta0.cos() / c0,
            heading: -theta0.sin().signum(),
            ahead: None,
            behind: None,
        };
        ray.ahead = ray.find_turning(ray.heading)?;
        ray.behind = ray.find_turning(-ray.heading)?;
        Ok(ray)
    }

    pub fn z0(&self) -> f64 {
        self.z0
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// The Snell invariant a [s/m].
    pub fn invariant(&self) -> f64 {
        self.invariant
    }

    pub fn heading(&self) -> f64 {
        self.heading
    }

    /// First turning depth in the launch direction, if any inside the profile.
    pub fn turning_depth(&self) -> Option<f64> {
        self.ahead
    }

    /// First turning depth against the launch direction, if any.
    pub fn turning_depth_behind(&self) -> Option<f64> {
        self.behind
    }

    /// 1 − a²c(z)², the squared sine of the local ray angle.
    fn sin2(&self, c: f64) -> f64 {
        let ac = self.invariant * c;
        (1.0 - ac) * (1.0 + ac)
    }

    fn find_turning(&self, direction: f64) -> Result<Option<f64>> {
        let (lo_dom, hi_dom) = self.profile.domain();
        let limit = if direction > 0.0 {
            hi_dom.min(self.z0 + SEARCH_LIMIT)
        } else {
            lo_dom.max(self.z0 - SEARCH_LIMIT)
        };
        let excess = |z: f64| -> Result<f64> { Ok(self.invariant * self.profile.speed(z)? - 1.0) };
        let mut dist = 0.0f64;
        let mut z_prev = self.z0;
        loop {
            let step = (1e-3 * dist).clamp(1.0, 100.0);
            dist += step;
            let mut z = self.z0 + direction * dist;
            let at_end = (z - limit) * direction >= 0.0;
            if at_end {
                z = limit;
            }
            // Stay clear of the open ends of a natural domain.
            let value = match excess(z) {
                Ok(v) => v,
                Err(_) if at_end => return Ok(None),
                Err(e) => return Err(e),
            };
            if value >= 0.0 {
                // Keep the bracket end on the propagating side.
                let (mut inside, mut outside) = (z_prev, z);
                for _ in 0..200 {
                    let mid = 0.5 * (inside + outside);
                    if mid == inside || mid == outside {
                        break;
                    }
                    if excess(mid)? < 0.0 {
                        inside = mid;
                    } else {
                        outside = mid;
                    }
                }
                return Ok(Some(inside));
            }
            if at_end {
                return Ok(None);
            }
            z_prev = z;
        }
    }

    /// |∫ f(c(z)) dz| over [za, zb], substituting z = zt − d·v² when the span
    /// ends on the turning depth zt.
    fn span(&self, za: f64, zb: f64, turning: Option<f64>, f: impl Fn(f64) -> f64) -> Result<f64> {
        let profile = self.profile;
        let q = match turning {
            None => integrate(|z| Ok(f(profile.speed(z)?)), za, zb, RANGE_TOLERANCE, 1e-13)?,
            Some(zt) => {
                let d = if zt >= za.min(zb) && zt >= za.max(zb) { 1.0 } else { -1.0 };
                let va = (d * (zt - za)).max(0.0).sqrt();
                let vb = (d * (zt - zb)).max(0.0).sqrt();
                integrate(
                    |v| Ok(f(profile.speed(zt - d * v * v)?) * 2.0 * v),
                    vb,
                    va,
                    RANGE_TOLERANCE,
                    1e-13,
                )?
            }
        };
        Ok(q.value.abs())
    }

    fn range_density(&self) -> impl Fn(f64) -> f64 {
        let a = self.invariant;
        move |c: f64| {
            let ac = a * c;
            ac / ((1.0 - ac) * (1.0 + ac)).max(f64::MIN_POSITIVE).sqrt()
        }
    }

    fn time_density(&self) -> impl Fn(f64) -> f64 {
        let a = self.invariant;
        move |c: f64| {
            let ac = a * c;
            1.0 / (c * ((1.0 - ac) * (1.0 + ac)).max(f64::MIN_POSITIVE).sqrt())
        }
    }

    /// (start, end turning depth, direction) of leg `leg`.
    fn leg(&self, leg: usize) -> Result<(f64, Option<f64>, f64)> {
        if leg == 0 {
            return Ok((self.z0, self.ahead, self.heading));
        }
        let (first, second) = if leg % 2 == 1 { (self.ahead, self.behind) } else { (self.behind, self.ahead) };
        let start = first.ok_or_else(|| Error::InvalidBranch(format!("the ray has no leg {leg}")))?;
        if leg >= 2 && second.is_none() {
            return Err(Error::InvalidBranch(format!("the ray has no leg {leg}")));
        }
        let direction = if leg % 2 == 1 { -self.heading } else { self.heading };
        Ok((start, second, direction))
    }

    fn check_on_leg(&self, start: f64, end: Option<f64>, direction: f64, z: f64) -> Result<()> {
        if (z - start) * direction < 0.0 {
            return Err(Error::InvalidBranch(format!("depth {z} is behind the leg starting at {start}")));
        }
        if let Some(zt) = end {
            if (z - zt) * direction > 0.0 {
                return Err(Error::TurningPointInsideLeg { z0: start, z });
            }
        }
        Ok(())
    }

    fn leg_integral(&self, leg: usize, z: f64, f: impl Fn(f64) -> f64 + Copy) -> Result<f64> {
        let (start, end, direction) = self.leg(leg)?;
        self.check_on_leg(start, end, direction, z)?;
        if leg == 0 {
            return self.span(start, z, end, f);
        }
        // Both ends of a later leg may be singular; split at the middle.
        match end {
            Some(zt) => {
                let mid = 0.5 * (start + zt);
                if (z - mid) * direction <= 0.0 {
                    self.span(start, z, Some(start), f)
                } else {
                    Ok(self.span(start, mid, Some(start), f)? + self.span(mid, z, Some(zt), f)?)
                }
            }
            None => self.span(start, z, Some(start), f),
        }
    }

    fn full_leg(&self, leg: usize, f: impl Fn(f64) -> f64 + Copy) -> Result<f64> {
        let (_, end, _) = self.leg(leg)?;
        let zt = end.ok_or_else(|| Error::InvalidBranch(format!("leg {leg} never turns")))?;
        self.leg_integral(leg, zt, f)
    }

    /// Range travelled from the source to depth z on the first leg [m].
    pub fn range_to(&self, z: f64) -> Result<f64> {
        self.range_on_leg(0, z)
    }

    /// Range to depth z on leg `leg`, counting legs between turning depths.
    pub fn range_on_leg(&self, leg: usize, z: f64) -> Result<f64> {
        let f = self.range_density();
        let done: f64 = (0..leg).map(|j| self.full_leg(j, &f)).sum::<Result<f64>>()?;
        Ok(done + self.leg_integral(leg, z, &f)?)
    }

    /// Travel time to depth z on leg `leg` [s].
    pub fn travel_time_on_leg(&self, leg: usize, z: f64) -> Result<f64> {
        let f = self.time_density();
        let done: f64 = (0..leg).map(|j| self.full_leg(j, &f)).sum::<Result<f64>>()?;
        Ok(done + self.leg_integral(leg, z, &f)?)
    }

    fn first_leg_angle(&self, z: f64) -> Result<(f64, f64)> {
        let c = self.profile.speed(z)?;
        let s2 = self.sin2(c);
        if s2.max(0.0).sqrt() < TURNING_SIN {
            return Err(Error::TurningPoint { z });
        }
        self.check_on_leg(self.z0, self.ahead, self.heading, z)?;
        Ok((c, s2))
    }

    /// (∂r/∂θ0)_z on the first leg and its depth derivative.
    pub fn angle_derivative(&self, z: f64) -> Result<AngleDerivative> {
        let (c, s2) = self.first_leg_angle(z)?;
        let scale = self.theta0.sin().abs() / self.c0;
        let profile = self.profile;
        let density = |c: f64| {
            let s2 = self.sin2(c);
            c / (s2 * s2.sqrt())
        };
        let integral = integrate(|zz| Ok(density(profile.speed(zz)?)), self.z0, z, 1e-300, 1e-12)?;
        Ok(AngleDerivative { value: scale * integral.value, depth_derivative: scale * c / (s2 * s2.sqrt()) })
    }

    /// dz/ds at depth z on the first leg.
    fn slope(&self, s2: f64) -> f64 {
        self.heading * s2.sqrt()
    }

    /// Spreading q = (∂r/∂θ0)_z · dz/ds and its intrinsic form q/c.
    pub fn spreading(&self, z: f64) -> Result<SnellSpreading> {
        let (c, s2) = self.first_leg_angle(z)?;
        let d = self.angle_derivative(z)?;
        let q = d.value * self.slope(s2);
        Ok(SnellSpreading { q, intrinsic: q / c })
    }

    /// Transverse phase p/q [s/m²] from the depth integrals.
    pub fn phase(&self, z: f64) -> Result<f64> {
        if z == self.z0 {
            return Err(Error::AtSource);
        }
        let (c, s2) = self.first_leg_angle(z)?;
        let d = self.angle_derivative(z)?;
        let dc = self.profile.eval(z)?.dc;
        let zeta = self.slope(s2);
        let ac = self.invariant * c;
        Ok(d.depth_derivative / d.value * zeta / c - dc / (c * c) * ac * ac / zeta)
    }
}

/// Range at depth z on the first leg of the ray launched at θ0 from z0.
pub fn range_integral(profile: &SoundSpeedProfile, z0: f64, theta0: f64, z: f64) -> Result<f64> {
    SnellRay::new(profile, z0, theta0)?.range_to(z)
}

pub fn dr_dtheta0_at_z(profile: &SoundSpeedProfile, z0: f64, theta0: f64, z: f64) -> Result<AngleDerivative> {
    SnellRay::new(profile, z0, theta0)?.angle_derivative(z)
}

pub fn spreading_snell(profile: &SoundSpeedProfile, z0: f64, theta0: f64, z: f64) -> Result<SnellSpreading> {
    SnellRay::new(profile, z0, theta0)?.spreading(z)
}

pub fn phase_snell(profile: &SoundSpeedProfile, z0: f64, theta0: f64, z: f64) -> Result<f64> {
    SnellRay::new(profile, z0, theta0)?.phase(z)
}

/// One sample of the ray-angle spreading along a central ray.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleSpreading {
    pub s: f64,
    /// (∂θ/∂θ0) at fixed arclength.
    pub angle_sensitivity: f64,
    /// ∫₀ˢ (∂θ/∂θ0) ds′.
    pub q: f64,
    /// c·p/q = (∂θ/∂θ0)/q; `None` at the source.
    pub phase: Option<f64>,
}

/// Ray-angle spreading along `path`, with (∂θ/∂θ0)_s from two rays launched at
/// θ0 ± `half_width` and traced with `step`.
pub fn spreading_angle(
    profile: &SoundSpeedProfile,
    path: &RayPath,
    half_width: f64,
    step: f64,
) -> Result<Vec<AngleSpreading>> {
    let start = path.first().state;
    let s_end = path.last().state.s - start.s;
    let fan = |sign: f64| {
        trace(profile, start.r, start.z, path.launch_angle() + sign * half_width, Horizon::Arclength(s_end), step)
    };
    let (plus, minus) = (fan(1.0)?, fan(-1.0)?);
    let angle_at = |p: &RayPath, s: f64| -> Result<f64> {
        let (_, d) = p.state_at_arclength(s).ok_or(Error::DegenerateFan)?;
        Ok((-d.z_dot).atan2(d.r_dot))
    };
    let mut out = Vec::with_capacity(path.len());
    let mut q = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for smp in path.samples() {
        let s = smp.state.s - start.s;
        let sens = (angle_at(&plus, s)? - angle_at(&minus, s)?) / (2.0 * half_width);
        if let Some((s_prev, sens_prev)) = prev {
            q += 0.5 * (s - s_prev) * (sens + sens_prev);
        }
        prev = Some((s, sens));
        let phase = (q != 0.0).then(|| sens / q);
        out.push(AngleSpreading { s, angle_sensitivity: sens, q, phase });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_profile_closed_forms() {
        let p = SoundSpeedProfile::constant(1500.0).unwrap();
        let (z0, th) = (1000.0, 0.4);
        let z = 400.0;
        assert_relative_eq!(range_integral(&p, z0, th, z).unwrap(), (z0 - z) / th.tan(), max_relative = 1e-12);
        let len = (z0 - z) / th.sin();
        let s = spreading_snell(&p, z0, th, z).unwrap();
        assert_relative_eq!(s.q, len, max_relative = 1e-10);
        assert_relative_eq!(s.intrinsic, len / 1500.0, max_relative = 1e-10);
        let t = len / 1500.0;
        assert_relative_eq!(phase_snell(&p, z0, th, z).unwrap(), 1.0 / (1500.0f64.powi(2) * t), max_relative = 1e-10);
        let d = dr_dtheta0_at_z(&p, z0, th, z).unwrap();
        assert!(d.value < 0.0);
        assert_relative_eq!(d.value, -(z0 - z) / th.sin().powi(2), max_relative = 1e-10);
        assert_eq!(dr_dtheta0_at_z(&p, z0, th, z0).unwrap().value, 0.0);
    }

    #[test]
    fn errors() {
        let p = SoundSpeedProfile::linear(1500.0, 0.05).unwrap().with_domain(0.0, 5000.0).unwrap();
        assert!(matches!(range_integral(&p, 1000.0, 0.0, 500.0), Err(Error::HorizontalRay)));
        // Downward launch turns at a·c = 1.
        let ray = SnellRay::new(&p, 1000.0, -0.2).unwrap();
        let zt = ray.turning_depth().unwrap();
        assert_relative_eq!(ray.invariant() * p.speed(zt).unwrap(), 1.0, max_relative = 1e-13);
        assert!(matches!(ray.range_to(zt + 10.0), Err(Error::TurningPointInsideLeg { .. })));
        assert!(matches!(ray.spreading(zt), Err(Error::TurningPoint { .. })));
        assert!(ray.range_to(zt).is_ok());
    }

    #[test]
    fn turning_leg_matches_linear_circle() {
        let p = SoundSpeedProfile::linear(1500.0, 0.05).unwrap().with_domain(0.0, 10_000.0).unwrap();
        let (z0, th) = (1000.0, -0.2);
        let ray = SnellRay::new(&p, z0, th).unwrap();
        let zt = ray.turning_depth().unwrap();
        // Horizontal distance from launch to the bottom of the circle.
        let zg = z0 + 1500.0 / 0.05;
        let expected = zg * th.abs().tan();
        assert!((ray.range_to(zt).unwrap() - expected).abs() < 1e-5);
        assert!((ray.range_on_leg(1, z0).unwrap() - 2.0 * expected).abs() < 1e-5);
        assert!(matches!(ray.range_on_leg(2, z0), Err(Error::InvalidBranch(_))));
    }
}
