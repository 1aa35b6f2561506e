//! Central rays from the Christoffel (geodesic) equations of the Fermat metric
//! g = c⁻²(dr² + dz²), plus the closed forms available for a linear profile.
//!
//! Angle convention: the elevation θ = atan2(−ż, ṙ), so θ > 0 launches the
//! ray towards smaller depth, with initial velocity c(z0)·(cos θ0, −sin θ0).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{hermite, rk4_step};
use crate::ssp::{SoundSpeedProfile, SspEval};

/// Default time step of the ray integrator [s] (about 1.5 m of path).
pub const DEFAULT_STEP: f64 = 1e-3;

const MAX_STEPS: usize = 50_000_000;
const BISECTION_ITERATIONS: usize = 80;

/// Instantaneous ray point, parameterized by travel time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayState {
    pub r: f64,
    pub z: f64,
    pub r_dot: f64,
    pub z_dot: f64,
    pub t: f64,
    pub s: f64,
}

impl RayState {
    /// Elevation angle atan2(−ż, ṙ).
    pub fn theta(&self) -> f64 {
        (-self.z_dot).atan2(self.r_dot)
    }

    pub fn speed(&self) -> f64 {
        self.r_dot.hypot(self.z_dot)
    }

    /// Unit tangent (dr/ds, dz/ds).
    pub fn tangent(&self) -> (f64, f64) {
        let v = self.speed();
        (self.r_dot / v, self.z_dot / v)
    }
}

/// A ray point together with the profile evaluated at its depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub state: RayState,
    pub ssp: SspEval,
}

impl RaySample {
    /// (r̈, z̈) from the ray equations at this sample.
    pub fn acceleration(&self) -> (f64, f64) {
        let RayState { r_dot, z_dot, .. } = self.state;
        let g = self.ssp.dc / self.ssp.c;
        (2.0 * g * r_dot * z_dot, -g * (r_dot * r_dot - z_dot * z_dot))
    }

    /// Unit tangent computed with the local sound speed.
    pub fn tangent(&self) -> (f64, f64) {
        (self.state.r_dot / self.ssp.c, self.state.z_dot / self.ssp.c)
    }
}

/// When to stop tracing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Horizon {
    Time(f64),
    Arclength(f64),
    Range(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Horizon,
    /// The ray reached the edge of the profile interval.
    DomainExit,
}

/// A sampled trajectory with monotone `t` and `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayPath {
    samples: Vec<RaySample>,
    launch_angle: f64,
    termination: Termination,
}

/// State interpolated between samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseState {
    pub r: f64,
    pub z: f64,
    pub r_dot: f64,
    pub z_dot: f64,
    pub s: f64,
}

impl RayPath {
    pub fn samples(&self) -> &[RaySample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn launch_angle(&self) -> f64 {
        self.launch_angle
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    pub fn first(&self) -> &RaySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &RaySample {
        &self.samples[self.samples.len() - 1]
    }

    /// Time-Hermite interpolation inside interval `i` at `tau ∈ [0, t[i+1] − t[i]]`.
    pub fn dense_in_time(&self, i: usize, tau: f64) -> DenseState {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.state.t - a.state.t;
        let (ar, az) = a.acceleration();
        let (br, bz) = b.acceleration();
        let (r, _) = hermite(a.state.r, a.state.r_dot, b.state.r, b.state.r_dot, h, tau);
        let (z, _) = hermite(a.state.z, a.state.z_dot, b.state.z, b.state.z_dot, h, tau);
        let (r_dot, _) = hermite(a.state.r_dot, ar, b.state.r_dot, br, h, tau);
        let (z_dot, _) = hermite(a.state.z_dot, az, b.state.z_dot, bz, h, tau);
        let (s, _) = hermite(a.state.s, a.ssp.c, b.state.s, b.ssp.c, h, tau);
        DenseState { r, z, r_dot, z_dot, s }
    }

    /// Arclength-Hermite interpolation inside interval `i` at `sigma ∈ [0, s[i+1] − s[i]]`.
    /// Returns (z, dr/ds, dz/ds).
    pub fn dense_in_arclength(&self, i: usize, sigma: f64) -> (f64, f64, f64) {
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.state.s - a.state.s;
        let frenet = |smp: &RaySample| {
            let (tr, tz) = smp.tangent();
            let g = smp.ssp.dc / smp.ssp.c;
            (tr, tz, g * tr * tz, -g * tr * tr)
        };
        let (atr, atz, adr, adz) = frenet(a);
        let (btr, btz, bdr, bdz) = frenet(b);
        let (z, _) = hermite(a.state.z, atz, b.state.z, btz, h, sigma);
        let (tr, _) = hermite(atr, adr, btr, bdr, h, sigma);
        let (tz, _) = hermite(atz, adz, btz, bdz, h, sigma);
        (z, tr, tz)
    }

    /// Index of the interval containing time `t` (clamped to the path).
    pub fn interval_at_time(&self, t: f64) -> usize {
        let n = self.samples.len();
        let i = self.samples.partition_point(|s| s.state.t <= t);
        i.saturating_sub(1).min(n.saturating_sub(2))
    }

    /// Interpolated state at time `t`, or `None` outside the path.
    pub fn state_at_time(&self, t: f64) -> Option<DenseState> {
        if self.samples.len() < 2 || t < self.first().state.t || t > self.last().state.t {
            return None;
        }
        let i = self.interval_at_time(t);
        Some(self.dense_in_time(i, t - self.samples[i].state.t))
    }

    /// Interpolated state at arclength `s`, or `None` outside the path.
    pub fn state_at_arclength(&self, s: f64) -> Option<(f64, DenseState)> {
        if self.samples.len() < 2 || s < self.first().state.s || s > self.last().state.s {
            return None;
        }
        let n = self.samples.len();
        let i = self.samples.partition_point(|p| p.state.s <= s).saturating_sub(1).min(n - 2);
        let (a, b) = (&self.samples[i], &self.samples[i + 1]);
        let h = b.state.t - a.state.t;
        // Newton on the cubic s(t), which is monotone because ds/dt = c > 0.
        let mut tau = h * (s - a.state.s) / (b.state.s - a.state.s);
        for _ in 0..30 {
            let (si, vi) = hermite(a.state.s, a.ssp.c, b.state.s, b.ssp.c, h, tau);
            let step = (si - s) / vi;
            tau = (tau - step).clamp(0.0, h);
            if step.abs() <= 1e-15 * h.max(1.0) {
                break;
            }
        }
        Some((a.state.t + tau, self.dense_in_time(i, tau)))
    }

    /// ∫ c⁻¹ ds along the samples by the trapezoid rule.
    pub fn travel_time_from_arclength(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[1].state.s - w[0].state.s) * (1.0 / w[0].ssp.c + 1.0 / w[1].ssp.c))
            .sum()
    }
}

/// d/dt of (r, z, ṙ, ż) from the ray equations.
pub fn derivative_time(profile: &SoundSpeedProfile, state: &RayState) -> Result<[f64; 4]> {
    let e = profile.eval(state.z)?;
    let g = e.dc / e.c;
    let (rd, zd) = (state.r_dot, state.z_dot);
    Ok([rd, zd, 2.0 * g * rd * zd, -g * (rd * rd - zd * zd)])
}

fn rhs(profile: &SoundSpeedProfile, y: &[f64; 5]) -> Result<[f64; 5]> {
    let e = profile.eval(y[1])?;
    let g = e.dc / e.c;
    let (rd, zd) = (y[2], y[3]);
    Ok([rd, zd, 2.0 * g * rd * zd, -g * (rd * rd - zd * zd), e.c])
}

fn to_vec(s: &RayState) -> [f64; 5] {
    [s.r, s.z, s.r_dot, s.z_dot, s.s]
}

fn from_vec(y: &[f64; 5], t: f64) -> RayState {
    RayState { r: y[0], z: y[1], r_dot: y[2], z_dot: y[3], t, s: y[4] }
}

/// One RK4 step followed by projection of the velocity onto ‖ẋ‖ = c(z).
fn advance(profile: &SoundSpeedProfile, state: &RayState, h: f64) -> Result<RaySample> {
    let y = rk4_step(state.t, &to_vec(state), h, |_, y| rhs(profile, y))?;
    let ssp = profile.eval(y[1])?;
    let mut next = from_vec(&y, state.t + h);
    let scale = ssp.c / next.speed();
    next.r_dot *= scale;
    next.z_dot *= scale;
    Ok(RaySample { state: next, ssp })
}

/// Traces a ray launched from (r0, z0) at elevation `theta0` with classical
/// fixed-step RK4 in travel time.
pub fn trace(
    profile: &SoundSpeedProfile,
    r0: f64,
    z0: f64,
    theta0: f64,
    horizon: Horizon,
    step: f64,
) -> Result<RayPath> {
    let ssp = profile.eval(z0)?;
    let state = RayState {
        r: r0,
        z: z0,
        r_dot: ssp.c * theta0.cos(),
        z_dot: -ssp.c * theta0.sin(),
        t: 0.0,
        s: 0.0,
    };
    trace_from_state(profile, state, horizon, step)
}

/// Traces from an arbitrary initial state; the horizon is measured from the
/// state's own `t`, `s` and `r`.
pub fn trace_from_state(
    profile: &SoundSpeedProfile,
    initial: RayState,
    horizon: Horizon,
    step: f64,
) -> Result<RayPath> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidStep(step));
    }
    let limit = match horizon {
        Horizon::Time(v) | Horizon::Arclength(v) | Horizon::Range(v) => v,
    };
    if !(limit.is_finite() && limit >= 0.0) {
        return Err(Error::InvalidStep(limit));
    }
    let ssp = profile.eval(initial.z)?;
    let mut first = initial;
    let scale = ssp.c / first.speed();
    if !scale.is_finite() {
        return Err(Error::InvalidBranch("initial velocity is zero".into()));
    }
    first.r_dot *= scale;
    first.z_dot *= scale;
    let launch_angle = first.theta();
    if let Horizon::Range(_) = horizon {
        if first.r_dot <= 1e-12 * ssp.c {
            // ṙ/c² is conserved, so the range never grows.
            return Err(Error::Unreachable { r: initial.r + limit, z: initial.z });
        }
    }

    let (t0, s0, r0) = (first.t, first.s, first.r);
    // Progress towards the horizon, as a function of a state.
    let progress = |st: &RayState| match horizon {
        Horizon::Time(_) => st.t - t0,
        Horizon::Arclength(_) => st.s - s0,
        Horizon::Range(_) => st.r - r0,
    };

    let mut samples = vec![RaySample { state: first, ssp }];
    let mut termination = Termination::Horizon;
    let time_tol = 1e-12 * step;

    for _ in 0..MAX_STEPS {
        let current = samples[samples.len() - 1].state;
        let done = progress(&current);
        if limit - done <= if matches!(horizon, Horizon::Time(_)) { time_tol } else { 0.0 } {
            break;
        }
        let h = match horizon {
            Horizon::Time(_) => step.min(limit - done),
            _ => step,
        };
        let inside = |smp: &Result<RaySample>| matches!(smp, Ok(s) if profile.contains(s.state.z));
        let attempt = advance(profile, &current, h);
        if !inside(&attempt) {
            // Land on the edge of the interval by bisecting the step length.
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..BISECTION_ITERATIONS {
                let mid = 0.5 * (lo + hi);
                if inside(&advance(profile, &current, mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if lo > 0.0 {
                samples.push(advance(profile, &current, lo)?);
            }
            termination = Termination::DomainExit;
            break;
        }
        let next = attempt?;
        if !matches!(horizon, Horizon::Time(_)) && progress(&next.state) > limit {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..BISECTION_ITERATIONS {
                let mid = 0.5 * (lo + hi);
                if progress(&advance(profile, &current, mid)?.state) > limit {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let landed = advance(profile, &current, 0.5 * (lo + hi))?;
            if landed.state.t > current.t {
                samples.push(landed);
            }
            break;
        }
        samples.push(next);
    }

    Ok(RayPath { samples, launch_angle, termination })
}

/// Snell invariant a = cos θ0 / c(z0) [s/m].
pub fn snell_invariant(profile: &SoundSpeedProfile, z0: f64, theta0: f64) -> Result<f64> {
    Ok(theta0.cos() / profile.speed(z0)?)
}

/// Extrinsic curvature of the ray path, κ = (c′/c)·dr/ds [1/m].
pub fn frenet_curvature(profile: &SoundSpeedProfile, state: &RayState) -> Result<f64> {
    let e = profile.eval(state.z)?;
    Ok(e.dc / e.c * state.r_dot / state.speed())
}

/// The Fermat metric c⁻²·δ and its Christoffel symbols at one depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FermatMetric {
    pub c: f64,
    pub dc: f64,
}

impl FermatMetric {
    pub fn at(profile: &SoundSpeedProfile, z: f64) -> Result<Self> {
        let e = profile.eval(z)?;
        Ok(Self { c: e.c, dc: e.dc })
    }

    /// g_ij in (r, z) coordinates [s²/m²].
    pub fn metric(&self) -> [[f64; 2]; 2] {
        let g = 1.0 / (self.c * self.c);
        [[g, 0.0], [0.0, g]]
    }

    /// Γ^k_ij indexed `[k][i][j]`, coordinates ordered (r, z).
    pub fn christoffel(&self) -> [[[f64; 2]; 2]; 2] {
        let g = self.dc / self.c;
        [[[0.0, -g], [-g, 0.0]], [[g, 0.0], [0.0, -g]]]
    }

    /// ẍ^k = −Γ^k_ij ẋ^i ẋ^j.
    pub fn geodesic_acceleration(&self, velocity: [f64; 2]) -> [f64; 2] {
        let gamma = self.christoffel();
        let mut acc = [0.0; 2];
        for (k, a) in acc.iter_mut().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    *a -= gamma[k][i][j] * velocity[i] * velocity[j];
                }
            }
        }
        acc
    }
}

/// Closed forms for c(z) = c0 + γ·z, where rays are circular arcs.
///
/// `ray_point`, `circle` and `turning_angle_to` use the arc parameterization in
/// which the launch angle is measured positive *downward* (the opposite sign
/// of the tracer's elevation) and `theta` is the angle turned since launch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSsp {
    pub c0: f64,
    pub gradient: f64,
}

/// Launch and arrival angles of a linear-profile eigenray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearEigenray {
    /// Launch elevation in the tracer's convention.
    pub launch_elevation: f64,
    /// Launch angle in the arc convention (= −launch_elevation).
    pub launch_depression: f64,
    /// Turning angle at the target, atan2(r − z₀γ tan θ0, z + c0/γ) + θ0.
    pub turning_angle: f64,
    /// Elevation of the ray tangent at the target.
    pub arrival_elevation: f64,
}

impl LinearSsp {
    pub fn new(c0: f64, gradient: f64) -> Result<Self> {
        if gradient == 0.0 || !gradient.is_finite() {
            return Err(Error::ZeroGradient);
        }
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(Error::InvalidProfile(format!("c0 must be positive, got {c0}")));
        }
        Ok(Self { c0, gradient })
    }

    pub fn speed(&self, z: f64) -> f64 {
        self.c0 + self.gradient * z
    }

    /// z₀γ = z0 + c0/γ, the signed distance from the c = 0 plane.
    pub fn z0_gamma(&self, z0: f64) -> f64 {
        z0 + self.c0 / self.gradient
    }

    /// (r, z) after turning through `theta` on the circle launched at `theta0`.
    pub fn ray_point(&self, z0: f64, theta0: f64, theta: f64) -> (f64, f64) {
        let zg = self.z0_gamma(z0);
        let sec = 1.0 / theta0.cos();
        (
            zg * sec * (theta0.sin() + (theta - theta0).sin()),
            -self.c0 / self.gradient + zg * sec * (theta - theta0).cos(),
        )
    }

    /// Centre (r, z) and radius of the ray circle.
    pub fn circle(&self, z0: f64, theta0: f64) -> ((f64, f64), f64) {
        let zg = self.z0_gamma(z0);
        ((zg * theta0.tan(), -self.c0 / self.gradient), (zg / theta0.cos()).abs())
    }

    /// Path length for a turning angle `theta`: radius × |θ|.
    pub fn arclength(&self, z0: f64, theta0: f64, theta: f64) -> f64 {
        self.circle(z0, theta0).1 * theta.abs()
    }

    /// Point reached after arclength `s` by a ray launched at elevation `elevation0`.
    pub fn point_at_arclength(&self, z0: f64, elevation0: f64, s: f64) -> (f64, f64) {
        let a = elevation0.cos() / self.speed(z0);
        // dθ/ds = γ·a for the elevation angle.
        self.ray_point(z0, -elevation0, self.gradient * a * s)
    }

    /// Geometric spreading q [m/rad] where the ray elevation is `elevation`,
    /// q = z₀γ sec²θ0 (sin θ − sin θ0) with signed elevations, and the
    /// constant p = 1/c(z0).
    pub fn spreading(&self, z0: f64, elevation0: f64, elevation: f64) -> (f64, f64) {
        let zg = self.z0_gamma(z0);
        let c = elevation0.cos();
        (zg / (c * c) * (elevation.sin() - elevation0.sin()), 1.0 / self.speed(z0))
    }

    /// Spreading as a function of depth on the first arc,
    /// q = z₀γ sec²θ0 ((1 − a²c(z)²)^{1/2} − |sin θ0|), valid while the ray
    /// moves towards slower sound (θ0 ≥ 0 for γ > 0).
    pub fn spreading_at_depth(&self, z0: f64, elevation0: f64, z: f64) -> f64 {
        let zg = self.z0_gamma(z0);
        let c = elevation0.cos();
        let a = c / self.speed(z0);
        let ac = a * self.speed(z);
        zg / (c * c) * ((1.0 - ac * ac).max(0.0).sqrt() - elevation0.sin().abs())
    }

    /// Travel time from depth z0 to depth z on the first arc of a ray launched at
    /// elevation `elevation0`.
    pub fn travel_time(&self, z0: f64, elevation0: f64, z: f64) -> Result<f64> {
        if !(elevation0.abs() < FRAC_PI_2) {
            return Err(Error::InvalidBranch("launch must not be vertical".into()));
        }
        // Initial vertical direction of travel (+1 = deeper).
        let heading = if elevation0 != 0.0 { -elevation0.signum() } else { -self.gradient.signum() };
        if (z - z0) * heading < 0.0 {
            return Err(Error::InvalidBranch(format!(
                "depth {z} is behind the launch direction from {z0}"
            )));
        }
        let (c0z, cz) = (self.speed(z0), self.speed(z));
        if !(cz > 0.0) {
            return Err(Error::InvalidBranch(format!("sound speed at {z} is not positive")));
        }
        let arg = cz / c0z * elevation0.cos();
        if !(-1.0..=1.0).contains(&arg) {
            return Err(Error::InvalidBranch(format!("arcsin argument {arg} leaves [-1, 1]")));
        }
        let launch = (0.5 * elevation0.cos().asin()).tan();
        let local = (0.5 * arg.asin()).tan();
        Ok(((launch / local).ln() / self.gradient).abs())
    }

    /// Eigenray to (r, z) found by bisection on the depth miss of the circle
    /// at range r.
    pub fn eigenray(&self, z0: f64, r: f64, z: f64) -> Result<LinearEigenray> {
        if !(r > 0.0) {
            return Err(Error::Unreachable { r, z });
        }
        let zg = self.z0_gamma(z0);
        // Depth miss at range r for the circle with (arc-convention) launch angle th0.
        let miss = |th0: f64| -> Option<f64> {
            let sin_turn = r * th0.cos() / zg - th0.sin();
            if !(-1.0..=1.0).contains(&sin_turn) {
                return None;
            }
            let turn = th0 + sin_turn.asin();
            Some(self.ray_point(z0, th0, turn).1 - z)
        };
        let n = 4000;
        let lim = FRAC_PI_2 - 1e-9;
        let grid: Vec<f64> = (0..=n).map(|i| -lim + 2.0 * lim * i as f64 / n as f64).collect();
        let bracket = grid.windows(2).find_map(|w| match (miss(w[0]), miss(w[1])) {
            (Some(a), Some(_)) if a == 0.0 => Some((w[0], w[0], a, a)),
            (Some(a), Some(b)) if a * b < 0.0 => Some((w[0], w[1], a, b)),
            _ => None,
        });
        let (mut lo, mut hi, mut flo, _) = bracket.ok_or(Error::Unreachable { r, z })?;
        for _ in 0..200 {
            if hi - lo <= 1e-15 {
                break;
            }
            let mid = 0.5 * (lo + hi);
            match miss(mid) {
                Some(fm) if fm == 0.0 => {
                    lo = mid;
                    hi = mid;
                }
                Some(fm) if fm * flo < 0.0 => hi = mid,
                Some(fm) => {
                    lo = mid;
                    flo = fm;
                }
                None => return Err(Error::Unreachable { r, z }),
            }
        }
        let th0 = 0.5 * (lo + hi);
        let turning_angle = self.turning_angle_to(z0, th0, r, z);
        Ok(LinearEigenray {
            launch_elevation: -th0,
            launch_depression: th0,
            turning_angle,
            arrival_elevation: -th0 + turning_angle,
        })
    }

    /// atan2(r − z₀γ tan θ0, z + c0/γ) + θ0, with both arguments scaled by the
    /// sign of z₀γ so the branch is also right for γ < 0.
    pub fn turning_angle_to(&self, z0: f64, theta0: f64, r: f64, z: f64) -> f64 {
        let zg = self.z0_gamma(z0);
        let sgn = zg.signum();
        (sgn * (r - zg * theta0.tan())).atan2(sgn * (z + self.c0 / self.gradient)) + theta0
    }

    /// The launch-angle line of the eigenray formula exactly as typeset:
    /// 2·atan2(2rz₀γ − (r² + (z₀γ − z)²)(r² + (z₀γ + z)²), z₀γ² − z² − r²)^{1/2}.
    /// Returns `None` where the square root is not real.
    pub fn eigenray_launch_as_printed(&self, z0: f64, r: f64, z: f64) -> Option<f64> {
        let zg = self.z0_gamma(z0);
        let y = 2.0 * r * zg - (r * r + (zg - z).powi(2)) * (r * r + (zg + z).powi(2));
        let x = zg * zg - z * z - r * r;
        let angle = y.atan2(x);
        (angle >= 0.0).then(|| 2.0 * angle.sqrt())
    }
}

/// Half-angle tangent used by the linear travel-time formula; exposed for tests.
pub fn half_angle_tan(elevation: f64) -> f64 {
    (FRAC_PI_4 - 0.5 * elevation.abs()).tan()
}
