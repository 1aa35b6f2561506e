//! Paraxial dynamics along a traced central ray: the extrinsic pair (q, p) in
//! arclength, the scalar Jacobi equation for the intrinsic spreading, and the
//! coupled first-order intrinsic system, plus caustic detection.
//!
//! All three are integrated with RK4 on the central ray's own sample grid,
//! using cubic Hermite dense output of the ray between samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{hermite, rk4_step};
use crate::ray::{RayPath, RaySample, RayState};
use crate::ssp::SoundSpeedProfile;

/// Absolute tolerance on the intrinsic spreading at a refined caustic [s/rad].
pub const CAUSTIC_TOLERANCE: f64 = 1e-10;

/// Geometric spreading q [m/rad] and its conjugate p [s/(m·rad)].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtrinsicSpreading {
    pub q: f64,
    pub p: f64,
}

/// Intrinsic spreading [s/rad] and its time derivative [1/rad].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntrinsicSpreading {
    pub value: f64,
    pub rate: f64,
}

/// State (q̃, p̃) of the coupled intrinsic system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledSpreading {
    pub q: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CausticEvent {
    pub index: usize,
    pub t: f64,
    pub s: f64,
    pub r: f64,
    pub z: f64,
}

/// Second derivative of c along the ray normal, c″(z)·(dr/ds)².
pub fn normal_second_derivative(profile: &SoundSpeedProfile, state: &RayState) -> Result<f64> {
    let e = profile.eval(state.z)?;
    let (tr, _) = state.tangent();
    Ok(e.d2c * tr * tr)
}

fn check_path(path: &RayPath) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::GridMismatch(format!("path has {} samples, need at least 2", path.len())));
    }
    Ok(())
}

/// Integrates dq/ds = c·p, dp/ds = −(c_nn/c²)·q from q = 0, p = 1/c(z0),
/// stepping in travel time (dq/dt = c²p, dp/dt = −(c_nn/c)·q) on the path grid.
pub fn propagate_extrinsic(profile: &SoundSpeedProfile, path: &RayPath) -> Result<Vec<ExtrinsicSpreading>> {
    check_path(path)?;
    let samples = path.samples();
    let mut y = [0.0, 1.0 / samples[0].ssp.c];
    let mut out = Vec::with_capacity(samples.len());
    out.push(ExtrinsicSpreading { q: y[0], p: y[1] });
    let coefficients = |smp: &RaySample| {
        let (tr, _) = smp.tangent();
        (smp.ssp.c, smp.ssp.d2c * tr * tr)
    };
    for i in 0..samples.len() - 1 {
        let (a, b) = (&samples[i], &samples[i + 1]);
        let h = b.state.t - a.state.t;
        // RK4 only ever asks for the ends and the midpoint of the interval.
        let mid = path.dense_in_time(i, 0.5 * h);
        let e = profile.eval(mid.z)?;
        let tr = mid.r_dot / mid.r_dot.hypot(mid.z_dot);
        let at_mid = (e.c, e.d2c * tr * tr);
        let (at_a, at_b) = (coefficients(a), coefficients(b));
        y = rk4_step(0.0, &y, h, |tau, y| {
            let (c, cnn) = if tau == 0.0 {
                at_a
            } else if tau == h {
                at_b
            } else {
                at_mid
            };
            Ok::<_, Error>([c * c * y[1], -cnn / c * y[0]])
        })?;
        out.push(ExtrinsicSpreading { q: y[0], p: y[1] });
    }
    Ok(out)
}

/// Integrates the Jacobi equation ع̈ + K(z(t))·ع = 0 from ع = 0, ع̇ = 1.
pub fn propagate_jacobi(profile: &SoundSpeedProfile, path: &RayPath) -> Result<Vec<IntrinsicSpreading>> {
    check_path(path)?;
    let samples = path.samples();
    let mut y = [0.0, 1.0];
    let mut out = Vec::with_capacity(samples.len());
    out.push(IntrinsicSpreading { value: 0.0, rate: 1.0 });
    for i in 0..samples.len() - 1 {
        let (a, b) = (&samples[i], &samples[i + 1]);
        let h = b.state.t - a.state.t;
        let k_mid = profile.curvature(path.dense_in_time(i, 0.5 * h).z)?;
        let k = |tau: f64| {
            if tau == 0.0 {
                a.ssp.curvature()
            } else if tau == h {
                b.ssp.curvature()
            } else {
                k_mid
            }
        };
        y = rk4_step(0.0, &y, h, |tau, y| Ok::<_, Error>([y[1], -k(tau) * y[0]]))?;
        out.push(IntrinsicSpreading { value: y[0], rate: y[1] });
    }
    Ok(out)
}

/// Integrates dq̃/dt = −c′ζ·q̃ + p̃, dp̃/dt = −c·c_nn·q̃ + c′ζ·p̃ with ζ = dz/ds,
/// from (0, 1).
pub fn propagate_coupled(profile: &SoundSpeedProfile, path: &RayPath) -> Result<Vec<CoupledSpreading>> {
    check_path(path)?;
    let samples = path.samples();
    let mut y = [0.0, 1.0];
    let mut out = Vec::with_capacity(samples.len());
    out.push(CoupledSpreading { q: 0.0, p: 1.0 });
    // (c, c′, c_nn, ζ) at a point.
    let at = |c: f64, dc: f64, d2c: f64, r_dot: f64, z_dot: f64| {
        let v = r_dot.hypot(z_dot);
        let (tr, tz) = (r_dot / v, z_dot / v);
        (c, dc, d2c * tr * tr, tz)
    };
    for i in 0..samples.len() - 1 {
        let (a, b) = (&samples[i], &samples[i + 1]);
        let h = b.state.t - a.state.t;
        let m = path.dense_in_time(i, 0.5 * h);
        let em = profile.eval(m.z)?;
        let ca = at(a.ssp.c, a.ssp.dc, a.ssp.d2c, a.state.r_dot, a.state.z_dot);
        let cb = at(b.ssp.c, b.ssp.dc, b.ssp.d2c, b.state.r_dot, b.state.z_dot);
        let cm = at(em.c, em.dc, em.d2c, m.r_dot, m.z_dot);
        let coeffs = |tau: f64| {
            if tau == 0.0 {
                ca
            } else if tau == h {
                cb
            } else {
                cm
            }
        };
        y = rk4_step(0.0, &y, h, |tau, y| {
            let (c, dc, cnn, zeta) = coeffs(tau);
            Ok::<_, Error>([-dc * zeta * y[0] + y[1], -c * cnn * y[0] + dc * zeta * y[1]])
        })?;
        out.push(CoupledSpreading { q: y[0], p: y[1] });
    }
    Ok(out)
}

/// (q, p) → (q̃, p̃) = (q/c, c·p).
pub fn to_coupled(e: ExtrinsicSpreading, c: f64) -> CoupledSpreading {
    CoupledSpreading { q: e.q / c, p: c * e.p }
}

/// (q̃, p̃) → (q, p) = (c·q̃, p̃/c).
pub fn to_extrinsic(i: CoupledSpreading, c: f64) -> ExtrinsicSpreading {
    ExtrinsicSpreading { q: c * i.q, p: i.p / c }
}

/// Sign changes of the intrinsic spreading, refined by bisection on the cubic
/// Hermite interpolant of (ع, ع̇) in time.
pub fn detect_caustics(spreading: &[IntrinsicSpreading], path: &RayPath) -> Vec<CausticEvent> {
    let samples = path.samples();
    let n = spreading.len().min(samples.len());
    let mut events = Vec::new();
    // The first interval starts at the source, where ع = 0 by construction.
    for i in 1..n.saturating_sub(1) {
        let (ja, jb) = (spreading[i], spreading[i + 1]);
        if ja.value == 0.0 || ja.value * jb.value > 0.0 {
            continue;
        }
        let h = samples[i + 1].state.t - samples[i].state.t;
        let value_at = |tau: f64| hermite(ja.value, ja.rate, jb.value, jb.rate, h, tau).0;
        let (mut lo, mut hi) = (0.0, h);
        let mut tau = hi;
        for _ in 0..200 {
            if hi - lo <= f64::EPSILON * h {
                break;
            }
            tau = 0.5 * (lo + hi);
            let v = value_at(tau);
            if v == 0.0 {
                break;
            }
            if v.signum() == ja.value.signum() {
                lo = tau;
            } else {
                hi = tau;
            }
        }
        let d = path.dense_in_time(i, tau);
        events.push(CausticEvent {
            index: events.len(),
            t: samples[i].state.t + tau,
            s: d.s,
            r: d.r,
            z: d.z,
        });
    }
    events
}

/// Closed-form Jacobi solution for a constant-curvature profile.
pub fn closed_form_spreading(profile: &SoundSpeedProfile, t: f64) -> Result<IntrinsicSpreading> {
    let k = profile.constant_curvature().ok_or(Error::NotConstantCurvature)?;
    Ok(closed_form_for_curvature(k, t))
}

/// ع(t) and ع̇(t) for ع̈ + K·ع = 0, ع(0) = 0, ع̇(0) = 1.
pub fn closed_form_for_curvature(k: f64, t: f64) -> IntrinsicSpreading {
    if k > 0.0 {
        let w = k.sqrt();
        IntrinsicSpreading { value: (w * t).sin() / w, rate: (w * t).cos() }
    } else if k < 0.0 {
        let w = (-k).sqrt();
        IntrinsicSpreading { value: (w * t).sinh() / w, rate: (w * t).cosh() }
    } else {
        IntrinsicSpreading { value: t, rate: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ray::{trace, Horizon, DEFAULT_STEP};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn normal_second_derivative_cases() {
        let p = SoundSpeedProfile::munk(1500.0, 0.00737, 1300.0, 650.0).unwrap();
        let vertical = RayState { r: 0.0, z: 1300.0, r_dot: 0.0, z_dot: 1500.0, t: 0.0, s: 0.0 };
        assert_eq!(normal_second_derivative(&p, &vertical).unwrap(), 0.0);
        let horizontal = RayState { r_dot: 1500.0, z_dot: 0.0, ..vertical };
        let d2c = p.eval(1300.0).unwrap().d2c;
        assert_eq!(normal_second_derivative(&p, &horizontal).unwrap(), d2c);
        let th = 30f64.to_radians();
        let slanted = RayState { r_dot: th.cos(), z_dot: -th.sin(), ..vertical };
        let expected = 1500.0 * 0.00737 / (650.0 * 650.0) * th.cos().powi(2);
        assert_relative_eq!(normal_second_derivative(&p, &slanted).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn constant_profile_spreading_is_trivial() {
        let p = SoundSpeedProfile::constant(1500.0).unwrap();
        let path = trace(&p, 0.0, 100.0, 0.3, Horizon::Time(2.0), DEFAULT_STEP).unwrap();
        let ext = propagate_extrinsic(&p, &path).unwrap();
        let jac = propagate_jacobi(&p, &path).unwrap();
        let cpl = propagate_coupled(&p, &path).unwrap();
        for (((smp, e), j), c) in path.samples().iter().zip(&ext).zip(&jac).zip(&cpl) {
            let t = smp.state.t;
            assert_relative_eq!(e.q, 1500.0 * t, max_relative = 1e-12, epsilon = 1e-12);
            assert_relative_eq!(e.p, 1.0 / 1500.0, max_relative = 1e-14);
            assert_relative_eq!(j.value, t, max_relative = 1e-12, epsilon = 1e-15);
            assert_eq!(j.rate, 1.0);
            assert_relative_eq!(c.q, t, max_relative = 1e-12, epsilon = 1e-15);
            assert_eq!(c.p, 1.0);
        }
        assert!(detect_caustics(&jac, &path).is_empty());
    }

    #[test]
    fn conversions_round_trip() {
        let c = to_coupled(ExtrinsicSpreading { q: 0.0, p: 1.0 / 1500.0 }, 1500.0);
        assert_eq!(c.q, 0.0);
        assert_relative_eq!(c.p, 1.0, max_relative = 1e-15);
        let e = ExtrinsicSpreading { q: 123.456, p: 7.5e-4 };
        let back = to_extrinsic(to_coupled(e, 1512.25), 1512.25);
        assert_relative_eq!(back.q, e.q, max_relative = 1e-15);
        assert_relative_eq!(back.p, e.p, max_relative = 1e-15);
        let flat = to_coupled(ExtrinsicSpreading { q: 1500.0 * 2.0, p: 1.0 / 1500.0 }, 1500.0);
        assert_relative_eq!(flat.q, 2.0);
        assert_relative_eq!(flat.p, 1.0);
    }

    #[test]
    fn closed_forms() {
        let flat = SoundSpeedProfile::constant(1500.0).unwrap();
        assert_eq!(closed_form_spreading(&flat, 3.0).unwrap(), IntrinsicSpreading { value: 3.0, rate: 1.0 });
        let lin = SoundSpeedProfile::linear(1500.0, 0.05).unwrap();
        let t = 0.1;
        let j = closed_form_spreading(&lin, t).unwrap();
        assert_relative_eq!(j.value, t + 0.05f64.powi(2) * t.powi(3) / 6.0, max_relative = 1e-10);
        let duct = SoundSpeedProfile::cosh_duct(1480.0, 1000.0, 1000.0).unwrap();
        let half = PI * 1000.0 / 1480.0;
        assert!(closed_form_spreading(&duct, half).unwrap().value.abs() < 1e-12);
        let munk = SoundSpeedProfile::munk(1500.0, 0.00737, 1300.0, 650.0).unwrap();
        assert!(matches!(closed_form_spreading(&munk, 1.0), Err(Error::NotConstantCurvature)));
    }

    #[test]
    fn jacobi_matches_duct_closed_form_and_finds_caustics() {
        let (c0, w) = (1480.0, 1000.0);
        let p = SoundSpeedProfile::cosh_duct(c0, 1000.0, w).unwrap();
        let path = trace(&p, 0.0, 1000.0, 10f64.to_radians(), Horizon::Time(7.0), DEFAULT_STEP).unwrap();
        let jac = propagate_jacobi(&p, &path).unwrap();
        for (smp, j) in path.samples().iter().zip(&jac) {
            let exact = closed_form_for_curvature(c0 * c0 / (w * w), smp.state.t);
            assert!((j.value - exact.value).abs() < 1e-9 * w / c0);
        }
        let events = detect_caustics(&jac, &path);
        assert_eq!(events.len(), 3);
        for (n, ev) in events.iter().enumerate() {
            assert_relative_eq!(ev.t, (n + 1) as f64 * PI * w / c0, max_relative = 1e-8);
            assert_eq!(ev.index, n);
        }
    }
}
