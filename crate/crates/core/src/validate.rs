//! Independent oracles for the spreading solvers: two-ray finite differences,
//! Gauss's-lemma residuals, a finite-difference acoustic curvature, and a suite
//! that cross-checks every formulation against the others.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paraxial::{propagate_coupled, propagate_extrinsic, propagate_jacobi};
use crate::ray::{trace, Horizon, RayPath, Termination, DEFAULT_STEP};
use crate::snell::SnellRay;
use crate::ssp::SoundSpeedProfile;

/// Default half-width of the two-ray fan [rad].
pub const DEFAULT_FAN_HALF_WIDTH: f64 = 1e-5;
/// Half-width [rad] of the extrapolated fan used for the Gauss-lemma residual.
pub const GAUSS_FAN_HALF_WIDTH: f64 = 3e-4;
/// Default depth step of the curvature finite difference [m].
pub const DEFAULT_CURVATURE_STEP: f64 = 1.0;
/// Floor of the relative-error denominator.
pub const RELATIVE_FLOOR: f64 = 1e-30;
/// Ratio identities are skipped where |ع| ≤ this fraction of max |ع|.
pub const CAUSTIC_BAND: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Relative,
    /// For residuals whose exact value is zero.
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub oracle: f64,
    pub candidate: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub metric: Metric,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(RELATIVE_FLOOR)
}

impl OracleReport {
    pub fn relative(quantity: impl Into<String>, oracle: f64, candidate: f64, tolerance: f64) -> Self {
        Self::build(quantity.into(), oracle, candidate, tolerance, Metric::Relative)
    }

    pub fn absolute(quantity: impl Into<String>, oracle: f64, candidate: f64, tolerance: f64) -> Self {
        Self::build(quantity.into(), oracle, candidate, tolerance, Metric::Absolute)
    }

    fn build(quantity: String, oracle: f64, candidate: f64, tolerance: f64, metric: Metric) -> Self {
        let abs_error = (oracle - candidate).abs();
        let rel_error = relative_error(oracle, candidate);
        let measured = match metric {
            Metric::Relative => rel_error,
            Metric::Absolute => abs_error,
        };
        Self {
            quantity,
            oracle,
            candidate,
            abs_error,
            rel_error,
            tolerance,
            metric,
            pass: measured <= tolerance,
            note: None,
        }
    }

    /// A report for a comparison that could not be carried out.
    pub fn failed(quantity: impl Into<String>, error: &Error) -> Self {
        Self {
            quantity: quantity.into(),
            oracle: f64::NAN,
            candidate: f64::NAN,
            abs_error: f64::NAN,
            rel_error: f64::NAN,
            tolerance: 0.0,
            metric: Metric::Relative,
            pass: false,
            note: Some(error.to_string()),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn measured(&self) -> f64 {
        match self.metric {
            Metric::Relative => self.rel_error,
            Metric::Absolute => self.abs_error,
        }
    }
}

/// Keeps whichever report has the larger measured error.
fn worst(current: Option<OracleReport>, next: OracleReport) -> Option<OracleReport> {
    match current {
        Some(c) if c.measured() >= next.measured() || next.measured().is_nan() => Some(c),
        _ => Some(next),
    }
}

/// Launch-angle partials (∂r/∂θ0, ∂z/∂θ0) at fixed travel time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanPartial {
    pub t: f64,
    pub dr: f64,
    pub dz: f64,
}

impl FanPartial {
    pub fn norm(&self) -> f64 {
        self.dr.hypot(self.dz)
    }
}

/// Central differences of two rays launched at θ0 ± `half_width`, traced with
/// the same time grid up to `t_end`.
pub fn fan_partials(
    profile: &SoundSpeedProfile,
    r0: f64,
    z0: f64,
    theta0: f64,
    t_end: f64,
    half_width: f64,
    step: f64,
) -> Result<Vec<FanPartial>> {
    let ray = |sign: f64| -> Result<RayPath> {
        let p = trace(profile, r0, z0, theta0 + sign * half_width, Horizon::Time(t_end), step)?;
        if p.termination() == Termination::DomainExit {
            return Err(Error::DomainExit { t: t_end });
        }
        Ok(p)
    };
    let (plus, minus) = (ray(1.0)?, ray(-1.0)?);
    if plus.len() != minus.len() {
        return Err(Error::DegenerateFan);
    }
    Ok(plus
        .samples()
        .iter()
        .zip(minus.samples())
        .map(|(a, b)| FanPartial {
            t: a.state.t,
            dr: (a.state.r - b.state.r) / (2.0 * half_width),
            dz: (a.state.z - b.state.z) / (2.0 * half_width),
        })
        .collect())
}

/// Richardson combination of central differences at `half_width` and twice
/// that, removing the O(δ²) truncation term.
pub fn extrapolated_fan_partials(
    profile: &SoundSpeedProfile,
    r0: f64,
    z0: f64,
    theta0: f64,
    t_end: f64,
    half_width: f64,
    step: f64,
) -> Result<Vec<FanPartial>> {
    let fine = fan_partials(profile, r0, z0, theta0, t_end, half_width, step)?;
    let coarse = fan_partials(profile, r0, z0, theta0, t_end, 2.0 * half_width, step)?;
    if fine.len() != coarse.len() {
        return Err(Error::DegenerateFan);
    }
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f, c)| FanPartial { t: f.t, dr: (4.0 * f.dr - c.dr) / 3.0, dz: (4.0 * f.dz - c.dz) / 3.0 })
        .collect())
}

/// Normalized Fermat inner product of the ray tangent and a launch-angle partial.
fn gauss_inner(state: &crate::ray::RayState, d: &FanPartial) -> Option<f64> {
    let (rd, zd) = (state.r_dot, state.z_dot);
    let denom = rd.hypot(zd) * d.norm();
    (denom > 0.0).then(|| (rd * d.dr + zd * d.dz) / denom)
}

/// ‖(∂x/∂θ0)_t‖ at time t by two-ray central differences [m/rad].
pub fn fd_spreading(profile: &SoundSpeedProfile, z0: f64, theta0: f64, t: f64, half_width: f64) -> Result<f64> {
    let fan = fan_partials(profile, 0.0, z0, theta0, t, half_width, DEFAULT_STEP)?;
    Ok(fan[fan.len() - 1].norm())
}

/// Normalized Fermat inner product of ẋ and the extrapolated (∂x/∂θ0)_t at
/// each sample of the central ray; zero where the partial vanishes.
pub fn gauss_lemma_series(
    profile: &SoundSpeedProfile,
    z0: f64,
    theta0: f64,
    t_end: f64,
    half_width: f64,
) -> Result<Vec<(f64, f64)>> {
    let central = trace(profile, 0.0, z0, theta0, Horizon::Time(t_end), DEFAULT_STEP)?;
    if central.termination() == Termination::DomainExit {
        return Err(Error::DomainExit { t: t_end });
    }
    let fan = extrapolated_fan_partials(profile, 0.0, z0, theta0, t_end, half_width, DEFAULT_STEP)?;
    if fan.len() != central.len() {
        return Err(Error::DegenerateFan);
    }
    Ok(central
        .samples()
        .iter()
        .zip(&fan)
        .map(|(smp, d)| (smp.state.t, gauss_inner(&smp.state, d).unwrap_or(0.0)))
        .collect())
}

/// Gauss's-lemma residual at time t.
pub fn gauss_lemma_residual(profile: &SoundSpeedProfile, z0: f64, theta0: f64, t: f64) -> Result<f64> {
    let series = gauss_lemma_series(profile, z0, theta0, t, GAUSS_FAN_HALF_WIDTH)?;
    Ok(series[series.len() - 1].1)
}

/// K = c·c″ − c′² from central differences of sound-speed values only.
pub fn curvature_fd(profile: &SoundSpeedProfile, z: f64, h: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidStep(h));
    }
    let (cm, c, cp) = (profile.speed(z - h)?, profile.speed(z)?, profile.speed(z + h)?);
    let d1 = (cp - cm) / (2.0 * h);
    let d2 = (cp - 2.0 * c + cm) / (h * h);
    Ok(c * d2 - d1 * d1)
}

/// Analytic vs finite-difference curvature on `depths`, one report per depth.
pub fn curvature_reports(profile: &SoundSpeedProfile, label: &str, depths: &[f64], tolerance: f64) -> Vec<OracleReport> {
    depths
        .iter()
        .map(|&z| {
            let name = format!("{label} curvature z={z}");
            match (curvature_fd(profile, z, DEFAULT_CURVATURE_STEP), profile.curvature(z)) {
                (Ok(fd), Ok(k)) => OracleReport::relative(name, fd, k, tolerance),
                (Err(e), _) | (_, Err(e)) => OracleReport::failed(name, &e),
            }
        })
        .collect()
}

/// Tolerances of the identity suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteTolerances {
    pub equivalence: f64,
    pub oracle: f64,
    pub phase_identity: f64,
    pub gauss_lemma: f64,
    pub snell: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self { equivalence: 1e-4, oracle: 1e-3, phase_identity: 1e-6, gauss_lemma: 1e-4, snell: 1e-4 }
    }
}

/// Default probe angles [rad]: ±5°, ±15°, ±30°.
pub fn default_angles() -> Vec<f64> {
    [-30.0f64, -15.0, -5.0, 5.0, 15.0, 30.0].iter().map(|d| d.to_radians()).collect()
}

/// Runs every cross-formulation comparison for each launch angle, traced from
/// depth `z0` for `t_end` seconds. Failures become failed reports.
pub fn identity_suite(
    profile: &SoundSpeedProfile,
    z0: f64,
    angles: &[f64],
    t_end: f64,
    tolerances: SuiteTolerances,
) -> Vec<OracleReport> {
    let mut per_angle: Vec<(usize, Vec<OracleReport>)> = angles
        .par_iter()
        .enumerate()
        .map(|(i, &th)| (i, angle_reports(profile, z0, th, t_end, tolerances)))
        .collect();
    per_angle.sort_by_key(|(i, _)| *i);
    per_angle.into_iter().flat_map(|(_, r)| r).collect()
}

fn angle_reports(profile: &SoundSpeedProfile, z0: f64, theta0: f64, t_end: f64, tol: SuiteTolerances) -> Vec<OracleReport> {
    let tag = format!("θ0={:.2}°", theta0.to_degrees());
    let name = |what: &str| format!("{what} {tag}");
    let path = match trace(profile, 0.0, z0, theta0, Horizon::Time(t_end), DEFAULT_STEP) {
        Ok(p) => p,
        Err(e) => return vec![OracleReport::failed(name("trace"), &e)],
    };
    let spreading = propagate_extrinsic(profile, &path)
        .and_then(|e| Ok((e, propagate_jacobi(profile, &path)?, propagate_coupled(profile, &path)?)));
    let (ext, jac, cpl) = match spreading {
        Ok(v) => v,
        Err(e) => return vec![OracleReport::failed(name("paraxial"), &e)],
    };
    let samples = path.samples();
    let jmax = jac.iter().map(|j| j.value.abs()).fold(0.0, f64::max);
    let outside_band = |i: usize| jac[i].value.abs() > CAUSTIC_BAND * jmax;

    let mut jac_ext = None;
    let mut cpl_ext = None;
    let mut jac_cpl = None;
    let mut phase = None;
    let mut ptilde = None;
    for (i, smp) in samples.iter().enumerate().filter(|(i, _)| outside_band(*i)) {
        let c = smp.ssp.c;
        let (_, zeta) = smp.tangent();
        let (qj, qe, qc) = (c * jac[i].value, ext[i].q, c * cpl[i].q);
        jac_ext = worst(jac_ext, OracleReport::relative(name("jacobi vs extrinsic q"), qe, qj, tol.equivalence));
        cpl_ext = worst(cpl_ext, OracleReport::relative(name("coupled vs extrinsic q"), qe, qc, tol.equivalence));
        jac_cpl = worst(jac_cpl, OracleReport::relative(name("jacobi vs coupled q"), qc, qj, tol.equivalence));
        let lhs = c * c * ext[i].p / ext[i].q;
        let rhs = jac[i].rate / jac[i].value + smp.ssp.dc * zeta;
        phase = worst(phase, OracleReport::relative(name("phase identity c²p/q"), lhs, rhs, tol.phase_identity));
        let pt = jac[i].rate + smp.ssp.dc * zeta * jac[i].value;
        ptilde = worst(ptilde, OracleReport::relative(name("p̃ identity"), cpl[i].p, pt, tol.phase_identity));
    }
    let mut reports: Vec<OracleReport> = [jac_ext, cpl_ext, jac_cpl, phase, ptilde].into_iter().flatten().collect();

    // Finite-difference oracle on the same time grid.
    match fan_partials(profile, 0.0, z0, theta0, path.last().state.t, DEFAULT_FAN_HALF_WIDTH, DEFAULT_STEP) {
        Ok(fan) if fan.len() == samples.len() && path.termination() == Termination::Horizon => {
            let mut vs = [None, None, None];
            for (i, smp) in samples.iter().enumerate() {
                if !outside_band(i) {
                    continue;
                }
                let fd = fan[i].norm();
                let c = smp.ssp.c;
                let cands = [(c * jac[i].value).abs(), ext[i].q.abs(), (c * cpl[i].q).abs()];
                let labels = ["jacobi vs finite-difference q", "extrinsic vs finite-difference q", "coupled vs finite-difference q"];
                for k in 0..3 {
                    vs[k] = worst(vs[k].take(), OracleReport::relative(name(labels[k]), fd, cands[k], tol.oracle));
                }
            }
            reports.extend(vs.into_iter().flatten());
        }
        Ok(_) => reports.push(OracleReport::failed(name("finite-difference fan"), &Error::DegenerateFan)),
        Err(e) => reports.push(OracleReport::failed(name("finite-difference fan"), &e)),
    }
    let t_last = path.last().state.t;
    match extrapolated_fan_partials(profile, 0.0, z0, theta0, t_last, GAUSS_FAN_HALF_WIDTH, DEFAULT_STEP) {
        Ok(fan) if fan.len() == samples.len() => {
            let gauss = samples
                .iter()
                .zip(&fan)
                .filter_map(|(smp, d)| gauss_inner(&smp.state, d))
                .map(|g| OracleReport::absolute(name("Gauss lemma residual"), 0.0, g, tol.gauss_lemma))
                .fold(None, worst);
            reports.extend(gauss);
        }
        Ok(_) => reports.push(OracleReport::failed(name("Gauss lemma fan"), &Error::DegenerateFan)),
        Err(e) => reports.push(OracleReport::failed(name("Gauss lemma fan"), &e)),
    }

    reports.extend(snell_reports(profile, z0, theta0, &path, &ext, tol, &name));
    reports
}

fn snell_reports(
    profile: &SoundSpeedProfile,
    z0: f64,
    theta0: f64,
    path: &RayPath,
    ext: &[crate::paraxial::ExtrinsicSpreading],
    tol: SuiteTolerances,
    name: &dyn Fn(&str) -> String,
) -> Vec<OracleReport> {
    let ray = match SnellRay::new(profile, z0, theta0) {
        Ok(r) => r,
        Err(Error::HorizontalRay) => return Vec::new(),
        Err(e) => return vec![OracleReport::failed(name("Snell ray"), &e)],
    };
    let samples = path.samples();
    // First-leg samples that are not close to horizontal.
    let sin0 = theta0.sin().abs();
    let leg_end = samples
        .iter()
        .position(|smp| smp.tangent().1 * ray.heading() < 0.25 * sin0)
        .unwrap_or(samples.len());
    let leg_end = leg_end.max(1);
    let stride = (leg_end / 20).max(1);
    let mut q_rep = None;
    let mut phase_rep = None;
    for i in (1..leg_end).step_by(stride) {
        let z = samples[i].state.z;
        match ray.spreading(z) {
            Ok(s) => q_rep = worst(q_rep, OracleReport::relative(name("Snell vs extrinsic q"), ext[i].q, s.q, tol.snell)),
            Err(e) => return vec![OracleReport::failed(name("Snell vs extrinsic q"), &e)],
        }
        match ray.phase(z) {
            Ok(pq) => {
                phase_rep = worst(
                    phase_rep,
                    OracleReport::relative(name("Snell vs extrinsic p/q"), ext[i].p / ext[i].q, pq, tol.snell),
                )
            }
            Err(e) => return vec![OracleReport::failed(name("Snell vs extrinsic p/q"), &e)],
        }
    }
    [q_rep, phase_rep].into_iter().flatten().collect()
}

/// Reports as a JSON array.
pub fn reports_to_json(reports: &[OracleReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports always serialize")
}

/// Fixed-width human-readable table.
pub fn reports_to_table(reports: &[OracleReport]) -> String {
    let width = reports.iter().map(|r| r.quantity.chars().count()).max().unwrap_or(8).max(8);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  {:>24}  {:>24}  {:>10}  {:>10}  result", "quantity", "oracle", "candidate", "error", "tolerance");
    for r in reports {
        let _ = writeln!(
            out,
            "{:<width$}  {:>24.16e}  {:>24.16e}  {:>10.3e}  {:>10.1e}  {}{}",
            r.quantity,
            r.oracle,
            r.candidate,
            r.measured(),
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" },
            r.note.as_deref().map(|n| format!(" ({n})")).unwrap_or_default(),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn relative_error_floor() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_relative_eq!(relative_error(1.0, 1.1), 0.1 / 1.1);
        let r = OracleReport::absolute("x", 0.0, 1e-5, 1e-4);
        assert!(r.pass);
        assert!(!OracleReport::relative("y", 1.0, 2.0, 1e-3).pass);
        assert!(!OracleReport::failed("z", &Error::DegenerateFan).pass);
    }

    #[test]
    fn fd_spreading_constant_profile() {
        let p = SoundSpeedProfile::constant(1500.0).unwrap();
        let q = fd_spreading(&p, 1000.0, 0.3, 2.0, DEFAULT_FAN_HALF_WIDTH).unwrap();
        assert_relative_eq!(q, 3000.0, max_relative = 1e-8);
        let g = gauss_lemma_residual(&p, 1000.0, 0.3, 2.0).unwrap();
        assert!(g.abs() < 1e-8);
    }

    #[test]
    fn fd_spreading_reports_domain_exit() {
        let p = SoundSpeedProfile::constant(1500.0).unwrap().with_domain(0.0, 1100.0).unwrap();
        assert!(matches!(fd_spreading(&p, 1000.0, -0.3, 2.0, 1e-5), Err(Error::DomainExit { .. })));
    }

    #[test]
    fn curvature_fd_matches_models() {
        let flat = SoundSpeedProfile::constant(1500.0).unwrap();
        assert_eq!(curvature_fd(&flat, 10.0, DEFAULT_CURVATURE_STEP).unwrap(), 0.0);
        let duct = SoundSpeedProfile::cosh_duct(1480.0, 1000.0, 1000.0).unwrap();
        for z in [0.0, 700.0, 1000.0, 1800.0] {
            let k = curvature_fd(&duct, z, DEFAULT_CURVATURE_STEP).unwrap();
            assert_relative_eq!(k, 1480.0f64.powi(2) / 1e6, max_relative = 1e-6);
        }
    }

    #[test]
    fn table_and_json_render() {
        let reps = vec![OracleReport::relative("a", 1.0, 1.0, 1e-8), OracleReport::failed("b", &Error::AtCaustic)];
        let t = reports_to_table(&reps);
        assert!(t.contains("PASS") && t.contains("FAIL"));
        let v: serde_json::Value = serde_json::from_str(&reports_to_json(&reps)).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 2);
        assert_eq!(v[0]["pass"], true);
    }
}
