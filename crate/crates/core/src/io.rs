//! CSV writers with round-trip decimal formatting (17 significant digits).

use std::io::Write;

use crate::beam::BeamSample;
use crate::error::{Error, Result};
use crate::paraxial::{CausticEvent, ExtrinsicSpreading, IntrinsicSpreading};
use crate::ray::RayPath;

/// Formats a value with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

/// `t,s,r,z,theta,c`, plus `q,p,ain,ain_dot` when spreading series are given.
pub fn write_ray_csv<W: Write>(
    mut out: W,
    path: &RayPath,
    spreading: Option<(&[ExtrinsicSpreading], &[IntrinsicSpreading])>,
) -> Result<()> {
    if let Some((e, i)) = spreading {
        if e.len() != path.len() || i.len() != path.len() {
            return Err(Error::GridMismatch("spreading series do not match the path".into()));
        }
        writeln!(out, "t,s,r,z,theta,c,q,p,ain,ain_dot")?;
    } else {
        writeln!(out, "t,s,r,z,theta,c")?;
    }
    for (k, smp) in path.samples().iter().enumerate() {
        let st = smp.state;
        let mut row = vec![st.t, st.s, st.r, st.z, st.theta(), smp.ssp.c];
        if let Some((e, i)) = spreading {
            row.extend([e[k].q, e[k].p, i[k].value, i[k].rate]);
        }
        writeln!(out, "{}", join(&row))?;
    }
    Ok(())
}

/// `index,t,s,r,z`.
pub fn write_caustics_csv<W: Write>(mut out: W, events: &[CausticEvent]) -> Result<()> {
    writeln!(out, "index,t,s,r,z")?;
    for ev in events {
        writeln!(out, "{},{}", ev.index, join(&[ev.t, ev.s, ev.r, ev.z]))?;
    }
    Ok(())
}

/// `s,eta,r,z,amp,phase`.
pub fn write_beam_csv<W: Write>(mut out: W, samples: &[BeamSample]) -> Result<()> {
    writeln!(out, "s,eta,r,z,amp,phase")?;
    for b in samples {
        writeln!(out, "{}", join(&[b.s, b.offset, b.r, b.z, b.amplitude, b.phase]))?;
    }
    Ok(())
}
