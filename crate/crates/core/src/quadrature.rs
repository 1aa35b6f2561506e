//! Globally adaptive 7-point Gauss / 15-point Kronrod quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(centre - dx)? + f(centre + dx)?;
        k += WGK[j] * sum;
        if j % 2 == 1 {
            g += WG[j / 2] * sum;
        }
    }
    let value = k * half;
    let error = ((k - g) * half).abs();
    if !value.is_finite() {
        return Err(Error::Quadrature { error: f64::INFINITY });
    }
    Ok(Segment { a, b, value, error })
}

/// ∫ₐᵇ f by bisecting the worst interval until the summed Kronrod–Gauss
/// difference is below max(abs_tol, rel_tol·|I|).
pub fn integrate<F>(mut f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Quadrature>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    let mut heap = BinaryHeap::new();
    let first = kronrod(&mut f, a, b)?;
    let (mut value, mut error) = (first.value, first.error);
    let mut evaluations = 15;
    heap.push(first);
    while error > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { error });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            return Err(Error::Quadrature { error });
        }
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        evaluations += 30;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let value = heap.iter().map(|s| s.value).sum();
    let error = heap.iter().map(|s| s.error).sum();
    Ok(Quadrature { value, error, evaluations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = integrate(|x| Ok(x.powi(9) - 3.0 * x * x), -1.0, 2.0, 1e-10, 0.0).unwrap();
        let exact = (2f64.powi(10) - 1.0) / 10.0 - (8.0 + 1.0);
        assert!((q.value - exact).abs() < 1e-12);
        assert_eq!(q.evaluations, 15);
    }

    #[test]
    fn adapts_to_peaks_and_reverses_orientation() {
        let f = |x: f64| Ok(1.0 / (1e-4 + x * x));
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        let q = integrate(f, -1.0, 1.0, 1e-9, 0.0).unwrap();
        assert!((q.value - exact).abs() < 1e-8, "{} vs {exact}", q.value);
        let back = integrate(f, 1.0, -1.0, 1e-9, 0.0).unwrap();
        assert!((back.value + exact).abs() < 1e-8);
    }

    #[test]
    fn propagates_integrand_errors() {
        let r = integrate(|x| if x > 0.5 { Err(Error::ZeroGradient) } else { Ok(x) }, 0.0, 1.0, 1e-9, 0.0);
        assert!(matches!(r, Err(Error::ZeroGradient)));
        assert!(matches!(
            integrate(|x| Ok(1.0 / x.abs().sqrt().max(1e-300).powi(3)), -1.0, 1.0, 1e-12, 0.0),
            Err(Error::Quadrature { .. })
        ));
    }
}
