//! Fixed-step classical Runge–Kutta and cubic Hermite helpers.

/// One classical 4th-order Runge–Kutta step of `y' = f(x, y)`.
///
/// `f` may fail (for instance when a stage leaves the profile interval); the
/// error is passed through unchanged.
pub fn rk4_step<const N: usize, E>(
    x: f64,
    y: &[f64; N],
    h: f64,
    mut f: impl FnMut(f64, &[f64; N]) -> Result<[f64; N], E>,
) -> Result<[f64; N], E> {
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| -> [f64; N] {
        let mut out = *a;
        for (o, bi) in out.iter_mut().zip(b) {
            *o += s * bi;
        }
        out
    };
    let k1 = f(x, y)?;
    let k2 = f(x + 0.5 * h, &axpy(y, 0.5 * h, &k1))?;
    let k3 = f(x + 0.5 * h, &axpy(y, 0.5 * h, &k2))?;
    let k4 = f(x + h, &axpy(y, h, &k3))?;
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Cubic Hermite interpolation on `[0, h]` from end values and slopes.
/// Returns the value and first derivative at local coordinate `tau`.
pub fn hermite(y0: f64, d0: f64, y1: f64, d1: f64, h: f64, tau: f64) -> (f64, f64) {
    let u = tau / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * u2 - 6.0 * u) / h;
    let dh10 = 3.0 * u2 - 4.0 * u + 1.0;
    let dh01 = (-6.0 * u2 + 6.0 * u) / h;
    let dh11 = 3.0 * u2 - 2.0 * u;
    let slope = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, slope)
}
