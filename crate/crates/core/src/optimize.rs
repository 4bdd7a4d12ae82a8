//! One-dimensional root bracketing and minimisation.

use crate::error::{Error, Result};

/// Bisection on a sign change of `f` in `[a, b]`.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!("no sign change on [{a}, {b}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= x_tol || m == a || m == b {
            return Ok(m);
        }
        let fm = f(m)?;
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Newton iteration on `f` safeguarded by a bracket `[a, b]` with a sign
/// change; `fd` returns `(f, f')`.
pub fn safe_newton<F>(mut fd: F, mut a: f64, mut b: f64, f_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (fa, _) = fd(a)?;
    let (fb, _) = fd(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoConvergence(format!("no sign change on [{a}, {b}]")));
    }
    let sa = fa.signum();
    let mut x = 0.5 * (a + b);
    for _ in 0..200 {
        let (fx, dfx) = fd(x)?;
        if fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx.signum() == sa {
            a = x;
        } else {
            b = x;
        }
        let step = x - fx / dfx;
        let lo = a.min(b);
        let hi = a.max(b);
        x = if dfx != 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (a + b)
        };
        if hi - lo <= 4.0 * f64::EPSILON * x.abs().max(1e-300) {
            return Ok(x);
        }
    }
    Ok(x)
}

/// Golden-section search for a minimum of a unimodal `f` on `[a, b]`.
pub fn golden_section<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > x_tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_with_bracket() {
        let r = safe_newton(|x| Ok((x.cos() - x, -x.sin() - 1.0)), 0.0, 1.0, 1e-15).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }

    #[test]
    fn golden_minimum() {
        // Flatness at the minimum limits the location to about sqrt(eps).
        let r = golden_section(|x| Ok((x - 0.3).powi(2) + 1.0), -1.0, 2.0, 1e-10).unwrap();
        assert!((r - 0.3).abs() < 1e-7);
    }

    #[test]
    fn missing_bracket_is_error() {
        assert!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12).is_err());
    }
}
