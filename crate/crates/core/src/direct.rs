//! Method-of-lines integration of `u_t = i f(u) (i u_x)^eps`, used as an
//! independent check on the characteristics route before the shock.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::pow_const;
use crate::error::{Error, Result};
use crate::model::{DeformedSystem, GridSpec};
use crate::profile::ProfileAst;
use crate::shock::{default_window, deformed_shock_time};

/// Fraction of the shock time beyond which integration is refused.
pub const SAFETY_FRACTION: f64 = 0.8;
/// Magnitude of `u` or `u_x` treated as blow-up.
pub const BLOW_UP: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectOptions {
    /// Initial time step.
    pub dt: f64,
    /// Halve `dt` until two successive runs agree to this L-infinity
    /// tolerance; `None` runs once with `dt`.
    pub refine_tol: Option<f64>,
    pub max_halvings: u32,
    /// Predicted shock time used to reject late end times.
    pub shock_time: Option<f64>,
}

impl Default for DirectOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            refine_tol: Some(1e-5),
            max_halvings: 10,
            shock_time: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSolution {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<Complex64>,
    /// Step actually used.
    pub dt: f64,
    /// L-infinity change under the last halving, if any.
    pub refinement_change: Option<f64>,
}

/// Fourth-order first derivative; third-order one-sided next to the edges.
pub fn derivative(u: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = u.len();
    let mut d = vec![Complex64::new(0.0, 0.0); n];
    if n < 5 {
        for (j, dj) in d.iter_mut().enumerate() {
            let (a, b) = (j.saturating_sub(1), (j + 1).min(n - 1));
            *dj = (u[b] - u[a]) / ((b - a) as f64 * h);
        }
        return d;
    }
    let s = 1.0 / (12.0 * h);
    d[0] = (u[0] * -25.0 + u[1] * 48.0 - u[2] * 36.0 + u[3] * 16.0 - u[4] * 3.0) * s;
    d[1] = (u[0] * -3.0 - u[1] * 10.0 + u[2] * 18.0 - u[3] * 6.0 + u[4]) * s;
    for j in 2..n - 2 {
        d[j] = (u[j - 2] - u[j - 1] * 8.0 + u[j + 1] * 8.0 - u[j + 2]) * s;
    }
    d[n - 2] = -(u[n - 1] * -3.0 - u[n - 2] * 10.0 + u[n - 3] * 18.0 - u[n - 4] * 6.0 + u[n - 5]) * s;
    d[n - 1] = -(u[n - 1] * -25.0 + u[n - 2] * 48.0 - u[n - 3] * 36.0 + u[n - 4] * 16.0 - u[n - 5] * 3.0) * s;
    d
}

fn rhs(u: &[Complex64], h: f64, system: &DeformedSystem, t: f64) -> Result<Vec<Complex64>> {
    let i = Complex64::new(0.0, 1.0);
    let ux = derivative(u, h);
    let eps = Complex64::new(system.epsilon, 0.0);
    let n = u.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 1..n - 1 {
        if !(u[j].norm() < BLOW_UP && ux[j].norm() < BLOW_UP) {
            return Err(Error::BlowUp { last_stable_time: t });
        }
        out[j] = i * system.deformed_f(u[j])? * pow_const(i * ux[j], eps);
    }
    Ok(out)
}

fn run(u0: &[Complex64], h: f64, system: &DeformedSystem, t_end: f64, dt: f64) -> Result<Vec<Complex64>> {
    let steps = (t_end / dt).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let mut u = u0.to_vec();
    let axpy = |u: &[Complex64], k: &[Complex64], a: f64| -> Vec<Complex64> {
        u.iter().zip(k).map(|(x, y)| x + y * a).collect()
    };
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = rhs(&u, h, system, t)?;
        let k2 = rhs(&axpy(&u, &k1, 0.5 * dt), h, system, t)?;
        let k3 = rhs(&axpy(&u, &k2, 0.5 * dt), h, system, t)?;
        let k4 = rhs(&axpy(&u, &k3, dt), h, system, t)?;
        for j in 0..u.len() {
            u[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (dt / 6.0);
        }
    }
    Ok(u)
}

fn linf(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Advance sampled `u0` to `t_end` with classical RK4. Edge values stay
/// fixed at those of `u0`.
pub fn integrate_deformed(
    u0: &[Complex64],
    grid: &GridSpec,
    system: &DeformedSystem,
    t_end: f64,
    opts: &DirectOptions,
) -> Result<DirectSolution> {
    if u0.len() != grid.points {
        return Err(Error::InvalidInput(format!(
            "u0 has {} samples for a grid of {}",
            u0.len(),
            grid.points
        )));
    }
    if !(t_end >= 0.0) || !(opts.dt > 0.0) {
        return Err(Error::InvalidInput("t_end must be >= 0 and dt > 0".into()));
    }
    if let Some(ts) = opts.shock_time {
        if t_end > SAFETY_FRACTION * ts {
            return Err(Error::InvalidInput(format!(
                "t_end = {t_end} is too close to the shock time {ts}"
            )));
        }
    }
    let x = grid.nodes();
    if t_end == 0.0 {
        return Ok(DirectSolution {
            t: 0.0,
            x,
            u: u0.to_vec(),
            dt: opts.dt,
            refinement_change: None,
        });
    }
    let h = grid.spacing();
    let mut dt = opts.dt.min(t_end);
    let mut u = run(u0, h, system, t_end, dt)?;
    let mut change = None;
    if let Some(tol) = opts.refine_tol {
        for _ in 0..opts.max_halvings {
            dt *= 0.5;
            let finer = run(u0, h, system, t_end, dt)?;
            let d = linf(&u, &finer);
            u = finer;
            change = Some(d);
            if d <= tol {
                break;
            }
        }
    }
    Ok(DirectSolution {
        t: t_end,
        x,
        u,
        dt,
        refinement_change: change,
    })
}

/// Sample `u0` (with any reality phase) on `grid` and integrate, checking
/// `t_end` against the predicted shock time.
pub fn integrate_profile(
    u0: &ProfileAst,
    grid: &GridSpec,
    system: &DeformedSystem,
    t_end: f64,
    opts: &DirectOptions,
) -> Result<DirectSolution> {
    let samples = grid
        .nodes()
        .into_iter()
        .map(|x| crate::initial::InitialProfile::phased_u0(u0, system, Complex64::new(x, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    let mut opts = opts.clone();
    if opts.shock_time.is_none() {
        let ts = deformed_shock_time(u0, system, &default_window())?
            .first()
            .map_or(f64::INFINITY, |e| e.t_s);
        opts.shock_time = Some(ts);
    }
    integrate_deformed(&samples, grid, system, t_end, &opts)
}
