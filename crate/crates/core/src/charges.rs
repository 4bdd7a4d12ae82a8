//! The charges `I_k = int f(w)^k dx` and their drift in time.
//!
//! Fractional powers are taken on the principal branch pointwise.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::{Characteristics, TrackedBranch};
use crate::deform::fold_to_peak;
use crate::dual::{as_integer_exponent, principal_pow, seed1};
use crate::error::{Error, Result};
use crate::model::{ChargeReport, ChargeSample, ChargeSpec, DeformedSystem, FSpec, GridSpec};
use crate::profile::ProfileAst;
use crate::quad::{integrate, QuadOptions};
use crate::shock::{complex_shock_roots, default_window, shock_events, SearchBox};

/// `z^kappa`, exact for integer `kappa`, principal otherwise.
pub fn principal_power(z: Complex64, kappa: f64) -> Complex64 {
    if let Some(n) = as_integer_exponent(Complex64::new(kappa, 0.0)) {
        return z.powi(n);
    }
    if z == Complex64::new(0.0, 0.0) {
        return if kappa > 0.0 {
            z
        } else {
            Complex64::new(f64::NAN, f64::NAN)
        };
    }
    principal_pow(z, Complex64::new(kappa, 0.0))
}

/// Which side of the map a field lives on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeMode {
    /// `int f(w)^k dx`
    Undeformed,
    /// `int f(w(u, u_x))^k dx` with `w` from the deformation map.
    Deformed,
}

fn charge_opts() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

fn integrand(
    field: &ProfileAst,
    f: &FSpec,
    kappa: f64,
    mode: ChargeMode,
    system: &DeformedSystem,
    x: f64,
) -> Result<Complex64> {
    let xc = Complex64::new(x, 0.0);
    let w = match mode {
        ChargeMode::Undeformed => field.eval_complex(xc)?,
        ChargeMode::Deformed => {
            let d = field.eval(seed1(xc))?;
            system.w_from_u(d.value, d.derivative)?
        }
    };
    Ok(principal_power(f.apply(w)?, kappa))
}

/// `I_kappa` of a profile over the whole line.
///
/// In deformed mode `field` is `u` and the system's map supplies `w`.
pub fn charge(
    field: &ProfileAst,
    f: &FSpec,
    kappa: f64,
    mode: ChargeMode,
    system: &DeformedSystem,
) -> Result<Complex64> {
    charge_on(field, f, kappa, mode, system, f64::NEG_INFINITY, f64::INFINITY)
}

/// `I_kappa` restricted to `[a, b]`.
pub fn charge_on(
    field: &ProfileAst,
    f: &FSpec,
    kappa: f64,
    mode: ChargeMode,
    system: &DeformedSystem,
    a: f64,
    b: f64,
) -> Result<Complex64> {
    ChargeSpec::new(kappa)?;
    integrate(|x| integrand(field, f, kappa, mode, system, x), a, b, &charge_opts())
        .map(|r| r.value)
        .map_err(|e| Error::Quadrature(format!("charge integrand does not decay: {e}")))
}

/// `int f(w)^kappa dx` along a tracked single branch, tails included.
pub fn branch_charge(branch: &TrackedBranch, kappa: f64) -> Result<Complex64> {
    let f = &branch.ch.f;
    let n = branch.x.len();
    let (a, b) = (branch.x[0], branch.x[n - 1]);
    let mut total = Complex64::new(0.0, 0.0);
    for (lo, hi) in [(f64::NEG_INFINITY, a), (a, b), (b, f64::INFINITY)] {
        total += integrate(
            |x| Ok(principal_power(f.apply(branch.eval(x)?.w)?, kappa)),
            lo,
            hi,
            &charge_opts(),
        )?
        .value;
    }
    Ok(total)
}

/// Composite Simpson rule on a uniform grid (trapezoid on a leftover cell).
pub fn simpson(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let cells = n - 1;
    let even = cells - cells % 2;
    let mut total = Complex64::new(0.0, 0.0);
    for j in (0..even).step_by(2) {
        total += (values[j] + values[j + 1] * 4.0 + values[j + 2]) * (h / 3.0);
    }
    if even < cells {
        total += (values[n - 2] + values[n - 1]) * (0.5 * h);
    }
    total
}

/// Deformed `I_kappa` of a sampled `u` on the grid, no tails.
pub fn sampled_deformed_charge(
    u: &[Complex64],
    grid: &GridSpec,
    system: &DeformedSystem,
    kappa: f64,
) -> Result<Complex64> {
    ChargeSpec::new(kappa)?;
    let ux = crate::direct::derivative(u, grid.spacing());
    let w = crate::deform::map_w_from_u(u, &ux, system)?.w;
    let f = system.undeformed_f();
    let vals = w
        .iter()
        .map(|&v| Ok(principal_power(f.apply(v)?, kappa)))
        .collect::<Result<Vec<_>>>()?;
    Ok(simpson(&vals, grid.spacing()))
}

/// `int |f(w0)^kappa| dx`, the scale for drifts of charges that vanish.
fn charge_scale(ch: &Characteristics, kappa: f64) -> Result<f64> {
    Ok(integrate(
        |y| {
            Ok(Complex64::new(
                principal_power(ch.g(Complex64::new(y, 0.0))?, kappa).norm(),
                0.0,
            ))
        },
        f64::NEG_INFINITY,
        f64::INFINITY,
        &charge_opts(),
    )?
    .value
    .re)
}

/// Grids used by `drift_report`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriftOptions {
    /// Grid for tracking the branch before the shock.
    pub grid: GridSpec,
    /// Characteristic labels used after the shock.
    pub labels: GridSpec,
    /// First shock time; found from the profile when absent.
    pub shock_time: Option<f64>,
}

impl Default for DriftOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                x_min: -10.0,
                x_max: 10.0,
                points: 2001,
            },
            labels: GridSpec {
                x_min: -10.0,
                x_max: 10.0,
                points: 20001,
            },
            shock_time: None,
        }
    }
}

/// The first positive shock time of `w0`, real or complex.
pub fn first_shock_time(ch: &Characteristics) -> Result<f64> {
    let window = default_window();
    let xs = window.nodes();
    if ch.w0.is_real_on(&xs) {
        let events = shock_events(ch, &window)?;
        return Ok(events.first().map_or(f64::INFINITY, |e| e.t_s));
    }
    let outcome = complex_shock_roots(&ch.w0, &ch.f, &SearchBox::default())?;
    Ok(outcome
        .roots()
        .iter()
        .map(|r| r.t_s)
        .filter(|t| *t > 0.0)
        .fold(f64::INFINITY, f64::min))
}

fn post_shock_charge(ch: &Characteristics, epsilon: f64, t: f64, kappa: f64, labels: &GridSpec) -> Result<Complex64> {
    let ys = labels.nodes();
    let lagrangian = |a: f64, b: f64| -> Result<Complex64> {
        Ok(integrate(
            |y| {
                let j = ch.g_jet2(Complex64::new(y, 0.0))?;
                Ok(principal_power(j.value, kappa) * (1.0 + j.d1 * t))
            },
            a,
            b,
            &charge_opts(),
        )?
        .value)
    };
    let whole = lagrangian(f64::NEG_INFINITY, f64::INFINITY)?;
    if epsilon == 1.0 || !ch.w0.is_real_on(&ys) {
        return Ok(whole);
    }
    let folded = fold_to_peak(ch, epsilon, t, labels)?;
    let mut total = whole;
    for lp in &folded.loops {
        total -= lagrangian(lp.labels.0, lp.labels.1)?;
    }
    Ok(total)
}

/// `I_kappa(t)` for every pair of `kappas` and `times`.
///
/// Before the first shock the charge follows the tracked branch. After it,
/// real profiles are integrated along characteristic labels with the loops
/// of the deformed profile cut out; such samples are flagged.
pub fn drift_report(
    ch: &Characteristics,
    system: &DeformedSystem,
    kappas: &[f64],
    times: &[f64],
    opts: &DriftOptions,
) -> Result<ChargeReport> {
    for &k in kappas {
        ChargeSpec::new(k)?;
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidInput(format!("negative time {t}")));
    }
    let t_s = match opts.shock_time {
        Some(t) => t,
        None => first_shock_time(ch)?,
    };
    let eps = system.epsilon;
    let references: Vec<(Complex64, f64)> = kappas
        .par_iter()
        .map(|&k| {
            let i0 = integrate(
                |y| Ok(principal_power(ch.g(Complex64::new(y, 0.0))?, k)),
                f64::NEG_INFINITY,
                f64::INFINITY,
                &charge_opts(),
            )?
            .value;
            Ok((i0, charge_scale(ch, k)?))
        })
        .collect::<Result<_>>()?;

    let jobs: Vec<(usize, f64)> = (0..kappas.len())
        .flat_map(|k| times.iter().map(move |&t| (k, t)))
        .collect();
    let samples: Vec<ChargeSample> = jobs
        .par_iter()
        .map(|&(ki, t)| {
            let kappa = kappas[ki];
            let post_shock = t >= t_s;
            let value = if t == 0.0 {
                references[ki].0
            } else if post_shock {
                post_shock_charge(ch, eps, t, kappa, &opts.labels)?
            } else {
                let branch = TrackedBranch::track(ch, t, &opts.grid, false)?;
                branch_charge(&branch, kappa)?
            };
            let (i0, scale) = references[ki];
            let denom = if i0.norm() > 1e-12 * scale { i0.norm() } else { scale };
            Ok(ChargeSample {
                t,
                kappa,
                value,
                drift: (value - i0).norm() / denom,
                post_shock,
            })
        })
        .collect::<Result<_>>()?;
    let drift = kappas
        .iter()
        .map(|&k| {
            let d = samples
                .iter()
                .filter(|s| s.kappa == k)
                .map(|s| s.drift)
                .fold(0.0, f64::max);
            (k, d)
        })
        .collect();
    Ok(ChargeReport { samples, drift })
}
