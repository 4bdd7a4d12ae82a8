//! Catastrophe times: real minimisation, complex shock conditions and
//! gradient/curvature classification.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::Characteristics;
use crate::deform::derivative_extrema;
use crate::dual::{pow_const, seed2};
use crate::error::{Error, Result};
use crate::initial::InitialProfile;
use crate::model::{CatastropheKind, DeformedSystem, FSpec, GridSpec, ShockEvent, SystemSide};
use crate::optimize::{golden_section, safe_newton};
use crate::profile::ProfileAst;

/// Default scan window and resolution for real catastrophe times.
pub fn default_window() -> GridSpec {
    GridSpec {
        x_min: -10.0,
        x_max: 10.0,
        points: 4001,
    }
}

/// Relative imaginary part of `g'` above which catastrophe times are complex.
const COMPLEX_RATIO: f64 = 1e-8;

/// `t_gc(x0) = -1 / g'(x0)`, `g = f(w0)`; infinite where `g' >= 0`.
pub fn catastrophe_time(ch: &Characteristics, x0: f64) -> Result<f64> {
    let d = ch.g_jet2(Complex64::new(x0, 0.0))?.d1.re;
    Ok(if d < 0.0 { -1.0 / d } else { f64::INFINITY })
}

fn g_derivatives(ch: &Characteristics, x0: f64) -> Result<(f64, f64, f64, f64)> {
    let j = ch.g_jet3(Complex64::new(x0, 0.0))?;
    Ok((j.value.re, j.d1.re, j.d2.re, j.d3.re))
}

/// Check that `g'` is real on the window; complex values mean the profile
/// needs a reality phase.
fn ensure_real_slopes(ch: &Characteristics, xs: &[f64]) -> Result<()> {
    let mut worst: f64 = 0.0;
    for &x in xs {
        if let Ok(j) = ch.g_jet2(Complex64::new(x, 0.0)) {
            let d = j.d1;
            if d.norm() > 1e-300 {
                worst = worst.max(d.im.abs() / d.norm());
            }
        }
    }
    if worst > COMPLEX_RATIO {
        Err(Error::ComplexCatastropheTime { ratio: worst })
    } else {
        Ok(())
    }
}

/// All positive local minima of the catastrophe time on the window.
pub fn find_shock_events(w0: &InitialProfile, f: &FSpec, window: &GridSpec) -> Result<Vec<ShockEvent>> {
    let ch = Characteristics::new(w0.clone(), f.clone());
    shock_events(&ch, window)
}

pub(crate) fn shock_events(ch: &Characteristics, window: &GridSpec) -> Result<Vec<ShockEvent>> {
    let xs = window.nodes();
    ensure_real_slopes(ch, &xs)?;
    let t: Vec<f64> = xs
        .par_iter()
        .map(|&x| catastrophe_time(ch, x).unwrap_or(f64::INFINITY))
        .collect();
    let h = window.spacing();
    let mut events = Vec::new();
    for k in 1..xs.len() - 1 {
        if !t[k].is_finite() || !t[k - 1].is_finite() || !t[k + 1].is_finite() {
            continue;
        }
        if !(t[k] < t[k - 1] && t[k] <= t[k + 1]) {
            continue;
        }
        let x0 = refine_minimum(ch, xs[k] - h, xs[k] + h)?;
        let (g, d1, _, _) = g_derivatives(ch, x0)?;
        if !(d1 < 0.0) {
            continue;
        }
        let t_s = -1.0 / d1;
        let ev = ShockEvent {
            t_s,
            x_s: g * t_s + x0,
            x0_seed: Complex64::new(x0, 0.0),
            kind: CatastropheKind::Gradient,
            system: SystemSide::Undeformed,
        };
        if !events.iter().any(|e: &ShockEvent| (e.x0_seed.re - x0).abs() < 1e-9) {
            events.push(ev);
        }
    }
    sort_events(&mut events);
    Ok(events)
}

fn sort_events(events: &mut [ShockEvent]) {
    events.sort_by(|a, b| a.t_s.total_cmp(&b.t_s).then(a.x_s.total_cmp(&b.x_s)));
}

/// Minimum of `t_gc` near a scan minimum: a minimum of `t_gc` is a zero of
/// `g''` with `g' < 0`, polished by Newton with `g'''` until
/// `|t_gc'| = |g''/g'^2| < 1e-12`.
fn refine_minimum(ch: &Characteristics, a: f64, b: f64) -> Result<f64> {
    let g2 = |x: f64| g_derivatives(ch, x).map(|(_, _, d2, d3)| (d2, d3));
    let (ga, _) = g2(a)?;
    let (gb, _) = g2(b)?;
    let mut x = if ga.signum() != gb.signum() {
        safe_newton(g2, a, b, 0.0)?
    } else {
        golden_section(|x| catastrophe_time(ch, x), a, b, 1e-9)?
    };
    for _ in 0..20 {
        let (_, d1, d2, d3) = g_derivatives(ch, x)?;
        if (d2 / (d1 * d1)).abs() < 1e-12 || d3 == 0.0 {
            break;
        }
        let next = x - d2 / d3;
        if !(next > a - (b - a) && next < b + (b - a)) {
            break;
        }
        x = next;
    }
    let (_, d1, d2, _) = g_derivatives(ch, x)?;
    if (d2 / (d1 * d1)).abs() > 1e-9 {
        return Err(Error::NoConvergence(format!(
            "catastrophe-time minimum near x0 = {x} did not converge"
        )));
    }
    Ok(x)
}

fn require_power_law(system: &DeformedSystem) -> Result<()> {
    match system.f_spec {
        FSpec::Power(_) => Ok(()),
        FSpec::Expr(_) => Err(Error::InvalidInput("deformed shock times need a power-law f".into())),
    }
}

/// Shock/peak events of the deformed system with initial data `u0`.
///
/// `u0` is carried to `w0` by the map and the undeformed catastrophe time is
/// minimised; each event is then classified on the deformed side.
pub fn deformed_shock_time(u0: &ProfileAst, system: &DeformedSystem, window: &GridSpec) -> Result<Vec<ShockEvent>> {
    require_power_law(system)?;
    let ch = Characteristics::for_system(u0.clone(), system);
    let mut events = shock_events(&ch, window)?;
    for ev in &mut events {
        ev.system = SystemSide::Deformed;
        ev.kind = classify_catastrophe(ev, &ch, system.epsilon)?.kind()?;
    }
    Ok(events)
}

/// Catastrophe times straight from `u0` without going through `w0`:
/// `t = -1 / d/dx0 [eps u0 (i u0')^(eps-1)]`, expanded by the product rule.
/// Only meaningful for `n = 1`.
pub fn direct_deformed_times(u0: &ProfileAst, system: &DeformedSystem, window: &GridSpec) -> Result<Vec<(f64, f64)>> {
    if system.power() != 1 {
        return Err(Error::InvalidInput("the direct formula holds for f(w) = w only".into()));
    }
    let eps = system.epsilon;
    let i = Complex64::new(0.0, 1.0);
    let slope = |x: f64| -> Result<(Complex64, Complex64)> {
        let j: crate::dual::Jet2 = InitialProfile::phased_u0(u0, system, seed2(Complex64::new(x, 0.0)))?.into();
        let (u, du, ddu) = (j.value, j.d1, j.d2);
        let e1 = Complex64::new(eps - 1.0, 0.0);
        let p1 = pow_const(i * du, e1);
        let p2 = pow_const(i * du, e1 - 1.0);
        let w = u * p1 * eps;
        let dw = du * p1 * eps + u * p2 * i * ddu * eps * (eps - 1.0);
        Ok((w, dw))
    };
    let xs = window.nodes();
    let mut worst: f64 = 0.0;
    let mut t = Vec::with_capacity(xs.len());
    for &x in &xs {
        match slope(x) {
            Ok((_, d)) => {
                if d.norm() > 1e-300 {
                    worst = worst.max(d.im.abs() / d.norm());
                }
                t.push(if d.re < 0.0 { -1.0 / d.re } else { f64::INFINITY });
            }
            Err(_) => t.push(f64::INFINITY),
        }
    }
    if worst > COMPLEX_RATIO {
        return Err(Error::ComplexCatastropheTime { ratio: worst });
    }
    let h = window.spacing();
    let mut out = Vec::new();
    for k in 1..xs.len() - 1 {
        if t[k].is_finite() && t[k - 1].is_finite() && t[k + 1].is_finite() && t[k] < t[k - 1] && t[k] <= t[k + 1] {
            let tk = |x: f64| -> Result<f64> {
                let (_, d) = slope(x)?;
                Ok(if d.re < 0.0 { -1.0 / d.re } else { f64::INFINITY })
            };
            let x0 = golden_section(tk, xs[k] - h, xs[k] + h, 1e-13)?;
            let (w, d) = slope(x0)?;
            let ts = -1.0 / d.re;
            out.push((ts, w.re * ts + x0));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

/// Axis-aligned rectangle in the complex `x0` plane with a seed lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Lattice points per side.
    pub lattice: usize,
}

impl Default for SearchBox {
    fn default() -> Self {
        Self {
            re_min: -3.0,
            re_max: 3.0,
            im_min: -3.0,
            im_max: 3.0,
            lattice: 41,
        }
    }
}

impl SearchBox {
    fn contains(&self, z: Complex64) -> bool {
        let m = 1e-9;
        z.re >= self.re_min - m && z.re <= self.re_max + m && z.im >= self.im_min - m && z.im <= self.im_max + m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexShockRoot {
    pub x0: Complex64,
    /// Signed; negative times belong to the backward evolution.
    pub t_s: f64,
    pub x_s: f64,
    /// Max of the two imaginary-part conditions at the root.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ComplexShockOutcome {
    Roots {
        roots: Vec<ComplexShockRoot>,
    },
    /// A real profile satisfies the second condition on the whole real
    /// line; the real minimisation is used instead.
    RealDegenerate {
        events: Vec<ShockEvent>,
    },
}

impl ComplexShockOutcome {
    pub fn roots(&self) -> &[ComplexShockRoot] {
        match self {
            ComplexShockOutcome::Roots { roots } => roots,
            ComplexShockOutcome::RealDegenerate { .. } => &[],
        }
    }
}

const DEDUP_COMPLEX: f64 = 1e-6;

/// `(Im g', Im(x0 - g/g'))` and their Jacobian in `(Re x0, Im x0)`.
type Conditions = ([f64; 2], [[f64; 2]; 2], Complex64, Complex64);

fn conditions(ch: &Characteristics, z: Complex64) -> Result<Conditions> {
    let j = ch.g_jet2(z)?;
    let (g, g1, g2) = (j.value, j.d1, j.d2);
    let h2 = z - g / g1;
    let dh2 = g * g2 / (g1 * g1);
    let f = [g1.im, h2.im];
    // For analytic h: d/da Im h = Im h', d/db Im h = Re h'.
    let jac = [[g2.im, g2.re], [dh2.im, dh2.re]];
    Ok((f, jac, g1, h2))
}

fn complex_newton(ch: &Characteristics, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    let norm = |f: [f64; 2]| f[0].abs().max(f[1].abs());
    let (mut f, mut jac, _, _) = conditions(ch, z).ok()?;
    for _ in 0..100 {
        if norm(f) < 1e-14 {
            break;
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let da = (f[0] * jac[1][1] - f[1] * jac[0][1]) / det;
        let db = (jac[0][0] * f[1] - jac[1][0] * f[0]) / det;
        let mut lambda = 1.0;
        loop {
            let trial = z - Complex64::new(da, db) * lambda;
            if let Ok((ft, jt, _, _)) = conditions(ch, trial) {
                if norm(ft) < norm(f) || lambda < 1e-3 {
                    z = trial;
                    f = ft;
                    jac = jt;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return None;
            }
        }
        if (da * da + db * db).sqrt() * lambda < 1e-15 * (1.0 + z.norm()) {
            break;
        }
    }
    if norm(f) < 1e-11 {
        Some(z)
    } else {
        None
    }
}

/// Solutions of `Im g'(x0) = 0` and `Im(x0 - g/g') = 0` in the box.
pub fn complex_shock_roots(w0: &InitialProfile, f: &FSpec, search_box: &SearchBox) -> Result<ComplexShockOutcome> {
    let ch = Characteristics::new(w0.clone(), f.clone());
    let n = search_box.lattice.max(2);
    let test: Vec<f64> = (0..201)
        .map(|k| search_box.re_min + (search_box.re_max - search_box.re_min) * k as f64 / 200.0)
        .collect();
    let degenerate = test.iter().all(|&x| match ch.g_jet2(Complex64::new(x, 0.0)) {
        Ok(j) => j.value.im.abs() < 1e-12 && j.d1.im.abs() < 1e-12,
        Err(_) => true,
    });
    if degenerate {
        let window = GridSpec::new(search_box.re_min, search_box.re_max, 4001)?;
        return Ok(ComplexShockOutcome::RealDegenerate {
            events: shock_events(&ch, &window)?,
        });
    }
    let seeds: Vec<Complex64> = (0..n)
        .flat_map(|a| {
            (0..n).map(move |b| {
                Complex64::new(
                    search_box.re_min + (search_box.re_max - search_box.re_min) * a as f64 / (n - 1) as f64,
                    search_box.im_min + (search_box.im_max - search_box.im_min) * b as f64 / (n - 1) as f64,
                )
            })
        })
        .collect();
    let found: Vec<Complex64> = seeds.par_iter().filter_map(|&s| complex_newton(&ch, s)).collect();
    let mut roots: Vec<ComplexShockRoot> = Vec::new();
    for z in found {
        if !search_box.contains(z) || roots.iter().any(|r| (r.x0 - z).norm() < DEDUP_COMPLEX) {
            continue;
        }
        let Ok((fv, _, g1, h2)) = conditions(&ch, z) else {
            continue;
        };
        if g1.norm() < 1e-8 {
            continue;
        }
        roots.push(ComplexShockRoot {
            x0: z,
            t_s: -1.0 / g1.re,
            x_s: h2.re,
            residual: fv[0].abs().max(fv[1].abs()),
        });
    }
    roots.sort_by(|a, b| {
        a.t_s
            .total_cmp(&b.t_s)
            .then(a.x_s.total_cmp(&b.x_s))
            .then(a.x0.im.total_cmp(&b.x0.im))
    });
    Ok(ComplexShockOutcome::Roots { roots })
}

/// Peak values of `|u_x|` and `|u_xx|` near a catastrophe at one time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub t: f64,
    pub max_ux: f64,
    pub max_uxx: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Option<CatastropheKind>,
    pub ux_growth: f64,
    pub uxx_growth: f64,
    pub samples: Vec<GrowthSample>,
}

impl Classification {
    pub fn kind(&self) -> Result<CatastropheKind> {
        self.kind.ok_or(Error::Inconclusive {
            ux_growth: self.ux_growth,
            uxx_growth: self.uxx_growth,
        })
    }
}

/// Growth thresholds across a four-fold refinement.
pub const GRADIENT_GROWTH: f64 = 2.0;
pub const CURVATURE_GROWTH: f64 = 4.0;

/// Compare the first and last of a sequence of samples approaching `t_s`.
pub fn classify_growth(samples: &[GrowthSample]) -> Result<Classification> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput("classification needs at least two samples".into()));
    }
    let first = samples[0];
    let last = samples[samples.len() - 1];
    let ux_growth = last.max_ux / first.max_ux;
    let uxx_growth = last.max_uxx / first.max_uxx;
    let kind = if ux_growth >= GRADIENT_GROWTH {
        Some(CatastropheKind::Gradient)
    } else if uxx_growth >= CURVATURE_GROWTH {
        Some(CatastropheKind::Curvature)
    } else {
        None
    };
    Ok(Classification {
        kind,
        ux_growth,
        uxx_growth,
        samples: samples.to_vec(),
    })
}

/// Sample `max |u_x|` and `max |u_xx|` of the deformed solution at
/// `t_s - delta 4^-k`, `k = 0, 1, 2`, on label windows shrinking by half,
/// and classify the growth.
pub fn classify_catastrophe(event: &ShockEvent, ch: &Characteristics, epsilon: f64) -> Result<Classification> {
    let delta = 0.1 * event.t_s;
    let center = event.x0_seed.re;
    let samples = (0..3)
        .map(|k| {
            let scale = 0.25f64.powi(k);
            let t = event.t_s - delta * scale;
            let half = 0.25 * 0.5f64.powi(k);
            let (ux, uxx) = derivative_extrema(ch, epsilon, t, center, half, 401)?;
            Ok(GrowthSample {
                t,
                max_ux: ux,
                max_uxx: uxx,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    classify_growth(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::parse;

    fn w(src: &str) -> InitialProfile {
        InitialProfile::W(parse(src).unwrap())
    }

    #[test]
    fn cauchy_w0_events() {
        let ev = find_shock_events(&w("-12*x^2/(1+x^2)^5"), &FSpec::Power(1), &default_window()).unwrap();
        assert_eq!(ev.len(), 2);
        assert!((ev[0].t_s - 0.311791).abs() < 1e-4 * 0.311791);
        assert!((ev[0].x_s - 0.0770263).abs() < 1e-4 * 0.0770263);
        assert!((ev[1].t_s - 0.644466).abs() < 1e-4 * 0.644466);
        assert!((ev[1].x_s + 1.21712).abs() < 1e-4 * 1.21712);
    }

    #[test]
    fn gaussian_w0_event() {
        let ev = find_shock_events(&w("-4*x*exp(-2*x^2)"), &FSpec::Power(1), &default_window()).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].t_s - 0.25).abs() < 1e-8);
        assert!(ev[0].x_s.abs() < 1e-6);
    }

    #[test]
    fn expanding_profile_has_no_events() {
        let ev = find_shock_events(&w("exp(x)/(exp(x)+exp(-x))"), &FSpec::Power(1), &default_window()).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn events_are_strict_minima_with_consistent_positions() {
        let p = w("-12*x^2/(1+x^2)^5");
        let ch = Characteristics::new(p.clone(), FSpec::Power(1));
        for ev in find_shock_events(&p, &FSpec::Power(1), &default_window()).unwrap() {
            let x0 = ev.x0_seed.re;
            let t0 = catastrophe_time(&ch, x0).unwrap();
            assert!(catastrophe_time(&ch, x0 + 1e-4).unwrap() > t0);
            assert!(catastrophe_time(&ch, x0 - 1e-4).unwrap() > t0);
            let g = ch.g(Complex64::new(x0, 0.0)).unwrap().re;
            assert!((ev.x_s - (g * ev.t_s + x0)).abs() < 1e-12);
        }
    }

    #[test]
    fn complex_t_gc_demands_phase() {
        let sys = DeformedSystem::burgers(2.0).unwrap();
        let err = deformed_shock_time(&parse("exp(-x^2)").unwrap(), &sys, &default_window()).unwrap_err();
        assert!(matches!(err, Error::ComplexCatastropheTime { .. }));
    }

    #[test]
    fn shift_covariance() {
        let p = w("-12*x^2/(1+x^2)^5");
        let a = 0.37;
        let win = default_window();
        let e1 = find_shock_events(&p, &FSpec::Power(1), &win).unwrap();
        let e2 = find_shock_events(&p.shifted(a), &FSpec::Power(1), &win).unwrap();
        assert_eq!(e1.len(), e2.len());
        for (a1, a2) in e1.iter().zip(&e2) {
            assert!((a1.t_s - a2.t_s).abs() < 1e-8);
            assert!((a2.x_s - a1.x_s - a).abs() < 1e-8);
            assert!((a2.x0_seed.re - a1.x0_seed.re - a).abs() < 1e-8);
        }
    }

    #[test]
    fn complex_roots_of_lorentzian() {
        let out = complex_shock_roots(&w("exp(i*pi/4)/(1+x^2)"), &FSpec::Power(1), &SearchBox::default()).unwrap();
        let roots = out.roots();
        assert_eq!(roots.len(), 2);
        for r in roots {
            assert!(r.residual < 1e-10);
        }
        let pos = roots.iter().find(|r| r.t_s > 0.0).unwrap();
        assert!((pos.x0 - Complex64::new(0.164903, -0.553299)).norm() < 1e-3);
        assert!((pos.t_s - 0.4791).abs() < 1e-3);
        assert!((pos.x_s - 0.494709).abs() < 1e-3);
        let neg = roots.iter().find(|r| r.t_s < 0.0).unwrap();
        assert!((neg.x0 + pos.x0).norm() < 1e-9);
        assert!((neg.t_s + pos.t_s).abs() < 1e-9);
    }

    #[test]
    fn real_profile_is_degenerate() {
        let out = complex_shock_roots(&w("-4*x*exp(-2*x^2)"), &FSpec::Power(1), &SearchBox::default()).unwrap();
        match out {
            ComplexShockOutcome::RealDegenerate { events } => {
                assert!((events[0].t_s - 0.25).abs() < 1e-8)
            }
            other => panic!("expected degenerate outcome, got {other:?}"),
        }
    }

    #[test]
    fn growth_rule() {
        let s = |ux, uxx| GrowthSample {
            t: 0.0,
            max_ux: ux,
            max_uxx: uxx,
        };
        let c = classify_growth(&[s(1.0, 1.0), s(1.1, 16.0)]).unwrap();
        assert_eq!(c.kind, Some(CatastropheKind::Curvature));
        let g = classify_growth(&[s(1.0, 1.0), s(2.5, 40.0)]).unwrap();
        assert_eq!(g.kind, Some(CatastropheKind::Gradient));
        let n = classify_growth(&[s(1.0, 1.0), s(1.2, 1.5)]).unwrap();
        assert!(n.kind().is_err());
    }

    #[test]
    fn undeformed_limit_is_gradient() {
        let sys = DeformedSystem::burgers(1.0).unwrap();
        let ev = deformed_shock_time(&parse("1/(1+x^2)").unwrap(), &sys, &default_window()).unwrap();
        assert!(!ev.is_empty());
        assert!(ev.iter().all(|e| e.kind == CatastropheKind::Gradient));
    }
}
