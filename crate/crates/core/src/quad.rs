//! Adaptive Gauss–Kronrod (7/15) quadrature for complex-valued integrands.
//!
//! Infinite limits are mapped onto finite ones with `x = b - (1 - s)/s`
//! (or its mirror), so no truncation is involved: an integrand that fails
//! to decay shows up as a failure to converge.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_intervals: 5000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> Result<Complex64> + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut fv = [Complex64::new(0.0, 0.0); 15];
    fv[7] = fc;
    let mut kr = fc * WGK[7];
    let mut ga = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv[j] = f1;
        fv[14 - j] = f2;
        kr += (f1 + f2) * WGK[j];
        if j % 2 == 1 {
            ga += (f1 + f2) * WG[j / 2];
        }
    }
    for v in &fv {
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
        }
    }
    let mean = kr * 0.5;
    let mut resasc = WGK[7] * (fc - mean).norm();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).norm() + (fv[14 - j] - mean).norm());
    }
    resasc *= half.abs();
    let value = kr * half;
    let mut error = ((kr - ga) * half).norm();
    if resasc > 0.0 && error > 0.0 {
        error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive<F>(f: &mut F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Complex64> + ?Sized,
{
    let mut segs = vec![kronrod(f, a, b)?];
    loop {
        let total: Complex64 = segs.iter().map(|s| s.value).sum();
        let err: f64 = segs.iter().map(|s| s.error).sum();
        let target = opts.abs_tol.max(opts.rel_tol * total.norm());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                error: err,
                evaluations: 15 * segs.len() + 15 * (segs.len() - 1),
            });
        }
        if segs.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {} subintervals (error {err:.3e})",
                segs.len()
            )));
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one segment");
        let s = segs.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a.min(s.b) && mid < s.a.max(s.b)) {
            return Err(Error::Quadrature(format!("subinterval collapsed near x = {mid}")));
        }
        segs.push(kronrod(f, s.a, mid)?);
        segs.push(kronrod(f, mid, s.b)?);
    }
}

/// `int_a^b f(x) dx`; either limit may be infinite.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    integrate_dyn(&mut f, a, b, opts)
}

type Integrand<'a> = dyn FnMut(f64) -> Result<Complex64> + 'a;

fn integrate_dyn(f: &mut Integrand<'_>, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidInput("NaN integration limit".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    if a > b {
        let r = integrate_dyn(f, b, a, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, opts),
        (false, true) => {
            let mut g = |s: f64| {
                let x = b - (1.0 - s) / s;
                Ok(f(x)? / (s * s))
            };
            adaptive(&mut g, 0.0, 1.0, opts)
        }
        (true, false) => {
            let mut g = |s: f64| {
                let x = a + (1.0 - s) / s;
                Ok(f(x)? / (s * s))
            };
            adaptive(&mut g, 0.0, 1.0, opts)
        }
        (false, false) => {
            let half = QuadOptions {
                abs_tol: 0.5 * opts.abs_tol,
                ..*opts
            };
            let l = integrate_dyn(f, f64::NEG_INFINITY, 0.0, &half)?;
            let r = integrate_dyn(f, 0.0, f64::INFINITY, &half)?;
            Ok(QuadResult {
                value: l.value + r.value,
                error: l.error + r.error,
                evaluations: l.evaluations + r.evaluations,
            })
        }
    }
}

/// `int_{x_0}^{x_j} f` at every node of an increasing grid.
pub fn cumulative<F>(mut f: F, nodes: &[f64], opts: &QuadOptions) -> Result<Vec<Complex64>>
where
    F: FnMut(usize, f64) -> Result<Complex64>,
{
    let mut out = Vec::with_capacity(nodes.len());
    let mut acc = Complex64::new(0.0, 0.0);
    if !nodes.is_empty() {
        out.push(acc);
    }
    for j in 1..nodes.len() {
        acc += integrate(|x| f(j - 1, x), nodes[j - 1], nodes[j], opts)?.value;
        out.push(acc);
    }
    Ok(out)
}
