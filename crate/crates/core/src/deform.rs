//! The explicit map between the undeformed and deformed equations.
//!
//! Going from `w` back to `u` uses `A = u^(eps/(eps-1))`, which satisfies
//! `A_x = K w^(1/(eps-1))` with `K = -i eps^((eps-2)/(eps-1)) / (eps-1)`.
//! The root `r = w^(1/(eps-1))` is continued analytically along the path
//! (it changes sign across double zeros of `w`) and is principal at the
//! anchoring end. `u = A^q`, `q = (eps-1)/eps`, is chosen by continuity.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristics::{Characteristics, FieldPoint, TrackedBranch};
use crate::dual::{as_integer_exponent, pow_const, principal_pow};
use crate::error::{Error, Result};
use crate::initial::InitialProfile;
use crate::model::{DeformedSystem, FSpec, GridSpec};
use crate::quad::{integrate, QuadOptions};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Constants of the inverse map for one `eps`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MapConstants {
    pub epsilon: f64,
    /// `1/(eps-1)`
    pub p: f64,
    /// `(eps-1)/eps`
    pub q: f64,
    pub k: Complex64,
}

impl MapConstants {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || epsilon == 1.0 {
            return Err(Error::InvalidInput(format!(
                "the inverse map needs eps > 0 and eps != 1, got {epsilon}"
            )));
        }
        let e = epsilon;
        Ok(Self {
            epsilon: e,
            p: 1.0 / (e - 1.0),
            q: (e - 1.0) / e,
            k: Complex64::new(0.0, -e.powf((e - 2.0) / (e - 1.0)) / (e - 1.0)),
        })
    }

    /// `A` for a boundary value of `u`.
    pub fn a_from_u(&self, u: Complex64) -> Complex64 {
        if u == zero() {
            zero()
        } else {
            pow_const(u, c(1.0 / self.q))
        }
    }
}

/// All values of `z^e` for real `e`: the principal one times `exp(2 pi i k e)`.
pub fn root_candidates(z: Complex64, e: f64) -> Vec<Complex64> {
    if let Some(n) = as_integer_exponent(c(e)) {
        return vec![if z == zero() && n < 0 {
            c(f64::NAN)
        } else {
            pow_const(z, c(e))
        }];
    }
    if z == zero() {
        return vec![if e > 0.0 { zero() } else { c(f64::NAN) }];
    }
    let base = principal_pow(z, c(e));
    let m = (1.0 / e.abs()).ceil() as i32 + 1;
    let mut out: Vec<Complex64> = Vec::new();
    for k in -m..=m {
        let v = base * Complex64::from_polar(1.0, 2.0 * PI * k as f64 * e);
        if !out.iter().any(|o| (o - v).norm() <= 1e-12 * v.norm()) {
            out.push(v);
        }
    }
    out
}

/// The value of `z^e` closest to `reference`.
pub fn nearest_root(z: Complex64, e: f64, reference: Complex64) -> Complex64 {
    root_candidates(z, e)
        .into_iter()
        .min_by(|a, b| (a - reference).norm().total_cmp(&(b - reference).norm()))
        .expect("at least one candidate")
}

/// The value of `z^e` whose direction is closest to that of `reference`.
fn aligned_root(z: Complex64, e: f64, reference: Complex64) -> Complex64 {
    root_candidates(z, e)
        .into_iter()
        .max_by(|a, b| {
            let sa = (a * reference.conj()).re / (a.norm() + 1e-300);
            let sb = (b * reference.conj()).re / (b.norm() + 1e-300);
            sa.total_cmp(&sb)
        })
        .expect("at least one candidate")
}

/// Continue `z_j^e` along a sequence: principal at the first element (or
/// nearest to `start` if given), then nearest to the linear extrapolation.
pub fn continue_roots(zs: &[Complex64], e: f64, start: Option<Complex64>) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(zs.len());
    for (j, &z) in zs.iter().enumerate() {
        let v = match j {
            0 => match start {
                Some(s) if s != zero() => nearest_root(z, e, s),
                _ => {
                    if z == zero() {
                        root_candidates(z, e)[0]
                    } else {
                        principal_pow(z, c(e))
                    }
                }
            },
            1 => nearest_root(z, e, out[0]),
            _ => nearest_root(z, e, out[j - 1] * 2.0 - out[j - 2]),
        };
        out.push(v);
    }
    out
}

/// Continue `u = A^q` along a parameter `s`. `dlog` holds `d(log u)/ds`,
/// which does not depend on the root, so `u_j exp(int dlog)` predicts the
/// next root even on coarse grids. Near zeros of `u` the log-derivative has
/// a pole and linear extrapolation takes over.
fn continue_u(a: &[Complex64], dlog: &[Complex64], s: &[f64], q: f64, start: Complex64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(a.len());
    for j in 0..a.len() {
        let reference = if j == 0 {
            start
        } else {
            let h = s[j] - s[j - 1];
            // A zero of u inside the cell puts an end within h/2 of it; a
            // zero on a node shows up as a collapse of |u|.
            let collapsed = j >= 2 && out[j - 1].norm() < 0.2 * out[j - 2].norm();
            let smooth = !collapsed && (dlog[j - 1] * h).norm() < 1.5 && (dlog[j] * h).norm() < 1.5;
            if smooth && out[j - 1] != zero() {
                out[j - 1] * ((dlog[j - 1] + dlog[j]) * (0.5 * h)).exp()
            } else if j >= 2 {
                out[j - 1] * 2.0 - out[j - 2]
            } else {
                out[j - 1]
            }
        };
        out.push(if reference == zero() || !reference.is_finite() {
            principal_or_zero(a[j], q)
        } else {
            nearest_root(a[j], q, reference)
        });
    }
    out
}

/// `w` from a sampled `u` and `u_x` with the principal map; for `n > 1` the
/// `n`-th root is continued along the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WField {
    pub w: Vec<Complex64>,
    /// Points where `u` vanishes and the `n`-th root is ambiguous.
    pub ambiguous: Vec<bool>,
}

pub fn map_w_from_u(u: &[Complex64], u_x: &[Complex64], system: &DeformedSystem) -> Result<WField> {
    if u.len() != u_x.len() {
        return Err(Error::InvalidInput("u and u_x differ in length".into()));
    }
    let n = system.power();
    let inner: Vec<Complex64> = match &system.f_spec {
        FSpec::Power(_) => {
            let one = DeformedSystem::burgers(system.epsilon)?;
            u.iter()
                .zip(u_x)
                .map(|(&a, &b)| one.w_from_u(a, b))
                .collect::<Result<_>>()?
        }
        FSpec::Expr(_) => u
            .iter()
            .zip(u_x)
            .map(|(&a, &b)| system.w_from_u(a, b))
            .collect::<Result<_>>()?,
    };
    let w = if n == 1 || matches!(system.f_spec, FSpec::Expr(_)) {
        inner
    } else {
        continue_roots(&inner, 1.0 / n as f64, None)
    };
    let scale = u.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let ambiguous = u
        .iter()
        .map(|v| n > 1 && v.norm() <= 1e-12 * scale.max(1e-300))
        .collect();
    Ok(WField { w, ambiguous })
}

/// Which asymptotic value of `u` fixes the integration constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `u(-inf)`
    Left(Complex64),
    /// `u(+inf)`
    Right(Complex64),
}

impl Anchor {
    pub fn value(&self) -> Complex64 {
        match *self {
            Anchor::Left(v) | Anchor::Right(v) => v,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UPoint {
    pub x: f64,
    pub w: Complex64,
    pub u: Complex64,
    pub u_x: Complex64,
    pub u_xx: Complex64,
    pub a: Complex64,
    /// `A = 0` with `r != 0`: `u_x` diverges here.
    pub singular: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UField {
    pub x: Vec<f64>,
    pub w: Vec<Complex64>,
    pub u: Vec<Complex64>,
    pub u_x: Vec<Complex64>,
    pub u_xx: Vec<Complex64>,
    pub singular: Vec<bool>,
}

/// `u_x` and `u_xx` from `w`, `w_x`, the root `r` and `A`.
pub fn u_derivatives_from_w(
    mc: &MapConstants,
    w: Complex64,
    w_x: Complex64,
    r: Complex64,
    a: Complex64,
    u: Complex64,
) -> (Complex64, Complex64, bool) {
    let qk = mc.k * mc.q;
    // A simple zero of u on the node also zeroes w; u_x = 0/0 there.
    if w == zero() && w_x != zero() && u.norm() < 1e-8 {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        return (nan, nan, true);
    }
    if a == zero() || a.norm() < 1e-300 {
        let finite = r == zero();
        let v = if finite { zero() } else { c(f64::INFINITY) };
        return (v, c(f64::NAN), !finite);
    }
    let ratio = u / a; // A^(q-1) on the branch of u
    let r_x = if w == zero() {
        if mc.p >= 1.0 {
            if mc.p == 1.0 {
                w_x
            } else {
                zero()
            }
        } else {
            c(f64::NAN)
        }
    } else {
        r * w_x * mc.p / w
    };
    let u_x = qk * r * ratio;
    let u_xx = qk * (r_x * ratio + mc.k * (mc.q - 1.0) * r * r * ratio / a);
    (u_x, u_xx, false)
}

/// The deformed field `u(x, t)` reconstructed from one branch of `w`.
#[derive(Clone, Debug)]
pub struct UMap {
    pub branch: TrackedBranch,
    pub constants: Option<MapConstants>,
    pub anchor: Anchor,
    r: Vec<Complex64>,
    a: Vec<Complex64>,
    u: Vec<Complex64>,
    far_a: Complex64,
    opts: QuadOptions,
    /// Internal nodes per requested grid cell.
    stride: usize,
    /// Internal index of the first requested node.
    offset: usize,
    /// Requested node coordinates.
    nodes: Vec<f64>,
}

/// Largest internal spacing. Root continuation across a zero of `u` or of
/// `w` needs the zero to be resolved.
pub const MAX_MAP_SPACING: f64 = 0.01;

/// The branch is tracked over at least `[-MAP_REACH, MAP_REACH]`; beyond it
/// the tails are integrated on the root aligned with the edge, which
/// assumes `w` has no zeros there.
pub const MAP_REACH: f64 = 10.0;

/// Reference for the first root of `A^q` at `x`. A zero anchor cannot tell
/// the roots apart; when `w0` came from a typed `u0`, its value at the edge
/// does, since the tail barely moves.
fn start_reference(ch: &Characteristics, anchor: Complex64, x: f64) -> Result<Complex64> {
    if anchor != zero() {
        return Ok(anchor);
    }
    match &ch.w0 {
        InitialProfile::Mapped { u0, system } => InitialProfile::phased_u0(u0, system, Complex64::new(x, 0.0)),
        InitialProfile::W(_) => Ok(zero()),
    }
}

impl UMap {
    /// Track the branch that starts from the anchored end and integrate.
    /// Grids coarser than `MAX_MAP_SPACING` are refined internally; nodes
    /// still refer to the requested grid.
    pub fn build(ch: &Characteristics, t: f64, grid: &GridSpec, epsilon: f64, anchor: Anchor) -> Result<Self> {
        let from_right = matches!(anchor, Anchor::Right(_));
        if epsilon == 1.0 || grid.points < 2 {
            return Self::from_branch(TrackedBranch::track(ch, t, grid, from_right)?, epsilon, anchor);
        }
        let stride = (grid.spacing() / MAX_MAP_SPACING).ceil().max(1.0) as usize;
        let hf = grid.spacing() / stride as f64;
        let cells = |gap: f64| if gap > 0.0 { (gap / hf).ceil() as usize } else { 0 };
        let (left, right) = (cells(grid.x_min + MAP_REACH), cells(MAP_REACH - grid.x_max));
        let inner = (grid.points - 1) * stride + 1;
        let wide = GridSpec::new(
            grid.x_min - left as f64 * hf,
            grid.x_max + right as f64 * hf,
            inner + left + right,
        )?;
        let (branch, offset) = match TrackedBranch::track(ch, t, &wide, from_right) {
            Ok(b) => (b, left),
            // A fold outside the requested range; keep to the range.
            Err(Error::Branch(_)) if left + right > 0 => {
                let fine = GridSpec::new(grid.x_min, grid.x_max, inner)?;
                (TrackedBranch::track(ch, t, &fine, from_right)?, 0)
            }
            Err(e) => return Err(e),
        };
        let mut map = Self::from_branch(branch, epsilon, anchor)?;
        map.stride = stride;
        map.offset = offset;
        map.nodes = grid.nodes();
        Ok(map)
    }

    pub fn from_branch(branch: TrackedBranch, epsilon: f64, anchor: Anchor) -> Result<Self> {
        let branch_x = branch.x.clone();
        let opts = QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let n = branch.x.len();
        if epsilon == 1.0 {
            let u = branch.w();
            return Ok(Self {
                branch,
                constants: None,
                anchor,
                r: u.clone(),
                a: u.clone(),
                u,
                far_a: zero(),
                opts,
                stride: 1,
                offset: 0,
                nodes: branch_x,
            });
        }
        let mc = MapConstants::new(epsilon)?;
        let w = branch.w();
        let from_right = matches!(anchor, Anchor::Right(_));
        let order: Vec<usize> = if from_right {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        let ordered: Vec<Complex64> = order.iter().map(|&j| w[j]).collect();
        let cont = continue_roots(&ordered, mc.p, None);
        let mut r = vec![zero(); n];
        for (k, &j) in order.iter().enumerate() {
            r[j] = cont[k];
        }

        // Cell integrals of r.
        let mut cells = vec![zero(); n - 1];
        for (j, cell) in cells.iter_mut().enumerate() {
            let (ra, rb) = (r[j], r[j + 1]);
            *cell = integrate(
                |x| {
                    let p = branch.eval(x)?;
                    let refv = branch.interpolate(j, x, ra, rb);
                    Ok(nearest_root(p.w, mc.p, refv))
                },
                branch.x[j],
                branch.x[j + 1],
                &opts,
            )?
            .value;
        }
        let tail = |outward: f64, edge: usize| -> Result<Complex64> {
            let r_edge = r[edge];
            let x_edge = branch.x[edge];
            let v = integrate(
                |x| {
                    let p = branch.eval(x)?;
                    Ok(if r_edge == zero() {
                        principal_or_zero(p.w, mc.p)
                    } else {
                        aligned_root(p.w, mc.p, r_edge)
                    })
                },
                x_edge,
                outward,
                &opts,
            )
            .map_err(|e| Error::Quadrature(format!("tail beyond x = {x_edge}: {e}")))?;
            Ok(v.value)
        };
        let a_bc = mc.a_from_u(anchor.value());
        let mut a = vec![zero(); n];
        let far_a;
        if from_right {
            // A(x) = A_bc - K int_x^inf r
            let right_tail = tail(f64::INFINITY, n - 1)?;
            a[n - 1] = a_bc - mc.k * right_tail;
            for j in (0..n - 1).rev() {
                a[j] = a[j + 1] - mc.k * cells[j];
            }
            let left_tail = -tail(f64::NEG_INFINITY, 0)?;
            far_a = a[0] - mc.k * left_tail;
        } else {
            let left_tail = -tail(f64::NEG_INFINITY, 0)?;
            a[0] = a_bc + mc.k * left_tail;
            for j in 0..n - 1 {
                a[j + 1] = a[j] + mc.k * cells[j];
            }
            let right_tail = tail(f64::INFINITY, n - 1)?;
            far_a = a[n - 1] + mc.k * right_tail;
        }
        let ordered_a: Vec<Complex64> = order.iter().map(|&j| a[j]).collect();
        let dlog: Vec<Complex64> = order.iter().map(|&j| mc.q * mc.k * r[j] / a[j]).collect();
        let xs: Vec<f64> = order.iter().map(|&j| branch.x[j]).collect();
        let start = start_reference(&branch.ch, anchor.value(), xs[0])?;
        let cont_u = continue_u(&ordered_a, &dlog, &xs, mc.q, start);
        let mut u = vec![zero(); n];
        for (k, &j) in order.iter().enumerate() {
            u[j] = cont_u[k];
        }
        Ok(Self {
            branch,
            constants: Some(mc),
            anchor,
            r,
            a,
            u,
            far_a,
            opts,
            stride: 1,
            offset: 0,
            nodes: branch_x,
        })
    }

    /// Number of requested nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branch.x.is_empty()
    }

    fn assemble(&self, x: f64, p: &FieldPoint, r: Complex64, a: Complex64, u: Complex64) -> UPoint {
        match &self.constants {
            None => UPoint {
                x,
                w: p.w,
                u: p.w,
                u_x: p.w_x,
                u_xx: p.w_xx,
                a: p.w,
                singular: false,
            },
            Some(mc) => {
                let (u_x, u_xx, singular) = u_derivatives_from_w(mc, p.w, p.w_x, r, a, u);
                UPoint {
                    x,
                    w: p.w,
                    u,
                    u_x,
                    u_xx,
                    a,
                    singular,
                }
            }
        }
    }

    pub fn node(&self, j: usize) -> UPoint {
        let x = self.nodes[j];
        let j = self.offset + j * self.stride;
        let p = self.branch.points[j];
        self.assemble(x, &p, self.r[j], self.a[j], self.u[j])
    }

    /// Pointwise evaluation inside the grid.
    pub fn point(&self, x: f64) -> Result<UPoint> {
        let j = self
            .branch
            .cell(x)
            .ok_or_else(|| Error::InvalidInput(format!("x = {x} lies outside the mapped grid")))?;
        let p = self.branch.eval(x)?;
        let Some(mc) = &self.constants else {
            return Ok(self.assemble(x, &p, p.w, p.w, p.w));
        };
        let (ra, rb) = (self.r[j], self.r[j + 1]);
        let r = nearest_root(p.w, mc.p, self.branch.interpolate(j, x, ra, rb));
        let partial = integrate(
            |y| {
                let q = self.branch.eval(y)?;
                Ok(nearest_root(q.w, mc.p, self.branch.interpolate(j, y, ra, rb)))
            },
            self.branch.x[j],
            x,
            &self.opts,
        )?
        .value;
        let a = self.a[j] + mc.k * partial;
        let u_ref = self.branch.interpolate(j, x, self.u[j], self.u[j + 1]);
        let u = nearest_root(a, mc.q, u_ref);
        Ok(self.assemble(x, &p, r, a, u))
    }

    pub fn field(&self) -> UField {
        let pts: Vec<UPoint> = (0..self.len()).map(|j| self.node(j)).collect();
        UField {
            x: pts.iter().map(|p| p.x).collect(),
            w: pts.iter().map(|p| p.w).collect(),
            u: pts.iter().map(|p| p.u).collect(),
            u_x: pts.iter().map(|p| p.u_x).collect(),
            u_xx: pts.iter().map(|p| p.u_xx).collect(),
            singular: pts.iter().map(|p| p.singular).collect(),
        }
    }

    /// `u` at the infinite end opposite to the anchor.
    pub fn far_limit(&self) -> Complex64 {
        match &self.constants {
            None => zero(),
            Some(mc) => {
                let edge = match self.anchor {
                    Anchor::Left(_) => self.u.len() - 1,
                    Anchor::Right(_) => 0,
                };
                nearest_root(self.far_a, mc.q, self.u[edge])
            }
        }
    }
}

fn principal_or_zero(z: Complex64, e: f64) -> Complex64 {
    if z == zero() {
        zero()
    } else {
        principal_pow(z, c(e))
    }
}

/// `u` on the grid from the branch of `w` at time `t` that meets the anchor.
pub fn map_u_from_w(ch: &Characteristics, t: f64, grid: &GridSpec, epsilon: f64, anchor: Anchor) -> Result<UField> {
    Ok(UMap::build(ch, t, grid, epsilon, anchor)?.field())
}

/// `u(+inf)` of the field anchored at `u(-inf) = lower`.
pub fn boundary_constant(
    ch: &Characteristics,
    t: f64,
    grid: &GridSpec,
    epsilon: f64,
    lower: Complex64,
) -> Result<Complex64> {
    Ok(UMap::build(ch, t, grid, epsilon, Anchor::Left(lower))?.far_limit())
}

/// `r`, `A` and `x'` along real characteristic labels.
#[derive(Clone, Debug)]
pub struct LabelMap {
    pub ch: Characteristics,
    pub t: f64,
    pub constants: MapConstants,
    pub y: Vec<f64>,
    pub w: Vec<Complex64>,
    pub w_y: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub x_prime: Vec<Complex64>,
    pub r: Vec<Complex64>,
    pub a: Vec<Complex64>,
    opts: QuadOptions,
}

impl LabelMap {
    /// Labels must be increasing; the root is principal at the first one.
    pub fn build(ch: &Characteristics, epsilon: f64, t: f64, labels: &[f64], lower: Complex64) -> Result<Self> {
        if labels.len() < 2 || labels.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidInput("labels must be strictly increasing".into()));
        }
        let mc = MapConstants::new(epsilon)?;
        let opts = QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 2000,
        };
        let mut w = Vec::with_capacity(labels.len());
        let mut w_y = Vec::with_capacity(labels.len());
        let mut x = Vec::with_capacity(labels.len());
        let mut xp = Vec::with_capacity(labels.len());
        for &y in labels {
            let yc = c(y);
            let (w0, dw0) = ch.w0.jet1(yc)?;
            let gj = ch.g_jet2(yc)?;
            w.push(w0);
            w_y.push(dw0);
            x.push(yc + gj.value * t);
            xp.push(c(1.0) + gj.d1 * t);
        }
        let r = continue_roots(&w, mc.p, None);
        let mut map = Self {
            ch: ch.clone(),
            t,
            constants: mc,
            y: labels.to_vec(),
            w,
            w_y,
            x,
            x_prime: xp,
            r,
            a: Vec::new(),
            opts,
        };
        let r0 = map.r[0];
        let tail = integrate(
            |y| {
                let (wv, xpv) = map.wx(y)?;
                let rv = if r0 == zero() {
                    principal_or_zero(wv, mc.p)
                } else {
                    aligned_root(wv, mc.p, r0)
                };
                Ok(rv * xpv)
            },
            f64::NEG_INFINITY,
            labels[0],
            &opts,
        )?
        .value;
        let mut a = Vec::with_capacity(labels.len());
        a.push(mc.a_from_u(lower) + mc.k * tail);
        for j in 0..labels.len() - 1 {
            let piece = map.cell_integral(j, labels[j], labels[j + 1], 1.0)?;
            a.push(a[j] + mc.k * piece);
        }
        map.a = a;
        Ok(map)
    }

    fn wx(&self, y: f64) -> Result<(Complex64, Complex64)> {
        let yc = c(y);
        let w = self.ch.w0.value(yc)?;
        let g1 = self.ch.g_jet2(yc)?.d1;
        Ok((w, c(1.0) + g1 * self.t))
    }

    fn cell_of(&self, y: f64) -> usize {
        match self.y.binary_search_by(|v| v.total_cmp(&y)) {
            Ok(j) => j.min(self.y.len() - 2),
            Err(0) => 0,
            Err(j) => (j - 1).min(self.y.len() - 2),
        }
    }

    fn interp(&self, j: usize, y: f64, a: Complex64, b: Complex64) -> Complex64 {
        a + (b - a) * ((y - self.y[j]) / (self.y[j + 1] - self.y[j]))
    }

    /// The continued root at an arbitrary label inside the tracked range.
    pub fn r_at(&self, y: f64) -> Result<Complex64> {
        let j = self.cell_of(y);
        let w = self.ch.w0.value(c(y))?;
        Ok(nearest_root(
            w,
            self.constants.p,
            self.interp(j, y, self.r[j], self.r[j + 1]),
        ))
    }

    /// `int r^power x' dy` over `[a, b]` within cell `j`.
    fn cell_integral(&self, j: usize, a: f64, b: f64, power: f64) -> Result<Complex64> {
        let (ra, rb) = (self.r[j], self.r[j + 1]);
        let p = self.constants.p;
        Ok(integrate(
            |y| {
                let (wv, xpv) = self.wx(y)?;
                let rv = nearest_root(wv, p, self.interp(j, y, ra, rb));
                Ok(pow_const(rv, c(power)) * xpv)
            },
            a,
            b,
            &self.opts,
        )?
        .value)
    }

    /// `A` at an arbitrary label inside the tracked range.
    pub fn a_at(&self, y: f64) -> Result<Complex64> {
        let j = self.cell_of(y);
        Ok(self.a[j] + self.constants.k * self.cell_integral(j, self.y[j], y, 1.0)?)
    }

    /// `|u_x|` and `|u_xx|` at node `j`; these do not depend on which
    /// `eps`-th root of unity multiplies `u`.
    pub fn derivative_moduli(&self, j: usize) -> (f64, f64) {
        let mc = &self.constants;
        let (r, a, w) = (self.r[j], self.a[j], self.w[j]);
        if a.norm() == 0.0 || w == zero() {
            return (f64::NAN, f64::NAN);
        }
        let amod = a.norm().powf(mc.q - 1.0);
        let qk = (mc.k * mc.q).norm();
        let r_x = r * self.w_y[j] * mc.p / (w * self.x_prime[j]);
        let ux = qk * r.norm() * amod;
        let uxx = qk * (r_x + mc.k * (mc.q - 1.0) * r * r / a).norm() * amod;
        (ux, uxx)
    }
}

/// Far-left starting label for Lagrangian integration around `lo`.
fn far_label(lo: f64) -> f64 {
    (lo - 1.0).min(-10.0)
}

/// `max |u_x|` and `max |u_xx|` of the deformed solution at time `t` over
/// `points` labels in `[center - half, center + half]`.
pub fn derivative_extrema(
    ch: &Characteristics,
    epsilon: f64,
    t: f64,
    center: f64,
    half: f64,
    points: usize,
) -> Result<(f64, f64)> {
    let lo = center - half;
    let window: Vec<f64> = (0..points)
        .map(|k| lo + 2.0 * half * k as f64 / (points - 1) as f64)
        .collect();
    let mut ux_max: f64 = 0.0;
    let mut uxx_max: f64 = 0.0;
    if epsilon == 1.0 {
        for &y in &window {
            let yc = c(y);
            let wj = ch.w0.jet2(yc)?;
            let gj = ch.g_jet2(yc)?;
            let xp = c(1.0) + gj.d1 * t;
            let ux = (wj.d1 / xp).norm();
            let uxx = ((wj.d2 * xp - wj.d1 * gj.d2 * t) / (xp * xp * xp)).norm();
            if ux.is_finite() && uxx.is_finite() {
                ux_max = ux_max.max(ux);
                uxx_max = uxx_max.max(uxx);
            }
        }
        return Ok((ux_max, uxx_max));
    }
    let start = far_label(lo);
    let step = 0.005;
    let n_lead = ((lo - start) / step).ceil() as usize;
    let mut labels: Vec<f64> = (0..n_lead)
        .map(|k| start + k as f64 * (lo - start) / n_lead as f64)
        .collect();
    labels.extend_from_slice(&window);
    let map = LabelMap::build(ch, epsilon, t, &labels, zero())?;
    for j in n_lead..labels.len() {
        let (ux, uxx) = map.derivative_moduli(j);
        if ux.is_finite() && uxx.is_finite() {
            ux_max = ux_max.max(ux);
            uxx_max = uxx_max.max(uxx);
        }
    }
    if ux_max == 0.0 {
        return Err(Error::Singularity(
            "no finite derivative samples near the catastrophe".into(),
        ));
    }
    Ok((ux_max, uxx_max))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldSample {
    pub s: f64,
    pub label: f64,
    pub x: f64,
    pub u: Complex64,
}

/// Loop removed from a multivalued profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EliminatedLoop {
    /// Arc length at the two ends of the loop, `s1` and `s4`.
    pub s: (f64, f64),
    pub labels: (f64, f64),
    /// Abscissa and value of the peak left behind.
    pub x: f64,
    pub u: Complex64,
}

/// A multivalued deformed profile made single-valued by cutting its loops.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldedProfile {
    pub t: f64,
    pub samples: Vec<FoldSample>,
    pub loops: Vec<EliminatedLoop>,
    /// Arc lengths where the root `w^(1/(eps-1))` changes sign.
    pub sign_flips: Vec<f64>,
    pub kappa: f64,
    pub charge_before: Complex64,
    pub charge_after: Complex64,
}

impl FoldedProfile {
    pub fn peak(&self) -> Option<(f64, Complex64)> {
        self.loops.first().map(|l| (l.x, l.u))
    }
}

/// `int f(w0)^kappa x' dy` over `[a, b]` on the principal branch.
fn label_charge(ch: &Characteristics, t: f64, kappa: f64, a: f64, b: f64) -> Result<Complex64> {
    let opts = QuadOptions {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    Ok(integrate(
        |y| {
            let yc = c(y);
            let gj = ch.g_jet2(yc)?;
            Ok(crate::charges::principal_power(gj.value, kappa) * (c(1.0) + gj.d1 * t))
        },
        a,
        b,
        &opts,
    )?
    .value)
}

/// Cut the loops of the deformed profile at time `t`, leaving peaks.
///
/// The curve is followed in characteristic labels, which parameterise it
/// by arc length up to a monotone change of variable. Each self-crossing
/// `(p, q)` solves `x(p) = x(q)`, `A(p) = A(q)`, so the charge
/// `int w^(1/(eps-1)) dx` over the removed loop vanishes.
pub fn fold_to_peak(ch: &Characteristics, epsilon: f64, t: f64, labels: &GridSpec) -> Result<FoldedProfile> {
    let ys = labels.nodes();
    if !ch.w0.is_real_on(&ys) {
        return Err(Error::InvalidInput("loop elimination needs a real profile".into()));
    }
    let map = LabelMap::build(ch, epsilon, t, &ys, zero())?;
    let mc = map.constants;
    let n = ys.len();
    let dlog: Vec<Complex64> = (0..ys.len())
        .map(|j| mc.q * mc.k * map.r[j] * map.x_prime[j] / map.a[j])
        .collect();
    let u = continue_u(&map.a, &dlog, &ys, mc.q, start_reference(ch, zero(), ys[0])?);
    let x: Vec<f64> = map.x.iter().map(|v| v.re).collect();

    let mut s = vec![0.0; n];
    for j in 1..n {
        let speed = |k: usize| (map.w_y[k].norm_sqr() + map.x_prime[k].norm_sqr()).sqrt();
        s[j] = s[j - 1] + 0.5 * (ys[j] - ys[j - 1]) * (speed(j) + speed(j - 1));
    }
    let mut sign_flips = Vec::new();
    for j in 0..n - 1 {
        if (map.r[j] * map.r[j + 1].conj()).re < 0.0 {
            sign_flips.push(0.5 * (s[j] + s[j + 1]));
        }
    }

    let kappa = mc.p;
    let charge_before = label_charge(ch, t, kappa, f64::NEG_INFINITY, f64::INFINITY)?;

    // Maximal runs of decreasing x.
    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut j = 0;
    while j < n - 1 {
        if x[j + 1] < x[j] {
            let start = j;
            while j < n - 1 && x[j + 1] < x[j] {
                j += 1;
            }
            runs.push((start, j));
        } else {
            j += 1;
        }
    }

    let mut loops = Vec::new();
    let mut removed = Vec::new();
    for &(ia, ib) in &runs {
        let lp = eliminate_loop(&map, &u, &x, ia, ib)?;
        removed.push(label_charge(ch, t, kappa, lp.labels.0, lp.labels.1)?);
        loops.push(lp);
    }
    let charge_after = removed.iter().fold(charge_before, |acc, v| acc - v);

    let mut samples = Vec::new();
    let mut loop_iter = loops.iter().peekable();
    let mut k = 0;
    while k < n {
        if let Some(lp) = loop_iter.peek() {
            if ys[k] > lp.labels.0 {
                let s_peak = interp_real(&ys, &s, lp.labels.0);
                samples.push(FoldSample {
                    s: s_peak,
                    label: lp.labels.0,
                    x: lp.x,
                    u: lp.u,
                });
                while k < n && ys[k] <= lp.labels.1 {
                    k += 1;
                }
                loop_iter.next();
                continue;
            }
        }
        samples.push(FoldSample {
            s: s[k],
            label: ys[k],
            x: x[k],
            u: u[k],
        });
        k += 1;
    }
    let loops = loops
        .into_iter()
        .map(|l| EliminatedLoop {
            s: (interp_real(&ys, &s, l.labels.0), interp_real(&ys, &s, l.labels.1)),
            ..l
        })
        .collect();
    Ok(FoldedProfile {
        t,
        samples,
        loops,
        sign_flips,
        kappa,
        charge_before,
        charge_after,
    })
}

fn interp_real(xs: &[f64], vs: &[f64], x: f64) -> f64 {
    let j = match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(j) => return vs[j],
        Err(0) => 0,
        Err(j) => (j - 1).min(xs.len() - 2),
    };
    vs[j] + (vs[j + 1] - vs[j]) * (x - xs[j]) / (xs[j + 1] - xs[j])
}

/// Locate and refine the self-crossing around the decreasing run `ia..=ib`.
fn eliminate_loop(map: &LabelMap, u: &[Complex64], x: &[f64], ia: usize, ib: usize) -> Result<EliminatedLoop> {
    let n = x.len();
    let post_start = ib + 1;
    let x_lo = x[post_start];
    let x_hi = x[ia];
    // Direction used to compare the complex A values on both sheets.
    let theta = map.a[ia] / map.a[ia].norm();
    let post_a_at = |xv: f64| -> Option<(f64, Complex64)> {
        for k in post_start..n - 1 {
            if x[k] <= xv && xv <= x[k + 1] {
                let s = (xv - x[k]) / (x[k + 1] - x[k]);
                let y = map.y[k] + s * (map.y[k + 1] - map.y[k]);
                return Some((y, map.a[k] + (map.a[k + 1] - map.a[k]) * s));
            }
        }
        None
    };
    let mut prev: Option<(usize, f64, f64)> = None;
    let mut bracket = None;
    for i in (0..=ia).rev() {
        if x[i] < x_lo {
            break;
        }
        let Some((yq, aq)) = post_a_at(x[i]) else { continue };
        let d = ((map.a[i] - aq) * theta.conj()).re;
        if let Some((pi, pd, pyq)) = prev {
            if d.signum() != pd.signum() {
                let s = pd / (pd - d);
                bracket = Some((map.y[pi] + s * (map.y[i] - map.y[pi]), pyq + s * (yq - pyq)));
                break;
            }
        }
        prev = Some((i, d, yq));
    }
    let (mut p, mut q) = bracket.ok_or_else(|| {
        Error::Branch(format!(
            "no self-crossing found for the fold over x in [{x_lo}, {x_hi}]"
        ))
    })?;

    let mc = map.constants;
    let eval = |y: f64| -> Result<(f64, f64, Complex64, Complex64)> {
        let (wv, xpv) = map.wx(y)?;
        let _ = wv;
        let xv = (c(y) + map.ch.g_jet2(c(y))?.value * map.t).re;
        Ok((xv, xpv.re, map.r_at(y)?, map.a_at(y)?))
    };
    for _ in 0..50 {
        let (xp_, dxp, rp, ap) = eval(p)?;
        let (xq, dxq, rq, aq) = eval(q)?;
        let f1 = xq - xp_;
        let f2 = ((aq - ap) * theta.conj()).re;
        if f1.abs() < 1e-14 && f2.abs() < 1e-14 {
            break;
        }
        let j11 = -dxp;
        let j12 = dxq;
        let j21 = (-(mc.k * rp * dxp) * theta.conj()).re;
        let j22 = ((mc.k * rq * dxq) * theta.conj()).re;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 {
            break;
        }
        let dp = (f1 * j22 - j12 * f2) / det;
        let dq = (j11 * f2 - j21 * f1) / det;
        p -= dp;
        q -= dq;
        if dp.abs() + dq.abs() < 1e-15 {
            break;
        }
    }
    let (xp_, _, _, ap) = eval(p)?;
    let j = map.cell_of(p);
    let u_ref = map.interp(j, p, u[j], u[j + 1]);
    Ok(EliminatedLoop {
        s: (0.0, 0.0),
        labels: (p, q),
        x: xp_,
        u: nearest_root(ap, mc.q, u_ref),
    })
}

/// The two one-sided reconstructions after a complex shock and where their
/// real and imaginary parts agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JumpMatch {
    pub t: f64,
    pub x: Vec<f64>,
    /// From the branch vanishing at `-inf`, with `u(-inf) = 0`.
    pub u_hat: Vec<Complex64>,
    /// From the branch vanishing at `+inf`, with `u(+inf) = k`.
    pub u_tilde: Vec<Complex64>,
    pub re_crossings: Vec<f64>,
    pub im_crossings: Vec<f64>,
    pub x_re_cross: Option<f64>,
    pub x_im_cross: Option<f64>,
    pub continuous: bool,
}

impl JumpMatch {
    /// The conventional jump location: midway between the two crossings.
    pub fn midpoint(&self) -> Option<f64> {
        match (self.x_re_cross, self.x_im_cross) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            (Some(a), None) | (None, Some(a)) => Some(a),
            _ => None,
        }
    }
}

fn refine_crossing(hat: &UMap, tilde: &UMap, a: f64, b: f64, part: fn(Complex64) -> f64) -> Result<f64> {
    crate::optimize::bisect(|x| Ok(part(hat.point(x)?.u - tilde.point(x)?.u)), a, b, 1e-13)
}

/// Match `u` built from the left-vanishing branch (with `u(-inf) = 0`)
/// against `u` from the right-vanishing branch (with `u(+inf) = k`).
///
/// Among several crossings the real-part crossing nearest `near` is
/// reported, then the imaginary-part crossing nearest to it.
pub fn match_jump(
    ch: &Characteristics,
    epsilon: f64,
    k: Complex64,
    t: f64,
    grid: &GridSpec,
    near: f64,
) -> Result<JumpMatch> {
    let hat = UMap::build(ch, t, grid, epsilon, Anchor::Left(zero()))?;
    let tilde = UMap::build(ch, t, grid, epsilon, Anchor::Right(k))?;
    let uh: Vec<Complex64> = (0..hat.len()).map(|j| hat.node(j).u).collect();
    let ut: Vec<Complex64> = (0..tilde.len()).map(|j| tilde.node(j).u).collect();
    let x = grid.nodes();
    let scale = uh.iter().chain(&ut).map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
    let gap = uh.iter().zip(&ut).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if gap <= 1e-8 * scale {
        return Ok(JumpMatch {
            t,
            x,
            u_hat: uh,
            u_tilde: ut,
            re_crossings: Vec::new(),
            im_crossings: Vec::new(),
            x_re_cross: None,
            x_im_cross: None,
            continuous: true,
        });
    }
    let crossings = |part: fn(Complex64) -> f64| -> Result<Vec<f64>> {
        let mut out = Vec::new();
        for j in 0..x.len() - 1 {
            let (da, db) = (part(uh[j] - ut[j]), part(uh[j + 1] - ut[j + 1]));
            if da == 0.0 {
                out.push(x[j]);
            } else if da.signum() != db.signum() && db != 0.0 {
                out.push(refine_crossing(&hat, &tilde, x[j], x[j + 1], part)?);
            }
        }
        Ok(out)
    };
    let re_crossings = crossings(|z| z.re)?;
    let im_crossings = crossings(|z| z.im)?;
    let nearest = |set: &[f64], target: f64| {
        set.iter()
            .copied()
            .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
    };
    let x_re_cross = nearest(&re_crossings, near);
    let x_im_cross = nearest(&im_crossings, x_re_cross.unwrap_or(near));
    let continuous = match (x_re_cross, x_im_cross) {
        (Some(a), Some(b)) => (a - b).abs() < 1e-6,
        _ => false,
    };
    Ok(JumpMatch {
        t,
        x,
        u_hat: uh,
        u_tilde: ut,
        re_crossings,
        im_crossings,
        x_re_cross,
        x_im_cross,
        continuous,
    })
}

/// Max over interior nodes of `|u_t - i f(u) (i u_x)^eps|` for the mapped
/// field, with centred differences in `t` (step `dt`) and `x`.
pub fn verify_map_residual(
    ch: &Characteristics,
    system: &DeformedSystem,
    t: f64,
    grid: &GridSpec,
    dt: f64,
    anchor: Anchor,
) -> Result<f64> {
    let eps = system.epsilon;
    let mid = map_u_from_w(ch, t, grid, eps, anchor)?;
    let fwd = map_u_from_w(ch, t + dt, grid, eps, anchor)?;
    let bwd = map_u_from_w(ch, t - dt, grid, eps, anchor)?;
    let h = grid.spacing();
    let i = Complex64::new(0.0, 1.0);
    let mut worst: f64 = 0.0;
    for j in 1..grid.points - 1 {
        let u = mid.u[j];
        let u_t = (fwd.u[j] - bwd.u[j]) / (2.0 * dt);
        let u_x = (mid.u[j + 1] - mid.u[j - 1]) / (2.0 * h);
        let rhs = i * system.deformed_f(u)? * pow_const(i * u_x, c(eps));
        let res = (u_t - rhs).norm();
        if res.is_finite() {
            worst = worst.max(res);
        }
    }
    Ok(worst)
}
