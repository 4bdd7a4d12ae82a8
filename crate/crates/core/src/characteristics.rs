//! Characteristic solution of `w_t + f(w) w_x = 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{seed2, seed3, Jet2, Jet3, Scalar};
use crate::error::{Error, Result};
use crate::initial::InitialProfile;
use crate::model::{BranchSample, BranchSet, DeformedSystem, FSpec, FoldMarker, GridSpec};
use crate::profile::ProfileAst;

/// Residual accepted for a root of the implicit equation.
pub const ROOT_TOL: f64 = 1e-10;
pub const MAX_NEWTON: usize = 60;
/// Roots closer than this are the same root.
pub const DEDUP_RADIUS: f64 = 1e-7;

/// One point `(x0 + f(w0(x0)) t, w0(x0))` of the parametric solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x0: Complex64,
    pub x: Complex64,
    pub w: Complex64,
}

/// A solution value together with its label and spatial derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldPoint {
    pub w: Complex64,
    pub w_x: Complex64,
    pub w_xx: Complex64,
    /// `x0 = x - f(w) t`
    pub label: Complex64,
    /// `dx/dx0 = 1 + t g'(x0)` with `g = f(w0)`
    pub x_prime: Complex64,
}

/// The undeformed problem: an initial profile and a nonlinearity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Characteristics {
    pub w0: InitialProfile,
    pub f: FSpec,
}

impl Characteristics {
    pub fn new(w0: InitialProfile, f: FSpec) -> Self {
        Self { w0, f }
    }

    pub fn from_w0(w0: ProfileAst, f: FSpec) -> Self {
        Self::new(InitialProfile::W(w0), f)
    }

    /// The undeformed problem paired with a deformed-side `u0`.
    pub fn for_system(u0: ProfileAst, system: &DeformedSystem) -> Self {
        let f = system.undeformed_f();
        Self::new(InitialProfile::from_u0(u0, system.clone()), f)
    }

    /// `g = f(w0(x0))` on any scalar type.
    pub fn g<S: Scalar>(&self, x0: S) -> Result<S> {
        self.f.apply(self.w0.eval(x0)?)
    }

    pub fn g_jet2(&self, x0: Complex64) -> Result<Jet2> {
        Ok(self.g(seed2(x0))?.into())
    }

    pub fn g_jet3(&self, x0: Complex64) -> Result<Jet3> {
        Ok(self.g(seed3(x0))?.into())
    }

    pub fn point(&self, x0: Complex64, t: f64) -> Result<CurvePoint> {
        let w = self.w0.value(x0)?;
        let fw = self.f.apply(w)?;
        Ok(CurvePoint { x0, x: x0 + fw * t, w })
    }

    /// `w - w0(x - f(w) t)`
    pub fn residual(&self, x: Complex64, t: f64, w: Complex64) -> Result<Complex64> {
        let fw = self.f.apply(w)?;
        Ok(w - self.w0.value(x - fw * t)?)
    }

    /// Newton's method on the implicit equation from one seed.
    pub fn newton(&self, x: Complex64, t: f64, seed: Complex64) -> Result<Complex64> {
        let mut w = seed;
        let mut res = self.residual(x, t, w)?;
        for _ in 0..MAX_NEWTON {
            let (fw, dfw) = self.f.jet(w)?;
            let (w0z, dw0z) = self.w0.jet1(x - fw * t)?;
            let r = w - w0z;
            let d = Complex64::new(1.0, 0.0) + dw0z * dfw * t;
            if d.norm() == 0.0 || !d.is_finite() {
                return Err(Error::NoConvergence("singular Newton derivative".into()));
            }
            let mut step = r / d;
            let mut trial = w - step;
            let mut trial_res = self.residual(x, t, trial).unwrap_or(Complex64::new(f64::INFINITY, 0.0));
            let mut halvings = 0;
            while !(trial_res.norm() < 2.0 * r.norm()) && halvings < 12 {
                step *= 0.5;
                trial = w - step;
                trial_res = self.residual(x, t, trial).unwrap_or(Complex64::new(f64::INFINITY, 0.0));
                halvings += 1;
            }
            w = trial;
            res = trial_res;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + w.norm()) || res.norm() == 0.0 {
                break;
            }
        }
        if res.norm() <= ROOT_TOL && w.is_finite() {
            Ok(w)
        } else {
            Err(Error::NoConvergence(format!(
                "Newton stalled at x = {x} (residual {:.3e})",
                res.norm()
            )))
        }
    }

    /// Root, label and spatial derivatives at `x`, starting from `seed`.
    pub fn field_point(&self, x: Complex64, t: f64, seed: Complex64) -> Result<FieldPoint> {
        let w = self.newton(x, t, seed)?;
        self.derivatives_at(x, t, w)
    }

    /// Label and derivatives for an already converged root `w`.
    pub fn derivatives_at(&self, x: Complex64, t: f64, w: Complex64) -> Result<FieldPoint> {
        let label = x - self.f.apply(w)? * t;
        let wj = self.w0.jet2(label)?;
        let gj = self.g_jet2(label)?;
        let xp = Complex64::new(1.0, 0.0) + gj.d1 * t;
        if xp.norm() == 0.0 {
            return Err(Error::Singularity(format!("characteristics cross at x = {x}")));
        }
        Ok(FieldPoint {
            w,
            w_x: wj.d1 / xp,
            w_xx: (wj.d2 * xp - wj.d1 * gj.d2 * t) / (xp * xp * xp),
            label,
            x_prime: xp,
        })
    }
}

/// Parametric solution at time `t` over the given labels.
pub fn push_forward(w0: &InitialProfile, f: &FSpec, t: f64, x0_grid: &[Complex64]) -> Vec<Result<CurvePoint>> {
    let ch = Characteristics::new(w0.clone(), f.clone());
    x0_grid.iter().map(|&x0| ch.point(x0, t)).collect()
}

fn push_unique(roots: &mut Vec<Complex64>, w: Complex64) -> bool {
    if roots.iter().any(|r| (r - w).norm() < DEDUP_RADIUS) {
        false
    } else {
        roots.push(w);
        true
    }
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// All distinct roots of `w = w0(x - f(w) t)` reached from `seeds`.
pub fn solve_implicit(w0: &InitialProfile, f: &FSpec, x: f64, t: f64, seeds: &[Complex64]) -> Result<Vec<Complex64>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be non-negative, got {t}")));
    }
    let ch = Characteristics::new(w0.clone(), f.clone());
    let xc = Complex64::new(x, 0.0);
    let mut roots = Vec::new();
    for &s in seeds {
        if let Ok(w) = ch.newton(xc, t, s) {
            push_unique(&mut roots, w);
        }
    }
    if roots.is_empty() {
        return Err(Error::NoConvergence(format!(
            "no root of the implicit equation found at x = {x}, t = {t}"
        )));
    }
    sort_roots(&mut roots);
    Ok(roots)
}

/// The 5 x 5 complex seed lattice on `[-2, 2]^2`.
pub fn lattice_seeds() -> Vec<Complex64> {
    let mut s = Vec::with_capacity(25);
    for a in 0..5 {
        for b in 0..5 {
            s.push(Complex64::new(-2.0 + a as f64, -2.0 + b as f64));
        }
    }
    s
}

/// Seeds taken from the pushed-forward real-label curve wherever its real
/// abscissa passes through a grid node.
fn curve_seeds(ch: &Characteristics, grid: &GridSpec, t: f64) -> Vec<Vec<Complex64>> {
    let nodes = grid.nodes();
    let h = grid.spacing();
    let mut reach: f64 = 0.0;
    for &y in &nodes {
        if let Ok(g) = ch.g(Complex64::new(y, 0.0)) {
            reach = reach.max(g.norm() * t);
        }
    }
    let margin = 1.0 + 2.0 * reach;
    let lo = grid.x_min - margin;
    let n_labels = ((grid.x_max + margin - lo) / (0.5 * h)).ceil() as usize + 1;
    let pts: Vec<Option<CurvePoint>> = (0..n_labels)
        .into_par_iter()
        .map(|k| ch.point(Complex64::new(lo + k as f64 * 0.5 * h, 0.0), t).ok())
        .collect();
    let mut seeds = vec![Vec::new(); nodes.len()];
    for pair in pts.windows(2) {
        let (Some(a), Some(b)) = (pair[0], pair[1]) else {
            continue;
        };
        let (xa, xb) = (a.x.re, b.x.re);
        let (l, r) = (xa.min(xb), xa.max(xb));
        if r < grid.x_min || l > grid.x_max {
            continue;
        }
        let j0 = ((l - grid.x_min) / h).ceil().max(0.0) as usize;
        let j1 = (((r - grid.x_min) / h).floor() as usize).min(nodes.len() - 1);
        for (j, node) in nodes.iter().enumerate().take(j1 + 1).skip(j0) {
            let s = if xb != xa { (node - xa) / (xb - xa) } else { 0.5 };
            seeds[j].push(a.w + (b.w - a.w) * s);
        }
    }
    seeds
}

/// Roots at every grid node, grouped into continuous branches.
///
/// For a profile that is real on the window only real roots are kept,
/// since the complex roots of a real problem are not solution branches.
pub fn enumerate_branches(w0: &InitialProfile, f: &FSpec, grid: &GridSpec, t: f64) -> Result<BranchSet> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be non-negative, got {t}")));
    }
    let ch = Characteristics::new(w0.clone(), f.clone());
    let nodes = grid.nodes();
    let real_only = w0.is_real_on(&nodes);
    let lattice = lattice_seeds();
    let from_curve = curve_seeds(&ch, grid, t);

    let keep = |w: Complex64| !real_only || w.im.abs() <= 1e-8 * (1.0 + w.norm());
    let polish = |x: f64, w: Complex64| -> Option<Complex64> {
        if real_only {
            ch.newton(Complex64::new(x, 0.0), t, Complex64::new(w.re, 0.0))
                .ok()
                .filter(|r| r.im == 0.0)
        } else {
            Some(w)
        }
    };

    let mut roots: Vec<Vec<Complex64>> = nodes
        .par_iter()
        .enumerate()
        .map(|(j, &x)| {
            let xc = Complex64::new(x, 0.0);
            let mut out = Vec::new();
            let initial = w0.value(xc).ok();
            for s in initial.iter().chain(&from_curve[j]).chain(&lattice) {
                if let Ok(w) = ch.newton(xc, t, *s) {
                    if keep(w) {
                        if let Some(p) = polish(x, w) {
                            push_unique(&mut out, p);
                        }
                    }
                }
            }
            out
        })
        .collect();

    // Continuation sweeps in both directions recover roots the seeds missed.
    let sweep = |roots: &mut Vec<Vec<Complex64>>, order: Vec<usize>| {
        for pair in order.windows(2) {
            let (prev, cur) = (pair[0], pair[1]);
            let xc = Complex64::new(nodes[cur], 0.0);
            let prev_roots = roots[prev].clone();
            for s in prev_roots {
                if let Ok(w) = ch.newton(xc, t, s) {
                    if keep(w) {
                        if let Some(p) = polish(nodes[cur], w) {
                            push_unique(&mut roots[cur], p);
                        }
                    }
                }
            }
        }
    };
    sweep(&mut roots, (0..nodes.len()).collect());
    sweep(&mut roots, (0..nodes.len()).rev().collect());
    for r in &mut roots {
        sort_roots(r);
    }
    if roots.iter().all(|r| r.is_empty()) {
        return Err(Error::NoConvergence(format!(
            "no root of the implicit equation on the grid at t = {t}"
        )));
    }

    let (samples, folds) = assign_branches(&nodes, &roots);
    Ok(BranchSet {
        grid: *grid,
        t,
        samples,
        folds,
    })
}

/// Greedy nearest-prediction matching between consecutive nodes.
fn assign_branches(nodes: &[f64], roots: &[Vec<Complex64>]) -> (Vec<Vec<BranchSample>>, Vec<FoldMarker>) {
    let mut samples: Vec<Vec<BranchSample>> = Vec::with_capacity(nodes.len());
    let mut folds = Vec::new();
    let mut next_id = 0usize;
    for (j, rs) in roots.iter().enumerate() {
        let mut cur: Vec<Option<usize>> = vec![None; rs.len()];
        if j > 0 {
            let prev = &samples[j - 1];
            let mut pairs = Vec::new();
            for (pi, p) in prev.iter().enumerate() {
                let older = if j > 1 {
                    samples[j - 2].iter().find(|b| b.branch_id == p.branch_id)
                } else {
                    None
                };
                let (pred, slope) = match older {
                    Some(o) => (p.w * 2.0 - o.w, (p.w - o.w).norm()),
                    None => (p.w, 0.0),
                };
                let thresh = 4.0 * slope + 0.1 * (1.0 + p.w.norm());
                for (ri, r) in rs.iter().enumerate() {
                    let d = (r - pred).norm();
                    if d < thresh {
                        pairs.push((d, pi, ri));
                    }
                }
            }
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut used_prev = vec![false; prev.len()];
            for (_, pi, ri) in pairs {
                if !used_prev[pi] && cur[ri].is_none() {
                    used_prev[pi] = true;
                    cur[ri] = Some(prev[pi].branch_id);
                }
            }
            if rs.len() != prev.len() {
                folds.push(FoldMarker {
                    x: 0.5 * (nodes[j - 1] + nodes[j]),
                    before: prev.len(),
                    after: rs.len(),
                });
            }
        }
        let mut row = Vec::with_capacity(rs.len());
        for (ri, r) in rs.iter().enumerate() {
            let id = cur[ri].unwrap_or_else(|| {
                next_id += 1;
                next_id - 1
            });
            row.push(BranchSample { branch_id: id, w: *r });
        }
        samples.push(row);
    }
    (samples, folds)
}

/// How the jump between the left and right branches is placed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpRule {
    /// Real fields: the jump keeps `int w dx` equal to its value on the
    /// multivalued curve (equal-area rule).
    EqualCharge,
    /// A jump at a prescribed abscissa, labelled with the convention used.
    At { x: f64, convention: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    pub left: Complex64,
    pub right: Complex64,
    /// Allowed distance between a branch's edge value and the prescribed limit.
    pub tol: f64,
    pub rule: JumpRule,
}

impl BoundaryCondition {
    pub fn vanishing() -> Self {
        Self {
            left: Complex64::new(0.0, 0.0),
            right: Complex64::new(0.0, 0.0),
            tol: 0.1,
            rule: JumpRule::EqualCharge,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub x: f64,
    pub left_branch: usize,
    pub right_branch: usize,
    pub rule: JumpRule,
}

/// A single-valued field assembled from branches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalField {
    pub x: Vec<f64>,
    pub w: Vec<Complex64>,
    pub jump: Option<Jump>,
}

fn edge_branch(bs: &BranchSet, node: usize, target: Complex64, tol: f64, side: &str) -> Result<usize> {
    bs.samples[node]
        .iter()
        .map(|b| (b.branch_id, (b.w - target).norm()))
        .filter(|(_, d)| *d <= tol)
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(id, _)| id)
        .ok_or_else(|| Error::Branch(format!("no branch approaches the {side} limit {target} within {tol}")))
}

fn value_on(bs: &BranchSet, j: usize, id: usize) -> Option<Complex64> {
    bs.samples[j].iter().find(|b| b.branch_id == id).map(|b| b.w)
}

/// Pick the branch meeting each asymptotic condition and join them.
pub fn select_physical_branch(bs: &BranchSet, bc: &BoundaryCondition) -> Result<PhysicalField> {
    let n = bs.samples.len();
    let left = edge_branch(bs, 0, bc.left, bc.tol, "left")?;
    let right = edge_branch(bs, n - 1, bc.right, bc.tol, "right")?;
    let x = bs.grid.nodes();

    if left == right {
        let w = (0..n)
            .map(|j| {
                value_on(bs, j, left)
                    .ok_or_else(|| Error::Branch(format!("branch {left} is interrupted at x = {}", x[j])))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(PhysicalField { x, w, jump: None });
    }

    let x_jump = match &bc.rule {
        JumpRule::At { x, .. } => *x,
        JumpRule::EqualCharge => equal_charge_jump(bs, left, right)?,
    };
    let w = (0..n)
        .map(|j| {
            let id = if x[j] < x_jump { left } else { right };
            value_on(bs, j, id).ok_or_else(|| {
                Error::Branch(format!(
                    "branch {id} does not reach x = {} on its side of the jump at {x_jump}",
                    x[j]
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhysicalField {
        x,
        w,
        jump: Some(Jump {
            x: x_jump,
            left_branch: left,
            right_branch: right,
            rule: bc.rule.clone(),
        }),
    })
}

/// Jump position for a single real fold: the root of
/// `int_{a_R}^{x*} (w_R - w_M) + int_{x*}^{a_L} (w_L - w_M)`.
fn equal_charge_jump(bs: &BranchSet, left: usize, right: usize) -> Result<f64> {
    let x = bs.grid.nodes();
    let h = bs.grid.spacing();
    let overlap: Vec<usize> = (0..x.len())
        .filter(|&j| value_on(bs, j, left).is_some() && value_on(bs, j, right).is_some())
        .collect();
    if overlap.len() < 2 {
        return Err(Error::Branch(
            "left and right branches do not overlap; refine the grid".into(),
        ));
    }
    let mut diff_r = Vec::with_capacity(overlap.len());
    let mut diff_l = Vec::with_capacity(overlap.len());
    for &j in &overlap {
        let others: Vec<&BranchSample> = bs.samples[j]
            .iter()
            .filter(|b| b.branch_id != left && b.branch_id != right)
            .collect();
        if others.len() != 1 {
            return Err(Error::Branch(format!(
                "equal-charge rule needs exactly one middle branch, found {} at x = {}",
                others.len(),
                x[j]
            )));
        }
        let wm = others[0].w.re;
        diff_r.push(value_on(bs, j, right).unwrap().re - wm);
        diff_l.push(value_on(bs, j, left).unwrap().re - wm);
    }
    let m = overlap.len();
    let mut c1 = vec![0.0; m];
    let mut c2 = vec![0.0; m];
    for k in 1..m {
        c1[k] = c1[k - 1] + 0.5 * h * (diff_r[k] + diff_r[k - 1]);
    }
    for k in (0..m - 1).rev() {
        c2[k] = c2[k + 1] + 0.5 * h * (diff_l[k] + diff_l[k + 1]);
    }
    let fval: Vec<f64> = (0..m).map(|k| c1[k] + c2[k]).collect();
    for k in 0..m - 1 {
        if fval[k] == 0.0 {
            return Ok(x[overlap[k]]);
        }
        if fval[k].signum() != fval[k + 1].signum() {
            let s = fval[k] / (fval[k] - fval[k + 1]);
            return Ok(x[overlap[k]] + s * h);
        }
    }
    Err(Error::Branch("equal-charge condition has no root in the fold".into()))
}

/// One solution branch followed along a real grid from one end, with
/// pointwise evaluation anywhere on the line.
#[derive(Clone, Debug)]
pub struct TrackedBranch {
    pub ch: Characteristics,
    pub t: f64,
    pub x: Vec<f64>,
    pub points: Vec<FieldPoint>,
    pub from_right: bool,
}

impl TrackedBranch {
    /// Follow the branch that starts at `w0(edge)` on the chosen end of the
    /// grid, seeding each node by linear extrapolation.
    pub fn track(ch: &Characteristics, t: f64, grid: &GridSpec, from_right: bool) -> Result<Self> {
        let x = grid.nodes();
        let n = x.len();
        let order: Vec<usize> = if from_right {
            (0..n).rev().collect()
        } else {
            (0..n).collect()
        };
        let mut pts: Vec<Option<FieldPoint>> = vec![None; n];
        let mut prev: Vec<Complex64> = Vec::new();
        for &j in &order {
            let xc = Complex64::new(x[j], 0.0);
            let seed = match prev.len() {
                0 => ch.w0.value(xc)?,
                1 => prev[0],
                k => prev[k - 1] * 2.0 - prev[k - 2],
            };
            let p = ch
                .field_point(xc, t, seed)
                .or_else(|e| match prev.last() {
                    Some(&last) => ch.field_point(xc, t, last),
                    None => Err(e),
                })
                .map_err(|e| Error::Branch(format!("lost the branch at x = {}: {e}", x[j])))?;
            prev.push(p.w);
            pts[j] = Some(p);
        }
        Ok(Self {
            ch: ch.clone(),
            t,
            x,
            points: pts.into_iter().map(|p| p.expect("every node visited")).collect(),
            from_right,
        })
    }

    pub fn w(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.w).collect()
    }

    /// Index of the grid cell containing `x`, or `None` outside the grid.
    pub fn cell(&self, x: f64) -> Option<usize> {
        let n = self.x.len();
        if x < self.x[0] || x > self.x[n - 1] {
            return None;
        }
        let h = (self.x[n - 1] - self.x[0]) / (n - 1) as f64;
        Some((((x - self.x[0]) / h).floor() as usize).min(n - 2))
    }

    /// Linear interpolation of node data inside cell `j`.
    pub fn interpolate(&self, j: usize, x: f64, a: Complex64, b: Complex64) -> Complex64 {
        let s = (x - self.x[j]) / (self.x[j + 1] - self.x[j]);
        a + (b - a) * s
    }

    pub fn eval(&self, x: f64) -> Result<FieldPoint> {
        let xc = Complex64::new(x, 0.0);
        match self.cell(x) {
            Some(j) => {
                let seed = self.interpolate(j, x, self.points[j].w, self.points[j + 1].w);
                self.ch.field_point(xc, self.t, seed)
            }
            None => {
                let edge = if x < self.x[0] {
                    self.points[0].w
                } else {
                    self.points[self.points.len() - 1].w
                };
                let seed = self.ch.w0.value(xc)?;
                self.ch
                    .field_point(xc, self.t, seed)
                    .or_else(|_| self.ch.field_point(xc, self.t, edge))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::parse;

    fn w0(src: &str) -> InitialProfile {
        InitialProfile::W(parse(src).unwrap())
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn push_forward_at_zero_is_graph() {
        let p = w0("1/(1+x^2)");
        let grid: Vec<Complex64> = (-5..=5).map(|k| c(k as f64 * 0.4)).collect();
        for pt in push_forward(&p, &FSpec::Power(1), 0.0, &grid) {
            let pt = pt.unwrap();
            assert_eq!(pt.x, pt.x0);
            assert_eq!(pt.w, p.value(pt.x0).unwrap());
        }
    }

    #[test]
    fn linear_profile_focuses() {
        let pts = push_forward(&w0("-x"), &FSpec::Power(1), 1.0, &[c(-1.0), c(0.0), c(1.0)]);
        for p in pts {
            assert!(p.unwrap().x.norm() < 1e-15);
        }
    }

    #[test]
    fn cauchy_w0_curve_folds_after_shock() {
        let p = w0("-12*x^2/(1+x^2)^5");
        let labels: Vec<Complex64> = (0..=2000).map(|k| c(-2.0 + k as f64 * 0.002)).collect();
        let xs: Vec<f64> = push_forward(&p, &FSpec::Power(1), 0.4, &labels)
            .into_iter()
            .map(|r| r.unwrap().x.re)
            .collect();
        let decreasing: Vec<usize> = (1..xs.len()).filter(|&k| xs[k] < xs[k - 1]).collect();
        assert!(!decreasing.is_empty());
        let lo = decreasing.iter().map(|&k| xs[k]).fold(f64::INFINITY, f64::min);
        let hi = decreasing.iter().map(|&k| xs[k - 1]).fold(f64::NEG_INFINITY, f64::max);
        // The fold opened at x = 0.0770263 and has drifted left with w < 0.
        assert!(lo > 0.077 - 0.06 && hi < 0.077, "fold covers [{lo}, {hi}]");
    }

    #[test]
    fn single_root_at_time_zero() {
        let p = w0("1/(1+x^2)");
        let r = solve_implicit(&p, &FSpec::Power(1), 0.8, 0.0, &lattice_seeds()).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - c(1.0 / 1.64)).norm() < 1e-14);
    }

    #[test]
    fn complex_profile_has_several_roots_after_shock() {
        let p = w0("exp(i*pi/4)/(1+x^2)");
        let roots = solve_implicit(&p, &FSpec::Power(1), 0.5, 0.55, &lattice_seeds()).unwrap();
        assert!(roots.len() >= 2);
        let ch = Characteristics::new(p, FSpec::Power(1));
        for w in roots {
            assert!(ch.residual(c(0.5), 0.55, w).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn negative_time_rejected() {
        assert!(solve_implicit(&w0("x"), &FSpec::Power(1), 0.0, -1.0, &[c(0.0)]).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let ch = Characteristics::new(w0("-12*x^2/(1+x^2)^5"), FSpec::Power(1));
        let (x, t, h) = (0.3, 0.2, 1e-4);
        let seed = ch.w0.value(c(x)).unwrap();
        let p = ch.field_point(c(x), t, seed).unwrap();
        let wp = ch.newton(c(x + h), t, p.w).unwrap();
        let wm = ch.newton(c(x - h), t, p.w).unwrap();
        assert!((p.w_x - (wp - wm) / (2.0 * h)).norm() < 1e-6);
        assert!((p.w_xx - (wp - p.w * 2.0 + wm) / (h * h)).norm() < 1e-4);
    }

    #[test]
    fn tracked_branch_matches_enumeration_pre_shock() {
        let p = w0("-12*x^2/(1+x^2)^5");
        let ch = Characteristics::new(p.clone(), FSpec::Power(1));
        let grid = GridSpec::new(-3.0, 3.0, 121).unwrap();
        let bs = enumerate_branches(&p, &FSpec::Power(1), &grid, 0.25).unwrap();
        for from_right in [false, true] {
            let tb = TrackedBranch::track(&ch, 0.25, &grid, from_right).unwrap();
            for (j, s) in bs.samples.iter().enumerate() {
                assert!((s[0].w - tb.points[j].w).norm() < 1e-12);
            }
            let mid = tb.eval(0.123).unwrap();
            assert!(ch.residual(c(0.123), 0.25, mid.w).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn pre_shock_single_real_branch() {
        let p = w0("-12*x^2/(1+x^2)^5");
        let grid = GridSpec::new(-3.0, 3.0, 301).unwrap();
        let bs = enumerate_branches(&p, &FSpec::Power(1), &grid, 0.2).unwrap();
        assert_eq!(bs.branch_ids().len(), 1);
        assert!(bs.samples.iter().all(|s| s.len() == 1 && s[0].w.im == 0.0));
        assert!(bs.folds.is_empty());
        let field = select_physical_branch(&bs, &BoundaryCondition::vanishing()).unwrap();
        assert!(field.jump.is_none());
    }

    #[test]
    fn post_shock_fold_changes_count_by_two() {
        let p = w0("-12*x^2/(1+x^2)^5");
        let grid = GridSpec::new(-3.0, 3.0, 1201).unwrap();
        let bs = enumerate_branches(&p, &FSpec::Power(1), &grid, 0.4).unwrap();
        assert_eq!(bs.max_branch_count(), 3);
        assert_eq!(bs.folds.len(), 2);
        for f in &bs.folds {
            assert_eq!((f.before as i64 - f.after as i64).abs(), 2);
        }
    }
}
