//! Domain records shared across the crate.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::{pow_const, Dual, Scalar};
use crate::error::{Error, Result};
use crate::profile::ProfileAst;

/// The nonlinearity `f` of the undeformed equation `w_t + f(w) w_x = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FSpec {
    /// `f(w) = w^n`
    Power(u32),
    /// An arbitrary expression in `w`.
    Expr(ProfileAst),
}

impl Default for FSpec {
    fn default() -> Self {
        FSpec::Power(1)
    }
}

impl FSpec {
    pub fn apply<S: Scalar>(&self, w: S) -> Result<S> {
        match self {
            FSpec::Power(1) => Ok(w),
            FSpec::Power(n) => Ok(w.powi(*n as i32)),
            FSpec::Expr(ast) => ast.eval(w),
        }
    }

    /// `f(w)` and `f'(w)`.
    pub fn jet(&self, w: Complex64) -> Result<(Complex64, Complex64)> {
        let d = self.apply(Dual::variable(w))?;
        Ok((d.value, d.derivative))
    }

    /// Parse `"w^3"`, `"3"` or an arbitrary expression.
    pub fn parse(src: &str) -> Result<Self> {
        let t = src.trim();
        if let Ok(n) = t.parse::<u32>() {
            return Self::power(n);
        }
        if let Some(rest) = t.strip_prefix("w^").or_else(|| t.strip_prefix("x^")) {
            if let Ok(n) = rest.trim().parse::<u32>() {
                return Self::power(n);
            }
        }
        if t == "w" || t == "x" {
            return Ok(FSpec::Power(1));
        }
        Ok(FSpec::Expr(crate::profile::parse(t)?))
    }

    fn power(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("power-law f needs n >= 1".into()));
        }
        Ok(FSpec::Power(n))
    }
}

/// Choice of the reality phase `alpha = (4m + sign) n / epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseChoice {
    pub m: i32,
    /// +1 or -1
    pub sign: i8,
}

impl Default for PhaseChoice {
    fn default() -> Self {
        Self { m: 0, sign: 1 }
    }
}

/// One undeformed/deformed pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeformedSystem {
    pub epsilon: f64,
    pub f_spec: FSpec,
    /// Phase applied to real base profiles; `None` uses profiles as given.
    #[serde(default)]
    pub phase: Option<PhaseChoice>,
}

impl DeformedSystem {
    pub fn new(epsilon: f64, f_spec: FSpec) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "deformation exponent must be positive, got {epsilon}"
            )));
        }
        Ok(Self {
            epsilon,
            f_spec,
            phase: None,
        })
    }

    pub fn burgers(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, FSpec::Power(1))
    }

    pub fn with_phase(mut self, m: i32, sign: i8) -> Result<Self> {
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidInput("phase sign must be +1 or -1".into()));
        }
        self.phase = Some(PhaseChoice { m, sign });
        Ok(self)
    }

    /// Power `n` of the power-law map, 1 for a general `f`.
    pub fn power(&self) -> u32 {
        match self.f_spec {
            FSpec::Power(n) => n,
            FSpec::Expr(_) => 1,
        }
    }

    /// Nonlinearity of the undeformed equation paired with this system.
    ///
    /// A power law `w^n` pairs with itself; a general `f` acts on the
    /// deformed side and pairs with plain Burgers.
    pub fn undeformed_f(&self) -> FSpec {
        match &self.f_spec {
            FSpec::Power(n) => FSpec::Power(*n),
            FSpec::Expr(_) => FSpec::Power(1),
        }
    }

    /// The factor multiplying `(i u_x)^epsilon` in the deformed equation.
    pub fn deformed_f<S: Scalar>(&self, u: S) -> Result<S> {
        match &self.f_spec {
            FSpec::Power(_) => Ok(u),
            FSpec::Expr(ast) => ast.eval(u),
        }
    }

    /// `alpha` for the configured (or default) phase choice.
    pub fn alpha(&self) -> f64 {
        let p = self.phase.unwrap_or_default();
        (4.0 * p.m as f64 + p.sign as f64) * self.power() as f64 / self.epsilon
    }

    /// `w` from `u` and `u_x`: `(eps u (i u_x)^(eps-1))^(1/n)` for a power
    /// law, `eps f(u) (i u_x)^(eps-1)` otherwise. Principal branches.
    pub fn w_from_u<S: Scalar>(&self, u: S, u_x: S) -> Result<S> {
        let i = Complex64::new(0.0, 1.0);
        let eps = self.epsilon;
        let core = pow_const(u_x.scale(i), Complex64::new(eps - 1.0, 0.0));
        match &self.f_spec {
            FSpec::Power(n) => {
                let v = (u * core).scale(Complex64::new(eps, 0.0));
                Ok(if *n == 1 {
                    v
                } else {
                    v.powc(Complex64::new(1.0 / *n as f64, 0.0))
                })
            }
            FSpec::Expr(f) => Ok((f.eval(u)? * core).scale(Complex64::new(eps, 0.0))),
        }
    }
}

/// `i^alpha` on the principal branch; always unit modulus.
pub fn reality_phase(system: &DeformedSystem) -> Complex64 {
    Complex64::from_polar(1.0, FRAC_PI_2 * system.alpha())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if !(x_min < x_max) || points < 3 {
            return Err(Error::InvalidInput(format!(
                "grid needs x_min < x_max and at least 3 points, got [{x_min}, {x_max}] with {points}"
            )));
        }
        Ok(Self { x_min, x_max, points })
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.points - 1) as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        if j + 1 == self.points {
            self.x_max
        } else {
            self.x_min + j as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.node(j)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub branch_id: usize,
    pub w: Complex64,
}

/// Where the number of branches changes between adjacent nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldMarker {
    pub x: f64,
    pub before: usize,
    pub after: usize,
}

/// All roots of the implicit solution on a grid, grouped into branches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSet {
    pub grid: GridSpec,
    pub t: f64,
    /// One entry per grid node.
    pub samples: Vec<Vec<BranchSample>>,
    pub folds: Vec<FoldMarker>,
}

impl BranchSet {
    pub fn branch_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .samples
            .iter()
            .flat_map(|s| s.iter().map(|b| b.branch_id))
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// `(x, w)` along one branch, in grid order.
    pub fn branch(&self, id: usize) -> Vec<(f64, Complex64)> {
        self.samples
            .iter()
            .enumerate()
            .filter_map(|(j, s)| s.iter().find(|b| b.branch_id == id).map(|b| (self.grid.node(j), b.w)))
            .collect()
    }

    pub fn max_branch_count(&self) -> usize {
        self.samples.iter().map(|s| s.len()).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatastropheKind {
    Gradient,
    Curvature,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSide {
    Undeformed,
    Deformed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShockEvent {
    pub t_s: f64,
    pub x_s: f64,
    /// Origin of the catastrophic characteristic.
    pub x0_seed: Complex64,
    pub kind: CatastropheKind,
    pub system: SystemSide,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChargeSpec {
    kappa: f64,
}

impl ChargeSpec {
    pub fn new(kappa: f64) -> Result<Self> {
        if kappa == -1.0 || !kappa.is_finite() {
            return Err(Error::InvalidInput(format!(
                "charge exponent kappa = {kappa} is not allowed"
            )));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeSample {
    pub t: f64,
    pub kappa: f64,
    pub value: Complex64,
    /// `|I(t) - I(0)| / |I(0)|`
    pub drift: f64,
    /// Set when `t` lies beyond the first shock time.
    pub post_shock: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChargeReport {
    pub samples: Vec<ChargeSample>,
    /// Maximum drift per kappa, in input order.
    pub drift: Vec<(f64, f64)>,
}

impl ChargeReport {
    pub fn drift_for(&self, kappa: f64) -> Option<f64> {
        self.drift.iter().find(|(k, _)| *k == kappa).map(|(_, d)| *d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn gaussian_phase() {
        let sys = DeformedSystem::burgers(2.0).unwrap().with_phase(0, -1).unwrap();
        assert_eq!(sys.alpha(), -0.5);
        let f = reality_phase(&sys);
        assert!((f - Complex64::from_polar(1.0, -FRAC_PI_4)).norm() < 1e-15);
    }

    #[test]
    fn third_root_phase_is_unit() {
        let sys = DeformedSystem::burgers(3.0).unwrap();
        assert!((sys.alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert!((reality_phase(&sys).norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn undeformed_limit_phase_is_i() {
        let sys = DeformedSystem::burgers(1.0).unwrap();
        assert_eq!(sys.alpha(), 1.0);
        assert!((reality_phase(&sys) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn alpha_formula() {
        for (m, s, n, eps) in [(2, 1, 1, 3.0), (-1, -1, 2, 1.5), (3, 1, 3, 7.0)] {
            let sys = DeformedSystem::new(eps, FSpec::Power(n))
                .unwrap()
                .with_phase(m, s)
                .unwrap();
            let expect = (4 * m + s as i32) as f64 * n as f64 / eps;
            assert_eq!(sys.alpha(), expect);
        }
    }

    #[test]
    fn epsilon_one_map_is_identity() {
        let sys = DeformedSystem::burgers(1.0).unwrap();
        let u = Complex64::new(0.3, 0.1);
        let w = sys.w_from_u(u, Complex64::new(7.0, -2.0)).unwrap();
        assert!((w - u).norm() < 1e-15);
    }

    #[test]
    fn kappa_minus_one_rejected() {
        assert!(ChargeSpec::new(-1.0).is_err());
        assert!(ChargeSpec::new(0.5).is_ok());
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(1.0, 0.0, 10).is_err());
        assert!(GridSpec::new(0.0, 1.0, 2).is_err());
        let g = GridSpec::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.nodes(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn json_uses_pairs_for_complex() {
        let ev = ShockEvent {
            t_s: 0.25,
            x_s: 0.0,
            x0_seed: Complex64::new(0.5, -1.0),
            kind: CatastropheKind::Curvature,
            system: SystemSide::Deformed,
        };
        let s = serde_json::to_string(&ev).unwrap();
        assert_eq!(
            s,
            r#"{"t_s":0.25,"x_s":0.0,"x0_seed":[0.5,-1.0],"kind":"curvature","system":"deformed"}"#
        );
        let back: ShockEvent = serde_json::from_str(&s).unwrap();
        assert_eq!(back, ev);
    }

    #[test]
    fn f_spec_parsing() {
        assert_eq!(FSpec::parse("w^3").unwrap(), FSpec::Power(3));
        assert_eq!(FSpec::parse("2").unwrap(), FSpec::Power(2));
        assert_eq!(FSpec::parse("w").unwrap(), FSpec::Power(1));
        assert!(matches!(FSpec::parse("w + w^2").unwrap(), FSpec::Expr(_)));
        assert!(FSpec::parse("0").is_err());
    }
}
