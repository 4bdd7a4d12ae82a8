//! Initial data for the undeformed equation.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dual::{seed1, seed2, seed3, Dual, Jet2, Jet3, Scalar};
use crate::error::Result;
use crate::model::{reality_phase, DeformedSystem};
use crate::profile::ProfileAst;

/// `w0` given directly, or obtained from a deformed-side `u0` through the map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    W(ProfileAst),
    Mapped { u0: ProfileAst, system: DeformedSystem },
}

impl InitialProfile {
    pub fn from_u0(u0: ProfileAst, system: DeformedSystem) -> Self {
        InitialProfile::Mapped { u0, system }
    }

    /// `u0` with the reality phase applied, if the system carries one.
    pub fn phased_u0<S: Scalar>(u0: &ProfileAst, system: &DeformedSystem, x: S) -> Result<S> {
        let u = u0.eval(x)?;
        Ok(match system.phase {
            Some(_) => u.scale(reality_phase(system)),
            None => u,
        })
    }

    pub fn eval<S: Scalar>(&self, x: S) -> Result<S> {
        match self {
            InitialProfile::W(ast) => ast.eval(x),
            InitialProfile::Mapped { u0, system } => {
                let d = Self::phased_u0(u0, system, Dual::variable(x))?;
                system.w_from_u(d.value, d.derivative)
            }
        }
    }

    pub fn value(&self, x: Complex64) -> Result<Complex64> {
        self.eval(x)
    }

    pub fn jet1(&self, x: Complex64) -> Result<(Complex64, Complex64)> {
        let d = self.eval(seed1(x))?;
        Ok((d.value, d.derivative))
    }

    pub fn jet2(&self, x: Complex64) -> Result<Jet2> {
        Ok(self.eval(seed2(x))?.into())
    }

    pub fn jet3(&self, x: Complex64) -> Result<Jet3> {
        Ok(self.eval(seed3(x))?.into())
    }

    /// The same profile translated by `a`, i.e. `w0(x - a)`.
    pub fn shifted(&self, a: f64) -> Self {
        match self {
            InitialProfile::W(ast) => InitialProfile::W(ast.shifted(a)),
            InitialProfile::Mapped { u0, system } => InitialProfile::Mapped {
                u0: u0.shifted(a),
                system: system.clone(),
            },
        }
    }

    /// Whether `w0` is real (to `1e-12` relative) at all given points.
    pub fn is_real_on(&self, xs: &[f64]) -> bool {
        xs.iter().all(|&x| match self.value(Complex64::new(x, 0.0)) {
            Ok(w) => w.im.abs() <= 1e-12 * (1.0 + w.norm()),
            Err(_) => true,
        })
    }
}

impl fmt::Display for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialProfile::W(ast) => write!(f, "w0 = {ast}"),
            InitialProfile::Mapped { u0, system } => {
                write!(f, "u0 = {u0} (epsilon = {})", system.epsilon)
            }
        }
    }
}
