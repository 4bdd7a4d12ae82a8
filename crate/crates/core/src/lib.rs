//! Shocks and peaks in inviscid Burgers-type equations and their
//! PT-symmetric deformations.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristics;
pub mod charges;
pub mod deform;
pub mod direct;
pub mod dual;
pub mod error;
pub mod initial;
pub mod io;
pub mod model;
pub mod optimize;
pub mod profile;
pub mod quad;
pub mod scenarios;
pub mod shock;

pub use error::{Error, Result};
pub use initial::InitialProfile;
pub use model::{CatastropheKind, DeformedSystem, FSpec, GridSpec, ShockEvent, SystemSide};
pub use profile::{parse, ProfileAst};
