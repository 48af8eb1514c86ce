//! Self-similar extinction profiles and rescaled flows for the fast
//! diffusion equation `u_t = Δu^m` in the subcritical range
//! `n ≥ 3`, `0 < m < (n−2)/n`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod diagnostics;
pub mod error;
pub mod evolver;
pub mod interp;
pub mod io;
pub mod ode;
pub mod profile;
pub mod quadrature;
pub mod regimes;
pub mod tridiag;

pub use error::{Error, Result};
pub use regimes::{classify, derive_params, tail_exponent, ParamSet, Regime, RegimeLabel, Sign};
