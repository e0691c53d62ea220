//! Random two-round bipartite digraphs and the analytic certificate for
//! their perfect matchings.
//!
//! The crate has two halves that meet at Hall's condition:
//!
//! * [`model`] and [`matching`] draw graphs from the two-round selection
//!   process `B(n, m)`, find maximum matchings, and extract Hall witnesses
//!   and component statistics.
//! * [`certificate`], [`optimizer`] and [`moments`] evaluate the closed-form
//!   first-moment bounds: the certificate function `H(n, m; t, r)`, its
//!   penalised Nelder-Mead minimisation swept over `t`, the small-`t` rates
//!   `gamma_m` and exponents `c_m`, and the exact first moment that rules
//!   out perfect matchings when `m = 0`.
//!
//! [`cli`] wires everything to CSV files; `examples/` has one runnable
//! program per capability.

pub mod certificate;
pub mod cli;
mod error;
pub mod matching;
pub mod model;
pub mod moments;
pub mod optimizer;
pub mod rng;
pub mod svg;

pub use error::{Error, Result};
pub use model::{BipartiteDigraph, ModelParams, Threshold};
