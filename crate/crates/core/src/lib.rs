//! Hylomorphic solitons for nonlinear Schrödinger and Klein–Gordon fields:
//! spectral grids, nonlinear models, ground states, symmetry transforms,
//! time stepping, diagnostics and a numerical lab.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolve;
pub mod grid;
pub mod io;
pub mod lab;
pub mod groundstate;
pub mod models;
pub mod observables;
pub mod symmetry;

pub use error::{HylosError, Result};
pub use grid::{ComplexField, Grid, Spectral};
pub use models::{Equation, ExternalPotential, Family, NonlinearModel, Semiclassical};
