//! # taulab
//!
//! A numerical laboratory for one-point distribution functions of integrable
//! growth models. Six models are covered — reflected Brownian motions (with
//! optional moving wall), TASEP (with optional moving wall), Push-TASEP, and
//! the three discrete-time Bernoulli walkers (parallel, blocking, pushing) —
//! and for each one the crate can produce the same distribution function
//! three independent ways:
//!
//! * exact stochastic simulation ([`mc`]),
//! * Fredholm determinants of the model kernels ([`fredholm`]),
//! * level-by-level solution of the model's bilinear lattice/differential
//!   equation ([`hierarchy`]).
//!
//! The bilinear machinery itself lives in [`hirota`] (exponential shifts,
//! Hirota derivatives, residual fields), with the kernel building blocks in
//! [`specfun`] and [`walkfun`]. Zero-curvature diagnostics are in [`laxzc`],
//! and the scaling-limit rate checks (KP, diffusive, Toda, thinning) in
//! [`scaling`].
//!
//! See the `book/` directory for a guided tour; every code block in the book
//! runs as a doctest of this crate.

pub mod closed_form;
pub mod error;
pub mod export;
pub mod fredholm;
pub mod grid;
pub mod hierarchy;
pub mod hirota;
pub mod laxzc;
pub mod linalg;
pub mod mc;
pub mod quad;
pub mod rng;
pub mod scaling;
pub mod selftest;
pub mod specfun;
pub mod walkfun;

mod book;

pub use error::{Error, Result};
pub use fredholm::Model;
pub use grid::{Axis, AxisKind, GridField};
