//! Resonances of convex co-compact hyperbolic surfaces of Euler
//! characteristic −1, computed as zeros of the Selberg zeta function of a
//! two-generator Schottky group.
//!
//! The pipeline runs bottom-up:
//!
//! - [`schottky`]: generators for the 3-funnel surfaces `X(ℓ₁,ℓ₂,ℓ₃)` and the
//!   funneled tori `Y(ℓ₁,ℓ₂,φ)`, Möbius algebra, translation lengths.
//! - [`words`]: the cyclically reduced word sets `𝒲_n` and their length classes.
//! - [`cache`]: per-surface length multisets, persisted in a versioned text format.
//! - [`zeta`]: the truncated determinant expansion `Z_N(s) = 1 + Σ d_n(s)`.
//! - [`zeros`]: argument-principle bin counts and Newton refinement.
//! - [`census`]: δ, counting functions, envelopes, histograms and fits.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod schottky;
pub mod words;
pub mod cache;
pub mod zeta;
pub mod zeros;
pub mod census;
pub mod precise;

pub use error::{Error, Result};
pub use exec::Execution;
