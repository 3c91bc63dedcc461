//! Phase-space quantum mechanics of the (damped) harmonic oscillator.
//!
//! Symbols live in the closed class `polynomial × exp(quadratic form)`, where
//! star products, transition operators and the classical damped flow all act
//! exactly. Numerical oracles in [`numerics`] cross-check the exact paths.

pub mod cli;
pub mod dynamics;
pub mod error;
mod gaussian;
pub mod numerics;
pub mod oscillator;
pub mod star;
pub mod symbols;
pub mod transition;
pub mod verify;

pub use error::{Error, Result};
pub use symbols::{parse, Params, Symbol};
