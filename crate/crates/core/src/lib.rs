//! Fault localization over coverage spectra, with failing-test synthesis.
//!
//! The pipeline runs seeded-fault programs written in a small imperative
//! language ([`minilang`]), builds coverage spectra ([`spectra`]), derives a
//! fault semantic context from dynamic slices of failing runs ([`slicing`]),
//! selects statistically informative statements and fuses both views
//! ([`context`]), trains a class-conditional diffusion model on the fused
//! context ([`diffusion`], built on [`nn`]), and synthesizes failing rows until
//! the suite is balanced ([`augment`]). Localization quality is measured with
//! Top-K, MFR, MAR and RImp ([`eval`]), for SFL formulas and a small MLP
//! localizer ([`dlfl`]). [`pipeline`] wires it together over a corpus.

pub mod augment;
pub mod context;
pub mod diffusion;
pub mod dlfl;
pub mod eval;
pub mod minilang;
pub mod nn;
pub mod pipeline;
pub mod rng;
pub mod slicing;
pub mod spectra;
