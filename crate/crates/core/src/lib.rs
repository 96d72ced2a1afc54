//! Characteristic mapping method with source terms for transport on the
//! periodic square `[0, 2π)²`, and its application to ideal 2D MHD.
//!
//! The numerical core is generic over [`real::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar type. File formats and the CLI work in
//! `f64`.

pub mod convergence;
pub mod diagnostics;
pub mod error;
pub mod flow_map;
pub mod grid;
pub mod history;
pub mod io;
pub mod mhd;
pub mod real;
pub mod solver;
pub mod source;
pub mod spectral;
pub mod swirl;

pub use error::{CmmError, Result};

pub type GridSpec64 = grid::GridSpec<f64>;
pub type GridSpec32 = grid::GridSpec<f32>;
pub type HermiteField64 = grid::HermiteField<f64>;
pub type HermiteField32 = grid::HermiteField<f32>;
pub type CharMap64 = flow_map::CharMap<f64>;
pub type CharMap32 = flow_map::CharMap<f32>;
pub type SubmapStack64 = flow_map::SubmapStack<f64>;
pub type SubmapStack32 = flow_map::SubmapStack<f32>;
pub type VelocityField64 = flow_map::VelocityField<f64>;
pub type VelocityField32 = flow_map::VelocityField<f32>;
pub type SourceField64 = source::SourceField<f64>;
pub type SourceField32 = source::SourceField<f32>;
pub type SpectralWorkspace64 = spectral::SpectralWorkspace<f64>;
pub type SpectralWorkspace32 = spectral::SpectralWorkspace<f32>;
