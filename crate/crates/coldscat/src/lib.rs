//! coldscat — a toolkit for ultracold two-body collision physics.
//!
//! The crate solves single- and two-channel radial Schrödinger problems on
//! adaptively mapped grids, extracts s-wave scattering lengths from threshold
//! wavefunctions, computes photoassociation Franck–Condon spectra, fits
//! potential inner walls to spectral node positions, and scans CW-laser
//! intensity or detuning to tune the scattering length through off-resonant
//! coupling or an optically induced Feshbach resonance.
//!
//! Everything internal is in Hartree atomic units; the [`units`] module is the
//! single place where other unit systems appear.

pub mod constants;
pub mod coupling;
pub mod error;
pub mod mfgm;
pub mod numerov;
pub mod potentials;
pub mod quadrature;
pub mod scattering;
pub mod spectra_fit;
pub mod surrogates;
pub mod units;

pub use error::{Error, Result};
