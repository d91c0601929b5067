//! Mapped-grid spectral solver for the radial Schrödinger equation: adaptive
//! coordinate mapping, sine-basis kinetic operator in mapped coordinates,
//! one- and two-channel Hamiltonians, and diagonalization for bound and
//! box-discretized continuum states with fixed or absorbing boundaries.

mod grid;
mod hamiltonian;
mod solve;

pub use grid::{GridSpec, MappedGrid};
pub use hamiltonian::{
    add_absorber, build_coupled_hamiltonian, build_hamiltonian, kinetic_matrix, CapTerm,
    HamiltonianMatrix,
};
pub use solve::{
    cap_state_near, overlap_with, polish_state, solve_bound, threshold_states, BoundLevel,
    BoundSpectrum, CapState, EigenSolution, NormConvention, WavefunctionOnGrid,
};
