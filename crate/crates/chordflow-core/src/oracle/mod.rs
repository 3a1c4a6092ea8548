//! Exact desk-scale quantum ground truth: grid wavefunctions, Fock-basis
//! propagation, Wigner transforms, the numeric Moyal product, and the
//! Poisson-bracket evolution check.

pub mod grid;
pub mod moyal;
pub mod wigner_grid;

pub use grid::{
    displaced_fock, fock_project, fock_synthesize, hermite_functions, oscillator_eigenstate,
    shear_evolve, FockCoefficients, GridWavefunction,
};
pub use moyal::{
    moyal_product_numeric, poisson_bracket, poisson_evolution_check, MoyalGrid, MOYAL_SIDE_CAP,
};
pub use wigner_grid::{
    exact_backward, wigner_at, wigner_at_many, wigner_transform, wigner_transform_mixture,
    wigner_transform_windowed, WignerGrid,
};
