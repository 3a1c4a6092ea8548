//! Phase-space propagation of semiclassical Wigner functions in one degree
//! of freedom.
//!
//! The crate provides three propagation schemes for the Wigner function of
//! a leaf state — classical Liouville transport, tips-of-the-chord
//! transport, and leaf-evolution reconstruction — together with the chord
//! geometry they rest on, closed-form quartic benchmarks, and an exact
//! Fock-space quantum oracle for cross-validation.

pub mod engines;
pub mod error;
pub mod export;
pub mod geometry;
pub mod leaf;
pub mod model;
pub mod ode;
pub mod oracle;
pub mod quartic;
pub mod shoot;
pub mod wigner;

pub use engines::{
    amplitude_transport, chord_near, leaf_evolution_engine, liouville_value, phase_transport,
    propagate_point, stationary_residual, stationary_residual_offset, tips_flow,
    MatchedConfiguration, PropagatedBranch,
};
pub use error::{CausticKind, CoreError, Result};
pub use geometry::{midpoint, quadrilateral_area, wedge, Mat2, PhasePoint, SymplecticForm};
pub use leaf::{
    caustic_indicator, chord_area, find_chords, leaf_from_csv, leaf_to_csv, make_circle_leaf,
    wigner_caustic_trace, CausticReport, Chord, ChordIndex, Leaf,
};
pub use model::HamiltonianModel;
pub use ode::{arc_chord_area, flow, TrajectorySegment};
pub use quartic::{
    quartic_central_action, quartic_delta_s, quartic_flow, quartic_new_center, run_bench,
    scaling_probe, BenchRow, QuarticChordSpec, ScalingFit,
};
pub use shoot::{
    cayley_from_central, cayley_from_chord, center_shoot, central_action, chord_action,
    chord_shoot,
};
pub use wigner::{
    branch_amplitude, evaluate, evaluate_with, split_half_branches, MaslovConvention,
    WignerBranch, WignerEvaluation,
};
