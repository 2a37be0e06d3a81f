//! Numerical adiabatic geometric phases.
//!
//! Spin-J Berry phases in a rotating field, Wilczek–Zee holonomies of the
//! SU(2)⊗SU(2) tripod system, and the dipole-dipole coupled two-particle
//! phase gate whose tripod dark states carry a geometric phase with no
//! dynamical contribution.
//!
//! Units: ħ = 1, energies are angular frequencies and time is dimensionless.

pub mod error;
pub mod numkernel;
pub mod operators;
pub mod phases;
pub mod propagate;
pub mod pulses;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use numkernel::{
    expm_i, hermitian_eigensystem, overlap, CMatrix, ComplexVector, Eigensystem, HermitianOperator,
    UnitaryOperator,
};
pub use operators::{
    logical_basis, spin_hamiltonian, spin_representation, tripod_generators, tripod_hamiltonian,
    two_particle_hamiltonian, GeneratorTriple, Level, LogicalBasisEntry, LogicalState,
    SpinRepresentation, TripodGenerators, TwoParticleModel, TwoParticleState,
};
pub use phases::{
    fit_inverse_xi, fit_inverse_xi_with_offset, nearest_branch, phase_decomposition,
    rotation_composition_check, spin_berry_phase, wilczek_zee_holonomy, HolonomyResult,
    InverseXiFit, PhaseDecomposition,
};
pub use propagate::{
    adiabatic_eigenstate_track, propagate, FnHamiltonian, HamiltonianSource, PropagationConfig,
    PulsedTripod, PulsedTwoParticle, TrackedSubspace, Trajectory,
};
pub use pulses::{
    full_cycle, full_cycle_from, half_cycle, octant_path, Axis, Envelope, FieldPath, FieldSegment,
    GaussianPulse, PulseSequence,
};

/// Wraps an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    use std::f64::consts::PI;
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Distance between two angles on the circle, in [0, π].
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}
