//! Unitarily invariant valuations on ℂ^m.

mod ukp;
mod unitary;

pub use ukp::{
    basis_dimension, basis_rank, default_family, sample_grassmann, u_kp, valid_p, BasisRank, GrassmannSample, Ukp,
    SLICE_STEINER_SAMPLES,
};
pub use unitary::{complex_closure, realify, sample_unitary, sample_unitary_complex, sample_complex_plane, ComplexStructure};
