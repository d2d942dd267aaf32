//! Rank-one completion, congruence reconstruction from matched generators, isomorphism
//! testing between cones and the cross-ratio invariant.

mod completion;
mod cross;
mod witness;

pub use completion::{rank1_complete, rank1_complete_signs, Completion, PartialMatrix, Violation};
pub(crate) use cross::{generator_planes, plane_meet};
pub use cross::{cross_ratio, cross_ratio_points, plane_star_invariant, s4_orbit, same_s4_orbit};
pub use witness::{
    codim1_signature, cones_isomorphic, maps_span_onto, reconstruct_isomorphism, IsoOutcome, IsoWitness,
};
