//! Simultaneous structure of quadratic pencils, rank-2 extreme elements of codimension-2
//! cones, and the classifier for degree at most four.

mod classify;
mod pencil;
mod rank2;

pub use classify::{classify_codim1, classify_small, full_planes, tangent_matrix, ClassLabel};
pub use pencil::{pencil_decompose, Pencil, PencilBlock, PencilDecomposition};
pub use rank2::{biquartic_p, codim2_structure, rank2_extreme_check, rank2_matrix, Codim2Structure};
