pub mod cli;
pub mod cone_model;
pub mod constructions;
pub mod decompose;
pub mod error;
pub mod isomorph;
pub mod pencil_struct;
pub mod qcqp_relax;
mod sdp;
mod serde_util;
pub mod symlin;
