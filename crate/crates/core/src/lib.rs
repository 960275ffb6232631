// Negated comparisons such as `!(x > 0.0)` are used on purpose: they reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod error;
pub mod forces;
pub mod geom;
pub mod intersect;
pub mod md;
pub mod periodic;
pub mod rng;
pub mod rsa;
pub mod sample;
pub mod voxel;
