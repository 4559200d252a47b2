//! Singular integral operators on graph measures.

pub mod ab;
pub mod operators;
pub mod t1;

pub use ab::{ab_integral, ubvp_plane_norm, AbValue, PlaneGrid, PlaneNorm};
pub use operators::{
    apply_truncated, default_radii, lp_piece_sup, maximal_function, smooth_sio, smooth_sio_by_pieces,
    smooth_vs_truncated, truncated_sio, SioValue,
};
pub use t1::{t1_test, T1Pair, T1Report, T1Row};
