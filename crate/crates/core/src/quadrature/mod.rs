//! Discrete area-formula measures on intrinsic graphs, ball queries, Christ
//! dyadic cubes and projection diagnostics.

pub mod ball;
pub mod cubes;
pub mod io;
pub mod measure;
pub mod projection;

pub use ball::{BallIndex, SpatialHash, BRUTE_FORCE_LIMIT};
pub use cubes::{boundary_exponent, boundary_layer, build_christ_cubes, ChristCubeTree, Cube};
pub use measure::{adr_ratios, build_graph_measure, AdrReport, Domain, GraphMeasure};
pub use projection::{projected_ball_area, AreaEstimate};
