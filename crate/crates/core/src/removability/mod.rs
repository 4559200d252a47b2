//! Horizontal paths, potentials of the fundamental solution and the
//! harmonicity diagnostics used to exhibit non-removable graphs.

pub mod io;
pub mod pairing;
pub mod paths;
pub mod potential;

pub use io::{read_hpt1, write_hpt1, HPT1_MAGIC};
pub use pairing::{nonharmonicity_pairing, Pairing, PlateauBox, PLATEAU_MARGIN};
pub use paths::{horizontal_path, length_ratio, HorizontalPath, Segment};
pub use potential::{
    check_harmonic_off_support, fd_gradient_sup, fundamental_solution, lipschitz_stat, observed_order, potential,
    potential_lattice, sample_pairs, shell_points, Charges, HarmonicReport, HarmonicRow, Lattice, LipschitzStat,
};
