//! Density-to-potential maps over `(v_ext, j_ext)` grids, polaritonic cuts,
//! map inversion, exact xc potentials and response diagnostics.

mod grid;
mod invert;
mod profile;
mod sweep;
mod table;
mod xc;

pub use grid::{linspace, MapGrid};
pub use invert::{
    invert_kohn_sham, invert_map, invert_monotone, invert_polaritonic, DipoleMap, Inversion,
    InversionOptions, Root,
};
pub use profile::{
    find_peaks, plateau_width, polariton_cut, polarizability, steepening_diagnostics, trapezoid,
    CutDirection, Peak, Profile, Steepening,
};
pub use sweep::{profile_sweep, sweep, SweepMode};
pub use table::{format_float, MapRow, MapTable, PointStatus, MAP_HEADER};
pub use xc::{xc_map, xc_potential, XcRecord, XcRow, XcTable, XC_HEADER};

use thiserror::Error;

use crate::solver::SolverError;

#[derive(Debug, Error)]
pub enum MapsError {
    #[error("grid error: {0}")]
    Grid(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("target d = {target} outside the attainable interval [{min}, {max}]")]
    Unattainable { target: f64, min: f64, max: f64 },
    #[error("inversion for d = {target} stalled with residual {residual:e}")]
    InversionFailed { target: f64, residual: f64 },
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
