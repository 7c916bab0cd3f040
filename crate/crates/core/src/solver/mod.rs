//! Linear and nonlinear solvers on uniform grids.

mod caccioppoli;
mod cg;
mod energy;
mod io;
mod laplacian;
mod linear;
mod ncg;
mod sparse;

pub use caccioppoli::{caccioppoli_data, CaccioppoliData, Sign};
pub use cg::{pcg, CgOptions, CgOutcome, LinearOperator};
pub use energy::{p_energy, PEnergy};
pub use io::{read_field, write_field};
pub use laplacian::MaskedLaplacian;
pub use linear::{solve_linear, BoundaryData, Coefficient, DirichletProblem, LinearSolution};
pub use ncg::{nonlinear_cg, NcgOptions, NcgOutcome, Objective};
pub use sparse::CsrMatrix;
