//! Grids, node masks, scalar fields and the calculus on them.

mod field;
mod grid;
mod mask;

pub use field::{measure, GradientField, ScalarField};
pub use grid::{UniformGrid, MAX_DIM, MIN_CELLS, MIN_DIM};
pub use mask::{MaskTag, SetMask};
