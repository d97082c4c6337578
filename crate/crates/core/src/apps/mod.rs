//! Experiments built on the transforms: data generators, compression, contrast
//! enhancement, and the tabular and figure reports.

pub mod compress;
pub mod config;
pub mod enhance;
pub mod figures;
pub mod gen;
pub mod tables;

pub use compress::{compress, threshold_global, CompressionReport};
pub use config::{ConeParams, ExperimentConfig};
pub use enhance::{affected_indices, enhance};
pub use gen::{add_noise, gen_morlet, gen_so3_curve, wrap_on_cone};
pub use tables::run_table;
