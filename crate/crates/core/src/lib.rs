pub mod census;
pub mod lattice;
pub mod oracle;
pub mod ppt;

pub use lattice::{ColumnFamily, LatticeError, LatticeIndex, RowMask, Sign, SignOracle, StateSet};
