//! Positive linear maps between matrix algebras: Choi-matrix calculus,
//! cone membership tests, bi-dual face probes and the Woronowicz kernel
//! criterion for exposed rays of the cone of positive maps.

pub mod bidual;
pub mod cone;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod random;
pub mod woronowicz;

pub use error::{PosmapError, Result};
pub use linalg::{CVector, ComplexMatrix, IndexPair, Tolerance, C64};
pub use maps::MapRep;
