//! Finite-dimensional quantum measurement theory under a rank-based third law.
//!
//! Observables, instruments, channels and measurement schemes live in [`qm`];
//! the decision procedures are split across [`classify`], [`thirdlaw`],
//! [`algebra`] and [`properties`]. [`models`] builds the worked examples and
//! seeded random fixtures, [`table`] assembles the possibility table and
//! [`io`] reads and writes JSON model files.

pub mod algebra;
pub mod batch;
pub mod classify;
pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod properties;
pub mod qm;
pub mod table;
pub mod thirdlaw;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, Tolerances};
pub use qm::{Channel, Instrument, MeasurementScheme, Observable, Operation, State};
