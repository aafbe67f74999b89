//! States, observables, operations, instruments and measurement schemes.

pub mod instrument;
pub mod observable;
pub mod operation;
pub mod scheme;
pub mod state;

pub use instrument::Instrument;
pub use observable::Observable;
pub use operation::{superop_to_choi, Channel, Operation};
pub use scheme::{restriction, restriction_superoperator, MeasurementScheme};
pub use state::State;
