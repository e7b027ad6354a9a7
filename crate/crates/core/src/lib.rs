pub mod bch;
pub mod bda;
pub mod bits;
pub mod commitment;
pub mod evaluation;
pub mod pipeline;
pub mod randproj;
pub mod rng;
pub mod vectors;
mod wire;

pub use wire::WireError;
