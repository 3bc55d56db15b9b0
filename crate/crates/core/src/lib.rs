pub mod circuit;
pub mod error;
pub mod gaussian;
pub mod jsf;
pub mod measurement;
pub mod metrology;
pub mod oracles;

pub use circuit::{Circuit, Element, SuiParams};
pub use error::{Error, Result};
pub use gaussian::{GaussianState, QuadratureCoefficient};
pub use measurement::MeasurementSpec;
