pub mod analysis;
pub mod constitutive;
pub mod error;
pub mod governing;
pub mod jet;
pub mod manufactured;
pub mod solver;
pub mod state;
pub mod stencil;

pub use error::{Error, Result};
pub use governing::{ConservedFields, Model, ModelVariant, StateDerivative};
pub use state::{Boundary, FlowState, GasModel, Grid1D, TransportCoefficients};
