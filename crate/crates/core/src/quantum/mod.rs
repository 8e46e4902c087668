//! Dense complex linear algebra and the finite-dimensional quantum toolkit:
//! states, unitary evolution, Kraus channels, projective measurement.

mod channel;
mod matrix;
mod measurement;
mod state;

pub(crate) use channel::check_probabilities;
pub use channel::{apply_channel, KrausChannel};
pub use matrix::{
    c, commutator_norm, is_unitary, tensor_all, tensor_product, tensor_product_capped, unitarity_deviation,
    ComplexMatrix, C64, DEFAULT_DIM_CAP, TOL,
};
pub use measurement::{measure, outcome_probabilities, sample_outcome, MeasurementBasis, Outcome};
pub use state::{evolve_density, tensor_unitaries, DensityMatrix, PureState, UnitaryOperator};
