//! Dense and LSTM regressors with hand-written backpropagation and Adam.
//!
//! Matrix products go through `matrixmultiply` on a single thread, so a
//! training run is a pure function of its dataset, configuration and seed.

mod adam;
mod checkpoint;
mod dense;
mod gradcheck;
mod lstm;
mod model;
mod predict;
mod tensor;
mod train;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use checkpoint::{Checkpoint, NamedTensor, TrainingMeta, CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use dense::{mlp_forward, Activation, DenseLayer};
pub use gradcheck::{compare_gradients, gradcheck_architecture, gradient_check, FD_STEP};
pub use lstm::{lstm_forward, LstmCell, LstmStates};
pub use model::{mse_loss, ArchDescriptor, ArchKind, Architecture, Batch, Model};
pub use predict::{
    predict_dataset, predict_inputs, PredictionRecord, Predictions, PredictionsHeader, PREDICTIONS_FORMAT,
    PREDICTIONS_VERSION,
};
pub use tensor::Tensor;
pub use train::{train, train_with, write_training_log, EpochRecord, TrainConfig, TrainOutcome};
