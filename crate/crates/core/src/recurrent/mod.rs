//! Recurrent sequence classifiers (RNN, GRU, LSTM) over frozen token
//! embeddings, trained by backpropagation through time with early stopping.

mod cell;
mod early_stop;
mod model;

pub use cell::{gru_cell, lstm_cell, rnn_cell, CellKind, CellParams};
pub use early_stop::{best_epoch, early_stop, StopDecision, TrainHistory};
pub use model::{
    embed_sequence, sequence_objective, sequence_probs, train_sequence_model, Pooling, SeqConfig,
    SeqShape, SequenceModel,
};
