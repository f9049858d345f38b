//! SNN/QNN twin construction and analytical energy model.
//!
//! * [`neuron`]: exact integrate-and-fire simulation and the spike-count closed form.
//! * [`twin`]: the quantized twin, equivalence checks, spike-rate/sparsity scenarios.
//! * [`energy`]: compute and data-movement energies, advantage conditions, totals.
//! * [`analysis`]: breakeven rates, transmission threshold, landscape and sensitivity sweeps.
//! * [`verify`]: randomized verification of the spike-count closed form at scale.

pub mod analysis;
pub mod energy;
pub mod error;
pub mod neuron;
pub mod rational;
pub mod twin;
pub mod verify;

pub use error::{Error, Result};
pub use rational::Rational;
