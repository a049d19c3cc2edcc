//! Behavioral model of a thermometer-coded compute-in-memory crossbar.

mod crossbar;
mod thermometer;

pub use crossbar::{
    adc_readout, attention_scores_crossbar, program, program_matrix, program_with_slices, AdcBits,
    AdcConfig, CrossbarArray, NoiseModel, ReadSummary,
};
pub use thermometer::{thermometer_decode, thermometer_encode, DEFAULT_SLICES};
