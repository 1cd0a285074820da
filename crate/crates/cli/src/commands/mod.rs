pub mod analyze;
pub mod attack;
pub mod distill;
pub mod synth;
pub mod train;
pub mod transfer;
