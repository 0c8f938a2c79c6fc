pub mod bench;
pub mod compress;
pub mod oracle;
pub mod plan;
pub mod spectrum;
pub mod stability;
pub mod synth;
